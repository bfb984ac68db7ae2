//! Is a candidate implication already known, refuted by the theorems, or
//! contradicted by a space in the bundle?

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{
    expand_proof, ClosedBundle, Contradiction, Engine, ProofStep, Propagation, Provenance,
};
use crate::corpus::Bundle;
use crate::id::EntityId;
use crate::logic::{Assignment, Literal};

/// A theorem-shaped implication that is not (yet) part of the bundle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Implication {
    pub premises: Vec<Literal>,
    pub conclusion: Literal,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CandidateError {
    #[error("a candidate needs at least one premise")]
    NoPremises,
    #[error("unknown property {0}")]
    UnknownProperty(EntityId),
    #[error("property {0} appears more than once among the premises")]
    DuplicatePremise(EntityId),
    #[error("conclusion property {0} also appears among the premises")]
    ConclusionInPremises(EntityId),
}

impl Implication {
    pub fn new(premises: Vec<Literal>, conclusion: Literal) -> Self {
        Implication {
            premises,
            conclusion,
        }
    }

    pub fn validate(&self, bundle: &Bundle) -> Result<(), CandidateError> {
        if self.premises.is_empty() {
            return Err(CandidateError::NoPremises);
        }
        for (i, l) in self.premises.iter().enumerate() {
            if self.premises[..i].iter().any(|p| p.property == l.property) {
                return Err(CandidateError::DuplicatePremise(l.property));
            }
            if l.property == self.conclusion.property {
                return Err(CandidateError::ConclusionInPremises(l.property));
            }
        }
        for l in self
            .premises
            .iter()
            .chain(std::iter::once(&self.conclusion))
        {
            if bundle.property(l.property).is_none() {
                return Err(CandidateError::UnknownProperty(l.property));
            }
        }
        Ok(())
    }

    pub fn assumptions(&self) -> Assignment {
        self.premises.iter().copied().collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Redundancy {
    /// The conclusion follows from the premises.
    Redundant { proof: Vec<ProofStep> },
    /// The negated conclusion follows from the premises.
    RefutedByTheory { proof: Vec<ProofStep> },
    /// The premises alone are contradictory, so the implication holds
    /// vacuously.
    Vacuous { contradiction: Contradiction },
    /// Unit propagation decides nothing; the implication may still be
    /// true or false.
    NotDerivable,
}

/// Propagates the candidate's premises and looks at the conclusion.
/// `NotDerivable` only means unit propagation could not decide it.
pub fn check_redundant(
    candidate: &Implication,
    bundle: &Bundle,
    engine: &Engine,
) -> Result<Redundancy, CandidateError> {
    candidate.validate(bundle)?;
    let closure = match engine.propagate(&candidate.assumptions()) {
        Propagation::Closed(c) => c,
        Propagation::Contradiction(contradiction) => {
            return Ok(Redundancy::Vacuous { contradiction })
        }
    };
    let target = candidate.conclusion;
    Ok(match closure.value(target.property) {
        None => Redundancy::NotDerivable,
        Some(v) => {
            let proof = expand_proof(&closure, target.property)
                .expect("conclusion is derived, not assumed");
            if v == target.value {
                Redundancy::Redundant { proof }
            } else {
                Redundancy::RefutedByTheory { proof }
            }
        }
    })
}

/// A space refuting a candidate: it satisfies every premise and the
/// negated conclusion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub space: EntityId,
    pub refuting: Literal,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Counterexamples {
    pub witnesses: Vec<Witness>,
    /// Spaces not ruled out but with some relevant property unknown.
    pub undecided: Vec<EntityId>,
}

pub fn find_counterexamples(
    candidate: &Implication,
    bundle: &Bundle,
    closed: &ClosedBundle,
) -> Counterexamples {
    let mut found = Counterexamples::default();
    let refuting = candidate.conclusion.negate();
    for (space, closure) in closed.closures() {
        let relevant = || candidate.premises.iter().chain(std::iter::once(&refuting));
        // Ruled out: some premise fails or the conclusion holds.
        if relevant().any(|l| closure.value(l.property) == Some(!l.value)) {
            continue;
        }
        if relevant().all(|l| closure.value(l.property) == Some(l.value)) {
            let provenance = Provenance::of(bundle, space, closure, refuting.property)
                .expect("refuting literal is known");
            found.witnesses.push(Witness {
                space,
                refuting,
                provenance,
            });
        } else {
            found.undecided.push(space);
        }
    }
    found
}

/// Verdict on a candidate against the theorems first, then the spaces.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Assessment {
    Redundant {
        proof: Vec<ProofStep>,
    },
    RefutedByTheory {
        proof: Vec<ProofStep>,
    },
    Vacuous {
        contradiction: Contradiction,
    },
    /// Some space satisfies the premises and the negated conclusion.
    Refuted {
        counterexamples: Vec<Witness>,
    },
    /// Neither decided by the theorems nor refuted by a space.
    NotDerivable {
        undecided: Vec<EntityId>,
    },
}

pub fn assess(
    candidate: &Implication,
    bundle: &Bundle,
    engine: &Engine,
    closed: &ClosedBundle,
) -> Result<Assessment, CandidateError> {
    Ok(match check_redundant(candidate, bundle, engine)? {
        Redundancy::Redundant { proof } => Assessment::Redundant { proof },
        Redundancy::RefutedByTheory { proof } => Assessment::RefutedByTheory { proof },
        Redundancy::Vacuous { contradiction } => Assessment::Vacuous { contradiction },
        Redundancy::NotDerivable => {
            let found = find_counterexamples(candidate, bundle, closed);
            if found.witnesses.is_empty() {
                Assessment::NotDerivable {
                    undecided: found.undecided,
                }
            } else {
                Assessment::Refuted {
                    counterexamples: found.witnesses,
                }
            }
        }
    })
}
