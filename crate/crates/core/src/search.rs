//! Conjunctive queries over a closed bundle.
//!
//! Every space gets exactly one verdict. A space lacking information is
//! `Unknown`, never silently treated as refuting. Independently of the
//! spaces, the query literals are propagated on their own; a contradiction
//! there is a proof that no space can match.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::corpus::Bundle;
use crate::deduction::{ClosedBundle, Closure, Contradiction, Engine, Propagation, Provenance};
use crate::id::EntityId;
use crate::logic::{render_query, Literal, Query};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Satisfies,
    /// `literal` is the space's value, the negation of a query literal.
    Refutes {
        literal: Literal,
        provenance: Provenance,
    },
    Unknown {
        undetermined: Vec<EntityId>,
    },
}

impl Verdict {
    pub fn is_match(&self) -> bool {
        matches!(self, Verdict::Satisfies)
    }
}

/// The query's literals contradict the theorems.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ImpossibilityProof {
    pub query: String,
    pub contradiction: Contradiction,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SearchResult {
    pub query: String,
    pub matches: Vec<EntityId>,
    pub verdicts: BTreeMap<EntityId, Verdict>,
    pub impossibility: Option<ImpossibilityProof>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("bundle is inconsistent: {0} space(s) have contradictory traits")]
    InconsistentBundle(usize),
    #[error("unknown space {0}")]
    UnknownSpace(EntityId),
}

fn verdict(bundle: &Bundle, space: EntityId, closure: &Closure, query: &Query) -> Verdict {
    let literals = query.literals();
    if let Some(failed) = literals
        .iter()
        .find(|l| closure.value(l.property) == Some(!l.value))
    {
        let literal = failed.negate();
        let provenance = Provenance::of(bundle, space, closure, literal.property)
            .expect("refuting value is known");
        return Verdict::Refutes {
            literal,
            provenance,
        };
    }
    let undetermined: Vec<EntityId> = literals
        .iter()
        .filter(|l| closure.value(l.property).is_none())
        .map(|l| l.property)
        .collect();
    if undetermined.is_empty() {
        Verdict::Satisfies
    } else {
        Verdict::Unknown { undetermined }
    }
}

/// Runs `query` against every space. Refuses inconsistent bundles.
pub fn search(
    query: &Query,
    bundle: &Bundle,
    closed: &ClosedBundle,
    engine: &Engine,
) -> Result<SearchResult, SearchError> {
    let inconsistent = closed.contradictions().count();
    if inconsistent > 0 {
        return Err(SearchError::InconsistentBundle(inconsistent));
    }
    let verdicts: BTreeMap<EntityId, Verdict> = closed
        .closures()
        .map(|(space, closure)| (space, verdict(bundle, space, closure, query)))
        .collect();
    let matches = verdicts
        .iter()
        .filter(|(_, v)| v.is_match())
        .map(|(&id, _)| id)
        .collect();
    let impossibility = match engine.propagate(&query.assumptions()) {
        Propagation::Contradiction(contradiction) => Some(ImpossibilityProof {
            query: render_query(query),
            contradiction,
        }),
        Propagation::Closed(_) => None,
    };
    Ok(SearchResult {
        query: render_query(query),
        matches,
        verdicts,
        impossibility,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LiteralStatus {
    Holds,
    Fails,
    Undetermined,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LiteralExplanation {
    pub literal: Literal,
    pub status: LiteralStatus,
    pub provenance: Option<Provenance>,
}

/// Per-literal justification of one space's verdict.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Explanation {
    pub space: EntityId,
    pub verdict: Verdict,
    pub literals: Vec<LiteralExplanation>,
}

pub fn explain_verdict(
    space: EntityId,
    query: &Query,
    bundle: &Bundle,
    closed: &ClosedBundle,
) -> Result<Explanation, SearchError> {
    let closure = closed
        .closure(space)
        .ok_or(SearchError::UnknownSpace(space))?;
    let literals = query
        .literals()
        .iter()
        .map(|&literal| {
            let (status, provenance) = match closure.value(literal.property) {
                None => (LiteralStatus::Undetermined, None),
                Some(v) => {
                    let status = if v == literal.value {
                        LiteralStatus::Holds
                    } else {
                        LiteralStatus::Fails
                    };
                    (
                        status,
                        Provenance::of(bundle, space, closure, literal.property),
                    )
                }
            };
            LiteralExplanation {
                literal,
                status,
                provenance,
            }
        })
        .collect();
    Ok(Explanation {
        space,
        verdict: verdict(bundle, space, closure, query),
        literals,
    })
}
