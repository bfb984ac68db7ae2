//! Unit propagation over compiled rules, with proof traces.
//!
//! Propagation repeatedly scans the rules in compiled order (ascending
//! theorem uid, forward before contrapositives). A rule fires when every
//! premise holds and its conclusion is still unknown; assignments made
//! during a scan are visible to the rest of that scan. The first rule to
//! assign a property supplies its proof. A rule whose premises hold but
//! whose conclusion is already assigned the opposite value ends
//! propagation with a [`Contradiction`].

mod closure;
mod fingerprint;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Bundle, Citation};
use crate::id::EntityId;
use crate::logic::{compile_rules, Assignment, Literal, Rule, RuleMode};

#[cfg(feature = "parallel")]
pub use closure::close_bundle_parallel;
pub use closure::{close_bundle, close_bundle_sequential, space_assumptions, ClosedBundle};
pub use fingerprint::{
    assess, check_redundant, find_counterexamples, Assessment, CandidateError, Counterexamples,
    Implication, Redundancy, Witness,
};

/// One rule application in a proof.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProofStep {
    pub derived: Literal,
    pub theorem: EntityId,
    pub mode: RuleMode,
    /// The rule's premises, each asserted or derived by an earlier step.
    pub supports: Vec<Literal>,
}

/// Result of propagating from consistent assumptions.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Closure {
    pub assignment: Assignment,
    /// Properties whose value came from the assumptions.
    pub asserted: BTreeSet<EntityId>,
    /// The proof step of every derived property.
    pub steps: BTreeMap<EntityId, ProofStep>,
}

impl Closure {
    pub fn value(&self, property: EntityId) -> Option<bool> {
        self.assignment.value(property)
    }

    pub fn is_asserted(&self, property: EntityId) -> bool {
        self.asserted.contains(&property)
    }

    pub fn derived_count(&self) -> usize {
        self.steps.len()
    }
}

/// One side of a conflict: a value and how it was obtained.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Justification {
    pub value: bool,
    /// True when the value is an assumption rather than a derivation.
    pub asserted: bool,
    pub proof: Vec<ProofStep>,
}

/// A property forced both true and false, with the trace of each side.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Contradiction {
    pub property: EntityId,
    /// The value the conflicting rule tried to derive.
    pub derived: Justification,
    /// The value already held when that rule fired.
    pub existing: Justification,
}

impl Contradiction {
    /// Every theorem used by either side.
    pub fn theorems(&self) -> BTreeSet<EntityId> {
        self.derived
            .proof
            .iter()
            .chain(&self.existing.proof)
            .map(|s| s.theorem)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Propagation {
    Closed(Closure),
    Contradiction(Contradiction),
}

impl Propagation {
    pub fn closure(&self) -> Option<&Closure> {
        match self {
            Propagation::Closed(c) => Some(c),
            Propagation::Contradiction(_) => None,
        }
    }

    pub fn contradiction(&self) -> Option<&Contradiction> {
        match self {
            Propagation::Closed(_) => None,
            Propagation::Contradiction(c) => Some(c),
        }
    }
}

/// Where a known trait value comes from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Asserted { refs: Vec<Citation> },
    Derived { proof: Vec<ProofStep> },
}

impl Provenance {
    /// Provenance of `property` in a space's closure; `None` when unknown.
    pub fn of(
        bundle: &Bundle,
        space: EntityId,
        closure: &Closure,
        property: EntityId,
    ) -> Option<Provenance> {
        closure.value(property)?;
        if closure.is_asserted(property) {
            let refs = bundle
                .assertion(space, property)
                .map(|a| a.refs.clone())
                .unwrap_or_default();
            Some(Provenance::Asserted { refs })
        } else {
            expand_proof(closure, property)
                .ok()
                .map(|proof| Provenance::Derived { proof })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum ProofError {
    #[error("{0} is asserted, not derived")]
    Asserted(EntityId),
    #[error("{0} is not known")]
    Unknown(EntityId),
}

/// Steps leading to `property`, supports before the steps they feed,
/// each step once.
pub fn expand_proof(closure: &Closure, property: EntityId) -> Result<Vec<ProofStep>, ProofError> {
    if closure.is_asserted(property) {
        return Err(ProofError::Asserted(property));
    }
    if !closure.steps.contains_key(&property) {
        return Err(ProofError::Unknown(property));
    }
    Ok(expand(&closure.steps, [property]))
}

fn expand(
    steps: &BTreeMap<EntityId, ProofStep>,
    targets: impl IntoIterator<Item = EntityId>,
) -> Vec<ProofStep> {
    fn visit(
        steps: &BTreeMap<EntityId, ProofStep>,
        property: EntityId,
        seen: &mut BTreeSet<EntityId>,
        out: &mut Vec<ProofStep>,
    ) {
        if !seen.insert(property) {
            return;
        }
        if let Some(step) = steps.get(&property) {
            for support in &step.supports {
                visit(steps, support.property, seen, out);
            }
            out.push(step.clone());
        }
    }
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for t in targets {
        visit(steps, t, &mut seen, &mut out);
    }
    out
}

const NO_RULE: u32 = u32::MAX;

#[derive(Debug, Clone)]
struct CompiledRule {
    premises: std::ops::Range<usize>,
    conclusion: (u32, bool),
}

/// Compiled rules over a dense property index. Immutable and shareable
/// across threads.
#[derive(Debug, Clone, Default)]
pub struct Engine {
    rules: Vec<Rule>,
    compiled: Vec<CompiledRule>,
    premise_pool: Vec<(u32, bool)>,
    slots: HashMap<EntityId, u32>,
    properties: Vec<EntityId>,
    by_source: HashMap<(EntityId, RuleMode), usize>,
}

impl Engine {
    /// Rules must already be in scan order, as produced by
    /// [`compile_rules`].
    pub fn new(rules: Vec<Rule>) -> Self {
        let mut engine = Engine::default();
        for rule in &rules {
            let start = engine.premise_pool.len();
            for l in &rule.premises {
                let slot = engine.slot(l.property);
                engine.premise_pool.push((slot, l.value));
            }
            let conclusion = (engine.slot(rule.conclusion.property), rule.conclusion.value);
            engine.compiled.push(CompiledRule {
                premises: start..engine.premise_pool.len(),
                conclusion,
            });
        }
        engine.by_source = rules
            .iter()
            .enumerate()
            .map(|(i, r)| ((r.source, r.mode), i))
            .collect();
        engine.rules = rules;
        engine
    }

    pub fn from_bundle(bundle: &Bundle) -> Self {
        Engine::new(compile_rules(bundle.theorems()))
    }

    fn slot(&mut self, property: EntityId) -> u32 {
        let next = self.properties.len() as u32;
        *self.slots.entry(property).or_insert_with(|| {
            self.properties.push(property);
            next
        })
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn rule(&self, theorem: EntityId, mode: RuleMode) -> Option<&Rule> {
        self.by_source
            .get(&(theorem, mode))
            .map(|&i| &self.rules[i])
    }

    fn step(&self, rule: u32) -> ProofStep {
        let rule = &self.rules[rule as usize];
        ProofStep {
            derived: rule.conclusion,
            theorem: rule.source,
            mode: rule.mode,
            supports: rule.premises.clone(),
        }
    }

    /// Least fixpoint of unit propagation from `assumptions`.
    pub fn propagate(&self, assumptions: &Assignment) -> Propagation {
        let n = self.properties.len();
        let mut values: Vec<Option<bool>> = vec![None; n];
        let mut reasons: Vec<u32> = vec![NO_RULE; n];
        for l in assumptions.literals() {
            if let Some(&slot) = self.slots.get(&l.property) {
                values[slot as usize] = Some(l.value);
            }
        }

        loop {
            let mut changed = false;
            for (index, rule) in self.compiled.iter().enumerate() {
                let (slot, value) = rule.conclusion;
                let current = values[slot as usize];
                if current == Some(value) {
                    continue;
                }
                let fires = self.premise_pool[rule.premises.clone()]
                    .iter()
                    .all(|&(s, v)| values[s as usize] == Some(v));
                if !fires {
                    continue;
                }
                if current.is_some() {
                    return Propagation::Contradiction(self.contradiction(
                        assumptions,
                        &values,
                        &reasons,
                        index as u32,
                    ));
                }
                values[slot as usize] = Some(value);
                reasons[slot as usize] = index as u32;
                changed = true;
            }
            if !changed {
                break;
            }
        }
        Propagation::Closed(self.closure(assumptions, &values, &reasons))
    }

    fn closure(
        &self,
        assumptions: &Assignment,
        values: &[Option<bool>],
        reasons: &[u32],
    ) -> Closure {
        let mut assignment = assumptions.clone();
        let mut steps = BTreeMap::new();
        for (slot, &reason) in reasons.iter().enumerate() {
            if reason != NO_RULE {
                let property = self.properties[slot];
                let value = values[slot].expect("derived slot has a value");
                assignment
                    .assign(Literal::new(property, value))
                    .expect("derived values never overwrite assumptions");
                steps.insert(property, self.step(reason));
            }
        }
        Closure {
            assignment,
            asserted: assumptions.literals().map(|l| l.property).collect(),
            steps,
        }
    }

    fn contradiction(
        &self,
        assumptions: &Assignment,
        values: &[Option<bool>],
        reasons: &[u32],
        conflicting: u32,
    ) -> Contradiction {
        let partial = self.closure(assumptions, values, reasons);
        let step = self.step(conflicting);
        let property = step.derived.property;
        let mut derived_proof = expand(&partial.steps, step.supports.iter().map(|l| l.property));
        derived_proof.push(step.clone());
        let existing_value = !step.derived.value;
        let existing = if partial.is_asserted(property) {
            Justification {
                value: existing_value,
                asserted: true,
                proof: Vec::new(),
            }
        } else {
            Justification {
                value: existing_value,
                asserted: false,
                proof: expand(&partial.steps, [property]),
            }
        };
        Contradiction {
            property,
            derived: Justification {
                value: step.derived.value,
                asserted: false,
                proof: derived_proof,
            },
            existing,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReplayError {
    #[error("step {index}: no rule {mode} of {theorem}")]
    UnknownRule {
        index: usize,
        theorem: EntityId,
        mode: RuleMode,
    },
    #[error("step {index}: supports or conclusion differ from rule {mode} of {theorem}")]
    RuleMismatch {
        index: usize,
        theorem: EntityId,
        mode: RuleMode,
    },
    #[error("step {index}: support {support} does not hold yet")]
    UnsupportedPremise { index: usize, support: Literal },
    #[error("step {index}: {derived} conflicts with an earlier value")]
    Conflict { index: usize, derived: Literal },
}

/// Checks a proof step by step from `assumptions`, using only the listed
/// rules, and returns everything it establishes. Independent of
/// [`Engine::propagate`].
pub fn replay_proof(
    engine: &Engine,
    assumptions: &Assignment,
    proof: &[ProofStep],
) -> Result<Assignment, ReplayError> {
    let mut known = assumptions.clone();
    for (index, step) in proof.iter().enumerate() {
        let rule = engine
            .rule(step.theorem, step.mode)
            .ok_or(ReplayError::UnknownRule {
                index,
                theorem: step.theorem,
                mode: step.mode,
            })?;
        if rule.premises != step.supports || rule.conclusion != step.derived {
            return Err(ReplayError::RuleMismatch {
                index,
                theorem: step.theorem,
                mode: step.mode,
            });
        }
        if let Some(&support) = step.supports.iter().find(|l| !known.holds(**l)) {
            return Err(ReplayError::UnsupportedPremise { index, support });
        }
        known
            .assign(step.derived)
            .map_err(|_| ReplayError::Conflict {
                index,
                derived: step.derived,
            })?;
    }
    Ok(known)
}

/// Replays both sides of a contradiction from `assumptions` and checks
/// that they end in opposite values for the same property.
pub fn replay_contradiction(
    engine: &Engine,
    assumptions: &Assignment,
    contradiction: &Contradiction,
) -> Result<(), ReplayError> {
    let property = contradiction.property;
    let existing = &contradiction.existing;
    let known = replay_proof(engine, assumptions, &existing.proof)?;
    let held = Literal::new(property, existing.value);
    if !known.holds(held) {
        return Err(ReplayError::UnsupportedPremise {
            index: existing.proof.len(),
            support: held,
        });
    }
    let Some((last, rest)) = contradiction.derived.proof.split_last() else {
        return Err(ReplayError::UnsupportedPremise {
            index: 0,
            support: held.negate(),
        });
    };
    let known = replay_proof(engine, &known, rest)?;
    let index = rest.len();
    let rule = engine
        .rule(last.theorem, last.mode)
        .ok_or(ReplayError::UnknownRule {
            index,
            theorem: last.theorem,
            mode: last.mode,
        })?;
    if rule.premises != last.supports || rule.conclusion != held.negate() {
        return Err(ReplayError::RuleMismatch {
            index,
            theorem: last.theorem,
            mode: last.mode,
        });
    }
    match last.supports.iter().find(|l| !known.holds(**l)) {
        Some(&support) => Err(ReplayError::UnsupportedPremise { index, support }),
        None => Ok(()),
    }
}
