//! Seeded generator of large consistent bundles for benchmarks and
//! scaling tests.
//!
//! Theorems point "upward": a conclusion property always has a larger
//! index than its premises. Each space receives random assertions one at a
//! time, keeping only those that leave the space consistent under the
//! theorems generated so far.

use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Bundle, Description, Document, Entity, Sourced, Theorem, TraitAssertion};
use crate::deduction::{Engine, Propagation};
use crate::id::EntityId;
use crate::logic::{compile_rules, Assignment, Literal};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SyntheticConfig {
    pub spaces: usize,
    pub properties: usize,
    pub theorems: usize,
    pub assertions_per_space: usize,
    pub max_premises: usize,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            spaces: 1000,
            properties: 200,
            theorems: 500,
            assertions_per_space: 12,
            max_premises: 3,
            seed: 0x5eed,
        }
    }
}

fn entity(uid: EntityId, name: String) -> Entity {
    Entity {
        uid,
        name,
        aliases: Vec::new(),
        refs: Vec::new(),
        description: Description::default(),
    }
}

fn theorems(config: &SyntheticConfig, rng: &mut ChaCha8Rng) -> Vec<Theorem> {
    let props = config.properties;
    assert!(props >= 2, "need at least two properties");
    (1..=config.theorems)
        .map(|n| {
            let conclusion = rng.gen_range(1..props);
            let count = rng
                .gen_range(1..=config.max_premises.max(1))
                .min(conclusion);
            let mut below: Vec<usize> = (0..conclusion).collect();
            below.shuffle(rng);
            let premises = below[..count]
                .iter()
                .map(|&i| Literal::new(EntityId::property(i as u32 + 1), rng.gen_bool(0.8)))
                .collect();
            Theorem {
                uid: EntityId::theorem(n as u32),
                premises,
                conclusion: Literal::new(
                    EntityId::property(conclusion as u32 + 1),
                    rng.gen_bool(0.8),
                ),
                refs: Vec::new(),
                description: Description::default(),
            }
        })
        .collect()
}

fn assertions(engine: &Engine, config: &SyntheticConfig, rng: &mut ChaCha8Rng) -> Vec<Literal> {
    let mut order: Vec<usize> = (0..config.properties).collect();
    order.shuffle(rng);
    let mut chosen: Vec<Literal> = Vec::new();
    let mut known = Assignment::new();
    for i in order {
        if chosen.len() == config.assertions_per_space {
            break;
        }
        let property = EntityId::property(i as u32 + 1);
        if known.value(property).is_some() {
            continue;
        }
        let first = rng.gen_bool(0.5);
        for value in [first, !first] {
            let mut trial = chosen.clone();
            trial.push(Literal::new(property, value));
            if let Propagation::Closed(closure) = engine.propagate(&trial.iter().copied().collect())
            {
                chosen = trial;
                known = closure.assignment;
                break;
            }
        }
    }
    chosen
}

/// Builds a consistent bundle. The same config always yields the same
/// bundle.
pub fn generate(config: &SyntheticConfig) -> Bundle {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let theorems = theorems(config, &mut rng);
    let engine = Engine::new(compile_rules(&theorems));

    let mut records = Vec::new();
    for i in 1..=config.properties as u32 {
        let uid = EntityId::property(i);
        records.push(Sourced {
            path: PathBuf::from(format!("properties/{uid}.md")),
            record: Document::Property(entity(uid, format!("Synthetic property {i}"))),
        });
    }
    for i in 1..=config.spaces as u32 {
        let uid = EntityId::space(i);
        records.push(Sourced {
            path: PathBuf::from(format!("spaces/{uid}/README.md")),
            record: Document::Space(entity(uid, format!("Synthetic space {i}"))),
        });
        for l in assertions(&engine, config, &mut rng) {
            records.push(Sourced {
                path: PathBuf::from(format!("spaces/{uid}/properties/{}.md", l.property)),
                record: Document::Trait(TraitAssertion {
                    space: uid,
                    property: l.property,
                    value: l.value,
                    refs: Vec::new(),
                    description: Description::default(),
                }),
            });
        }
    }
    for t in theorems {
        records.push(Sourced {
            path: PathBuf::from(format!("theorems/{}.md", t.uid)),
            record: Document::Theorem(t),
        });
    }
    Bundle::from_records(records).expect("synthetic bundles are well formed")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deduction::close_bundle_sequential;

    #[test]
    fn small_bundle_is_consistent_and_deterministic() {
        let config = SyntheticConfig {
            spaces: 20,
            properties: 30,
            theorems: 40,
            assertions_per_space: 5,
            ..SyntheticConfig::default()
        };
        let a = generate(&config);
        assert_eq!(a, generate(&config));
        assert_eq!(
            (a.space_count(), a.property_count(), a.theorem_count()),
            (20, 30, 40)
        );
        let engine = Engine::from_bundle(&a);
        assert!(close_bundle_sequential(&a, &engine).is_consistent());
    }
}
