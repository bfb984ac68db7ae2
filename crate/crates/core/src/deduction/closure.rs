use std::collections::BTreeMap;

use serde::Serialize;

use super::{Closure, Contradiction, Engine, Propagation};
use crate::corpus::Bundle;
use crate::id::EntityId;
use crate::logic::{Assignment, Literal};

/// Per-space propagation results for a whole bundle, keyed by space uid.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ClosedBundle {
    pub spaces: BTreeMap<EntityId, Propagation>,
}

impl ClosedBundle {
    pub fn get(&self, space: EntityId) -> Option<&Propagation> {
        self.spaces.get(&space)
    }

    pub fn closure(&self, space: EntityId) -> Option<&Closure> {
        self.spaces.get(&space).and_then(Propagation::closure)
    }

    pub fn closures(&self) -> impl Iterator<Item = (EntityId, &Closure)> {
        self.spaces
            .iter()
            .filter_map(|(&id, p)| p.closure().map(|c| (id, c)))
    }

    pub fn contradictions(&self) -> impl Iterator<Item = (EntityId, &Contradiction)> {
        self.spaces
            .iter()
            .filter_map(|(&id, p)| p.contradiction().map(|c| (id, c)))
    }

    pub fn is_consistent(&self) -> bool {
        self.contradictions().next().is_none()
    }
}

/// The asserted traits of one space as propagation assumptions.
pub fn space_assumptions(bundle: &Bundle, space: EntityId) -> Assignment {
    bundle
        .assertions_of(space)
        .map(|a| Literal::new(a.property, a.value))
        .collect()
}

pub fn close_bundle_sequential(bundle: &Bundle, engine: &Engine) -> ClosedBundle {
    let spaces = bundle
        .spaces()
        .map(|s| (s.uid, engine.propagate(&space_assumptions(bundle, s.uid))))
        .collect();
    ClosedBundle { spaces }
}

/// Spaces are independent, so each is closed on the rayon pool. The
/// result is identical to [`close_bundle_sequential`].
#[cfg(feature = "parallel")]
pub fn close_bundle_parallel(bundle: &Bundle, engine: &Engine) -> ClosedBundle {
    use rayon::prelude::*;

    let ids: Vec<EntityId> = bundle.spaces().map(|s| s.uid).collect();
    let outcomes: Vec<(EntityId, Propagation)> = ids
        .par_iter()
        .map(|&id| (id, engine.propagate(&space_assumptions(bundle, id))))
        .collect();
    ClosedBundle {
        spaces: outcomes.into_iter().collect(),
    }
}

/// Closes every space, in parallel when the `parallel` feature is on.
pub fn close_bundle(bundle: &Bundle, engine: &Engine) -> ClosedBundle {
    #[cfg(feature = "parallel")]
    {
        close_bundle_parallel(bundle, engine)
    }
    #[cfg(not(feature = "parallel"))]
    {
        close_bundle_sequential(bundle, engine)
    }
}
