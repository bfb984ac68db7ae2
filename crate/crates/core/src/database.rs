//! A loaded bundle together with its compiled rules and per-space closures,
//! plus the aggregate validation report used by reviewers.

use std::path::Path;

use serde::Serialize;

use crate::corpus::{
    load_bundle, load_documents, Bundle, BundleError, BundleReport, SourceDocument,
};
use crate::deduction::{close_bundle, ClosedBundle, Contradiction, Engine};
use crate::id::EntityId;

#[derive(Debug, Clone)]
pub struct Database {
    pub bundle: Bundle,
    pub engine: Engine,
    pub closed: ClosedBundle,
}

impl Database {
    pub fn new(bundle: Bundle) -> Self {
        let engine = Engine::from_bundle(&bundle);
        let closed = close_bundle(&bundle, &engine);
        Database {
            bundle,
            engine,
            closed,
        }
    }

    pub fn load(root: &Path) -> Result<Self, BundleReport> {
        load_bundle(root).map(Database::new)
    }

    pub fn from_documents(docs: Vec<SourceDocument>) -> Result<Self, BundleReport> {
        load_documents(docs).map(Database::new)
    }

    pub fn report(&self) -> ValidationReport {
        ValidationReport {
            errors: Vec::new(),
            contradictions: self
                .closed
                .contradictions()
                .map(|(space, c)| SpaceContradiction {
                    space,
                    contradiction: c.clone(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SpaceContradiction {
    pub space: EntityId,
    pub contradiction: Contradiction,
}

/// Load errors and per-space contradictions. Deduction only runs when the
/// bundle loads cleanly, so at most one of the two lists is nonempty.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub errors: Vec<BundleError>,
    pub contradictions: Vec<SpaceContradiction>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.errors.is_empty() && self.contradictions.is_empty()
    }
}

impl From<BundleReport> for ValidationReport {
    fn from(report: BundleReport) -> Self {
        ValidationReport {
            errors: report.errors,
            contradictions: Vec::new(),
        }
    }
}

/// Loads and closes a document set, collecting every finding.
pub fn validate_documents(docs: Vec<SourceDocument>) -> (ValidationReport, Option<Database>) {
    match Database::from_documents(docs) {
        Ok(db) => (db.report(), Some(db)),
        Err(report) => (report.into(), None),
    }
}
