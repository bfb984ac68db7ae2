//! A file-backed database of mathematical objects ("spaces"), boolean
//! properties, asserted traits and implication theorems.
//!
//! [`corpus`] reads and cross-checks a bundle of documents, [`logic`]
//! turns theorems into rules and parses queries, [`deduction`] closes each
//! space under the rules with proof traces, and [`search`] answers
//! conjunctive queries, producing an impossibility proof when the theorems
//! rule a query out.

pub mod corpus;
pub mod database;
pub mod deduction;
pub mod id;
pub mod logic;
pub mod search;
pub mod synthetic;

pub use corpus::{load_bundle, Bundle};
pub use database::{validate_documents, Database, ValidationReport};
pub use deduction::{Closure, Contradiction, Engine, ProofStep, Propagation};
pub use id::{EntityId, EntityKind};
pub use logic::{Literal, Query};
