//! The four document kinds of a bundle and the loaded, cross-checked
//! [`Bundle`] itself.
//!
//! A bundle on disk looks like:
//!
//! ```text
//! properties/P000001.md
//! spaces/S000001/README.md
//! spaces/S000001/properties/P000052.md
//! theorems/T000042.md
//! ```
//!
//! Every document is a `---` delimited YAML header followed by a free-text
//! body. Bodies are kept verbatim; `{{scheme:key}}` citation tokens are
//! indexed but never rewritten.

mod bundle;
mod parse;
mod serialize;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::id::EntityId;
use crate::logic::Literal;

pub use bundle::{
    load_bundle, load_documents, read_documents, Bundle, BundleError, BundleErrorKind,
    BundleReport, Namespace, ResolveError, SourceDocument, Sourced,
};
pub use parse::{parse_document, ParseError, ParseErrorKind};
pub use serialize::serialize_document;

/// Reference scheme of a citation. Unrecognised schemes are preserved.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Scheme {
    Doi,
    Wikipedia,
    MathSe,
    MrOnline,
    Other(String),
}

impl Scheme {
    pub fn parse(text: &str) -> Scheme {
        match text {
            "doi" => Scheme::Doi,
            "wikipedia" => Scheme::Wikipedia,
            "mathse" => Scheme::MathSe,
            "mronline" => Scheme::MrOnline,
            other => Scheme::Other(other.to_string()),
        }
    }

    pub fn as_str(&self) -> &str {
        match self {
            Scheme::Doi => "doi",
            Scheme::Wikipedia => "wikipedia",
            Scheme::MathSe => "mathse",
            Scheme::MrOnline => "mronline",
            Scheme::Other(s) => s,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for Scheme {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Scheme {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        Ok(Scheme::parse(&String::deserialize(deserializer)?))
    }
}

/// An entry of a document's `refs` list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Citation {
    pub scheme: Scheme,
    pub key: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

/// A `{{scheme:key}}` occurrence inside a document body.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CitationToken {
    pub scheme: Scheme,
    pub key: String,
    /// Byte offset of the opening `{{` within the body.
    pub offset: usize,
}

/// Markup body of a document plus its citation token index.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Description {
    pub text: String,
    pub tokens: Vec<CitationToken>,
}

impl Description {
    pub fn is_empty(&self) -> bool {
        self.text.is_empty()
    }
}

/// A property or a space: both carry an id, a display name, aliases,
/// references and a description.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entity {
    pub uid: EntityId,
    pub name: String,
    pub aliases: Vec<String>,
    pub refs: Vec<Citation>,
    pub description: Description,
}

impl Entity {
    /// The display name followed by every alias.
    pub fn names(&self) -> impl Iterator<Item = &str> {
        std::iter::once(self.name.as_str()).chain(self.aliases.iter().map(String::as_str))
    }
}

pub type Property = Entity;
pub type Space = Entity;

/// A boolean value asserted for one (space, property) pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraitAssertion {
    pub space: EntityId,
    pub property: EntityId,
    pub value: bool,
    pub refs: Vec<Citation>,
    pub description: Description,
}

/// An implication from a conjunction of property literals to one literal.
/// Premises keep document order; that order fixes contrapositive indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Theorem {
    pub uid: EntityId,
    pub premises: Vec<Literal>,
    pub conclusion: Literal,
    pub refs: Vec<Citation>,
    pub description: Description,
}

impl Theorem {
    pub fn properties(&self) -> impl Iterator<Item = EntityId> + '_ {
        self.premises
            .iter()
            .map(|l| l.property)
            .chain(std::iter::once(self.conclusion.property))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DocumentKind {
    Property,
    Space,
    Trait,
    Theorem,
}

impl DocumentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DocumentKind::Property => "property",
            DocumentKind::Space => "space",
            DocumentKind::Trait => "trait",
            DocumentKind::Theorem => "theorem",
        }
    }
}

impl fmt::Display for DocumentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Document {
    Property(Property),
    Space(Space),
    Trait(TraitAssertion),
    Theorem(Theorem),
}

impl Document {
    pub fn kind(&self) -> DocumentKind {
        match self {
            Document::Property(_) => DocumentKind::Property,
            Document::Space(_) => DocumentKind::Space,
            Document::Trait(_) => DocumentKind::Trait,
            Document::Theorem(_) => DocumentKind::Theorem,
        }
    }

    pub fn description(&self) -> &Description {
        match self {
            Document::Property(e) | Document::Space(e) => &e.description,
            Document::Trait(t) => &t.description,
            Document::Theorem(t) => &t.description,
        }
    }
}
