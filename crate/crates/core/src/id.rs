//! Typed identifiers for properties, spaces and theorems.
//!
//! The canonical text form is one kind letter followed by exactly six
//! zero-padded digits, e.g. `P000001`, `S000165`, `T000042`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Largest number representable in six digits.
pub const MAX_NUMBER: u32 = 999_999;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntityKind {
    Property,
    Space,
    Theorem,
}

impl EntityKind {
    pub fn letter(self) -> char {
        match self {
            EntityKind::Property => 'P',
            EntityKind::Space => 'S',
            EntityKind::Theorem => 'T',
        }
    }

    pub fn from_letter(c: char) -> Option<Self> {
        match c {
            'P' => Some(EntityKind::Property),
            'S' => Some(EntityKind::Space),
            'T' => Some(EntityKind::Theorem),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EntityKind::Property => "property",
            EntityKind::Space => "space",
            EntityKind::Theorem => "theorem",
        }
    }
}

impl fmt::Display for EntityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IdError {
    #[error("`{0}` is not an id of the form P######, S###### or T######")]
    Malformed(String),
    #[error("`{0}` has number zero; ids start at 1")]
    Zero(String),
    #[error("expected a {expected} id, found `{found}`")]
    WrongKind {
        expected: EntityKind,
        found: EntityId,
    },
}

/// Identifier of a corpus entity. Ordered by kind, then number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EntityId {
    kind: EntityKind,
    number: u32,
}

impl EntityId {
    /// Panics if `number` is zero or does not fit in six digits.
    pub fn new(kind: EntityKind, number: u32) -> Self {
        Self::try_new(kind, number).expect("entity number out of range")
    }

    pub fn try_new(kind: EntityKind, number: u32) -> Option<Self> {
        (1..=MAX_NUMBER)
            .contains(&number)
            .then_some(EntityId { kind, number })
    }

    pub fn property(number: u32) -> Self {
        Self::new(EntityKind::Property, number)
    }

    pub fn space(number: u32) -> Self {
        Self::new(EntityKind::Space, number)
    }

    pub fn theorem(number: u32) -> Self {
        Self::new(EntityKind::Theorem, number)
    }

    pub fn kind(self) -> EntityKind {
        self.kind
    }

    pub fn number(self) -> u32 {
        self.number
    }

    /// Parses `text` and checks that it names an entity of `kind`.
    pub fn parse_kind(text: &str, kind: EntityKind) -> Result<Self, IdError> {
        let id: EntityId = text.parse()?;
        if id.kind != kind {
            return Err(IdError::WrongKind {
                expected: kind,
                found: id,
            });
        }
        Ok(id)
    }
}

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{:06}", self.kind.letter(), self.number)
    }
}

impl FromStr for EntityId {
    type Err = IdError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let malformed = || IdError::Malformed(s.to_string());
        let mut chars = s.chars();
        let kind = chars
            .next()
            .and_then(EntityKind::from_letter)
            .ok_or_else(malformed)?;
        let digits = chars.as_str();
        if digits.len() != 6 || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(malformed());
        }
        let number: u32 = digits.parse().map_err(|_| malformed())?;
        EntityId::try_new(kind, number).ok_or_else(|| IdError::Zero(s.to_string()))
    }
}

impl Serialize for EntityId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for EntityId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}
