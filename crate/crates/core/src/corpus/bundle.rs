use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::{Component, Path, PathBuf};

use serde::Serialize;
use thiserror::Error;
use walkdir::WalkDir;

use super::parse::{parse_document, ParseErrorKind};
use super::serialize::serialize_document;
use super::{Document, DocumentKind, Entity, Property, Space, Theorem, TraitAssertion};
use crate::id::{EntityId, EntityKind};

/// Raw text of one bundle file, addressed by its path relative to the
/// bundle root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceDocument {
    pub path: PathBuf,
    pub text: String,
}

impl SourceDocument {
    pub fn new(path: impl Into<PathBuf>, text: impl Into<String>) -> Self {
        SourceDocument {
            path: path.into(),
            text: text.into(),
        }
    }
}

/// A record together with the file it was read from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sourced<T> {
    pub record: T,
    pub path: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Namespace {
    Property,
    Space,
}

impl Namespace {
    fn kind(self) -> EntityKind {
        match self {
            Namespace::Property => EntityKind::Property,
            Namespace::Space => EntityKind::Space,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BundleErrorKind {
    #[error("cannot read: {0}")]
    Io(String),
    #[error("{0}")]
    Parse(ParseErrorKind),
    #[error("path does not fit the bundle layout: {0}")]
    Layout(String),
    #[error("path does not match the document: expected {expected}")]
    PathMismatch { expected: String },
    #[error("duplicate uid {uid}, first defined in {}", first.display())]
    DuplicateUid { uid: EntityId, first: PathBuf },
    #[error("duplicate assertion for {space}|{property}, first asserted in {}", first.display())]
    DuplicateAssertion {
        space: EntityId,
        property: EntityId,
        first: PathBuf,
    },
    #[error("name `{name}` is already used by {first}")]
    DuplicateName { name: String, first: EntityId },
    #[error("reference to missing {} {id}", id.kind())]
    DanglingReference { id: EntityId },
}

impl BundleErrorKind {
    pub fn code(&self) -> &'static str {
        match self {
            BundleErrorKind::Io(_) => "io",
            BundleErrorKind::Parse(_) => "parse",
            BundleErrorKind::Layout(_) => "layout",
            BundleErrorKind::PathMismatch { .. } => "path_mismatch",
            BundleErrorKind::DuplicateUid { .. } => "duplicate_uid",
            BundleErrorKind::DuplicateAssertion { .. } => "duplicate_assertion",
            BundleErrorKind::DuplicateName { .. } => "duplicate_name",
            BundleErrorKind::DanglingReference { .. } => "dangling_reference",
        }
    }
}

/// One problem found while loading a bundle, located by file, field and
/// line where possible.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BundleError {
    pub path: PathBuf,
    pub field: Option<String>,
    pub line: Option<usize>,
    pub kind: BundleErrorKind,
}

impl BundleError {
    fn new(path: &Path, field: Option<&str>, kind: BundleErrorKind) -> Self {
        BundleError {
            path: path.to_path_buf(),
            field: field.map(str::to_string),
            line: None,
            kind,
        }
    }
}

impl fmt::Display for BundleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.path.display())?;
        if let Some(line) = self.line {
            write!(f, ":{line}")?;
        }
        if let Some(field) = &self.field {
            write!(f, ": field `{field}`")?;
        }
        write!(f, ": {}", self.kind)
    }
}

impl Serialize for BundleError {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut s = serializer.serialize_struct("BundleError", 5)?;
        s.serialize_field("code", self.kind.code())?;
        s.serialize_field("path", &self.path.to_string_lossy().replace('\\', "/"))?;
        s.serialize_field("field", &self.field)?;
        s.serialize_field("line", &self.line)?;
        s.serialize_field("message", &self.kind.to_string())?;
        s.end()
    }
}

/// Every error found while loading, in path order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct BundleReport {
    pub errors: Vec<BundleError>,
}

impl BundleReport {
    pub fn is_empty(&self) -> bool {
        self.errors.is_empty()
    }
}

impl fmt::Display for BundleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} error(s) in bundle", self.errors.len())?;
        for e in &self.errors {
            writeln!(f, "  {e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for BundleReport {}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ResolveError {
    #[error("no {namespace} named `{text}`{}", suggest(.suggestions))]
    NotFound {
        text: String,
        namespace: &'static str,
        suggestions: Vec<String>,
    },
}

fn suggest(suggestions: &[String]) -> String {
    if suggestions.is_empty() {
        String::new()
    } else {
        format!(" (did you mean {}?)", suggestions.join(", "))
    }
}

fn fold(name: &str) -> String {
    name.trim().to_lowercase()
}

#[derive(Debug, Clone, Default)]
struct NameIndex {
    folded: HashMap<String, EntityId>,
    names: Vec<(String, EntityId)>,
}

impl NameIndex {
    /// Returns the id already holding `name`, if it is a different entity.
    fn insert(&mut self, name: &str, id: EntityId) -> Option<EntityId> {
        let key = fold(name);
        match self.folded.get(&key) {
            Some(&other) if other != id => Some(other),
            Some(_) => None,
            None => {
                self.folded.insert(key, id);
                self.names.push((name.to_string(), id));
                None
            }
        }
    }

    fn suggestions(&self, text: &str) -> Vec<String> {
        let query = fold(text);
        let mut scored: Vec<(f64, &str)> = self
            .names
            .iter()
            .map(|(name, _)| {
                (
                    strsim::normalized_levenshtein(&query, &fold(name)),
                    name.as_str(),
                )
            })
            .filter(|(score, _)| *score >= 0.6)
            .collect();
        scored.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(b.1)));
        scored
            .into_iter()
            .take(3)
            .map(|(_, n)| n.to_string())
            .collect()
    }
}

/// A loaded bundle. Immutable after construction; every collection
/// iterates in ascending uid order.
#[derive(Debug, Clone, Default)]
pub struct Bundle {
    properties: BTreeMap<EntityId, Sourced<Property>>,
    spaces: BTreeMap<EntityId, Sourced<Space>>,
    theorems: BTreeMap<EntityId, Sourced<Theorem>>,
    traits: BTreeMap<(EntityId, EntityId), Sourced<TraitAssertion>>,
    property_names: NameIndex,
    space_names: NameIndex,
}

impl PartialEq for Bundle {
    fn eq(&self, other: &Self) -> bool {
        self.properties == other.properties
            && self.spaces == other.spaces
            && self.theorems == other.theorems
            && self.traits == other.traits
    }
}

impl Eq for Bundle {}

impl Bundle {
    pub fn property(&self, id: EntityId) -> Option<&Property> {
        self.properties.get(&id).map(|s| &s.record)
    }

    pub fn space(&self, id: EntityId) -> Option<&Space> {
        self.spaces.get(&id).map(|s| &s.record)
    }

    pub fn theorem(&self, id: EntityId) -> Option<&Theorem> {
        self.theorems.get(&id).map(|s| &s.record)
    }

    pub fn assertion(&self, space: EntityId, property: EntityId) -> Option<&TraitAssertion> {
        self.traits.get(&(space, property)).map(|s| &s.record)
    }

    pub fn properties(&self) -> impl Iterator<Item = &Property> {
        self.properties.values().map(|s| &s.record)
    }

    pub fn spaces(&self) -> impl Iterator<Item = &Space> {
        self.spaces.values().map(|s| &s.record)
    }

    pub fn theorems(&self) -> impl Iterator<Item = &Theorem> {
        self.theorems.values().map(|s| &s.record)
    }

    /// All assertions, ordered by (space, property).
    pub fn assertions(&self) -> impl Iterator<Item = &TraitAssertion> {
        self.traits.values().map(|s| &s.record)
    }

    pub fn assertions_of(&self, space: EntityId) -> impl Iterator<Item = &TraitAssertion> {
        let lo = (space, EntityId::property(1));
        let hi = (space, EntityId::property(crate::id::MAX_NUMBER));
        self.traits.range(lo..=hi).map(|(_, s)| &s.record)
    }

    /// File a record was loaded from.
    pub fn source(&self, id: EntityId) -> Option<&Path> {
        let path = match id.kind() {
            EntityKind::Property => self.properties.get(&id).map(|s| &s.path),
            EntityKind::Space => self.spaces.get(&id).map(|s| &s.path),
            EntityKind::Theorem => self.theorems.get(&id).map(|s| &s.path),
        };
        path.map(PathBuf::as_path)
    }

    pub fn assertion_source(&self, space: EntityId, property: EntityId) -> Option<&Path> {
        self.traits
            .get(&(space, property))
            .map(|s| s.path.as_path())
    }

    pub fn property_count(&self) -> usize {
        self.properties.len()
    }

    pub fn space_count(&self) -> usize {
        self.spaces.len()
    }

    pub fn theorem_count(&self) -> usize {
        self.theorems.len()
    }

    pub fn assertion_count(&self) -> usize {
        self.traits.len()
    }

    /// Display name of a property or space, falling back to the uid.
    pub fn display_name(&self, id: EntityId) -> String {
        let entity = match id.kind() {
            EntityKind::Property => self.property(id),
            EntityKind::Space => self.space(id),
            EntityKind::Theorem => None,
        };
        entity.map_or_else(|| id.to_string(), |e| e.name.clone())
    }

    /// Resolves a uid literal, name or alias (case-insensitive, trimmed).
    pub fn resolve_name(&self, text: &str, namespace: Namespace) -> Result<EntityId, ResolveError> {
        let (index, entities): (_, &BTreeMap<EntityId, Sourced<Entity>>) = match namespace {
            Namespace::Property => (&self.property_names, &self.properties),
            Namespace::Space => (&self.space_names, &self.spaces),
        };
        let trimmed = text.trim();
        if let Ok(id) = EntityId::parse_kind(&trimmed.to_uppercase(), namespace.kind()) {
            if entities.contains_key(&id) {
                return Ok(id);
            }
        }
        index
            .folded
            .get(&fold(trimmed))
            .copied()
            .ok_or_else(|| ResolveError::NotFound {
                text: trimmed.to_string(),
                namespace: namespace.kind().as_str(),
                suggestions: index.suggestions(trimmed),
            })
    }

    /// Canonical documents of the whole bundle in path order. Identical
    /// bundles give identical bytes.
    pub fn to_documents(&self) -> Vec<SourceDocument> {
        let mut docs: Vec<SourceDocument> = self
            .properties
            .values()
            .map(|s| (s.path.clone(), Document::Property(s.record.clone())))
            .chain(
                self.spaces
                    .values()
                    .map(|s| (s.path.clone(), Document::Space(s.record.clone()))),
            )
            .chain(
                self.traits
                    .values()
                    .map(|s| (s.path.clone(), Document::Trait(s.record.clone()))),
            )
            .chain(
                self.theorems
                    .values()
                    .map(|s| (s.path.clone(), Document::Theorem(s.record.clone()))),
            )
            .map(|(path, doc)| SourceDocument::new(path, serialize_document(&doc)))
            .collect();
        docs.sort_by(|a, b| a.path.cmp(&b.path));
        docs
    }

    /// Builds a bundle from already parsed records, checking uniqueness
    /// and cross references.
    pub fn from_records(records: Vec<Sourced<Document>>) -> Result<Bundle, BundleReport> {
        let mut errors = Vec::new();
        let bundle = assemble(records, &mut errors);
        finish(bundle, errors)
    }
}

fn finish(bundle: Bundle, mut errors: Vec<BundleError>) -> Result<Bundle, BundleReport> {
    if errors.is_empty() {
        Ok(bundle)
    } else {
        errors.sort_by(|a, b| {
            (&a.path, a.line, &a.field, a.kind.to_string()).cmp(&(
                &b.path,
                b.line,
                &b.field,
                b.kind.to_string(),
            ))
        });
        Err(BundleReport { errors })
    }
}

fn assemble(mut records: Vec<Sourced<Document>>, errors: &mut Vec<BundleError>) -> Bundle {
    records.sort_by(|a, b| a.path.cmp(&b.path));
    let mut bundle = Bundle::default();

    fn insert<T>(
        map: &mut BTreeMap<EntityId, Sourced<T>>,
        uid: EntityId,
        record: T,
        path: PathBuf,
        errors: &mut Vec<BundleError>,
    ) {
        if let Some(first) = map.get(&uid) {
            errors.push(BundleError::new(
                &path,
                Some("uid"),
                BundleErrorKind::DuplicateUid {
                    uid,
                    first: first.path.clone(),
                },
            ));
        } else {
            map.insert(uid, Sourced { record, path });
        }
    }

    for Sourced { record, path } in records {
        match record {
            Document::Property(p) => insert(&mut bundle.properties, p.uid, p, path, errors),
            Document::Space(s) => insert(&mut bundle.spaces, s.uid, s, path, errors),
            Document::Theorem(t) => insert(&mut bundle.theorems, t.uid, t, path, errors),
            Document::Trait(t) => {
                let key = (t.space, t.property);
                if let Some(first) = bundle.traits.get(&key) {
                    errors.push(BundleError::new(
                        &path,
                        Some("property"),
                        BundleErrorKind::DuplicateAssertion {
                            space: t.space,
                            property: t.property,
                            first: first.path.clone(),
                        },
                    ));
                } else {
                    bundle.traits.insert(key, Sourced { record: t, path });
                }
            }
        }
    }

    for (entities, index) in [
        (&bundle.properties, &mut bundle.property_names),
        (&bundle.spaces, &mut bundle.space_names),
    ] {
        // Uids go in first so that a name shadowing another uid is caught.
        for id in entities.keys() {
            index.insert(&id.to_string(), *id);
        }
        for s in entities.values() {
            let e = &s.record;
            let fields =
                std::iter::once(("name", &e.name)).chain(e.aliases.iter().map(|a| ("aliases", a)));
            for (field, name) in fields {
                if let Some(first) = index.insert(name, e.uid) {
                    errors.push(BundleError::new(
                        &s.path,
                        Some(field),
                        BundleErrorKind::DuplicateName {
                            name: name.clone(),
                            first,
                        },
                    ));
                }
            }
        }
    }

    let dangling = |path: &Path, field: &str, id: EntityId| {
        BundleError::new(path, Some(field), BundleErrorKind::DanglingReference { id })
    };
    for s in bundle.traits.values() {
        if !bundle.spaces.contains_key(&s.record.space) {
            errors.push(dangling(&s.path, "space", s.record.space));
        }
        if !bundle.properties.contains_key(&s.record.property) {
            errors.push(dangling(&s.path, "property", s.record.property));
        }
    }
    for s in bundle.theorems.values() {
        let t = &s.record;
        for l in &t.premises {
            if !bundle.properties.contains_key(&l.property) {
                errors.push(dangling(&s.path, &format!("if.{}", l.property), l.property));
            }
        }
        if !bundle.properties.contains_key(&t.conclusion.property) {
            errors.push(dangling(
                &s.path,
                &format!("then.{}", t.conclusion.property),
                t.conclusion.property,
            ));
        }
    }
    bundle
}

/// What a path is expected to hold, per the bundle layout.
struct Slot {
    kind: DocumentKind,
    /// Id named by the directory, for space and trait files.
    space_dir: Option<String>,
    stem: String,
}

fn classify(path: &Path) -> Result<Option<Slot>, String> {
    let parts: Vec<String> = path
        .components()
        .filter_map(|c| match c {
            Component::Normal(s) => Some(s.to_string_lossy().into_owned()),
            _ => None,
        })
        .collect();
    let Some(top) = parts.first() else {
        return Ok(None);
    };
    if !matches!(top.as_str(), "properties" | "spaces" | "theorems") {
        return Ok(None);
    }
    let Some(file) = parts.last() else {
        return Ok(None);
    };
    let Some(stem) = file.strip_suffix(".md") else {
        return Ok(None);
    };
    let parts: Vec<&str> = parts.iter().map(String::as_str).collect();
    let slot = |kind, space_dir: Option<&str>| {
        Some(Slot {
            kind,
            space_dir: space_dir.map(str::to_string),
            stem: stem.to_string(),
        })
    };
    match parts.as_slice() {
        ["properties", _] => Ok(slot(DocumentKind::Property, None)),
        ["theorems", _] => Ok(slot(DocumentKind::Theorem, None)),
        ["spaces", dir, "README.md"] => Ok(slot(DocumentKind::Space, Some(dir))),
        ["spaces", dir, "properties", _] => Ok(slot(DocumentKind::Trait, Some(dir))),
        _ => Err(format!(
            "expected properties/P######.md, theorems/T######.md, spaces/S######/README.md or spaces/S######/properties/P######.md, found {}",
            path.display()
        )),
    }
}

fn check_path(slot: &Slot, doc: &Document) -> Option<(&'static str, String)> {
    let (field, expected) = match doc {
        Document::Property(e) => ("uid", e.uid.to_string()),
        Document::Theorem(t) => ("uid", t.uid.to_string()),
        Document::Space(e) => {
            let dir = slot.space_dir.as_deref().unwrap_or_default();
            return (dir != e.uid.to_string())
                .then(|| ("uid", format!("directory spaces/{}/", e.uid)));
        }
        Document::Trait(t) => {
            let dir = slot.space_dir.as_deref().unwrap_or_default();
            if dir != t.space.to_string() {
                return Some(("space", format!("directory spaces/{}/", t.space)));
            }
            ("property", t.property.to_string())
        }
    };
    (slot.stem != expected).then(|| (field, format!("file name {expected}.md")))
}

/// Parses and assembles an in-memory document set. Paths are relative to
/// the bundle root; files outside the layout's subtrees are ignored.
pub fn load_documents(mut docs: Vec<SourceDocument>) -> Result<Bundle, BundleReport> {
    docs.sort_by(|a, b| a.path.cmp(&b.path));
    let mut errors = Vec::new();
    let mut records = Vec::new();
    for doc in docs {
        let slot = match classify(&doc.path) {
            Ok(Some(slot)) => slot,
            Ok(None) => continue,
            Err(message) => {
                errors.push(BundleError::new(
                    &doc.path,
                    None,
                    BundleErrorKind::Layout(message),
                ));
                continue;
            }
        };
        match parse_document(&doc.text, slot.kind) {
            Ok(record) => {
                if let Some((field, expected)) = check_path(&slot, &record) {
                    errors.push(BundleError::new(
                        &doc.path,
                        Some(field),
                        BundleErrorKind::PathMismatch { expected },
                    ));
                }
                records.push(Sourced {
                    record,
                    path: doc.path,
                });
            }
            Err(e) => errors.push(BundleError {
                path: doc.path,
                field: e.field,
                line: e.line,
                kind: BundleErrorKind::Parse(e.kind),
            }),
        }
    }
    let bundle = assemble(records, &mut errors);
    finish(bundle, errors)
}

/// Reads every `.md` file under the layout's subtrees of `root`.
pub fn read_documents(root: &Path) -> Result<Vec<SourceDocument>, BundleReport> {
    let io_error = |path: &Path, message: String| BundleReport {
        errors: vec![BundleError::new(path, None, BundleErrorKind::Io(message))],
    };
    if !root.is_dir() {
        return Err(io_error(root, "not a directory".into()));
    }
    let mut docs = Vec::new();
    let mut errors = Vec::new();
    for sub in ["properties", "spaces", "theorems"] {
        let dir = root.join(sub);
        if !dir.exists() {
            continue;
        }
        for entry in WalkDir::new(&dir).sort_by_file_name() {
            let entry = match entry {
                Ok(e) => e,
                Err(e) => {
                    let path = e.path().unwrap_or(&dir).to_path_buf();
                    errors.extend(io_error(&path, e.to_string()).errors);
                    continue;
                }
            };
            if !entry.file_type().is_file() || entry.path().extension().is_none_or(|e| e != "md") {
                continue;
            }
            let rel = entry
                .path()
                .strip_prefix(root)
                .unwrap_or(entry.path())
                .to_path_buf();
            match std::fs::read_to_string(entry.path()) {
                Ok(text) => docs.push(SourceDocument { path: rel, text }),
                Err(e) => errors.extend(io_error(&rel, e.to_string()).errors),
            }
        }
    }
    if errors.is_empty() {
        Ok(docs)
    } else {
        Err(BundleReport { errors })
    }
}

/// Loads the bundle rooted at `root`, reporting every problem at once.
pub fn load_bundle(root: &Path) -> Result<Bundle, BundleReport> {
    load_documents(read_documents(root)?)
}
