use std::fmt;

use serde_yaml::{Mapping, Value};
use thiserror::Error;

use super::{
    Citation, CitationToken, Description, Document, DocumentKind, Entity, Scheme, Theorem,
    TraitAssertion,
};
use crate::id::{EntityId, EntityKind, IdError};
use crate::logic::Literal;

const DELIMITER: &str = "---";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("document must start with a `---` line")]
    MissingOpeningDelimiter,
    #[error("header is not closed by a `---` line")]
    MissingClosingDelimiter,
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("header must be a mapping of fields")]
    HeaderNotMapping,
    #[error("missing required field")]
    MissingField,
    #[error("unknown field")]
    UnknownField,
    #[error(transparent)]
    InvalidId(#[from] IdError),
    #[error("invalid value: {0}")]
    InvalidValue(String),
    #[error("a theorem needs at least one premise")]
    EmptyPremises,
    #[error("conclusion property {0} also appears among the premises")]
    ConclusionInPremises(EntityId),
    #[error("property {0} appears twice")]
    DuplicateProperty(EntityId),
    #[error("a theorem concludes exactly one literal, found {0}")]
    ConclusionCount(usize),
    #[error("`{{{{` without a matching `}}}}`")]
    UnmatchedCitationToken,
    #[error("citation token `{0}` is not of the form {{{{scheme:key}}}}")]
    MalformedCitationToken(String),
}

/// A document-level error with the header field and 1-based line it
/// concerns, when known.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub field: Option<String>,
    pub line: Option<usize>,
}

impl ParseError {
    fn new(kind: ParseErrorKind) -> Self {
        ParseError {
            kind,
            field: None,
            line: None,
        }
    }

    fn at(kind: ParseErrorKind, field: impl Into<String>, line: Option<usize>) -> Self {
        ParseError {
            kind,
            field: Some(field.into()),
            line,
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(line) = self.line {
            write!(f, "line {line}: ")?;
        }
        if let Some(field) = &self.field {
            write!(f, "field `{field}`: ")?;
        }
        write!(f, "{}", self.kind)
    }
}

struct Header<'a> {
    text: &'a str,
    /// Document line number of the first header line.
    first_line: usize,
}

impl Header<'_> {
    /// Line of the first `key:` occurrence at or after `from`, matching at
    /// any indentation.
    fn line_of(&self, key: &str, from: usize) -> Option<usize> {
        self.text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + self.first_line, l))
            .filter(|(n, _)| *n >= from)
            .find(|(_, l)| {
                let t = l.trim_start().trim_start_matches("- ");
                t.strip_prefix(key).is_some_and(|r| r.starts_with(':'))
            })
            .map(|(n, _)| n)
    }

    fn field_line(&self, field: &str) -> Option<usize> {
        self.line_of(field, self.first_line)
    }

    /// Source spelling of a bare numeric value under `key`, so that keys
    /// like `0386.54001` keep their digits.
    fn raw_number(&self, key: &str, number: &serde_yaml::Number) -> Option<String> {
        self.text.lines().find_map(|l| {
            let t = l.trim_start().trim_start_matches("- ");
            let raw = t.strip_prefix(key)?.strip_prefix(':')?.trim();
            match serde_yaml::from_str::<Value>(raw) {
                Ok(Value::Number(n)) if &n == number => Some(raw.to_string()),
                _ => None,
            }
        })
    }
}

struct Split<'a> {
    header: Header<'a>,
    body: &'a str,
    body_first_line: usize,
}

fn split(text: &str) -> Result<Split<'_>, ParseError> {
    let mut offset = 0;
    let mut lines = text.split_inclusive('\n').enumerate();
    match lines.next() {
        Some((_, first)) if first.trim_end() == DELIMITER => offset += first.len(),
        _ => {
            return Err(ParseError {
                line: Some(1),
                ..ParseError::new(ParseErrorKind::MissingOpeningDelimiter)
            })
        }
    }
    let header_start = offset;
    for (index, line) in lines {
        if line.trim_end() == DELIMITER {
            let header_end = offset;
            let body_start = offset + line.len();
            return Ok(Split {
                header: Header {
                    text: &text[header_start..header_end],
                    first_line: 2,
                },
                body: &text[body_start..],
                body_first_line: index + 2,
            });
        }
        offset += line.len();
    }
    Err(ParseError::new(ParseErrorKind::MissingClosingDelimiter))
}

fn scan_tokens(body: &str, first_line: usize) -> Result<Vec<CitationToken>, ParseError> {
    let line_of = |offset: usize| Some(first_line + body[..offset].matches('\n').count());
    let mut tokens = Vec::new();
    let mut pos = 0;
    while let Some(rel) = body[pos..].find("{{") {
        let start = pos + rel;
        let inner_start = start + 2;
        let Some(close) = body[inner_start..].find("}}") else {
            return Err(ParseError {
                line: line_of(start),
                ..ParseError::new(ParseErrorKind::UnmatchedCitationToken)
            });
        };
        let inner = &body[inner_start..inner_start + close];
        if inner.contains("{{") {
            return Err(ParseError {
                line: line_of(start),
                ..ParseError::new(ParseErrorKind::UnmatchedCitationToken)
            });
        }
        match inner.split_once(':') {
            Some((scheme, key)) if !scheme.trim().is_empty() && !key.trim().is_empty() => tokens
                .push(CitationToken {
                    scheme: Scheme::parse(scheme),
                    key: key.to_string(),
                    offset: start,
                }),
            _ => {
                return Err(ParseError {
                    line: line_of(start),
                    ..ParseError::new(ParseErrorKind::MalformedCitationToken(inner.to_string()))
                })
            }
        }
        pos = inner_start + close + 2;
    }
    Ok(tokens)
}

fn describe(value: &Value) -> &'static str {
    match value {
        Value::Null => "null",
        Value::Bool(_) => "boolean",
        Value::Number(_) => "number",
        Value::String(_) => "string",
        Value::Sequence(_) => "list",
        Value::Mapping(_) => "mapping",
        Value::Tagged(_) => "tagged value",
    }
}

/// Strings and numbers both read as text; YAML turns bare numeric keys
/// such as Math.SE question ids into numbers.
fn scalar_text(value: &Value) -> Option<String> {
    match value {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

struct Fields<'a> {
    header: &'a Header<'a>,
    map: Mapping,
}

impl<'a> Fields<'a> {
    fn new(header: &'a Header<'a>, value: Value, allowed: &[&str]) -> Result<Self, ParseError> {
        let Value::Mapping(map) = value else {
            return Err(ParseError {
                line: Some(header.first_line),
                ..ParseError::new(ParseErrorKind::HeaderNotMapping)
            });
        };
        for key in map.keys() {
            let name = key
                .as_str()
                .map(str::to_string)
                .unwrap_or_else(|| format!("{key:?}"));
            if !allowed.contains(&name.as_str()) {
                let line = header.field_line(&name);
                return Err(ParseError::at(ParseErrorKind::UnknownField, name, line));
            }
        }
        Ok(Fields { header, map })
    }

    fn error(&self, kind: ParseErrorKind, field: &str) -> ParseError {
        ParseError::at(kind, field, self.header.field_line(field))
    }

    fn take(&mut self, field: &str) -> Option<Value> {
        self.map.remove(field)
    }

    fn required(&mut self, field: &str) -> Result<Value, ParseError> {
        self.take(field)
            .ok_or_else(|| ParseError::at(ParseErrorKind::MissingField, field, None))
    }

    fn id(&mut self, field: &str, kind: EntityKind) -> Result<EntityId, ParseError> {
        let value = self.required(field)?;
        let text = value.as_str().ok_or_else(|| {
            self.error(
                ParseErrorKind::InvalidValue(format!("expected an id, found {}", describe(&value))),
                field,
            )
        })?;
        EntityId::parse_kind(text, kind).map_err(|e| self.error(e.into(), field))
    }

    fn boolean(&mut self, field: &str) -> Result<bool, ParseError> {
        let value = self.required(field)?;
        value.as_bool().ok_or_else(|| {
            self.error(
                ParseErrorKind::InvalidValue(format!(
                    "expected true or false, found {}",
                    describe(&value)
                )),
                field,
            )
        })
    }

    fn name(&mut self) -> Result<String, ParseError> {
        let value = self.required("name")?;
        match scalar_text(&value) {
            Some(s) if !s.trim().is_empty() => Ok(s),
            Some(_) => Err(self.error(
                ParseErrorKind::InvalidValue("name must not be empty".into()),
                "name",
            )),
            None => Err(self.error(
                ParseErrorKind::InvalidValue(format!("expected text, found {}", describe(&value))),
                "name",
            )),
        }
    }

    fn aliases(&mut self) -> Result<Vec<String>, ParseError> {
        let Some(value) = self.take("aliases") else {
            return Ok(Vec::new());
        };
        let invalid = |what: String| self.error(ParseErrorKind::InvalidValue(what), "aliases");
        match value {
            Value::Null => Ok(Vec::new()),
            Value::Sequence(items) => items
                .iter()
                .map(|item| match scalar_text(item) {
                    Some(s) if !s.trim().is_empty() => Ok(s),
                    Some(_) => Err(invalid("aliases must not be empty".into())),
                    None => Err(invalid(format!(
                        "expected text alias, found {}",
                        describe(item)
                    ))),
                })
                .collect(),
            other => Err(invalid(format!(
                "expected a list, found {}",
                describe(&other)
            ))),
        }
    }

    fn refs(&mut self) -> Result<Vec<Citation>, ParseError> {
        let Some(value) = self.take("refs") else {
            return Ok(Vec::new());
        };
        let invalid = |what: String| self.error(ParseErrorKind::InvalidValue(what), "refs");
        let items = match value {
            Value::Null => return Ok(Vec::new()),
            Value::Sequence(items) => items,
            other => {
                return Err(invalid(format!(
                    "expected a list, found {}",
                    describe(&other)
                )))
            }
        };
        let mut refs = Vec::with_capacity(items.len());
        for item in items {
            let Value::Mapping(entry) = item else {
                return Err(invalid(format!(
                    "expected a reference mapping, found {}",
                    describe(&item)
                )));
            };
            let mut name = None;
            let mut target = None;
            for (k, v) in entry {
                let k = k
                    .as_str()
                    .ok_or_else(|| invalid("reference keys must be text".into()))?;
                let v = match &v {
                    Value::Number(n) => self.header.raw_number(k, n),
                    _ => None,
                }
                .or_else(|| scalar_text(&v))
                .filter(|s| !s.trim().is_empty())
                .ok_or_else(|| invalid(format!("reference `{k}` needs a nonempty value")))?;
                if k == "name" {
                    name = Some(v);
                } else if target.replace((k.to_string(), v)).is_some() {
                    return Err(invalid("a reference names exactly one scheme".into()));
                }
            }
            let (scheme, key) = target.ok_or_else(|| invalid("reference has no scheme".into()))?;
            refs.push(Citation {
                scheme: Scheme::parse(&scheme),
                key,
                name,
            });
        }
        Ok(refs)
    }

    /// Reads a `property-id: bool` mapping such as a theorem's `if`.
    fn literals(&mut self, field: &str) -> Result<Vec<Literal>, ParseError> {
        let value = self.required(field)?;
        let field_line = self.header.field_line(field);
        let Value::Mapping(map) = value else {
            return Err(self.error(
                ParseErrorKind::InvalidValue(format!(
                    "expected a mapping, found {}",
                    describe(&value)
                )),
                field,
            ));
        };
        let mut literals: Vec<Literal> = Vec::with_capacity(map.len());
        for (k, v) in map {
            let key = scalar_text(&k).unwrap_or_default();
            let path = format!("{field}.{key}");
            let line = self
                .header
                .line_of(&key, field_line.unwrap_or(0))
                .or(field_line);
            let property = EntityId::parse_kind(&key, EntityKind::Property)
                .map_err(|e| ParseError::at(e.into(), path.clone(), line))?;
            let value = v.as_bool().ok_or_else(|| {
                ParseError::at(
                    ParseErrorKind::InvalidValue(format!(
                        "expected true or false, found {}",
                        describe(&v)
                    )),
                    path.clone(),
                    line,
                )
            })?;
            if literals.iter().any(|l| l.property == property) {
                return Err(ParseError::at(
                    ParseErrorKind::DuplicateProperty(property),
                    path,
                    line,
                ));
            }
            literals.push(Literal::new(property, value));
        }
        Ok(literals)
    }
}

fn parse_header(header: &Header<'_>) -> Result<Value, ParseError> {
    if header.text.trim().is_empty() {
        return Err(ParseError {
            line: Some(header.first_line),
            ..ParseError::new(ParseErrorKind::HeaderNotMapping)
        });
    }
    serde_yaml::from_str(header.text).map_err(|e| {
        let line = e.location().map(|l| header.first_line + l.line() - 1);
        let message = e.to_string();
        // serde_yaml appends " at line X column Y" relative to the header.
        let message = message
            .split(" at line ")
            .next()
            .unwrap_or(&message)
            .to_string();
        ParseError {
            line,
            ..ParseError::new(ParseErrorKind::MalformedHeader(message))
        }
    })
}

/// Parses one document of the given kind.
pub fn parse_document(text: &str, kind: DocumentKind) -> Result<Document, ParseError> {
    let split = split(text)?;
    let header = &split.header;
    let value = parse_header(header)?;
    let tokens = scan_tokens(split.body, split.body_first_line)?;
    let description = Description {
        text: split.body.to_string(),
        tokens,
    };

    match kind {
        DocumentKind::Property | DocumentKind::Space => {
            let mut fields = Fields::new(header, value, &["uid", "name", "aliases", "refs"])?;
            let id_kind = if kind == DocumentKind::Property {
                EntityKind::Property
            } else {
                EntityKind::Space
            };
            let entity = Entity {
                uid: fields.id("uid", id_kind)?,
                name: fields.name()?,
                aliases: fields.aliases()?,
                refs: fields.refs()?,
                description,
            };
            Ok(if kind == DocumentKind::Property {
                Document::Property(entity)
            } else {
                Document::Space(entity)
            })
        }
        DocumentKind::Trait => {
            let mut fields = Fields::new(header, value, &["space", "property", "value", "refs"])?;
            Ok(Document::Trait(TraitAssertion {
                space: fields.id("space", EntityKind::Space)?,
                property: fields.id("property", EntityKind::Property)?,
                value: fields.boolean("value")?,
                refs: fields.refs()?,
                description,
            }))
        }
        DocumentKind::Theorem => {
            let mut fields = Fields::new(header, value, &["uid", "if", "then", "refs"])?;
            let uid = fields.id("uid", EntityKind::Theorem)?;
            let premises = fields.literals("if")?;
            if premises.is_empty() {
                return Err(fields.error(ParseErrorKind::EmptyPremises, "if"));
            }
            let mut conclusions = fields.literals("then")?;
            if conclusions.len() != 1 {
                return Err(
                    fields.error(ParseErrorKind::ConclusionCount(conclusions.len()), "then")
                );
            }
            let conclusion = conclusions.remove(0);
            if premises.iter().any(|p| p.property == conclusion.property) {
                return Err(fields.error(
                    ParseErrorKind::ConclusionInPremises(conclusion.property),
                    "then",
                ));
            }
            Ok(Document::Theorem(Theorem {
                uid,
                premises,
                conclusion,
                refs: fields.refs()?,
                description,
            }))
        }
    }
}
