use std::fmt::Write;

use serde_yaml::Value;

use super::{Citation, Document, Entity};
use crate::logic::Literal;

/// Renders a scalar plainly when YAML reads it back as the same string,
/// otherwise as a double-quoted string.
fn scalar(text: &str) -> String {
    let plain_ok = !text.is_empty()
        && !text.contains('\n')
        && serde_yaml::from_str::<Value>(&format!("k: {text}"))
            .ok()
            .and_then(|v| v.get("k").cloned())
            .is_some_and(|v| v.as_str() == Some(text));
    if plain_ok {
        text.to_string()
    } else {
        serde_json::to_string(text).expect("string serialization cannot fail")
    }
}

fn write_refs(out: &mut String, refs: &[Citation]) {
    if refs.is_empty() {
        return;
    }
    out.push_str("refs:\n");
    for r in refs {
        let _ = writeln!(out, "  - {}: {}", scalar(r.scheme.as_str()), scalar(&r.key));
        if let Some(name) = &r.name {
            let _ = writeln!(out, "    name: {}", scalar(name));
        }
    }
}

fn write_literals(out: &mut String, field: &str, literals: &[Literal]) {
    let _ = writeln!(out, "{field}:");
    for l in literals {
        let _ = writeln!(out, "  {}: {}", l.property, l.value);
    }
}

fn write_entity(out: &mut String, e: &Entity) {
    let _ = writeln!(out, "uid: {}", e.uid);
    let _ = writeln!(out, "name: {}", scalar(&e.name));
    if !e.aliases.is_empty() {
        out.push_str("aliases:\n");
        for a in &e.aliases {
            let _ = writeln!(out, "  - {}", scalar(a));
        }
    }
    write_refs(out, &e.refs);
}

/// Canonical text of a document. Same record, same bytes; parsing the
/// output yields an equal record.
pub fn serialize_document(doc: &Document) -> String {
    let mut out = String::from("---\n");
    match doc {
        Document::Property(e) | Document::Space(e) => write_entity(&mut out, e),
        Document::Trait(t) => {
            let _ = writeln!(out, "space: {}", t.space);
            let _ = writeln!(out, "property: {}", t.property);
            let _ = writeln!(out, "value: {}", t.value);
            write_refs(&mut out, &t.refs);
        }
        Document::Theorem(t) => {
            let _ = writeln!(out, "uid: {}", t.uid);
            write_literals(&mut out, "if", &t.premises);
            write_literals(&mut out, "then", std::slice::from_ref(&t.conclusion));
            write_refs(&mut out, &t.refs);
        }
    }
    out.push_str("---\n");
    out.push_str(&doc.description().text);
    out
}
