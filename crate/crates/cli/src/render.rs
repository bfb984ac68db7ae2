//! Human-readable text output. Every id is printed next to a name.

use std::fmt::Write;

use pibase_core::corpus::Bundle;
use pibase_core::deduction::{Contradiction, Justification, ProofStep, Provenance};
use pibase_core::id::EntityId;
use pibase_core::logic::{Literal, RuleMode};

pub fn literal(bundle: &Bundle, l: Literal) -> String {
    let name = bundle.display_name(l.property);
    let sign = if l.value { "" } else { "¬" };
    format!("{sign}{name}")
}

/// A theorem as `premise ∧ premise ⇒ conclusion`, using property names.
pub fn theorem(bundle: &Bundle, id: EntityId) -> String {
    match bundle.theorem(id) {
        Some(t) => implication(bundle, &t.premises, t.conclusion),
        None => "?".into(),
    }
}

pub fn implication(bundle: &Bundle, premises: &[Literal], conclusion: Literal) -> String {
    let premises: Vec<String> = premises.iter().map(|&l| literal(bundle, l)).collect();
    format!("{} ⇒ {}", premises.join(" ∧ "), literal(bundle, conclusion))
}

pub fn entity(bundle: &Bundle, id: EntityId) -> String {
    format!("{id} ({})", bundle.display_name(id))
}

fn value(l: Literal) -> String {
    format!("{} = {}", l.property, l.value)
}

/// Lists the literals the proof starts from, then one line per step.
/// `origin` labels the starting literals, e.g. `asserted`.
pub fn proof(out: &mut String, bundle: &Bundle, steps: &[ProofStep], origin: &str, indent: &str) {
    let mut seen: Vec<Literal> = Vec::new();
    for step in steps {
        for &s in &step.supports {
            if !seen.contains(&s) && !steps.iter().any(|d| d.derived == s) {
                seen.push(s);
                let _ = writeln!(out, "{indent}{}  ({origin})", value(s));
            }
        }
    }
    for step in steps {
        let how = match step.mode {
            RuleMode::Forward => String::new(),
            RuleMode::Contrapositive(_) => ", contrapositive".into(),
        };
        let _ = writeln!(
            out,
            "{indent}{}  by {}{how}: {}",
            value(step.derived),
            step.theorem,
            theorem(bundle, step.theorem)
        );
    }
}

fn justification(
    out: &mut String,
    bundle: &Bundle,
    property: EntityId,
    side: &Justification,
    origin: &str,
    indent: &str,
) {
    if side.asserted {
        let _ = writeln!(out, "{indent}{property} = {}  ({origin})", side.value);
    } else {
        proof(out, bundle, &side.proof, origin, indent);
    }
}

/// Both sides of a conflict. `origin` labels the starting literals.
pub fn contradiction(
    out: &mut String,
    bundle: &Bundle,
    c: &Contradiction,
    origin: &str,
    indent: &str,
) {
    let deeper = format!("{indent}  ");
    let _ = writeln!(
        out,
        "{indent}{} forced {}:",
        entity(bundle, c.property),
        c.derived.value
    );
    justification(out, bundle, c.property, &c.derived, origin, &deeper);
    let _ = writeln!(out, "{indent}but already {}:", c.existing.value);
    justification(out, bundle, c.property, &c.existing, origin, &deeper);
}

pub fn provenance(
    out: &mut String,
    bundle: &Bundle,
    property: EntityId,
    value: bool,
    p: &Provenance,
    indent: &str,
) {
    match p {
        Provenance::Asserted { refs } => {
            let _ = writeln!(out, "{indent}{property} = {value}  (asserted)");
            for r in refs {
                let name = r
                    .name
                    .as_deref()
                    .map(|n| format!(" {n}"))
                    .unwrap_or_default();
                let _ = writeln!(out, "{indent}  see {}:{}{name}", r.scheme.as_str(), r.key);
            }
        }
        Provenance::Derived { proof: steps } => proof(out, bundle, steps, "asserted", indent),
    }
}
