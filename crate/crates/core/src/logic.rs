//! Literals, rules compiled from theorems, three-valued assignments and the
//! conjunctive query grammar.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Bundle, Namespace, ResolveError, Theorem};
use crate::id::EntityId;

/// A property together with a required truth value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Literal {
    pub property: EntityId,
    pub value: bool,
}

impl Literal {
    pub fn new(property: EntityId, value: bool) -> Self {
        Literal { property, value }
    }

    pub fn negate(self) -> Self {
        Literal {
            property: self.property,
            value: !self.value,
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}={}",
            self.property,
            if self.value { 'T' } else { 'F' }
        )
    }
}

/// How a rule was obtained from its theorem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RuleMode {
    Forward,
    /// Concludes the negation of the premise at this index.
    Contrapositive(usize),
}

impl fmt::Display for RuleMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuleMode::Forward => f.write_str("forward"),
            RuleMode::Contrapositive(i) => write!(f, "contrapositive:{i}"),
        }
    }
}

impl Serialize for RuleMode {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for RuleMode {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        if text == "forward" {
            return Ok(RuleMode::Forward);
        }
        text.strip_prefix("contrapositive:")
            .and_then(|i| i.parse().ok())
            .map(RuleMode::Contrapositive)
            .ok_or_else(|| serde::de::Error::custom(format!("unknown rule mode `{text}`")))
    }
}

/// One directed inference step available to propagation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub source: EntityId,
    pub mode: RuleMode,
    pub premises: Vec<Literal>,
    pub conclusion: Literal,
}

impl Rule {
    /// The forward rule followed by one contrapositive per premise. For
    /// premise `i`, the contrapositive assumes the negated conclusion and
    /// every other premise, and concludes the negation of premise `i`.
    pub fn from_theorem(theorem: &Theorem) -> Vec<Rule> {
        let mut rules = Vec::with_capacity(theorem.premises.len() + 1);
        rules.push(Rule {
            source: theorem.uid,
            mode: RuleMode::Forward,
            premises: theorem.premises.clone(),
            conclusion: theorem.conclusion,
        });
        for (i, premise) in theorem.premises.iter().enumerate() {
            let premises = std::iter::once(theorem.conclusion.negate())
                .chain(
                    theorem
                        .premises
                        .iter()
                        .enumerate()
                        .filter(|(j, _)| *j != i)
                        .map(|(_, l)| *l),
                )
                .collect();
            rules.push(Rule {
                source: theorem.uid,
                mode: RuleMode::Contrapositive(i),
                premises,
                conclusion: premise.negate(),
            });
        }
        rules
    }
}

/// Rules for every theorem, ordered by theorem uid, forward first.
pub fn compile_rules<'a>(theorems: impl IntoIterator<Item = &'a Theorem>) -> Vec<Rule> {
    let mut theorems: Vec<&Theorem> = theorems.into_iter().collect();
    theorems.sort_by_key(|t| t.uid);
    theorems.into_iter().flat_map(Rule::from_theorem).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Truth {
    True,
    False,
    Unknown,
}

impl From<Option<bool>> for Truth {
    fn from(value: Option<bool>) -> Self {
        match value {
            Some(true) => Truth::True,
            Some(false) => Truth::False,
            None => Truth::Unknown,
        }
    }
}

/// Partial map from properties to truth values; absent means unknown.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Assignment(BTreeMap<EntityId, bool>);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("{property} is already assigned {existing}")]
pub struct Conflict {
    pub property: EntityId,
    pub existing: bool,
}

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, property: EntityId) -> Truth {
        self.0.get(&property).copied().into()
    }

    pub fn value(&self, property: EntityId) -> Option<bool> {
        self.0.get(&property).copied()
    }

    /// Assigns a literal. Re-assigning the same value is a no-op; the
    /// opposite value is a conflict and leaves the assignment unchanged.
    pub fn assign(&mut self, literal: Literal) -> Result<(), Conflict> {
        match self.0.get(&literal.property) {
            Some(&existing) if existing != literal.value => Err(Conflict {
                property: literal.property,
                existing,
            }),
            _ => {
                self.0.insert(literal.property, literal.value);
                Ok(())
            }
        }
    }

    pub fn holds(&self, literal: Literal) -> bool {
        self.value(literal.property) == Some(literal.value)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn literals(&self) -> impl Iterator<Item = Literal> + '_ {
        self.0.iter().map(|(&p, &v)| Literal::new(p, v))
    }
}

impl FromIterator<Literal> for Assignment {
    /// Later literals overwrite earlier ones for the same property.
    fn from_iter<I: IntoIterator<Item = Literal>>(iter: I) -> Self {
        Assignment(iter.into_iter().map(|l| (l.property, l.value)).collect())
    }
}

/// A conjunction of literals, in the order written.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Query {
    literals: Vec<Literal>,
}

impl Query {
    /// Builds a query, rejecting repeated properties.
    pub fn new(literals: Vec<Literal>) -> Result<Self, QueryError> {
        for (i, l) in literals.iter().enumerate() {
            if let Some(prev) = literals[..i].iter().find(|p| p.property == l.property) {
                return Err(if prev.value == l.value {
                    QueryError::Duplicate {
                        property: l.property,
                        term: l.to_string(),
                    }
                } else {
                    QueryError::Contradictory {
                        property: l.property,
                    }
                });
            }
        }
        Ok(Query { literals })
    }

    pub fn literals(&self) -> &[Literal] {
        &self.literals
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    pub fn assumptions(&self) -> Assignment {
        self.literals.iter().copied().collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error("term `{term}` at offset {offset}: {source}")]
    Unresolved {
        term: String,
        offset: usize,
        #[source]
        source: ResolveError,
    },
    #[error("empty term at offset {offset}")]
    EmptyTerm { offset: usize },
    #[error("term `{term}` at offset {offset} contains a stray negation marker")]
    Malformed { term: String, offset: usize },
    #[error("property {property} appears twice (`{term}`)")]
    Duplicate { property: EntityId, term: String },
    #[error("property {property} is required both true and false")]
    Contradictory { property: EntityId },
}

impl QueryError {
    pub fn code(&self) -> &'static str {
        match self {
            QueryError::Unresolved { .. } => "unresolved_name",
            QueryError::EmptyTerm { .. } => "empty_term",
            QueryError::Malformed { .. } => "malformed_term",
            QueryError::Duplicate { .. } => "duplicate_property",
            QueryError::Contradictory { .. } => "contradictory_query",
        }
    }

    /// Near-miss names for an unresolved term.
    pub fn suggestions(&self) -> &[String] {
        match self {
            QueryError::Unresolved {
                source: ResolveError::NotFound { suggestions, .. },
                ..
            } => suggestions,
            _ => &[],
        }
    }
}

/// Parses `term ("+" term)*`, where a term is an optional `~` or `!`
/// followed by a property uid, name or alias. Blank input is the empty
/// query.
pub fn parse_query(text: &str, bundle: &Bundle) -> Result<Query, QueryError> {
    if text.trim().is_empty() {
        return Ok(Query::default());
    }
    let mut literals = Vec::new();
    let mut offset = 0;
    for raw in text.split('+') {
        let term_offset = offset + (raw.len() - raw.trim_start().len());
        offset += raw.len() + 1;
        let term = raw.trim();
        if term.is_empty() {
            return Err(QueryError::EmptyTerm {
                offset: term_offset,
            });
        }
        let (value, name) = match term.strip_prefix(['~', '!']) {
            Some(rest) => (false, rest.trim()),
            None => (true, term),
        };
        if name.contains(['~', '!']) {
            return Err(QueryError::Malformed {
                term: term.to_string(),
                offset: term_offset,
            });
        }
        if name.is_empty() {
            return Err(QueryError::EmptyTerm {
                offset: term_offset,
            });
        }
        let property = bundle
            .resolve_name(name, Namespace::Property)
            .map_err(|source| QueryError::Unresolved {
                term: term.to_string(),
                offset: term_offset,
                source,
            })?;
        if let Some(prev) = literals.iter().find(|l: &&Literal| l.property == property) {
            return Err(if prev.value == value {
                QueryError::Duplicate {
                    property,
                    term: term.to_string(),
                }
            } else {
                QueryError::Contradictory { property }
            });
        }
        literals.push(Literal::new(property, value));
    }
    Ok(Query { literals })
}

/// Canonical text: uids joined by ` + `, negation written `~`.
pub fn render_query(query: &Query) -> String {
    query
        .literals
        .iter()
        .map(|l| format!("{}{}", if l.value { "" } else { "~" }, l.property))
        .collect::<Vec<_>>()
        .join(" + ")
}

/// Like [`render_query`] but with display names.
pub fn display_query(query: &Query, bundle: &Bundle) -> String {
    query
        .literals
        .iter()
        .map(|l| {
            format!(
                "{}{}",
                if l.value { "" } else { "~" },
                bundle.display_name(l.property)
            )
        })
        .collect::<Vec<_>>()
        .join(" + ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{load_bundle, Description};
    use proptest::prelude::*;
    use std::path::Path;

    fn p(n: u32) -> EntityId {
        EntityId::property(n)
    }

    fn lit(n: u32, v: bool) -> Literal {
        Literal::new(p(n), v)
    }

    fn theorem(uid: u32, premises: Vec<Literal>, conclusion: Literal) -> Theorem {
        Theorem {
            uid: EntityId::theorem(uid),
            premises,
            conclusion,
            refs: vec![],
            description: Description::default(),
        }
    }

    fn listings() -> Bundle {
        load_bundle(&Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/listings")).unwrap()
    }

    #[test]
    fn listing_four_rules() {
        let rules = compile_rules([&theorem(42, vec![lit(52, true)], lit(2, true))]);
        assert_eq!(rules.len(), 2);
        assert_eq!(
            (
                rules[0].mode,
                rules[0].premises.clone(),
                rules[0].conclusion
            ),
            (RuleMode::Forward, vec![lit(52, true)], lit(2, true))
        );
        assert_eq!(
            (
                rules[1].mode,
                rules[1].premises.clone(),
                rules[1].conclusion
            ),
            (
                RuleMode::Contrapositive(0),
                vec![lit(2, false)],
                lit(52, false)
            )
        );
    }

    #[test]
    fn two_premise_rules() {
        // A=1, B=2, C=3: {A=T, B=F} => C=T
        let rules = compile_rules([&theorem(1, vec![lit(1, true), lit(2, false)], lit(3, true))]);
        let shapes: Vec<_> = rules
            .iter()
            .map(|r| (r.premises.clone(), r.conclusion))
            .collect();
        assert_eq!(
            shapes,
            vec![
                (vec![lit(1, true), lit(2, false)], lit(3, true)),
                (vec![lit(3, false), lit(2, false)], lit(1, false)),
                (vec![lit(3, false), lit(1, true)], lit(2, true)),
            ]
        );
    }

    #[test]
    fn empty_theorem_set() {
        assert!(compile_rules(std::iter::empty::<&Theorem>()).is_empty());
    }

    #[test]
    fn rules_are_ordered_by_theorem_uid() {
        let a = theorem(119, vec![lit(2, true)], lit(1, true));
        let b = theorem(42, vec![lit(52, true)], lit(2, true));
        let sources: Vec<_> = compile_rules([&a, &b])
            .iter()
            .map(|r| r.source.number())
            .collect();
        assert_eq!(sources, vec![42, 42, 119, 119]);
    }

    fn models(theorem: &Theorem) -> impl Iterator<Item = BTreeMap<EntityId, bool>> + '_ {
        let props: Vec<EntityId> = theorem.properties().collect();
        (0..1u32 << props.len()).map(move |bits| {
            props
                .iter()
                .enumerate()
                .map(|(i, &p)| (p, bits >> i & 1 == 1))
                .collect()
        })
    }

    fn satisfies(
        model: &BTreeMap<EntityId, bool>,
        premises: &[Literal],
        conclusion: Literal,
    ) -> bool {
        !premises.iter().all(|l| model[&l.property] == l.value)
            || model[&conclusion.property] == conclusion.value
    }

    proptest! {
        #[test]
        fn rules_follow_from_their_theorem(
            values in proptest::collection::vec(any::<bool>(), 2..=4),
            perm in Just((1..=9).collect::<Vec<u32>>()).prop_shuffle()
        ) {
            let n = values.len() - 1;
            let premises: Vec<Literal> = (0..n).map(|i| lit(perm[i], values[i])).collect();
            let t = theorem(7, premises, lit(perm[n], values[n]));
            let rules = compile_rules([&t]);
            prop_assert_eq!(rules.len(), t.premises.len() + 1);
            // Every model of the theorem is a model of each rule.
            for model in models(&t) {
                if satisfies(&model, &t.premises, t.conclusion) {
                    for r in &rules {
                        prop_assert!(satisfies(&model, &r.premises, r.conclusion));
                    }
                }
            }
        }

        #[test]
        fn negation_is_an_involution(n in 1..1000u32, v in any::<bool>()) {
            prop_assert_eq!(lit(n, v).negate().negate(), lit(n, v));
            prop_assert_ne!(lit(n, v).negate(), lit(n, v));
        }
    }

    #[test]
    fn assignment_is_monotone() {
        let mut a = Assignment::new();
        a.assign(lit(1, true)).unwrap();
        a.assign(lit(1, true)).unwrap();
        assert_eq!(
            a.assign(lit(1, false)),
            Err(Conflict {
                property: p(1),
                existing: true
            })
        );
        assert_eq!(a.get(p(1)), Truth::True);
        assert_eq!(a.get(p(2)), Truth::Unknown);
    }

    #[test]
    fn query_examples() {
        let b = listings();
        assert_eq!(
            parse_query("Discrete + ~$T_0$", &b).unwrap().literals(),
            &[lit(52, true), lit(1, false)]
        );
        assert!(parse_query("", &b).unwrap().is_empty());
        assert!(parse_query("   ", &b).unwrap().is_empty());
        assert_eq!(
            parse_query("kolmogorov", &b).unwrap().literals(),
            &[lit(1, true)]
        );
        assert_eq!(
            parse_query("!T0+discrete", &b).unwrap().literals(),
            &[lit(1, false), lit(52, true)]
        );
    }

    #[test]
    fn query_errors() {
        let b = listings();
        let e = parse_query("Discrete + Disrete", &b).unwrap_err();
        assert_eq!(e.code(), "unresolved_name");
        assert_eq!(e.suggestions(), &["Discrete".to_string()]);
        assert!(matches!(e, QueryError::Unresolved { offset: 11, .. }));

        assert_eq!(
            parse_query("T0 + Kolmogorov", &b).unwrap_err().code(),
            "duplicate_property"
        );
        assert_eq!(
            parse_query("T0 + ~T0", &b).unwrap_err().code(),
            "contradictory_query"
        );
        assert_eq!(parse_query("T0 +", &b).unwrap_err().code(), "empty_term");
        assert_eq!(parse_query("~", &b).unwrap_err().code(), "empty_term");
        assert_eq!(
            parse_query("~~T0", &b).unwrap_err().code(),
            "malformed_term"
        );
    }

    #[test]
    fn canonical_rendering_round_trips() {
        let b = listings();
        let q = parse_query("Discrete + ~$T_0$", &b).unwrap();
        let text = render_query(&q);
        assert_eq!(text, "P000052 + ~P000001");
        assert_eq!(parse_query(&text, &b).unwrap(), q);
        assert_eq!(display_query(&q, &b), "Discrete + ~$T_0$");
    }

    proptest! {
        #[test]
        fn render_parse_identity(picks in proptest::collection::vec((0..3usize, any::<bool>()), 0..3)) {
            let b = listings();
            let props = [p(1), p(2), p(52)];
            let mut literals: Vec<Literal> = Vec::new();
            for (i, v) in picks {
                if literals.iter().all(|l| l.property != props[i]) {
                    literals.push(Literal::new(props[i], v));
                }
            }
            let q = Query::new(literals).unwrap();
            prop_assert_eq!(parse_query(&render_query(&q), &b).unwrap(), q);
        }
    }
}
