//! SPARQL query candidates.
//!
//! A deliberately small SPARQL subset: `PREFIX` declarations, a `SELECT`
//! with optional `DISTINCT`, and one basic graph pattern. Anything else that
//! a KGQA system tends to emit (aggregates, `FILTER`, `ORDER BY`, `LIMIT`, ...)
//! is recognized and kept as an opaque [`Modifier`] so it can be stripped
//! before the query is grounded.

mod ground;
mod parser;
mod serialize;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use ground::{ground_patterns, GroundError, GroundedTriple};
pub use parser::{parse_query, parse_query_bytes, ParseError};
pub use serialize::serialize;

pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
pub const RDFS_LABEL: &str = "http://www.w3.org/2000/01/rdf-schema#label";
pub const XSD: &str = "http://www.w3.org/2001/XMLSchema#";

/// An RDF term or a query variable.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Term {
    /// Absolute IRI.
    Iri { value: String },
    /// Variable name without the leading `?`.
    Variable { value: String },
    Literal {
        value: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lang: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        datatype: Option<String>,
    },
}

impl Term {
    pub fn iri(value: impl Into<String>) -> Self {
        Term::Iri {
            value: value.into(),
        }
    }

    pub fn var(name: impl Into<String>) -> Self {
        Term::Variable { value: name.into() }
    }

    pub fn literal(value: impl Into<String>) -> Self {
        Term::Literal {
            value: value.into(),
            lang: None,
            datatype: None,
        }
    }

    pub fn lang_literal(value: impl Into<String>, lang: impl Into<String>) -> Self {
        Term::Literal {
            value: value.into(),
            lang: Some(lang.into()),
            datatype: None,
        }
    }

    /// IRI, variable name or lexical form.
    pub fn value(&self) -> &str {
        match self {
            Term::Iri { value } | Term::Variable { value } | Term::Literal { value, .. } => value,
        }
    }

    pub fn is_variable(&self) -> bool {
        matches!(self, Term::Variable { .. })
    }

    pub fn as_iri(&self) -> Option<&str> {
        match self {
            Term::Iri { value } => Some(value),
            _ => None,
        }
    }

    pub fn as_variable(&self) -> Option<&str> {
        match self {
            Term::Variable { value } => Some(value),
            _ => None,
        }
    }
}

/// N-Triples style rendering; variables as `?name`.
impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri { value } => write!(f, "<{value}>"),
            Term::Variable { value } => write!(f, "?{value}"),
            Term::Literal {
                value,
                lang,
                datatype,
            } => {
                f.write_str("\"")?;
                for c in value.chars() {
                    match c {
                        '"' => f.write_str("\\\"")?,
                        '\\' => f.write_str("\\\\")?,
                        '\n' => f.write_str("\\n")?,
                        '\r' => f.write_str("\\r")?,
                        '\t' => f.write_str("\\t")?,
                        c => write!(f, "{c}")?,
                    }
                }
                f.write_str("\"")?;
                if let Some(lang) = lang {
                    write!(f, "@{lang}")
                } else if let Some(dt) = datatype {
                    write!(f, "^^<{dt}>")
                } else {
                    Ok(())
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TriplePattern {
    pub subject: Term,
    pub predicate: Term,
    pub object: Term,
}

impl TriplePattern {
    pub fn new(subject: Term, predicate: Term, object: Term) -> Self {
        Self {
            subject,
            predicate,
            object,
        }
    }

    pub fn terms(&self) -> [&Term; 3] {
        [&self.subject, &self.predicate, &self.object]
    }

    /// Variables in subject, predicate, object order (with repeats).
    pub fn variables(&self) -> impl Iterator<Item = &str> {
        self.terms().into_iter().filter_map(Term::as_variable)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Projection {
    /// `SELECT *`
    All,
    Vars(Vec<String>),
}

/// Which kind of clause a [`Modifier`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModifierKind {
    /// Aggregate projection such as `(COUNT(?x) AS ?n)`.
    Aggregate,
    Filter,
    GroupBy,
    Having,
    OrderBy,
    Limit,
    Offset,
}

impl ModifierKind {
    /// Kinds that live in the `SELECT` clause.
    pub fn in_select(self) -> bool {
        self == ModifierKind::Aggregate
    }

    /// Kinds that live inside the `WHERE` braces.
    pub fn in_body(self) -> bool {
        self == ModifierKind::Filter
    }
}

/// A recognized but unsupported clause, kept verbatim.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Modifier {
    pub kind: ModifierKind,
    pub text: String,
}

impl Modifier {
    pub fn new(kind: ModifierKind, text: impl Into<String>) -> Self {
        Self {
            kind,
            text: text.into(),
        }
    }

    /// Whether [`QueryCandidate::strip_unsupported`] removes this clause.
    ///
    /// Every recognized clause is unsupported for grounding: aggregates
    /// (COUNT, MAX, MIN and friends), FILTER, ORDER BY, LIMIT, and the
    /// grouping/offset clauses that only make sense alongside them.
    pub fn is_unsupported(&self) -> bool {
        true
    }
}

/// Result-row assignments for query variables.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Binding {
    assignments: BTreeMap<String, Term>,
}

impl Binding {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns `None` (and leaves the binding untouched) for variable terms.
    pub fn insert(&mut self, var: impl Into<String>, term: Term) -> Option<()> {
        if term.is_variable() {
            return None;
        }
        self.assignments.insert(var.into(), term);
        Some(())
    }

    pub fn with(mut self, var: impl Into<String>, term: Term) -> Self {
        self.insert(var, term)
            .expect("binding assignments must not be variables");
        self
    }

    pub fn get(&self, var: &str) -> Option<&Term> {
        self.assignments.get(var)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Term)> {
        self.assignments.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    /// Keeps only the listed variables.
    pub fn project(&self, vars: &[String]) -> Binding {
        Binding {
            assignments: self
                .assignments
                .iter()
                .filter(|(k, _)| vars.contains(k))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        }
    }
}

impl FromIterator<(String, Term)> for Binding {
    fn from_iter<I: IntoIterator<Item = (String, Term)>>(iter: I) -> Self {
        let mut b = Binding::new();
        for (k, v) in iter {
            b.insert(k, v);
        }
        b
    }
}

/// One SPARQL query proposed by a KGQA system for a question.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryCandidate {
    pub id: String,
    /// 1-based position in the system's ranked list.
    pub rank: usize,
    pub projection: Projection,
    pub distinct: bool,
    pub patterns: Vec<TriplePattern>,
    pub modifiers: Vec<Modifier>,
    /// Declared prefixes, prefix name (without colon) to IRI base.
    pub prefixes: BTreeMap<String, String>,
    pub raw_text: String,
}

impl QueryCandidate {
    /// Equality on everything the query text determines (ignores `id`,
    /// `rank` and `raw_text`).
    pub fn structurally_eq(&self, other: &Self) -> bool {
        self.projection == other.projection
            && self.distinct == other.distinct
            && self.patterns == other.patterns
            && self.modifiers == other.modifiers
            && self.prefixes == other.prefixes
    }

    pub fn with_id(mut self, id: impl Into<String>, rank: usize) -> Self {
        self.id = id.into();
        self.rank = rank;
        self
    }

    /// Pattern variables in order of first occurrence.
    pub fn variables(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for v in self.patterns.iter().flat_map(TriplePattern::variables) {
            if !out.iter().any(|o| o == v) {
                out.push(v.to_string());
            }
        }
        out
    }

    pub fn has_aggregate(&self) -> bool {
        self.modifiers
            .iter()
            .any(|m| m.kind == ModifierKind::Aggregate)
    }

    /// Copy without aggregate, FILTER, ORDER BY, LIMIT (and related)
    /// clauses. A projection left empty by removing its aggregates becomes
    /// `*`.
    pub fn strip_unsupported(&self) -> QueryCandidate {
        let mut q = self.clone();
        q.modifiers.retain(|m| !m.is_unsupported());
        if matches!(&q.projection, Projection::Vars(v) if v.is_empty()) {
            q.projection = Projection::All;
        }
        q
    }

    /// Copy rewritten to `SELECT DISTINCT *` so every variable is returned.
    pub fn rewrite_select_all(&self) -> QueryCandidate {
        let mut q = self.clone();
        q.projection = Projection::All;
        q.distinct = true;
        q
    }

    /// Variables returned by executing the query.
    pub fn projected_variables(&self) -> Vec<String> {
        match &self.projection {
            Projection::All => self.variables(),
            Projection::Vars(v) => v.clone(),
        }
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    pub const KENNEDY_QUERY: &str = "# question: \n#     What was the cause of death of John Kennedy?\n# query:
PREFIX dbr: <http://dbpedia.org/resource/>
PREFIX dbo: <http://dbpedia.org/ontology/>
SELECT ?answer WHERE { \n    dbr:John_F._Kennedy dbo:deathCause ?answer . \n}
# the result is dbr:Assassination_of_John_F._Kennedy";

    pub const GIVEN_NAME_QUERY: &str = "PREFIX wd: <http://www.wikidata.org/entity/>
PREFIX wdt: <http://www.wikidata.org/prop/direct/>
SELECT DISTINCT ?o2 WHERE {
    ?s1  ?p1  wd:Q57747377 .
    ?s1  wdt:P21 ?o2 .
}  LIMIT 1000";
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn strip_removes_given_name_query_limit() {
        let q = parse_query(GIVEN_NAME_QUERY).unwrap();
        assert_eq!(q.modifiers, vec![Modifier::new(ModifierKind::Limit, "LIMIT 1000")]);
        let s = q.strip_unsupported();
        assert!(s.modifiers.is_empty());
        assert_eq!(s.patterns, q.patterns);
        // original untouched
        assert_eq!(q.modifiers.len(), 1);
    }

    #[test]
    fn strip_without_modifiers_is_identity() {
        let q = parse_query(KENNEDY_QUERY).unwrap();
        assert_eq!(q.strip_unsupported(), q);
    }

    #[test]
    fn strip_removes_filter_keeps_patterns() {
        let text = KENNEDY_QUERY.replace(
            "?answer . \n}",
            "?answer . \n    FILTER regex(?answer, 'Assassination')\n}",
        );
        let q = parse_query(&text).unwrap();
        assert_eq!(q.modifiers.len(), 1);
        assert_eq!(q.modifiers[0].kind, ModifierKind::Filter);
        let base = parse_query(KENNEDY_QUERY).unwrap();
        let s = q.strip_unsupported();
        assert!(s.modifiers.is_empty());
        assert_eq!(s.patterns, base.patterns);
    }

    #[test]
    fn aggregate_only_projection_becomes_all() {
        let q = parse_query(
            "PREFIX wdt: <http://www.wikidata.org/prop/direct/>
             SELECT (COUNT(?x) AS ?n) WHERE { ?x wdt:P31 ?y } ORDER BY DESC(?n) LIMIT 5",
        )
        .unwrap();
        assert!(q.has_aggregate());
        assert_eq!(q.projection, Projection::Vars(vec![]));
        let s = q.strip_unsupported();
        assert_eq!(s.projection, Projection::All);
        assert!(s.modifiers.is_empty());
    }

    #[test]
    fn rewrite_given_name_query() {
        let q = parse_query(GIVEN_NAME_QUERY).unwrap();
        let r = q.rewrite_select_all();
        assert_eq!(r.projection, Projection::All);
        assert!(r.distinct);
        assert_eq!(r.patterns, q.patterns);
        assert_eq!(r.rewrite_select_all(), r);
    }

    #[test]
    fn rewrite_kennedy_query_round_trips() {
        let q = parse_query(KENNEDY_QUERY).unwrap().rewrite_select_all();
        assert_eq!(q.projection, Projection::All);
        assert!(q.distinct);
        let back = parse_query(&serialize(&q)).unwrap();
        assert!(back.structurally_eq(&q));
    }

    #[test]
    fn binding_rejects_variables() {
        let mut b = Binding::new();
        assert!(b.insert("x", Term::var("y")).is_none());
        assert!(b.is_empty());
    }
}
