//! Answer verbalization: grounded query candidates to answer text.
//!
//! Two modes are supported. [`VerbalizationMode::Nlg`] renders each grounded
//! triple with a template and joins the clauses with "and";
//! [`VerbalizationMode::BagOfLabels`] concatenates the labels of every term
//! in occurrence order. Neither aims for fluency.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::kg::{uri_fallback, KgError, LabelResolver, LabelSource, ResultSet};
use crate::sparql::{ground_patterns, Binding, GroundError, GroundedTriple, QueryCandidate, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerbalizationMode {
    /// Template sentences from grounded triples.
    Nlg,
    /// Space-joined labels of the grounded terms.
    BagOfLabels,
}

impl VerbalizationMode {
    pub fn name(self) -> &'static str {
        match self {
            VerbalizationMode::Nlg => "nlg",
            VerbalizationMode::BagOfLabels => "bag-of-labels",
        }
    }
}

impl std::str::FromStr for VerbalizationMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "nlg" | "a2" | "A2" => Ok(VerbalizationMode::Nlg),
            "bag-of-labels" | "bol" | "a3" | "A3" => Ok(VerbalizationMode::BagOfLabels),
            other => Err(format!("unknown verbalization mode '{other}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerText {
    pub text: String,
    pub mode: VerbalizationMode,
    pub candidate_id: String,
    pub binding_index: usize,
}

/// Maps an IRI to display text. Implementations must never return an
/// empty string.
pub trait LabelLookup {
    fn label(&self, iri: &str) -> String;
}

/// Pre-resolved labels; IRIs missing from the map use the IRI fallback.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelMap(HashMap<String, String>);

impl LabelMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, iri: impl Into<String>, label: impl Into<String>) {
        self.0.insert(iri.into(), label.into());
    }

    pub fn contains(&self, iri: &str) -> bool {
        self.0.contains_key(iri)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Resolves every IRI in `triples` that is not yet in the map.
    pub fn resolve_all<'a, S: LabelSource>(
        &mut self,
        triples: impl IntoIterator<Item = &'a GroundedTriple>,
        resolver: &LabelResolver<S>,
    ) -> Result<(), KgError> {
        for t in triples {
            for iri in t.terms().into_iter().filter_map(Term::as_iri) {
                if !self.0.contains_key(iri) {
                    let record = resolver.resolve(iri)?;
                    self.0.insert(iri.to_string(), record.label);
                }
            }
        }
        Ok(())
    }
}

impl<K: Into<String>, V: Into<String>> FromIterator<(K, V)> for LabelMap {
    fn from_iter<I: IntoIterator<Item = (K, V)>>(iter: I) -> Self {
        LabelMap(iter.into_iter().map(|(k, v)| (k.into(), v.into())).collect())
    }
}

impl LabelLookup for LabelMap {
    fn label(&self, iri: &str) -> String {
        match self.0.get(iri) {
            Some(l) if !l.trim().is_empty() => l.clone(),
            _ => uri_fallback(iri),
        }
    }
}

impl<S: LabelSource> LabelLookup for LabelResolver<S> {
    fn label(&self, iri: &str) -> String {
        match self.resolve(iri) {
            Ok(r) => r.label,
            Err(e) => {
                log::warn!("label lookup for <{iri}> failed ({e}); using IRI fallback");
                uri_fallback(iri)
            }
        }
    }
}

fn single_line(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn term_text(term: &Term, labels: &dyn LabelLookup) -> String {
    let raw = match term {
        Term::Iri { value } => labels.label(value),
        Term::Literal { value, .. } => value.clone(),
        Term::Variable { value } => format!("?{value}"),
    };
    let text = single_line(&raw);
    if text.is_empty() {
        // whitespace-only literal
        "\"\"".to_string()
    } else {
        text
    }
}

/// Predicate labels rendered as "{S} is {P} {O}" instead of the possessive
/// "{S}'s {P} is {O}".
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhraseTable {
    pub copula_predicates: Vec<String>,
}

impl Default for PhraseTable {
    fn default() -> Self {
        Self {
            copula_predicates: vec!["given name".into(), "family name".into(), "name".into()],
        }
    }
}

impl PhraseTable {
    /// True when the label equals an entry or starts with one followed by a
    /// space (case-insensitive).
    pub fn uses_copula(&self, predicate_label: &str) -> bool {
        let label = predicate_label.to_lowercase();
        self.copula_predicates.iter().any(|p| {
            let p = p.to_lowercase();
            label == p || label.strip_prefix(&p).is_some_and(|rest| rest.starts_with(' '))
        })
    }
}

#[derive(Debug, Clone, Default)]
pub struct Verbalizer {
    pub phrases: PhraseTable,
}

impl Verbalizer {
    pub fn new(phrases: PhraseTable) -> Self {
        Self { phrases }
    }

    /// One clause, without a trailing period.
    pub fn verbalize_triple(&self, t: &GroundedTriple, labels: &dyn LabelLookup) -> String {
        let s = term_text(t.subject(), labels);
        let p = term_text(t.predicate(), labels);
        let o = term_text(t.object(), labels);
        if self.phrases.uses_copula(&p) {
            format!("{s} is {p} {o}")
        } else {
            format!("{s}'s {p} is {o}")
        }
    }

    pub fn verbalize_candidate(
        &self,
        q: &QueryCandidate,
        b: &Binding,
        labels: &dyn LabelLookup,
    ) -> Result<String, GroundError> {
        let clauses: Vec<String> = ground_patterns(q, b)?
            .iter()
            .map(|t| self.verbalize_triple(t, labels))
            .collect();
        Ok(format!("{}.", clauses.join(" and ")))
    }

    pub fn verbalize_bag_of_labels(
        &self,
        q: &QueryCandidate,
        b: &Binding,
        labels: &dyn LabelLookup,
    ) -> Result<String, GroundError> {
        let grounded = ground_patterns(q, b)?;
        let mut seen: HashSet<&Term> = HashSet::new();
        let mut parts = Vec::new();
        for term in grounded.iter().flat_map(GroundedTriple::terms) {
            if seen.insert(term) {
                parts.push(term_text(term, labels));
            }
        }
        Ok(parts.join(" "))
    }

    pub fn verbalize(
        &self,
        q: &QueryCandidate,
        b: &Binding,
        binding_index: usize,
        mode: VerbalizationMode,
        labels: &dyn LabelLookup,
    ) -> Result<AnswerText, GroundError> {
        let text = match mode {
            VerbalizationMode::Nlg => self.verbalize_candidate(q, b, labels)?,
            VerbalizationMode::BagOfLabels => self.verbalize_bag_of_labels(q, b, labels)?,
        };
        Ok(AnswerText {
            text,
            mode,
            candidate_id: q.id.clone(),
            binding_index,
        })
    }

    /// One answer text per result row, up to `row_cap` rows, in result
    /// order. Rows that cannot ground `q` are skipped.
    pub fn verbalize_all(
        &self,
        q: &QueryCandidate,
        rs: &ResultSet,
        mode: VerbalizationMode,
        labels: &dyn LabelLookup,
        row_cap: usize,
    ) -> Vec<AnswerText> {
        rs.rows
            .iter()
            .enumerate()
            .take(row_cap)
            .filter_map(|(i, row)| match self.verbalize(q, row, i, mode, labels) {
                Ok(a) => Some(a),
                Err(e) => {
                    log::warn!("candidate {}: row {i} not verbalized: {e}", q.id);
                    None
                }
            })
            .collect()
    }
}
