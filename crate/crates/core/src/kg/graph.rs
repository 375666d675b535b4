use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{KgError, LabelSource, QueryBackend, ResultSet};
use crate::sparql::{Binding, QueryCandidate, Term, TriplePattern};

/// In-memory triple store standing in for Wikidata in tests and mock runs.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(from = "GraphFile", into = "GraphFile")]
pub struct MockGraph {
    triples: BTreeSet<(String, String, Term)>,
    labels: BTreeMap<String, BTreeMap<String, String>>,
    by_subject: HashMap<String, Vec<usize>>,
    by_predicate: HashMap<String, Vec<usize>>,
    by_object: HashMap<Term, Vec<usize>>,
    rows: Vec<(String, String, Term)>,
}

#[derive(Serialize, Deserialize)]
struct GraphFile {
    triples: Vec<(String, String, Term)>,
    #[serde(default)]
    labels: BTreeMap<String, BTreeMap<String, String>>,
}

impl From<GraphFile> for MockGraph {
    fn from(f: GraphFile) -> Self {
        let mut g = MockGraph::new();
        for (s, p, o) in f.triples {
            g.insert(&s, &p, o);
        }
        g.labels = f.labels;
        g
    }
}

impl From<MockGraph> for GraphFile {
    fn from(g: MockGraph) -> Self {
        GraphFile {
            triples: g.triples.into_iter().collect(),
            labels: g.labels,
        }
    }
}

impl MockGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_json_file(path: &Path) -> std::io::Result<Self> {
        let file = std::fs::File::open(path)?;
        serde_json::from_reader(std::io::BufReader::new(file)).map_err(std::io::Error::other)
    }

    /// Adds a triple. Variable objects are ignored.
    pub fn insert(&mut self, subject: &str, predicate: &str, object: Term) -> bool {
        if object.is_variable() {
            return false;
        }
        let triple = (subject.to_string(), predicate.to_string(), object);
        if !self.triples.insert(triple.clone()) {
            return false;
        }
        let idx = self.rows.len();
        self.by_subject.entry(triple.0.clone()).or_default().push(idx);
        self.by_predicate.entry(triple.1.clone()).or_default().push(idx);
        self.by_object.entry(triple.2.clone()).or_default().push(idx);
        self.rows.push(triple);
        true
    }

    pub fn set_label(&mut self, iri: &str, lang: &str, label: &str) {
        self.labels
            .entry(iri.to_string())
            .or_default()
            .insert(lang.to_string(), label.to_string());
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn contains(&self, subject: &str, predicate: &str, object: &Term) -> bool {
        self.triples
            .contains(&(subject.to_string(), predicate.to_string(), object.clone()))
    }

    pub fn triples(&self) -> impl Iterator<Item = (&str, &str, &Term)> {
        self.triples.iter().map(|(s, p, o)| (s.as_str(), p.as_str(), o))
    }

    pub fn labels_of(&self, iri: &str) -> Option<&BTreeMap<String, String>> {
        self.labels.get(iri)
    }

    /// Candidate row indices for `pattern` given the bindings so far.
    fn candidates(&self, pattern: &TriplePattern, binding: &Binding) -> Option<&[usize]> {
        let resolve = |t: &Term| -> Option<Term> {
            match t {
                Term::Variable { value } => binding.get(value).cloned(),
                t => Some(t.clone()),
            }
        };
        let mut lists: Vec<&[usize]> = Vec::with_capacity(3);
        if let Some(s) = resolve(&pattern.subject) {
            lists.push(
                s.as_iri()
                    .and_then(|s| self.by_subject.get(s))
                    .map_or(&[][..], Vec::as_slice),
            );
        }
        if let Some(p) = resolve(&pattern.predicate) {
            lists.push(
                p.as_iri()
                    .and_then(|p| self.by_predicate.get(p))
                    .map_or(&[][..], Vec::as_slice),
            );
        }
        if let Some(o) = resolve(&pattern.object) {
            lists.push(self.by_object.get(&o).map_or(&[][..], Vec::as_slice));
        }
        lists.into_iter().min_by_key(|l| l.len())
    }

    fn extend(
        &self,
        patterns: &[TriplePattern],
        binding: Binding,
        out: &mut BTreeSet<Binding>,
    ) {
        let Some((pattern, rest)) = patterns.split_first() else {
            out.insert(binding);
            return;
        };
        let all: Vec<usize>;
        let candidates = match self.candidates(pattern, &binding) {
            Some(c) => c,
            None => {
                all = (0..self.rows.len()).collect();
                &all
            }
        };
        for &idx in candidates {
            let (s, p, o) = &self.rows[idx];
            if !(compatible_iri(&pattern.subject, s, &binding)
                && compatible_iri(&pattern.predicate, p, &binding)
                && compatible(&pattern.object, o, &binding))
            {
                continue;
            }
            let mut b = binding.clone();
            if unify_iri(&pattern.subject, s, &mut b)
                && unify_iri(&pattern.predicate, p, &mut b)
                && unify(&pattern.object, o, &mut b)
            {
                self.extend(rest, b, out);
            }
        }
    }
}

// Cheap pre-check against the current binding; ignores repeated variables
// inside one pattern, which `unify` handles.
fn compatible_iri(pattern: &Term, value: &str, b: &Binding) -> bool {
    match pattern {
        Term::Variable { value: name } => b.get(name).is_none_or(|t| t.as_iri() == Some(value)),
        t => t.as_iri() == Some(value),
    }
}

fn compatible(pattern: &Term, value: &Term, b: &Binding) -> bool {
    match pattern {
        Term::Variable { value: name } => b.get(name).is_none_or(|t| t == value),
        t => t == value,
    }
}

fn unify_iri(pattern: &Term, value: &str, b: &mut Binding) -> bool {
    match pattern {
        Term::Variable { value: name } => match b.get(name) {
            Some(bound) => bound.as_iri() == Some(value),
            None => {
                b.insert(name.clone(), Term::iri(value));
                true
            }
        },
        t => t.as_iri() == Some(value),
    }
}

fn unify(pattern: &Term, value: &Term, b: &mut Binding) -> bool {
    match pattern {
        Term::Variable { value: name } => match b.get(name) {
            Some(bound) => bound == value,
            None => {
                b.insert(name.clone(), value.clone());
                true
            }
        },
        t => t == value,
    }
}

/// Conjunctive basic-graph-pattern evaluation: one row per distinct variable
/// assignment that satisfies every pattern.
pub fn match_bgp(patterns: &[TriplePattern], g: &MockGraph) -> ResultSet {
    let mut variables: Vec<String> = Vec::new();
    for v in patterns.iter().flat_map(TriplePattern::variables) {
        if !variables.iter().any(|x| x == v) {
            variables.push(v.to_string());
        }
    }
    let mut rows = BTreeSet::new();
    if !patterns.is_empty() {
        g.extend(patterns, Binding::new(), &mut rows);
    }
    ResultSet::new(variables, rows.into_iter().collect())
}

impl QueryBackend for MockGraph {
    fn evaluate(&self, q: &QueryCandidate, _row_cap: usize) -> Result<ResultSet, KgError> {
        Ok(match_bgp(&q.patterns, self))
    }

    fn cache_identity(&self) -> String {
        format!("mock-graph:{}", self.len())
    }
}

impl LabelSource for MockGraph {
    fn labels(&self, iri: &str) -> Result<BTreeMap<String, String>, KgError> {
        Ok(self.labels.get(iri).cloned().unwrap_or_default())
    }
}
