//! Deterministic stand-in for a KGQA system, generated over a [`MockGraph`].

use std::collections::{HashMap, HashSet};
use std::hash::Hasher;
use std::sync::Arc;

use fnv::FnvHasher;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{KgqaBackend, QaError, RawCandidate};
use crate::dataset::VanillaRecord;
use crate::kg::{labels_equal, normalize_label, resolve_label, MockGraph};
use crate::pipeline::relation_matches;
use crate::sparql::Term;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MockKgqaConfig {
    pub candidates_per_question: usize,
    /// The correct candidate's rank is uniform over 1..=max_correct_rank.
    pub max_correct_rank: usize,
    /// Probability that a question gets no correct candidate at all.
    pub absent_probability: f64,
    pub seed: u64,
}

impl Default for MockKgqaConfig {
    fn default() -> Self {
        Self {
            candidates_per_question: 60,
            max_correct_rank: 10,
            absent_probability: 0.2,
            seed: 0,
        }
    }
}

struct Gold {
    triple: usize,
    relation: String,
    answer: String,
}

/// Answers questions found in the gold records with one correct candidate
/// (unless the draw says "absent") among distractors that share the
/// subject or the relation. Unknown questions get distractors only.
pub struct MockKgqa {
    config: MockKgqaConfig,
    triples: Vec<(String, String, Term)>,
    labels: HashMap<String, String>,
    by_subject: HashMap<String, Vec<usize>>,
    by_predicate: HashMap<String, Vec<usize>>,
    gold: HashMap<String, Gold>,
}

fn candidate_query(subject: &str, predicate: &str) -> String {
    format!("SELECT DISTINCT ?o1 WHERE {{ <{subject}> <{predicate}> ?o1 . }} LIMIT 1000")
}

impl MockKgqa {
    pub fn new(graph: Arc<MockGraph>, records: &[VanillaRecord], config: MockKgqaConfig) -> Result<Self, String> {
        if config.candidates_per_question < 1 {
            return Err("candidates per question must be at least 1".into());
        }
        if config.max_correct_rank < 1 {
            return Err("max correct rank must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&config.absent_probability) {
            return Err(format!("absent probability {} outside [0, 1]", config.absent_probability));
        }
        let triples: Vec<(String, String, Term)> = graph
            .triples()
            .map(|(s, p, o)| (s.to_string(), p.to_string(), o.clone()))
            .collect();
        let mut labels = HashMap::new();
        let mut by_subject: HashMap<String, Vec<usize>> = HashMap::new();
        let mut by_predicate: HashMap<String, Vec<usize>> = HashMap::new();
        let mut by_object_label: HashMap<String, Vec<usize>> = HashMap::new();
        for (i, (s, p, o)) in triples.iter().enumerate() {
            for iri in [s.as_str(), p.as_str()].into_iter().chain(o.as_iri()) {
                if !labels.contains_key(iri) {
                    let label = resolve_label(iri, "en", graph.as_ref())
                        .map_err(|e| e.to_string())?
                        .label;
                    labels.insert(iri.to_string(), label);
                }
            }
            by_subject.entry(s.clone()).or_default().push(i);
            by_predicate.entry(p.clone()).or_default().push(i);
            let ol = match o {
                Term::Iri { value } => labels[value].clone(),
                other => other.value().to_string(),
            };
            by_object_label.entry(normalize_label(&ol)).or_default().push(i);
        }

        let mut gold = HashMap::new();
        for r in records {
            let found = by_object_label
                .get(&normalize_label(&r.answer))
                .into_iter()
                .flatten()
                .copied()
                .find(|&i| {
                    let (s, p, _) = &triples[i];
                    relation_matches(p, &labels[p], &r.question_relation)
                        && (r.question_entity_label.trim().is_empty()
                            || labels_equal(&labels[s], &r.question_entity_label))
                });
            match found {
                Some(triple) => {
                    gold.entry(r.question.clone()).or_insert(Gold {
                        triple,
                        relation: r.question_relation.clone(),
                        answer: r.answer.clone(),
                    });
                }
                None => log::debug!("no gold triple for record {}", r.question_id),
            }
        }
        Ok(Self {
            config,
            triples,
            labels,
            by_subject,
            by_predicate,
            gold,
        })
    }

    pub fn config(&self) -> &MockKgqaConfig {
        &self.config
    }

    /// Questions with a known gold triple.
    pub fn known_questions(&self) -> usize {
        self.gold.len()
    }

    fn term_label(&self, t: &Term) -> String {
        match t {
            Term::Iri { value } => self.labels[value].clone(),
            other => other.value().to_string(),
        }
    }

    /// Would `SELECT ?o { <s> <p> ?o }` be judged relevant for `gold`?
    fn is_relevant(&self, subject: &str, predicate: &str, gold: &Gold) -> bool {
        if !relation_matches(predicate, &self.labels[predicate], &gold.relation) {
            return false;
        }
        labels_equal(&self.labels[subject], &gold.answer)
            || self.by_subject[subject].iter().any(|&i| {
                let (_, p, o) = &self.triples[i];
                p == predicate && labels_equal(&self.term_label(o), &gold.answer)
            })
    }

    fn rng_for(&self, question: &str) -> ChaCha8Rng {
        let mut h = FnvHasher::default();
        h.write(question.as_bytes());
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        rng.set_stream(h.finish());
        rng
    }

    fn take<'s>(
        &'s self,
        i: usize,
        gold: Option<&Gold>,
        wanted: usize,
        out: &mut Vec<(&'s str, &'s str)>,
        used: &mut HashSet<(&'s str, &'s str)>,
    ) {
        let (s, p, _) = &self.triples[i];
        let key = (s.as_str(), p.as_str());
        if out.len() < wanted && !used.contains(&key) && gold.is_none_or(|g| !self.is_relevant(s, p, g)) {
            used.insert(key);
            out.push(key);
        }
    }

    /// Ranked query texts for `question`.
    pub fn candidates_for(&self, question: &str) -> Vec<String> {
        let n = self.config.candidates_per_question;
        let mut rng = self.rng_for(question);
        let gold = self.gold.get(question);
        let absent = rng.random_bool(self.config.absent_probability);
        let correct_rank = match gold {
            Some(_) if !absent => Some(rng.random_range(1..=self.config.max_correct_rank.min(n))),
            _ => None,
        };
        let wanted = n - usize::from(correct_rank.is_some());

        let mut used: HashSet<(&str, &str)> = HashSet::new();
        if let Some(g) = gold {
            let (s, p, _) = &self.triples[g.triple];
            used.insert((s, p));
        }
        let mut distractors: Vec<(&str, &str)> = Vec::with_capacity(wanted);
        if let Some(g) = gold {
            let (s, p, _) = &self.triples[g.triple];
            let mut same_subject = self.by_subject[s].clone();
            same_subject.shuffle(&mut rng);
            let mut same_relation = self.by_predicate[p].clone();
            same_relation.shuffle(&mut rng);
            let third = wanted / 3;
            for i in same_subject {
                if distractors.len() >= third {
                    break;
                }
                self.take(i, gold, wanted, &mut distractors, &mut used);
            }
            for i in same_relation {
                if distractors.len() >= 2 * third {
                    break;
                }
                self.take(i, gold, wanted, &mut distractors, &mut used);
            }
        }
        let mut attempts = 0;
        while distractors.len() < wanted && attempts < 50 * n && !self.triples.is_empty() {
            attempts += 1;
            let i = rng.random_range(0..self.triples.len());
            self.take(i, gold, wanted, &mut distractors, &mut used);
        }
        distractors.shuffle(&mut rng);

        let mut out: Vec<String> = distractors
            .into_iter()
            .map(|(s, p)| candidate_query(s, p))
            .collect();
        if let (Some(rank), Some(g)) = (correct_rank, gold) {
            let (s, p, _) = &self.triples[g.triple];
            out.insert((rank - 1).min(out.len()), candidate_query(s, p));
        }
        out
    }
}

impl KgqaBackend for MockKgqa {
    fn fetch(&self, question: &str) -> Result<Vec<RawCandidate>, QaError> {
        Ok(self
            .candidates_for(question)
            .into_iter()
            .map(|sparql| RawCandidate {
                sparql,
                confidence: None,
            })
            .collect())
    }

    fn identity(&self) -> String {
        format!(
            "mock:{}:{}:{}:{}:{}",
            self.triples.len(),
            self.config.candidates_per_question,
            self.config.max_correct_rank,
            self.config.absent_probability,
            self.config.seed
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kg::{execute, DEFAULT_ROW_CAP};
    use crate::pipeline::judge;
    use crate::qa::ask;
    use crate::synthetic::{SyntheticWorld, WorldConfig};

    fn world() -> SyntheticWorld {
        SyntheticWorld::generate(WorldConfig { persons: 40, seed: 9 })
    }

    fn relevant_ranks(w: &SyntheticWorld, m: &MockKgqa, r: &VanillaRecord) -> Vec<usize> {
        let labels = w.label_map();
        let list = ask(&r.question, m).unwrap();
        list.candidates
            .iter()
            .filter(|c| {
                let q = c.strip_unsupported().rewrite_select_all();
                let rs = execute(&q, &w.graph, DEFAULT_ROW_CAP).unwrap();
                judge(&q, &rs, r, &labels).relevant
            })
            .map(|c| c.rank)
            .collect()
    }

    #[test]
    fn sixty_candidates_with_at_most_one_correct_in_top_ten() {
        let w = world();
        let m = MockKgqa::new(Arc::new(w.graph.clone()), &w.records, MockKgqaConfig::default()).unwrap();
        assert_eq!(m.known_questions(), w.records.len());
        let mut absent = 0;
        for r in w.records.iter().take(60) {
            let list = ask(&r.question, &m).unwrap();
            assert_eq!(list.len(), 60);
            assert_eq!(list.candidates.iter().map(|c| c.rank).collect::<Vec<_>>(), (1..=60).collect::<Vec<_>>());
            let ranks = relevant_ranks(&w, &m, r);
            assert!(ranks.len() <= 1, "{ranks:?}");
            match ranks.first() {
                Some(&k) => assert!((1..=10).contains(&k)),
                None => absent += 1,
            }
        }
        assert!(absent > 0 && absent < 30, "absent {absent}");
    }

    #[test]
    fn always_absent_config() {
        let w = world();
        let cfg = MockKgqaConfig {
            absent_probability: 1.0,
            ..Default::default()
        };
        let m = MockKgqa::new(Arc::new(w.graph.clone()), &w.records, cfg).unwrap();
        for r in w.records.iter().take(10) {
            assert_eq!(ask(&r.question, &m).unwrap().len(), 60);
            assert!(relevant_ranks(&w, &m, r).is_empty());
        }
    }

    #[test]
    fn pure_function_of_question_and_seed() {
        let w = world();
        let g = Arc::new(w.graph.clone());
        let a = MockKgqa::new(g.clone(), &w.records, MockKgqaConfig::default()).unwrap();
        let b = MockKgqa::new(g.clone(), &w.records, MockKgqaConfig::default()).unwrap();
        let c = MockKgqa::new(g, &w.records, MockKgqaConfig { seed: 1, ..Default::default() }).unwrap();
        let q = &w.records[3].question;
        assert_eq!(a.candidates_for(q), b.candidates_for(q));
        assert_ne!(a.candidates_for(q), c.candidates_for(q));
        assert_eq!(a.candidates_for("not a known question").len(), 60);
    }

    #[test]
    fn rejects_bad_config() {
        let g = Arc::new(MockGraph::new());
        let zero = MockKgqaConfig {
            candidates_per_question: 0,
            ..Default::default()
        };
        assert!(MockKgqa::new(g, &[], zero).is_err());
    }
}
