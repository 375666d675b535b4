//! Relevance judgments, classifier-based filtering and before/after quality
//! comparison for ranked answer lists.

mod metrics;
mod report;

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use metrics::{ndcg_at_k, precision_at_k};
pub use report::{
    compare, render_csv, render_markdown, EvaluationConfig, MetricRow, QualityReport, QuestionRow,
};

use crate::classifier::{ClassifierError, PairScore, Scorer};
use crate::dataset::VanillaRecord;
use crate::kg::{execute, labels_equal, uri_fallback, KgError, QueryBackend, ResultSet, DEFAULT_ROW_CAP};
use crate::qa::{CandidateList, QaError};
use crate::sparql::{ground_patterns, QueryCandidate, Term};
use crate::verbalize::{AnswerText, LabelLookup, VerbalizationMode, Verbalizer};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Kg(#[from] KgError),
    #[error(transparent)]
    Qa(#[from] QaError),
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
    #[error("before and after lists cover different questions: {0}")]
    MismatchedQuestions(String),
    #[error("invalid evaluation config: {0}")]
    InvalidConfig(String),
}

/// Whether a predicate denotes the gold relation: its label, its IRI or the
/// IRI's last segment equals `relation`, ignoring case and extra
/// whitespace.
pub fn relation_matches(predicate_iri: &str, predicate_label: &str, relation: &str) -> bool {
    labels_equal(predicate_label, relation)
        || predicate_iri == relation.trim()
        || labels_equal(&uri_fallback(predicate_iri), relation)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatchedVia {
    ObjectLabel,
    SubjectLabel,
    None,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelevanceJudgment {
    pub candidate_id: String,
    pub relevant: bool,
    pub matched_via: MatchedVia,
}

fn term_label(t: &Term, labels: &dyn LabelLookup) -> String {
    match t {
        Term::Iri { value } => labels.label(value),
        other => other.value().to_string(),
    }
}

/// A candidate is relevant when some row grounds a triple whose predicate
/// is the gold relation and whose object (or failing that, subject) label
/// equals the gold answer.
pub fn judge(
    candidate: &QueryCandidate,
    rs: &ResultSet,
    gold: &VanillaRecord,
    labels: &dyn LabelLookup,
) -> RelevanceJudgment {
    let mut via = MatchedVia::None;
    'rows: for row in &rs.rows {
        let Ok(triples) = ground_patterns(candidate, row) else {
            continue;
        };
        for t in &triples {
            let Some(p) = t.predicate().as_iri() else { continue };
            if !relation_matches(p, &labels.label(p), &gold.question_relation) {
                continue;
            }
            if labels_equal(&term_label(t.object(), labels), &gold.answer) {
                via = MatchedVia::ObjectLabel;
                break 'rows;
            }
            if labels_equal(&term_label(t.subject(), labels), &gold.answer) {
                via = MatchedVia::SubjectLabel;
            }
        }
    }
    RelevanceJudgment {
        candidate_id: candidate.id.clone(),
        relevant: via != MatchedVia::None,
        matched_via: via,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnswerEntry {
    pub candidate: QueryCandidate,
    /// Verbalized rows; empty when the candidate returned nothing.
    pub answers: Vec<AnswerText>,
    pub judgment: RelevanceJudgment,
    pub score: Option<PairScore>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedAnswerList {
    pub question_id: String,
    pub question: String,
    pub entries: Vec<AnswerEntry>,
    /// Relevant entries in the unfiltered list; the NDCG normalizer.
    pub original_relevant: usize,
    pub original_len: usize,
    pub removed: usize,
}

impl RankedAnswerList {
    pub fn relevance(&self) -> Vec<bool> {
        self.entries.iter().map(|e| e.judgment.relevant).collect()
    }

    pub fn precision_at_k(&self, k: usize) -> f64 {
        precision_at_k(&self.relevance(), k)
    }

    pub fn ndcg_at_k(&self, k: usize) -> f64 {
        ndcg_at_k(&self.relevance(), k, self.original_relevant)
    }

    pub fn candidate_ids(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.candidate.id.as_str()).collect()
    }
}

/// Turns candidate lists into judged, verbalized answer lists.
pub struct ListBuilder<'a> {
    pub backend: &'a dyn QueryBackend,
    pub labels: &'a (dyn LabelLookup + Sync),
    pub verbalizer: Verbalizer,
    pub mode: VerbalizationMode,
    /// Rows verbalized per candidate.
    pub answers_per_candidate: usize,
    /// Drop candidates that use aggregates instead of stripping them.
    pub drop_aggregates: bool,
}

impl<'a> ListBuilder<'a> {
    pub fn new(
        backend: &'a dyn QueryBackend,
        labels: &'a (dyn LabelLookup + Sync),
        mode: VerbalizationMode,
    ) -> Self {
        Self {
            backend,
            labels,
            verbalizer: Verbalizer::default(),
            mode,
            answers_per_candidate: 1,
            drop_aggregates: false,
        }
    }

    pub fn build(
        &self,
        question_id: &str,
        gold: &VanillaRecord,
        candidates: &CandidateList,
    ) -> Result<RankedAnswerList, PipelineError> {
        let mut entries = Vec::with_capacity(candidates.len());
        for c in &candidates.candidates {
            if self.drop_aggregates && c.has_aggregate() {
                log::info!("{question_id}: candidate {} uses an aggregate; dropped", c.id);
                continue;
            }
            let prepared = c.strip_unsupported().rewrite_select_all();
            let rs = match execute(&prepared, self.backend, DEFAULT_ROW_CAP) {
                Ok(rs) => rs,
                Err(KgError::Transport(e)) => return Err(KgError::Transport(e).into()),
                Err(e) => {
                    log::warn!("{question_id}: candidate {} failed ({e}); treated as empty", c.id);
                    ResultSet::new(prepared.variables(), vec![])
                }
            };
            let judgment = judge(&prepared, &rs, gold, self.labels);
            let answers = self.verbalizer.verbalize_all(
                &prepared,
                &rs,
                self.mode,
                self.labels,
                self.answers_per_candidate,
            );
            entries.push(AnswerEntry {
                candidate: c.clone(),
                answers,
                judgment,
                score: None,
            });
        }
        let original_relevant = entries.iter().filter(|e| e.judgment.relevant).count();
        Ok(RankedAnswerList {
            question_id: question_id.to_string(),
            question: gold.question.clone(),
            original_len: entries.len(),
            entries,
            original_relevant,
            removed: 0,
        })
    }
}

/// Keeps the entries whose score is at least `threshold`, in their
/// original order. `scores` is parallel to `list.entries`; entries without
/// a score are removed.
pub fn filter_with_scores(list: &RankedAnswerList, scores: &[Option<f64>], threshold: f64) -> RankedAnswerList {
    assert_eq!(scores.len(), list.entries.len(), "one score slot per entry");
    let entries: Vec<AnswerEntry> = list
        .entries
        .iter()
        .zip(scores)
        .filter_map(|(e, s)| {
            let score = PairScore::new((*s)?, threshold);
            score.label.is_correct().then(|| AnswerEntry {
                score: Some(score),
                ..e.clone()
            })
        })
        .collect();
    RankedAnswerList {
        removed: list.removed + list.entries.len() - entries.len(),
        entries,
        ..list.clone()
    }
}

/// Scores every verbalized entry against the question and filters. An
/// entry with several answer texts takes its best score.
pub fn filter(list: &RankedAnswerList, scorer: &dyn Scorer, threshold: f64) -> Result<RankedAnswerList, ClassifierError> {
    let mut pairs: Vec<(&str, &str)> = Vec::new();
    let mut owner = Vec::new();
    for (i, e) in list.entries.iter().enumerate() {
        for a in &e.answers {
            pairs.push((list.question.as_str(), a.text.as_str()));
            owner.push(i);
        }
    }
    let mut scores: Vec<Option<f64>> = vec![None; list.entries.len()];
    if !pairs.is_empty() {
        let raw = scorer.score_batch(&pairs)?;
        if raw.len() != pairs.len() {
            return Err(ClassifierError::RemoteProtocolError(format!(
                "{} scores for {} pairs",
                raw.len(),
                pairs.len()
            )));
        }
        for (i, s) in owner.into_iter().zip(raw) {
            scores[i] = Some(scores[i].map_or(s, |prev: f64| prev.max(s)));
        }
    }
    Ok(filter_with_scores(list, &scores, threshold))
}

/// Scores 1 for answer texts that belong to a relevant entry and 0
/// otherwise. Bounds what any classifier can achieve; not a real model.
#[derive(Debug, Clone, Default)]
pub struct OracleScorer {
    relevant: HashSet<(String, String)>,
    known: HashMap<String, usize>,
}

impl OracleScorer {
    pub fn from_lists<'a>(lists: impl IntoIterator<Item = &'a RankedAnswerList>) -> Self {
        let mut o = Self::default();
        for l in lists {
            *o.known.entry(l.question.clone()).or_default() += 1;
            for e in l.entries.iter().filter(|e| e.judgment.relevant) {
                for a in &e.answers {
                    o.relevant.insert((l.question.clone(), a.text.clone()));
                }
            }
        }
        o
    }
}

impl Scorer for OracleScorer {
    fn score_batch(&self, pairs: &[(&str, &str)]) -> Result<Vec<f64>, ClassifierError> {
        Ok(pairs
            .iter()
            .map(|(q, a)| {
                if self.relevant.contains(&(q.to_string(), a.to_string())) {
                    1.0
                } else {
                    0.0
                }
            })
            .collect())
    }

    fn name(&self) -> String {
        "oracle".into()
    }
}
