//! Pair classification: scoring (question, answer-text) pairs as correct or
//! incorrect.

mod baseline;
mod features;
mod metrics;
mod remote;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use baseline::{train, BaselineModel, TrainConfig, TrainingMeta};
pub use features::{Featurizer, SparseVector, DEFAULT_DIMENSION};
pub use metrics::{score_pairs, 
    evaluate, pr_table, repeated_eval, BaselineExperiment, ClassificationReport, Confusion,
    Metrics, MetricSummary, PrPoint, RunMetrics,
};
pub use remote::{ClassifyRequest, ClassifyResponse, QaText, RemoteClassifier, MAX_BATCH};

use crate::dataset::{DatasetError, PairLabel};

pub const DEFAULT_THRESHOLD: f64 = 0.5;

#[derive(Debug, Error)]
pub enum ClassifierError {
    #[error("degenerate training data: {0}")]
    DegenerateData(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid model file: {0}")]
    InvalidModel(String),
    #[error("remote classifier unavailable: {0}")]
    RemoteUnavailable(String),
    #[error("remote classifier protocol error: {0}")]
    RemoteProtocolError(String),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Anything that turns (question, answer) pairs into probabilities of
/// "correct".
pub trait Scorer: Send + Sync {
    fn score_batch(&self, pairs: &[(&str, &str)]) -> Result<Vec<f64>, ClassifierError>;

    fn name(&self) -> String;

    fn score(&self, question: &str, answer: &str) -> Result<f64, ClassifierError> {
        let mut s = self.score_batch(&[(question, answer)])?;
        s.pop()
            .ok_or_else(|| ClassifierError::RemoteProtocolError("empty score list".into()))
    }
}

impl<T: Scorer + ?Sized> Scorer for &T {
    fn score_batch(&self, pairs: &[(&str, &str)]) -> Result<Vec<f64>, ClassifierError> {
        (**self).score_batch(pairs)
    }

    fn name(&self) -> String {
        (**self).name()
    }
}

impl<T: Scorer + ?Sized> Scorer for Box<T> {
    fn score_batch(&self, pairs: &[(&str, &str)]) -> Result<Vec<f64>, ClassifierError> {
        (**self).score_batch(pairs)
    }

    fn name(&self) -> String {
        (**self).name()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairScore {
    pub score: f64,
    pub label: PairLabel,
}

impl PairScore {
    pub fn new(score: f64, threshold: f64) -> Self {
        let label = if score >= threshold {
            PairLabel::Correct
        } else {
            PairLabel::Incorrect
        };
        Self { score, label }
    }
}

pub fn predict(
    scorer: &dyn Scorer,
    question: &str,
    answer: &str,
    threshold: f64,
) -> Result<PairScore, ClassifierError> {
    Ok(PairScore::new(scorer.score(question, answer)?, threshold))
}

/// Returns the same score for every pair.
#[derive(Debug, Clone, Copy)]
pub struct ConstantScorer(pub f64);

impl Scorer for ConstantScorer {
    fn score_batch(&self, pairs: &[(&str, &str)]) -> Result<Vec<f64>, ClassifierError> {
        Ok(vec![self.0; pairs.len()])
    }

    fn name(&self) -> String {
        format!("constant({})", self.0)
    }
}
