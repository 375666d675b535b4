//! Precision, recall and F1 with "correct" as the positive class, and the
//! repeated-seed harness.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::baseline::{train, TrainConfig};
use super::{ClassifierError, Scorer};
use crate::dataset::{negative_sample, split, LabeledQaPair, SamplingConfig, VanillaRecord};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
}

impl Confusion {
    pub fn add(&mut self, predicted_correct: bool, actually_correct: bool) {
        match (predicted_correct, actually_correct) {
            (true, true) => self.tp += 1,
            (true, false) => self.fp += 1,
            (false, true) => self.fn_ += 1,
            (false, false) => self.tn += 1,
        }
    }

    pub fn metrics(&self) -> Metrics {
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let precision = ratio(self.tp, self.tp + self.fp);
        let recall = ratio(self.tp, self.tp + self.fn_);
        Metrics {
            precision,
            recall,
            f1: f1(precision, recall),
            confusion: *self,
        }
    }
}

fn f1(p: f64, r: f64) -> f64 {
    if p + r > 0.0 {
        2.0 * p * r / (p + r)
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    #[serde(default)]
    pub confusion: Confusion,
}

impl Metrics {
    /// Metrics given directly, without a confusion matrix behind them.
    pub fn from_values(precision: f64, recall: f64, f1: f64) -> Self {
        Self {
            precision,
            recall,
            f1,
            confusion: Confusion::default(),
        }
    }
}

/// Scores every pair and compares the thresholded label against the gold one.
pub fn evaluate(
    scorer: &dyn Scorer,
    pairs: &[LabeledQaPair],
    threshold: f64,
) -> Result<Metrics, ClassifierError> {
    let scores = score_pairs(scorer, pairs)?;
    let mut c = Confusion::default();
    for (p, s) in pairs.iter().zip(&scores) {
        c.add(*s >= threshold, p.label.is_correct());
    }
    Ok(c.metrics())
}

pub fn score_pairs(scorer: &dyn Scorer, pairs: &[LabeledQaPair]) -> Result<Vec<f64>, ClassifierError> {
    let refs: Vec<(&str, &str)> = pairs
        .iter()
        .map(|p| (p.question.as_str(), p.answer.as_str()))
        .collect();
    let scores = scorer.score_batch(&refs)?;
    if scores.len() != pairs.len() {
        return Err(ClassifierError::RemoteProtocolError(format!(
            "scorer returned {} scores for {} pairs",
            scores.len(),
            pairs.len()
        )));
    }
    Ok(scores)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrPoint {
    pub threshold: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Precision and recall at each threshold, for a threshold sweep.
pub fn pr_table(scores: &[f64], gold_correct: &[bool], thresholds: &[f64]) -> Vec<PrPoint> {
    thresholds
        .iter()
        .map(|&t| {
            let mut c = Confusion::default();
            for (s, g) in scores.iter().zip(gold_correct) {
                c.add(*s >= t, *g);
            }
            let m = c.metrics();
            PrPoint {
                threshold: t,
                precision: m.precision,
                recall: m.recall,
                f1: m.f1,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
}

impl MetricSummary {
    pub fn of(values: &[f64]) -> Self {
        let Some(&first) = values.first() else {
            return Self::default();
        };
        if values.iter().all(|v| *v == first) {
            // exact, without the rounding error of summing and dividing
            return Self { mean: first, std: 0.0 };
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Self { mean, std: var.sqrt() }
    }
}

impl fmt::Display for MetricSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.4} ± {:.4}", self.mean, self.std)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub seed: u64,
    pub metrics: Metrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub runs: Vec<RunMetrics>,
    pub precision: MetricSummary,
    pub recall: MetricSummary,
    pub f1: MetricSummary,
}

impl ClassificationReport {
    pub fn from_runs(runs: Vec<RunMetrics>) -> Self {
        let col = |f: fn(&Metrics) -> f64| runs.iter().map(|r| f(&r.metrics)).collect::<Vec<_>>();
        Self {
            precision: MetricSummary::of(&col(|m| m.precision)),
            recall: MetricSummary::of(&col(|m| m.recall)),
            f1: MetricSummary::of(&col(|m| m.f1)),
            runs,
        }
    }

    pub fn single(seed: u64, metrics: Metrics) -> Self {
        Self::from_runs(vec![RunMetrics { seed, metrics }])
    }
}

impl fmt::Display for ClassificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "P {}  R {}  F1 {}  ({} runs)",
            self.precision,
            self.recall,
            self.f1,
            self.runs.len()
        )
    }
}

/// Runs `run(base_seed + i)` for `i in 0..n_runs`, in parallel, and
/// aggregates. Runs are reported in seed order.
pub fn repeated_eval<F>(n_runs: usize, base_seed: u64, run: F) -> Result<ClassificationReport, ClassifierError>
where
    F: Fn(u64) -> Result<Metrics, ClassifierError> + Sync,
{
    if n_runs < 2 {
        return Err(ClassifierError::InvalidConfig(format!(
            "repeated evaluation needs at least 2 runs, got {n_runs}"
        )));
    }
    let runs = (0..n_runs as u64)
        .into_par_iter()
        .map(|i| {
            let seed = base_seed.wrapping_add(i);
            run(seed).map(|metrics| RunMetrics { seed, metrics })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ClassificationReport::from_runs(runs))
}

/// sample -> split -> train -> evaluate for the built-in baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineExperiment {
    pub sampling: SamplingConfig,
    pub training: TrainConfig,
}

impl BaselineExperiment {
    /// One run; `seed` replaces the sampling seed and seeds training.
    pub fn run(&self, records: &[VanillaRecord], seed: u64) -> Result<Metrics, ClassifierError> {
        let sampling = SamplingConfig {
            seed,
            ..self.sampling.clone()
        };
        let pairs = negative_sample(records, &sampling)?;
        let (train_set, test_set) = split(&pairs, &sampling);
        let model = train(&train_set, &self.training, seed)?;
        evaluate(&model, &test_set, self.training.threshold)
    }

    pub fn repeated(
        &self,
        records: &[VanillaRecord],
        n_runs: usize,
        base_seed: u64,
    ) -> Result<ClassificationReport, ClassifierError> {
        repeated_eval(n_runs, base_seed, |seed| self.run(records, seed))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::ConstantScorer;
    use crate::dataset::PairLabel;

    fn pairs(labels: &[bool]) -> Vec<LabeledQaPair> {
        labels
            .iter()
            .enumerate()
            .map(|(i, &c)| LabeledQaPair {
                question: format!("q{i}"),
                answer: format!("a{i}"),
                label: if c { PairLabel::Correct } else { PairLabel::Incorrect },
                source_question_id: i.to_string(),
                source_answer_id: i.to_string(),
            })
            .collect()
    }

    struct Gold(Vec<LabeledQaPair>);

    impl Scorer for Gold {
        fn score_batch(&self, ps: &[(&str, &str)]) -> Result<Vec<f64>, ClassifierError> {
            Ok(ps
                .iter()
                .map(|(q, _)| {
                    let p = self.0.iter().find(|p| p.question == *q).unwrap();
                    if p.label.is_correct() { 1.0 } else { 0.0 }
                })
                .collect())
        }
        fn name(&self) -> String {
            "gold".into()
        }
    }

    #[test]
    fn perfect_scorer() {
        let ps = pairs(&[true, false, true, false, false]);
        let m = evaluate(&Gold(ps.clone()), &ps, 0.5).unwrap();
        assert_eq!((m.precision, m.recall, m.f1), (1.0, 1.0, 1.0));
    }

    #[test]
    fn everything_correct_on_balanced_ten() {
        let labels: Vec<bool> = (0..10).map(|i| i % 2 == 0).collect();
        let ps = pairs(&labels);
        let m = evaluate(&ConstantScorer(1.0), &ps, 0.5).unwrap();
        // oracle: tp=5 fp=5 fn=0
        let (tp, fp, fn_) = (5.0, 5.0, 0.0);
        let p: f64 = tp / (tp + fp);
        let r: f64 = tp / (tp + fn_);
        assert_eq!(m.precision, p);
        assert_eq!(m.recall, r);
        assert!((m.f1 - 2.0 * p * r / (p + r)).abs() < 1e-12);
        assert!((m.f1 - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn zero_denominators() {
        let ps = pairs(&[false, false]);
        let m = evaluate(&ConstantScorer(0.0), &ps, 0.5).unwrap();
        assert_eq!((m.precision, m.recall, m.f1), (0.0, 0.0, 0.0));
    }

    #[test]
    fn permutation_invariant() {
        let ps = pairs(&[true, false, true, true, false, false, true]);
        struct ByIndex;
        impl Scorer for ByIndex {
            fn score_batch(&self, ps: &[(&str, &str)]) -> Result<Vec<f64>, ClassifierError> {
                Ok(ps.iter().map(|(q, _)| if q.len() % 2 == 0 { 0.9 } else { 0.1 }).collect())
            }
            fn name(&self) -> String {
                "idx".into()
            }
        }
        let a = evaluate(&ByIndex, &ps, 0.5).unwrap();
        let mut rev = ps.clone();
        rev.reverse();
        assert_eq!(evaluate(&ByIndex, &rev, 0.5).unwrap(), a);
    }

    #[test]
    fn harness_arithmetic() {
        let constant = repeated_eval(5, 0, |_| Ok(Metrics::from_values(0.8, 0.7, 0.75))).unwrap();
        assert_eq!(constant.f1.std, 0.0);
        assert_eq!(constant.precision.std, 0.0);
        let thirds = MetricSummary::of(&[2.0 / 3.0; 10]);
        assert_eq!((thirds.mean, thirds.std), (2.0 / 3.0, 0.0));
        let two = repeated_eval(2, 10, |s| {
            let v = if s == 10 { 0.9 } else { 1.0 };
            Ok(Metrics::from_values(v, v, v))
        })
        .unwrap();
        assert!((two.f1.mean - 0.95).abs() < 1e-12);
        assert!((two.f1.std - 0.05).abs() < 1e-12);
        assert_eq!(two.runs.iter().map(|r| r.seed).collect::<Vec<_>>(), vec![10, 11]);
        assert!(repeated_eval(1, 0, |_| Ok(Metrics::default())).is_err());
    }

    #[test]
    fn pr_sweep() {
        let table = pr_table(&[0.9, 0.6, 0.4, 0.1], &[true, false, true, false], &[0.0, 0.5, 1.0]);
        assert_eq!(table[0].recall, 1.0);
        assert_eq!(table[0].precision, 0.5);
        assert_eq!(table[1].precision, 0.5);
        assert_eq!(table[1].recall, 0.5);
        assert_eq!(table[2].recall, 0.0);
    }

    #[test]
    fn summary_display() {
        let s = MetricSummary { mean: 0.9968, std: 0.0089 };
        assert_eq!(s.to_string(), "0.9968 ± 0.0089");
    }
}
