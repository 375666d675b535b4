use std::collections::BTreeSet;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::{PipelineError, RankedAnswerList};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvaluationConfig {
    pub k_values: Vec<usize>,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        Self { k_values: vec![1, 5] }
    }
}

impl EvaluationConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.k_values.is_empty() || self.k_values.contains(&0) {
            return Err(PipelineError::InvalidConfig(format!(
                "k values must be non-empty and at least 1, got {:?}",
                self.k_values
            )));
        }
        Ok(())
    }

    /// Metric names in report order. P@1 and NDCG@1 coincide and share a
    /// row.
    pub fn metric_names(&self) -> Vec<String> {
        let ks: BTreeSet<usize> = self.k_values.iter().copied().collect();
        ks.into_iter()
            .flat_map(|k| {
                if k == 1 {
                    vec!["P@1 = NDCG@1".to_string()]
                } else {
                    vec![format!("P@{k}"), format!("NDCG@{k}")]
                }
            })
            .collect()
    }

    fn values(&self, list: &RankedAnswerList) -> Vec<f64> {
        let ks: BTreeSet<usize> = self.k_values.iter().copied().collect();
        ks.into_iter()
            .flat_map(|k| {
                if k == 1 {
                    vec![list.precision_at_k(1)]
                } else {
                    vec![list.precision_at_k(k), list.ndcg_at_k(k)]
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub metric: String,
    pub before: f64,
    pub after: f64,
    /// `(after - before) / before`; absent when `before` is 0.
    pub relative_change: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionRow {
    pub question_id: String,
    pub candidates_before: usize,
    pub candidates_after: usize,
    pub relevant_before: usize,
    pub metrics: Vec<MetricRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    pub approach: String,
    pub questions: usize,
    /// Questions for which the KGQA system returned no candidate. They
    /// count as zeros in every metric.
    pub zero_candidate_questions: usize,
    pub questions_with_relevant: usize,
    pub mean_removed: f64,
    pub metrics: Vec<MetricRow>,
    #[serde(skip)]
    pub per_question: Vec<QuestionRow>,
}

fn row(metric: &str, before: f64, after: f64) -> MetricRow {
    MetricRow {
        metric: metric.to_string(),
        before,
        after,
        relative_change: (before > 0.0).then(|| (after - before) / before),
    }
}

/// Macro-averages every metric over questions. Both sides must hold the
/// same questions; they are matched by question id.
pub fn compare(
    approach: &str,
    before: &[RankedAnswerList],
    after: &[RankedAnswerList],
    config: &EvaluationConfig,
) -> Result<QualityReport, PipelineError> {
    config.validate()?;
    let ids = |ls: &[RankedAnswerList]| -> Vec<String> {
        let mut v: Vec<String> = ls.iter().map(|l| l.question_id.clone()).collect();
        v.sort();
        v
    };
    let (bi, ai) = (ids(before), ids(after));
    if bi != ai {
        let b: BTreeSet<_> = bi.iter().collect();
        let a: BTreeSet<_> = ai.iter().collect();
        let diff: Vec<_> = b.symmetric_difference(&a).take(5).collect();
        return Err(PipelineError::MismatchedQuestions(if diff.is_empty() {
            "duplicate question ids".into()
        } else {
            format!("e.g. {diff:?}")
        }));
    }
    if bi.windows(2).any(|w| w[0] == w[1]) {
        return Err(PipelineError::MismatchedQuestions("duplicate question ids".into()));
    }

    let mut after_sorted: Vec<&RankedAnswerList> = after.iter().collect();
    after_sorted.sort_by(|x, y| x.question_id.cmp(&y.question_id));
    let mut before_sorted: Vec<&RankedAnswerList> = before.iter().collect();
    before_sorted.sort_by(|x, y| x.question_id.cmp(&y.question_id));

    let names = config.metric_names();
    let mut sum_before = vec![0.0; names.len()];
    let mut sum_after = vec![0.0; names.len()];
    let mut per_question = Vec::with_capacity(before.len());
    let mut removed = 0usize;
    for (b, a) in before_sorted.iter().zip(&after_sorted) {
        let vb = config.values(b);
        let va = config.values(a);
        for i in 0..names.len() {
            sum_before[i] += vb[i];
            sum_after[i] += va[i];
        }
        removed += b.entries.len().saturating_sub(a.entries.len());
        per_question.push(QuestionRow {
            question_id: b.question_id.clone(),
            candidates_before: b.entries.len(),
            candidates_after: a.entries.len(),
            relevant_before: b.original_relevant,
            metrics: names
                .iter()
                .zip(vb.iter().zip(&va))
                .map(|(n, (x, y))| row(n, *x, *y))
                .collect(),
        });
    }
    let n = before.len().max(1) as f64;
    Ok(QualityReport {
        approach: approach.to_string(),
        questions: before.len(),
        zero_candidate_questions: before.iter().filter(|l| l.original_len == 0).count(),
        questions_with_relevant: before.iter().filter(|l| l.original_relevant > 0).count(),
        mean_removed: removed as f64 / n,
        metrics: names
            .iter()
            .enumerate()
            .map(|(i, m)| row(m, sum_before[i] / n, sum_after[i] / n))
            .collect(),
        per_question,
    })
}

impl QualityReport {
    pub fn metric(&self, name: &str) -> Option<&MetricRow> {
        self.metrics.iter().find(|m| m.metric == name)
    }

    /// One JSON object per question.
    pub fn per_question_jsonl(&self) -> String {
        let mut out = String::new();
        for q in &self.per_question {
            out.push_str(&serde_json::to_string(q).expect("row serializes"));
            out.push('\n');
        }
        out
    }
}

fn fmt_change(c: Option<f64>) -> String {
    c.map_or_else(|| "n/a".to_string(), |c| format!("{:+.1}%", c * 100.0))
}

/// One row per approach; for each metric a Before AV and an After AV
/// column.
pub fn render_markdown(reports: &[QualityReport]) -> String {
    let Some(first) = reports.first() else {
        return String::new();
    };
    let names: Vec<&str> = first.metrics.iter().map(|m| m.metric.as_str()).collect();
    let mut out = String::from("| Approach |");
    for n in &names {
        let _ = write!(out, " {n} Before AV | {n} After AV | {n} change |");
    }
    out.push_str("\n|---|");
    out.push_str(&"---:|".repeat(names.len() * 3));
    out.push('\n');
    for r in reports {
        let _ = write!(out, "| {} |", r.approach);
        for n in &names {
            match r.metric(n) {
                Some(m) => {
                    let _ = write!(out, " {:.4} | {:.4} | {} |", m.before, m.after, fmt_change(m.relative_change));
                }
                None => out.push_str(" | | |"),
            }
        }
        out.push('\n');
    }
    out
}

pub fn render_csv(reports: &[QualityReport]) -> String {
    let mut out = String::from("approach,metric,before_av,after_av,relative_change,questions,mean_removed\n");
    for r in reports {
        for m in &r.metrics {
            let _ = writeln!(
                out,
                "{},{},{:.6},{:.6},{},{},{:.3}",
                r.approach,
                m.metric,
                m.before,
                m.after,
                m.relative_change.map_or(String::new(), |c| format!("{c:.6}")),
                r.questions,
                r.mean_removed
            );
        }
    }
    out
}
