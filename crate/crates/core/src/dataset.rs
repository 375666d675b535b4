//! VANiLLa-shaped records and labeled question/answer pairs.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize};
use serde_json::Value;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("format error: {0}")]
    Format(String),
    #[error("need at least two records with distinct question ids, got {0}")]
    InsufficientRecords(usize),
    #[error("invalid sampling config: {0}")]
    InvalidConfig(String),
}

fn string_or_number<'de, D: Deserializer<'de>>(d: D) -> Result<String, D::Error> {
    match Value::deserialize(d)? {
        Value::String(s) => Ok(s),
        Value::Number(n) => Ok(n.to_string()),
        other => Err(serde::de::Error::custom(format!(
            "expected string or number, got {other}"
        ))),
    }
}

/// One VANiLLa instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VanillaRecord {
    #[serde(deserialize_with = "string_or_number")]
    pub question_id: String,
    pub question: String,
    #[serde(deserialize_with = "string_or_number")]
    pub answer: String,
    pub answer_sentence: String,
    pub question_entity_label: String,
    pub question_relation: String,
}

impl VanillaRecord {
    fn validate(&self) -> Result<(), &'static str> {
        if self.question.trim().is_empty() {
            return Err("empty question");
        }
        if self.answer_sentence.trim().is_empty() {
            return Err("empty answer_sentence");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default)]
pub struct LoadReport {
    pub records: Vec<VanillaRecord>,
    pub skipped: usize,
    pub warnings: Vec<String>,
}

/// Parses a JSON array or JSON-lines document of records. Records that fail
/// validation are skipped with a warning.
pub fn parse_vanilla(text: &str) -> Result<LoadReport, DatasetError> {
    let trimmed = text.trim_start();
    let values: Vec<(usize, Value)> = if trimmed.starts_with('[') {
        match serde_json::from_str::<Value>(text) {
            Ok(Value::Array(items)) => items.into_iter().enumerate().map(|(i, v)| (i + 1, v)).collect(),
            Ok(_) => return Err(DatasetError::Format("top-level value is not an array".into())),
            Err(e) => return Err(DatasetError::Format(e.to_string())),
        }
    } else {
        let mut out = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            match serde_json::from_str::<Value>(line) {
                Ok(v @ Value::Object(_)) => out.push((i + 1, v)),
                Ok(_) => {
                    return Err(DatasetError::Format(format!(
                        "line {}: expected a JSON object",
                        i + 1
                    )))
                }
                Err(e) => return Err(DatasetError::Format(format!("line {}: {e}", i + 1))),
            }
        }
        out
    };

    let mut report = LoadReport::default();
    for (n, value) in values {
        let parsed = serde_json::from_value::<VanillaRecord>(value)
            .map_err(|e| e.to_string())
            .and_then(|r| r.validate().map(|_| r).map_err(str::to_string));
        match parsed {
            Ok(r) => report.records.push(r),
            Err(e) => {
                let w = format!("record {n}: {e}");
                log::warn!("{w}");
                report.warnings.push(w);
                report.skipped += 1;
            }
        }
    }
    if report.records.is_empty() && report.skipped == 0 {
        log::warn!("no records");
        report.warnings.push("no records".into());
    }
    Ok(report)
}

pub fn load_vanilla(path: &Path) -> Result<LoadReport, DatasetError> {
    let text = std::fs::read_to_string(path)?;
    let report = parse_vanilla(&text)?;
    log::info!(
        "loaded {} records from {} ({} skipped)",
        report.records.len(),
        path.display(),
        report.skipped
    );
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairLabel {
    Correct,
    Incorrect,
}

impl PairLabel {
    pub fn is_correct(self) -> bool {
        self == PairLabel::Correct
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledQaPair {
    pub question: String,
    pub answer: String,
    pub label: PairLabel,
    pub source_question_id: String,
    pub source_answer_id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingConfig {
    /// 1 for a balanced set, 50 for the unbalanced setting.
    pub negatives_per_positive: usize,
    pub seed: u64,
    /// Fraction of pairs assigned to the training split.
    pub split_ratio: f64,
    /// Keep every question's pairs on one side of the split.
    #[serde(default)]
    pub group_by_question: bool,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self {
            negatives_per_positive: 1,
            seed: 0,
            split_ratio: 0.67,
            group_by_question: false,
        }
    }
}

impl SamplingConfig {
    pub fn validate(&self) -> Result<(), DatasetError> {
        if self.negatives_per_positive < 1 {
            return Err(DatasetError::InvalidConfig(
                "negatives per positive must be at least 1".into(),
            ));
        }
        if !(self.split_ratio > 0.0 && self.split_ratio < 1.0) {
            return Err(DatasetError::InvalidConfig(format!(
                "split ratio {} outside (0, 1)",
                self.split_ratio
            )));
        }
        Ok(())
    }
}

// Independent streams for sampling and splitting under one user seed.
fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// One correct pair per record plus `negatives_per_positive` incorrect
/// pairs, each answered by a uniformly drawn record with a different
/// question id. The output is shuffled with the seed.
pub fn negative_sample(
    records: &[VanillaRecord],
    cfg: &SamplingConfig,
) -> Result<Vec<LabeledQaPair>, DatasetError> {
    cfg.validate()?;
    let first = records.first().map(|r| &r.question_id);
    if records.len() < 2 || records.iter().all(|r| Some(&r.question_id) == first) {
        return Err(DatasetError::InsufficientRecords(records.len()));
    }
    let mut rng = rng_for(cfg.seed, 1);
    let mut pairs = Vec::with_capacity(records.len() * (1 + cfg.negatives_per_positive));
    for r in records {
        pairs.push(LabeledQaPair {
            question: r.question.clone(),
            answer: r.answer_sentence.clone(),
            label: PairLabel::Correct,
            source_question_id: r.question_id.clone(),
            source_answer_id: r.question_id.clone(),
        });
        for _ in 0..cfg.negatives_per_positive {
            let other = loop {
                let j = rng.random_range(0..records.len());
                if records[j].question_id != r.question_id {
                    break &records[j];
                }
            };
            pairs.push(LabeledQaPair {
                question: r.question.clone(),
                answer: other.answer_sentence.clone(),
                label: PairLabel::Incorrect,
                source_question_id: r.question_id.clone(),
                source_answer_id: other.question_id.clone(),
            });
        }
    }
    pairs.shuffle(&mut rng);
    Ok(pairs)
}

/// Random train/test split with `round(ratio * n)` training pairs.
///
/// With `group_by_question`, whole questions are assigned to one side and the
/// training half is filled until it reaches the target size, so its size can
/// overshoot by up to one question's pairs.
pub fn split<T: Clone + AsQuestion>(items: &[T], cfg: &SamplingConfig) -> (Vec<T>, Vec<T>) {
    let target = (cfg.split_ratio * items.len() as f64).round() as usize;
    let target = if items.len() == 1 { 1 } else { target.min(items.len()) };
    let mut rng = rng_for(cfg.seed, 2);
    if !cfg.group_by_question {
        let mut idx: Vec<usize> = (0..items.len()).collect();
        idx.shuffle(&mut rng);
        let (train, test) = idx.split_at(target);
        return (
            train.iter().map(|&i| items[i].clone()).collect(),
            test.iter().map(|&i| items[i].clone()).collect(),
        );
    }
    let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, item) in items.iter().enumerate() {
        groups.entry(item.question()).or_default().push(i);
    }
    let mut groups: Vec<Vec<usize>> = groups.into_values().collect();
    groups.shuffle(&mut rng);
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for g in groups {
        let side = if train.len() < target { &mut train } else { &mut test };
        side.extend(g.into_iter().map(|i| items[i].clone()));
    }
    (train, test)
}

pub trait AsQuestion {
    fn question(&self) -> &str;
}

impl AsQuestion for LabeledQaPair {
    fn question(&self) -> &str {
        &self.question
    }
}

impl AsQuestion for VanillaRecord {
    fn question(&self) -> &str {
        &self.question
    }
}

/// Writes one JSON object per line.
pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> std::io::Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    for item in items {
        serde_json::to_writer(&mut w, item)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

pub fn read_pairs_jsonl(path: &Path) -> Result<Vec<LabeledQaPair>, DatasetError> {
    let text = std::fs::read_to_string(path)?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l)
                .map_err(|e| DatasetError::Format(format!("{}:{}: {e}", path.display(), i + 1)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn records(n: usize) -> Vec<VanillaRecord> {
        (0..n)
            .map(|i| VanillaRecord {
                question_id: i.to_string(),
                question: format!("question {i}?"),
                answer: format!("answer {i}"),
                answer_sentence: format!("The answer is {i}."),
                question_entity_label: format!("entity {i}"),
                question_relation: "relation".into(),
            })
            .collect()
    }

    fn cfg(ratio: usize, seed: u64) -> SamplingConfig {
        SamplingConfig {
            negatives_per_positive: ratio,
            seed,
            ..Default::default()
        }
    }

    #[test]
    fn loads_array_and_lines() {
        let line = r#"{"question_id": 7, "question": "Who?", "answer": "X", "answer_sentence": "It is X.", "question_entity_label": "Y", "question_relation": "P1"}"#;
        let a = parse_vanilla(&format!("[{line}, {line}]")).unwrap();
        let l = parse_vanilla(&format!("{line}\n\n{line}\n")).unwrap();
        assert_eq!(a.records.len(), 2);
        assert_eq!(a.records, l.records);
        assert_eq!(a.records[0].question_id, "7");
    }

    #[test]
    fn record_missing_answer_is_skipped() {
        let r = parse_vanilla(r#"[{"question_id": "1", "question": "Who?", "answer_sentence": "It is X.", "question_entity_label": "Y", "question_relation": "P1"}]"#).unwrap();
        assert!(r.records.is_empty());
        assert_eq!(r.skipped, 1);
        assert_eq!(r.warnings.len(), 1);
    }

    #[test]
    fn empty_array_warns() {
        let r = parse_vanilla("[]").unwrap();
        assert!(r.records.is_empty());
        assert_eq!(r.warnings, vec!["no records"]);
    }

    #[test]
    fn bad_top_level_is_format_error() {
        assert!(matches!(parse_vanilla("{\"a\": 1}\n[1]"), Err(DatasetError::Format(_))));
        assert!(matches!(parse_vanilla("42"), Err(DatasetError::Format(_))));
    }

    #[test]
    fn two_records_always_cross() {
        for seed in 0..50 {
            let pairs = negative_sample(&records(2), &cfg(1, seed)).unwrap();
            assert_eq!(pairs.len(), 4);
            for p in pairs.iter().filter(|p| p.label == PairLabel::Incorrect) {
                assert_ne!(p.source_question_id, p.source_answer_id);
            }
        }
    }

    #[test]
    fn label_histogram_for_ratio_50() {
        let pairs = negative_sample(&records(100), &cfg(50, 3)).unwrap();
        let correct = pairs.iter().filter(|p| p.label.is_correct()).count();
        assert_eq!(correct, 100);
        assert_eq!(pairs.len() - correct, 5000);
    }

    #[test]
    fn label_matches_source_ids() {
        let pairs = negative_sample(&records(30), &cfg(3, 9)).unwrap();
        for p in &pairs {
            assert_eq!(p.label.is_correct(), p.source_question_id == p.source_answer_id);
        }
    }

    #[test]
    fn insufficient_records() {
        assert!(matches!(
            negative_sample(&records(1), &cfg(1, 0)),
            Err(DatasetError::InsufficientRecords(1))
        ));
        let mut dup = records(3);
        for r in &mut dup {
            r.question_id = "same".into();
        }
        assert!(negative_sample(&dup, &cfg(1, 0)).is_err());
    }

    #[test]
    fn deterministic_given_seed() {
        let a = negative_sample(&records(20), &cfg(2, 42)).unwrap();
        let b = negative_sample(&records(20), &cfg(2, 42)).unwrap();
        let c = negative_sample(&records(20), &cfg(2, 43)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn split_sizes() {
        let pairs = negative_sample(&records(50), &cfg(1, 1)).unwrap();
        let (train, test) = split(&pairs, &cfg(1, 1));
        assert_eq!((train.len(), test.len()), (67, 33));
        let one = &pairs[..1];
        let (train, test) = split(one, &cfg(1, 1));
        assert_eq!((train.len(), test.len()), (1, 0));
        assert_eq!(split(&pairs, &cfg(1, 5)), split(&pairs, &cfg(1, 5)));
    }

    #[test]
    fn split_is_disjoint_cover() {
        let items: Vec<LabeledQaPair> = negative_sample(&records(40), &cfg(2, 8)).unwrap();
        let (train, test) = split(&items, &cfg(2, 8));
        let mut all: Vec<String> = train
            .iter()
            .chain(&test)
            .map(|p| serde_json::to_string(p).unwrap())
            .collect();
        let mut orig: Vec<String> = items.iter().map(|p| serde_json::to_string(p).unwrap()).collect();
        all.sort();
        orig.sort();
        assert_eq!(all, orig);
    }

    #[test]
    fn grouped_split_has_no_leakage() {
        let pairs = negative_sample(&records(60), &cfg(3, 2)).unwrap();
        let c = SamplingConfig {
            group_by_question: true,
            ..cfg(3, 2)
        };
        let (train, test) = split(&pairs, &c);
        assert_eq!(train.len() + test.len(), pairs.len());
        let train_q: std::collections::HashSet<_> = train.iter().map(|p| &p.question).collect();
        assert!(test.iter().all(|p| !train_q.contains(&p.question)));
        let target = (0.67 * pairs.len() as f64).round() as usize;
        assert!(train.len() >= target && train.len() < target + 4);
    }

    #[test]
    fn invalid_split_ratio() {
        let c = SamplingConfig {
            split_ratio: 1.0,
            ..Default::default()
        };
        assert!(negative_sample(&records(3), &c).is_err());
    }

    proptest::proptest! {
        #[test]
        fn never_self_pairs(n in 2usize..40, ratio in 1usize..6, seed in proptest::num::u64::ANY) {
            let pairs = negative_sample(&records(n), &cfg(ratio, seed)).unwrap();
            proptest::prop_assert_eq!(pairs.len(), n * (1 + ratio));
            proptest::prop_assert_eq!(pairs.iter().filter(|p| p.label.is_correct()).count(), n);
            for p in &pairs {
                proptest::prop_assert_eq!(p.label.is_correct(), p.source_question_id == p.source_answer_id);
            }
        }
    }
}
