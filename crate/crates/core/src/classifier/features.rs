//! Hashed n-gram features for (question, answer) pairs.

use std::hash::Hasher;

use fnv::FnvHasher;

pub const DEFAULT_DIMENSION: usize = 1 << 18;

/// Sparse vector with sorted, unique indices.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseVector {
    pub indices: Vec<u32>,
    pub values: Vec<f64>,
}

impl SparseVector {
    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn dot(&self, dense: &[f64]) -> f64 {
        self.indices
            .iter()
            .zip(&self.values)
            .map(|(&i, &v)| dense[i as usize] * v)
            .sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices.iter().zip(&self.values).map(|(&i, &v)| (i as usize, v))
    }
}

fn tokens(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

fn char_trigrams(text: &str) -> Vec<String> {
    let norm: Vec<char> = format!(" {} ", text.to_lowercase().split_whitespace().collect::<Vec<_>>().join(" "))
        .chars()
        .collect();
    norm.windows(3).map(|w| w.iter().collect()).collect()
}

/// Feature hashing with FNV-1a: the low bits pick the bucket, the top bit
/// the sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Featurizer {
    dimension: usize,
}

impl Default for Featurizer {
    fn default() -> Self {
        Self {
            dimension: DEFAULT_DIMENSION,
        }
    }
}

impl Featurizer {
    /// `dimension` must be a power of two.
    pub fn new(dimension: usize) -> Option<Self> {
        (dimension.is_power_of_two() && dimension <= u32::MAX as usize).then_some(Self { dimension })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    fn add(&self, acc: &mut Vec<(u32, f64)>, feature: &str) {
        let mut h = FnvHasher::default();
        h.write(feature.as_bytes());
        let h = h.finish();
        let idx = (h & (self.dimension as u64 - 1)) as u32;
        let sign = if h >> 63 == 1 { -1.0 } else { 1.0 };
        acc.push((idx, sign));
    }

    fn add_text(&self, acc: &mut Vec<(u32, f64)>, tag: &str, text: &str, toks: &[String]) {
        for t in toks {
            self.add(acc, &format!("{tag}:w:{t}"));
        }
        for w in toks.windows(2) {
            self.add(acc, &format!("{tag}:b:{} {}", w[0], w[1]));
        }
        for g in char_trigrams(text) {
            self.add(acc, &format!("{tag}:c:{g}"));
        }
    }

    /// Word unigrams, word bigrams and character trigrams of the question
    /// (`q:`) and the answer (`a:`), plus question-word x answer-word
    /// crosses (`qa:`), all lowercased. The result is L2-normalized.
    pub fn featurize(&self, question: &str, answer: &str) -> SparseVector {
        let qt = tokens(question);
        let at = tokens(answer);
        let mut acc = Vec::with_capacity(4 * (qt.len() + at.len()) + qt.len() * at.len());
        self.add_text(&mut acc, "q", question, &qt);
        self.add_text(&mut acc, "a", answer, &at);
        for q in &qt {
            for a in &at {
                self.add(&mut acc, &format!("qa:{q}|{a}"));
            }
        }
        acc.sort_by_key(|&(i, _)| i);
        let mut out = SparseVector::default();
        for (i, v) in acc {
            if out.indices.last() == Some(&i) {
                *out.values.last_mut().expect("parallel vectors") += v;
            } else {
                out.indices.push(i);
                out.values.push(v);
            }
        }
        // drop buckets whose signed contributions cancelled out
        let (indices, values): (Vec<u32>, Vec<f64>) = out
            .indices
            .into_iter()
            .zip(out.values)
            .filter(|&(_, v)| v != 0.0)
            .unzip();
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        let values = if norm > 0.0 {
            values.into_iter().map(|v| v / norm).collect()
        } else {
            values
        };
        SparseVector { indices, values }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nonempty_for_single_chars() {
        assert!(Featurizer::default().featurize("a", "b").nnz() >= 1);
    }

    #[test]
    fn deterministic() {
        let f = Featurizer::default();
        assert_eq!(
            f.featurize("Where was he born?", "He was born in Lyon."),
            f.featurize("Where was he born?", "He was born in Lyon.")
        );
    }

    #[test]
    fn order_matters() {
        let f = Featurizer::default();
        let xy = f.featurize("x", "y");
        let yx = f.featurize("y", "x");
        assert_ne!(xy.indices, yx.indices);
    }

    #[test]
    fn case_insensitive_and_normalized() {
        let f = Featurizer::default();
        let v = f.featurize("Who IS it", "It Is Me");
        assert_eq!(v, f.featurize("who is it", "it is me"));
        let norm: f64 = v.values.iter().map(|x| x * x).sum();
        assert!((norm - 1.0).abs() < 1e-12);
        assert!(v.indices.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn dimension_must_be_power_of_two() {
        assert!(Featurizer::new(1000).is_none());
        let f = Featurizer::new(16).unwrap();
        assert!(f.featurize("abc def", "ghi").indices.iter().all(|&i| i < 16));
    }
}
