//! Logistic regression over hashed n-grams, trained with plain SGD.

use std::io::{Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::features::{Featurizer, SparseVector, DEFAULT_DIMENSION};
use super::{ClassifierError, Scorer};
use crate::dataset::LabeledQaPair;

const MAGIC: &[u8; 8] = b"KGAVMDL\0";
const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub dimension: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub l2: f64,
    pub threshold: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            dimension: DEFAULT_DIMENSION,
            epochs: 5,
            learning_rate: 1.0,
            l2: 1e-6,
            threshold: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub seed: u64,
    pub epochs: usize,
    pub learning_rate: f64,
    pub l2: f64,
    pub examples: usize,
    /// Mean logistic loss per epoch.
    pub epoch_losses: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Header {
    format_version: u32,
    dimension: usize,
    threshold: f64,
    bias: f64,
    meta: TrainingMeta,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineModel {
    featurizer: Featurizer,
    weights: Vec<f64>,
    bias: f64,
    threshold: f64,
    meta: TrainingMeta,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn log_loss(p: f64, y: f64) -> f64 {
    let p = p.clamp(1e-15, 1.0 - 1e-15);
    -(y * p.ln() + (1.0 - y) * (1.0 - p).ln())
}

impl BaselineModel {
    /// All-zero weights: scores 0.5 for every pair.
    pub fn zero(dimension: usize, threshold: f64) -> Option<Self> {
        Some(Self {
            featurizer: Featurizer::new(dimension)?,
            weights: vec![0.0; dimension],
            bias: 0.0,
            threshold,
            meta: TrainingMeta {
                seed: 0,
                epochs: 0,
                learning_rate: 0.0,
                l2: 0.0,
                examples: 0,
                epoch_losses: vec![],
            },
        })
    }

    pub fn dimension(&self) -> usize {
        self.weights.len()
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn set_threshold(&mut self, threshold: f64) {
        self.threshold = threshold;
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn meta(&self) -> &TrainingMeta {
        &self.meta
    }

    pub fn score_vector(&self, x: &SparseVector) -> f64 {
        sigmoid(x.dot(&self.weights) + self.bias)
    }

    pub fn score_pair(&self, question: &str, answer: &str) -> f64 {
        self.score_vector(&self.featurizer.featurize(question, answer))
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<(), ClassifierError> {
        let header = Header {
            format_version: FORMAT_VERSION,
            dimension: self.weights.len(),
            threshold: self.threshold,
            bias: self.bias,
            meta: self.meta.clone(),
        };
        let json = serde_json::to_vec(&header).expect("header serializes");
        w.write_all(MAGIC)?;
        w.write_all(&(json.len() as u32).to_le_bytes())?;
        w.write_all(&json)?;
        let mut buf = Vec::with_capacity(self.weights.len() * 8);
        for v in &self.weights {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_from(mut r: impl Read) -> Result<Self, ClassifierError> {
        let invalid = |m: &str| ClassifierError::InvalidModel(m.to_string());
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(invalid("not a model file"));
        }
        let mut len = [0u8; 4];
        r.read_exact(&mut len)?;
        let mut json = vec![0u8; u32::from_le_bytes(len) as usize];
        r.read_exact(&mut json)?;
        let header: Header =
            serde_json::from_slice(&json).map_err(|e| invalid(&format!("bad header: {e}")))?;
        if header.format_version != FORMAT_VERSION {
            return Err(invalid(&format!(
                "unsupported format version {}",
                header.format_version
            )));
        }
        let featurizer =
            Featurizer::new(header.dimension).ok_or_else(|| invalid("dimension not a power of two"))?;
        let mut raw = Vec::new();
        r.read_to_end(&mut raw)?;
        if raw.len() != header.dimension * 8 {
            return Err(invalid("weight block length mismatch"));
        }
        let weights: Vec<f64> = raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        if !weights.iter().all(|w| w.is_finite()) || !header.bias.is_finite() {
            return Err(invalid("non-finite weights"));
        }
        Ok(Self {
            featurizer,
            weights,
            bias: header.bias,
            threshold: header.threshold,
            meta: header.meta,
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), ClassifierError> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, ClassifierError> {
        Self::read_from(std::io::BufReader::new(std::fs::File::open(path)?))
    }
}

impl Scorer for BaselineModel {
    fn score_batch(&self, pairs: &[(&str, &str)]) -> Result<Vec<f64>, ClassifierError> {
        Ok(pairs.iter().map(|(q, a)| self.score_pair(q, a)).collect())
    }

    fn name(&self) -> String {
        format!("baseline(d={})", self.weights.len())
    }
}

/// Fits the baseline with logistic loss. Each epoch visits the pairs in an
/// order shuffled by `(seed, epoch)`.
pub fn train(
    pairs: &[LabeledQaPair],
    cfg: &TrainConfig,
    seed: u64,
) -> Result<BaselineModel, ClassifierError> {
    let positives = pairs.iter().filter(|p| p.label.is_correct()).count();
    if positives == 0 || positives == pairs.len() {
        return Err(ClassifierError::DegenerateData(format!(
            "{positives} correct of {} pairs; both labels are required",
            pairs.len()
        )));
    }
    let featurizer = Featurizer::new(cfg.dimension).ok_or_else(|| {
        ClassifierError::InvalidConfig(format!("dimension {} is not a power of two", cfg.dimension))
    })?;
    let data: Vec<(SparseVector, f64)> = pairs
        .iter()
        .map(|p| {
            (
                featurizer.featurize(&p.question, &p.answer),
                if p.label.is_correct() { 1.0 } else { 0.0 },
            )
        })
        .collect();

    let mut weights = vec![0.0; cfg.dimension];
    let mut bias = 0.0;
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut epoch_losses = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(epoch as u64 + 1);
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for &i in &order {
            let (x, y) = &data[i];
            let p = sigmoid(x.dot(&weights) + bias);
            total += log_loss(p, *y);
            let g = p - y;
            for (j, v) in x.iter() {
                weights[j] -= cfg.learning_rate * (g * v + cfg.l2 * weights[j]);
            }
            bias -= cfg.learning_rate * g;
        }
        let mean = total / data.len() as f64;
        log::debug!("epoch {}: mean loss {mean:.5}", epoch + 1);
        epoch_losses.push(mean);
    }

    Ok(BaselineModel {
        featurizer,
        weights,
        bias,
        threshold: cfg.threshold,
        meta: TrainingMeta {
            seed,
            epochs: cfg.epochs,
            learning_rate: cfg.learning_rate,
            l2: cfg.l2,
            examples: data.len(),
            epoch_losses,
        },
    })
}
