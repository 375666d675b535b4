//! Run configuration: defaults, then the JSON config file, then flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use kgav::classifier::TrainConfig;
use kgav::dataset::SamplingConfig;
use kgav::kg::HttpMethod;
use kgav::pipeline::EvaluationConfig;
use kgav::qa::{FieldMapping, MockKgqaConfig};
use kgav::synthetic::WorldConfig;
use kgav::VerbalizationMode;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    #[default]
    Mock,
    Remote,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ScorerKind {
    #[default]
    Baseline,
    Remote,
    Oracle,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    /// VANiLLa-shaped records (JSON array or JSON-lines).
    pub dataset: Option<PathBuf>,
    /// Labeled pairs (JSON-lines) for training or evaluation.
    pub pairs: Option<PathBuf>,
    /// Mock knowledge graph (JSON).
    pub graph: Option<PathBuf>,
    pub cache_dir: Option<PathBuf>,
    /// Default model file; `scorer.models` overrides it per mode.
    pub model: Option<PathBuf>,
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KgqaSettings {
    pub backend: Backend,
    pub endpoint: Option<String>,
    pub kb: String,
    pub lang: String,
    pub method: HttpMethod,
    pub timeout_secs: u64,
    pub mapping: FieldMapping,
    pub mock: MockKgqaConfig,
}

impl Default for KgqaSettings {
    fn default() -> Self {
        Self {
            backend: Backend::Mock,
            endpoint: None,
            kb: "wikidata".into(),
            lang: "en".into(),
            method: HttpMethod::Post,
            timeout_secs: 60,
            mapping: FieldMapping::default(),
            mock: MockKgqaConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SparqlSettings {
    pub backend: Backend,
    pub endpoint: Option<String>,
    pub method: HttpMethod,
    pub timeout_secs: u64,
    /// Label language.
    pub lang: String,
}

impl Default for SparqlSettings {
    fn default() -> Self {
        Self {
            backend: Backend::Mock,
            endpoint: None,
            method: HttpMethod::Post,
            timeout_secs: 60,
            lang: "en".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScorerSettings {
    pub kind: ScorerKind,
    /// Model file per verbalization mode name.
    pub models: BTreeMap<String, PathBuf>,
    pub url: Option<String>,
    pub model_id: Option<String>,
    pub timeout_secs: u64,
}

impl Default for ScorerSettings {
    fn default() -> Self {
        Self {
            kind: ScorerKind::Baseline,
            models: BTreeMap::new(),
            url: None,
            model_id: None,
            timeout_secs: 60,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSettings {
    pub k_values: Vec<usize>,
    pub threshold: f64,
    /// Seeds in a repeated classifier evaluation.
    pub runs: usize,
    /// Emit a precision/recall table over thresholds.
    pub sweep: bool,
    /// Use only the first N questions of the dataset.
    pub limit: Option<usize>,
}

impl Default for EvalSettings {
    fn default() -> Self {
        Self {
            k_values: EvaluationConfig::default().k_values,
            threshold: 0.5,
            runs: 10,
            sweep: false,
            limit: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// The only seed. It is copied into every nested seed field.
    pub seed: u64,
    /// Worker threads; 0 means one per core.
    pub workers: usize,
    pub paths: Paths,
    pub kgqa: KgqaSettings,
    pub sparql: SparqlSettings,
    pub modes: Vec<VerbalizationMode>,
    pub sampling: SamplingConfig,
    pub training: TrainConfig,
    pub evaluation: EvalSettings,
    pub scorer: ScorerSettings,
    pub synthetic: WorldConfig,
    /// Drop candidates with aggregates instead of executing their stripped
    /// form.
    pub drop_stripped: bool,
    pub answers_per_candidate: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            workers: 0,
            paths: Paths {
                out_dir: PathBuf::from("out"),
                ..Paths::default()
            },
            kgqa: KgqaSettings::default(),
            sparql: SparqlSettings::default(),
            modes: vec![VerbalizationMode::Nlg, VerbalizationMode::BagOfLabels],
            sampling: SamplingConfig::default(),
            training: TrainConfig::default(),
            evaluation: EvalSettings::default(),
            scorer: ScorerSettings::default(),
            synthetic: WorldConfig::default(),
            drop_stripped: false,
            answers_per_candidate: 1,
        }
    }
}

/// Recursively overlays `patch` onto `base`. Objects merge key by key;
/// anything else replaces.
pub fn merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                merge(b.entry(k).or_insert(Value::Null), v);
            }
        }
        (b, p) => *b = p,
    }
}

/// A flag override addressed by a dotted path such as `sampling.split_ratio`.
pub fn patch_at(path: &str, value: Value) -> Value {
    path.rsplit('.').fold(value, |acc, key| {
        let mut m = serde_json::Map::new();
        m.insert(key.to_string(), acc);
        Value::Object(m)
    })
}

impl RunConfig {
    pub fn resolve(file: Option<&Path>, overrides: Vec<(&str, Value)>) -> Result<Self, CliError> {
        let mut value = serde_json::to_value(RunConfig::default()).expect("default config serializes");
        if let Some(path) = file {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            let patch: Value = serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            if !patch.is_object() {
                return Err(CliError::Config(format!("{}: expected a JSON object", path.display())));
            }
            merge(&mut value, patch);
        }
        for (path, v) in overrides {
            merge(&mut value, patch_at(path, v));
        }
        let mut cfg: RunConfig =
            serde_json::from_value(value).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.sampling.seed = cfg.seed;
        cfg.kgqa.mock.seed = cfg.seed;
        cfg.synthetic.seed = cfg.seed;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        self.sampling.validate()?;
        self.ranking().validate()?;
        if self.modes.is_empty() {
            return Err(CliError::Config("at least one verbalization mode is required".into()));
        }
        if !(0.0..=1.0).contains(&self.evaluation.threshold) {
            return Err(CliError::Config(format!(
                "threshold {} outside [0, 1]",
                self.evaluation.threshold
            )));
        }
        if self.answers_per_candidate == 0 {
            return Err(CliError::Config("answers_per_candidate must be at least 1".into()));
        }
        let max = WorldConfig::max_persons();
        if self.synthetic.persons < 2 || self.synthetic.persons > max {
            return Err(CliError::Config(format!(
                "synthetic.persons must be in 2..={max}, got {}",
                self.synthetic.persons
            )));
        }
        Ok(())
    }

    /// The path stored in `value`, which must name an existing file.
    pub fn require_file<'a>(&self, value: &'a Option<PathBuf>, what: &str) -> Result<&'a Path, CliError> {
        match value {
            None => Err(CliError::Config(format!("no {what} path configured"))),
            Some(p) if !p.is_file() => Err(CliError::Config(format!("{what} {} does not exist", p.display()))),
            Some(p) => Ok(p),
        }
    }

    pub fn ranking(&self) -> EvaluationConfig {
        EvaluationConfig {
            k_values: self.evaluation.k_values.clone(),
        }
    }

    /// Model path for one verbalization mode.
    pub fn model_for(&self, mode: VerbalizationMode) -> Option<&PathBuf> {
        self.scorer.models.get(mode.name()).or(self.paths.model.as_ref())
    }

    pub fn json(&self) -> Value {
        serde_json::to_value(self).expect("config serializes")
    }
}
