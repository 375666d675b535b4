//! Artifact writers. Every file carries the resolved config and seed;
//! nothing time-dependent is written.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::CliError;

pub struct Output {
    dir: PathBuf,
    config: Value,
    seed: u64,
}

impl Output {
    pub fn new(cfg: &RunConfig) -> Result<Self, CliError> {
        let dir = cfg.paths.out_dir.clone();
        fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
        Ok(Self {
            dir,
            config: cfg.json(),
            seed: cfg.seed,
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn write(&self, name: &str, text: &str) -> Result<PathBuf, CliError> {
        let path = self.path(name);
        fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        log::info!("wrote {}", path.display());
        Ok(path)
    }

    /// `{"seed", "config", ...body}` as pretty JSON.
    pub fn write_json(&self, name: &str, body: impl Serialize) -> Result<PathBuf, CliError> {
        let mut doc = json!({ "seed": self.seed, "config": self.config });
        let body = serde_json::to_value(body).map_err(|e| CliError::Data(e.to_string()))?;
        if let (Value::Object(d), Value::Object(b)) = (&mut doc, body) {
            d.extend(b);
        }
        let mut text = serde_json::to_string_pretty(&doc).expect("JSON value serializes");
        text.push('\n');
        self.write(name, &text)
    }

    pub fn write_markdown(&self, name: &str, body: &str) -> Result<PathBuf, CliError> {
        self.write(name, &markdown_doc(body, self.seed, &self.config))
    }

    pub fn write_csv(&self, name: &str, body: &str) -> Result<PathBuf, CliError> {
        self.write(name, &csv_doc(body, self.seed, &self.config))
    }

    /// Data files stay one record per line; their run metadata goes in the
    /// manifest next to them.
    pub fn write_jsonl<T: Serialize>(&self, name: &str, items: &[T]) -> Result<PathBuf, CliError> {
        let path = self.path(name);
        kgav::dataset::write_jsonl(&path, items).map_err(|e| CliError::io(&path, e))?;
        log::info!("wrote {}", path.display());
        Ok(path)
    }

    pub fn write_text(&self, name: &str, text: &str) -> Result<PathBuf, CliError> {
        self.write(name, text)
    }
}

/// Markdown followed by the run configuration in a fenced block.
pub fn markdown_doc(body: &str, seed: u64, config: &Value) -> String {
    let config = serde_json::to_string_pretty(config).expect("JSON value serializes");
    format!("{body}\nSeed: {seed}\n\n```json\n{config}\n```\n")
}

/// CSV with `#` comment lines for the seed and the compact config.
pub fn csv_doc(body: &str, seed: u64, config: &Value) -> String {
    format!("# seed: {seed}\n# config: {config}\n{body}")
}

pub fn read_to_string(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}
