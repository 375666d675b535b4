//! Client for the remote pair-classification service.

use std::time::Duration;

use reqwest::blocking::Client;
use reqwest::StatusCode;
use serde::{Deserialize, Serialize};

use super::{ClassifierError, Scorer};

/// Largest number of pairs the service accepts in one request.
pub const MAX_BATCH: usize = 256;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QaText {
    pub question: String,
    pub answer: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassifyRequest {
    pub pairs: Vec<QaText>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_id: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyResponse {
    pub scores: Vec<f64>,
    pub model_id: String,
    pub latency_ms: u64,
}

impl ClassifyResponse {
    /// Checks the response against the request it answers.
    pub fn validate(&self, expected_len: usize) -> Result<(), ClassifierError> {
        if self.scores.len() != expected_len {
            return Err(ClassifierError::RemoteProtocolError(format!(
                "expected {expected_len} scores, got {}",
                self.scores.len()
            )));
        }
        if let Some(bad) = self.scores.iter().find(|s| !(0.0..=1.0).contains(*s)) {
            return Err(ClassifierError::RemoteProtocolError(format!(
                "score {bad} outside [0, 1]"
            )));
        }
        Ok(())
    }
}

pub struct RemoteClassifier {
    base_url: String,
    model_id: Option<String>,
    client: Client,
}

impl RemoteClassifier {
    pub fn new(base_url: &str, model_id: Option<String>, timeout_secs: u64) -> Result<Self, ClassifierError> {
        let client = Client::builder()
            .timeout(Duration::from_secs(timeout_secs))
            .build()
            .map_err(|e| ClassifierError::RemoteUnavailable(e.to_string()))?;
        Ok(Self {
            base_url: base_url.trim_end_matches('/').to_string(),
            model_id,
            client,
        })
    }

    /// `GET /health`; returns the model id the service reports.
    pub fn health(&self) -> Result<String, ClassifierError> {
        let resp = self
            .client
            .get(format!("{}/health", self.base_url))
            .send()
            .map_err(|e| ClassifierError::RemoteUnavailable(e.to_string()))?;
        let status = resp.status();
        let body = resp
            .text()
            .map_err(|e| ClassifierError::RemoteUnavailable(e.to_string()))?;
        if !status.is_success() {
            return Err(ClassifierError::RemoteUnavailable(format!("health check returned {status}")));
        }
        // accept either a bare id or {"model_id": ...}
        match serde_json::from_str::<serde_json::Value>(&body) {
            Ok(serde_json::Value::Object(map)) => map
                .get("model_id")
                .and_then(|v| v.as_str())
                .map(str::to_string)
                .ok_or_else(|| ClassifierError::RemoteProtocolError("health response lacks model_id".into())),
            Ok(serde_json::Value::String(s)) => Ok(s),
            _ => Ok(body.trim().to_string()),
        }
    }

    pub fn classify(&self, pairs: &[(&str, &str)]) -> Result<ClassifyResponse, ClassifierError> {
        if pairs.is_empty() || pairs.len() > MAX_BATCH {
            return Err(ClassifierError::InvalidConfig(format!(
                "batch of {} pairs outside 1..={MAX_BATCH}",
                pairs.len()
            )));
        }
        let request = ClassifyRequest {
            pairs: pairs
                .iter()
                .map(|(q, a)| QaText {
                    question: q.to_string(),
                    answer: a.to_string(),
                })
                .collect(),
            model_id: self.model_id.clone(),
        };
        let resp = self
            .client
            .post(format!("{}/classify", self.base_url))
            .json(&request)
            .send()
            .map_err(|e| ClassifierError::RemoteUnavailable(e.to_string()))?;
        let status = resp.status();
        let body = resp
            .bytes()
            .map_err(|e| ClassifierError::RemoteUnavailable(e.to_string()))?;
        if status == StatusCode::SERVICE_UNAVAILABLE {
            return Err(ClassifierError::RemoteUnavailable("service is loading (503)".into()));
        }
        if !status.is_success() {
            return Err(ClassifierError::RemoteProtocolError(format!(
                "status {status}: {}",
                String::from_utf8_lossy(&body)
            )));
        }
        let parsed: ClassifyResponse = serde_json::from_slice(&body)
            .map_err(|e| ClassifierError::RemoteProtocolError(format!("bad response body: {e}")))?;
        parsed.validate(pairs.len())?;
        Ok(parsed)
    }
}

impl Scorer for RemoteClassifier {
    fn score_batch(&self, pairs: &[(&str, &str)]) -> Result<Vec<f64>, ClassifierError> {
        let mut out = Vec::with_capacity(pairs.len());
        for chunk in pairs.chunks(MAX_BATCH) {
            out.extend(self.classify(chunk)?.scores);
        }
        Ok(out)
    }

    fn name(&self) -> String {
        format!("remote({})", self.base_url)
    }
}
