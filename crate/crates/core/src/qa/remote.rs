use std::time::Duration;

use reqwest::blocking::Client;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{KgqaBackend, QaError, RawCandidate};
use crate::kg::HttpMethod;

/// Where the candidates live in the KGQA response.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldMapping {
    /// JSON pointer to the candidate array; empty for a top-level array.
    #[serde(default)]
    pub list_pointer: String,
    pub sparql_field: String,
    /// Ascending rank; takes precedence over `confidence_field`.
    #[serde(default)]
    pub rank_field: Option<String>,
    /// Descending confidence.
    #[serde(default)]
    pub confidence_field: Option<String>,
}

impl Default for FieldMapping {
    fn default() -> Self {
        Self {
            list_pointer: "/queries".into(),
            sparql_field: "query".into(),
            rank_field: None,
            confidence_field: Some("confidence".into()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemoteKgqaConfig {
    pub url: String,
    #[serde(default = "default_kb")]
    pub kb: String,
    #[serde(default = "default_lang")]
    pub lang: String,
    #[serde(default)]
    pub method: HttpMethod,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
    #[serde(default, skip_serializing)]
    pub token: Option<String>,
    #[serde(default)]
    pub mapping: FieldMapping,
}

fn default_kb() -> String {
    "wikidata".into()
}

fn default_lang() -> String {
    "en".into()
}

fn default_timeout() -> u64 {
    60
}

impl RemoteKgqaConfig {
    pub fn new(url: impl Into<String>) -> Self {
        Self {
            url: url.into(),
            kb: default_kb(),
            lang: default_lang(),
            method: HttpMethod::default(),
            timeout_secs: default_timeout(),
            token: None,
            mapping: FieldMapping::default(),
        }
    }
}

pub struct RemoteKgqa {
    config: RemoteKgqaConfig,
    client: Client,
}

impl RemoteKgqa {
    pub fn new(config: RemoteKgqaConfig) -> Result<Self, QaError> {
        let client = Client::builder()
            .timeout(Duration::from_secs(config.timeout_secs))
            .build()
            .map_err(|e| QaError::Transport(e.to_string()))?;
        Ok(Self { config, client })
    }
}

/// Extracts candidates from a response body according to `mapping`.
pub(crate) fn extract_candidates(body: &Value, mapping: &FieldMapping) -> Result<Vec<RawCandidate>, QaError> {
    let list = if mapping.list_pointer.is_empty() {
        Some(body)
    } else {
        body.pointer(&mapping.list_pointer)
    };
    let Some(Value::Array(items)) = list else {
        return Err(QaError::MalformedResponse(format!(
            "no candidate array at '{}'",
            mapping.list_pointer
        )));
    };
    let mut out: Vec<(Option<f64>, Option<f64>, RawCandidate)> = Vec::with_capacity(items.len());
    for (i, item) in items.iter().enumerate() {
        let Some(sparql) = item.get(&mapping.sparql_field).and_then(Value::as_str) else {
            log::warn!("candidate {} has no '{}' string; skipped", i + 1, mapping.sparql_field);
            continue;
        };
        let num = |f: &Option<String>| f.as_ref().and_then(|f| item.get(f)).and_then(Value::as_f64);
        let confidence = num(&mapping.confidence_field);
        out.push((
            num(&mapping.rank_field),
            confidence,
            RawCandidate {
                sparql: sparql.to_string(),
                confidence,
            },
        ));
    }
    // stable sorts keep response order for ties and missing values
    if mapping.rank_field.is_some() {
        out.sort_by(|a, b| a.0.unwrap_or(f64::INFINITY).total_cmp(&b.0.unwrap_or(f64::INFINITY)));
    } else if mapping.confidence_field.is_some() {
        out.sort_by(|a, b| {
            b.1.unwrap_or(f64::NEG_INFINITY)
                .total_cmp(&a.1.unwrap_or(f64::NEG_INFINITY))
        });
    }
    Ok(out.into_iter().map(|(_, _, c)| c).collect())
}

impl KgqaBackend for RemoteKgqa {
    fn fetch(&self, question: &str) -> Result<Vec<RawCandidate>, QaError> {
        let params = [
            ("question", question),
            ("kb", self.config.kb.as_str()),
            ("lang", self.config.lang.as_str()),
        ];
        let request = match self.config.method {
            HttpMethod::Get => self.client.get(&self.config.url).query(&params),
            HttpMethod::Post => self.client.post(&self.config.url).form(&params),
        };
        let request = match &self.config.token {
            Some(t) => request.bearer_auth(t),
            None => request,
        };
        let response = request.send().map_err(|e| QaError::Transport(e.to_string()))?;
        let status = response.status();
        let text = response.text().map_err(|e| QaError::Transport(e.to_string()))?;
        if !status.is_success() {
            return Err(QaError::Transport(format!("status {status}: {text}")));
        }
        let body: Value =
            serde_json::from_str(&text).map_err(|e| QaError::MalformedResponse(e.to_string()))?;
        extract_candidates(&body, &self.config.mapping)
    }

    fn identity(&self) -> String {
        format!("remote:{}:{}:{}", self.config.url, self.config.kb, self.config.lang)
    }
}
