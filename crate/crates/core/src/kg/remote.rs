use std::collections::BTreeMap;
use std::time::Duration;

use reqwest::blocking::Client;
use reqwest::header::{ACCEPT, AUTHORIZATION, USER_AGENT};
use serde::{Deserialize, Serialize};

use super::{parse_results_json, KgError, LabelSource, QueryBackend, ResultSet};
use crate::sparql::{serialize, ModifierKind, QueryCandidate, Term, RDFS_LABEL};

const RESULTS_JSON: &str = "application/sparql-results+json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HttpMethod {
    Get,
    #[default]
    Post,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EndpointConfig {
    pub url: String,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
    /// Sent as a bearer token when present.
    #[serde(default, skip_serializing)]
    pub token: Option<String>,
    #[serde(default)]
    pub method: HttpMethod,
}

fn default_timeout() -> u64 {
    60
}

impl EndpointConfig {
    pub fn new(url: impl Into<String>) -> Self {
        Self {
            url: url.into(),
            timeout_secs: default_timeout(),
            token: None,
            method: HttpMethod::Post,
        }
    }
}

/// SPARQL 1.1 protocol client speaking the JSON results format.
pub struct SparqlEndpoint {
    config: EndpointConfig,
    client: Client,
}

impl SparqlEndpoint {
    pub fn new(config: EndpointConfig) -> Result<Self, KgError> {
        let client = Client::builder()
            .timeout(Duration::from_secs(config.timeout_secs))
            .build()
            .map_err(|e| KgError::Transport(e.to_string()))?;
        Ok(Self { config, client })
    }

    pub fn config(&self) -> &EndpointConfig {
        &self.config
    }

    /// Sends raw query text and parses the JSON results.
    pub fn select(&self, query: &str) -> Result<ResultSet, KgError> {
        let request = match self.config.method {
            HttpMethod::Get => self.client.get(&self.config.url).query(&[("query", query)]),
            HttpMethod::Post => self.client.post(&self.config.url).form(&[("query", query)]),
        };
        let mut request = request
            .header(ACCEPT, RESULTS_JSON)
            .header(USER_AGENT, concat!("kgav/", env!("CARGO_PKG_VERSION")));
        if let Some(token) = &self.config.token {
            request = request.header(AUTHORIZATION, format!("Bearer {token}"));
        }
        let response = request
            .send()
            .map_err(|e| KgError::Transport(e.to_string()))?;
        let status = response.status();
        let body = response
            .bytes()
            .map_err(|e| KgError::Transport(e.to_string()))?;
        if status.as_u16() >= 400 {
            let message: String = String::from_utf8_lossy(&body).chars().take(200).collect();
            return Err(KgError::Endpoint {
                status: status.as_u16(),
                message,
            });
        }
        parse_results_json(&body)
    }
}

impl QueryBackend for SparqlEndpoint {
    fn evaluate(&self, q: &QueryCandidate, row_cap: usize) -> Result<ResultSet, KgError> {
        let mut text = serialize(q);
        if !q.modifiers.iter().any(|m| m.kind == ModifierKind::Limit) {
            text.push_str(&format!(" LIMIT {row_cap}"));
        }
        self.select(&text)
    }

    fn cache_identity(&self) -> String {
        format!("sparql:{}", self.config.url)
    }
}

impl LabelSource for SparqlEndpoint {
    fn labels(&self, iri: &str) -> Result<BTreeMap<String, String>, KgError> {
        let query = format!("SELECT ?label WHERE {{ <{iri}> <{RDFS_LABEL}> ?label }}");
        let rs = self.select(&query)?;
        let mut out = BTreeMap::new();
        for row in rs.rows {
            if let Some(Term::Literal { value, lang, .. }) = row.get("label") {
                out.entry(lang.clone().unwrap_or_default())
                    .or_insert_with(|| value.clone());
            }
        }
        Ok(out)
    }
}
