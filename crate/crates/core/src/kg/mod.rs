//! Knowledge-graph access: executing query candidates and resolving labels.
//!
//! Two backends implement [`QueryBackend`] and [`LabelSource`]: the
//! in-memory [`MockGraph`] and a SPARQL 1.1 protocol client
//! ([`SparqlEndpoint`]). Either can be wrapped in a [`CachedBackend`] so
//! repeated requests replay from disk.

mod cache;
mod graph;
mod labels;
mod remote;
mod results;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sparql::{Binding, QueryCandidate};

pub use cache::{CacheStore, CachedBackend};
pub use graph::{match_bgp, MockGraph};
pub use labels::{labels_equal, normalize_label, resolve_label, uri_fallback, LabelRecord, LabelResolver, LabelSourceKind, LabelSource};
pub use remote::{EndpointConfig, HttpMethod, SparqlEndpoint};
pub use results::{parse_results_json, results_to_json};

/// Default row cap, mirroring the `LIMIT 1000` QAnswer candidates carry.
pub const DEFAULT_ROW_CAP: usize = 1000;

#[derive(Debug, Error)]
pub enum KgError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("endpoint returned HTTP {status}: {message}")]
    Endpoint { status: u16, message: String },
    #[error("malformed response: {0}")]
    MalformedResponse(String),
}

/// Variables and rows of a `SELECT` result.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResultSet {
    pub variables: Vec<String>,
    pub rows: Vec<Binding>,
}

impl ResultSet {
    pub fn new(variables: Vec<String>, rows: Vec<Binding>) -> Self {
        Self { variables, rows }
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    /// Sort key: the N-Triples rendering of each variable's value, in
    /// variable order (unbound sorts first).
    fn row_key(&self, row: &Binding) -> Vec<String> {
        self.variables
            .iter()
            .map(|v| row.get(v).map(|t| t.to_string()).unwrap_or_default())
            .collect()
    }

    /// Projects onto `vars`, removes duplicate rows, sorts deterministically
    /// and truncates to `cap` rows.
    pub fn normalize(mut self, vars: &[String], cap: usize) -> ResultSet {
        let rows: BTreeSet<Binding> = self.rows.iter().map(|r| r.project(vars)).collect();
        self.variables = vars.to_vec();
        let mut keyed: Vec<(Vec<String>, Binding)> = rows
            .into_iter()
            .map(|r| (self.row_key(&r), r))
            .collect();
        keyed.sort();
        self.rows = keyed.into_iter().map(|(_, r)| r).take(cap).collect();
        self
    }
}

/// Something that can evaluate a query candidate.
pub trait QueryBackend: Send + Sync {
    /// Evaluates `q` with no ordering guarantee. `row_cap` is a hint; the
    /// backend may return more rows.
    fn evaluate(&self, q: &QueryCandidate, row_cap: usize) -> Result<ResultSet, KgError>;

    /// Stable identity used in cache keys.
    fn cache_identity(&self) -> String;
}

impl<T: QueryBackend + ?Sized> QueryBackend for &T {
    fn evaluate(&self, q: &QueryCandidate, row_cap: usize) -> Result<ResultSet, KgError> {
        (**self).evaluate(q, row_cap)
    }

    fn cache_identity(&self) -> String {
        (**self).cache_identity()
    }
}

impl<T: QueryBackend + ?Sized> QueryBackend for std::sync::Arc<T> {
    fn evaluate(&self, q: &QueryCandidate, row_cap: usize) -> Result<ResultSet, KgError> {
        (**self).evaluate(q, row_cap)
    }

    fn cache_identity(&self) -> String {
        (**self).cache_identity()
    }
}

/// Executes `q` and returns its distinct rows in deterministic order.
///
/// Callers that intend to ground the result should pass a candidate that has
/// been through `strip_unsupported` and `rewrite_select_all`.
pub fn execute(
    q: &QueryCandidate,
    backend: &dyn QueryBackend,
    row_cap: usize,
) -> Result<ResultSet, KgError> {
    let rs = backend.evaluate(q, row_cap)?;
    Ok(rs.normalize(&q.projected_variables(), row_cap))
}
