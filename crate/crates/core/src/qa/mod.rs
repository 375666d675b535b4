//! Ranked query-candidate lists from a KGQA system.

mod mock;
mod remote;

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use mock::{MockKgqa, MockKgqaConfig};
pub use remote::{FieldMapping, RemoteKgqa, RemoteKgqaConfig};

use crate::kg::CacheStore;
use crate::sparql::{parse_query, QueryCandidate};

#[derive(Debug, Clone, Error)]
pub enum QaError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("malformed KGQA response: {0}")]
    MalformedResponse(String),
}

/// One candidate as returned by the backend, before parsing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawCandidate {
    pub sparql: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confidence: Option<f64>,
}

pub trait KgqaBackend: Send + Sync {
    /// Candidates in the backend's rank order, best first.
    fn fetch(&self, question: &str) -> Result<Vec<RawCandidate>, QaError>;

    /// Distinguishes backends in cache keys.
    fn identity(&self) -> String;
}

impl<T: KgqaBackend + ?Sized> KgqaBackend for &T {
    fn fetch(&self, question: &str) -> Result<Vec<RawCandidate>, QaError> {
        (**self).fetch(question)
    }

    fn identity(&self) -> String {
        (**self).identity()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateList {
    pub question: String,
    /// Ranked 1..N without gaps.
    pub candidates: Vec<QueryCandidate>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl CandidateList {
    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }
}

/// Parses raw candidates in order, dropping the unparseable ones and
/// renumbering the rest 1..N.
pub fn parse_candidates(question: &str, raw: &[RawCandidate]) -> CandidateList {
    let mut candidates = Vec::with_capacity(raw.len());
    let mut warnings = Vec::new();
    for (i, r) in raw.iter().enumerate() {
        match parse_query(&r.sparql) {
            Ok(q) => {
                let rank = candidates.len() + 1;
                candidates.push(q.with_id(format!("c{rank}"), rank));
            }
            Err(e) => {
                let w = format!("candidate {} dropped: {e}", i + 1);
                log::warn!("{question:?}: {w}");
                warnings.push(w);
            }
        }
    }
    CandidateList {
        question: question.to_string(),
        candidates,
        warnings,
    }
}

pub fn ask(question: &str, backend: &dyn KgqaBackend) -> Result<CandidateList, QaError> {
    let raw = backend.fetch(question)?;
    Ok(parse_candidates(question, &raw))
}

fn cache_key(question: &str, backend: &dyn KgqaBackend) -> String {
    format!("ask\0{}\0{question}", backend.identity())
}

/// Like [`ask`], but the raw backend response is stored in `cache` and
/// replayed on later calls.
pub fn ask_once(
    question: &str,
    backend: &dyn KgqaBackend,
    cache: &CacheStore,
) -> Result<CandidateList, QaError> {
    let payload = cache.get_or_fetch(&cache_key(question, backend), || {
        let raw = backend.fetch(question)?;
        Ok::<_, QaError>(serde_json::to_vec(&raw).expect("candidates serialize"))
    })?;
    let raw: Vec<RawCandidate> = serde_json::from_slice(&payload)
        .map_err(|e| QaError::MalformedResponse(format!("cached entry: {e}")))?;
    Ok(parse_candidates(question, &raw))
}

/// Asks every distinct question once, in parallel, and returns one list per
/// input question in input order.
pub fn ask_batch(
    questions: &[String],
    backend: &dyn KgqaBackend,
    cache: Option<&CacheStore>,
) -> Result<Vec<CandidateList>, QaError> {
    ask_each(questions, backend, cache).into_iter().collect()
}

/// Like [`ask_batch`], but one failing question does not affect the others.
pub fn ask_each(
    questions: &[String],
    backend: &dyn KgqaBackend,
    cache: Option<&CacheStore>,
) -> Vec<Result<CandidateList, QaError>> {
    let mut distinct: Vec<&str> = questions.iter().map(String::as_str).collect();
    distinct.sort_unstable();
    distinct.dedup();
    let answered: HashMap<&str, Result<CandidateList, QaError>> = distinct
        .par_iter()
        .map(|q| {
            let list = match cache {
                Some(c) => ask_once(q, backend, c),
                None => ask(q, backend),
            };
            (*q, list)
        })
        .collect();
    questions.iter().map(|q| answered[q.as_str()].clone()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::{AtomicUsize, Ordering};

    struct Counting {
        calls: AtomicUsize,
        raw: Vec<RawCandidate>,
    }

    impl Counting {
        fn new(raw: Vec<RawCandidate>) -> Self {
            Self {
                calls: AtomicUsize::new(0),
                raw,
            }
        }
    }

    impl KgqaBackend for Counting {
        fn fetch(&self, _question: &str) -> Result<Vec<RawCandidate>, QaError> {
            self.calls.fetch_add(1, Ordering::SeqCst);
            Ok(self.raw.clone())
        }

        fn identity(&self) -> String {
            "counting".into()
        }
    }

    fn raw(sparql: &str) -> RawCandidate {
        RawCandidate {
            sparql: sparql.into(),
            confidence: None,
        }
    }

    fn five_with_one_broken() -> Vec<RawCandidate> {
        vec![
            raw("SELECT ?o WHERE { <http://x/a> <http://x/p> ?o }"),
            raw("SELECT ?o WHERE { <http://x/b> <http://x/p> ?o }"),
            raw("SELECT ?o WHERE { <http://x/c> <http://x/p> ?o"),
            raw("SELECT ?o WHERE { <http://x/d> <http://x/p> ?o }"),
            raw("SELECT ?s WHERE { ?s <http://x/p> <http://x/e> }"),
        ]
    }

    #[test]
    fn malformed_candidate_dropped_and_ranks_densified() {
        let list = ask("q", &Counting::new(five_with_one_broken())).unwrap();
        assert_eq!(list.len(), 4);
        assert_eq!(list.candidates.iter().map(|c| c.rank).collect::<Vec<_>>(), vec![1, 2, 3, 4]);
        assert_eq!(list.warnings.len(), 1);
        assert!(list.candidates[2].raw_text.contains("<http://x/d>"));
    }

    #[test]
    fn empty_response_is_empty_list() {
        let list = ask("q", &Counting::new(vec![])).unwrap();
        assert!(list.is_empty());
    }

    #[test]
    fn duplicates_collapse_to_one_call() {
        let dir = tempfile::tempdir().unwrap();
        let cache = CacheStore::new(dir.path()).unwrap();
        let backend = Counting::new(five_with_one_broken());
        let qs: Vec<String> = vec!["same".into(), "same".into(), "same".into()];
        let lists = ask_batch(&qs, &backend, Some(&cache)).unwrap();
        assert_eq!(backend.calls.load(Ordering::SeqCst), 1);
        assert_eq!(lists.len(), 3);

        let distinct: Vec<String> = (0..10).map(|i| format!("q{i}")).collect();
        let backend = Counting::new(vec![]);
        ask_batch(&distinct, &backend, None).unwrap();
        assert_eq!(backend.calls.load(Ordering::SeqCst), 10);
    }

    struct FailsOn(&'static str);

    impl KgqaBackend for FailsOn {
        fn fetch(&self, question: &str) -> Result<Vec<RawCandidate>, QaError> {
            if question == self.0 {
                Err(QaError::Transport("connection reset".into()))
            } else {
                Ok(vec![raw("SELECT ?o WHERE { <http://x/a> <http://x/p> ?o }")])
            }
        }

        fn identity(&self) -> String {
            "fails-on".into()
        }
    }

    #[test]
    fn one_failure_does_not_sink_the_batch() {
        let qs: Vec<String> = vec!["a".into(), "bad".into(), "c".into(), "bad".into()];
        let results = ask_each(&qs, &FailsOn("bad"), None);
        let ok: Vec<bool> = results.iter().map(Result::is_ok).collect();
        assert_eq!(ok, vec![true, false, true, false]);
        assert_eq!(results[0].as_ref().unwrap().question, "a");
        assert_eq!(results[2].as_ref().unwrap().question, "c");
        assert!(ask_batch(&qs, &FailsOn("bad"), None).is_err());
    }

    #[test]
    fn warm_cache_replays() {
        let dir = tempfile::tempdir().unwrap();
        let cache = CacheStore::new(dir.path()).unwrap();
        let backend = Counting::new(five_with_one_broken());
        let cold = ask_once("q", &backend, &cache).unwrap();
        let warm = ask_once("q", &backend, &cache).unwrap();
        assert_eq!(cold, warm);
        assert_eq!(backend.calls.load(Ordering::SeqCst), 1);
    }
}
