use std::collections::{BTreeMap, HashMap};
use std::sync::RwLock;

use percent_encoding::percent_decode_str;
use serde::{Deserialize, Serialize};

use super::{CacheStore, KgError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LabelSourceKind {
    /// Label in the preferred language.
    EndpointLabel,
    /// Label in some other language.
    AnyLanguageLabel,
    /// Derived from the IRI's last segment.
    UriFallback,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelRecord {
    pub iri: String,
    pub label: String,
    pub source: LabelSourceKind,
}

/// Provides every stored label of an IRI, keyed by language tag.
pub trait LabelSource: Send + Sync {
    fn labels(&self, iri: &str) -> Result<BTreeMap<String, String>, KgError>;
}

impl<T: LabelSource + ?Sized> LabelSource for &T {
    fn labels(&self, iri: &str) -> Result<BTreeMap<String, String>, KgError> {
        (**self).labels(iri)
    }
}

impl<T: LabelSource + ?Sized> LabelSource for std::sync::Arc<T> {
    fn labels(&self, iri: &str) -> Result<BTreeMap<String, String>, KgError> {
        (**self).labels(iri)
    }
}

/// Human-readable form of an IRI's last path segment or fragment:
/// underscores become spaces and percent-escapes are decoded. Never empty.
pub fn uri_fallback(iri: &str) -> String {
    let trimmed = iri.trim_end_matches(['/', '#']);
    let segment = trimmed
        .rsplit(['/', '#'])
        .next()
        .filter(|s| !s.is_empty())
        .unwrap_or(trimmed);
    let decoded = percent_decode_str(segment).decode_utf8_lossy();
    let text = decoded.replace('_', " ");
    let text = text.trim();
    if text.is_empty() {
        iri.to_string()
    } else {
        text.to_string()
    }
}

/// Lowercased with runs of whitespace collapsed to one space.
pub fn normalize_label(label: &str) -> String {
    label.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

/// Case- and whitespace-insensitive label equality.
pub fn labels_equal(a: &str, b: &str) -> bool {
    normalize_label(a) == normalize_label(b)
}

/// Resolves a label with the fallback chain: preferred language, then the
/// lexicographically smallest other language tag, then [`uri_fallback`].
pub fn resolve_label(
    iri: &str,
    preferred_lang: &str,
    source: &dyn LabelSource,
) -> Result<LabelRecord, KgError> {
    let labels = source.labels(iri)?;
    let record = |label: &str, source| LabelRecord {
        iri: iri.to_string(),
        label: label.to_string(),
        source,
    };
    if let Some(l) = labels.get(preferred_lang).filter(|l| !l.trim().is_empty()) {
        return Ok(record(l, LabelSourceKind::EndpointLabel));
    }
    // BTreeMap iterates tags in lexicographic order
    if let Some(l) = labels.values().find(|l| !l.trim().is_empty()) {
        return Ok(record(l, LabelSourceKind::AnyLanguageLabel));
    }
    Ok(record(&uri_fallback(iri), LabelSourceKind::UriFallback))
}

/// Memoizing label resolver, optionally backed by the on-disk cache.
pub struct LabelResolver<S> {
    source: S,
    lang: String,
    memo: RwLock<HashMap<String, LabelRecord>>,
    disk: Option<CacheStore>,
}

impl<S: LabelSource> LabelResolver<S> {
    pub fn new(source: S, lang: impl Into<String>) -> Self {
        Self {
            source,
            lang: lang.into(),
            memo: RwLock::new(HashMap::new()),
            disk: None,
        }
    }

    pub fn with_disk_cache(mut self, cache: CacheStore) -> Self {
        self.disk = Some(cache);
        self
    }

    pub fn language(&self) -> &str {
        &self.lang
    }

    pub fn resolve(&self, iri: &str) -> Result<LabelRecord, KgError> {
        if let Some(hit) = self.memo.read().expect("label memo poisoned").get(iri) {
            return Ok(hit.clone());
        }
        let key = format!("label\0{}\0{iri}", self.lang);
        let record = match &self.disk {
            Some(cache) => {
                let bytes = cache.get_or_fetch(&key, || {
                    let r = resolve_label(iri, &self.lang, &self.source)?;
                    Ok::<_, KgError>(serde_json::to_vec(&r).expect("label record serializes"))
                })?;
                match serde_json::from_slice(&bytes) {
                    Ok(r) => r,
                    Err(_) => resolve_label(iri, &self.lang, &self.source)?,
                }
            }
            None => resolve_label(iri, &self.lang, &self.source)?,
        };
        self.memo
            .write()
            .expect("label memo poisoned")
            .insert(iri.to_string(), record.clone());
        Ok(record)
    }
}
