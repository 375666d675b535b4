use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use super::{parse_results_json, results_to_json, KgError, QueryBackend, ResultSet};
use crate::sparql::{serialize, QueryCandidate};

const MAGIC: &str = "kgav-cache-v1";

/// Content-addressed response cache: one file per request key.
///
/// Each file starts with a header line carrying the SHA-256 of the payload;
/// an entry whose payload no longer matches is treated as a miss and
/// rewritten. Writes go through a temporary file and a rename, so concurrent
/// writers of the same key leave one complete entry behind.
#[derive(Debug, Clone)]
pub struct CacheStore {
    dir: PathBuf,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl CacheStore {
    pub fn new(dir: impl Into<PathBuf>) -> std::io::Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(Self { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{}.entry", sha256_hex(key.as_bytes())))
    }

    /// Returns the stored payload, or `None` on a miss or a corrupt entry.
    pub fn get(&self, key: &str) -> Option<Vec<u8>> {
        let path = self.path_for(key);
        let raw = fs::read(&path).ok()?;
        let corrupt = |why: &str| {
            log::warn!("cache entry {} is corrupt ({why}); refetching", path.display());
            None
        };
        let Some(nl) = raw.iter().position(|&b| b == b'\n') else {
            return corrupt("no header");
        };
        let (header, payload) = (&raw[..nl], &raw[nl + 1..]);
        let Ok(header) = std::str::from_utf8(header) else {
            return corrupt("bad header");
        };
        match header.split_once(' ') {
            Some((MAGIC, digest)) if digest == sha256_hex(payload) => Some(payload.to_vec()),
            _ => corrupt("digest mismatch"),
        }
    }

    pub fn put(&self, key: &str, payload: &[u8]) -> std::io::Result<()> {
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir)?;
        writeln!(tmp, "{MAGIC} {}", sha256_hex(payload))?;
        tmp.write_all(payload)?;
        tmp.flush()?;
        tmp.persist(self.path_for(key)).map_err(|e| e.error)?;
        Ok(())
    }

    /// Cached payload for `key`, calling `fetch` (and storing its result)
    /// only on a miss. A failed store is logged, not returned.
    pub fn get_or_fetch<E>(
        &self,
        key: &str,
        fetch: impl FnOnce() -> Result<Vec<u8>, E>,
    ) -> Result<Vec<u8>, E> {
        if let Some(hit) = self.get(key) {
            return Ok(hit);
        }
        let payload = fetch()?;
        if let Err(e) = self.put(key, &payload) {
            log::warn!("could not write cache entry for {key:?}: {e}");
        }
        Ok(payload)
    }

    /// Removes every entry.
    pub fn clear(&self) -> std::io::Result<()> {
        for entry in fs::read_dir(&self.dir)? {
            let path = entry?.path();
            if path.extension().is_some_and(|e| e == "entry") {
                fs::remove_file(path)?;
            }
        }
        Ok(())
    }
}

/// A [`QueryBackend`] whose responses replay from a [`CacheStore`].
pub struct CachedBackend<B> {
    inner: B,
    cache: CacheStore,
}

impl<B: QueryBackend> CachedBackend<B> {
    pub fn new(inner: B, cache: CacheStore) -> Self {
        Self { inner, cache }
    }

    pub fn inner(&self) -> &B {
        &self.inner
    }

    fn key(&self, q: &QueryCandidate, row_cap: usize) -> String {
        format!(
            "execute\0{}\0{row_cap}\0{}",
            self.inner.cache_identity(),
            serialize(q)
        )
    }
}

impl<B: QueryBackend> QueryBackend for CachedBackend<B> {
    fn evaluate(&self, q: &QueryCandidate, row_cap: usize) -> Result<ResultSet, KgError> {
        let key = self.key(q, row_cap);
        let bytes = self.cache.get_or_fetch(&key, || {
            self.inner
                .evaluate(q, row_cap)
                .map(|rs| results_to_json(&rs).into_bytes())
        })?;
        match parse_results_json(&bytes) {
            Ok(rs) => Ok(rs),
            Err(e) => {
                log::warn!("unreadable cached result set ({e}); refetching");
                let rs = self.inner.evaluate(q, row_cap)?;
                let _ = self.cache.put(&key, results_to_json(&rs).as_bytes());
                Ok(rs)
            }
        }
    }

    fn cache_identity(&self) -> String {
        self.inner.cache_identity()
    }
}
