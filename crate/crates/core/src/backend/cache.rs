use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use sha2::{Digest, Sha256};

use super::{Backend, BackendDescriptor, BackendError, CompletionRequest};
use crate::jsonl::write_atomic;

pub const CACHE_MAGIC: &[u8; 8] = b"RFNCACHE";
const HEADER: usize = 8 + 32;

/// One file per request id: magic, SHA-256 of the response, response bytes.
#[derive(Debug, Clone)]
pub struct ResponseCache {
    dir: PathBuf,
}

impl ResponseCache {
    pub fn open(dir: impl Into<PathBuf>) -> io::Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(ResponseCache { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn entry_path(&self, request_id: &str) -> PathBuf {
        self.dir.join(format!("{request_id}.bin"))
    }

    /// `None` when absent or corrupt; corruption is logged.
    pub fn get(&self, request_id: &str) -> Option<String> {
        let path = self.entry_path(request_id);
        let bytes = fs::read(&path).ok()?;
        match decode(&bytes) {
            Some(text) => Some(text),
            None => {
                log::warn!("cache entry {} is corrupt; refetching", path.display());
                None
            }
        }
    }

    pub fn put(&self, request_id: &str, response: &str) -> io::Result<()> {
        let mut bytes = Vec::with_capacity(HEADER + response.len());
        bytes.extend_from_slice(CACHE_MAGIC);
        bytes.extend_from_slice(&Sha256::digest(response.as_bytes()));
        bytes.extend_from_slice(response.as_bytes());
        write_atomic(&self.entry_path(request_id), &bytes)
    }
}

fn decode(bytes: &[u8]) -> Option<String> {
    if bytes.len() < HEADER || &bytes[..8] != CACHE_MAGIC {
        return None;
    }
    let body = &bytes[HEADER..];
    if Sha256::digest(body).as_slice() != &bytes[8..HEADER] {
        return None;
    }
    String::from_utf8(body.to_vec()).ok()
}

/// Serves `request` from `cache` when possible, otherwise calls `backend`
/// and stores the answer. The boolean reports a cache hit.
pub fn cached_complete(
    backend: &dyn Backend,
    request: &CompletionRequest,
    cache: &ResponseCache,
) -> Result<(String, bool), BackendError> {
    if let Some(hit) = cache.get(&request.request_id) {
        return Ok((hit, true));
    }
    let response = backend.complete(request)?;
    if let Err(e) = cache.put(&request.request_id, &response) {
        log::warn!("could not write cache entry {}: {e}", request.request_id);
    }
    Ok((response, false))
}

/// Wraps a backend so every completion goes through a [`ResponseCache`].
pub struct CachedBackend<B> {
    inner: B,
    cache: ResponseCache,
    hits: AtomicU64,
}

impl<B: Backend> CachedBackend<B> {
    pub fn new(inner: B, cache: ResponseCache) -> Self {
        CachedBackend { inner, cache, hits: AtomicU64::new(0) }
    }

    pub fn inner(&self) -> &B {
        &self.inner
    }
}

impl<B: Backend> Backend for CachedBackend<B> {
    fn descriptor(&self) -> &BackendDescriptor {
        self.inner.descriptor()
    }

    fn complete(&self, request: &CompletionRequest) -> Result<String, BackendError> {
        let (text, hit) = cached_complete(&self.inner, request, &self.cache)?;
        if hit {
            self.hits.fetch_add(1, Ordering::Relaxed);
        }
        Ok(text)
    }

    fn network_calls(&self) -> u64 {
        self.inner.network_calls()
    }

    fn cache_hits(&self) -> u64 {
        self.hits.load(Ordering::Relaxed)
    }
}
