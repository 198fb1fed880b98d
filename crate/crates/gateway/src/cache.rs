//! Response cache for temperature-0 requests, optionally persisted as an
//! append-only JSON-lines file.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use log::warn;
use serde::{Deserialize, Serialize};

use crate::{Backend, BackendError, CompletionRequest};

#[derive(Debug, Serialize, Deserialize)]
struct Record {
    key: String,
    response: String,
}

#[derive(Default)]
pub struct ResponseCache {
    entries: Mutex<HashMap<String, String>>,
    file: Option<Mutex<File>>,
    path: Option<PathBuf>,
}

impl ResponseCache {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Loads existing records from `path` (later records win) and appends new
    /// ones to it. Malformed lines are skipped. If the file cannot be opened
    /// for appending the cache still works in memory.
    pub fn open(path: impl AsRef<Path>) -> Self {
        let path = path.as_ref().to_path_buf();
        let mut entries = HashMap::new();
        if let Ok(f) = File::open(&path) {
            for (n, line) in BufReader::new(f).lines().enumerate() {
                let Ok(line) = line else { break };
                match serde_json::from_str::<Record>(&line) {
                    Ok(r) => {
                        entries.insert(r.key, r.response);
                    }
                    Err(e) => warn!("{}:{}: skipping cache record: {e}", path.display(), n + 1),
                }
            }
        }
        let file = match OpenOptions::new().create(true).append(true).open(&path) {
            Ok(f) => Some(Mutex::new(f)),
            Err(e) => {
                warn!(
                    "cache file {} not writable, caching in memory only: {e}",
                    path.display()
                );
                None
            }
        };
        Self {
            entries: Mutex::new(entries),
            file,
            path: Some(path),
        }
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn len(&self) -> usize {
        self.entries.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, key: &str) -> Option<String> {
        self.entries.lock().expect("cache lock").get(key).cloned()
    }

    pub fn insert(&self, key: String, response: String) {
        if let Some(file) = &self.file {
            let line = serde_json::to_string(&Record {
                key: key.clone(),
                response: response.clone(),
            })
            .expect("record serializes");
            let mut f = file.lock().expect("cache file lock");
            if let Err(e) = writeln!(f, "{line}").and_then(|_| f.flush()) {
                warn!("cache append failed: {e}");
            }
        }
        self.entries.lock().expect("cache lock").insert(key, response);
    }
}

/// Serves eligible requests from a [`ResponseCache`] before calling `inner`.
pub struct CachedBackend<B> {
    inner: B,
    cache: Arc<ResponseCache>,
    hits: AtomicUsize,
    misses: AtomicUsize,
}

impl<B: Backend> CachedBackend<B> {
    pub fn new(inner: B, cache: Arc<ResponseCache>) -> Self {
        Self {
            inner,
            cache,
            hits: AtomicUsize::new(0),
            misses: AtomicUsize::new(0),
        }
    }

    pub fn hits(&self) -> usize {
        self.hits.load(Ordering::Relaxed)
    }

    pub fn misses(&self) -> usize {
        self.misses.load(Ordering::Relaxed)
    }

    pub fn inner(&self) -> &B {
        &self.inner
    }
}

impl<B: Backend> Backend for CachedBackend<B> {
    fn complete(&self, request: &CompletionRequest) -> Result<String, BackendError> {
        if !request.is_cacheable() {
            return self.inner.complete(request);
        }
        let key = request.cache_key();
        if let Some(hit) = self.cache.get(&key) {
            self.hits.fetch_add(1, Ordering::Relaxed);
            return Ok(hit);
        }
        self.misses.fetch_add(1, Ordering::Relaxed);
        let text = self.inner.complete(request)?;
        self.cache.insert(key, text.clone());
        Ok(text)
    }

    fn id(&self) -> String {
        self.inner.id()
    }
}
