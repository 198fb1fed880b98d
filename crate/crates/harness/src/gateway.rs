//! The harness's view of a backend: cached first attempts, uncached retries
//! and an optional recorder feeding the audit log.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use anyhow::{bail, Context, Result};
use grounded_gateway::{
    prompt_hash, Backend, BackendError, BackendKind, CachedBackend, CompletionRequest, EchoBackend, EndpointPool,
    FaithfulBackend, HttpTransport, ResponseCache, SamplingParams, ScriptEntry, ScriptedBackend,
};

use crate::config::ExperimentConfig;

/// Collects every completion served, keyed by call context.
#[derive(Default)]
pub struct Recorder {
    entries: Mutex<Vec<ScriptEntry>>,
}

impl Recorder {
    /// Entries sorted by context so the log does not depend on thread timing.
    pub fn take_sorted(&self) -> Vec<ScriptEntry> {
        let mut v = std::mem::take(&mut *self.entries.lock().expect("recorder lock"));
        v.sort_by(|a, b| a.context.cmp(&b.context));
        v
    }
}

#[derive(Clone)]
pub struct Gateway {
    cached: Arc<dyn Backend>,
    raw: Arc<dyn Backend>,
    model: String,
    params: SamplingParams,
    recorder: Option<Arc<Recorder>>,
}

impl Gateway {
    pub fn new(
        raw: Arc<dyn Backend>,
        cache: Arc<ResponseCache>,
        model: impl Into<String>,
        params: SamplingParams,
    ) -> Self {
        Self {
            cached: Arc::new(CachedBackend::new(raw.clone(), cache)),
            raw,
            model: model.into(),
            params,
            recorder: None,
        }
    }

    pub fn with_recorder(mut self, recorder: Arc<Recorder>) -> Self {
        self.recorder = Some(recorder);
        self
    }

    pub fn recorder(&self) -> Option<&Arc<Recorder>> {
        self.recorder.as_ref()
    }

    pub fn backend_id(&self) -> String {
        self.raw.id()
    }

    pub fn params(&self) -> SamplingParams {
        self.params
    }

    /// Completes `prompt`. `fresh` skips the cache (used for retries, which
    /// would otherwise get the same cached answer back).
    pub fn complete(&self, prompt: &str, context: &str, fresh: bool) -> Result<String, BackendError> {
        let request = CompletionRequest::new(self.model.clone(), prompt, self.params)?.with_context(context);
        let text = if fresh {
            self.raw.complete(&request)?
        } else {
            self.cached.complete(&request)?
        };
        if let Some(rec) = &self.recorder {
            rec.entries.lock().expect("recorder lock").push(ScriptEntry {
                context: Some(context.to_string()),
                prompt_hash: prompt_hash(prompt),
                response: text.clone(),
            });
        }
        Ok(text)
    }
}

/// Reads script entries from a JSONL file. Lines that are not script
/// entries (audit headers, update records) are skipped, so an audit log
/// works as a script.
pub fn load_script(path: &Path) -> Result<Vec<ScriptEntry>> {
    let f = File::open(path).with_context(|| format!("opening script {}", path.display()))?;
    let mut out = Vec::new();
    for line in BufReader::new(f).lines() {
        let line = line?;
        if let Ok(v) = serde_json::from_str::<serde_json::Value>(&line) {
            if v.get("type").and_then(|t| t.as_str()).is_some_and(|t| t != "call") {
                continue;
            }
            if let Ok(e) = serde_json::from_value::<ScriptEntry>(v) {
                out.push(e);
            }
        }
    }
    Ok(out)
}

/// Builds the backend named in the config.
pub fn build_backend(cfg: &ExperimentConfig) -> Result<Arc<dyn Backend>> {
    let b = &cfg.backend;
    Ok(match b.kind {
        BackendKind::MockEcho => Arc::new(EchoBackend::new(cfg.topic.clone())),
        BackendKind::MockFaithful => Arc::new(FaithfulBackend::new(cfg.topic.clone())),
        BackendKind::MockScripted => {
            let Some(path) = &b.script_file else {
                bail!("backend.kind = mock_scripted needs backend.script_file");
            };
            Arc::new(ScriptedBackend::new(load_script(path)?))
        }
        BackendKind::Http => {
            if b.endpoints.is_empty() {
                bail!("backend.kind = http needs backend.endpoints (or GROUNDED_ENDPOINTS)");
            }
            let bearer = b.bearer_token_env.as_ref().and_then(|name| std::env::var(name).ok());
            let transport = HttpTransport::new(b.path.clone(), bearer)?;
            Arc::new(EndpointPool::new(
                b.endpoints.clone(),
                Duration::from_millis(b.timeout_ms),
                b.max_retries,
                transport,
            )?)
        }
    })
}

pub fn build_gateway(cfg: &ExperimentConfig, backend: Arc<dyn Backend>, record: bool) -> Gateway {
    let cache = match &cfg.backend.cache_file {
        Some(p) => ResponseCache::open(p),
        None => ResponseCache::in_memory(),
    };
    let gw = Gateway::new(
        backend,
        Arc::new(cache),
        cfg.backend.model.clone(),
        cfg.backend.sampling(),
    );
    if record {
        gw.with_recorder(Arc::new(Recorder::default()))
    } else {
        gw
    }
}
