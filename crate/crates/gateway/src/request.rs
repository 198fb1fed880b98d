use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::BackendError;

pub const DEFAULT_TEMPERATURE: f64 = 0.7;
pub const DEFAULT_MAX_TOKENS: u32 = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplingParams {
    pub temperature: f64,
    pub max_tokens: u32,
}

impl Default for SamplingParams {
    fn default() -> Self {
        Self {
            temperature: DEFAULT_TEMPERATURE,
            max_tokens: DEFAULT_MAX_TOKENS,
        }
    }
}

/// One prompt to complete.
///
/// `context` names the call site (run, epoch, agent, stage, attempt). It is
/// not sent to the server and is not part of the cache key; scripted replay
/// uses it to tell apart identical prompts answered differently.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionRequest {
    pub model: String,
    pub prompt: String,
    pub params: SamplingParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub context: Option<String>,
}

impl CompletionRequest {
    pub fn new(
        model: impl Into<String>,
        prompt: impl Into<String>,
        params: SamplingParams,
    ) -> Result<Self, BackendError> {
        let prompt = prompt.into();
        if prompt.is_empty() {
            return Err(BackendError::InvalidRequest("empty prompt".into()));
        }
        if !(params.temperature.is_finite() && params.temperature >= 0.0) {
            return Err(BackendError::InvalidRequest(format!(
                "temperature {}",
                params.temperature
            )));
        }
        if params.max_tokens == 0 {
            return Err(BackendError::InvalidRequest("max_tokens must be positive".into()));
        }
        Ok(Self {
            model: model.into(),
            prompt,
            params,
            context: None,
        })
    }

    pub fn with_context(mut self, context: impl Into<String>) -> Self {
        self.context = Some(context.into());
        self
    }

    pub fn prompt_hash(&self) -> String {
        prompt_hash(&self.prompt)
    }

    /// Hash of everything that determines the completion distribution.
    pub fn cache_key(&self) -> String {
        let mut h = Sha256::new();
        for part in [self.model.as_bytes(), self.prompt.as_bytes()] {
            h.update((part.len() as u64).to_le_bytes());
            h.update(part);
        }
        h.update(self.params.temperature.to_bits().to_le_bytes());
        h.update(self.params.max_tokens.to_le_bytes());
        hex::encode(h.finalize())
    }

    pub fn is_cacheable(&self) -> bool {
        self.params.temperature == 0.0
    }
}

/// Hex SHA-256 of the prompt text.
pub fn prompt_hash(prompt: &str) -> String {
    hex::encode(Sha256::digest(prompt.as_bytes()))
}
