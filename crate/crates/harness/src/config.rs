//! Experiment configuration, read from TOML. Every key has a default, so an
//! empty file is a valid configuration.

use std::path::{Path, PathBuf};

use grounded_core::codec::{ParseMode, TopicFraming};
use grounded_gateway::{BackendKind, SamplingParams};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("parsing config: {0}")]
    Parse(String),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("bad override {0:?}: expected key.path=value")]
    Override(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentKind {
    Llm,
    Random,
    Zero,
}

impl AgentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AgentKind::Llm => "llm",
            AgentKind::Random => "random",
            AgentKind::Zero => "zero",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Hk,
    Degroot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimelineOrder {
    /// Neighbor posts in ascending agent index.
    Index,
    /// Neighbor posts in a seeded random order per (run, epoch, agent).
    Shuffled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CodecScheme {
    Discrete,
    Scalar,
}

impl CodecScheme {
    pub fn as_str(self) -> &'static str {
        match self {
            CodecScheme::Discrete => "discrete",
            CodecScheme::Scalar => "scalar",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub n: Vec<usize>,
    pub p: Vec<f64>,
    pub epsilon: Vec<f64>,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            n: vec![20],
            p: vec![0.3, 0.5, 0.9, 1.0],
            epsilon: vec![0.3, 0.9],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub epochs: usize,
    pub runs: usize,
    pub master_seed: u64,
    /// Worker threads; 0 uses one per core.
    pub workers: usize,
    pub model: ModelKind,
    pub include_self: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            epochs: 20,
            runs: 10,
            master_seed: 20_240_917,
            workers: 0,
            model: ModelKind::Hk,
            include_self: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentConfig {
    pub kind: AgentKind,
    /// Built-in variant name or a path to a prompt-set file.
    pub variant: String,
    pub decode_retries: usize,
    pub parse_mode: ParseMode,
    pub max_timeline_posts: Option<usize>,
    pub timeline_order: TimelineOrder,
    /// Persona blocks file (blank-line separated); bundled set when absent.
    pub personas_file: Option<PathBuf>,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            kind: AgentKind::Llm,
            variant: "base".into(),
            decode_retries: 2,
            parse_mode: ParseMode::Lenient,
            max_timeline_posts: None,
            timeline_order: TimelineOrder::Index,
            personas_file: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BackendConfig {
    pub kind: BackendKind,
    pub endpoints: Vec<String>,
    pub path: String,
    pub timeout_ms: u64,
    pub max_retries: usize,
    pub model: String,
    pub temperature: f64,
    pub max_tokens: u32,
    /// Append-only response cache; in memory only when absent.
    pub cache_file: Option<PathBuf>,
    /// Recorded completions (audit log or script JSONL) for `mock_scripted`.
    pub script_file: Option<PathBuf>,
    /// Name of the environment variable holding a bearer token.
    pub bearer_token_env: Option<String>,
}

impl Default for BackendConfig {
    fn default() -> Self {
        let sampling = SamplingParams::default();
        Self {
            kind: BackendKind::MockFaithful,
            endpoints: Vec::new(),
            path: grounded_gateway::http::DEFAULT_PATH.into(),
            timeout_ms: 60_000,
            max_retries: 2,
            model: "default".into(),
            temperature: sampling.temperature,
            max_tokens: sampling.max_tokens,
            cache_file: None,
            script_file: None,
            bearer_token_env: None,
        }
    }
}

impl BackendConfig {
    pub fn sampling(&self) -> SamplingParams {
        SamplingParams {
            temperature: self.temperature,
            max_tokens: self.max_tokens,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CodecConfig {
    pub schemes: Vec<CodecScheme>,
    pub repetitions: usize,
}

impl Default for CodecConfig {
    fn default() -> Self {
        Self {
            schemes: vec![CodecScheme::Discrete, CodecScheme::Scalar],
            repetitions: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensitivityConfig {
    /// First entry is the base; each is a variant name or prompt-file path.
    pub variants: Vec<String>,
}

impl Default for SensitivityConfig {
    fn default() -> Self {
        Self {
            variants: vec!["base".into(), "wording".into(), "logic".into(), "newline".into()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NegativityConfig {
    pub trials: usize,
}

impl Default for NegativityConfig {
    fn default() -> Self {
        Self { trials: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub audit: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            audit: true,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub topic: TopicFraming,
    pub grid: GridConfig,
    pub run: RunConfig,
    pub agents: AgentConfig,
    pub backend: BackendConfig,
    pub codec: CodecConfig,
    pub sensitivity: SensitivityConfig,
    pub negativity: NegativityConfig,
    pub output: OutputConfig,
}

/// Environment variable with a comma-separated endpoint list that replaces
/// `backend.endpoints`.
pub const ENDPOINTS_ENV: &str = "GROUNDED_ENDPOINTS";

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        Self::from_toml_with(text, &[])
    }

    /// Parses `text` after applying `key.path=value` overrides; values are
    /// read as TOML literals, falling back to plain strings.
    pub fn from_toml_with(text: &str, overrides: &[String]) -> Result<Self, ConfigError> {
        let mut table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let cfg: Self = table
            .try_into()
            .map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_with(&text, overrides)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Replaces the endpoint list from [`ENDPOINTS_ENV`] when it is set.
    pub fn apply_env(&mut self) {
        if let Ok(list) = std::env::var(ENDPOINTS_ENV) {
            self.backend.endpoints = list
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(String::from)
                .collect();
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if self.grid.n.is_empty() || self.grid.p.is_empty() || self.grid.epsilon.is_empty() {
            return bad("grid axes must not be empty".into());
        }
        if let Some(n) = self.grid.n.iter().find(|&&n| n < 2) {
            return bad(format!("grid.n value {n} < 2"));
        }
        if let Some(p) = self.grid.p.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return bad(format!("grid.p value {p} outside [0, 1]"));
        }
        if let Some(e) = self.grid.epsilon.iter().find(|e| !(e.is_finite() && **e > 0.0)) {
            return bad(format!("grid.epsilon value {e} not positive"));
        }
        if self.run.runs == 0 || self.run.epochs == 0 {
            return bad("run.runs and run.epochs must be at least 1".into());
        }
        if !(self.backend.temperature.is_finite() && self.backend.temperature >= 0.0) {
            return bad(format!("backend.temperature {}", self.backend.temperature));
        }
        if self.backend.max_tokens == 0 {
            return bad("backend.max_tokens must be positive".into());
        }
        if self.codec.repetitions == 0 || self.negativity.trials == 0 {
            return bad("codec.repetitions and negativity.trials must be at least 1".into());
        }
        if self.agents.max_timeline_posts == Some(0) {
            return bad("agents.max_timeline_posts must be positive".into());
        }
        Ok(())
    }

    /// `(N, p, epsilon)` cells in grid order.
    pub fn cells(&self) -> Vec<(usize, f64, f64)> {
        let mut out = Vec::new();
        for &n in &self.grid.n {
            for &p in &self.grid.p {
                for &e in &self.grid.epsilon {
                    out.push((n, p, e));
                }
            }
        }
        out
    }
}

fn apply_override(table: &mut toml::Table, spec: &str) -> Result<(), ConfigError> {
    let (key, raw) = spec.split_once('=').ok_or_else(|| ConfigError::Override(spec.into()))?;
    let path: Vec<&str> = key.trim().split('.').collect();
    if path.iter().any(|p| p.is_empty()) {
        return Err(ConfigError::Override(spec.into()));
    }
    let value = format!("v = {}", raw.trim())
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.trim().to_string()));
    let (last, parents) = path.split_last().expect("non-empty path");
    let mut cur = table;
    for p in parents {
        cur = cur
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| ConfigError::Override(spec.into()))?;
    }
    cur.insert(last.to_string(), value);
    Ok(())
}
