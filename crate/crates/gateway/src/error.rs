use thiserror::Error;

/// Failure of a single attempt against one endpoint.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransportError {
    #[error("timed out")]
    Timeout,
    #[error("connection failed: {0}")]
    Connect(String),
    #[error("HTTP {status}: {body}")]
    Status { status: u16, body: String },
    #[error("malformed response: {0}")]
    Decode(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BackendError {
    #[error("all endpoints failed: {}", format_causes(.causes))]
    Unavailable { causes: Vec<(String, TransportError)> },
    #[error("no recorded response for prompt {hash}")]
    ReplayMiss { hash: String },
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("backend configuration: {0}")]
    Config(String),
}

fn format_causes(causes: &[(String, TransportError)]) -> String {
    causes
        .iter()
        .map(|(e, c)| format!("{e}: {c}"))
        .collect::<Vec<_>>()
        .join("; ")
}
