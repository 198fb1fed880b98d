//! Chat-completion access for the simulation: an endpoint pool with
//! least-utilized dispatch and failover, a response cache and deterministic
//! mock backends.

mod backend;
mod cache;
mod error;
pub mod http;
pub mod mock;
mod pool;
mod request;

pub use backend::Backend;
pub use cache::{CachedBackend, ResponseCache};
pub use error::{BackendError, TransportError};
pub use http::HttpTransport;
pub use mock::{BackendKind, EchoBackend, FaithfulBackend, ScriptEntry, ScriptedBackend};
pub use pool::{DispatchEvent, EndpointPool, PoolObserver, PoolStats, RetryEvent, Transport};
pub use request::{prompt_hash, CompletionRequest, SamplingParams, DEFAULT_MAX_TOKENS, DEFAULT_TEMPERATURE};
