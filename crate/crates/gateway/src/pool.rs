//! Client-side endpoint pool: least-utilized dispatch with failover.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use log::{debug, warn};

use crate::{Backend, BackendError, CompletionRequest, TransportError};

/// Sends one request to one endpoint.
pub trait Transport: Send + Sync {
    fn send(&self, endpoint: &str, request: &CompletionRequest, timeout: Duration) -> Result<String, TransportError>;
}

/// Snapshot taken when an attempt is dispatched, before the chosen
/// endpoint's counter is incremented.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DispatchEvent {
    pub endpoint: usize,
    pub attempt: usize,
    pub in_flight: Vec<usize>,
    /// Endpoints this request had not tried yet (the ones it could pick).
    pub eligible: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RetryEvent {
    pub failed_endpoint: usize,
    pub attempt: usize,
    pub cause: TransportError,
}

pub trait PoolObserver: Send + Sync {
    fn on_dispatch(&self, _event: &DispatchEvent) {}
    fn on_retry(&self, _event: &RetryEvent) {}
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PoolStats {
    pub requests: usize,
    pub attempts: usize,
    pub retries: usize,
    pub failures: usize,
}

pub struct EndpointPool<T> {
    endpoints: Vec<String>,
    in_flight: Mutex<Vec<usize>>,
    timeout: Duration,
    max_retries: usize,
    transport: T,
    observer: Option<Arc<dyn PoolObserver>>,
    requests: AtomicUsize,
    attempts: AtomicUsize,
    retries: AtomicUsize,
    failures: AtomicUsize,
}

impl<T: Transport> EndpointPool<T> {
    pub fn new(
        endpoints: Vec<String>,
        timeout: Duration,
        max_retries: usize,
        transport: T,
    ) -> Result<Self, BackendError> {
        if endpoints.is_empty() {
            return Err(BackendError::Config("endpoint pool is empty".into()));
        }
        let n = endpoints.len();
        Ok(Self {
            endpoints,
            in_flight: Mutex::new(vec![0; n]),
            timeout,
            max_retries,
            transport,
            observer: None,
            requests: AtomicUsize::new(0),
            attempts: AtomicUsize::new(0),
            retries: AtomicUsize::new(0),
            failures: AtomicUsize::new(0),
        })
    }

    pub fn with_observer(mut self, observer: Arc<dyn PoolObserver>) -> Self {
        self.observer = Some(observer);
        self
    }

    pub fn endpoints(&self) -> &[String] {
        &self.endpoints
    }

    pub fn in_flight(&self) -> Vec<usize> {
        self.in_flight.lock().expect("pool lock").clone()
    }

    pub fn stats(&self) -> PoolStats {
        PoolStats {
            requests: self.requests.load(Ordering::Relaxed),
            attempts: self.attempts.load(Ordering::Relaxed),
            retries: self.retries.load(Ordering::Relaxed),
            failures: self.failures.load(Ordering::Relaxed),
        }
    }

    /// Picks the least-loaded untried endpoint (ties to the lowest index) and
    /// claims a slot on it. Once every endpoint has been tried the whole pool
    /// is eligible again.
    fn acquire(&self, tried: &mut [bool], attempt: usize) -> usize {
        if tried.iter().all(|&t| t) {
            tried.iter_mut().for_each(|t| *t = false);
        }
        let mut counts = self.in_flight.lock().expect("pool lock");
        let chosen = (0..counts.len())
            .filter(|&i| !tried[i])
            .min_by_key(|&i| (counts[i], i))
            .expect("at least one eligible endpoint");
        if let Some(obs) = &self.observer {
            obs.on_dispatch(&DispatchEvent {
                endpoint: chosen,
                attempt,
                in_flight: counts.clone(),
                eligible: tried.iter().map(|t| !t).collect(),
            });
        }
        counts[chosen] += 1;
        tried[chosen] = true;
        chosen
    }

    fn release(&self, endpoint: usize) {
        let mut counts = self.in_flight.lock().expect("pool lock");
        counts[endpoint] -= 1;
    }
}

impl<T: Transport> Backend for EndpointPool<T> {
    fn complete(&self, request: &CompletionRequest) -> Result<String, BackendError> {
        self.requests.fetch_add(1, Ordering::Relaxed);
        let mut tried = vec![false; self.endpoints.len()];
        let mut causes = Vec::new();
        for attempt in 0..=self.max_retries {
            let endpoint = self.acquire(&mut tried, attempt);
            self.attempts.fetch_add(1, Ordering::Relaxed);
            let result = self.transport.send(&self.endpoints[endpoint], request, self.timeout);
            self.release(endpoint);
            match result {
                Ok(text) => {
                    debug!("endpoint {endpoint} answered on attempt {attempt}");
                    return Ok(text);
                }
                Err(cause) => {
                    warn!("endpoint {} failed: {cause}", self.endpoints[endpoint]);
                    if attempt < self.max_retries {
                        self.retries.fetch_add(1, Ordering::Relaxed);
                        if let Some(obs) = &self.observer {
                            obs.on_retry(&RetryEvent {
                                failed_endpoint: endpoint,
                                attempt,
                                cause: cause.clone(),
                            });
                        }
                    }
                    causes.push((self.endpoints[endpoint].clone(), cause));
                }
            }
        }
        self.failures.fetch_add(1, Ordering::Relaxed);
        Err(BackendError::Unavailable { causes })
    }

    fn id(&self) -> String {
        format!("pool[{}]", self.endpoints.join(","))
    }
}
