//! Pool over real sockets: one endpoint that never answers, one that serves
//! canned chat-completion responses.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use grounded_gateway::{
    Backend, BackendError, CompletionRequest, EndpointPool, HttpTransport, PoolObserver, RetryEvent, SamplingParams,
    TransportError,
};

fn read_request(stream: &mut TcpStream) -> String {
    let mut reader = BufReader::new(stream.try_clone().unwrap());
    let mut len = 0usize;
    loop {
        let mut line = String::new();
        if reader.read_line(&mut line).unwrap() == 0 {
            break;
        }
        if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
            len = v.trim().parse().unwrap();
        }
        if line == "\r\n" {
            break;
        }
    }
    let mut body = vec![0; len];
    reader.read_exact(&mut body).unwrap();
    String::from_utf8(body).unwrap()
}

/// Answers every request with the prompt's length; records bodies.
fn serve_ok(bodies: Arc<Mutex<Vec<String>>>) -> String {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    thread::spawn(move || {
        for stream in listener.incoming() {
            let mut stream = stream.unwrap();
            let body = read_request(&mut stream);
            let v: serde_json::Value = serde_json::from_str(&body).unwrap();
            let prompt = v["messages"][0]["content"].as_str().unwrap().to_string();
            bodies.lock().unwrap().push(body);
            let reply = serde_json::json!({"choices": [{"message": {"role": "assistant", "content": format!("len={}", prompt.len())}}]}).to_string();
            let resp = format!(
                "HTTP/1.1 200 OK\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{}",
                reply.len(),
                reply
            );
            stream.write_all(resp.as_bytes()).unwrap();
        }
    });
    format!("http://{addr}")
}

/// Accepts connections and never answers.
fn serve_silent() -> String {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    thread::spawn(move || {
        let mut held = Vec::new();
        for stream in listener.incoming() {
            held.push(stream.unwrap());
        }
    });
    format!("http://{addr}")
}

#[derive(Default)]
struct Retries(AtomicUsize, Mutex<Vec<TransportError>>);

impl PoolObserver for Retries {
    fn on_retry(&self, e: &RetryEvent) {
        assert_eq!(e.failed_endpoint, 0);
        self.0.fetch_add(1, Ordering::SeqCst);
        self.1.lock().unwrap().push(e.cause.clone());
    }
}

#[test]
fn silent_endpoint_times_out_and_fails_over() {
    let bodies = Arc::new(Mutex::new(Vec::new()));
    let endpoints = vec![serve_silent(), serve_ok(bodies.clone())];
    let observer = Arc::new(Retries::default());
    let transport = HttpTransport::new("/v1/chat/completions", None).unwrap();
    let pool = EndpointPool::new(endpoints, Duration::from_millis(150), 2, transport)
        .unwrap()
        .with_observer(observer.clone());
    let params = SamplingParams {
        temperature: 0.0,
        max_tokens: 7,
    };
    for i in 0..3 {
        let req = CompletionRequest::new("tiny", "x".repeat(i + 1), params).unwrap();
        assert_eq!(pool.complete(&req).unwrap(), format!("len={}", i + 1));
    }
    assert_eq!(observer.0.load(Ordering::SeqCst), 3);
    assert!(observer.1.lock().unwrap().iter().all(|c| *c == TransportError::Timeout));
    let bodies = bodies.lock().unwrap();
    let first: serde_json::Value = serde_json::from_str(&bodies[0]).unwrap();
    assert_eq!(first["model"], "tiny");
    assert_eq!(first["max_tokens"], 7);
    assert_eq!(first["temperature"], 0.0);
}

#[test]
fn refused_connections_report_every_cause() {
    // Bind then drop to get a port nobody listens on.
    let dead = {
        let l = TcpListener::bind("127.0.0.1:0").unwrap();
        format!("http://{}", l.local_addr().unwrap())
    };
    let transport = HttpTransport::new("/v1/chat/completions", None).unwrap();
    let pool = EndpointPool::new(vec![dead.clone(), dead], Duration::from_millis(300), 1, transport).unwrap();
    let req = CompletionRequest::new("m", "hi", SamplingParams::default()).unwrap();
    match pool.complete(&req) {
        Err(BackendError::Unavailable { causes }) => {
            assert_eq!(causes.len(), 2);
            assert!(causes.iter().all(|(_, c)| matches!(c, TransportError::Connect(_))));
        }
        other => panic!("expected unavailable, got {other:?}"),
    }
}
