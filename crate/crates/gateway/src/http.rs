//! Chat-completions wire format over blocking HTTP.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::{CompletionRequest, Transport, TransportError};

pub const DEFAULT_PATH: &str = "/v1/chat/completions";

#[derive(Debug, Serialize)]
struct ChatMessage<'a> {
    role: &'static str,
    content: &'a str,
}

#[derive(Debug, Serialize)]
struct ChatBody<'a> {
    model: &'a str,
    messages: Vec<ChatMessage<'a>>,
    temperature: f64,
    max_tokens: u32,
}

#[derive(Debug, Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
}

#[derive(Debug, Deserialize)]
struct Choice {
    #[serde(default)]
    message: Option<ReplyMessage>,
    /// Plain completions servers put the text here instead.
    #[serde(default)]
    text: Option<String>,
}

#[derive(Debug, Deserialize)]
struct ReplyMessage {
    #[serde(default)]
    content: Option<String>,
}

/// JSON body sent for a request.
pub fn request_body(request: &CompletionRequest) -> serde_json::Value {
    serde_json::to_value(ChatBody {
        model: &request.model,
        messages: vec![ChatMessage {
            role: "user",
            content: &request.prompt,
        }],
        temperature: request.params.temperature,
        max_tokens: request.params.max_tokens,
    })
    .expect("body serializes")
}

/// Text of the first choice.
pub fn parse_response(body: &str) -> Result<String, TransportError> {
    let parsed: ChatResponse = serde_json::from_str(body).map_err(|e| TransportError::Decode(e.to_string()))?;
    let first = parsed
        .choices
        .into_iter()
        .next()
        .ok_or_else(|| TransportError::Decode("no choices".into()))?;
    first
        .message
        .and_then(|m| m.content)
        .or(first.text)
        .ok_or_else(|| TransportError::Decode("first choice has no text".into()))
}

pub struct HttpTransport {
    client: reqwest::blocking::Client,
    path: String,
    bearer: Option<String>,
}

impl HttpTransport {
    pub fn new(path: impl Into<String>, bearer: Option<String>) -> Result<Self, TransportError> {
        let client = reqwest::blocking::Client::builder()
            .build()
            .map_err(|e| TransportError::Connect(e.to_string()))?;
        Ok(Self {
            client,
            path: path.into(),
            bearer,
        })
    }
}

impl Transport for HttpTransport {
    fn send(&self, endpoint: &str, request: &CompletionRequest, timeout: Duration) -> Result<String, TransportError> {
        let url = format!("{}{}", endpoint.trim_end_matches('/'), self.path);
        let mut builder = self.client.post(url).timeout(timeout).json(&request_body(request));
        if let Some(token) = &self.bearer {
            builder = builder.bearer_auth(token);
        }
        let response = builder.send().map_err(classify)?;
        let status = response.status();
        let body = response.text().map_err(classify)?;
        if !status.is_success() {
            return Err(TransportError::Status {
                status: status.as_u16(),
                body: body.chars().take(200).collect(),
            });
        }
        parse_response(&body)
    }
}

fn classify(e: reqwest::Error) -> TransportError {
    if e.is_timeout() {
        TransportError::Timeout
    } else if e.is_decode() {
        TransportError::Decode(e.to_string())
    } else {
        TransportError::Connect(e.to_string())
    }
}
