//! Vision-chat backends: the scripted mock and the HTTP client.

use std::fs;
use std::path::Path;
use std::sync::Mutex;
use std::time::Duration;

use base64::Engine as _;
use serde_json::{json, Value};

use crate::error::{Error, Result};

/// One request to a vision-chat backend: a system text, a user text, and an
/// ordered list of PNG-encoded images.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChatRequest {
    pub system_text: String,
    pub user_text: String,
    pub images: Vec<Vec<u8>>,
}

/// A vision-capable chat endpoint. Implementations must tolerate concurrent
/// `complete` calls.
pub trait VisionChatBackend: Send + Sync {
    fn complete(&self, request: &ChatRequest) -> Result<String>;
}

struct MockState {
    replies: Vec<String>,
    next: usize,
    recorded: Vec<ChatRequest>,
}

/// Scripted backend: replays a fixed list of reply texts in order and records
/// every request it sees. Exhausting the script is a backend error.
pub struct MockBackend {
    state: Mutex<MockState>,
}

impl MockBackend {
    pub fn from_replies<I, S>(replies: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            state: Mutex::new(MockState {
                replies: replies.into_iter().map(Into::into).collect(),
                next: 0,
                recorded: Vec::new(),
            }),
        }
    }

    /// Loads a script file: a JSON array of reply strings.
    pub fn from_script_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Backend(format!("cannot read mock script {path:?}: {e}")))?;
        let replies: Vec<String> = serde_json::from_str(&text)
            .map_err(|e| Error::Backend(format!("mock script {path:?} is not a JSON array of strings: {e}")))?;
        Ok(Self::from_replies(replies))
    }

    /// Requests seen so far, in order.
    pub fn recorded_requests(&self) -> Vec<ChatRequest> {
        self.state.lock().expect("mock lock").recorded.clone()
    }

    pub fn replies_consumed(&self) -> usize {
        self.state.lock().expect("mock lock").next
    }
}

impl VisionChatBackend for MockBackend {
    fn complete(&self, request: &ChatRequest) -> Result<String> {
        let mut state = self.state.lock().expect("mock lock");
        state.recorded.push(request.clone());
        let i = state.next;
        if i >= state.replies.len() {
            return Err(Error::Backend(format!(
                "mock script exhausted after {} replies",
                state.replies.len()
            )));
        }
        state.next += 1;
        Ok(state.replies[i].clone())
    }
}

/// Connection settings for [`HttpBackend`].
#[derive(Debug, Clone)]
pub struct HttpConfig {
    /// Full URL of the chat-completions endpoint.
    pub endpoint: String,
    pub model: String,
    pub timeout: Duration,
    /// 0 keeps runs reproducible.
    pub temperature: f64,
    /// Transport retries after the first attempt.
    pub max_retries: u32,
    pub bearer_token: Option<String>,
}

/// Environment variable the CLI reads the bearer token from.
pub const TOKEN_ENV_VAR: &str = "AFFORD3D_API_TOKEN";

impl HttpConfig {
    pub fn new(endpoint: impl Into<String>, model: impl Into<String>) -> Self {
        Self {
            endpoint: endpoint.into(),
            model: model.into(),
            timeout: Duration::from_secs(120),
            temperature: 0.0,
            max_retries: 2,
            bearer_token: std::env::var(TOKEN_ENV_VAR).ok(),
        }
    }
}

/// Chat-completions client with base64 PNG image attachments.
pub struct HttpBackend {
    config: HttpConfig,
    client: reqwest::blocking::Client,
}

impl HttpBackend {
    pub fn new(config: HttpConfig) -> Result<Self> {
        let client = reqwest::blocking::Client::builder()
            .timeout(config.timeout)
            .build()
            .map_err(|e| Error::Backend(format!("cannot build HTTP client: {e}")))?;
        Ok(Self { config, client })
    }

    fn payload(&self, request: &ChatRequest) -> Value {
        let mut content = vec![json!({"type": "text", "text": request.user_text})];
        for png in &request.images {
            let b64 = base64::engine::general_purpose::STANDARD.encode(png);
            content.push(json!({
                "type": "image_url",
                "image_url": {"url": format!("data:image/png;base64,{b64}")}
            }));
        }
        json!({
            "model": self.config.model,
            "temperature": self.config.temperature,
            "messages": [
                {"role": "system", "content": request.system_text},
                {"role": "user", "content": content},
            ],
        })
    }

    fn attempt(&self, body: &Value) -> std::result::Result<String, (String, bool)> {
        let mut req = self
            .client
            .post(&self.config.endpoint)
            .header("Content-Type", "application/json");
        if let Some(token) = &self.config.bearer_token {
            req = req.header("Authorization", format!("Bearer {token}"));
        }
        let response = req
            .body(body.to_string())
            .send()
            .map_err(|e| (format!("transport: {e}"), true))?;

        let status = response.status();
        let text = response
            .text()
            .map_err(|e| (format!("reading body: {e}"), true))?;
        if !status.is_success() {
            // Server-side trouble is worth retrying; client errors are not.
            return Err((format!("HTTP {status}: {text}"), status.is_server_error()));
        }
        let value: Value = serde_json::from_str(&text)
            .map_err(|e| (format!("response is not JSON: {e}"), false))?;
        value["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_owned)
            .ok_or_else(|| {
                (
                    "response carries no choices[0].message.content string".to_string(),
                    false,
                )
            })
    }
}

impl VisionChatBackend for HttpBackend {
    fn complete(&self, request: &ChatRequest) -> Result<String> {
        let body = self.payload(request);
        let mut last = String::new();
        for attempt in 0..=self.config.max_retries {
            if attempt > 0 {
                std::thread::sleep(Duration::from_millis(200 * (1 << (attempt - 1))));
            }
            match self.attempt(&body) {
                Ok(text) => return Ok(text),
                Err((why, retryable)) => {
                    last = why;
                    if !retryable {
                        break;
                    }
                }
            }
        }
        Err(Error::Backend(format!(
            "{} after retries: {last}",
            self.config.endpoint
        )))
    }
}
