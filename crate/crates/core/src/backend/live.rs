//! Live judge over the chat-completion HTTP wire format.
//!
//! Credentials come from the environment only: the API key is never read
//! from config files, never serialized, and never logged.

use std::thread;
use std::time::Duration;

use chrono::Utc;
use serde_json::{json, Value};

use super::{BackendError, CompletionSource, Judge, JudgeCompletion, JudgeRequest};

pub const ENV_API_KEY: &str = "PAIRJUDGE_API_KEY";
pub const ENV_API_BASE: &str = "PAIRJUDGE_API_BASE";
pub const ENV_API_ORG: &str = "PAIRJUDGE_API_ORG";

const FALLBACK_ENV_API_KEY: &str = "OPENAI_API_KEY";
const FALLBACK_ENV_API_BASE: &str = "OPENAI_BASE_URL";
const FALLBACK_ENV_API_ORG: &str = "OPENAI_ORG_ID";

const DEFAULT_BASE_URL: &str = "https://api.openai.com/v1";

/// Connection and retry settings for the live judge.
#[derive(Debug, Clone)]
pub struct LiveConfig {
    /// Endpoint base; `/chat/completions` is appended.
    pub base_url: String,
    pub timeout_secs: u64,
    /// Total HTTP attempts per request, including the first.
    pub attempts: u32,
    /// First backoff delay; doubles per retry.
    pub base_delay_ms: u64,
    /// Optional output token cap, recorded in run metadata.
    pub max_output_tokens: Option<u32>,
    pub organization: Option<String>,
}

impl Default for LiveConfig {
    fn default() -> Self {
        LiveConfig {
            base_url: DEFAULT_BASE_URL.to_string(),
            timeout_secs: 120,
            attempts: 5,
            base_delay_ms: 500,
            max_output_tokens: None,
            organization: None,
        }
    }
}

/// A judge that calls a chat-completion endpoint.
pub struct HttpJudge {
    config: LiveConfig,
    api_key: String,
    client: reqwest::blocking::Client,
}

impl HttpJudge {
    /// Builds a judge with an explicitly provided key (tests, embedding).
    pub fn new(config: LiveConfig, api_key: String) -> Result<Self, BackendError> {
        if api_key.is_empty() {
            return Err(BackendError::MissingCredential(format!("{ENV_API_KEY} or {FALLBACK_ENV_API_KEY}")));
        }
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(config.timeout_secs))
            .build()
            .map_err(|e| BackendError::Network(e.to_string()))?;
        Ok(HttpJudge { config, api_key, client })
    }

    /// Builds a judge from the environment. Base URL and organization fall
    /// back to env vars when the config leaves them unset.
    pub fn from_env(mut config: LiveConfig) -> Result<Self, BackendError> {
        let api_key = std::env::var(ENV_API_KEY)
            .or_else(|_| std::env::var(FALLBACK_ENV_API_KEY))
            .map_err(|_| BackendError::MissingCredential(format!("{ENV_API_KEY} or {FALLBACK_ENV_API_KEY}")))?;
        if config.base_url == DEFAULT_BASE_URL {
            if let Ok(base) = std::env::var(ENV_API_BASE).or_else(|_| std::env::var(FALLBACK_ENV_API_BASE)) {
                config.base_url = base;
            }
        }
        if config.organization.is_none() {
            config.organization = std::env::var(ENV_API_ORG)
                .or_else(|_| std::env::var(FALLBACK_ENV_API_ORG))
                .ok();
        }
        HttpJudge::new(config, api_key)
    }

    pub fn config(&self) -> &LiveConfig {
        &self.config
    }

    fn endpoint(&self) -> String {
        format!("{}/chat/completions", self.config.base_url.trim_end_matches('/'))
    }

    fn send_once(&self, request: &JudgeRequest) -> Result<String, AttemptError> {
        let mut body = json!({
            "model": request.judge_model,
            "messages": [{"role": "user", "content": request.prompt.text}],
            "temperature": request.temperature.to_f64(),
        });
        if let Some(max) = self.config.max_output_tokens {
            body["max_tokens"] = json!(max);
        }
        let mut http = self
            .client
            .post(self.endpoint())
            .bearer_auth(&self.api_key)
            .json(&body);
        if let Some(org) = &self.config.organization {
            http = http.header("OpenAI-Organization", org);
        }
        let response = http.send().map_err(|e| AttemptError::Retryable(format!("transport: {e}")))?;
        let status = response.status();
        let text = response
            .text()
            .map_err(|e| AttemptError::Retryable(format!("reading body: {e}")))?;
        if status.as_u16() == 401 || status.as_u16() == 403 {
            return Err(AttemptError::Fatal(BackendError::Auth { status: status.as_u16() }));
        }
        if status.as_u16() == 429 || status.is_server_error() || status.as_u16() == 408 {
            return Err(AttemptError::Retryable(format!("HTTP {}", status.as_u16())));
        }
        if !status.is_success() {
            return Err(AttemptError::Fatal(BackendError::Http {
                status: status.as_u16(),
                message: snippet(&text),
            }));
        }
        let value: Value = serde_json::from_str(&text)
            .map_err(|e| AttemptError::Fatal(BackendError::MalformedResponse(format!("not JSON: {e}"))))?;
        let content = value
            .get("choices")
            .and_then(|c| c.get(0))
            .and_then(|c| c.get("message"))
            .and_then(|m| m.get("content"))
            .and_then(|c| c.as_str());
        match content {
            Some(c) => Ok(c.to_string()),
            None => Err(AttemptError::Fatal(BackendError::MalformedResponse(
                "missing choices[0].message.content".to_string(),
            ))),
        }
    }
}

enum AttemptError {
    Retryable(String),
    Fatal(BackendError),
}

impl Judge for HttpJudge {
    fn complete(&self, request: &JudgeRequest) -> Result<JudgeCompletion, BackendError> {
        let attempts = self.config.attempts.max(1);
        let mut last = String::new();
        for attempt in 0..attempts {
            if attempt > 0 {
                let delay = self.config.base_delay_ms.saturating_mul(1u64 << (attempt - 1).min(6));
                thread::sleep(Duration::from_millis(delay));
            }
            match self.send_once(request) {
                Ok(raw) => {
                    return Ok(JudgeCompletion {
                        raw,
                        request_fingerprint: request.fingerprint(),
                        judge_model: request.judge_model.clone(),
                        created_at: Utc::now(),
                        source: CompletionSource::Live,
                    })
                }
                Err(AttemptError::Fatal(e)) => return Err(e),
                Err(AttemptError::Retryable(message)) => last = message,
            }
        }
        Err(BackendError::RetryBudgetExhausted { attempts, last })
    }

    fn backend_name(&self) -> &'static str {
        "live"
    }
}

fn snippet(text: &str) -> String {
    let trimmed = text.trim();
    if trimmed.len() <= 200 {
        trimmed.to_string()
    } else {
        let mut end = 200;
        while !trimmed.is_char_boundary(end) {
            end -= 1;
        }
        format!("{}…", &trimmed[..end])
    }
}
