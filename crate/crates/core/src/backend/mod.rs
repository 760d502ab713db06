//! Judge backends: the request/completion contract shared by the live HTTP
//! client, the replay cache, and the synthetic judge.
//!
//! Every request has a stable fingerprint over (judge model, prompt bytes,
//! temperature, sample index). The fingerprint keys the completion cache, so
//! identical requests are never paid for twice and replayed runs are exact.

mod cache;
mod live;
mod synthetic;

pub use cache::{CacheRecord, CacheVerifyReport, CompletionCache, RecordingJudge, ReplayJudge};
pub use live::{HttpJudge, LiveConfig, ENV_API_BASE, ENV_API_KEY, ENV_API_ORG};
pub use synthetic::{SyntheticJudge, SyntheticJudgeSpec};

use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::templates::RenderedPrompt;

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("missing credential: set {0}")]
    MissingCredential(String),
    #[error("authentication rejected (HTTP {status})")]
    Auth { status: u16 },
    #[error("HTTP {status} from judge endpoint: {message}")]
    Http { status: u16, message: String },
    #[error("network error talking to judge endpoint: {0}")]
    Network(String),
    #[error("retry budget exhausted after {attempts} attempts: {last}")]
    RetryBudgetExhausted { attempts: u32, last: String },
    #[error("malformed completion payload: {0}")]
    MalformedResponse(String),
    #[error("cache miss for fingerprint {fingerprint} (judge {judge_model}, sample {sample_index})")]
    CacheMiss { fingerprint: String, judge_model: String, sample_index: u32 },
    #[error("cache I/O error at {path}: {message}")]
    CacheIo { path: String, message: String },
    #[error("invalid request: {0}")]
    InvalidRequest(String),
}

/// Sampling temperature in [0, 2], held as exact hundredths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Temperature(u32);

impl Temperature {
    pub const ZERO: Temperature = Temperature(0);
    pub const ONE: Temperature = Temperature(100);

    pub fn from_hundredths(h: u32) -> Result<Self, BackendError> {
        if h > 200 {
            return Err(BackendError::InvalidRequest(format!(
                "temperature {} is outside [0, 2]",
                h as f64 / 100.0
            )));
        }
        Ok(Temperature(h))
    }

    /// Accepts a decimal with at most two fractional digits.
    pub fn from_f64(v: f64) -> Result<Self, BackendError> {
        if !v.is_finite() || v < 0.0 {
            return Err(BackendError::InvalidRequest(format!("temperature {v} is invalid")));
        }
        let scaled = v * 100.0;
        let rounded = scaled.round();
        if (scaled - rounded).abs() > 1e-6 {
            return Err(BackendError::InvalidRequest(format!(
                "temperature {v} has more than two fractional digits"
            )));
        }
        Temperature::from_hundredths(rounded as u32)
    }

    pub fn hundredths(self) -> u32 {
        self.0
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / 100.0
    }
}

impl fmt::Display for Temperature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (int, frac) = (self.0 / 100, self.0 % 100);
        if frac == 0 {
            write!(f, "{int}")
        } else if frac % 10 == 0 {
            write!(f, "{int}.{}", frac / 10)
        } else {
            write!(f, "{int}.{frac:02}")
        }
    }
}

impl FromStr for Temperature {
    type Err = BackendError;

    fn from_str(s: &str) -> Result<Self, BackendError> {
        let v: f64 = s
            .parse()
            .map_err(|_| BackendError::InvalidRequest(format!("not a temperature: {s:?}")))?;
        Temperature::from_f64(v)
    }
}

impl Serialize for Temperature {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Temperature {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(de::Error::custom)
    }
}

/// One judge call: a rendered prompt plus sampling parameters.
///
/// `sample_index` distinguishes the k evidence chains of one cell; it is part
/// of the fingerprint, so chains are cached independently and a sweep over k
/// reuses the chains it already has.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JudgeRequest {
    pub prompt: RenderedPrompt,
    pub temperature: Temperature,
    pub sample_index: u32,
    pub judge_model: String,
}

impl JudgeRequest {
    pub fn fingerprint(&self) -> String {
        fingerprint(&self.judge_model, self.temperature, self.sample_index, self.prompt.text.as_bytes())
    }
}

/// Stable request fingerprint: sha256 over length-prefixed fields.
pub fn fingerprint(judge_model: &str, temperature: Temperature, sample_index: u32, prompt: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(b"pairjudge.request.v1\0");
    h.update((judge_model.len() as u64).to_le_bytes());
    h.update(judge_model.as_bytes());
    h.update(temperature.hundredths().to_le_bytes());
    h.update(sample_index.to_le_bytes());
    h.update((prompt.len() as u64).to_le_bytes());
    h.update(prompt);
    hex::encode(h.finalize())
}

/// Where a completion came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompletionSource {
    Live,
    Cache,
    Synthetic,
}

/// A raw judge completion, byte-exact, with provenance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JudgeCompletion {
    pub raw: String,
    pub request_fingerprint: String,
    pub judge_model: String,
    pub created_at: DateTime<Utc>,
    pub source: CompletionSource,
}

/// A judge backend. Implementations must be safe to share across the
/// request fan-out threads.
pub trait Judge: Send + Sync {
    fn complete(&self, request: &JudgeRequest) -> Result<JudgeCompletion, BackendError>;

    /// Short backend label for logs and reports.
    fn backend_name(&self) -> &'static str;
}
