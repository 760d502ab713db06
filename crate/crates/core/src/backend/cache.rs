//! Append-only completion cache and the judges built on top of it.
//!
//! One JSONL file per judge model. Records are keyed by request fingerprint;
//! the first record written for a fingerprint wins, later duplicates are
//! ignored (and flagged by `verify` when their raw text disagrees).

use std::collections::BTreeMap;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

use super::{BackendError, CompletionSource, Judge, JudgeCompletion, JudgeRequest};
use crate::templates::sha256_hex;

/// One cached completion, as stored on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheRecord {
    pub fingerprint: String,
    pub judge_model: String,
    pub temperature: f64,
    pub sample_index: u32,
    pub prompt_sha256: String,
    pub raw: String,
    pub created_at: String,
}

struct CacheInner {
    records: BTreeMap<String, CacheRecord>,
    /// Fingerprints whose later duplicates disagreed with the first record.
    conflicts: Vec<String>,
}

/// A directory of JSONL cache files with an in-memory index.
pub struct CompletionCache {
    dir: PathBuf,
    inner: Mutex<CacheInner>,
}

impl CompletionCache {
    /// Opens (creating if needed) a cache directory and indexes every
    /// `*.jsonl` file in it.
    pub fn open(dir: &Path) -> Result<Self, BackendError> {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, &e))?;
        let mut records = BTreeMap::new();
        let mut conflicts = Vec::new();
        let mut paths: Vec<PathBuf> = fs::read_dir(dir)
            .map_err(|e| io_err(dir, &e))?
            .filter_map(|entry| entry.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|e| e == "jsonl"))
            .collect();
        paths.sort();
        for path in paths {
            let text = fs::read_to_string(&path).map_err(|e| io_err(&path, &e))?;
            for line in text.lines().filter(|l| !l.trim().is_empty()) {
                let record: CacheRecord = serde_json::from_str(line).map_err(|e| {
                    BackendError::CacheIo {
                        path: path.display().to_string(),
                        message: format!("bad cache line: {e}"),
                    }
                })?;
                match records.get(&record.fingerprint) {
                    None => {
                        records.insert(record.fingerprint.clone(), record);
                    }
                    Some(existing) if existing.raw != record.raw => {
                        conflicts.push(record.fingerprint.clone());
                    }
                    Some(_) => {}
                }
            }
        }
        Ok(CompletionCache { dir: dir.to_path_buf(), inner: Mutex::new(CacheInner { records, conflicts }) })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn len(&self) -> usize {
        self.inner.lock().unwrap().records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, fingerprint: &str) -> Option<CacheRecord> {
        self.inner.lock().unwrap().records.get(fingerprint).cloned()
    }

    /// Appends a completion for `request` unless its fingerprint is already
    /// cached. Write-through is atomic per line under the index lock.
    pub fn record(&self, request: &JudgeRequest, completion: &JudgeCompletion) -> Result<(), BackendError> {
        let record = CacheRecord {
            fingerprint: completion.request_fingerprint.clone(),
            judge_model: request.judge_model.clone(),
            temperature: request.temperature.to_f64(),
            sample_index: request.sample_index,
            prompt_sha256: sha256_hex(request.prompt.text.as_bytes()),
            raw: completion.raw.clone(),
            created_at: completion.created_at.to_rfc3339_opts(SecondsFormat::Millis, true),
        };
        let mut inner = self.inner.lock().unwrap();
        if inner.records.contains_key(&record.fingerprint) {
            return Ok(());
        }
        let path = self.file_for(&request.judge_model);
        let mut line = serde_json::to_string(&record)
            .map_err(|e| BackendError::CacheIo { path: path.display().to_string(), message: e.to_string() })?;
        line.push('\n');
        let mut file = fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(|e| io_err(&path, &e))?;
        file.write_all(line.as_bytes()).map_err(|e| io_err(&path, &e))?;
        inner.records.insert(record.fingerprint.clone(), record);
        Ok(())
    }

    /// All records, fingerprint-ordered.
    pub fn records(&self) -> Vec<CacheRecord> {
        self.inner.lock().unwrap().records.values().cloned().collect()
    }

    /// Consistency report: duplicate conflicts and malformed fields.
    pub fn verify(&self) -> CacheVerifyReport {
        let inner = self.inner.lock().unwrap();
        let mut errors = Vec::new();
        for record in inner.records.values() {
            if record.fingerprint.len() != 64 || !record.fingerprint.bytes().all(|b| b.is_ascii_hexdigit()) {
                errors.push(format!("fingerprint {:?} is not 64 hex chars", record.fingerprint));
            }
            if record.prompt_sha256.len() != 64 || !record.prompt_sha256.bytes().all(|b| b.is_ascii_hexdigit()) {
                errors.push(format!("record {}: prompt_sha256 is not 64 hex chars", short(&record.fingerprint)));
            }
            if !(0.0..=2.0).contains(&record.temperature) {
                errors.push(format!("record {}: temperature {} out of range", short(&record.fingerprint), record.temperature));
            }
            if record.judge_model.is_empty() {
                errors.push(format!("record {}: empty judge_model", short(&record.fingerprint)));
            }
            if DateTime::parse_from_rfc3339(&record.created_at).is_err() {
                errors.push(format!("record {}: created_at {:?} is not RFC 3339", short(&record.fingerprint), record.created_at));
            }
        }
        for fp in &inner.conflicts {
            errors.push(format!("fingerprint {} has duplicate records with different raw text", short(fp)));
        }
        CacheVerifyReport { records: inner.records.len(), conflicting_duplicates: inner.conflicts.len(), errors }
    }

    fn file_for(&self, judge_model: &str) -> PathBuf {
        let safe: String = judge_model
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-') { c } else { '_' })
            .collect();
        self.dir.join(format!("{safe}.jsonl"))
    }
}

fn io_err(path: &Path, e: &std::io::Error) -> BackendError {
    BackendError::CacheIo { path: path.display().to_string(), message: e.to_string() }
}

fn short(fp: &str) -> &str {
    &fp[..fp.len().min(12)]
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CacheVerifyReport {
    pub records: usize,
    pub conflicting_duplicates: usize,
    pub errors: Vec<String>,
}

impl CacheVerifyReport {
    pub fn is_clean(&self) -> bool {
        self.errors.is_empty()
    }
}

/// Serves completions from the cache only; a miss is an error naming the
/// missing fingerprint so the caller knows exactly which request was never
/// recorded.
pub struct ReplayJudge {
    cache: CompletionCache,
}

impl ReplayJudge {
    pub fn open(dir: &Path) -> Result<Self, BackendError> {
        Ok(ReplayJudge { cache: CompletionCache::open(dir)? })
    }

    pub fn cache(&self) -> &CompletionCache {
        &self.cache
    }
}

impl Judge for ReplayJudge {
    fn complete(&self, request: &JudgeRequest) -> Result<JudgeCompletion, BackendError> {
        let fingerprint = request.fingerprint();
        let record = self.cache.get(&fingerprint).ok_or_else(|| BackendError::CacheMiss {
            fingerprint: fingerprint.clone(),
            judge_model: request.judge_model.clone(),
            sample_index: request.sample_index,
        })?;
        Ok(JudgeCompletion {
            raw: record.raw,
            request_fingerprint: fingerprint,
            judge_model: record.judge_model,
            created_at: DateTime::parse_from_rfc3339(&record.created_at)
                .map(|t| t.with_timezone(&Utc))
                .unwrap_or_else(|_| Utc::now()),
            source: CompletionSource::Cache,
        })
    }

    fn backend_name(&self) -> &'static str {
        "replay"
    }
}

/// Write-through wrapper: serves cache hits, forwards misses to the inner
/// judge and records every completion it obtains, parseable or not.
pub struct RecordingJudge<J> {
    inner: J,
    cache: CompletionCache,
}

impl<J: Judge> RecordingJudge<J> {
    pub fn new(inner: J, cache: CompletionCache) -> Self {
        RecordingJudge { inner, cache }
    }

    pub fn cache(&self) -> &CompletionCache {
        &self.cache
    }
}

impl<J: Judge> Judge for RecordingJudge<J> {
    fn complete(&self, request: &JudgeRequest) -> Result<JudgeCompletion, BackendError> {
        let fingerprint = request.fingerprint();
        if let Some(record) = self.cache.get(&fingerprint) {
            return Ok(JudgeCompletion {
                raw: record.raw,
                request_fingerprint: fingerprint,
                judge_model: record.judge_model,
                created_at: DateTime::parse_from_rfc3339(&record.created_at)
                    .map(|t| t.with_timezone(&Utc))
                    .unwrap_or_else(|_| Utc::now()),
                source: CompletionSource::Cache,
            });
        }
        let completion = self.inner.complete(request)?;
        self.cache.record(request, &completion)?;
        Ok(completion)
    }

    fn backend_name(&self) -> &'static str {
        self.inner.backend_name()
    }
}
