//! `cache`: inspect and verify the completion cache.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use pairjudge_core::{CacheVerifyReport, CompletionCache};

use crate::CliError;

/// Re-hashes every record and checks fingerprint integrity.
///
/// Returns the report; a dirty cache is the caller's error to surface.
pub fn run_cache_verify(dir: &Path) -> Result<CacheVerifyReport, CliError> {
    let cache = CompletionCache::open(dir)?;
    Ok(cache.verify())
}

/// Renders a human-readable cache listing: totals per judge model and
/// temperature, then one line per record in fingerprint order.
pub fn run_cache_inspect(dir: &Path) -> Result<String, CliError> {
    let cache = CompletionCache::open(dir)?;
    let mut records = cache.records();
    records.sort_by(|a, b| a.fingerprint.cmp(&b.fingerprint));

    let mut by_model: BTreeMap<String, usize> = BTreeMap::new();
    for record in &records {
        *by_model.entry(record.judge_model.clone()).or_default() += 1;
    }

    let mut out = String::new();
    let _ = writeln!(out, "cache: {}", dir.display());
    let _ = writeln!(out, "records: {}", records.len());
    for (model, count) in &by_model {
        let _ = writeln!(out, "  {model}: {count}");
    }
    if !records.is_empty() {
        let _ = writeln!(out);
        let _ = writeln!(out, "fingerprint  judge_model  temp  sample  created_at");
    }
    for record in &records {
        let _ = writeln!(
            out,
            "{}  {}  {}  {}  {}",
            &record.fingerprint[..16.min(record.fingerprint.len())],
            record.judge_model,
            record.temperature,
            record.sample_index,
            record.created_at,
        );
    }
    Ok(out)
}
