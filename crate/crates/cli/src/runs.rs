//! Run directories: immutable, timestamped output folders.
//!
//! Every command writes into a fresh directory named
//! `{command}[-{label}]-{YYYYmmdd-HHMMSS}` (with `-2`, `-3`, ... on
//! collision). Existing run directories are never modified; re-running a
//! command always produces a new sibling, so prior results stay comparable.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::CliError;

/// Creates a fresh run directory under `parent` and returns its path.
pub fn create_run_dir(parent: &Path, command: &str, label: Option<&str>) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(parent)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", parent.display())))?;
    let stamp = chrono::Utc::now().format("%Y%m%d-%H%M%S");
    let stem = match label {
        Some(label) => format!("{command}-{}-{stamp}", sanitize(label)),
        None => format!("{command}-{stamp}"),
    };
    for attempt in 1u32..=1000 {
        let name = if attempt == 1 { stem.clone() } else { format!("{stem}-{attempt}") };
        let dir = parent.join(&name);
        match std::fs::create_dir(&dir) {
            Ok(()) => return Ok(dir),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => continue,
            Err(e) => {
                return Err(CliError::Io(format!("cannot create {}: {e}", dir.display())));
            }
        }
    }
    Err(CliError::Io(format!(
        "could not find a free run directory name under {}",
        parent.display()
    )))
}

fn sanitize(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '-' })
        .collect()
}

/// Serializes to pretty JSON with a trailing newline (stable for diffing).
pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    let mut body = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Io(format!("cannot serialize {name}: {e}")))?;
    body.push('\n');
    std::fs::write(&path, body)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

pub fn write_text(dir: &Path, name: &str, body: &str) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    std::fs::write(&path, body)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

/// Writes one JSON object per line.
pub fn write_jsonl<T: Serialize>(dir: &Path, name: &str, rows: &[T]) -> Result<PathBuf, CliError> {
    let mut body = String::new();
    for row in rows {
        let line = serde_json::to_string(row)
            .map_err(|e| CliError::Io(format!("cannot serialize a {name} row: {e}")))?;
        body.push_str(&line);
        body.push('\n');
    }
    write_text(dir, name, &body)
}
