//! Dataset loading: questions, per-model answers, and optional human
//! annotations, all as JSON Lines with strict validation.
//!
//! Line numbers are reported on every parse error so a bad record in a large
//! file is easy to find. File hashes are captured at load time and recorded
//! with each run, so a run directory states exactly which inputs produced it.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use pairjudge_core::{HumanAnnotation, ModelVerdict, Question, ResponsePair};

use crate::config::DatasetConfig;
use crate::CliError;

/// A file path plus the SHA-256 of its bytes at load time.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct FileHash {
    pub path: String,
    pub sha256: String,
}

pub fn sha256_file(path: &Path) -> Result<String, CliError> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::Dataset(format!("cannot read {}: {e}", path.display())))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn file_hash(path: &Path) -> Result<FileHash, CliError> {
    Ok(FileHash {
        path: path.display().to_string(),
        sha256: sha256_file(path)?,
    })
}

/// One answer record: `{"question_id": ..., "model": ..., "text": ...}`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct AnswerRecord {
    question_id: String,
    model: String,
    text: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct QuestionRecord {
    id: String,
    category: String,
    text: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct AnnotationRecord {
    question_id: String,
    annotator_id: String,
    verdict: String,
}

/// Everything a run needs, loaded and cross-checked.
#[derive(Debug, Clone)]
pub struct LoadedDataset {
    /// One (question, answer pair) per question, in input order.
    pub items: Vec<(Question, ResponsePair)>,
    pub annotations: Vec<HumanAnnotation>,
    pub model_a: String,
    pub model_b: String,
    pub questions_hash: FileHash,
    pub answers_hashes: Vec<FileHash>,
    pub annotations_hash: Option<FileHash>,
}

impl LoadedDataset {
    pub fn input_hashes(&self) -> Vec<FileHash> {
        let mut hashes = vec![self.questions_hash.clone()];
        hashes.extend(self.answers_hashes.iter().cloned());
        hashes.extend(self.annotations_hash.iter().cloned());
        hashes
    }
}

fn parse_jsonl<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Dataset(format!("cannot read {}: {e}", path.display())))?;
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(line).map_err(|e| {
            CliError::Dataset(format!("{}:{}: {e}", path.display(), i + 1))
        })?;
        records.push(record);
    }
    Ok(records)
}

fn load_questions(path: &Path) -> Result<Vec<Question>, CliError> {
    let records: Vec<QuestionRecord> = parse_jsonl(path)?;
    if records.is_empty() {
        return Err(CliError::Dataset(format!("{}: no questions", path.display())));
    }
    let mut seen = BTreeSet::new();
    let mut questions = Vec::with_capacity(records.len());
    for record in records {
        if !seen.insert(record.id.clone()) {
            return Err(CliError::Dataset(format!(
                "{}: duplicate question id {:?}",
                path.display(),
                record.id
            )));
        }
        let question = Question::new(record.id, record.category, record.text)
            .map_err(|e| CliError::Dataset(format!("{}: {e}", path.display())))?;
        questions.push(question);
    }
    Ok(questions)
}

/// Answer texts keyed by model, then by question id.
type AnswersByModel = BTreeMap<String, BTreeMap<String, String>>;

/// Loads answers from one or more files and checks that, across all files,
/// exactly two distinct models appear and each answers every question once.
fn load_answers(
    paths: &[PathBuf],
    questions: &[Question],
) -> Result<(AnswersByModel, Vec<String>), CliError> {
    let question_ids: BTreeSet<&str> = questions.iter().map(|q| q.id.as_str()).collect();
    let mut by_model: AnswersByModel = BTreeMap::new();
    for path in paths {
        let records: Vec<AnswerRecord> = parse_jsonl(path)?;
        for record in records {
            if !question_ids.contains(record.question_id.as_str()) {
                return Err(CliError::Dataset(format!(
                    "{}: answer references unknown question {:?}",
                    path.display(),
                    record.question_id
                )));
            }
            if record.model.is_empty() {
                return Err(CliError::Dataset(format!("{}: empty model name", path.display())));
            }
            let slot = by_model.entry(record.model.clone()).or_default();
            if slot.insert(record.question_id.clone(), record.text).is_some() {
                return Err(CliError::Dataset(format!(
                    "{}: duplicate answer from {:?} for question {:?}",
                    path.display(),
                    record.model,
                    record.question_id
                )));
            }
        }
    }

    let models: Vec<String> = by_model.keys().cloned().collect();
    if models.len() != 2 {
        return Err(CliError::Dataset(format!(
            "expected answers from exactly two models, found {}: {}",
            models.len(),
            if models.is_empty() { "(none)".to_string() } else { models.join(", ") }
        )));
    }
    for model in &models {
        let answered = &by_model[model];
        for question in questions {
            if !answered.contains_key(&question.id) {
                return Err(CliError::Dataset(format!(
                    "model {:?} has no answer for question {:?}",
                    model, question.id
                )));
            }
        }
    }
    Ok((by_model, models))
}

/// Loads an annotations file, checking ids against the known question set.
pub fn load_annotations_file(
    path: &Path,
    question_ids: &BTreeSet<&str>,
) -> Result<Vec<HumanAnnotation>, CliError> {
    let records: Vec<AnnotationRecord> = parse_jsonl(path)?;
    let mut seen = BTreeSet::new();
    let mut annotations = Vec::with_capacity(records.len());
    for record in records {
        if !question_ids.contains(record.question_id.as_str()) {
            return Err(CliError::Dataset(format!(
                "{}: annotation references unknown question {:?}",
                path.display(),
                record.question_id
            )));
        }
        let verdict = match record.verdict.as_str() {
            "model_a" => ModelVerdict::ModelAWins,
            "model_b" => ModelVerdict::ModelBWins,
            "tie" => ModelVerdict::Tie,
            other => {
                return Err(CliError::Dataset(format!(
                    "{}: annotation verdict {:?} for question {:?}; expected model_a, model_b, or tie",
                    path.display(),
                    other,
                    record.question_id
                )))
            }
        };
        if !seen.insert((record.question_id.clone(), record.annotator_id.clone())) {
            return Err(CliError::Dataset(format!(
                "{}: annotator {:?} labels question {:?} twice",
                path.display(),
                record.annotator_id,
                record.question_id
            )));
        }
        annotations.push(HumanAnnotation {
            question_id: record.question_id,
            annotator_id: record.annotator_id,
            verdict,
        });
    }
    Ok(annotations)
}

/// Loads the full dataset named by a config.
///
/// All input files are read and validated before any judging starts, so a
/// malformed dataset fails the run up front rather than mid-flight.
pub fn load(config: &DatasetConfig) -> Result<LoadedDataset, CliError> {
    let questions = load_questions(&config.questions)?;
    let (by_model, models) = load_answers(&config.answers, &questions)?;

    // Model A/B assignment: explicit config wins, otherwise lexicographic.
    let (model_a, model_b) = match (&config.model_a, &config.model_b) {
        (None, None) => (models[0].clone(), models[1].clone()),
        (a, b) => {
            let a = a.clone().unwrap_or_else(|| {
                models.iter().find(|m| Some(*m) != b.as_ref()).unwrap().clone()
            });
            let b = b.clone().unwrap_or_else(|| {
                models.iter().find(|m| **m != a).unwrap().clone()
            });
            for name in [&a, &b] {
                if !by_model.contains_key(name) {
                    return Err(CliError::Dataset(format!(
                        "configured model {name:?} not found in answers; dataset has {}",
                        models.join(", ")
                    )));
                }
            }
            if a == b {
                return Err(CliError::Dataset("model_a and model_b must differ".into()));
            }
            (a, b)
        }
    };

    let items: Vec<(Question, ResponsePair)> = questions
        .iter()
        .map(|q| {
            let pair = ResponsePair::new(
                q.id.clone(),
                model_a.clone(),
                by_model[&model_a][&q.id].clone(),
                model_b.clone(),
                by_model[&model_b][&q.id].clone(),
            )
            .map_err(|e| CliError::Dataset(e.to_string()))?;
            Ok((q.clone(), pair))
        })
        .collect::<Result<_, CliError>>()?;

    let question_ids: BTreeSet<&str> = questions.iter().map(|q| q.id.as_str()).collect();
    let annotations = match &config.annotations {
        Some(path) => load_annotations_file(path, &question_ids)?,
        None => Vec::new(),
    };

    Ok(LoadedDataset {
        items,
        annotations,
        model_a,
        model_b,
        questions_hash: file_hash(&config.questions)?,
        answers_hashes: config
            .answers
            .iter()
            .map(|p| file_hash(p))
            .collect::<Result<_, _>>()?,
        annotations_hash: config.annotations.as_ref().map(|p| file_hash(p)).transpose()?,
    })
}
