//! `agreement`: score an existing evaluation run against human annotations.
//!
//! The input is a run directory written by `evaluate`. Its per-question
//! records and summary are re-read; nothing is re-judged and the source run
//! is never modified — results land in a fresh sibling run directory.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use pairjudge_core::{
    agreement, category_breakdown, collapse_annotations, majority_vote, HumanAnnotation,
    ModelVerdict,
};

use crate::config::BackendKind;
use crate::dataset::{load_annotations_file, sha256_file, FileHash};
use crate::report::{
    read_question_rows, render_agreement_report, AgreementRow, AgreementSummary, ConfigRecord,
    EvaluateSummary,
};
use crate::runs::{create_run_dir, write_json, write_text};
use crate::CliError;

pub struct AgreementOutcome {
    pub run_dir: PathBuf,
    pub summary: AgreementSummary,
    pub warnings: Vec<String>,
}

fn read_source_summary(run_dir: &Path) -> Result<EvaluateSummary, CliError> {
    let path = run_dir.join("summary.json");
    let text = std::fs::read_to_string(&path).map_err(|e| {
        CliError::Usage(format!(
            "{} is not an evaluation run directory ({}: {e})",
            run_dir.display(),
            path.display()
        ))
    })?;
    let summary: EvaluateSummary = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    if summary.command != "evaluate" {
        return Err(CliError::Usage(format!(
            "{} holds a {:?} run; agreement needs an evaluate run",
            run_dir.display(),
            summary.command
        )));
    }
    Ok(summary)
}

/// Scores one evaluation run against an annotations file.
///
/// `out_dir` defaults to the source run's parent, so the agreement run lands
/// beside the evaluation it scores.
pub fn run_agreement(
    run_dir: &Path,
    annotations_path: &Path,
    out_dir: Option<&Path>,
) -> Result<AgreementOutcome, CliError> {
    let source_summary = read_source_summary(run_dir)?;
    let rows = read_question_rows(&run_dir.join("per_question.jsonl"))?;
    if rows.is_empty() {
        return Err(CliError::Usage(format!(
            "{} has an empty per_question.jsonl",
            run_dir.display()
        )));
    }

    let question_ids: BTreeSet<&str> = rows.iter().map(|r| r.question_id.as_str()).collect();
    let annotations = load_annotations_file(annotations_path, &question_ids)?;
    if annotations.is_empty() {
        return Err(CliError::Dataset(format!(
            "{} holds no annotations for this run's questions",
            annotations_path.display()
        )));
    }
    let gold: BTreeMap<String, ModelVerdict> = collapse_annotations(&annotations);

    // The judge against gold, on questions with both a verdict and gold.
    let mut method = Vec::new();
    let mut truth = Vec::new();
    let mut category_rows = Vec::new();
    let mut missing_annotations = Vec::new();
    let mut judge_failures = 0usize;
    for row in &rows {
        match (row.verdict, gold.get(&row.question_id)) {
            (Some(verdict), Some(gold_verdict)) => {
                method.push(verdict);
                truth.push(*gold_verdict);
                category_rows.push((row.category.clone(), verdict, *gold_verdict));
            }
            (Some(_), None) => missing_annotations.push(row.question_id.clone()),
            (None, Some(_)) => judge_failures += 1,
            (None, None) => missing_annotations.push(row.question_id.clone()),
        }
    }
    if method.is_empty() {
        return Err(CliError::Dataset(
            "no questions have both a judge verdict and annotations".into(),
        ));
    }

    // Each annotator against the majority of all annotators, per the same
    // gold map, over the questions that annotator labeled.
    let mut by_annotator: BTreeMap<String, Vec<&HumanAnnotation>> = BTreeMap::new();
    for annotation in &annotations {
        by_annotator.entry(annotation.annotator_id.clone()).or_default().push(annotation);
    }
    let mut agreement_rows = Vec::new();
    for (annotator, labelled) in &by_annotator {
        let mut m = Vec::with_capacity(labelled.len());
        let mut g = Vec::with_capacity(labelled.len());
        for annotation in labelled {
            m.push(annotation.verdict);
            g.push(gold[&annotation.question_id]);
        }
        let stats = agreement(&m, &g)
            .map_err(|e| CliError::Dataset(format!("annotator {annotator}: {e}")))?;
        agreement_rows.push(AgreementRow::from_stats(annotator, "vs. majority", &stats));
    }

    let judge_stats =
        agreement(&method, &truth).map_err(|e| CliError::Dataset(e.to_string()))?;
    let judge_method = format!("{} (k = {})", source_summary.strategy_name, source_summary.k);
    agreement_rows.push(AgreementRow::from_stats(
        &source_summary.judge_model,
        &judge_method,
        &judge_stats,
    ));

    let categories: BTreeMap<String, AgreementRow> = category_breakdown(&category_rows)
        .iter()
        .map(|(category, stats)| {
            (
                category.clone(),
                AgreementRow::from_stats(&source_summary.judge_model, &judge_method, stats),
            )
        })
        .collect();

    let mut inputs = vec![FileHash {
        path: annotations_path.display().to_string(),
        sha256: sha256_file(annotations_path)?,
    }];
    inputs.extend(source_summary.inputs.iter().cloned());

    let summary = AgreementSummary {
        command: "agreement".to_string(),
        judge_model: source_summary.judge_model.clone(),
        strategy: source_summary.strategy.clone(),
        k: source_summary.k,
        model_a: source_summary.model_a.clone(),
        model_b: source_summary.model_b.clone(),
        gold: "majority vote over all annotators; no strict majority is a tie".to_string(),
        annotators: by_annotator.keys().cloned().collect(),
        n: judge_stats.n,
        judge_failures,
        missing_annotations: missing_annotations.clone(),
        rows: agreement_rows,
        categories,
        evaluation_sha256: sha256_file(&run_dir.join("per_question.jsonl"))?,
        inputs,
    };
    let report = render_agreement_report(&summary);

    let mut provenance = ConfigRecord::new("agreement", BackendKind::Replay, &summary.judge_model);
    provenance.backend = "none".to_string();
    provenance.inputs = summary.inputs.clone();
    provenance.source_run = Some(run_dir.display().to_string());

    let parent = out_dir
        .map(PathBuf::from)
        .or_else(|| run_dir.parent().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    let new_dir = create_run_dir(&parent, "agreement", None)?;
    write_json(&new_dir, "summary.json", &summary)?;
    write_text(&new_dir, "report.md", &report)?;
    write_json(&new_dir, "config.json", &provenance)?;

    let mut warnings = Vec::new();
    if !missing_annotations.is_empty() {
        warnings.push(format!(
            "{} questions had no annotations and were excluded: {}",
            missing_annotations.len(),
            missing_annotations.join(", ")
        ));
    }
    if judge_failures > 0 {
        warnings.push(format!(
            "{judge_failures} annotated questions had no judge verdict and were excluded"
        ));
    }

    // Sanity: the gold map agrees with a direct majority per question.
    debug_assert!(annotations.iter().all(|a| {
        let verdicts: Vec<ModelVerdict> = annotations
            .iter()
            .filter(|b| b.question_id == a.question_id)
            .map(|b| b.verdict)
            .collect();
        gold[&a.question_id] == majority_vote(&verdicts)
    }));

    Ok(AgreementOutcome { run_dir: new_dir, summary, warnings })
}
