//! `evaluate`: judge every question and write calibrated verdicts.

use std::path::PathBuf;

use pairjudge_core::{evaluate_dataset, Judge};

use crate::config::RunConfig;
use crate::dataset::LoadedDataset;
use crate::report::{
    evaluate_summary, render_evaluate_report, ConfigRecord, EvaluateSummary, QuestionRow,
};
use crate::runs::{create_run_dir, write_json, write_jsonl, write_text};
use crate::{commands, CliError};

pub struct EvaluateOutcome {
    pub run_dir: PathBuf,
    pub summary: EvaluateSummary,
}

/// Runs the evaluation and writes a fresh run directory.
///
/// Judging happens before the directory is created: a run directory either
/// holds a complete result set or does not exist. (Live completions are still
/// preserved across interruptions by the cache, which is written through as
/// calls finish.)
pub fn run_evaluate(
    config: &RunConfig,
    judge: &dyn Judge,
    dataset: &LoadedDataset,
) -> Result<EvaluateOutcome, CliError> {
    let records = evaluate_dataset(judge, &config.eval, &dataset.items)?;

    let summary = evaluate_summary(
        &config.eval,
        &dataset.model_a,
        &dataset.model_b,
        &records,
        dataset.input_hashes(),
    );
    let rows: Vec<QuestionRow> = records.iter().map(QuestionRow::from_record).collect();
    let report = render_evaluate_report(&summary);

    let mut provenance = ConfigRecord::new("evaluate", config.judge.backend, &config.judge.model);
    provenance.label = config.label.clone();
    provenance.seed = config.judge.synthetic.as_ref().map(|s| s.seed);
    provenance.planned_judge_calls =
        commands::planned_eval_calls(config.eval.strategy, config.eval.cell.k, dataset.items.len());
    provenance.inputs = dataset.input_hashes();

    let run_dir = create_run_dir(&config.out_dir, "evaluate", config.label.as_deref())?;
    write_json(&run_dir, "summary.json", &summary)?;
    write_jsonl(&run_dir, "per_question.jsonl", &rows)?;
    write_text(&run_dir, "report.md", &report)?;
    write_json(&run_dir, "config.json", &provenance)?;

    Ok(EvaluateOutcome { run_dir, summary })
}
