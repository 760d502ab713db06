//! `sweep-k`: re-evaluate at several chain counts and compare agreement.

use std::collections::BTreeMap;
use std::path::PathBuf;

use pairjudge_core::{collapse_annotations, k_sweep, Judge, ModelVerdict};

use crate::config::RunConfig;
use crate::dataset::LoadedDataset;
use crate::report::{render_sweep_report, sweep_csv, sweep_rows, ConfigRecord, SweepSummary};
use crate::runs::{create_run_dir, write_json, write_text};
use crate::{commands, CliError};

pub struct SweepOutcome {
    pub run_dir: PathBuf,
    pub summary: SweepSummary,
}

pub fn run_sweep(
    config: &RunConfig,
    judge: &dyn Judge,
    dataset: &LoadedDataset,
    ks: &[u32],
) -> Result<SweepOutcome, CliError> {
    if ks.is_empty() {
        return Err(CliError::Usage("sweep-k needs at least one chain count".into()));
    }
    let mut seen = std::collections::BTreeSet::new();
    let ks: Vec<u32> = ks.iter().copied().filter(|k| seen.insert(*k)).collect();
    if dataset.annotations.is_empty() {
        return Err(CliError::Dataset(
            "sweep-k scores verdicts against human annotations; set dataset.annotations".into(),
        ));
    }
    let gold: BTreeMap<String, ModelVerdict> = collapse_annotations(&dataset.annotations);

    let rows = k_sweep(judge, &config.eval, &dataset.items, &gold, &ks)?;
    let rows = sweep_rows(&rows);

    let summary = SweepSummary {
        command: "sweep-k".to_string(),
        judge_model: config.eval.cell.judge_model.clone(),
        strategy: config.eval.strategy.display_name().to_string(),
        temperature: config.eval.cell.temperature.to_string(),
        model_a: dataset.model_a.clone(),
        model_b: dataset.model_b.clone(),
        gold: "majority vote over all annotators; no strict majority is a tie".to_string(),
        rows,
        inputs: dataset.input_hashes(),
    };
    let report = render_sweep_report(&summary);
    let csv = sweep_csv(&summary.rows)?;

    let mut provenance = ConfigRecord::new("sweep-k", config.judge.backend, &config.judge.model);
    provenance.label = config.label.clone();
    provenance.seed = config.judge.synthetic.as_ref().map(|s| s.seed);
    provenance.planned_judge_calls = ks
        .iter()
        .map(|&k| commands::planned_eval_calls(config.eval.strategy, k, dataset.items.len()))
        .sum();
    provenance.inputs = dataset.input_hashes();

    let run_dir = create_run_dir(&config.out_dir, "sweep-k", config.label.as_deref())?;
    write_json(&run_dir, "summary.json", &summary)?;
    write_text(&run_dir, "report.md", &report)?;
    write_text(&run_dir, "sweep.csv", &csv)?;
    write_json(&run_dir, "config.json", &provenance)?;

    Ok(SweepOutcome { run_dir, summary })
}
