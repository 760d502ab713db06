//! `audit-bias`: judge both presentation orders and measure conflicts.

use std::path::PathBuf;

use pairjudge_core::{run_bias_audit, Judge};

use crate::config::RunConfig;
use crate::dataset::LoadedDataset;
use crate::report::{
    audit_summary, conflict_csv, gap_bins_csv, render_audit_report, AuditSummary, ConfigRecord,
};
use crate::runs::{create_run_dir, write_json, write_text};
use crate::{commands, CliError};

pub struct AuditOutcomeFiles {
    pub run_dir: PathBuf,
    pub summary: AuditSummary,
}

pub fn run_audit(
    config: &RunConfig,
    judge: &dyn Judge,
    dataset: &LoadedDataset,
) -> Result<AuditOutcomeFiles, CliError> {
    let outcomes = run_bias_audit(judge, &config.audit, &dataset.items)?;

    let artifacts = audit_summary(
        &config.audit.cell.judge_model,
        &config.audit.cell.template,
        config.audit.cell.temperature.to_string(),
        config.audit.cell.k,
        config.audit.tie_epsilon_hundredths,
        config.audit.gap_source,
        &dataset.model_a,
        &dataset.model_b,
        &outcomes,
        &config.gap_bin_edges_hundredths,
        dataset.input_hashes(),
    );
    let report_md = render_audit_report(&artifacts.summary);
    let conflicts = conflict_csv(&artifacts.report)?;
    let bins = gap_bins_csv(&artifacts.bins)?;

    let mut provenance = ConfigRecord::new("audit-bias", config.judge.backend, &config.judge.model);
    provenance.label = config.label.clone();
    provenance.seed = config.judge.synthetic.as_ref().map(|s| s.seed);
    provenance.planned_judge_calls =
        commands::planned_audit_calls(config.audit.cell.k, dataset.items.len());
    provenance.inputs = dataset.input_hashes();

    let run_dir = create_run_dir(&config.out_dir, "audit-bias", config.label.as_deref())?;
    write_json(&run_dir, "summary.json", &artifacts.summary)?;
    write_text(&run_dir, "report.md", &report_md)?;
    write_text(&run_dir, "conflict.csv", &conflicts)?;
    write_text(&run_dir, "gap_bins.csv", &bins)?;
    write_json(&run_dir, "config.json", &provenance)?;

    Ok(AuditOutcomeFiles { run_dir, summary: artifacts.summary })
}
