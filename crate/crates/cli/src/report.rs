//! Run outputs: summaries, per-question rows, markdown reports, CSV tables.
//!
//! `summary.json`, `report.md`, and `per_question.jsonl` are deterministic
//! functions of the dataset, settings, and completions: no timestamps, no
//! backend identity, no machine state. Re-running a run byte-identically
//! reproduces them; provenance that legitimately varies (wall-clock time,
//! live vs. replay) lives in `config.json` instead.
//!
//! Every percentage in a report is accompanied by its exact fraction.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use pairjudge_core::{
    format_fraction_percent, AgreementStats, AuditOutcome, CellResult, ConflictReport,
    DroppedChain, EvalSettings, GapBinTable, MeanScore, ModelVerdict, PresentationOrder,
    QuestionRecord, Score, Template, TemplateSource,
};

use crate::config::BackendKind;
use crate::dataset::FileHash;
use crate::CliError;

// ---------------------------------------------------------------------------
// Formatting helpers
// ---------------------------------------------------------------------------

/// Formats a hundredths quantity as points, e.g. 25 -> "0.25", 300 -> "3".
pub fn points(hundredths: i64) -> String {
    let sign = if hundredths < 0 { "-" } else { "" };
    let a = hundredths.abs();
    let (int, frac) = (a / 100, a % 100);
    if frac == 0 {
        format!("{sign}{int}")
    } else if frac % 10 == 0 {
        format!("{sign}{int}.{}", frac / 10)
    } else {
        format!("{sign}{int}.{frac:02}")
    }
}

/// `"46% (37/80)"`: display percentage with the exact fraction alongside.
pub fn percent_with_fraction(num: usize, total: usize) -> String {
    format!("{} ({num}/{total})", format_fraction_percent(num, total))
}

/// Exact rational as a compact string: integers bare, otherwise `p/q`.
pub fn ratio_string(r: Ratio<i64>) -> String {
    if *r.denom() == 1 {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Mean score for prose: exact display, with a decimal approximation
/// appended when the exact form is a fraction.
pub fn fmt_mean(m: MeanScore) -> String {
    let exact = m.to_string();
    if exact.contains('/') {
        format!("{exact} (~{:.3})", m.to_f64())
    } else {
        exact
    }
}

// ---------------------------------------------------------------------------
// Per-question rows (written by evaluate, re-read by agreement)
// ---------------------------------------------------------------------------

/// One parsed evidence chain, flattened for the JSONL record.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChainRow {
    pub chain_index: u32,
    pub score_assistant1: Score,
    pub score_assistant2: Score,
    pub evidence: String,
}

/// One (question, presentation order) cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellRow {
    pub order: PresentationOrder,
    pub mean_assistant1: MeanScore,
    pub mean_assistant2: MeanScore,
    pub chains: Vec<ChainRow>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub dropped_chains: Vec<DroppedChain>,
    /// Request fingerprints of every completion consumed, in request order.
    pub fingerprints: Vec<String>,
}

impl CellRow {
    fn from_cell(cell: &CellResult) -> Self {
        CellRow {
            order: cell.order,
            mean_assistant1: cell.mean_assistant1,
            mean_assistant2: cell.mean_assistant2,
            chains: cell
                .samples
                .iter()
                .map(|s| ChainRow {
                    chain_index: s.chain_index,
                    score_assistant1: s.scores.assistant1,
                    score_assistant2: s.scores.assistant2,
                    evidence: s.evidence.clone(),
                })
                .collect(),
            dropped_chains: cell.dropped_chains.clone(),
            fingerprints: cell.fingerprints.clone(),
        }
    }
}

/// One question's full evaluation record, one JSON object per line.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuestionRow {
    pub question_id: String,
    pub category: String,
    pub model_a: String,
    pub model_b: String,
    /// `completed` or `all_chains_failed`.
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<ModelVerdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub score_model_a: Option<MeanScore>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub score_model_b: Option<MeanScore>,
    pub cells: Vec<CellRow>,
}

impl QuestionRow {
    pub fn from_record(record: &QuestionRecord) -> Self {
        let result = record.result();
        QuestionRow {
            question_id: record.question_id.clone(),
            category: record.category.clone(),
            model_a: record.model_a.clone(),
            model_b: record.model_b.clone(),
            status: if result.is_some() { "completed" } else { "all_chains_failed" }.to_string(),
            verdict: result.map(|r| r.verdict),
            score_model_a: result.map(|r| r.score_model_a),
            score_model_b: result.map(|r| r.score_model_b),
            cells: record.cells.iter().map(CellRow::from_cell).collect(),
        }
    }
}

/// Reads `per_question.jsonl` back from a run directory.
pub fn read_question_rows(path: &Path) -> Result<Vec<QuestionRow>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        rows.push(
            serde_json::from_str(line)
                .map_err(|e| CliError::Io(format!("{}:{}: {e}", path.display(), i + 1)))?,
        );
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// Template / input provenance (deterministic parts only)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TemplateRecord {
    pub kind: String,
    pub sha256: String,
    pub source: String,
}

impl TemplateRecord {
    pub fn from_template(template: &Template) -> Self {
        TemplateRecord {
            kind: template.kind().label().to_string(),
            sha256: template.sha256().to_string(),
            source: match template.source() {
                TemplateSource::Builtin => "builtin".to_string(),
                TemplateSource::File(path) => path.display().to_string(),
            },
        }
    }
}

// ---------------------------------------------------------------------------
// Evaluate
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct VerdictCounts {
    pub model_a: usize,
    pub model_b: usize,
    pub tie: usize,
}

impl VerdictCounts {
    pub fn add(&mut self, verdict: ModelVerdict) {
        match verdict {
            ModelVerdict::ModelAWins => self.model_a += 1,
            ModelVerdict::ModelBWins => self.model_b += 1,
            ModelVerdict::Tie => self.tie += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.model_a + self.model_b + self.tie
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvaluateSummary {
    pub command: String,
    pub judge_model: String,
    pub strategy: String,
    pub strategy_name: String,
    pub k: u32,
    pub temperature: String,
    pub tie_epsilon: String,
    pub model_a: String,
    pub model_b: String,
    pub questions: usize,
    pub completed: usize,
    pub failed: usize,
    pub failed_questions: Vec<String>,
    pub verdicts: VerdictCounts,
    /// Dataset-level exact mean of per-question mean scores.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_score_model_a: Option<MeanScore>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_score_model_b: Option<MeanScore>,
    pub categories: BTreeMap<String, VerdictCounts>,
    pub template: TemplateRecord,
    pub inputs: Vec<FileHash>,
}

pub fn evaluate_summary(
    settings: &EvalSettings,
    model_a: &str,
    model_b: &str,
    records: &[QuestionRecord],
    inputs: Vec<FileHash>,
) -> EvaluateSummary {
    let mut verdicts = VerdictCounts::default();
    let mut categories: BTreeMap<String, VerdictCounts> = BTreeMap::new();
    let mut failed_questions = Vec::new();
    let mut means_a = Vec::new();
    let mut means_b = Vec::new();
    for record in records {
        match record.result() {
            Some(result) => {
                verdicts.add(result.verdict);
                categories.entry(record.category.clone()).or_default().add(result.verdict);
                means_a.push(result.score_model_a);
                means_b.push(result.score_model_b);
            }
            None => failed_questions.push(record.question_id.clone()),
        }
    }
    EvaluateSummary {
        command: "evaluate".to_string(),
        judge_model: settings.cell.judge_model.clone(),
        strategy: settings.strategy.label().to_string(),
        strategy_name: settings.strategy.display_name().to_string(),
        k: settings.cell.k,
        temperature: settings.cell.temperature.to_string(),
        tie_epsilon: points(settings.tie_epsilon_hundredths),
        model_a: model_a.to_string(),
        model_b: model_b.to_string(),
        questions: records.len(),
        completed: records.len() - failed_questions.len(),
        failed: failed_questions.len(),
        failed_questions,
        verdicts,
        mean_score_model_a: MeanScore::mean_of(&means_a),
        mean_score_model_b: MeanScore::mean_of(&means_b),
        categories,
        template: TemplateRecord::from_template(&settings.cell.template),
        inputs,
    }
}

pub fn render_evaluate_report(summary: &EvaluateSummary) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# Pairwise evaluation: {} vs. {}", summary.model_a, summary.model_b);
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "Judge `{}` using {} (template `{}`, k = {}, temperature = {}, tie epsilon = {} points).",
        summary.judge_model,
        summary.strategy_name,
        summary.template.kind,
        summary.k,
        summary.temperature,
        summary.tie_epsilon,
    );
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "{} of {} questions completed; {} produced no verdict.",
        summary.completed, summary.questions, summary.failed
    );
    let _ = writeln!(out);
    let _ = writeln!(out, "## Verdicts");
    let _ = writeln!(out);
    let _ = writeln!(out, "| Winner | Questions | Share |");
    let _ = writeln!(out, "|---|---|---|");
    let n = summary.verdicts.total();
    let v = &summary.verdicts;
    let _ = writeln!(out, "| {} | {} | {} |", summary.model_a, v.model_a, percent_with_fraction(v.model_a, n));
    let _ = writeln!(out, "| {} | {} | {} |", summary.model_b, v.model_b, percent_with_fraction(v.model_b, n));
    let _ = writeln!(out, "| tie | {} | {} |", v.tie, percent_with_fraction(v.tie, n));
    let _ = writeln!(out);
    if let (Some(a), Some(b)) = (summary.mean_score_model_a, summary.mean_score_model_b) {
        let _ = writeln!(out, "## Mean scores");
        let _ = writeln!(out);
        let _ = writeln!(out, "| Model | Mean score |");
        let _ = writeln!(out, "|---|---|");
        let _ = writeln!(out, "| {} | {} |", summary.model_a, fmt_mean(a));
        let _ = writeln!(out, "| {} | {} |", summary.model_b, fmt_mean(b));
        let _ = writeln!(out);
    }
    if !summary.categories.is_empty() {
        let _ = writeln!(out, "## By category");
        let _ = writeln!(out);
        let _ = writeln!(out, "| Category | {} | {} | tie |", summary.model_a, summary.model_b);
        let _ = writeln!(out, "|---|---|---|---|");
        for (category, counts) in &summary.categories {
            let _ = writeln!(
                out,
                "| {category} | {} | {} | {} |",
                counts.model_a, counts.model_b, counts.tie
            );
        }
        let _ = writeln!(out);
    }
    if !summary.failed_questions.is_empty() {
        let _ = writeln!(out, "## Questions without a verdict");
        let _ = writeln!(out);
        for id in &summary.failed_questions {
            let _ = writeln!(out, "- `{id}`: every evidence chain failed to parse");
        }
        let _ = writeln!(out);
    }
    out
}

// ---------------------------------------------------------------------------
// Bias audit
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GapBinRow {
    pub bin: String,
    pub total: usize,
    pub conflicts: usize,
    /// Absent for an empty bin.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rate: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SlotCounts {
    pub first_shown_wins: usize,
    pub second_shown_wins: usize,
    pub same: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AuditSummary {
    pub command: String,
    pub judge_model: String,
    pub template: TemplateRecord,
    pub temperature: String,
    pub k: u32,
    pub tie_epsilon: String,
    pub model_a: String,
    pub model_b: String,
    pub questions: usize,
    /// Questions judged in both orders.
    pub compared: usize,
    /// Questions excluded because some order produced no verdict.
    pub excluded: usize,
    pub conflicts: usize,
    /// E.g. `37 / 80 (46%)`.
    pub conflict_rate: String,
    pub model_a_wins_shown_first: usize,
    pub model_a_wins_shown_second: usize,
    pub model_a_first_rate: String,
    pub model_a_second_rate: String,
    /// Slot verdicts when model A is shown first.
    pub order_ab: SlotCounts,
    /// Slot verdicts when model B is shown first.
    pub order_ba: SlotCounts,
    pub gap_source: PresentationOrder,
    pub gap_bins: Vec<GapBinRow>,
    pub inputs: Vec<FileHash>,
}

pub struct AuditArtifacts {
    pub summary: AuditSummary,
    pub report: ConflictReport,
    pub bins: GapBinTable,
}

#[allow(clippy::too_many_arguments)]
pub fn audit_summary(
    judge_model: &str,
    template: &Template,
    temperature: String,
    k: u32,
    tie_epsilon_hundredths: i64,
    gap_source: PresentationOrder,
    model_a: &str,
    model_b: &str,
    outcomes: &[AuditOutcome],
    edges_hundredths: &[i64],
    inputs: Vec<FileHash>,
) -> AuditArtifacts {
    let report = pairjudge_core::conflict_report(outcomes);
    let gap_pairs: Vec<(MeanScore, bool)> = report
        .rows
        .iter()
        .filter_map(|row| row.gap.map(|gap| (gap, row.conflict)))
        .collect();
    let bins = pairjudge_core::gap_bins(&gap_pairs, edges_hundredths);
    let summary = AuditSummary {
        command: "audit-bias".to_string(),
        judge_model: judge_model.to_string(),
        template: TemplateRecord::from_template(template),
        temperature,
        k,
        tie_epsilon: points(tie_epsilon_hundredths),
        model_a: model_a.to_string(),
        model_b: model_b.to_string(),
        questions: outcomes.len(),
        compared: report.n,
        excluded: report.excluded,
        conflicts: report.conflicts,
        conflict_rate: report.conflict_summary(),
        model_a_wins_shown_first: report.model_a_wins_shown_first(),
        model_a_wins_shown_second: report.model_a_wins_shown_second(),
        model_a_first_rate: percent_with_fraction(report.model_a_wins_shown_first(), report.n),
        model_a_second_rate: percent_with_fraction(report.model_a_wins_shown_second(), report.n),
        order_ab: SlotCounts {
            first_shown_wins: report.ab_counts.slot1,
            second_shown_wins: report.ab_counts.slot2,
            same: report.ab_counts.same,
        },
        order_ba: SlotCounts {
            first_shown_wins: report.ba_counts.slot1,
            second_shown_wins: report.ba_counts.slot2,
            same: report.ba_counts.same,
        },
        gap_source,
        gap_bins: bins
            .bins
            .iter()
            .map(|b| GapBinRow {
                bin: b.label.clone(),
                total: b.total,
                conflicts: b.conflicts,
                rate: b
                    .conflict_rate_percent()
                    .map(|p| format!("{p} ({}/{})", b.conflicts, b.total)),
            })
            .collect(),
        inputs,
    };
    AuditArtifacts { summary, report, bins }
}

pub fn render_audit_report(summary: &AuditSummary) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# Position-bias audit: {} vs. {}", summary.model_a, summary.model_b);
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "Judge `{}` with the `{}` template (k = {}, temperature = {}, tie epsilon = {} points). \
         Each question is judged twice, once per presentation order; a conflict is a question \
         whose verdict changes when the order flips.",
        summary.judge_model, summary.template.kind, summary.k, summary.temperature, summary.tie_epsilon,
    );
    let _ = writeln!(out);
    if summary.excluded > 0 {
        let _ = writeln!(
            out,
            "{} of {} questions produced no verdict in at least one order and are excluded.",
            summary.excluded, summary.questions
        );
        let _ = writeln!(out);
    }
    let _ = writeln!(out, "## Winning rate by position");
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "| Judge | Comparison | {a} wins when shown first | {a} wins when shown second | Conflict rate |",
        a = summary.model_a
    );
    let _ = writeln!(out, "|---|---|---|---|---|");
    let _ = writeln!(
        out,
        "| {} | {} vs. {} | {} | {} | {} |",
        summary.judge_model,
        summary.model_a,
        summary.model_b,
        summary.model_a_first_rate,
        summary.model_a_second_rate,
        summary.conflict_rate,
    );
    let _ = writeln!(out);
    let _ = writeln!(out, "## Slot verdicts per order");
    let _ = writeln!(out);
    let _ = writeln!(out, "| Order | First-shown wins | Second-shown wins | Same |");
    let _ = writeln!(out, "|---|---|---|---|");
    let _ = writeln!(
        out,
        "| {} first | {} | {} | {} |",
        summary.model_a, summary.order_ab.first_shown_wins, summary.order_ab.second_shown_wins, summary.order_ab.same
    );
    let _ = writeln!(
        out,
        "| {} first | {} | {} | {} |",
        summary.model_b, summary.order_ba.first_shown_wins, summary.order_ba.second_shown_wins, summary.order_ba.same
    );
    let _ = writeln!(out);
    if summary.gap_bins.iter().any(|b| b.total > 0) {
        let _ = writeln!(out, "## Conflicts by score gap");
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "Gap source: the {} order's slot scores.",
            match summary.gap_source {
                PresentationOrder::Ab => format!("{}-first", summary.model_a),
                PresentationOrder::Ba => format!("{}-first", summary.model_b),
            }
        );
        let _ = writeln!(out);
        let _ = writeln!(out, "| Score gap | Questions | Conflicts | Conflict rate |");
        let _ = writeln!(out, "|---|---|---|---|");
        for bin in &summary.gap_bins {
            let _ = writeln!(
                out,
                "| {} | {} | {} | {} |",
                bin.bin,
                bin.total,
                bin.conflicts,
                bin.rate.as_deref().unwrap_or("-"),
            );
        }
        let _ = writeln!(out);
    }
    out
}

/// `conflict.csv`: one row per question compared in both orders.
pub fn conflict_csv(report: &ConflictReport) -> Result<String, CliError> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(["question_id", "category", "verdict_ab", "verdict_ba", "conflict", "gap"])
        .map_err(|e| CliError::Io(format!("conflict.csv: {e}")))?;
    for row in &report.rows {
        writer
            .write_record([
                row.question_id.as_str(),
                row.category.as_str(),
                row.verdict_ab.label(),
                row.verdict_ba.label(),
                if row.conflict { "true" } else { "false" },
                &row.gap.map(|g| g.to_string()).unwrap_or_default(),
            ])
            .map_err(|e| CliError::Io(format!("conflict.csv: {e}")))?;
    }
    finish_csv(writer, "conflict.csv")
}

/// `gap_bins.csv`: the gap-stratified conflict table.
pub fn gap_bins_csv(bins: &GapBinTable) -> Result<String, CliError> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(["bin", "total", "conflicts", "rate", "rate_exact"])
        .map_err(|e| CliError::Io(format!("gap_bins.csv: {e}")))?;
    for bin in &bins.bins {
        writer
            .write_record([
                bin.label.as_str(),
                &bin.total.to_string(),
                &bin.conflicts.to_string(),
                &bin.conflict_rate_percent().unwrap_or_default(),
                &bin.conflict_rate_exact().map(ratio_string).unwrap_or_default(),
            ])
            .map_err(|e| CliError::Io(format!("gap_bins.csv: {e}")))?;
    }
    finish_csv(writer, "gap_bins.csv")
}

fn finish_csv(writer: csv::Writer<Vec<u8>>, name: &str) -> Result<String, CliError> {
    let bytes = writer
        .into_inner()
        .map_err(|e| CliError::Io(format!("{name}: {e}")))?;
    String::from_utf8(bytes).map_err(|e| CliError::Io(format!("{name}: {e}")))
}

// ---------------------------------------------------------------------------
// Agreement with human annotations
// ---------------------------------------------------------------------------

/// One evaluator scored against the gold verdicts.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AgreementRow {
    pub evaluator: String,
    pub method: String,
    pub n: usize,
    pub matches: usize,
    pub accuracy: f64,
    /// E.g. `55/80`.
    pub accuracy_exact: String,
    /// E.g. `68.8%`.
    pub accuracy_percent: String,
    pub kappa: f64,
    /// E.g. `7/11`.
    pub kappa_exact: String,
}

impl AgreementRow {
    pub fn from_stats(evaluator: &str, method: &str, stats: &AgreementStats) -> Self {
        AgreementRow {
            evaluator: evaluator.to_string(),
            method: method.to_string(),
            n: stats.n,
            matches: stats.matches,
            accuracy: stats.accuracy,
            accuracy_exact: format!("{}/{}", stats.matches, stats.n),
            accuracy_percent: format_fraction_percent(stats.matches, stats.n),
            kappa: stats.kappa,
            kappa_exact: ratio_string(stats.kappa_exact()),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AgreementSummary {
    pub command: String,
    pub judge_model: String,
    pub strategy: String,
    pub k: u32,
    pub model_a: String,
    pub model_b: String,
    /// Gold standard: majority vote over all annotators, per question.
    pub gold: String,
    pub annotators: Vec<String>,
    /// Questions with a judge verdict, at least one annotation, and gold.
    pub n: usize,
    /// Annotated questions whose judge run produced no verdict.
    pub judge_failures: usize,
    /// Question ids with a judge verdict but no annotations; excluded.
    pub missing_annotations: Vec<String>,
    pub rows: Vec<AgreementRow>,
    pub categories: BTreeMap<String, AgreementRow>,
    /// SHA-256 of the evaluation run's per-question records.
    pub evaluation_sha256: String,
    pub inputs: Vec<FileHash>,
}

pub fn render_agreement_report(summary: &AgreementSummary) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# Agreement with human judgements: {} vs. {}", summary.model_a, summary.model_b);
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "Gold verdicts are the per-question majority over {} annotators (no strict majority \
         counts as a tie). Each evaluator is scored against gold on the same {} questions.",
        summary.annotators.len(),
        summary.n,
    );
    let _ = writeln!(out);
    if !summary.missing_annotations.is_empty() {
        let _ = writeln!(
            out,
            "{} questions had no annotations and were excluded: {}.",
            summary.missing_annotations.len(),
            summary.missing_annotations.iter().map(|id| format!("`{id}`")).collect::<Vec<_>>().join(", "),
        );
        let _ = writeln!(out);
    }
    if summary.judge_failures > 0 {
        let _ = writeln!(
            out,
            "{} annotated questions produced no judge verdict and were excluded.",
            summary.judge_failures
        );
        let _ = writeln!(out);
    }
    let _ = writeln!(out, "| Evaluator | Method | Acc. (%) | Kap. |");
    let _ = writeln!(out, "|---|---|---|---|");
    for row in &summary.rows {
        let _ = writeln!(
            out,
            "| {} | {} | {} ({}) | {:.2} ({}) |",
            row.evaluator, row.method, row.accuracy_percent, row.accuracy_exact, row.kappa, row.kappa_exact,
        );
    }
    let _ = writeln!(out);
    if !summary.categories.is_empty() {
        let _ = writeln!(out, "## Judge agreement by category");
        let _ = writeln!(out);
        let _ = writeln!(out, "| Category | n | Acc. (%) | Kap. |");
        let _ = writeln!(out, "|---|---|---|---|");
        for (category, row) in &summary.categories {
            let _ = writeln!(
                out,
                "| {category} | {} | {} ({}) | {:.2} ({}) |",
                row.n, row.accuracy_percent, row.accuracy_exact, row.kappa, row.kappa_exact,
            );
        }
        let _ = writeln!(out);
    }
    out
}

// ---------------------------------------------------------------------------
// Chain-count sweep
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub k: u32,
    pub n: usize,
    pub matches: usize,
    pub accuracy: f64,
    pub accuracy_exact: String,
    pub accuracy_percent: String,
    pub kappa: f64,
    pub kappa_exact: String,
    pub dropped_questions: usize,
    pub unmatched: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepSummary {
    pub command: String,
    pub judge_model: String,
    pub strategy: String,
    pub temperature: String,
    pub model_a: String,
    pub model_b: String,
    pub gold: String,
    pub rows: Vec<SweepRow>,
    pub inputs: Vec<FileHash>,
}

pub fn sweep_rows(rows: &[pairjudge_core::KSweepRow]) -> Vec<SweepRow> {
    rows.iter()
        .map(|row| SweepRow {
            k: row.k,
            n: row.stats.n,
            matches: row.stats.matches,
            accuracy: row.stats.accuracy,
            accuracy_exact: format!("{}/{}", row.stats.matches, row.stats.n),
            accuracy_percent: format_fraction_percent(row.stats.matches, row.stats.n),
            kappa: row.stats.kappa,
            kappa_exact: ratio_string(row.stats.kappa_exact()),
            dropped_questions: row.dropped_questions,
            unmatched: row.unmatched,
        })
        .collect()
}

pub fn render_sweep_report(summary: &SweepSummary) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# Evidence-chain sweep: {} vs. {}", summary.model_a, summary.model_b);
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "Judge `{}` re-evaluated with {} at each chain count k (temperature = {}); verdicts \
         are scored against the human majority. Chains are deterministic per sample index, so \
         each larger k extends the smaller k's chains rather than resampling them.",
        summary.judge_model, summary.strategy, summary.temperature,
    );
    let _ = writeln!(out);
    let _ = writeln!(out, "| k | n | Acc. (%) | Kap. | Dropped |");
    let _ = writeln!(out, "|---|---|---|---|---|");
    for row in &summary.rows {
        let _ = writeln!(
            out,
            "| {} | {} | {} ({}) | {:.2} ({}) | {} |",
            row.k, row.n, row.accuracy_percent, row.accuracy_exact, row.kappa, row.kappa_exact, row.dropped_questions,
        );
    }
    let _ = writeln!(out);
    out
}

pub fn sweep_csv(rows: &[SweepRow]) -> Result<String, CliError> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record([
            "k",
            "n",
            "matches",
            "accuracy",
            "accuracy_exact",
            "kappa",
            "kappa_exact",
            "dropped_questions",
            "unmatched",
        ])
        .map_err(|e| CliError::Io(format!("sweep.csv: {e}")))?;
    for row in rows {
        writer
            .write_record([
                &row.k.to_string(),
                &row.n.to_string(),
                &row.matches.to_string(),
                &format!("{:.6}", row.accuracy),
                &row.accuracy_exact,
                &format!("{:.6}", row.kappa),
                &row.kappa_exact,
                &row.dropped_questions.to_string(),
                &row.unmatched.to_string(),
            ])
            .map_err(|e| CliError::Io(format!("sweep.csv: {e}")))?;
    }
    finish_csv(writer, "sweep.csv")
}

// ---------------------------------------------------------------------------
// config.json: provenance that may legitimately differ between identical runs
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConfigRecord {
    pub created_at: String,
    pub command: String,
    pub backend: String,
    pub judge_model: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub planned_judge_calls: u64,
    pub inputs: Vec<FileHash>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source_run: Option<String>,
}

impl ConfigRecord {
    pub fn new(command: &str, backend: BackendKind, judge_model: &str) -> Self {
        ConfigRecord {
            created_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            command: command.to_string(),
            backend: backend.label().to_string(),
            judge_model: judge_model.to_string(),
            label: None,
            seed: None,
            planned_judge_calls: 0,
            inputs: Vec::new(),
            source_run: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_formatting_trims_trailing_zeros() {
        assert_eq!(points(0), "0");
        assert_eq!(points(25), "0.25");
        assert_eq!(points(300), "3");
        assert_eq!(points(-150), "-1.5");
        assert_eq!(points(101), "1.01");
    }

    #[test]
    fn ratio_strings_are_compact() {
        assert_eq!(ratio_string(Ratio::new(7, 11)), "7/11");
        assert_eq!(ratio_string(Ratio::new(4, 2)), "2");
        assert_eq!(ratio_string(Ratio::new(0, 5)), "0");
    }

    #[test]
    fn fraction_display_means_get_an_approximation() {
        assert_eq!(fmt_mean(MeanScore::from_ratio(Ratio::new(17, 2))), "8.5");
        assert_eq!(fmt_mean(MeanScore::from_ratio(Ratio::new(25, 3))), "25/3 (~8.333)");
    }

    #[test]
    fn question_rows_round_trip_through_jsonl() {
        let row = QuestionRow {
            question_id: "q1".to_string(),
            category: "math".to_string(),
            model_a: "alpha".to_string(),
            model_b: "beta".to_string(),
            status: "completed".to_string(),
            verdict: Some(ModelVerdict::ModelAWins),
            score_model_a: Some(MeanScore::from_ratio(Ratio::new(25, 3))),
            score_model_b: Some(MeanScore::from_ratio(Ratio::new(15, 2))),
            cells: vec![CellRow {
                order: PresentationOrder::Ab,
                mean_assistant1: MeanScore::from_ratio(Ratio::new(25, 3)),
                mean_assistant2: MeanScore::from_ratio(Ratio::new(15, 2)),
                chains: vec![ChainRow {
                    chain_index: 0,
                    score_assistant1: Score::from_hundredths(800).unwrap(),
                    score_assistant2: Score::from_hundredths(750).unwrap(),
                    evidence: "Both answers are clear; the first is more complete.".to_string(),
                }],
                dropped_chains: Vec::new(),
                fingerprints: vec!["abc123".to_string()],
            }],
        };
        let line = serde_json::to_string(&row).unwrap();
        assert!(line.contains("\"verdict\":\"model_a\""), "{line}");
        assert!(line.contains("\"score_model_a\":\"25/3\""), "{line}");
        let back: QuestionRow = serde_json::from_str(&line).unwrap();
        assert_eq!(back.score_model_a, row.score_model_a);
        assert_eq!(back.verdict, row.verdict);
        assert_eq!(back.cells[0].chains[0].score_assistant1.hundredths(), 800);
    }

    #[test]
    fn csv_outputs_quote_only_when_needed() {
        let bins = GapBinTable {
            bins: vec![pairjudge_core::GapBin { label: "gap <= 1".to_string(), total: 4, conflicts: 3 }],
        };
        let text = gap_bins_csv(&bins).unwrap();
        assert_eq!(text, "bin,total,conflicts,rate,rate_exact\ngap <= 1,4,3,75%,3/4\n");
    }
}
