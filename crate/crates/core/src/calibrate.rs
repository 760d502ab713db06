//! Calibration strategies for pairwise judging.
//!
//! A *cell* is one (question, presentation order) unit of work: k sampled
//! evidence chains, each parsed into slot scores and averaged exactly. The
//! strategies differ in template, chain count, and whether both presentation
//! orders are combined:
//!
//! - `AnsExp`: score-first template, one greedy chain, one order.
//! - `Ec`: evidence-first template, one greedy chain, one order.
//! - `Mec`: evidence-first template, k sampled chains, one order.
//! - `MecBpc`: `Mec` in both orders; each model's final score is the mean of
//!   its scores across the two orders, which cancels any additive preference
//!   for a presentation position.
//!
//! All score aggregation is exact rational arithmetic; floats never decide a
//! verdict.

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backend::{BackendError, Judge, JudgeRequest, Temperature};
use crate::data::{Question, ResponsePair};
use crate::parse::{
    parse_direct_compare, parse_evidence_first, parse_score_first, EvidenceSample, ParseFailure,
    ParseFailureKind,
};
use crate::score::MeanScore;
use crate::templates::{Template, TemplateError, TemplateKind};
use crate::verdict::{
    to_model_verdict, verdict_from_mean_scores, ModelVerdict, OrderedVerdict, PresentationOrder,
};

/// Sample-index offset between parse-retry attempts of the same chain.
///
/// Chain c's attempt r uses sample index `c + r * RETRY_INDEX_STRIDE`, so a
/// retry is a genuinely fresh request with its own fingerprint and cache
/// entry, and a replayed run walks the same retry sequence.
pub const RETRY_INDEX_STRIDE: u32 = 1000;

/// A judging strategy: template, chain count, and order handling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Score-first prompt, single greedy chain (scores precede the rationale,
    /// so the rationale cannot inform them).
    AnsExp,
    /// Evidence-first prompt, single greedy chain.
    Ec,
    /// Evidence-first prompt, k sampled chains, scores averaged exactly.
    Mec,
    /// `Mec` run in both presentation orders and averaged per model.
    MecBpc,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [Strategy::AnsExp, Strategy::Ec, Strategy::Mec, Strategy::MecBpc];

    pub fn template_kind(self) -> TemplateKind {
        match self {
            Strategy::AnsExp => TemplateKind::ScoreFirst,
            Strategy::Ec | Strategy::Mec | Strategy::MecBpc => TemplateKind::EvidenceFirst,
        }
    }

    /// Default number of evidence chains per cell.
    pub fn default_k(self) -> u32 {
        match self {
            Strategy::AnsExp | Strategy::Ec => 1,
            Strategy::Mec | Strategy::MecBpc => 3,
        }
    }

    pub fn default_temperature(self) -> Temperature {
        match self {
            Strategy::AnsExp | Strategy::Ec => Temperature::ZERO,
            Strategy::Mec | Strategy::MecBpc => Temperature::ONE,
        }
    }

    /// Whether the strategy evaluates both presentation orders.
    pub fn uses_both_orders(self) -> bool {
        matches!(self, Strategy::MecBpc)
    }

    /// Whether k is free to vary (single-chain strategies pin k = 1).
    pub fn multi_chain(self) -> bool {
        matches!(self, Strategy::Mec | Strategy::MecBpc)
    }

    pub fn label(self) -> &'static str {
        match self {
            Strategy::AnsExp => "ans_exp",
            Strategy::Ec => "ec",
            Strategy::Mec => "mec",
            Strategy::MecBpc => "mec_bpc",
        }
    }

    /// Human-facing name for reports.
    pub fn display_name(self) -> &'static str {
        match self {
            Strategy::AnsExp => "Ans-exp",
            Strategy::Ec => "EC",
            Strategy::Mec => "MEC",
            Strategy::MecBpc => "MEC+BPC",
        }
    }
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for Strategy {
    type Err = CalibrateError;

    fn from_str(s: &str) -> Result<Self, CalibrateError> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "ans_exp" | "ansexp" => Ok(Strategy::AnsExp),
            "ec" => Ok(Strategy::Ec),
            "mec" => Ok(Strategy::Mec),
            "mec_bpc" | "mecbpc" => Ok(Strategy::MecBpc),
            _ => Err(CalibrateError::InvalidSettings(format!(
                "unknown strategy {s:?}; expected ans_exp, ec, mec, or mec_bpc"
            ))),
        }
    }
}

#[derive(Debug, Error)]
pub enum CalibrateError {
    #[error("all {chains} evidence chains failed to parse for question {question_id} (order {order})")]
    AllChainsFailed {
        question_id: String,
        order: PresentationOrder,
        chains: u32,
        dropped: Vec<DroppedChain>,
    },
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error("invalid settings: {0}")]
    InvalidSettings(String),
}

/// Per-cell sampling parameters, shared by evaluation runs and bias audits.
#[derive(Debug, Clone)]
pub struct CellSettings {
    pub judge_model: String,
    pub template: Template,
    /// Evidence chains per cell.
    pub k: u32,
    pub temperature: Temperature,
    /// Extra attempts per chain when a completion fails to parse.
    pub parse_retries: u32,
}

impl CellSettings {
    fn validate(&self) -> Result<(), CalibrateError> {
        if self.judge_model.is_empty() {
            return Err(CalibrateError::InvalidSettings("judge model is empty".into()));
        }
        if self.k == 0 {
            return Err(CalibrateError::InvalidSettings("k must be at least 1".into()));
        }
        Ok(())
    }
}

/// Settings for a full evaluation run.
#[derive(Debug, Clone)]
pub struct EvalSettings {
    pub cell: CellSettings,
    pub strategy: Strategy,
    /// Mean-score gaps at or below this (in hundredths) are ties.
    pub tie_epsilon_hundredths: i64,
    /// Worker threads for the question fan-out; 1 runs serially.
    pub concurrency: usize,
}

impl EvalSettings {
    /// Strategy defaults: built-in template, default k and temperature,
    /// a 2-retry parse budget, and a modest fan-out.
    pub fn new(judge_model: impl Into<String>, strategy: Strategy) -> Self {
        EvalSettings {
            cell: CellSettings {
                judge_model: judge_model.into(),
                template: Template::builtin(strategy.template_kind()),
                k: strategy.default_k(),
                temperature: strategy.default_temperature(),
                parse_retries: 2,
            },
            strategy,
            tie_epsilon_hundredths: 0,
            concurrency: 4,
        }
    }

    pub fn with_k(mut self, k: u32) -> Self {
        self.cell.k = k;
        self
    }

    pub fn with_temperature(mut self, t: Temperature) -> Self {
        self.cell.temperature = t;
        self
    }

    pub fn with_tie_epsilon(mut self, hundredths: i64) -> Self {
        self.tie_epsilon_hundredths = hundredths;
        self
    }

    pub fn with_concurrency(mut self, n: usize) -> Self {
        self.concurrency = n;
        self
    }

    /// Swaps in a custom template; its kind must match the strategy's parser.
    pub fn with_template(mut self, template: Template) -> Result<Self, CalibrateError> {
        if template.kind() != self.strategy.template_kind() {
            return Err(CalibrateError::InvalidSettings(format!(
                "strategy {} needs a {} template, got {}",
                self.strategy,
                self.strategy.template_kind().label(),
                template.kind().label()
            )));
        }
        self.cell.template = template;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), CalibrateError> {
        self.cell.validate()?;
        if self.cell.template.kind() != self.strategy.template_kind() {
            return Err(CalibrateError::InvalidSettings(format!(
                "strategy {} needs a {} template, got {}",
                self.strategy,
                self.strategy.template_kind().label(),
                self.cell.template.kind().label()
            )));
        }
        if !self.strategy.multi_chain() && self.cell.k != 1 {
            return Err(CalibrateError::InvalidSettings(format!(
                "strategy {} is single-chain; k must be 1, got {}",
                self.strategy, self.cell.k
            )));
        }
        if self.tie_epsilon_hundredths < 0 {
            return Err(CalibrateError::InvalidSettings("tie epsilon must be non-negative".into()));
        }
        Ok(())
    }
}

/// One chain that never produced a parseable completion.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DroppedChain {
    pub chain_index: u32,
    pub attempts: Vec<ChainAttempt>,
}

/// One failed attempt within a chain.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChainAttempt {
    pub sample_index: u32,
    pub failure_kind: ParseFailureKind,
    pub detail: String,
}

/// The outcome of one (question, order) cell.
#[derive(Debug, Clone, Serialize)]
pub struct CellResult {
    pub question_id: String,
    pub order: PresentationOrder,
    /// Parsed chains, in chain order. Never empty.
    pub samples: Vec<EvidenceSample>,
    /// Chains dropped after the retry budget; the mean reweights over the rest.
    pub dropped_chains: Vec<DroppedChain>,
    /// Fingerprints of every completion consumed, parseable or not.
    pub fingerprints: Vec<String>,
    pub mean_assistant1: MeanScore,
    pub mean_assistant2: MeanScore,
}

impl CellResult {
    /// Slot-space verdict from the cell's mean scores.
    pub fn slot_verdict(&self, tie_epsilon_hundredths: i64) -> OrderedVerdict {
        if self.mean_assistant1.within_epsilon(self.mean_assistant2, tie_epsilon_hundredths) {
            OrderedVerdict::Same
        } else if self.mean_assistant1 > self.mean_assistant2 {
            OrderedVerdict::Assistant1
        } else {
            OrderedVerdict::Assistant2
        }
    }

    /// Model-space verdict from the cell's mean scores.
    pub fn model_verdict(&self, tie_epsilon_hundredths: i64) -> ModelVerdict {
        to_model_verdict(self.slot_verdict(tie_epsilon_hundredths), self.order)
    }

    /// Mean scores in model space: (model A, model B).
    pub fn model_means(&self) -> (MeanScore, MeanScore) {
        match self.order {
            PresentationOrder::Ab => (self.mean_assistant1, self.mean_assistant2),
            PresentationOrder::Ba => (self.mean_assistant2, self.mean_assistant1),
        }
    }

    /// The unsigned gap between the two slot means.
    pub fn gap(&self) -> MeanScore {
        MeanScore::abs_diff(self.mean_assistant1, self.mean_assistant2)
    }
}

/// The final judgement for one question in model space.
#[derive(Debug, Clone, Serialize)]
pub struct CalibratedResult {
    pub question_id: String,
    pub score_model_a: MeanScore,
    pub score_model_b: MeanScore,
    pub verdict: ModelVerdict,
    pub k: u32,
    pub strategy: Strategy,
}

/// Parser signature shared by the two scored templates.
type ScoredParser = fn(&str) -> Result<EvidenceSample, ParseFailure>;

fn parser_for(kind: TemplateKind) -> Result<ScoredParser, CalibrateError> {
    match kind {
        TemplateKind::ScoreFirst => Ok(parse_score_first),
        TemplateKind::EvidenceFirst => Ok(parse_evidence_first),
        TemplateKind::DirectCompare => Err(CalibrateError::InvalidSettings(
            "the direct-comparison template yields no scores to average".into(),
        )),
    }
}

/// Runs one (question, order) cell: k chains with per-chain parse retries.
///
/// Backend failures abort the cell. A chain whose completions all fail to
/// parse is dropped; the mean renormalizes over surviving chains. If every
/// chain drops, the cell fails with `AllChainsFailed`.
pub fn run_cell(
    judge: &dyn Judge,
    settings: &CellSettings,
    question: &Question,
    pair: &ResponsePair,
    order: PresentationOrder,
) -> Result<CellResult, CalibrateError> {
    settings.validate()?;
    let parser = parser_for(settings.template.kind())?;
    let prompt = settings.template.render(question, pair, order)?;
    let mut samples = Vec::with_capacity(settings.k as usize);
    let mut dropped = Vec::new();
    let mut fingerprints = Vec::new();
    for chain in 0..settings.k {
        let mut attempts = Vec::new();
        let mut parsed = None;
        for retry in 0..=settings.parse_retries {
            let sample_index = chain + retry * RETRY_INDEX_STRIDE;
            let request = JudgeRequest {
                prompt: prompt.clone(),
                temperature: settings.temperature,
                sample_index,
                judge_model: settings.judge_model.clone(),
            };
            let completion = judge.complete(&request)?;
            fingerprints.push(completion.request_fingerprint.clone());
            match parser(&completion.raw) {
                Ok(sample) => {
                    parsed = Some(sample.with_chain_index(chain));
                    break;
                }
                Err(failure) => attempts.push(ChainAttempt {
                    sample_index,
                    failure_kind: failure.kind,
                    detail: failure.detail,
                }),
            }
        }
        match parsed {
            Some(sample) => samples.push(sample),
            None => dropped.push(DroppedChain { chain_index: chain, attempts }),
        }
    }
    if samples.is_empty() {
        return Err(CalibrateError::AllChainsFailed {
            question_id: question.id.clone(),
            order,
            chains: settings.k,
            dropped,
        });
    }
    let slot1: Vec<_> = samples.iter().map(|s| s.scores.assistant1).collect();
    let slot2: Vec<_> = samples.iter().map(|s| s.scores.assistant2).collect();
    Ok(CellResult {
        question_id: question.id.clone(),
        order,
        mean_assistant1: MeanScore::mean(&slot1).expect("samples are non-empty"),
        mean_assistant2: MeanScore::mean(&slot2).expect("samples are non-empty"),
        samples,
        dropped_chains: dropped,
        fingerprints,
    })
}

/// Final result from a single-order cell.
pub fn single_order_result(settings: &EvalSettings, cell: &CellResult) -> CalibratedResult {
    let (score_model_a, score_model_b) = cell.model_means();
    CalibratedResult {
        question_id: cell.question_id.clone(),
        score_model_a,
        score_model_b,
        verdict: verdict_from_mean_scores(score_model_a, score_model_b, settings.tie_epsilon_hundredths),
        k: settings.cell.k,
        strategy: settings.strategy,
    }
}

/// Combines both orders: each model's score is the mean of its slot means
/// across the two presentations.
///
/// If the judge inflates the first slot by any constant b, both models absorb
/// exactly b/2 here, so the comparison between them is unchanged by the bias.
pub fn bpc_combine(
    settings: &EvalSettings,
    ab: &CellResult,
    ba: &CellResult,
) -> Result<CalibratedResult, CalibrateError> {
    if ab.question_id != ba.question_id {
        return Err(CalibrateError::InvalidSettings(format!(
            "cannot combine cells from different questions ({} vs {})",
            ab.question_id, ba.question_id
        )));
    }
    if ab.order != PresentationOrder::Ab || ba.order != PresentationOrder::Ba {
        return Err(CalibrateError::InvalidSettings(
            "cross-order combination needs one cell per presentation order".into(),
        ));
    }
    let (a_in_ab, b_in_ab) = ab.model_means();
    let (a_in_ba, b_in_ba) = ba.model_means();
    let score_model_a = MeanScore::midpoint(a_in_ab, a_in_ba);
    let score_model_b = MeanScore::midpoint(b_in_ab, b_in_ba);
    Ok(CalibratedResult {
        question_id: ab.question_id.clone(),
        score_model_a,
        score_model_b,
        verdict: verdict_from_mean_scores(score_model_a, score_model_b, settings.tie_epsilon_hundredths),
        k: settings.cell.k,
        strategy: settings.strategy,
    })
}

/// Terminal state of one question within a run.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum QuestionStatus {
    Completed { result: CalibratedResult },
    /// Every chain of some cell failed to parse; the question has no verdict.
    AllChainsFailed { order: PresentationOrder, dropped: Vec<DroppedChain> },
}

/// Everything recorded about one question: the raw cells and the outcome.
#[derive(Debug, Clone, Serialize)]
pub struct QuestionRecord {
    pub question_id: String,
    pub category: String,
    pub model_a: String,
    pub model_b: String,
    pub cells: Vec<CellResult>,
    pub status: QuestionStatus,
}

impl QuestionRecord {
    pub fn result(&self) -> Option<&CalibratedResult> {
        match &self.status {
            QuestionStatus::Completed { result } => Some(result),
            QuestionStatus::AllChainsFailed { .. } => None,
        }
    }

    pub fn failed(&self) -> bool {
        self.result().is_none()
    }
}

/// Evaluates one question under the settings' strategy.
///
/// Parse exhaustion (`AllChainsFailed`) is recorded in the returned status;
/// backend and template errors propagate as `Err`.
pub fn evaluate_question(
    judge: &dyn Judge,
    settings: &EvalSettings,
    question: &Question,
    pair: &ResponsePair,
) -> Result<QuestionRecord, CalibrateError> {
    let mut record = QuestionRecord {
        question_id: question.id.clone(),
        category: question.category.clone(),
        model_a: pair.model_a.clone(),
        model_b: pair.model_b.clone(),
        cells: Vec::new(),
        status: QuestionStatus::AllChainsFailed { order: PresentationOrder::Ab, dropped: Vec::new() },
    };
    let ab = match run_cell(judge, &settings.cell, question, pair, PresentationOrder::Ab) {
        Ok(cell) => cell,
        Err(CalibrateError::AllChainsFailed { order, dropped, .. }) => {
            record.status = QuestionStatus::AllChainsFailed { order, dropped };
            return Ok(record);
        }
        Err(e) => return Err(e),
    };
    if !settings.strategy.uses_both_orders() {
        record.status = QuestionStatus::Completed { result: single_order_result(settings, &ab) };
        record.cells.push(ab);
        return Ok(record);
    }
    let ba = match run_cell(judge, &settings.cell, question, pair, PresentationOrder::Ba) {
        Ok(cell) => cell,
        Err(CalibrateError::AllChainsFailed { order, dropped, .. }) => {
            record.cells.push(ab);
            record.status = QuestionStatus::AllChainsFailed { order, dropped };
            return Ok(record);
        }
        Err(e) => return Err(e),
    };
    record.status = QuestionStatus::Completed { result: bpc_combine(settings, &ab, &ba)? };
    record.cells.push(ab);
    record.cells.push(ba);
    Ok(record)
}

/// Evaluates a dataset, fanning questions out across `concurrency` workers.
///
/// Records come back in input order regardless of concurrency, so run
/// outputs are stable. With `concurrency <= 1` everything runs on the
/// calling thread, which also fixes the backend call order.
pub fn evaluate_dataset(
    judge: &dyn Judge,
    settings: &EvalSettings,
    items: &[(Question, ResponsePair)],
) -> Result<Vec<QuestionRecord>, CalibrateError> {
    settings.validate()?;
    if settings.concurrency <= 1 {
        return items
            .iter()
            .map(|(q, p)| evaluate_question(judge, settings, q, p))
            .collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(settings.concurrency)
        .build()
        .map_err(|e| CalibrateError::InvalidSettings(format!("thread pool: {e}")))?;
    pool.install(|| {
        items
            .par_iter()
            .map(|(q, p)| evaluate_question(judge, settings, q, p))
            .collect()
    })
}

/// Settings for a position-bias audit.
#[derive(Debug, Clone)]
pub struct AuditSettings {
    pub cell: CellSettings,
    pub tie_epsilon_hundredths: i64,
    pub concurrency: usize,
    /// Which order's cell provides the score gap for gap-stratified analysis.
    pub gap_source: PresentationOrder,
}

impl AuditSettings {
    pub fn new(judge_model: impl Into<String>, template: Template) -> Self {
        AuditSettings {
            cell: CellSettings {
                judge_model: judge_model.into(),
                template,
                k: 1,
                temperature: Temperature::ZERO,
                parse_retries: 2,
            },
            tie_epsilon_hundredths: 0,
            concurrency: 4,
            gap_source: PresentationOrder::Ab,
        }
    }

    pub fn validate(&self) -> Result<(), CalibrateError> {
        self.cell.validate()?;
        if self.cell.template.kind() == TemplateKind::DirectCompare && self.cell.k != 1 {
            return Err(CalibrateError::InvalidSettings(
                "the direct-comparison template has no scores to average; k must be 1".into(),
            ));
        }
        if self.tie_epsilon_hundredths < 0 {
            return Err(CalibrateError::InvalidSettings("tie epsilon must be non-negative".into()));
        }
        Ok(())
    }
}

/// What one presentation order produced during an audit.
#[derive(Debug, Clone, Serialize)]
pub struct OrderOutcome {
    pub order: PresentationOrder,
    pub slot_verdict: OrderedVerdict,
    pub model_verdict: ModelVerdict,
    /// Slot mean scores; absent for the direct-comparison template.
    pub mean_slot1: Option<MeanScore>,
    pub mean_slot2: Option<MeanScore>,
}

/// Both orders of one question, with the conflict flag and score gap.
#[derive(Debug, Clone, Serialize)]
pub struct BiasAuditRecord {
    pub question_id: String,
    pub category: String,
    pub model_a: String,
    pub model_b: String,
    pub ab: OrderOutcome,
    pub ba: OrderOutcome,
    /// True when the model-space verdicts disagree across orders.
    pub conflict: bool,
    /// Unsigned slot-score gap from the gap-source order, when scored.
    pub gap: Option<MeanScore>,
}

/// Per-question audit outcome; parse exhaustion is recorded, not fatal.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum AuditOutcome {
    Completed { record: BiasAuditRecord },
    AllChainsFailed { question_id: String, order: PresentationOrder, dropped: Vec<DroppedChain> },
}

impl AuditOutcome {
    pub fn record(&self) -> Option<&BiasAuditRecord> {
        match self {
            AuditOutcome::Completed { record } => Some(record),
            AuditOutcome::AllChainsFailed { .. } => None,
        }
    }
}

fn audit_order_scored(
    judge: &dyn Judge,
    settings: &AuditSettings,
    question: &Question,
    pair: &ResponsePair,
    order: PresentationOrder,
) -> Result<Result<(OrderOutcome, CellResult), Vec<DroppedChain>>, CalibrateError> {
    match run_cell(judge, &settings.cell, question, pair, order) {
        Ok(cell) => {
            let outcome = OrderOutcome {
                order,
                slot_verdict: cell.slot_verdict(settings.tie_epsilon_hundredths),
                model_verdict: cell.model_verdict(settings.tie_epsilon_hundredths),
                mean_slot1: Some(cell.mean_assistant1),
                mean_slot2: Some(cell.mean_assistant2),
            };
            Ok(Ok((outcome, cell)))
        }
        Err(CalibrateError::AllChainsFailed { dropped, .. }) => Ok(Err(dropped)),
        Err(e) => Err(e),
    }
}

fn audit_order_direct(
    judge: &dyn Judge,
    settings: &AuditSettings,
    question: &Question,
    pair: &ResponsePair,
    order: PresentationOrder,
) -> Result<Result<OrderOutcome, Vec<DroppedChain>>, CalibrateError> {
    let prompt = settings.cell.template.render(question, pair, order)?;
    let mut attempts = Vec::new();
    for retry in 0..=settings.cell.parse_retries {
        let sample_index = retry * RETRY_INDEX_STRIDE;
        let request = JudgeRequest {
            prompt: prompt.clone(),
            temperature: settings.cell.temperature,
            sample_index,
            judge_model: settings.cell.judge_model.clone(),
        };
        let completion = judge.complete(&request)?;
        match parse_direct_compare(&completion.raw) {
            Ok(slot_verdict) => {
                return Ok(Ok(OrderOutcome {
                    order,
                    slot_verdict,
                    model_verdict: to_model_verdict(slot_verdict, order),
                    mean_slot1: None,
                    mean_slot2: None,
                }))
            }
            Err(failure) => attempts.push(ChainAttempt {
                sample_index,
                failure_kind: failure.kind,
                detail: failure.detail,
            }),
        }
    }
    Ok(Err(vec![DroppedChain { chain_index: 0, attempts }]))
}

/// Audits one question: judge it in both orders, compare the verdicts.
pub fn audit_question(
    judge: &dyn Judge,
    settings: &AuditSettings,
    question: &Question,
    pair: &ResponsePair,
) -> Result<AuditOutcome, CalibrateError> {
    let scored = settings.cell.template.kind().is_scored();
    let mut outcomes: Vec<OrderOutcome> = Vec::with_capacity(2);
    let mut gap = None;
    for order in [PresentationOrder::Ab, PresentationOrder::Ba] {
        if scored {
            match audit_order_scored(judge, settings, question, pair, order)? {
                Ok((outcome, cell)) => {
                    if order == settings.gap_source {
                        gap = Some(cell.gap());
                    }
                    outcomes.push(outcome);
                }
                Err(dropped) => {
                    return Ok(AuditOutcome::AllChainsFailed {
                        question_id: question.id.clone(),
                        order,
                        dropped,
                    })
                }
            }
        } else {
            match audit_order_direct(judge, settings, question, pair, order)? {
                Ok(outcome) => outcomes.push(outcome),
                Err(dropped) => {
                    return Ok(AuditOutcome::AllChainsFailed {
                        question_id: question.id.clone(),
                        order,
                        dropped,
                    })
                }
            }
        }
    }
    let ba = outcomes.pop().expect("two orders");
    let ab = outcomes.pop().expect("two orders");
    let conflict = ab.model_verdict != ba.model_verdict;
    Ok(AuditOutcome::Completed {
        record: BiasAuditRecord {
            question_id: question.id.clone(),
            category: question.category.clone(),
            model_a: pair.model_a.clone(),
            model_b: pair.model_b.clone(),
            ab,
            ba,
            conflict,
            gap,
        },
    })
}

/// Audits a dataset with the same fan-out behavior as `evaluate_dataset`.
pub fn run_bias_audit(
    judge: &dyn Judge,
    settings: &AuditSettings,
    items: &[(Question, ResponsePair)],
) -> Result<Vec<AuditOutcome>, CalibrateError> {
    settings.validate()?;
    if settings.concurrency <= 1 {
        return items
            .iter()
            .map(|(q, p)| audit_question(judge, settings, q, p))
            .collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(settings.concurrency)
        .build()
        .map_err(|e| CalibrateError::InvalidSettings(format!("thread pool: {e}")))?;
    pool.install(|| {
        items
            .par_iter()
            .map(|(q, p)| audit_question(judge, settings, q, p))
            .collect()
    })
}

/// Exact mean of two rationals as a convenience for cross-order scores.
pub fn exact_ratio(numer: i64, denom: i64) -> MeanScore {
    MeanScore::from_ratio(Ratio::new(numer, denom))
}
