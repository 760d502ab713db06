//! Pairwise response evaluation with LLM judges.
//!
//! A judge model is shown a question and two candidate answers in anonymous
//! slots and asked to score or pick between them. Judges systematically favor
//! one slot over the other, so the raw protocol is unreliable: flipping the
//! presentation order flips many verdicts. This crate implements the judging
//! pipeline and the calibration strategies that correct for that:
//!
//! - [`templates`] renders the three prompt layouts (score-first,
//!   evidence-first, direct comparison) with injection-safe slot splicing;
//! - [`parse`] recovers scores or verdicts from raw completions;
//! - [`backend`] abstracts the judge: a live HTTP client, a deterministic
//!   synthetic judge, and an append-only completion cache with exact replay;
//! - [`calibrate`] runs the strategies — single greedy chain, multiple
//!   sampled evidence chains averaged exactly, and cross-order score
//!   balancing — over datasets with bounded concurrency;
//! - [`analysis`] measures cross-order conflicts, position win rates,
//!   gap-stratified conflict tables, and agreement with human annotations
//!   (accuracy and Cohen's kappa, both exact);
//! - [`sim`] generates datasets with known latent quality for end-to-end
//!   pipeline experiments.
//!
//! Scores live on an exact hundredths grid ([`Score`]) and aggregate into
//! rationals ([`MeanScore`]); no floating point is involved in any verdict.

pub mod analysis;
pub mod backend;
pub mod calibrate;
pub mod data;
pub mod parse;
pub mod score;
pub mod sim;
pub mod templates;
pub mod verdict;

pub use analysis::{
    agreement, category_breakdown, collapse_annotations, conflict_report, format_fraction_percent,
    gap_bins, k_sweep, majority_vote, AgreementStats, AnalysisError, ConflictReport, ConflictRow,
    GapBin, GapBinTable, HumanAnnotation, KSweepRow, WinningCounts,
};
pub use backend::{
    fingerprint, BackendError, CacheRecord, CacheVerifyReport, CompletionCache, CompletionSource,
    HttpJudge, Judge, JudgeCompletion, JudgeRequest, LiveConfig, RecordingJudge, ReplayJudge,
    SyntheticJudge, SyntheticJudgeSpec, Temperature, ENV_API_BASE, ENV_API_KEY, ENV_API_ORG,
};
pub use calibrate::{
    audit_question, bpc_combine, evaluate_dataset, evaluate_question, run_bias_audit, run_cell,
    single_order_result, AuditOutcome, AuditSettings, BiasAuditRecord, CalibrateError,
    CalibratedResult, CellResult, CellSettings, ChainAttempt, DroppedChain, EvalSettings,
    OrderOutcome, QuestionRecord, QuestionStatus, Strategy, RETRY_INDEX_STRIDE,
};
pub use data::{DataError, Question, ResponsePair};
pub use parse::{
    format_direct_compare, format_evidence_first, format_score_first, parse_direct_compare,
    parse_evidence_first, parse_score_first, EvidenceSample, ParseFailure, ParseFailureKind,
};
pub use score::{MeanScore, Score, ScoreError, ScorePair, SCORE_MAX_HUNDREDTHS, SCORE_MIN_HUNDREDTHS};
pub use templates::{
    render, RenderedPrompt, Template, TemplateError, TemplateKind, TemplateSource,
};
pub use verdict::{
    to_model_verdict, verdict_from_mean_scores, verdict_from_scores, ModelVerdict, OrderedVerdict,
    PresentationOrder,
};
