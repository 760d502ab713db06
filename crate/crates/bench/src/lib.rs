//! Shared builders for the pipeline benchmarks.

use pairjudge_core::{sim, AuditSettings, EvalSettings, Strategy, SyntheticJudge, Template, TemplateKind};

/// A mid-sized simulated dataset with a biased, noisy judge.
pub fn bench_dataset(n: usize) -> (sim::SimDataset, SyntheticJudge) {
    let dataset = sim::uniform_pairs(11, n, (300, 900));
    let judge = SyntheticJudge::new(dataset.judge_spec(50, 75, 23));
    (dataset, judge)
}

pub fn eval_settings(strategy: Strategy) -> EvalSettings {
    EvalSettings::new("sim-judge-1", strategy).with_concurrency(1)
}

pub fn audit_settings() -> AuditSettings {
    AuditSettings::new("sim-judge-1", Template::builtin(TemplateKind::ScoreFirst))
}
