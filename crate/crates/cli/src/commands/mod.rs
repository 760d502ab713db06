//! Command implementations.
//!
//! Each command takes a judge as `&dyn Judge`, so tests can inject scripted
//! judges; the binary builds the real one with [`build_judge`].

use pairjudge_core::{
    CompletionCache, HttpJudge, Judge, RecordingJudge, ReplayJudge, Strategy, SyntheticJudge,
};

use crate::config::{BackendKind, JudgeConfig};
use crate::CliError;

pub mod agreement;
pub mod audit;
pub mod cache;
pub mod evaluate;
pub mod sweep;

pub use agreement::run_agreement;
pub use audit::run_audit;
pub use cache::{run_cache_inspect, run_cache_verify};
pub use evaluate::run_evaluate;
pub use sweep::run_sweep;

/// Builds the configured judge.
///
/// Synthetic judges must know the latent quality of every model that appears
/// in the dataset, so unknown models fail here rather than mid-run. The live
/// judge reads its API key from the environment ([`pairjudge_core::ENV_API_KEY`],
/// falling back to `OPENAI_API_KEY`) and records every completion into the
/// cache; replay serves the cache alone and never touches the network.
pub fn build_judge(config: &JudgeConfig, dataset_models: &[&str]) -> Result<Box<dyn Judge>, CliError> {
    match config.backend {
        BackendKind::Synthetic => {
            let synthetic = config
                .synthetic
                .as_ref()
                .ok_or_else(|| CliError::Config("synthetic backend is not configured".into()))?;
            for model in dataset_models {
                if !synthetic.quality.contains_key(*model) {
                    return Err(CliError::Config(format!(
                        "judge.quality has no entry for model {model:?}"
                    )));
                }
            }
            Ok(Box::new(SyntheticJudge::new(synthetic.spec())))
        }
        BackendKind::Replay => {
            let dir = config
                .cache_dir
                .as_ref()
                .ok_or_else(|| CliError::Config("replay backend requires judge.cache_dir".into()))?;
            Ok(Box::new(ReplayJudge::open(dir)?))
        }
        BackendKind::Live => {
            let dir = config
                .cache_dir
                .as_ref()
                .ok_or_else(|| CliError::Config("live backend requires judge.cache_dir".into()))?;
            let cache = CompletionCache::open(dir)?;
            let live = HttpJudge::from_env(config.live.clone())?;
            Ok(Box::new(RecordingJudge::new(live, cache)))
        }
    }
}

/// Judge calls an evaluation will make, ignoring parse retries.
pub fn planned_eval_calls(strategy: Strategy, k: u32, questions: usize) -> u64 {
    let orders = if strategy.uses_both_orders() { 2 } else { 1 };
    questions as u64 * orders * k as u64
}

/// Judge calls a bias audit will make: both orders for every question.
pub fn planned_audit_calls(k: u32, questions: usize) -> u64 {
    questions as u64 * 2 * k as u64
}
