//! Run configuration: a TOML file resolved into validated settings.
//!
//! Config files are safe to commit and to quote in reports: credentials are
//! read exclusively from the environment, and unknown keys (including any
//! attempt to put an API key here) are rejected.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use pairjudge_core::{
    AuditSettings, EvalSettings, LiveConfig, PresentationOrder, Score, Strategy, SyntheticJudgeSpec,
    Template, TemplateKind, Temperature,
};

use crate::CliError;

/// Which judge implementation a run talks to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    /// Deterministic simulated judge with configured qualities and bias.
    Synthetic,
    /// HTTP judge; every completion is recorded into the cache.
    Live,
    /// Cache only; any uncached request is an error.
    Replay,
}

impl BackendKind {
    pub fn label(self) -> &'static str {
        match self {
            BackendKind::Synthetic => "synthetic",
            BackendKind::Live => "live",
            BackendKind::Replay => "replay",
        }
    }
}

impl fmt::Display for BackendKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for BackendKind {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s.to_ascii_lowercase().as_str() {
            "synthetic" => Ok(BackendKind::Synthetic),
            "live" => Ok(BackendKind::Live),
            "replay" => Ok(BackendKind::Replay),
            _ => Err(CliError::Config(format!(
                "unknown backend {s:?}; expected synthetic, live, or replay"
            ))),
        }
    }
}

/// The raw config file, before validation.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfigFile {
    #[serde(default)]
    pub run: RunSection,
    pub dataset: DatasetSection,
    pub judge: JudgeSection,
    #[serde(default)]
    pub evaluate: EvaluateSection,
    #[serde(default)]
    pub audit: AuditSection,
    #[serde(default)]
    pub live: LiveSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub label: Option<String>,
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSection {
    pub questions: PathBuf,
    /// One combined answers file or one file per model.
    pub answers: Vec<PathBuf>,
    pub annotations: Option<PathBuf>,
    /// Which model is reported as model A; defaults to lexicographic order.
    pub model_a: Option<String>,
    pub model_b: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JudgeSection {
    pub backend: Option<String>,
    pub model: String,
    pub cache_dir: Option<PathBuf>,
    /// Synthetic backend: RNG seed.
    pub seed: Option<u64>,
    /// Synthetic backend: points added to the first-shown answer.
    pub position_bias: Option<f64>,
    /// Synthetic backend: per-slot Gaussian noise, in points.
    pub noise_stddev: Option<f64>,
    /// Synthetic backend: latent quality per model name, in points.
    pub quality: Option<BTreeMap<String, f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluateSection {
    pub strategy: Option<String>,
    pub k: Option<u32>,
    pub temperature: Option<f64>,
    pub tie_epsilon: Option<f64>,
    pub parse_retries: Option<u32>,
    pub concurrency: Option<usize>,
    /// Custom template body; must fit the strategy's parser.
    pub template_file: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditSection {
    /// score_first | evidence_first | direct_compare
    pub template: Option<String>,
    pub k: Option<u32>,
    pub temperature: Option<f64>,
    pub tie_epsilon: Option<f64>,
    pub parse_retries: Option<u32>,
    pub concurrency: Option<usize>,
    /// Which order's score gap feeds the gap-bin table: "ab" or "ba".
    pub gap_source: Option<String>,
    /// Bin edges in points, strictly increasing.
    pub gap_bin_edges: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LiveSection {
    pub base_url: Option<String>,
    pub timeout_secs: Option<u64>,
    pub attempts: Option<u32>,
    pub base_delay_ms: Option<u64>,
    pub max_output_tokens: Option<u32>,
    pub organization: Option<String>,
}

/// Flag-level overrides applied on top of the config file.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub backend: Option<BackendKind>,
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
}

/// Resolved synthetic judge parameters.
#[derive(Debug, Clone)]
pub struct SyntheticConfig {
    pub seed: u64,
    pub position_bias_hundredths: i64,
    pub noise_stddev_hundredths: i64,
    pub quality: BTreeMap<String, Score>,
}

impl SyntheticConfig {
    pub fn spec(&self) -> SyntheticJudgeSpec {
        SyntheticJudgeSpec {
            base_quality: self.quality.clone(),
            position_bias_hundredths: self.position_bias_hundredths,
            noise_stddev_hundredths: self.noise_stddev_hundredths,
            seed: self.seed,
        }
    }
}

/// Resolved judge backend parameters.
#[derive(Debug, Clone)]
pub struct JudgeConfig {
    pub backend: BackendKind,
    pub model: String,
    pub cache_dir: Option<PathBuf>,
    pub synthetic: Option<SyntheticConfig>,
    pub live: LiveConfig,
}

/// Resolved dataset paths.
#[derive(Debug, Clone)]
pub struct DatasetConfig {
    pub questions: PathBuf,
    pub answers: Vec<PathBuf>,
    pub annotations: Option<PathBuf>,
    pub model_a: Option<String>,
    pub model_b: Option<String>,
}

/// A fully validated run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub label: Option<String>,
    pub out_dir: PathBuf,
    pub dataset: DatasetConfig,
    pub judge: JudgeConfig,
    pub eval: EvalSettings,
    pub audit: AuditSettings,
    pub gap_bin_edges_hundredths: Vec<i64>,
}

/// Converts a points value (e.g. `7.25`) to exact hundredths, rejecting
/// anything finer than the grid.
pub fn points_to_hundredths(value: f64, field: &str) -> Result<i64, CliError> {
    if !value.is_finite() {
        return Err(CliError::Config(format!("{field} must be a finite number")));
    }
    let scaled = value * 100.0;
    let rounded = scaled.round();
    if (scaled - rounded).abs() > 1e-6 {
        return Err(CliError::Config(format!(
            "{field} = {value} has more than two decimal places"
        )));
    }
    Ok(rounded as i64)
}

pub fn load_config_file(path: &Path) -> Result<RunConfigFile, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Resolves a raw config file plus CLI overrides into validated settings.
///
/// Paths inside the file are interpreted relative to the file's directory, so
/// a config can be invoked from anywhere.
pub fn resolve(file: RunConfigFile, config_path: &Path, overrides: &Overrides) -> Result<RunConfig, CliError> {
    let base = config_path.parent().unwrap_or_else(|| Path::new("."));
    let anchor = |p: &PathBuf| -> PathBuf {
        if p.is_absolute() {
            p.clone()
        } else {
            base.join(p)
        }
    };

    if file.dataset.answers.is_empty() || file.dataset.answers.len() > 2 {
        return Err(CliError::Config(format!(
            "dataset.answers must list one or two files, got {}",
            file.dataset.answers.len()
        )));
    }
    let dataset = DatasetConfig {
        questions: anchor(&file.dataset.questions),
        answers: file.dataset.answers.iter().map(anchor).collect(),
        annotations: file.dataset.annotations.as_ref().map(anchor),
        model_a: file.dataset.model_a,
        model_b: file.dataset.model_b,
    };

    let backend = match overrides.backend {
        Some(kind) => kind,
        None => file
            .judge
            .backend
            .as_deref()
            .unwrap_or("synthetic")
            .parse::<BackendKind>()?,
    };
    if file.judge.model.is_empty() {
        return Err(CliError::Config("judge.model must be set".into()));
    }
    let cache_dir = file.judge.cache_dir.as_ref().map(anchor);
    if matches!(backend, BackendKind::Live | BackendKind::Replay) && cache_dir.is_none() {
        return Err(CliError::Config(format!(
            "backend {backend} requires judge.cache_dir so completions can be replayed"
        )));
    }

    let synthetic = if backend == BackendKind::Synthetic {
        let mut quality = BTreeMap::new();
        for (model, points) in file.judge.quality.clone().unwrap_or_default() {
            let h = points_to_hundredths(points, &format!("judge.quality.{model}"))?;
            let score = Score::from_hundredths(h)
                .map_err(|e| CliError::Config(format!("judge.quality.{model}: {e}")))?;
            quality.insert(model, score);
        }
        if quality.is_empty() {
            return Err(CliError::Config(
                "synthetic backend needs judge.quality with an entry per evaluated model".into(),
            ));
        }
        Some(SyntheticConfig {
            seed: overrides.seed.or(file.judge.seed).unwrap_or(0),
            position_bias_hundredths: file
                .judge
                .position_bias
                .map(|v| points_to_hundredths(v, "judge.position_bias"))
                .transpose()?
                .unwrap_or(0),
            noise_stddev_hundredths: {
                let h = file
                    .judge
                    .noise_stddev
                    .map(|v| points_to_hundredths(v, "judge.noise_stddev"))
                    .transpose()?
                    .unwrap_or(0);
                if h < 0 {
                    return Err(CliError::Config("judge.noise_stddev must be non-negative".into()));
                }
                h
            },
            quality,
        })
    } else {
        if overrides.seed.is_some() {
            return Err(CliError::Usage(format!(
                "--seed only applies to the synthetic backend, not {backend}"
            )));
        }
        None
    };

    let mut live = LiveConfig::default();
    if let Some(v) = file.live.base_url {
        live.base_url = v;
    }
    if let Some(v) = file.live.timeout_secs {
        live.timeout_secs = v;
    }
    if let Some(v) = file.live.attempts {
        if v == 0 {
            return Err(CliError::Config("live.attempts must be at least 1".into()));
        }
        live.attempts = v;
    }
    if let Some(v) = file.live.base_delay_ms {
        live.base_delay_ms = v;
    }
    live.max_output_tokens = file.live.max_output_tokens;
    live.organization = file.live.organization;

    let judge = JudgeConfig {
        backend,
        model: file.judge.model,
        cache_dir,
        synthetic,
        live,
    };

    let strategy: Strategy = file
        .evaluate
        .strategy
        .as_deref()
        .unwrap_or("mec_bpc")
        .parse()
        .map_err(|e: pairjudge_core::CalibrateError| CliError::Config(e.to_string()))?;
    let mut eval = EvalSettings::new(judge.model.clone(), strategy);
    if let Some(k) = file.evaluate.k {
        eval = eval.with_k(k);
    }
    if let Some(t) = file.evaluate.temperature {
        eval = eval.with_temperature(parse_temperature(t, "evaluate.temperature")?);
    }
    if let Some(eps) = file.evaluate.tie_epsilon {
        eval = eval.with_tie_epsilon(points_to_hundredths(eps, "evaluate.tie_epsilon")?);
    }
    if let Some(r) = file.evaluate.parse_retries {
        eval.cell.parse_retries = r;
    }
    if let Some(c) = file.evaluate.concurrency {
        if c == 0 {
            return Err(CliError::Config("evaluate.concurrency must be at least 1".into()));
        }
        eval = eval.with_concurrency(c);
    }
    if let Some(path) = &file.evaluate.template_file {
        let template = Template::from_file(&anchor(path), strategy.template_kind())
            .map_err(|e| CliError::Config(e.to_string()))?;
        eval = eval.with_template(template).map_err(|e| CliError::Config(e.to_string()))?;
    }
    eval.validate().map_err(|e| CliError::Config(e.to_string()))?;

    let audit_kind = match file.audit.template.as_deref().unwrap_or("score_first") {
        "score_first" => TemplateKind::ScoreFirst,
        "evidence_first" => TemplateKind::EvidenceFirst,
        "direct_compare" => TemplateKind::DirectCompare,
        other => {
            return Err(CliError::Config(format!(
                "unknown audit.template {other:?}; expected score_first, evidence_first, or direct_compare"
            )))
        }
    };
    let mut audit = AuditSettings::new(judge.model.clone(), Template::builtin(audit_kind));
    if let Some(k) = file.audit.k {
        audit.cell.k = k;
    }
    if let Some(t) = file.audit.temperature {
        audit.cell.temperature = parse_temperature(t, "audit.temperature")?;
    }
    if let Some(eps) = file.audit.tie_epsilon {
        audit.tie_epsilon_hundredths = points_to_hundredths(eps, "audit.tie_epsilon")?;
    }
    if let Some(r) = file.audit.parse_retries {
        audit.cell.parse_retries = r;
    }
    if let Some(c) = file.audit.concurrency {
        if c == 0 {
            return Err(CliError::Config("audit.concurrency must be at least 1".into()));
        }
        audit.concurrency = c;
    }
    audit.gap_source = match file.audit.gap_source.as_deref().unwrap_or("ab") {
        "ab" => PresentationOrder::Ab,
        "ba" => PresentationOrder::Ba,
        other => {
            return Err(CliError::Config(format!(
                "unknown audit.gap_source {other:?}; expected ab or ba"
            )))
        }
    };
    audit.validate().map_err(|e| CliError::Config(e.to_string()))?;

    let gap_bin_edges_hundredths = match file.audit.gap_bin_edges {
        Some(edges) => {
            let mut out = Vec::with_capacity(edges.len());
            for (i, edge) in edges.iter().enumerate() {
                out.push(points_to_hundredths(*edge, &format!("audit.gap_bin_edges[{i}]"))?);
            }
            if out.is_empty() || !out.windows(2).all(|w| w[0] < w[1]) || out[0] <= 0 {
                return Err(CliError::Config(
                    "audit.gap_bin_edges must be positive and strictly increasing".into(),
                ));
            }
            out
        }
        None => vec![100, 200],
    };

    let out_dir = overrides
        .out_dir
        .clone()
        .or_else(|| file.run.out_dir.as_ref().map(anchor))
        .unwrap_or_else(|| base.join("runs"));

    Ok(RunConfig {
        label: file.run.label,
        out_dir,
        dataset,
        judge,
        eval,
        audit,
        gap_bin_edges_hundredths,
    })
}

fn parse_temperature(v: f64, field: &str) -> Result<Temperature, CliError> {
    Temperature::from_f64(v).map_err(|e| CliError::Config(format!("{field}: {e}")))
}

/// Loads and resolves in one step.
pub fn load(path: &Path, overrides: &Overrides) -> Result<RunConfig, CliError> {
    resolve(load_config_file(path)?, path, overrides)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_config(dir: &Path, body: &str) -> PathBuf {
        let path = dir.join("run.toml");
        std::fs::write(&path, body).unwrap();
        path
    }

    const MINIMAL: &str = r#"
[dataset]
questions = "questions.jsonl"
answers = ["answers.jsonl"]

[judge]
model = "judge-1"
seed = 7
[judge.quality]
"alpha" = 8.0
"beta" = 6.5
"#;

    #[test]
    fn minimal_config_resolves_with_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_config(dir.path(), MINIMAL);
        let config = load(&path, &Overrides::default()).unwrap();
        assert_eq!(config.judge.backend, BackendKind::Synthetic);
        assert_eq!(config.eval.strategy, Strategy::MecBpc);
        assert_eq!(config.eval.cell.k, 3);
        assert_eq!(config.eval.cell.temperature, Temperature::ONE);
        assert_eq!(config.gap_bin_edges_hundredths, vec![100, 200]);
        let synthetic = config.judge.synthetic.unwrap();
        assert_eq!(synthetic.seed, 7);
        assert_eq!(synthetic.quality["beta"].hundredths(), 650);
        // Relative paths anchor at the config file's directory.
        assert_eq!(config.dataset.questions, dir.path().join("questions.jsonl"));
        assert_eq!(config.out_dir, dir.path().join("runs"));
    }

    #[test]
    fn overrides_replace_backend_seed_and_out_dir() {
        let dir = tempfile::tempdir().unwrap();
        let body = MINIMAL.replace(
            "model = \"judge-1\"",
            "model = \"judge-1\"\ncache_dir = \"cache\"",
        );
        let path = write_config(dir.path(), &body);
        let overrides = Overrides {
            backend: Some(BackendKind::Replay),
            seed: None,
            out_dir: Some(dir.path().join("elsewhere")),
        };
        let config = load(&path, &overrides).unwrap();
        assert_eq!(config.judge.backend, BackendKind::Replay);
        assert!(config.judge.synthetic.is_none());
        assert_eq!(config.out_dir, dir.path().join("elsewhere"));
    }

    #[test]
    fn single_chain_strategies_reject_larger_k() {
        let dir = tempfile::tempdir().unwrap();
        let body = format!("{MINIMAL}\n[evaluate]\nstrategy = \"ans_exp\"\nk = 3\n");
        let path = write_config(dir.path(), &body);
        let err = load(&path, &Overrides::default()).unwrap_err();
        assert!(matches!(err, CliError::Config(_)), "{err}");
    }

    #[test]
    fn live_backend_requires_a_cache_dir() {
        let dir = tempfile::tempdir().unwrap();
        let body = MINIMAL.replace("model = \"judge-1\"", "backend = \"live\"\nmodel = \"judge-1\"");
        let path = write_config(dir.path(), &body);
        let err = load(&path, &Overrides::default()).unwrap_err();
        let message = err.to_string();
        assert!(message.contains("cache_dir"), "{message}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        // Most importantly: nobody can smuggle credentials into a config.
        let dir = tempfile::tempdir().unwrap();
        let body = MINIMAL.replace("model = \"judge-1\"", "model = \"judge-1\"\napi_key = \"sk-nope\"");
        let path = write_config(dir.path(), &body);
        let err = load(&path, &Overrides::default()).unwrap_err();
        assert!(err.to_string().contains("api_key"), "{err}");
    }

    #[test]
    fn sub_grid_points_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let body = MINIMAL.replace("\"alpha\" = 8.0", "\"alpha\" = 8.001");
        let path = write_config(dir.path(), &body);
        let err = load(&path, &Overrides::default()).unwrap_err();
        assert!(err.to_string().contains("decimal places"), "{err}");
    }

    #[test]
    fn audit_defaults_are_score_first_single_chain() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_config(dir.path(), MINIMAL);
        let config = load(&path, &Overrides::default()).unwrap();
        assert_eq!(config.audit.cell.template.kind(), TemplateKind::ScoreFirst);
        assert_eq!(config.audit.cell.k, 1);
        assert_eq!(config.audit.gap_source, PresentationOrder::Ab);
    }
}
