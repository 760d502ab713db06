//! End-to-end tests that drive the compiled binary against the bundled
//! fixture dataset: command wiring, run-directory layout, stdout shape,
//! determinism across processes, and the exit-code contract.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn pairjudge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pairjudge"))
        .args(args)
        .output()
        .expect("binary should spawn")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn assert_exit(output: &Output, code: i32) {
    assert_eq!(
        output.status.code(),
        Some(code),
        "exit code mismatch\nstdout:\n{}\nstderr:\n{}",
        stdout(output),
        stderr(output)
    );
}

/// Extracts the run directory announced on stdout.
fn announced_run_dir(output: &Output) -> PathBuf {
    let text = stdout(output);
    let line = text
        .lines()
        .find_map(|l| l.strip_prefix("run directory: "))
        .unwrap_or_else(|| panic!("no run directory line in stdout:\n{text}"));
    PathBuf::from(line.trim())
}

fn read_json(path: &Path) -> serde_json::Value {
    let text = std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    serde_json::from_str(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn demo_config() -> String {
    fixture("configs/demo.toml").display().to_string()
}

#[test]
fn evaluate_writes_a_complete_run_directory() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().display().to_string();
    let output = pairjudge(&["evaluate", "--config", &demo_config(), "--out-dir", &out_dir]);
    assert_exit(&output, 0);

    let text = stdout(&output);
    assert!(text.contains("alpha-13b vs. beta-13b under judge sim-judge-1"), "stdout:\n{text}");
    assert!(text.contains("verdicts over 8 questions"), "stdout:\n{text}");

    let run_dir = announced_run_dir(&output);
    assert!(run_dir.starts_with(tmp.path()), "run dir {} not under --out-dir", run_dir.display());
    for name in ["summary.json", "per_question.jsonl", "report.md", "config.json"] {
        assert!(run_dir.join(name).is_file(), "missing {name} in {}", run_dir.display());
    }

    let summary = read_json(&run_dir.join("summary.json"));
    assert_eq!(summary["command"], "evaluate");
    assert_eq!(summary["strategy"], "mec_bpc");
    assert_eq!(summary["k"], 3);
    assert_eq!(summary["questions"], 8);
    assert_eq!(summary["completed"], 8);
    assert_eq!(summary["failed"], 0);
    let verdicts = &summary["verdicts"];
    let total = verdicts["model_a"].as_u64().unwrap()
        + verdicts["model_b"].as_u64().unwrap()
        + verdicts["tie"].as_u64().unwrap();
    assert_eq!(total, 8);
    assert!(summary.get("created_at").is_none(), "summaries must stay timestamp-free");
    assert!(summary.get("backend").is_none(), "summaries must not identify the backend");

    // Provenance lives in config.json instead.
    let provenance = read_json(&run_dir.join("config.json"));
    assert_eq!(provenance["command"], "evaluate");
    assert_eq!(provenance["backend"], "synthetic");
    assert_eq!(provenance["judge_model"], "sim-judge-1");
    assert_eq!(provenance["planned_judge_calls"], 48, "8 questions x 2 orders x 3 chains");
    assert!(provenance["created_at"].is_string());
    let inputs = provenance["inputs"].as_array().unwrap();
    assert!(!inputs.is_empty());
    for input in inputs {
        assert_eq!(input["sha256"].as_str().unwrap().len(), 64);
    }

    // Eight rows, one per question, each with both presentation orders.
    let rows = std::fs::read_to_string(run_dir.join("per_question.jsonl")).unwrap();
    let rows: Vec<serde_json::Value> =
        rows.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(rows.len(), 8);
    for row in &rows {
        assert_eq!(row["status"], "completed");
        assert_eq!(row["cells"].as_array().unwrap().len(), 2);
    }
}

#[test]
fn evaluate_is_deterministic_across_processes() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().display().to_string();
    let first = pairjudge(&["evaluate", "--config", &demo_config(), "--out-dir", &out_dir]);
    let second = pairjudge(&["evaluate", "--config", &demo_config(), "--out-dir", &out_dir]);
    assert_exit(&first, 0);
    assert_exit(&second, 0);
    let dir_a = announced_run_dir(&first);
    let dir_b = announced_run_dir(&second);
    assert_ne!(dir_a, dir_b, "each invocation gets a fresh run directory");
    for name in ["summary.json", "per_question.jsonl", "report.md"] {
        assert_eq!(
            std::fs::read(dir_a.join(name)).unwrap(),
            std::fs::read(dir_b.join(name)).unwrap(),
            "{name} differs across identical invocations"
        );
    }
}

#[test]
fn seed_override_changes_the_verdict_inputs() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().display().to_string();
    let base = pairjudge(&["evaluate", "--config", &demo_config(), "--out-dir", &out_dir]);
    let reseeded =
        pairjudge(&["evaluate", "--config", &demo_config(), "--out-dir", &out_dir, "--seed", "99"]);
    assert_exit(&base, 0);
    assert_exit(&reseeded, 0);
    let rows_a = std::fs::read(announced_run_dir(&base).join("per_question.jsonl")).unwrap();
    let rows_b = std::fs::read(announced_run_dir(&reseeded).join("per_question.jsonl")).unwrap();
    assert_ne!(rows_a, rows_b, "a different judge seed must change the sampled scores");
}

#[test]
fn audit_bias_writes_conflict_tables() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().display().to_string();
    let output = pairjudge(&["audit-bias", "--config", &demo_config(), "--out-dir", &out_dir]);
    assert_exit(&output, 0);
    assert!(stdout(&output).contains("conflict rate: "), "stdout:\n{}", stdout(&output));

    let run_dir = announced_run_dir(&output);
    for name in ["summary.json", "report.md", "conflict.csv", "gap_bins.csv", "config.json"] {
        assert!(run_dir.join(name).is_file(), "missing {name} in {}", run_dir.display());
    }

    let summary = read_json(&run_dir.join("summary.json"));
    assert_eq!(summary["command"], "audit-bias");
    assert_eq!(summary["questions"], 8);
    assert_eq!(summary["gap_bins"].as_array().unwrap().len(), 3);

    let conflict_csv = std::fs::read_to_string(run_dir.join("conflict.csv")).unwrap();
    let mut lines = conflict_csv.lines();
    assert_eq!(lines.next(), Some("question_id,category,verdict_ab,verdict_ba,conflict,gap"));
    assert_eq!(lines.count(), 8);

    let bins_csv = std::fs::read_to_string(run_dir.join("gap_bins.csv")).unwrap();
    assert!(bins_csv.starts_with("bin,total,conflicts,rate,rate_exact\n"), "{bins_csv}");

    let report = std::fs::read_to_string(run_dir.join("report.md")).unwrap();
    assert!(report.contains("| Judge | Comparison |"), "report:\n{report}");

    let provenance = read_json(&run_dir.join("config.json"));
    assert_eq!(provenance["planned_judge_calls"], 16, "8 questions x 2 orders x 1 chain");
}

#[test]
fn agreement_scores_an_existing_run() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().display().to_string();
    let evaluated = pairjudge(&["evaluate", "--config", &demo_config(), "--out-dir", &out_dir]);
    assert_exit(&evaluated, 0);
    let eval_dir = announced_run_dir(&evaluated).display().to_string();

    let annotations = fixture("annotations.jsonl").display().to_string();
    let output = pairjudge(&[
        "agreement",
        "--run",
        &eval_dir,
        "--annotations",
        &annotations,
        "--out-dir",
        &out_dir,
    ]);
    assert_exit(&output, 0);
    let text = stdout(&output);
    assert!(text.contains("MEC+BPC (k = 3)"), "stdout:\n{text}");
    assert!(text.contains("annotator-1"), "stdout:\n{text}");

    let run_dir = announced_run_dir(&output);
    let summary = read_json(&run_dir.join("summary.json"));
    assert_eq!(summary["command"], "agreement");
    assert_eq!(summary["n"], 8);
    assert_eq!(summary["annotators"].as_array().unwrap().len(), 3);
    // Judge row plus one row per annotator.
    assert_eq!(summary["rows"].as_array().unwrap().len(), 4);

    let report = std::fs::read_to_string(run_dir.join("report.md")).unwrap();
    assert!(report.contains("| Evaluator | Method | Acc. (%) | Kap. |"), "report:\n{report}");
    assert!(report.contains('/'), "report should show exact fractions:\n{report}");
}

#[test]
fn sweep_k_writes_one_row_per_chain_count() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().display().to_string();
    let output = pairjudge(&[
        "sweep-k",
        "--config",
        &demo_config(),
        "--out-dir",
        &out_dir,
        "--ks",
        "1,3",
    ]);
    assert_exit(&output, 0);
    let text = stdout(&output);
    assert!(text.contains("k = 1: accuracy"), "stdout:\n{text}");
    assert!(text.contains("k = 3: accuracy"), "stdout:\n{text}");

    let run_dir = announced_run_dir(&output);
    let csv = std::fs::read_to_string(run_dir.join("sweep.csv")).unwrap();
    let mut lines = csv.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("k,"), "{header}");
    let ks: Vec<&str> = lines.map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(ks, ["1", "3"]);

    let summary = read_json(&run_dir.join("summary.json"));
    assert_eq!(summary["command"], "sweep-k");
}

#[test]
fn cache_verify_and_inspect_handle_real_and_corrupt_caches() {
    use pairjudge_core::{
        CompletionCache, EvalSettings, Question, RecordingJudge, ResponsePair, Strategy,
        SyntheticJudge, SyntheticJudgeSpec,
    };

    let tmp = tempfile::tempdir().unwrap();
    let cache_dir = tmp.path().join("cache");
    let items = vec![(
        Question::new("c-1", "generic", "Which answer is better?").unwrap(),
        ResponsePair::new("c-1", "alpha", "A thorough answer.", "beta", "A terse answer.").unwrap(),
    )];
    let spec = SyntheticJudgeSpec {
        base_quality: [("alpha".to_string(), "8".parse().unwrap()), ("beta".to_string(), "6".parse().unwrap())]
            .into_iter()
            .collect(),
        position_bias_hundredths: 0,
        noise_stddev_hundredths: 0,
        seed: 1,
    };
    let judge = RecordingJudge::new(
        SyntheticJudge::new(spec),
        CompletionCache::open(&cache_dir).unwrap(),
    );
    let settings = EvalSettings::new("sim-judge-1", Strategy::Ec).with_concurrency(1);
    pairjudge_core::evaluate_dataset(&judge, &settings, &items).unwrap();
    assert_eq!(judge.cache().len(), 1);

    let dir_arg = cache_dir.display().to_string();
    let verify = pairjudge(&["cache", "verify", "--cache-dir", &dir_arg]);
    assert_exit(&verify, 0);
    assert!(stdout(&verify).contains("cache is clean"), "stdout:\n{}", stdout(&verify));

    let inspect = pairjudge(&["cache", "inspect", "--cache-dir", &dir_arg]);
    assert_exit(&inspect, 0);
    assert!(stdout(&inspect).contains("sim-judge-1"), "stdout:\n{}", stdout(&inspect));

    // A mangled line turns verification into an I/O failure.
    let file = std::fs::read_dir(&cache_dir)
        .unwrap()
        .filter_map(|e| e.ok().map(|e| e.path()))
        .find(|p| p.extension().is_some_and(|e| e == "jsonl"))
        .expect("the cache holds one JSONL file");
    let mut bytes = std::fs::read(&file).unwrap();
    bytes.extend_from_slice(b"{ not json\n");
    std::fs::write(&file, bytes).unwrap();
    let corrupt = pairjudge(&["cache", "verify", "--cache-dir", &dir_arg]);
    assert_exit(&corrupt, 5);
}

#[test]
fn exit_codes_distinguish_failure_classes() {
    // Usage: missing required flag, unknown subcommand.
    assert_exit(&pairjudge(&["evaluate"]), 1);
    assert_exit(&pairjudge(&["frobnicate"]), 1);
    assert_exit(&pairjudge(&["--help"]), 0);

    // Config: nonexistent config file.
    assert_exit(&pairjudge(&["evaluate", "--config", "/nonexistent/run.toml"]), 2);

    // Usage: seed override without a synthetic judge (a flag problem, not a
    // config-file problem).
    let tmp = tempfile::tempdir().unwrap();
    std::fs::create_dir(tmp.path().join("cache")).unwrap();
    let replay_toml = tmp.path().join("replay.toml");
    std::fs::write(
        &replay_toml,
        format!(
            r#"
[dataset]
questions = {questions:?}
answers = [{answers:?}]

[judge]
backend = "replay"
model = "sim-judge-1"
cache_dir = "cache"

[evaluate]
strategy = "ec"
"#,
            questions = fixture("questions.jsonl"),
            answers = fixture("answers.jsonl"),
        ),
    )
    .unwrap();
    let replay_arg = replay_toml.display().to_string();
    assert_exit(&pairjudge(&["evaluate", "--config", &replay_arg, "--seed", "3"]), 1);

    // Backend: replaying against an empty cache misses immediately.
    assert_exit(&pairjudge(&["evaluate", "--config", &replay_arg]), 4);

    // Dataset: config resolves but the questions file is missing.
    let broken_toml = tmp.path().join("broken.toml");
    std::fs::write(
        &broken_toml,
        format!(
            r#"
[dataset]
questions = "missing.jsonl"
answers = [{answers:?}]

[judge]
backend = "synthetic"
model = "sim-judge-1"
seed = 1
position_bias = 0.0
noise_stddev = 0.0

[judge.quality]
"alpha-13b" = 8.0
"beta-13b" = 6.5

[evaluate]
strategy = "ec"
"#,
            answers = fixture("answers.jsonl"),
        ),
    )
    .unwrap();
    let broken_arg = broken_toml.display().to_string();
    assert_exit(&pairjudge(&["evaluate", "--config", &broken_arg]), 3);

    // Usage: agreement pointed at a directory that is not a run.
    let not_a_run = tmp.path().join("empty");
    std::fs::create_dir(&not_a_run).unwrap();
    let annotations = fixture("annotations.jsonl").display().to_string();
    let output = pairjudge(&[
        "agreement",
        "--run",
        &not_a_run.display().to_string(),
        "--annotations",
        &annotations,
    ]);
    assert_exit(&output, 1);
}
