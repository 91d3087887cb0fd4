//! End-to-end runs of the `crossrec` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use clap::CommandFactory;
use crossrec::cli::Cli;
use crossrec::io;
use crossrec::modelfile::ModelFile;
use crossrec_core::corpus::{self, Granularity};
use crossrec_core::model::{self, Hyperparams};
use crossrec_core::synth::{self, SynthConfig};
use crossrec_core::topics::TopicalProfiles;
use serde_json::Value;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn crossrec(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_crossrec")).args(args).output().unwrap();
    Run {
        code: out.status.code().unwrap(),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_lines(path: &Path, lines: &[Value]) {
    let text: String = lines.iter().map(|v| format!("{v}\n")).collect();
    fs::write(path, text).unwrap();
}

/// A small synthetic dataset on disk.
fn synth_data(dir: &Path, extra: &[&str]) -> (PathBuf, PathBuf) {
    let mut args = vec![
        "synth",
        "--out-dir",
        s(dir),
        "--n-users",
        "12",
        "--n-source-items",
        "30",
        "--n-target-items",
        "30",
        "--num-topics",
        "5",
    ];
    args.extend_from_slice(extra);
    assert_eq!(crossrec(&args).code, 0);
    (dir.join("interactions.jsonl"), dir.join("catalog.jsonl"))
}

#[test]
fn help_lists_every_flag() {
    let cli = Cli::command();
    for sub in cli.get_subcommands() {
        let help = crossrec(&[sub.get_name(), "--help"]);
        assert_eq!(help.code, 0);
        for arg in sub.get_arguments() {
            if let Some(long) = arg.get_long() {
                assert!(
                    help.stdout.contains(&format!("--{long}")),
                    "{} --help lacks --{long}",
                    sub.get_name()
                );
            }
        }
    }
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let run = crossrec(&["train", "--learning-rate", "0.1"]);
    assert_eq!(run.code, 2);
    assert!(run.stderr.contains("--learning-rate"));
}

#[test]
fn missing_file_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.jsonl");
    let run = crossrec(&["ingest", "--interactions", s(&missing), "--catalog", s(&missing)]);
    assert_eq!(run.code, 2);
    assert!(run.stderr.contains("nope.jsonl"), "{}", run.stderr);
}

#[test]
fn malformed_lines_report_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let catalog = dir.path().join("catalog.jsonl");
    let interactions = dir.path().join("interactions.jsonl");
    write_lines(&catalog, &[serde_json::json!({"item": "v1", "network": "target", "topic": 0})]);
    write_lines(
        &interactions,
        &[
            serde_json::json!({"user": "a", "network": "target", "item": "v1", "ts": 1}),
            serde_json::json!({"user": "a", "network": "target", "item": "v1", "ts": 2, "rating": 5}),
        ],
    );
    let run = crossrec(&[
        "ingest",
        "--interactions",
        s(&interactions),
        "--catalog",
        s(&catalog),
        "--num-topics",
        "1",
    ]);
    assert_eq!(run.code, 2);
    assert!(
        run.stderr.contains("interactions.jsonl:2") && run.stderr.contains("rating"),
        "{}",
        run.stderr
    );

    write_lines(&catalog, &[serde_json::json!({"item": "v1", "network": "target", "topic": 1})]);
    let run = crossrec(&[
        "ingest",
        "--interactions",
        s(&interactions),
        "--catalog",
        s(&catalog),
        "--num-topics",
        "1",
    ]);
    assert_eq!(run.code, 2);
    assert!(run.stderr.contains("catalog.jsonl:1"), "{}", run.stderr);
}

#[test]
fn config_file_and_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("config.json");
    fs::write(
        &cfg,
        r#"{"epochs": 0, "lambda": 0.25, "min_user_interactions": 0, "min_item_interactions": 0}"#,
    )
    .unwrap();
    let (interactions, catalog) = synth_data(dir.path(), &[]);
    let out = dir.path().join("out");
    let run = crossrec(&[
        "train",
        "--config",
        s(&cfg),
        "--interactions",
        s(&interactions),
        "--catalog",
        s(&catalog),
        "--num-topics",
        "5",
        "--out-dir",
        s(&out),
        "--lambda",
        "0.125",
    ]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let model = ModelFile::load(&out.join("model.json")).unwrap();
    assert_eq!(model.hyperparams.lambda, 0.125);
    assert_eq!(model.hyperparams.epochs, 0);

    fs::write(&cfg, r#"{"epoch": 3}"#).unwrap();
    let run = crossrec(&["train", "--config", s(&cfg)]);
    assert_eq!(run.code, 2);
    assert!(run.stderr.contains("epoch"));
}

#[test]
fn zero_epoch_model_is_the_initialization_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let (interactions, catalog) = synth_data(dir.path(), &[]);
    let out = dir.path().join("out");
    let common = [
        "--interactions",
        s(&interactions),
        "--catalog",
        s(&catalog),
        "--num-topics",
        "5",
        "--latent-dim",
        "4",
        "--min-user-interactions",
        "0",
        "--min-item-interactions",
        "0",
        "--seed",
        "9",
        "--beta",
        "0.1",
    ];
    let mut args = vec!["train", "--epochs", "0", "--out-dir", s(&out)];
    args.extend_from_slice(&common);
    assert_eq!(crossrec(&args).code, 0);
    let text = fs::read_to_string(out.join("model.json")).unwrap();
    let file = ModelFile::from_json(&text, Path::new("model.json")).unwrap();
    assert_eq!(file.to_json(), text);

    let ds = io::load_dataset(&interactions, &catalog, 5).unwrap();
    let start = ds.interactions().iter().map(|r| r.ts).min().unwrap();
    let assigned = corpus::assign_intervals(&ds, Granularity::monthly(start)).unwrap();
    let partition = corpus::partition_users(&assigned).unwrap();
    let existing = model::group_mask(partition.train.users(), &partition.existing.members);
    let hp = Hyperparams {
        latent_dim: 4,
        num_topics: 5,
        epochs: 0,
        seed: 9,
        ..Hyperparams::default()
    };
    assert_eq!(file.state, model::init_model(&hp, &partition.train, &existing).unwrap());

    // trained models round-trip bit for bit too
    let mut args = vec!["train", "--epochs", "3", "--out-dir", s(&out)];
    args.extend_from_slice(&common);
    assert_eq!(crossrec(&args).code, 0);
    let text = fs::read_to_string(out.join("model.json")).unwrap();
    let file = ModelFile::from_json(&text, Path::new("model.json")).unwrap();
    let again = ModelFile::from_json(&file.to_json(), Path::new("model.json")).unwrap();
    let bits = |f: &ModelFile| f.state.item_factors.as_slice().iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&file), bits(&again));
    assert_eq!(file, again);
    assert_eq!(fs::read_to_string(out.join("losses.csv")).unwrap().lines().count(), 4);
}

#[test]
fn model_version_is_checked() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    fs::write(&path, r#"{"format": "crossrec-model", "version": 99}"#).unwrap();
    let err = ModelFile::load(&path).unwrap_err();
    assert!(err.to_string().contains("version 99"));
}

#[test]
fn identical_runs_write_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let (interactions, catalog) = synth_data(dir.path(), &[]);
    let train = |out: &Path| {
        crossrec(&[
            "train",
            "--interactions",
            s(&interactions),
            "--catalog",
            s(&catalog),
            "--num-topics",
            "5",
            "--latent-dim",
            "4",
            "--epochs",
            "3",
            "--seed",
            "4",
            "--beta",
            "0.1",
            "--out-dir",
            s(out),
        ])
    };
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(train(&a).code, 0);
    assert_eq!(train(&b).code, 0);
    for f in ["model.json", "losses.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap());
    }
}

/// Three target items; `x` has seen one of them.
fn recommend_fixture(dir: &Path) -> (PathBuf, PathBuf) {
    let catalog = dir.join("catalog.jsonl");
    let interactions = dir.join("interactions.jsonl");
    let mut cat = Vec::new();
    for (i, t) in [("v1", 0), ("v2", 1), ("v3", 0)] {
        cat.push(serde_json::json!({"item": i, "network": "target", "topic": t}));
    }
    cat.push(serde_json::json!({"item": "s1", "network": "source", "topic": 0}));
    cat.push(serde_json::json!({"item": "s2", "network": "source", "topic": 1}));
    write_lines(&catalog, &cat);
    let rec = |u: &str, n: &str, i: &str, ts: i64| serde_json::json!({"user": u, "network": n, "item": i, "ts": ts});
    write_lines(
        &interactions,
        &[
            rec("x", "target", "v1", 0),
            rec("x", "target", "v2", 100),
            rec("x", "source", "s1", 0),
            rec("y", "target", "v3", 50),
            rec("y", "source", "s2", 60),
            rec("z", "target", "v1", 70),
        ],
    );
    (interactions, catalog)
}

#[test]
fn recommend_routes_truncates_and_flags_unknown_users() {
    let dir = tempfile::tempdir().unwrap();
    let (interactions, catalog) = recommend_fixture(dir.path());
    let out = dir.path().join("out");
    let data = [
        "--interactions",
        s(&interactions),
        "--catalog",
        s(&catalog),
        "--num-topics",
        "2",
        "--min-user-interactions",
        "0",
        "--min-item-interactions",
        "0",
    ];
    let mut args = vec![
        "train",
        "--latent-dim",
        "2",
        "--epochs",
        "5",
        "--init-scale",
        "0.5",
        "--out-dir",
        s(&out),
    ];
    args.extend_from_slice(&data);
    assert_eq!(crossrec(&args).code, 0);
    let model_path = out.join("model.json");
    let file = ModelFile::load(&model_path).unwrap();
    // x has the most target activity, so it is the existing user; y and z are new.
    assert_eq!(file.new_users, ["y", "z"]);

    let mut args = vec!["recommend", "--model", s(&model_path), "--user", "x", "--n", "3"];
    args.extend_from_slice(&data);
    let run = crossrec(&args);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let lines: Vec<Value> = run.stdout.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    // two seen items are excluded, one remains
    assert_eq!(lines.len(), 1);
    assert_eq!(lines[0]["item"], "v3");
    assert_eq!(lines[0]["rank"], 1);
    assert_eq!(lines[0]["truncated"], true);

    // scores equal the library prediction for the existing user
    let ds = io::load_dataset(&interactions, &catalog, 2).unwrap();
    let assigned = corpus::assign_intervals(&ds, file.granularity).unwrap();
    let partition = corpus::partition_users(&assigned).unwrap();
    let profiles = TopicalProfiles::build(&partition.train).unwrap();
    let scores = model::predict_existing(&file.state, &profiles, 0).unwrap();
    assert_eq!(lines[0]["score"].as_f64().unwrap(), scores[2]);

    // z has no source history: warning and no items; unknown user: error line and exit 1
    let mut args = vec!["recommend", "--model", s(&model_path), "--user", "z,nobody", "--n", "3"];
    args.extend_from_slice(&data);
    let run = crossrec(&args);
    assert_eq!(run.code, 1);
    assert!(run.stderr.contains("warning") && run.stderr.contains('z'));
    let lines: Vec<Value> = run.stdout.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 1);
    assert_eq!(lines[0]["user"], "nobody");
    assert!(lines[0]["error"].is_string());
}

#[test]
fn fixture_report_matches_golden_files() {
    let dir = tempfile::tempdir().unwrap();
    let config = fixture("fixtures/tiny/config.json");
    let run = crossrec(&["evaluate", "--config", s(&config), "--out-dir", s(dir.path())]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    for f in ["report.json", "report.csv"] {
        assert_eq!(
            fs::read_to_string(dir.path().join(f)).unwrap(),
            fs::read_to_string(fixture("golden").join(f)).unwrap(),
            "{f} differs from the golden copy"
        );
    }
}

#[test]
fn failing_cell_sets_exit_code_one() {
    let dir = tempfile::tempdir().unwrap();
    let config = fixture("fixtures/tiny/config.json");
    let run = crossrec(&[
        "evaluate",
        "--config",
        s(&config),
        "--out-dir",
        s(dir.path()),
        "--train-intervals",
        "5",
        "--test-intervals",
        "1",
    ]);
    assert_eq!(run.code, 1);
    let csv = fs::read_to_string(dir.path().join("report.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().contains("failed"));
}

#[test]
fn evaluate_lists_methods_per_group() {
    let dir = tempfile::tempdir().unwrap();
    let config = fixture("fixtures/tiny/config.json");
    let run = crossrec(&[
        "evaluate",
        "--config",
        s(&config),
        "--out-dir",
        s(dir.path()),
        "--method",
        "timepop,tbknn,timemf,acnrs,proposed",
        "--latent-dim",
        "2",
        "--epochs",
        "2",
        "--knn-k",
        "1,2",
    ]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let csv = fs::read_to_string(dir.path().join("report.csv")).unwrap();
    // five methods, two groups, one list length
    assert_eq!(csv.lines().count(), 1 + 10);
    let inapplicable: Vec<&str> = csv.lines().filter(|l| l.contains(",new,") && l.contains(",false,")).collect();
    assert_eq!(inapplicable.len(), 2);
}

#[test]
fn synthetic_files_reload_losslessly() {
    let dir = tempfile::tempdir().unwrap();
    let (interactions, catalog) = synth_data(dir.path(), &["--seed", "3"]);
    let cfg = SynthConfig {
        n_users: 12,
        n_source_items: 30,
        n_target_items: 30,
        num_topics: 5,
        seed: 3,
        ..SynthConfig::default()
    };
    let generated = synth::generate(&cfg).unwrap();
    let loaded = io::load_dataset(&interactions, &catalog, 5).unwrap();
    assert_eq!(loaded.interactions(), generated.dataset.interactions());
    assert_eq!(loaded.catalog(), generated.dataset.catalog());
    let truth: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("truth.json")).unwrap()).unwrap();
    assert_eq!(truth["users"].as_array().unwrap().len(), 12);
}

#[test]
fn analyze_writes_report_and_series() {
    let dir = tempfile::tempdir().unwrap();
    let (interactions, catalog) = synth_data(dir.path(), &[]);
    let out = dir.path().join("analysis");
    let run = crossrec(&[
        "analyze",
        "--interactions",
        s(&interactions),
        "--catalog",
        s(&catalog),
        "--num-topics",
        "5",
        "--out-dir",
        s(&out),
        "--csv",
    ]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let report: Value = serde_json::from_str(&fs::read_to_string(out.join("analysis.json")).unwrap()).unwrap();
    assert!(report["mean_overlap"].is_number());
    assert_eq!(report["intervals"], 12);
    for f in ["users.csv", "series.csv", "bias.csv"] {
        assert!(out.join(f).exists());
    }
}
