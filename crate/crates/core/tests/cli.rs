use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use quantrl::runner::RunManifest;

fn sample_data() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/sample_daily.csv")
}

fn quantrl(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quantrl"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn small_config(dir: &Path, algorithm: &str) -> PathBuf {
    let cfg = serde_json::json!({
        "data": {"path": sample_data(), "start": "2020-01-01", "end": "2021-01-01"},
        "features": {"specs": [
            {"kind": "SMA", "period": 1},
            {"kind": "RSI", "period": 14},
            {"kind": "MOM", "period": 10}
        ]},
        "env": {"window_size": 5, "commission": 0.001},
        "agent": {"algorithm": algorithm, "hyperparams": {
            "total_timesteps": 1500, "batch_size": 16, "buffer_size": 1000,
            "target_update_interval": 100, "hidden_sizes": [16], "n_steps": 32, "n_epochs": 2
        }},
        "seed": 7,
        "output_dir": "run"
    });
    let path = dir.join("config.json");
    fs::write(&path, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
    path
}

fn stderr_json(out: &Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&out.stderr);
    serde_json::from_str(text.trim()).unwrap_or_else(|_| panic!("stderr is not one JSON line: {text}"))
}

#[test]
fn train_backtest_report_compare() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), "DQN");
    let c = cfg.to_str().unwrap();

    let out = quantrl(dir.path(), &["--config", c, "train"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = dir.path().join("run");
    for f in ["policy.bin", "scaler.json", "training_log.csv", "config.json", "manifest.json"] {
        assert!(run.join(f).exists(), "{f}");
    }
    let manifest = RunManifest::read(&run.join("manifest.json")).unwrap();
    assert_eq!(manifest.seed, 7);
    assert_eq!(manifest.algorithm, "DQN");

    let out = quantrl(dir.path(), &["--config", c, "backtest"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["report.json", "equity.csv", "trades.csv", "equity.svg", "ledger.csv", "backtest_manifest.json"] {
        assert!(run.join(f).exists(), "{f}");
    }
    let report = fs::read(run.join("report.json")).unwrap();

    let out = quantrl(dir.path(), &["--config", c, "--out", "again", "report", "--ledger", "run/ledger.csv"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(fs::read(dir.path().join("again/report.json")).unwrap(), report);

    let out = quantrl(
        dir.path(),
        &["compare", "run/report.json", "again/report.json", "--label", "a", "--label", "b", "--output", "cmp.csv"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = fs::read_to_string(dir.path().join("cmp.csv")).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("run,return_pct,"));
    assert!(lines[1].starts_with("a,") && lines[2].starts_with("b,"));
}

#[test]
fn actor_critic_runs_write_a_value_network() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), "PPO");
    let out = quantrl(dir.path(), &["--config", cfg.to_str().unwrap(), "--out", "ppo", "train"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("ppo/value.bin").exists());
    let out = quantrl(dir.path(), &["--config", cfg.to_str().unwrap(), "--out", "ppo", "backtest"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn data_commands() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), "DQN");
    let c = cfg.to_str().unwrap();
    assert!(quantrl(dir.path(), &["--config", c, "ingest"]).status.success());
    let ohlcv = fs::read_to_string(dir.path().join("run/ohlcv.csv")).unwrap();
    assert!(ohlcv.starts_with("Date,Open,High,Low,Close,Volume\n"));
    assert!(ohlcv.lines().nth(1).unwrap().starts_with("2020-"));
    assert!(!ohlcv.contains("2021-"));

    assert!(quantrl(dir.path(), &["--config", c, "features"]).status.success());
    let features = fs::read_to_string(dir.path().join("run/features.csv")).unwrap();
    assert!(features.lines().next().unwrap().contains("RSI"));

    assert!(quantrl(dir.path(), &["--config", c, "corr", "--threshold", "0.95"]).status.success());
    let corr = fs::read_to_string(dir.path().join("run/corr.csv")).unwrap();
    assert_eq!(corr.lines().count(), 4);
    let kept = fs::read_to_string(dir.path().join("run/selected.txt")).unwrap();
    assert!(!kept.trim().is_empty());
}

#[test]
fn errors_are_json_with_exit_codes() {
    let dir = tempfile::tempdir().unwrap();

    let out = quantrl(dir.path(), &["--config", "missing.json", "train"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"]["code"], 2);

    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"agent": {"hyperparams": {"gamma": 1.5}}}"#).unwrap();
    let out = quantrl(dir.path(), &["--config", bad.to_str().unwrap(), "train"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_json(&out)["error"]["message"].as_str().unwrap().contains("agent.hyperparams.gamma"));

    fs::write(&bad, r#"{"unknown": 1}"#).unwrap();
    let out = quantrl(dir.path(), &["--config", bad.to_str().unwrap(), "train"]);
    assert_eq!(out.status.code(), Some(2));

    let nodata = dir.path().join("nodata.json");
    fs::write(&nodata, r#"{"data": {"path": "nowhere.csv"}}"#).unwrap();
    let out = quantrl(dir.path(), &["--config", nodata.to_str().unwrap(), "ingest"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(stderr_json(&out)["error"]["code"], 3);

    let cfg = small_config(dir.path(), "DQN");
    let out = quantrl(dir.path(), &["--config", cfg.to_str().unwrap(), "backtest"]);
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(stderr_json(&out)["error"]["code"], 4);

    let out = quantrl(dir.path(), &["--bogus"]);
    assert_eq!(out.status.code(), Some(2));
}
