use std::path::Path;
use std::process::{Command, Output};

use optbandits::ExperimentConfig;

const SMALL_BANDIT: &str = r#"
name = "tiny"
kind = "bandit"
horizon = 60
seeds = [1, 2]
agents = ["ts", "vbos", "ucb"]
arms = 3

[membership]
agents = ["vbos"]
mc_samples = 2000
"#;

const SMALL_GAME: &str = r#"
name = "tiny_game"
kind = "game_selfplay"
horizon = 30
seeds = [4]
agents = ["vbos", "exp3"]
arms = 3
rows = 3

[membership]
agents = []
"#;

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_optbandits"))
        .args(args)
        .env("OPTBANDITS_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn run_into(config: &Path, out: &Path) -> Output {
    let o = cli(&["run", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    o
}

#[test]
fn run_then_plot_writes_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("tiny.toml");
    std::fs::write(&config, SMALL_BANDIT).unwrap();
    let out = dir.path().join("out");
    run_into(&config, &out);
    for f in ["resolved.toml", "summary.csv", "transcripts_ts.csv", "transcripts_vbos.csv", "transcripts_ucb.csv"] {
        assert!(out.join(f).exists(), "missing {f}");
    }
    let summary = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    // header plus one row per agent and round
    assert_eq!(summary.lines().count(), 1 + 3 * 60);
    let transcript = std::fs::read_to_string(out.join("transcripts_vbos.csv")).unwrap();
    assert_eq!(transcript.lines().count(), 1 + 2 * 60);
    assert!(!std::fs::read_dir(&out).unwrap().any(|e| e.unwrap().path().extension().is_some_and(|x| x == "partial")));

    let resolved = ExperimentConfig::load(&out.join("resolved.toml")).unwrap();
    assert_eq!(resolved, ExperimentConfig::from_toml(SMALL_BANDIT).unwrap());

    let o = cli(&["plot", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let svg = std::fs::read_to_string(out.join("regret.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("vbos"));
    assert!(out.join("plot_regret.csv").exists());
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("game.toml");
    std::fs::write(&config, SMALL_GAME).unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    run_into(&config, &a);
    run_into(&config, &b);
    for f in ["summary.csv", "transcripts_vbos.csv", "transcripts_exp3.csv"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f} differs");
    }
}

#[test]
fn seed_offset_changes_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("tiny.toml");
    std::fs::write(&config, SMALL_BANDIT).unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    run_into(&config, &a);
    let o = cli(&["run", "--config", config.to_str().unwrap(), "--seed-offset", "100", "--out", b.to_str().unwrap()]);
    assert!(o.status.success());
    assert_ne!(std::fs::read(a.join("transcripts_ts.csv")).unwrap(), std::fs::read(b.join("transcripts_ts.csv")).unwrap());
}

#[test]
fn plot_without_results_fails() {
    let dir = tempfile::tempdir().unwrap();
    let o = cli(&["plot", "--out", dir.path().to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("summary.csv"));
}

#[test]
fn invalid_configs_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.toml");
    std::fs::write(&config, SMALL_GAME.replace("\"exp3\"", "\"ucb\"")).unwrap();
    let o = cli(&["run", "--config", config.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert!(!o.status.success());
    std::fs::write(&config, format!("{SMALL_BANDIT}\nunknown_key = 1\n")).unwrap();
    let o = cli(&["run", "--config", config.to_str().unwrap()]);
    assert!(!o.status.success());
}

#[test]
fn verify_lists_its_checks() {
    let o = cli(&["verify", "--list"]);
    assert!(o.status.success());
    let text = String::from_utf8_lossy(&o.stdout);
    for name in ["counterexample_values", "constrained_bandit", "pigeonhole", "negative_control"] {
        assert!(text.contains(name), "{name} not listed");
    }
    let o = cli(&["verify", "--check", "no_such_check"]);
    assert!(!o.status.success());
}

#[test]
fn shipped_configs_validate() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut n = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|x| x == "toml") {
            let cfg = ExperimentConfig::load(&path).unwrap();
            cfg.clone().full_scaled().validate().unwrap();
            n += 1;
        }
    }
    assert!(n >= 6);
}
