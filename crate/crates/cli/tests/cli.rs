//! End-to-end runs of the `nccover` binary.

use std::path::PathBuf;
use std::process::{Command, Output};
use std::time::{Duration, Instant};

const SUBCOMMANDS: [&str; 14] = [
    "bumps",
    "line-partition",
    "circle-cover",
    "torus-cover",
    "torus-area",
    "galois-check",
    "vn-orth",
    "star-check",
    "connection-check",
    "dirac-lift",
    "dixmier",
    "root-extension",
    "mapping-cone",
    "su2-disconnect",
];

fn nccover(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nccover")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn report(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is a JSON report")
}

/// Fresh scratch directory per test.
fn scratch(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("nccover-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn every_smoke_preset_passes_quickly() {
    for name in SUBCOMMANDS {
        let start = Instant::now();
        let out = nccover(&[name, "--preset", "smoke"]);
        let elapsed = start.elapsed();
        assert_eq!(code(&out), 0, "{name}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(elapsed < Duration::from_secs(10), "{name} took {elapsed:?}");
        let json = report(&out);
        assert_eq!(json["schema"], 1);
        assert_eq!(json["experiment"], name);
        assert_eq!(json["pass"], true);
        assert!(json.get("wall_time").is_none());
    }
}

#[test]
fn json_is_byte_reproducible() {
    for name in ["vn-orth", "dixmier", "su2-disconnect"] {
        let first = nccover(&[name, "--preset", "smoke"]);
        let second = nccover(&[name, "--preset", "smoke"]);
        assert_eq!(code(&first), 0);
        assert_eq!(first.stdout, second.stdout, "{name}");
    }
}

#[test]
fn failed_check_exits_one() {
    let out = nccover(&["su2-disconnect", "--n", "2"]);
    assert_eq!(code(&out), 1);
    let json = report(&out);
    assert_eq!(json["pass"], false);
    let failed: Vec<&str> =
        json["checks"].as_array().unwrap().iter().filter(|c| c["pass"] == false).map(|c| c["name"].as_str().unwrap()).collect();
    assert_eq!(failed, ["labels_distinct"]);
}

#[test]
fn bad_parameters_exit_two() {
    assert_eq!(code(&nccover(&["circle-cover", "--grid", "8"])), 2);
    assert_eq!(code(&nccover(&["galois-check", "--group", "Q8"])), 2);
    assert_eq!(code(&nccover(&["dirac-lift", "--preset", "smoke", "--group", "Z0"])), 2);
    assert_eq!(code(&nccover(&["galois-check", "--preset", "nonsense"])), 2);
    assert_eq!(code(&nccover(&["bumps", "--no-such-flag"])), 2);
    assert_eq!(code(&nccover(&["no-such-command"])), 2);
}

#[test]
fn numerical_error_exits_three() {
    let out = nccover(&["torus-area", "--cutoff", "1"]);
    assert_eq!(code(&out), 3);
    assert!(out.stdout.is_empty());
}

#[test]
fn config_file_sets_parameters_and_flags_win() {
    let dir = scratch("config");
    let path = dir.join("bumps.json");
    std::fs::write(&path, r#"{"experiment": "bumps", "grid": 64}"#).unwrap();
    let cfg = path.to_str().unwrap();
    assert_eq!(report(&nccover(&["bumps", "--config", cfg]))["params"]["grid"], 64);
    assert_eq!(report(&nccover(&["bumps", "--config", cfg, "--grid", "128"]))["params"]["grid"], 128);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn config_errors_exit_two() {
    let dir = scratch("badconfig");
    let unknown = dir.join("unknown.json");
    std::fs::write(&unknown, r#"{"gird": 64}"#).unwrap();
    assert_eq!(code(&nccover(&["bumps", "--config", unknown.to_str().unwrap()])), 2);
    let other = dir.join("other.json");
    std::fs::write(&other, r#"{"experiment": "dixmier"}"#).unwrap();
    assert_eq!(code(&nccover(&["bumps", "--config", other.to_str().unwrap()])), 2);
    let missing = dir.join("missing.json");
    assert_eq!(code(&nccover(&["bumps", "--config", missing.to_str().unwrap()])), 2);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn output_flag_writes_the_report() {
    let dir = scratch("output");
    let path = dir.join("report.json");
    let out = nccover(&["bumps", "--preset", "smoke", "--output", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(json["experiment"], "bumps");
    std::fs::remove_dir_all(&dir).unwrap();
}

fn read_csv(path: &std::path::Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(str::to_string).collect();
    let rows = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    (header, rows)
}

#[test]
fn plot_data_is_written_as_csv() {
    let dir = scratch("plots");
    let plots = dir.to_str().unwrap();

    assert_eq!(code(&nccover(&["dixmier", "--preset", "smoke", "--plot-dir", plots])), 0);
    let (header, rows) = read_csv(&dir.join("dixmier_sigma_curve.csv"));
    assert_eq!(header, ["n", "log_n", "sigma"]);
    assert_eq!(rows.len(), 64);
    let (header, rows) = read_csv(&dir.join("dixmier_tau_curve.csv"));
    assert_eq!(header, ["lambda", "tau"]);
    assert!(!rows.is_empty());

    assert_eq!(code(&nccover(&["dirac-lift", "--preset", "smoke", "--plot-dir", plots])), 0);
    let (header, rows) = read_csv(&dir.join("dirac-lift_double_cover_spectrum.csv"));
    assert_eq!(header, ["index", "eigenvalue"]);
    assert!(rows.windows(2).all(|w| w[0][1] <= w[1][1]));

    assert_eq!(code(&nccover(&["bumps", "--preset", "smoke", "--plot-dir", plots])), 0);
    let (header, rows) = read_csv(&dir.join("bumps_bumps.csv"));
    assert_eq!(header, ["phi", "b1", "b2"]);
    assert!(rows.iter().all(|r| (r[1] * r[1] + r[2] * r[2] - 1.0).abs() <= 1e-12));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn saved_actions_load_back() {
    let dir = scratch("actions");
    for (preset, galois) in [("boring", 1.0), ("conjugation", 1.0), ("trivial", 0.0)] {
        let path = dir.join(format!("{preset}.json"));
        let file = path.to_str().unwrap();
        let saved = nccover(&["galois-check", "--preset", preset, "--save-action", file]);
        assert_eq!(code(&saved), 0, "{preset}");
        let loaded = nccover(&["galois-check", "--action", file]);
        assert_eq!(code(&loaded), 0, "{preset}: {}", String::from_utf8_lossy(&loaded.stderr));
        let json = report(&loaded);
        let solver = json["checks"].as_array().unwrap().iter().find(|c| c["name"] == "rank_verdict_agrees").unwrap().clone();
        assert_eq!(solver["pass"], true);
        assert_eq!(json["estimates"]["rank"].as_f64() == json["estimates"]["codomain_dim"].as_f64(), galois == 1.0);
    }
    let broken = dir.join("broken.json");
    std::fs::write(&broken, r#"{"group": {"labels": ["e"], "table": [[0]]}}"#).unwrap();
    assert_eq!(code(&nccover(&["galois-check", "--action", broken.to_str().unwrap()])), 2);
    assert_eq!(code(&nccover(&["galois-check", "--preset", "random", "--save-action", broken.to_str().unwrap()])), 2);
    std::fs::remove_dir_all(&dir).unwrap();
}
