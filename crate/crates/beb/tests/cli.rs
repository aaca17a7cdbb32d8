//! Binary-level checks: exit codes and output files.

use std::path::Path;
use std::process::{Command, Output};

fn beb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_beb")).args(args).output().expect("binary runs")
}

fn code(output: &Output) -> i32 {
    output.status.code().expect("no signal")
}

#[test]
fn missing_file_is_an_input_error() {
    let out = beb(&["fit", "--model", "fh", "/no/such/file.csv"]);
    assert_eq!(code(&out), 2, "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn unknown_embedded_name_is_an_input_error() {
    let out = beb(&["fit", "--embedded", "wheat"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn gaussian_data_under_count_model_is_a_schema_error() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("g.csv");
    std::fs::write(&csv, "id,y,D\na,1.0,0.5\nb,2.0,0.5\nc,0.4,0.5\nd,1.1,0.5\n").unwrap();
    let out = beb(&["fit", "--model", "pg", csv.to_str().unwrap()]);
    assert_eq!(code(&out), 2, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    // same file under the right model is fine
    let ok = beb(&["fit", "--model", "fh", csv.to_str().unwrap()]);
    assert_eq!(code(&ok), 0, "stderr: {}", String::from_utf8_lossy(&ok.stderr));
}

#[test]
fn embedded_fixture_under_count_model_is_a_schema_error() {
    let out = beb(&["fit", "--model", "pg", "--embedded", "corn"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn all_zero_counts_are_a_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("z.csv");
    std::fs::write(&csv, "id,z,n\na,0,10\nb,0,20\nc,0,30\nd,0,40\n").unwrap();
    let out = beb(&["fit", "--model", "pg", csv.to_str().unwrap()]);
    assert_eq!(code(&out), 3, "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn missing_dataset_argument_is_an_input_error() {
    let out = beb(&["estimate", "--model", "fh"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn simulate_without_out_dir_is_an_input_error() {
    let out = beb(&["simulate", "--profile", "fh", "--seed", "1"]);
    assert_eq!(code(&out), 2);
}

fn assert_files(dir: &Path, names: &[&str]) {
    for name in names {
        assert!(dir.join(name).is_file(), "missing {name} in {}", dir.display());
    }
}

#[test]
fn estimate_writes_csv_summary_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("run");
    let out = beb(&[
        "estimate", "--embedded", "corn", "--seed", "3", "--bootstrap", "20", "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert_files(&out_dir, &["estimates.csv", "summary.json", "manifest.json"]);

    let csv = std::fs::read_to_string(out_dir.join("estimates.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "id,direct,eb,beb,sd,pct_rel_diff");
    assert_eq!(csv.lines().count(), 9); // header + 8 areas

    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["command"], "estimate");
    assert_eq!(manifest["seed"], 3);
    assert_eq!(manifest["bootstrap"]["b"], 20);
}

#[test]
fn diagnose_writes_draws_and_histograms() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("diag");
    let out = beb(&[
        "diagnose", "--embedded", "corn", "--seed", "8", "--bootstrap", "30", "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert_files(&out_dir, &["draws.csv", "histograms.svg", "manifest.json"]);

    let csv = std::fs::read_to_string(out_dir.join("draws.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "replicate,param_1,param_2"); // beta0, A
    assert_eq!(lines.len(), 32); // header + 30 replicates + ml row
    assert!(lines[31].starts_with("ml,"));

    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("fraction of replicates with A = 0"), "stdout: {stdout}");

    let svg = std::fs::read_to_string(out_dir.join("histograms.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
}

#[test]
fn simulate_writes_results_and_rerun_matches() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("study.cfg");
    std::fs::write(
        &cfg,
        "model = pg\nm_grid = 5\nhyper_grid = 20\nmu = 1\nr = 3\nb_grid = 2\nseed = 14\n",
    )
    .unwrap();
    let s1 = dir.path().join("s1");
    let out = beb(&["simulate", "--config", cfg.to_str().unwrap(), "--out", s1.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert_files(&s1, &["results.csv", "results.svg", "manifest.json"]);

    let csv = std::fs::read_to_string(s1.join("results.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "model,m,truth,estimator,B,mse,mc_se,R");
    assert_eq!(lines.len(), 3); // header + EB row + BEB(2) row

    let s2 = dir.path().join("s2");
    let rerun = beb(&["rerun", s1.join("manifest.json").to_str().unwrap(), "--out", s2.to_str().unwrap()]);
    assert_eq!(code(&rerun), 0, "stderr: {}", String::from_utf8_lossy(&rerun.stderr));
    assert_eq!(std::fs::read(s1.join("results.csv")).unwrap(), std::fs::read(s2.join("results.csv")).unwrap());
}

#[test]
fn rerun_of_missing_manifest_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = beb(&[
        "rerun",
        dir.path().join("nope.json").to_str().unwrap(),
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn seedless_estimate_still_records_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("run");
    let out = beb(&[
        "estimate", "--embedded", "corn", "--bootstrap", "10", "--out", out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("manifest.json")).unwrap())
            .unwrap();
    assert!(manifest["seed"].is_u64());
    assert_eq!(manifest["seed"], manifest["bootstrap"]["seed"]);
}
