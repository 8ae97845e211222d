use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use pseudofsr::{Method, PathDocument, ScenarioGrid};
use pseudofsr_cli::{simulate, SimulateArgs};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pseudofsr"))
}

fn repo(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join(rel)
}

fn prostate() -> PathBuf {
    repo("../../data/prostate.csv")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn fit_writes_a_readable_document() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("prostate.json");
    let out = bin()
        .arg("fit")
        .arg(prostate())
        .args(["--response", "lpsa", "--B", "10", "--alpha", "0.1", "--alpha", "0.3", "--seed", "1", "--out"])
        .arg(&out_path)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("alpha = 0.1") && stdout.contains("alpha = 0.3"), "{stdout}");

    let doc = PathDocument::read_file(&out_path).unwrap();
    assert_eq!(doc.metadata.p, 8);
    assert_eq!(doc.metadata.b_replicates, 10);
    assert_eq!(doc.metadata.column_names[0], "lcavol");
    assert!(!doc.metadata.column_names.contains(&"lpsa".to_string()));
    assert_eq!(doc.selected.iter().map(|s| s.alpha).collect::<Vec<_>>(), vec![0.1, 0.3]);
    assert_eq!(doc.fsr_per_replicate.len(), 10);
    let again = PathDocument::from_json(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(doc, again);
}

#[test]
fn fit_flags_reach_the_estimator() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("doc.json");
    let out = bin()
        .arg("fit")
        .arg(prostate())
        .args(["--response", "lpsa", "--screen", "pseudo", "--B", "4", "--no-permutation", "--no-intercept"])
        .args(["--lambda-count", "30", "--lambda-ratio", "0.01", "--out"])
        .arg(&out_path)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let doc = PathDocument::read_file(&out_path).unwrap();
    assert!(!doc.metadata.use_permutation);
    assert!(!doc.metadata.intercept);
    assert!(doc.intercepts.is_none() || doc.intercepts.as_ref().unwrap().iter().all(|&b| b == 0.0));
    assert_eq!(doc.m(), 30);
    assert!((doc.lambdas[29] / doc.lambdas[0] - 0.01).abs() < 1e-12);
    assert!(matches!(doc.metadata.screening, pseudofsr::ScreeningMethod::Pseudo { .. }));
}

fn fit_csv(text: &str, extra: &[&str]) -> Output {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("data.csv");
    std::fs::write(&csv, text).unwrap();
    bin().arg("fit").arg(&csv).args(extra).arg("--out").arg(dir.path().join("o.json")).output().unwrap()
}

#[test]
fn malformed_csv_exits_2_naming_the_cell() {
    let out = fit_csv("x,y\n1,2\n3,oops\n", &["--response", "y"]);
    assert_eq!(code(&out), 2);
    let err = stderr(&out);
    assert!(err.contains("row 3") && err.contains("'y'"), "{err}");

    let out = fit_csv("x,y\n1,2\n3,4\n", &["--response", "z"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("'z'"));
}

#[test]
fn cox_without_status_exits_2() {
    let out = fit_csv("x,t,d\n1,2,1\n3,4,0\n5,1,1\n", &["--family", "cox", "--response", "t"]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));
    assert!(stderr(&out).contains("status"));
}

#[test]
fn degenerate_fit_exits_3() {
    let rows: String = (0..20).map(|i| format!("{},{}\n", i, 5.0)).collect();
    let out = fit_csv(&format!("x,y\n{rows}"), &["--response", "y"]);
    assert_eq!(code(&out), 3, "{}", stderr(&out));
}

#[test]
fn missing_input_exits_1() {
    let out = bin().args(["fit", "/nonexistent/data.csv", "--response", "y", "--out", "/tmp/never.json"]).output().unwrap();
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("/nonexistent/data.csv"));
}

#[test]
fn bad_scenario_file_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "[base]\nn = 100\np = 10\namplitude = 1.0\nsparsity = 3\nbogus = 1\n").unwrap();
    let out = bin().arg("simulate").arg(&path).output().unwrap();
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("bogus"));
}

#[test]
fn bundled_scenarios_parse() {
    let factor1 = ScenarioGrid::from_toml(&std::fs::read_to_string(repo("scenarios/factor1_desk.toml")).unwrap()).unwrap();
    let ps: Vec<usize> = factor1.scenarios().iter().map(|s| s.p).collect();
    assert_eq!(ps, vec![30, 70, 110, 150, 190, 230, 330, 430, 530]);
    assert_eq!(factor1.methods, vec![Method::Pseudo1, Method::Pseudo2]);
    assert!(factor1.scenarios().iter().all(|s| s.n == 200 && s.rho == 0.5 && s.amplitude == 1.0 && s.sparsity == 5));
    for name in ["smoke", "null"] {
        ScenarioGrid::from_toml(&std::fs::read_to_string(repo(&format!("scenarios/{name}.toml"))).unwrap()).unwrap();
    }
}

#[test]
fn smoke_scenario_writes_a_summary_quickly() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("smoke.csv");
    let start = Instant::now();
    let out = bin().arg("simulate").arg(repo("scenarios/smoke.toml")).arg("--out").arg(&out_path).output().unwrap();
    assert!(start.elapsed() < Duration::from_secs(60));
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = std::fs::read_to_string(&out_path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("family,method,n,p,"));
    assert!(lines[1].starts_with("linear,pseudo2,100,20,"));
}

#[test]
fn null_scenario_mostly_selects_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let args = SimulateArgs { scenario: repo("scenarios/null.toml"), out: Some(dir.path().join("null.json")) };
    let results = simulate(&args).unwrap();
    assert_eq!(results.len(), 1);
    let r = &results[0];
    assert!(r.empty_fraction() >= 0.7, "empty fraction {}", r.empty_fraction());
    assert!(r.mean_fsr <= 0.3, "mean fsr {}", r.mean_fsr);
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("null.json")).unwrap()).unwrap();
    assert_eq!(json.as_array().unwrap().len(), 1);
}
