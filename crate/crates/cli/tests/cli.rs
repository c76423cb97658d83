use std::fs;
use std::io::BufReader;
use std::path::Path;
use std::process::{Command, Output};

use arithsphere::grid::{read_grid, write_grid, GridFormat};
use arithsphere::GridFunction;
use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_arithsphere"));
    c.env_remove("ARITHSPHERE_CACHE");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn error_json(o: &Output) -> Value {
    let text = String::from_utf8(o.stderr.clone()).unwrap();
    serde_json::from_str(text.trim()).unwrap_or_else(|e| panic!("{e}: {text}"))
}

#[test]
fn shell_count_matches_jacobi() {
    let o = run(&[
        "shell", "--d", "4", "--k", "2", "--lambda", "25", "--mode", "count",
    ]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.starts_with("# config "));
    assert!(out.contains("\n25,248,248,jacobi,true\n"), "{out}");
}

#[test]
fn shell_count_off_jacobi_uses_enumeration() {
    let o = run(&["shell", "--d", "3", "--lambda", "1..6", "--mode", "count"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("\n3,8,8,enumeration,true\n"), "{out}");
    assert!(out.contains("\n6,24,24,enumeration,true\n"), "{out}");
}

#[test]
fn kernel_check_example() {
    let o = run(&[
        "mult",
        "--kernel-check",
        "--q",
        "2",
        "--a",
        "1",
        "--lambda",
        "16",
        "--x",
        "1,0,2,0",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["residual"].as_f64().unwrap() <= 1e-6);
    assert_eq!(v["pass"], true);
    assert_eq!(v["config"]["q"], 2);
}

#[test]
fn kernel_check_failure_still_prints_the_result() {
    let o = run(&[
        "mult",
        "--kernel-check",
        "--q",
        "2",
        "--a",
        "1",
        "--lambda",
        "16",
        "--x",
        "1,0,2,0",
        "--tol",
        "0",
    ]);
    assert!(!o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["pass"], false);
    let e = error_json(&o);
    assert_eq!(e["error"], "tolerance");
    assert_eq!(e["command"], "mult");
}

#[test]
fn errors_follow_the_json_schema() {
    let o = run(&["shell", "--lambda", "0"]);
    assert_eq!(o.status.code(), Some(1));
    let e = error_json(&o);
    let keys: Vec<&String> = e.as_object().unwrap().keys().collect();
    assert_eq!(keys, ["command", "detail", "error"]);
    assert_eq!(e["command"], "shell");

    let o = run(&["norm", "--p", "3", "--lambda", "5"]);
    assert!(!o.status.success());
    assert_eq!(error_json(&o)["error"], "invalid_exponent");

    let o = run(&[
        "mult", "--split", "--lambda", "101", "--j", "3", "--delta", "2", "--xi", "0,0,0,0",
    ]);
    assert_eq!(error_json(&o)["error"], "regime");

    let o = run(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_json(&o)["error"], "usage");
}

fn norm_args(out: &Path) -> Vec<String> {
    [
        "norm",
        "--p",
        "1.5",
        "--lambda",
        "9,11,13,15,17",
        "--method",
        "probe",
        "--no-timing",
        "--out",
    ]
    .iter()
    .map(|s| s.to_string())
    .chain([out.display().to_string()])
    .collect()
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    assert!(bin().args(norm_args(&a)).status().unwrap().success());
    assert!(bin().args(norm_args(&b)).status().unwrap().success());
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# config {"));
    assert_eq!(lines[1], "lambda,estimate,method,iters,seconds");
    assert_eq!(lines.len(), 2 + 5 + 1);
    assert!(lines[7].starts_with("# fit {"));
    let fit: Value = serde_json::from_str(lines[7].trim_start_matches("# fit ")).unwrap();
    assert!(fit["slope"].as_f64().unwrap() < 0.0);
}

#[test]
fn cache_hits_match_cold_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let cold = dir.path().join("cold.csv");
    let warm1 = dir.path().join("warm1.csv");
    let warm2 = dir.path().join("warm2.csv");
    assert!(bin().args(norm_args(&cold)).status().unwrap().success());
    for out in [&warm1, &warm2] {
        let s = bin()
            .env("ARITHSPHERE_CACHE", &cache)
            .args(norm_args(out))
            .status()
            .unwrap();
        assert!(s.success());
    }
    assert!(fs::read_dir(&cache).unwrap().count() >= 5);
    let cold = fs::read_to_string(cold).unwrap();
    assert_eq!(cold, fs::read_to_string(warm1).unwrap());
    assert_eq!(cold, fs::read_to_string(warm2).unwrap());
}

#[test]
fn append_writes_the_header_once() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rows.csv");
    for lambda in ["9", "11"] {
        let o = run(&[
            "norm",
            "--p",
            "2",
            "--lambda",
            lambda,
            "--append",
            "--no-timing",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success());
    }
    let text = fs::read_to_string(out).unwrap();
    assert_eq!(text.matches("# config").count(), 1);
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn shells_are_enumerated_into_the_cache() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "--cache",
        dir.path().to_str().unwrap(),
        "shell",
        "--lambda",
        "1..4",
        "--mode",
        "enumerate",
    ]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("\n1,8,"), "{out}");
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 4);

    let o = run(&["shell", "--lambda", "1..4", "--mode", "enumerate"]);
    assert!(!o.status.success());
}

#[test]
fn averaging_a_delta_spreads_its_mass() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("delta.csv");
    let mut buf = Vec::new();
    write_grid(&GridFunction::delta(4), GridFormat::Csv, &mut buf).unwrap();
    fs::write(&input, buf).unwrap();
    let o = run(&["avg", "--input", input.to_str().unwrap(), "--lambda", "5"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let g = read_grid(BufReader::new(&o.stdout[..]), GridFormat::Csv).unwrap();
    assert!((g.sum() - 1.0).abs() < 1e-12);
    assert!((g.get(&[2, 1, 0, 0]) - 1.0 / 48.0).abs() < 1e-15);

    let o = run(&[
        "avg",
        "--input",
        input.to_str().unwrap(),
        "--lambda",
        "1..3",
        "--maximal",
    ]);
    assert!(o.status.success());
    let g = read_grid(BufReader::new(&o.stdout[..]), GridFormat::Csv).unwrap();
    assert!((g.get(&[1, 0, 0, 0]) - 1.0 / 8.0).abs() < 1e-15);
}

#[test]
fn sums_agree_with_direct_evaluation() {
    let o = run(&["sums", "ramanujan", "--q", "30", "--n", "12"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["residual"].as_f64().unwrap() < 1e-9);
    let o = run(&[
        "sums",
        "dual-check",
        "--a",
        "2",
        "--q",
        "9",
        "--x",
        "1,2,3,4",
    ]);
    assert!(o.status.success());
    let o = run(&[
        "sums",
        "weil-scan",
        "--q-max",
        "12",
        "--lambda",
        "25",
        "--m",
        "1,0,0,0",
    ]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("# max_ratio="));
    let o = run(&["sums", "gauss", "--a", "1", "--q", "5", "--m", "1,0"]);
    assert!(!o.status.success());
}

#[test]
fn report_merges_norm_and_scan_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let norm = dir.path().join("norm.csv");
    let scan = dir.path().join("scan.json");
    assert!(bin().args(norm_args(&norm)).status().unwrap().success());
    let o = run(&[
        "mult",
        "--scan",
        "--lambda",
        "9,11,13,15,17",
        "--random-samples",
        "200",
        "--rational-samples",
        "200",
        "--refine-candidates",
        "2",
        "--refine-rounds",
        "3",
        "--out",
        scan.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&fs::read_to_string(&scan).unwrap()).unwrap();
    assert_eq!(v["reports"].as_array().unwrap().len(), 5);
    assert!(v["fit"]["slope"].is_f64());

    let o = run(&["report", norm.to_str().unwrap(), scan.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 4, "{out}");
    assert!(
        lines[2].starts_with("error_scan,4,2,,,scan,5,9,17,"),
        "{out}"
    );
    assert!(
        lines[3].starts_with("norm,4,2,1.5,3,probe_best,5,9,17,"),
        "{out}"
    );
}

#[test]
fn bounds_calculator() {
    let o = run(&["norm", "--bounds", "--d", "5", "--p", "3/2"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["birch"]["alpha"], "3/2");
    assert_eq!(v["trivial_exponent"], "1/2");
    assert_eq!(v["theorem_exponent"], "5/6");
}

#[test]
fn weak_table() {
    let o = run(&["norm", "--weak", "--lambda", "9,25"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.lines().nth(1) == Some("lambda,radius,threshold,x_size,level_size,bound,ratio"));
    assert!(!out.contains("-0e0"));
    assert!(out.lines().last().unwrap().starts_with("# max_ratio ["));
    let o = run(&["norm", "--weak", "--lambda", "10"]);
    assert!(!o.status.success());
}
