use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn aldc(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aldc"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn workdir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("aldc-cli-{name}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn gen_then_verify_hypercube() {
    let dir = workdir("verify");
    let g = aldc(&["gen", "hypercube", "--d", "4", "-o", "cube4"], &dir);
    assert_eq!(g.status.code(), Some(0));
    assert!(dir.join("cube4.aldc.json").exists());
    let v = aldc(&["verify", "cube4", "--alpha", "1"], &dir);
    assert_eq!(v.status.code(), Some(0), "{}", String::from_utf8_lossy(&v.stderr));
    assert!(stdout(&v).contains("delta = 0.5"));

    let j = aldc(&["verify", "cube4.aldc.json", "--alpha", "1", "--json"], &dir);
    let report: serde_json::Value = serde_json::from_str(&stdout(&j)).unwrap();
    assert_eq!(report["density"], 0.5);
    assert_eq!(report["achieved_alpha"], 1.0);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn general_bound_prints_sixteen() {
    let dir = workdir("bound");
    let o = aldc(&["bound", "--theorem", "general", "--alpha", "1", "--delta", "0.5", "--d", "64"], &dir);
    assert_eq!(o.status.code(), Some(0));
    let first = stdout(&o).lines().next().unwrap().to_string();
    assert_eq!(first.split_whitespace().last(), Some("16"));
    let q = aldc(&["bound", "--theorem", "qquery", "--alpha", "1", "--delta", "1", "--d", "10", "--q", "3", "--json"], &dir);
    let v: serde_json::Value = serde_json::from_str(&stdout(&q)).unwrap();
    assert!((v["bound"].as_f64().unwrap() - 10f64.powf(1.5)).abs() < 1e-9);
    let one = aldc(&["bound", "--theorem", "qquery", "--alpha", "1", "--delta", "1", "--d", "10", "--q", "1"], &dir);
    assert_eq!(one.status.code(), Some(1));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn malformed_input_is_a_usage_error() {
    let dir = workdir("malformed");
    std::fs::write(dir.join("bad.aldc.json"), "{\n  \"version\": 1,\n  \"d\": 3,\n  \"q\": 2,\n  \"vectors\": [[1, 2]],\n  \"matchings\": []\n}\n").unwrap();
    let o = aldc(&["verify", "bad"], &dir);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 5"), "{err}");
    assert!(err.contains("coordinates"), "{err}");

    assert_eq!(aldc(&["verify", "missing"], &dir).status.code(), Some(1));
    assert_eq!(aldc(&["frobnicate"], &dir).status.code(), Some(1));
    assert_eq!(aldc(&["--help"], &dir).status.code(), Some(0));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn failed_verification_exits_two() {
    let dir = workdir("fail");
    aldc(&["gen", "perturbed", "--d", "3", "--sigma", "0.3", "--seed", "2", "-o", "p"], &dir);
    let o = aldc(&["verify", "p", "--alpha", "1"], &dir);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("NOT VERIFIED"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn pipelines_run_and_json_is_deterministic() {
    let dir = workdir("determinism");
    aldc(&["gen", "simple", "--d", "6", "--n", "40", "--alpha", "0.4", "--seed", "3", "-o", "s"], &dir);
    aldc(&["gen", "random", "--d", "5", "--n", "20", "--q", "3", "--alpha", "0.3", "--seed", "3", "-o", "r3"], &dir);
    aldc(&["gen", "hypercube", "--d", "4", "-o", "c"], &dir);
    let runs: [&[&str]; 7] = [
        &["reduce", "s", "--alpha", "0.4", "--bucket", "--json"],
        &["certify-cut", "s", "--seed", "5", "--json"],
        &["certify-tiling", "c", "--t", "20", "--seed", "5", "--json"],
        &["spectral", "c", "--samples", "200", "--seed", "5", "--json"],
        &["qquery", "r3", "--samples", "50", "--seed", "5", "--json"],
        &["reduce", "c", "--alpha", "1", "--bucket", "--json"],
        &["gen", "perturbed", "--d", "3", "--seed", "5"],
    ];
    for args in runs {
        let a = aldc(args, &dir);
        let b = aldc(args, &dir);
        assert_eq!(a.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&a.stderr));
        assert_eq!(a.stdout, b.stdout, "{args:?}");
        if args.contains(&"--json") {
            serde_json::from_slice::<serde_json::Value>(&a.stdout).unwrap();
        }
    }
    let single = Command::new(env!("CARGO_BIN_EXE_aldc"))
        .args(["spectral", "c", "--samples", "200", "--seed", "5", "--json"])
        .env("ALDC_THREADS", "1")
        .current_dir(&dir)
        .output()
        .unwrap();
    assert_eq!(single.stdout, aldc(&["spectral", "c", "--samples", "200", "--seed", "5", "--json"], &dir).stdout);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn reduce_writes_output_code() {
    let dir = workdir("reduce");
    aldc(&["gen", "perturbed", "--d", "4", "--sigma", "0.2", "--seed", "1", "-o", "p"], &dir);
    let o = aldc(&["reduce", "p", "--alpha", "0.7", "-o", "p_simple"], &dir);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.join("p_simple.aldc.json").exists());
    let v = aldc(&["verify", "p_simple"], &dir);
    assert_eq!(v.status.code(), Some(0));
    std::fs::remove_dir_all(&dir).unwrap();
}
