use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gaugeforge"))
}

fn demo() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/demo.toml")
}

fn write_config(dir: &tempfile::TempDir, text: &str) -> PathBuf {
    let path = dir.path().join("run.toml");
    std::fs::write(&path, text).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn report(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

const IDENTITY: &str = r#"
suites = ["equivalence"]
[check]
sample_count = 300
[[transform]]
name = "id"
family = "equivalence"
"#;

#[test]
fn identity_equivalence_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir, IDENTITY);
    let out = dir.path().join("r.json");
    let o = run(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&out);
    assert_eq!(r["passed"], true);
    assert_eq!(r["suites"][0]["suite"], "equivalence");
}

#[test]
fn chiral_factor_without_i_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        &dir,
        r#"
suites = ["equivalence"]
[check]
sample_count = 300
[[transform]]
name = "chiral"
family = "equivalence"
rho = "0.3*z"
variant = "without_i"
"#,
    );
    let out = dir.path().join("r.json");
    let o = run(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let r = report(&out);
    let item = &r["suites"][0]["items"][0];
    assert_eq!(item["ok"], false);
    assert!(item["report"]["max_deviation"].as_f64().unwrap() > 1e-3);
}

#[test]
fn variant_flag_overrides_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        &dir,
        r#"
suites = ["equivalence"]
[check]
sample_count = 300
[[transform]]
name = "chiral"
family = "equivalence"
rho = "0.3*z"
"#,
    );
    let c = cfg.to_str().unwrap();
    let out = dir.path().join("r.json");
    let o = run(&["run", "--config", c, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let o = run(&["run", "--config", c, "--variant", "without_i", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn demo_run_passes_and_matches_the_schema() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = run(&["run", "--config", demo().to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&out);
    let names: Vec<&str> = r["suites"].as_array().unwrap().iter().map(|s| s["suite"].as_str().unwrap()).collect();
    assert_eq!(names, ["separability", "poincare", "equivalence", "group-law", "solution-map", "reduction"]);
    let slopes: Vec<f64> = r["suites"][4]["items"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|i| i["kind"] == "residual" && i["expect"] == "holds")
        .filter_map(|i| i["report"]["slope"].as_f64())
        .collect();
    assert!(slopes.iter().any(|s| (s - 4.0).abs() < 0.15), "{slopes:?}");

    let schema: Value = serde_json::from_str(include_str!("../schema/report.schema.json")).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let errors: Vec<String> = validator.iter_errors(&r).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{errors:?}");
}

#[test]
fn reports_are_identical_apart_from_timings() {
    let dir = tempfile::tempdir().unwrap();
    let mut payloads = Vec::new();
    for k in 0..2 {
        let out = dir.path().join(format!("r{k}.json"));
        let o = run(&[
            "run",
            "--config",
            demo().to_str().unwrap(),
            "--suite",
            "group-law",
            "--suite",
            "solution-map",
            "--seed",
            "7",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
        let mut r = report(&out);
        r.as_object_mut().unwrap().remove("timings");
        payloads.push(serde_json::to_string(&r).unwrap());
    }
    assert_eq!(payloads[0], payloads[1]);
    assert!(payloads[0].contains("\"seed\":7"));
}

#[test]
fn thread_count_does_not_change_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir, IDENTITY);
    let mut payloads = Vec::new();
    for threads in ["1", "3"] {
        let out = dir.path().join(format!("t{threads}.json"));
        let o = bin()
            .args(["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
            .env("GAUGEFORGE_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(0));
        let mut r = report(&out);
        r.as_object_mut().unwrap().remove("timings");
        payloads.push(r);
    }
    assert_eq!(payloads[0], payloads[1]);
}

#[test]
fn configuration_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.toml");
    assert_eq!(run(&["run", "--config", missing.to_str().unwrap()]).status.code(), Some(2));

    let bad_expr = write_config(
        &dir,
        r#"
[[transform]]
name = "bad"
family = "equivalence"
rho = "0.3*"
"#,
    );
    let o = run(&["run", "--config", bad_expr.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad"));

    let no_suite = write_config(&dir, "suites = []\n");
    assert_eq!(run(&["run", "--config", no_suite.to_str().unwrap()]).status.code(), Some(2));

    let cfg = write_config(&dir, IDENTITY);
    let o = run(&["run", "--config", cfg.to_str().unwrap(), "--suite", "bogus"]);
    assert_eq!(o.status.code(), Some(2));
    let o = bin()
        .args(["run", "--config", cfg.to_str().unwrap()])
        .env("GAUGEFORGE_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unwritable_output_is_an_internal_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir, IDENTITY);
    let out = dir.path().join("no/such/dir/r.json");
    let o = run(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn compose_adds_a_hat() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        &dir,
        r#"
[[transform]]
name = "one"
family = "equivalence"
a_hat = 1.0
[[transform]]
name = "two"
family = "equivalence"
a_hat = 2.0
[[transform]]
name = "generic"
family = "equivalence"
a_hat = 0.5
phi = "0.1*z"
rho = "0.3*z/(1 + z^2)"
"#,
    );
    let c = cfg.to_str().unwrap();
    let o = run(&["compose", "--config", c, "one", "two"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("a_hat = 3"));

    let o = run(&["compose", "--config", c, "generic", "generic", "--samples", "500"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("a_hat = 1"));
    assert!(text.contains("PASS equivalence_composition"), "{text}");

    assert_eq!(run(&["compose", "--config", c, "one", "nope"]).status.code(), Some(2));
}

fn slopes(stdout: &[u8]) -> Vec<(String, f64)> {
    String::from_utf8_lossy(stdout)
        .lines()
        .filter_map(|l| {
            let (label, rest) = l.split_once(" slope ")?;
            let s: f64 = rest.split_whitespace().next()?.parse().ok()?;
            Some((label.trim().to_string(), s))
        })
        .collect()
}

#[test]
fn convergence_tables() {
    let d = demo();
    let c = d.to_str().unwrap();
    let o = run(&["convergence", "--config", c, "--order", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let s = slopes(&o.stdout);
    assert_eq!(s.len(), 1);
    assert!((s[0].1 - 2.0).abs() < 0.15, "{s:?}");

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("table.json");
    let o = run(&["convergence", "--config", c, "--transform", "phase_and_chiral", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let s = slopes(&o.stdout);
    let get = |name: &str| s.iter().find(|(l, _)| l == name).unwrap().1;
    assert!((get("H2 with_i") - 4.0).abs() < 0.15, "{s:?}");
    assert!(get("H2 without_i").abs() < 0.5, "{s:?}");
    assert!(get("untransformed source").abs() < 0.5, "{s:?}");
    let table: Value = report(&out);
    assert_eq!(table.as_array().unwrap().len(), 3);

    assert_eq!(run(&["convergence", "--config", c, "--ladder", "1e-3,5e-4"]).status.code(), Some(2));
    assert_eq!(run(&["convergence", "--config", c, "--transform", "separable_a"]).status.code(), Some(2));
}

#[test]
fn schema_subcommand_prints_the_shipped_schema() {
    let o = run(&["schema"]);
    assert_eq!(o.status.code(), Some(0));
    let printed: Value = serde_json::from_slice(&o.stdout).unwrap();
    let shipped: Value = serde_json::from_str(include_str!("../schema/report.schema.json")).unwrap();
    assert_eq!(printed, shipped);
    assert_eq!(printed["properties"]["schema_version"]["const"], gaugeforge::suite::SCHEMA_VERSION);
}
