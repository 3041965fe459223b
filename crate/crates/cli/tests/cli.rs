use std::path::Path;
use std::process::{Command, Output};

use poisson_calculus::suite::{CHECKS, DEFAULT_CONFIG};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_poisson-verify"));
    c.env_remove("POISSON_VERIFY_SEED");
    c
}

fn small_config(dir: &Path) -> std::path::PathBuf {
    let text = DEFAULT_CONFIG
        .replace("n_outer = 100000", "n_outer = 3000")
        .replace("n_inner = 200", "n_inner = 5")
        .replace("[clark]\nn_outer = 1000", "[clark]\nn_outer = 200");
    let p = dir.join("small.toml");
    std::fs::write(&p, text).unwrap();
    p
}

fn json(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn list_checks_names_every_check() {
    let o = bin().arg("list-checks").output().unwrap();
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), CHECKS.len());
    let exchange = text.lines().find(|l| l.starts_with("exchange\t")).unwrap();
    assert!(exchange.contains("exchange lemma"));
    let coarea = text.lines().find(|l| l.starts_with("coarea_L1\t")).unwrap();
    assert!(coarea.contains("L1 co-area formula"));
}

#[test]
fn empty_suites_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.toml");
    let text = DEFAULT_CONFIG.replace(
        "suites = [\n    \"identities\",\n    \"kernels\",\n    \"boundaries\",\n    \"coarea\",\n    \"margulis_russo\",\n    \"deviation\",\n    \"profiles\",\n    \"inequalities\",\n    \"clark\",\n]",
        "suites = []",
    );
    std::fs::write(&p, text).unwrap();
    let o = bin().args(["all", "--config"]).arg(&p).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("at least one suite"), "{}", stderr(&o));
}

#[test]
fn malformed_config_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.toml");
    std::fs::write(&p, "schema_version = 1\nsuites = [\"clark\"\n[mc]\n").unwrap();
    let o = bin().args(["all", "--config"]).arg(&p).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line"), "{}", stderr(&o));
}

#[test]
fn single_suite_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let out = dir.path().join("out");
    let o = bin()
        .args(["deviation", "--config"])
        .arg(&cfg)
        .arg("--out-dir")
        .arg(&out)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let v = json(&out);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[1]["check_id"], "deviation_direction");
    assert_eq!(rows[1]["verdict"], "reported");
    assert_eq!(v["seed"], 42);
    assert_eq!(v["config_sha256"].as_str().unwrap().len(), 64);
    let csv = std::fs::read_to_string(out.join("report.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.starts_with("check_id,suite,inputs,left,right,difference,stderr"));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = bin()
            .args(["all", "--config"])
            .arg(&cfg)
            .arg("--out-dir")
            .arg(&out)
            .output()
            .unwrap();
        assert!(o.status.code().is_some_and(|c| c < 2), "{}", stderr(&o));
        std::fs::read(out.join("report.json")).unwrap()
    };
    let a = run("a");
    let b = run("b");
    assert_eq!(a, b);
    let v: serde_json::Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), CHECKS.len());
}

#[test]
fn seed_and_ci_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let out = dir.path().join("env");
    let o = bin()
        .env("POISSON_VERIFY_SEED", "7")
        .args(["deviation", "--config"])
        .arg(&cfg)
        .arg("--out-dir")
        .arg(&out)
        .output()
        .unwrap();
    assert!(o.status.success());
    assert_eq!(json(&out)["seed"], 7);
    let o = bin()
        .env("POISSON_VERIFY_SEED", "7")
        .args(["deviation", "--seed", "9", "--ci-level", "0.9", "--config"])
        .arg(&cfg)
        .arg("--out-dir")
        .arg(&out)
        .output()
        .unwrap();
    assert!(o.status.success());
    let v = json(&out);
    assert_eq!(v["seed"], 9);
    assert_eq!(v["ci_level"], 0.9);
    let o = bin()
        .env("POISSON_VERIFY_SEED", "seven")
        .args(["deviation", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn default_config_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin().arg("all").arg("--out-dir").arg(dir.path()).output().unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let v = json(dir.path());
    let rows = v["rows"].as_array().unwrap();
    assert!((40..=60).contains(&rows.len()));
    assert_eq!(v["failures"], 0);
    assert_eq!(v["n_outer"], 100_000);
}
