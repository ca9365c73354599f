use std::path::Path;
use std::process::{Command, Output};

const EXE: &str = env!("CARGO_BIN_EXE_kbandit");

fn run(args: &[&str], config: Option<&Path>, out: Option<&Path>) -> Output {
    let mut c = Command::new(EXE);
    c.args(args);
    if let Some(p) = config {
        c.arg("--config").arg(p);
    }
    if let Some(p) = out {
        c.arg("--out").arg(p);
    }
    c.output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

const REGRET: &str = r#"{"version": 1, "kind": "regret", "environment": {"preset": "delta10"},
    "policies": [{"policy": "kl_ucb"}, {"policy": "uniform_random"}], "horizon": 50, "seeds": [1, 2]}"#;

#[test]
fn missing_config_exits_1() {
    let o = run(&["regret"], Some(Path::new("/nonexistent/missing.json")), None);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing.json"));
}

#[test]
fn valid_config_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "r.json", REGRET);
    let out = dir.path().join("r.csv");
    let o = run(&["regret", "--quiet"], Some(&cfg), Some(&out));
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stderr.is_empty());
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "policy,seed,t,arm,reward,instant_regret,cumulative_regret");
    assert_eq!(lines.count(), 2 * 2 * 50);
}

#[test]
fn stdout_when_no_output_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "r.json", REGRET);
    let o = run(&["regret", "--quiet"], Some(&cfg), None);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("policy,seed,t,"));
}

#[test]
fn seed_offset_shifts_seeds() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "a.json", REGRET);
    let shifted = write(dir.path(), "b.json", &REGRET.replace("[1, 2]", "[8, 9]"));
    let (oa, ob) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    assert!(run(&["regret", "--quiet", "--seed-offset", "7"], Some(&cfg), Some(&oa)).status.success());
    assert!(run(&["regret", "--quiet"], Some(&shifted), Some(&ob)).status.success());
    assert_eq!(std::fs::read(&oa).unwrap(), std::fs::read(&ob).unwrap());

    let oc = dir.path().join("c.csv");
    assert!(run(&["regret", "--quiet", "--seed-offset", "-1"], Some(&shifted), Some(&oc)).status.success());
    assert!(std::fs::read_to_string(&oc).unwrap().contains("kl_ucb,7,"));
}

#[test]
fn usage_errors_exit_1() {
    let o = run(&["regret", "--bogus"], None, None);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
    assert_eq!(run(&["simulate"], None, None).status.code(), Some(1));
    assert_eq!(run(&[], None, None).status.code(), Some(1));
    assert_eq!(run(&["--help"], None, None).status.code(), Some(0));
}

#[test]
fn config_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o.csv");
    let cases = [
        REGRET.replace("\"horizon\"", "\"horizn\""),
        REGRET.replace("\"version\": 1", "\"version\": 3"),
        REGRET.replace("[1, 2]", "[2, 2]"),
        REGRET.replace("\"kind\": \"regret\"", "\"kind\": \"coverage\""),
        "{not json".to_string(),
    ];
    for (i, text) in cases.iter().enumerate() {
        let cfg = write(dir.path(), &format!("bad{i}.json"), text);
        let o = run(&["regret"], Some(&cfg), Some(&out));
        assert_eq!(o.status.code(), Some(1), "case {i}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(!o.stderr.is_empty());
    }
    let e = run(&["regret"], Some(&write(dir.path(), "u.json", &cases[0])), Some(&out));
    assert!(String::from_utf8_lossy(&e.stderr).contains("line"));
}

#[test]
fn numeric_failure_exits_2() {
    // Two nearly coincident points make the posterior system singular
    // at the smallest admissible noise level.
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "n.json",
        r#"{"version": 1, "kind": "infogain",
            "environment": {"kernel": {"family": "sqexp", "lengthscale": 1.0},
                            "points": [[0.0], [1e-12]], "centers": [[0.0]], "weights": [0.5], "B": 1.0},
            "horizon": 10, "seeds": [1], "estimation": {"nu2": 1e-300}}"#,
    );
    let o = run(&["infogain"], Some(&cfg), Some(&dir.path().join("n.csv")));
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn coverage_writes_summary_sibling() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"version": 1, "kind": "coverage", "environment": {"preset": "delta10"}, "horizon": 40, "seeds": [1],
            "policies": [{"policy": "kl_ucb"}], "record_every": 10}"#,
    );
    let out = dir.path().join("cov.csv");
    let o = run(&["coverage"], Some(&cfg), Some(&out));
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("kernel_beta_kl"));
    let rec = std::fs::read_to_string(&out).unwrap();
    assert!(rec.starts_with("family,seed,t,arm,lower,upper,contains_f,width\n"));
    assert_eq!(rec.lines().count(), 1 + 4 * 4 * 10);
    let sum = std::fs::read_to_string(dir.path().join("cov.summary.csv")).unwrap();
    assert_eq!(sum.lines().count(), 1 + 6 * 11);
}
