use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn harness(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spc-harness"))
        .args(args)
        .env_remove("SPC_HARNESS_CONFIG")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn metric(doc: &Value, name: &str, k: u64) -> f64 {
    doc["metrics"]["pass_at_k"]
        .as_array()
        .unwrap()
        .iter()
        .find(|v| v["metric"] == name && v["k"] == k)
        .unwrap()["value"]
        .as_f64()
        .unwrap()
}

fn fixture_t_gt() -> f64 {
    let text = std::fs::read_to_string(fixture("cases.jsonl")).unwrap();
    let first: Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    first["t_gt"].as_f64().unwrap()
}

#[test]
fn parse_reference_is_clean() {
    let o = harness(&["parse", s(&fixture("reference.mos"))]);
    assert_eq!(code(&o), 0);
    let doc = json(&o);
    assert_eq!(doc["report"]["coverage"], serde_json::json!([1.0, 1.0, 1.0]));
    assert_eq!(doc["report"]["undef_count"], 0);
    assert_eq!(doc["manifest"]["subcommand"], "parse");
}

#[test]
fn parse_unterminated_reports_failure() {
    let o = harness(&["parse", s(&fixture("unterminated.mos"))]);
    assert_eq!(code(&o), 2);
    let doc = json(&o);
    assert_eq!(doc["failures"].as_array().unwrap().len(), 1);
}

#[test]
fn missing_file_and_bad_usage_exit_one() {
    assert_eq!(code(&harness(&["parse", "/nonexistent/x.mos"])), 1);
    assert_eq!(code(&harness(&["frobnicate"])), 1);
    assert_eq!(code(&harness(&["reward", s(&fixture("perfect.out"))])), 1, "--gt is required");
    assert_eq!(code(&harness(&["reward", s(&fixture("perfect.out")), "--gt", "-1"])), 1);
}

#[test]
fn run_reference_succeeds_with_trace() {
    let gt = fixture_t_gt().to_string();
    let o = harness(&["run", s(&fixture("reference.mos")), "--gt", &gt, "--trace"]);
    assert_eq!(code(&o), 0);
    let doc = json(&o);
    assert_eq!(doc["outcome"]["status"], "success");
    assert!(doc["epsilon"].as_f64().unwrap() < 0.1);
    let trace = String::from_utf8(o.stderr).unwrap();
    assert!(trace.lines().any(|l| l.contains("\teigen\t")), "{trace}");
}

#[test]
fn run_reports_runtime_errors_and_budget() {
    let o = harness(&["run", s(&fixture("eigen_before_mass.mos"))]);
    assert_eq!(code(&o), 2);
    assert_eq!(json(&o)["outcome"]["status"], "runtime_error");

    let o = harness(&["run", s(&fixture("reference.mos")), "--budget", "5"]);
    assert_eq!(code(&o), 2);
    assert_eq!(json(&o)["outcome"]["kind"], "budget_exceeded");

    let o = harness(&["run", s(&fixture("unterminated.mos"))]);
    assert_eq!(json(&o)["outcome"]["kind"], "parse_refused");
}

#[test]
fn reward_of_perfect_output_is_one() {
    let gt = fixture_t_gt().to_string();
    let o = harness(&["reward", s(&fixture("perfect.out")), "--gt", &gt]);
    assert_eq!(code(&o), 0);
    let b = &json(&o)["breakdown"];
    assert_eq!(b["r_fmt"], 1);
    assert!((b["total"].as_f64().unwrap() - 1.0).abs() < 1e-12, "{b}");
}

#[test]
fn invalid_reward_config_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[reward]\nw_fmt = 0.5\n").unwrap();
    let o = harness(&["reward", s(&fixture("perfect.out")), "--gt", "1.0", "--config", s(&cfg)]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("sum"));
}

#[test]
fn config_changes_manifest_hash() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "[reward]\neta_env = 0.01\n").unwrap();
    let a = json(&harness(&["parse", s(&fixture("reference.mos"))]));
    let b = json(&harness(&["parse", s(&fixture("reference.mos")), "--config", s(&cfg)]));
    assert_ne!(a["manifest"]["config_hash"], b["manifest"]["config_hash"]);
    assert_eq!(a["manifest"]["config_hash"].as_str().unwrap().len(), 64);
}

fn evaluate_mixed(jobs: &str, out: &Path, csv: &Path) -> Output {
    harness(&[
        "evaluate",
        "--jobs",
        jobs,
        "--cases",
        s(&fixture("cases.jsonl")),
        "--candidates",
        s(&fixture("mixed")),
        "--out",
        s(out),
        "--csv",
        s(csv),
        "--label",
        "mixed",
    ])
}

#[test]
fn evaluate_mixed_set() {
    let dir = tempfile::tempdir().unwrap();
    let (out, csv) = (dir.path().join("a.json"), dir.path().join("a.csv"));
    let o = evaluate_mixed("1", &out, &csv);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!((metric(&doc, "strict", 1) - 0.4).abs() < 1e-12);
    assert!((metric(&doc, "exec", 1) - 0.8).abs() < 1e-12);
    assert!((metric(&doc, "strict", 5) - 1.0).abs() < 1e-12);
    let table = std::fs::read_to_string(&csv).unwrap();
    assert!(table.starts_with("Model,Pass@1,Pass@5,Pass@5_period,Pass@5_compliance,Pass@5_strict,Average,Overall Average\n"));
    assert!(table.contains("\nmixed,80.00,100.00,"), "{table}");
}

#[test]
fn evaluate_is_independent_of_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let p = |n: &str| dir.path().join(n);
    assert_eq!(code(&evaluate_mixed("1", &p("1.json"), &p("1.csv"))), 0);
    assert_eq!(code(&evaluate_mixed("4", &p("4.json"), &p("4.csv"))), 0);
    let read = |n: &str| std::fs::read_to_string(p(n)).unwrap();
    assert_eq!(read("1.csv"), read("4.csv"));
    let strip = |n: &str| {
        let mut v: Value = serde_json::from_str(&read(n)).unwrap();
        v["manifest"]["outputs"] = Value::Null;
        v
    };
    assert_eq!(strip("1.json"), strip("4.json"));
}

#[test]
fn evaluate_rejects_wrong_cardinality() {
    let o = harness(&[
        "evaluate",
        "--cases",
        s(&fixture("cases.jsonl")),
        "--candidates",
        s(&fixture("mixed")),
        "--n",
        "4",
    ]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("expected 4"));
}

#[test]
fn generation_is_seeded_and_manifested() {
    let dir = tempfile::tempdir().unwrap();
    let p = |n: &str| dir.path().join(n);
    for name in ["a.jsonl", "b.jsonl"] {
        assert_eq!(code(&harness(&["gen-cases", "--count", "16", "--seed", "3", "--out", s(&p(name))])), 0);
    }
    assert_eq!(code(&harness(&["gen-cases", "--count", "16", "--seed", "4", "--out", s(&p("c.jsonl"))])), 0);
    let read = |n: &str| std::fs::read_to_string(p(n)).unwrap();
    assert_eq!(read("a.jsonl"), read("b.jsonl"));
    assert_ne!(read("a.jsonl"), read("c.jsonl"));
    assert_eq!(read("a.jsonl").lines().count(), 16);

    let m: Value = serde_json::from_str(&read("a.jsonl.manifest.json")).unwrap();
    assert_eq!(m["manifest"]["seed"], 3);
    assert!(m["manifest"].get("wall_time_ms").is_none());
    assert_eq!(code(&harness(&["gen-cases", "--timing", "--count", "2", "--out", s(&p("t.jsonl"))])), 0);
    let m: Value = serde_json::from_str(&read("t.jsonl.manifest.json")).unwrap();
    assert!(m["manifest"]["wall_time_ms"].is_u64());
}

#[test]
fn generated_candidates_round_trip_through_evaluate() {
    let dir = tempfile::tempdir().unwrap();
    let p = |n: &str| dir.path().join(n);
    assert_eq!(code(&harness(&["gen-cases", "--count", "4", "--seed", "9", "--out", s(&p("cases.jsonl"))])), 0);
    let o = harness(&[
        "gen-candidates",
        "--cases",
        s(&p("cases.jsonl")),
        "--out",
        s(&p("cands")),
        "--templates",
        "correct",
    ]);
    assert_eq!(code(&o), 0);
    let o = harness(&["evaluate", "--cases", s(&p("cases.jsonl")), "--candidates", s(&p("cands"))]);
    assert_eq!(code(&o), 0);
    let doc = json(&o);
    for m in ["exec", "period", "compliance", "strict"] {
        assert_eq!(metric(&doc, m, 1), 1.0, "{m}");
    }
    assert_eq!(code(&harness(&["gen-candidates", "--cases", s(&p("cases.jsonl")), "--out", s(&p("x")), "--templates", "nope"])), 1);
}

#[test]
fn align_writes_reproducible_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let run = |out: &str| {
        let out = dir.path().join(out);
        let o = harness(&["align", "--dataset", s(&fixture("dataset.jsonl")), "--out", s(&out), "--iterations", "3"]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        out
    };
    let (a, b) = (run("a"), run("b"));
    for f in ["reference.json", "final.json", "training_log.jsonl"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
    let log = std::fs::read_to_string(a.join("training_log.jsonl")).unwrap();
    assert_eq!(log.lines().count(), 4);
    let summary: Value = serde_json::from_str(&std::fs::read_to_string(a.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["examples"], 240);
    assert!(summary["gain"].as_f64().unwrap() > 0.0);

    let o = harness(&["align", "--dataset", s(&fixture("dataset.jsonl")), "--out", s(&dir.path().join("c")), "--group-size", "1"]);
    assert_eq!(code(&o), 1);
}

fn pipeline(root: &Path, jobs: &str) -> Vec<(String, Vec<u8>)> {
    let p = |n: &str| root.join(n);
    let steps: [Vec<String>; 5] = [
        vec!["gen-cases".into(), "--count".into(), "6".into(), "--seed".into(), "5".into(), "--out".into(), s(&p("cases.jsonl")).into()],
        vec!["gen-candidates".into(), "--cases".into(), s(&p("cases.jsonl")).into(), "--out".into(), s(&p("cands")).into(), "--seed".into(), "5".into()],
        vec!["evaluate".into(), "--cases".into(), s(&p("cases.jsonl")).into(), "--candidates".into(), s(&p("cands")).into(), "--out".into(), s(&p("eval.json")).into(), "--csv".into(), s(&p("eval.csv")).into()],
        vec!["gen-dataset".into(), "--seed".into(), "5".into(), "--out".into(), s(&p("ds.jsonl")).into()],
        vec!["align".into(), "--dataset".into(), s(&p("ds.jsonl")).into(), "--out".into(), s(&p("align")).into(), "--seed".into(), "5".into(), "--iterations".into(), "4".into()],
    ];
    for args in &steps {
        let mut argv: Vec<&str> = vec!["--jobs", jobs];
        argv.extend(args.iter().map(String::as_str));
        let o = harness(&argv);
        assert_eq!(code(&o), 0, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let mut files = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for e in std::fs::read_dir(dir).unwrap() {
            let path = e.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root).unwrap().display().to_string();
                // manifests record the output paths, which differ between roots
                let bytes = std::fs::read_to_string(&path).unwrap().replace(s(root), "ROOT").into_bytes();
                files.push((rel, bytes));
            }
        }
    }
    files.sort();
    files
}

#[test]
fn full_pipeline_is_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let (x, y) = (pipeline(a.path(), "1"), pipeline(b.path(), "3"));
    assert!(x.len() > 20);
    assert_eq!(x.iter().map(|f| &f.0).collect::<Vec<_>>(), y.iter().map(|f| &f.0).collect::<Vec<_>>());
    for ((name, l), (_, r)) in x.iter().zip(&y) {
        assert!(l == r, "{name} differs");
    }
}

#[test]
fn benchmark_of_128_passes_the_external_validator() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cases.jsonl");
    assert_eq!(code(&harness(&["gen-cases", "--count", "128", "--out", s(&out)])), 0);
    assert_eq!(std::fs::read_to_string(&out).unwrap().lines().count(), 128);
    let script = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/oracles/validate_cases.py");
    match Command::new("python3").arg(script).arg(&out).arg("128").output() {
        Ok(o) => assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout)),
        Err(_) => eprintln!("python3 not found; external validation skipped"),
    }
}
