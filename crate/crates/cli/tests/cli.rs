use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn fibergraph(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fibergraph")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn enumerate_counts() {
    for (n, r, want) in [("3", "1", "6 tables\n"), ("3", "2", "21 tables\n"), ("3", "3", "55 tables\n")] {
        let o = fibergraph(&["enumerate", "--n", n, "--r", r]);
        assert_eq!(o.status.code(), Some(0));
        assert_eq!(stdout(&o), want);
    }
}

#[test]
fn enumerate_exports_and_cap() {
    let dir = tempfile::tempdir().unwrap();
    let jsonl = dir.path().join("f.jsonl");
    let o = fibergraph(&["enumerate", "--n", "3", "--r", "2", "--out", path(&jsonl)]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(&jsonl).unwrap();
    assert_eq!(text.lines().count(), 21);
    let first: Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert_eq!(first["rows"], serde_json::json!([[0, 0, 2], [0, 2, 0], [2, 0, 0]]));

    let csv = dir.path().join("f.csv");
    let o = fibergraph(&["enumerate", "--n", "2", "--r", "2", "--format", "csv", "--out", path(&csv)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(fs::read_to_string(&csv).unwrap(), "id,e11,e12,e21,e22\n0,0,2,2,0\n1,1,1,1,1\n2,2,0,0,2\n");

    let o = fibergraph(&["enumerate", "--n", "4", "--r", "3", "--cap", "100"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn general_fiber_from_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    fs::write(&a, r#"{"rows": [[1, 1]]}"#).unwrap();
    let out = dir.path().join("points.jsonl");
    let o = fibergraph(&["enumerate", "--matrix", path(&a), "--rhs", "2", "--out", path(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o), "3 points\n");
    assert_eq!(fs::read_to_string(&out).unwrap(), "[0,2]\n[1,1]\n[2,0]\n");
}

#[test]
fn graph_edge_list_with_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g22.txt");
    let o = fibergraph(&["graph", "--n", "2", "--r", "2", "--format", "edge-list", "--out", path(&out)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(fs::read_to_string(&out).unwrap(), "0 1\n1 2\n");
    let sidecar: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("g22.txt.vertices.json")).unwrap()).unwrap();
    assert_eq!(sidecar["vertices"].as_array().unwrap().len(), 3);
    assert_eq!(sidecar["vertices"][2]["rows"], serde_json::json!([[2, 0], [0, 2]]));
}

#[test]
fn graph_dot_and_orientation() {
    let o = fibergraph(&["graph", "--n", "2", "--r", "2", "--format", "dot"]);
    let dot = stdout(&o);
    assert!(dot.starts_with("graph \"G(2,2)\" {"));
    assert_eq!(dot.matches(" -- ").count(), 2);

    let o = fibergraph(&["graph", "--n", "2", "--r", "2", "--orient"]);
    assert_eq!(stdout(&o), "1 0\n2 1\n");

    let o = fibergraph(&["graph", "--n", "4", "--r", "3", "--format", "dot"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn verify_reports() {
    let o = fibergraph(&["verify", "--n", "3", "--r", "3", "--checks", "connectivity"]);
    assert_eq!(o.status.code(), Some(0));
    let report = json(&o);
    let c = &report["checks"][0];
    assert_eq!(c["name"], "connectivity");
    assert_eq!(c["expected"]["kappa"], 3);
    assert_eq!(c["computed"]["kappa"], 3);
    assert_eq!(c["pass"], true);
    for key in ["parameters", "hypothesis_met", "runtime_ms"] {
        assert!(c.get(key).is_some(), "missing {key}");
    }

    let o = fibergraph(&["verify", "--n", "3", "--r", "2", "--checks", "diameter,connectivity"]);
    assert_eq!(o.status.code(), Some(0));
    let report = json(&o);
    assert_eq!(report["checks"][0]["computed"]["diameter"], 4);
    assert_eq!(report["checks"][1]["hypothesis_met"], false);
    assert!(report["checks"][1]["pass"].is_null());
}

#[test]
fn verify_full_default_suite() {
    let o = fibergraph(&["verify", "--n", "3", "--r", "3", "--workers", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert_eq!(json(&o)["checks"].as_array().unwrap().len(), 11);
}

#[test]
fn verify_usage_and_guards() {
    assert_eq!(fibergraph(&["verify", "--n", "3", "--r", "3", "--checks", "bogus"]).status.code(), Some(2));
    assert_eq!(fibergraph(&["verify", "--n", "4", "--r", "3", "--checks", "connectivity"]).status.code(), Some(3));
    assert_eq!(fibergraph(&["verify", "--n", "3", "--r", "3", "--format", "dot"]).status.code(), Some(2));
}

#[test]
#[ignore = "runs every check on the 2008-vertex G(4,3); cargo test -- --ignored"]
fn verify_long_g43() {
    let o = fibergraph(&["verify", "--n", "4", "--r", "3", "--long"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn decompose_tables() {
    let dir = tempfile::tempdir().unwrap();
    let j3 = dir.path().join("J3.json");
    fs::write(&j3, r#"{"n": 3, "r": 3, "rows": [[1, 1, 1], [1, 1, 1], [1, 1, 1]]}"#).unwrap();
    let o = fibergraph(&["decompose", "--table", path(&j3)]);
    assert_eq!(o.status.code(), Some(0));
    let d = json(&o);
    let parts = d["parts"].as_array().unwrap();
    assert_eq!(parts.len(), 3);
    let mut sum = [[0i64; 3]; 3];
    for p in parts {
        for (i, row) in p["rows"].as_array().unwrap().iter().enumerate() {
            for (j, x) in row.as_array().unwrap().iter().enumerate() {
                sum[i][j] += x.as_i64().unwrap();
            }
        }
    }
    assert_eq!(sum, [[1; 3]; 3]);
    assert_eq!(d["constraints_satisfied"], true);

    let ones = dir.path().join("ones.csv");
    fs::write(&ones, "1,1\n1,1\n").unwrap();
    let o = fibergraph(&["decompose", "--table", path(&ones), "--constraints", "[[1,2],[2,2]]"]);
    let d = json(&o);
    assert_eq!(d["parts"][0]["rows"], serde_json::json!([[0, 1], [1, 0]]));
    assert_eq!(d["parts"][1]["rows"], serde_json::json!([[1, 0], [0, 1]]));

    let o = fibergraph(&["decompose", "--table", path(&ones), "--constraints", "[[1,2],[1,2]]"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn malformed_tables_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "1,2\n2,x\n").unwrap();
    let o = fibergraph(&["decompose", "--table", path(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2, field 2"));
    let o = fibergraph(&["decompose", "--table", path(&dir.path().join("missing.json"))]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sampling_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let t = dir.path().join("t.csv");
    fs::write(&t, "2,0,0\n0,2,0\n0,0,2\n").unwrap();
    let run = |name: &str, seed: &str| {
        let emit = dir.path().join(name);
        let o = fibergraph(&["sample", "--table", path(&t), "--steps", "5000", "--burn-in", "100", "--thin", "7", "--seed", seed, "--emit", path(&emit)]);
        assert_eq!(o.status.code(), Some(0));
        fs::read(&emit).unwrap()
    };
    let a = run("a.jsonl", "7");
    let b = run("b.jsonl", "7");
    let c = run("c.jsonl", "8");
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert_eq!(String::from_utf8(a).unwrap().lines().count(), (5000 - 100) / 7);
}

#[test]
fn exact_test_report() {
    let dir = tempfile::tempdir().unwrap();
    let t = dir.path().join("flat.json");
    fs::write(&t, r#"{"n": 2, "r": 2, "rows": [[1, 1], [1, 1]]}"#).unwrap();
    let o = fibergraph(&["test", "--table", path(&t), "--steps", "2000", "--burn-in", "0", "--statistic", "chisq"]);
    assert_eq!(o.status.code(), Some(0));
    let res = json(&o);
    assert_eq!(res["observed_statistic"], 0.0);
    assert_eq!(res["p_value_estimate"], 1.0);
    assert_eq!(res["samples_used"], 2000);

    let o = fibergraph(&["test", "--table", path(&t), "--steps", "10", "--burn-in", "10"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn hemmecke_reports() {
    let o = fibergraph(&["hemmecke", "--k", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let h = json(&o);
    assert_eq!(h["vertices"], 32);
    assert_eq!(h["min_degree"], 4);
    assert_eq!(h["kappa"], 1);
    assert_eq!(h["articulation_points"], serde_json::json!([0, 16]));

    let h = json(&fibergraph(&["hemmecke", "--k", "1"]));
    assert_eq!((h["vertices"].as_u64(), h["edges"].as_u64()), (Some(4), Some(3)));
    assert_eq!(fibergraph(&["hemmecke", "--k", "13"]).status.code(), Some(3));
}
