use std::io::Write;
use std::process::{Command, Output};

use tropceresa::ceresa::{CeresaReport, Verdict};

fn tropceresa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tropceresa")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn ok(args: &[&str]) -> String {
    let o = tropceresa(args);
    assert_eq!(o.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    stdout(&o)
}

fn temp_json(s: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::Builder::new().suffix(".json").tempfile().unwrap();
    f.write_all(s.as_bytes()).unwrap();
    f
}

#[test]
fn k4_report() {
    let text = ok(&["ceresa", "--graph", "builtin:k4"]);
    assert!(text.contains("verdict: nontrivial"), "{text}");
    let json = ok(&["ceresa", "--graph", "builtin:k4", "--format", "json"]);
    let r = CeresaReport::from_json(&json).unwrap();
    assert_eq!(r.verdict, Verdict::Nontrivial);
    assert_eq!(r.order.unwrap(), 16.into());
    assert_eq!(r.groups.unwrap().bbar.order().unwrap(), 512.into());
}

#[test]
fn small_commands() {
    assert_eq!(ok(&["symanzik", "--graph", "builtin:k4"]).trim(), "16");
    assert_eq!(ok(&["genus", "--graph", "builtin:tl3"]).trim(), "4");
    assert_eq!(ok(&["hyperelliptic", "--graph", "builtin:theta0"]).trim(), "true");
    assert_eq!(ok(&["hyperelliptic", "--graph", "builtin:k4"]).trim(), "false");
    assert_eq!(ok(&["order", "--graph", "builtin:k4"]).trim(), "16");
    assert_eq!(ok(&["order", "--graph", "builtin:theta-w1"]).trim(), "not in Abar (least multiple 3)");
    let groups = ok(&["groups", "--graph", "builtin:k4"]);
    assert!(groups.contains("invariant factors of Q: (1,4,4)"), "{groups}");
    let z = ok(&["zharkov", "--graph", "builtin:k4", "--format", "json"]);
    let z: serde_json::Value = serde_json::from_str(&z).unwrap();
    assert_eq!(z["obstructed"], true);
}

#[test]
fn lengths_flag() {
    // the Symanzik polynomial of K4 is homogeneous of degree 3
    assert_eq!(ok(&["symanzik", "--graph", "builtin:k4", "--lengths", "2,2,2,2,2,2"]).trim(), "128");
    assert_eq!(ok(&["symanzik", "--graph", "builtin:k4", "--lengths", "1/2,1/2,1/2,1/2,1/2,1/2"]).trim(), "2");
    let o = tropceresa(&["symanzik", "--graph", "builtin:k4", "--lengths", "1,2"]);
    assert_eq!(o.status.code(), Some(2));
    let o = tropceresa(&["symanzik", "--graph", "builtin:k4", "--lengths", "1,2,3,4,5,-6"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn exit_codes() {
    assert_eq!(tropceresa(&["genus", "--graph", "/nonexistent/graph.json"]).status.code(), Some(2));
    assert_eq!(tropceresa(&["genus", "--graph", "builtin:k5"]).status.code(), Some(2));
    assert_eq!(tropceresa(&["frobnicate"]).status.code(), Some(2));
    let bad = temp_json(r#"{"vertices": [], "edges": [], "extra": 1}"#);
    assert_eq!(tropceresa(&["genus", "--graph", bad.path().to_str().unwrap()]).status.code(), Some(2));
    // computable input, but Zharkov needs a nonsingular Q
    let o = tropceresa(&["zharkov", "--graph", "builtin:theta-w1"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("tropceresa: "));
}

#[test]
fn files_on_disk() {
    let graph = temp_json(
        r#"{"vertices":[{"id":"u","weight":0},{"id":"v","weight":0}],
            "edges":[{"id":"e1","ends":["u","v"],"length":"1"},
                     {"id":"e2","ends":["u","v"],"length":"2"},
                     {"id":"e3","ends":["u","v"],"length":"3"}]}"#,
    );
    let table = temp_json(r#"{"basis_ref":{"tree":["e1"],"cycle_order":["e2","e3"]},"entries":{"e2":{"(1,3,4)":"1"}}}"#);
    let g = graph.path().to_str().unwrap();
    assert_eq!(ok(&["symanzik", "--graph", g]).trim(), "11");
    let json = ok(&["ceresa", "--graph", g, "--table", table.path().to_str().unwrap(), "--format", "json"]);
    let r = CeresaReport::from_json(&json).unwrap();
    assert_eq!(r.verdict, Verdict::HyperellipticTrivial);
    assert!(!r.table.verified);
    // a graph with no table and no builtin fallback
    assert_eq!(tropceresa(&["ceresa", "--graph", g]).status.code(), Some(2));
}

#[test]
fn sample_is_deterministic() {
    let args = ["sample", "--graph", "builtin:k4", "--count", "6", "--seed", "42", "--format", "json"];
    let a = ok(&args);
    let b = ok(&[&args[..], &["--workers", "3"]].concat());
    assert_eq!(a, b);
    let v: serde_json::Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v["samples"].as_array().unwrap().len(), 6);
    assert_eq!(v["verdicts"]["nontrivial"], 6);
    let c = ok(&["sample", "--graph", "builtin:k4", "--count", "6", "--seed", "43", "--format", "json"]);
    assert_ne!(a, c);
}

#[test]
fn tree_rechoice_from_cli() {
    let base = ok(&["order", "--graph", "builtin:k4"]);
    let other = ok(&["order", "--graph", "builtin:k4", "--tree", "e1,e2,e4"]);
    assert_eq!(base, other);
    // e1, e2, e3 is the outer triangle, not a spanning tree
    assert_eq!(tropceresa(&["order", "--graph", "builtin:k4", "--tree", "e1,e2,e3"]).status.code(), Some(2));
}
