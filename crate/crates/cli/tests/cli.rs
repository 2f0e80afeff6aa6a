use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "fixtures", name].iter().collect();
    p.display().to_string()
}

fn sigkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sigkit")).args(args).env_remove("SIGKIT_BOUND").output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn opetopes_of_dimension_two() {
    let out = sigkit(&["opetopes", "--dim", "2", "--size", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let cells = json(&out);
    let cells = cells.as_array().unwrap();
    assert_eq!(cells.len(), 5);
    assert!(cells.iter().all(|c| c["dim"] == 2 && c["target"] == "→"));
}

#[test]
fn dot_sink() {
    let dir = std::env::temp_dir().join(format!("sigkit-dot-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("cells.dot");
    let out = sigkit(&["opetopes", "--dim", "3", "--size", "2", "--dot", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let dot = std::fs::read_to_string(&path).unwrap();
    assert!(dot.starts_with("digraph"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn output_is_deterministic() {
    for args in [
        vec!["opetopes", "--dim", "3", "--size", "4"],
        vec!["free", "--kind", "strict", "--depth", "6", "--arity-bound", "5", "--input", &fixture("binary.json")],
        vec!["check", "--property", "weakly-cartesian", "--seed", "11"],
        vec!["recover", "--seed", "4"],
    ] {
        let (a, b) = (sigkit(&args), sigkit(&args));
        assert_eq!(a.stdout, b.stdout, "{args:?}");
        assert_eq!(a.status.code(), Some(0), "{args:?}");
    }
}

#[test]
fn weakly_cartesian_on_a_represented_morphism() {
    let out = sigkit(&["check", "--property", "weakly-cartesian", "--kind", "analytic", "--input", &fixture("swap.json")]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["verdict"], "holds");
    // the free orbit onto the commutative one identifies a·(12) with a
    let out = sigkit(&["check", "--property", "cartesian", "--kind", "analytic", "--input", &fixture("swap.json")]);
    assert_eq!(out.status.code(), Some(1));
    assert!(json(&out)["counterexample"]["map"].is_object());
}

#[test]
fn diagonal_is_not_weakly_cartesian() {
    let out = sigkit(&["check", "--property", "weakly-cartesian", "--builtin", "diagonal"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["verdict"], "violated");
}

#[test]
fn mismatched_bases_are_rejected() {
    let out = sigkit(&["eval", "--kind", "poly", "--input", &fixture("poly.json"), "--slice", &fixture("other_base_slice.json")]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("over Q"));
}

#[test]
fn malformed_json_reports_its_location() {
    let out = sigkit(&["eval", "--kind", "tgraph", "--input", &fixture("malformed.json")]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr).to_string();
    assert!(err.contains("line 3 column"), "{err}");
}

#[test]
fn evaluation_of_a_polynomial() {
    let out = sigkit(&["eval", "--kind", "poly", "--input", &fixture("poly.json"), "--slice", &fixture("slice.json")]);
    assert_eq!(out.status.code(), Some(0));
    // b1 needs an x and a y: 2·1 choices; b2 needs an x: 2 choices
    let v = json(&out);
    assert_eq!(v["value"]["total"]["elems"].as_array().unwrap().len(), 4);
    let out = sigkit(&["eval", "--kind", "poly", "--input", &fixture("poly.json"), "--counts", "2,1,1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn free_planar_counts() {
    for kind in ["strict", "amalg", "sym", "tgraph:list"] {
        let out = sigkit(&["free", "--kind", kind, "--depth", "6", "--arity-bound", "5", "--input", &fixture("binary.json")]);
        assert_eq!(out.status.code(), Some(0), "{kind}");
        let v = json(&out);
        assert_eq!(v["counts_by_arity"], serde_json::json!([0, 1, 1, 2, 5, 14]), "{kind}");
        assert!(!v["monoid"].is_null(), "{kind}");
    }
}

#[test]
fn free_category_needs_unary_operations() {
    let out = sigkit(&["free", "--kind", "tgraph:id", "--depth", "3", "--arity-bound", "1", "--input", &fixture("chain.json")]);
    assert_eq!(out.status.code(), Some(0));
    // x, y, z identities, f, g and g∘f
    assert_eq!(json(&out)["counts_by_arity"], serde_json::json!([0, 6]));
    let out = sigkit(&["free", "--kind", "tgraph:id", "--depth", "3", "--arity-bound", "1", "--input", &fixture("binary.json")]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn tensors() {
    let l = fixture("two_sorts.json");
    for kind in ["total", "single", "tgraph"] {
        let out = sigkit(&["tensor", "--kind", kind, "--left", &l, "--right", &l]);
        assert_eq!(out.status.code(), Some(0), "{kind}");
    }
    let c = fixture("commutative.json");
    let out = sigkit(&["tensor", "--kind", "sym", "--left", &c, "--right", &c]);
    assert_eq!(out.status.code(), Some(0));
    let out = sigkit(&["tensor", "--kind", "sym", "--left", &l, "--right", &l]);
    assert_eq!(out.status.code(), Some(2), "binary operations need their action listed");
}

#[test]
fn recovery_outcomes() {
    let out = sigkit(&["recover", "--kind", "analytic", "--input", &fixture("commutative.json")]);
    assert_eq!(out.status.code(), Some(0));
    assert!(json(&out)["iso"].is_object());
    assert_eq!(sigkit(&["recover", "--builtin", "gumm", "--bound", "3"]).status.code(), Some(3));
    assert_eq!(sigkit(&["recover", "--builtin", "gumm", "--bound", "4"]).status.code(), Some(1));
}

#[test]
fn bound_from_the_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_sigkit"))
        .args(["recover", "--builtin", "gumm"])
        .env("SIGKIT_BOUND", "4")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(sigkit(&["check", "--property", "weak-wide-pb", "--bound", "0"]).status.code(), Some(2));
}

#[test]
fn comparisons() {
    for (f, input) in [("ksig", "binary.json"), ("kdiag", "poly.json"), ("iota-a", "two_sorts.json"), ("iota-s", "commutative.json")] {
        let out = sigkit(&["compare", "--functor", f, "--input", &fixture(input)]);
        assert_eq!(out.status.code(), Some(0), "{f}");
        assert_eq!(json(&out)["witness"]["functor"], f);
    }
    for v in ["phi", "psi"] {
        let out = sigkit(&["compare", "--verify", v, "--seed", "9"]);
        assert_eq!(out.status.code(), Some(0), "{v}");
        assert_eq!(json(&out)["verification"]["verdict"], "holds");
    }
}
