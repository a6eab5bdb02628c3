use std::path::PathBuf;
use std::process::Command;

use serde_json::Value;

fn corpus(name: &str) -> String {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus");
    root.join(format!("{name}.json")).to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> (i32, Value) {
    let out = Command::new(env!("CARGO_BIN_EXE_jetalg")).args(args).output().unwrap();
    let code = out.status.code().unwrap();
    let v = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (code, v)
}

#[test]
fn hereditary_kdv() {
    let (code, v) = run(&["check-hereditary", "--op", &corpus("kdv")]);
    assert_eq!(code, 0);
    assert_eq!(v["hereditary"], true);
}

#[test]
fn counterexample_not_integrable() {
    let (code, v) = run(&["check-integrable", "--op", &corpus("counterexample")]);
    assert_eq!(code, 1);
    assert_eq!(v["integrable"], false);
    assert_eq!(v["reason"], "q=u''' not a variational derivative");
    let (code, _) = run(&["check-integrable", "--pair", "--op", &corpus("counterexample")]);
    assert_eq!(code, 1);
}

#[test]
fn kdv_hierarchy_verified() {
    let (code, v) = run(&["hierarchy", "--op", &corpus("kdv"), "--steps", "3", "--verify"]);
    assert_eq!(code, 0);
    assert_eq!(v["chain"].as_array().unwrap().len(), 4);
    assert_eq!(v["chain"][1], "u''' + 3*u*u'");
    assert_eq!(v["pairwise_zero"], true);
    assert_eq!(v["orders"], serde_json::json!([1, 3, 5, 7]));
    assert_eq!(v["order_growth"]["certified"], true);
}

#[test]
fn counterexample_chain_does_not_commute() {
    let (code, v) = run(&["hierarchy", "--op", "counterexample", "--verify"]);
    assert_eq!(code, 1);
    assert_eq!(v["pairwise_zero"], false);
    assert_eq!(v["violations"][0]["residual"], "-u'''^2");
}

#[test]
fn recursion_check() {
    let (code, _) = run(&["check-recursion", "--op", "counterexample", "--seed", "u'"]);
    assert_eq!(code, 0);
    let (code, v) = run(&["check-recursion", "--op", "counterexample", "--seed", "u''"]);
    assert_eq!(code, 1);
    assert_eq!(v["recursion"], false);
}

#[test]
fn hypothesis_violation_exit_code() {
    let (code, v) = run(&["hierarchy", "--op", "kdv", "--seed", "u^2", "--steps", "1"]);
    assert_eq!(code, 3);
    assert!(v["hypothesis_violation"].as_str().unwrap().contains("not a total derivative"));
    let (code, _) = run(&["densities", "--op", "counterexample"]);
    assert_eq!(code, 3);
}

#[test]
fn usage_and_parse_errors() {
    assert_eq!(run(&["parse", "u**"]).0, 2);
    assert_eq!(run(&["check-hereditary", "--op", "no-such-operator"]).0, 2);
    assert_eq!(run(&["hierarchy"]).0, 2);
    assert_eq!(run(&["hierarchy", "--op", "kdv", "--scheme", "bogus"]).0, 2);
}

#[test]
fn parse_and_bracket() {
    let (code, v) = run(&["parse", "u''' + 3*u*u'"]);
    assert_eq!(code, 0);
    assert_eq!(v["canonical"], "u''' + 3*u*u'");
    assert_eq!(run(&["parse", "u(5)"]).1["canonical"], "u(5)");
    let (_, v) = run(&["bracket", "u", "u^2"]);
    assert_eq!(v["bracket"], "u^2");
    assert_eq!(v["zero"], false);
}

#[test]
fn power_and_densities() {
    let (code, v) = run(&["power", "--op", "kdv", "--power", "2"]);
    assert_eq!(code, 0);
    assert_eq!(v["qs"], serde_json::json!(["1", "u"]));
    let (code, v) = run(&["densities", "--op", "kdv", "--power", "2", "--jobs", "2"]);
    assert_eq!(code, 0);
    assert_eq!(v["densities"][1]["rho"], "1/2*u^2");
}

#[test]
fn burgers_pair_chain() {
    let (code, v) = run(&["hierarchy", "--op", "burgers", "--verify"]);
    assert_eq!(code, 0);
    assert_eq!(v["scheme"], "pair");
    assert_eq!(v["potentials"][2], "u' + u^2");
}

#[test]
fn corpus_batch_matches() {
    let (code, v) = run(&["corpus", "--jobs", "2"]);
    assert_eq!(code, 0);
    assert_eq!(v["all_match"], true);
}

#[test]
fn text_format() {
    let out = Command::new(env!("CARGO_BIN_EXE_jetalg"))
        .args(["check-hereditary", "--op", "kdv", "--format", "text"])
        .output()
        .unwrap();
    let s = String::from_utf8(out.stdout).unwrap();
    assert!(s.lines().any(|l| l == "hereditary: true"));
}
