use std::fs;
use std::path::Path;
use std::process::Command;

use serde_json::Value;
use tempfile::TempDir;

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_wfcoalg")).args(args).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn chain_is_well_founded() {
    let (code, out, _) = run(&["check-wf", &fixture("chain.json")]);
    assert_eq!(code, 0);
    assert!(out.starts_with("well-founded, ranks a=3 b=2 c=1"), "{out}");
}

#[test]
fn selfloop_is_not() {
    let (code, out, _) = run(&["check-wf", &fixture("selfloop.json")]);
    assert_eq!(code, 1);
    assert!(out.contains("enters a cycle at a"), "{out}");
}

#[test]
fn example_budget_message() {
    let (code, out, _) = run(&["koenig", "gallery:example-3.11", "--state", "1", "--budget", "1000"]);
    assert_eq!(code, 2);
    assert_eq!(
        out,
        "budget exhausted after visiting 1000 states from 1; only the empty finite subcoalgebra exists\n"
    );
}

#[test]
fn dot_for_two_nodes_and_empty_graph() {
    let dir = TempDir::new().unwrap();
    let ab = write(
        &dir,
        "ab.json",
        r#"{"kind": "set-coalgebra", "version": 1, "functor": {"finpow": {"id": null}},
            "states": ["b", "a"], "structure": {"a": {"set": [{"state": "b"}]}, "b": {"set": []}}}"#,
    );
    let (code, out, _) = run(&["export-dot", &ab]);
    assert_eq!(code, 0);
    assert_eq!(out, "digraph G {\n  \"a\";\n  \"b\";\n  \"a\" -> \"b\";\n}\n");
    let empty = write(
        &dir,
        "empty.json",
        r#"{"kind": "set-coalgebra", "version": 1, "functor": {"finpow": {"id": null}}, "states": [], "structure": {}}"#,
    );
    assert_eq!(run(&["export-dot", &empty]).1, "digraph G { }\n");
}

#[test]
fn orbit_graph_dot() {
    let (code, out, _) = run(&["export-dot", &fixture("nlts-acyclic.json")]);
    assert_eq!(code, 0);
    assert!(out.contains("\"l0\" -> \"l1\";"), "{out}");
}

#[test]
fn errors_are_line_anchored() {
    let (code, _, err) = run(&["check-wf", &fixture("bad-dangling.json")]);
    assert_eq!(code, 3);
    assert!(err.contains("bad-dangling.json:8:"), "{err}");
    assert!(err.contains("ghost"), "{err}");
    let (code, _, err) = run(&["wf-part", &fixture("bad-syntax.json")]);
    assert_eq!(code, 3);
    assert!(err.contains("bad-syntax.json:4:3:"), "{err}");
}

#[test]
fn version_is_checked() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "v2.json", "{\n  \"kind\": \"convex\",\n  \"version\": 2\n}\n");
    let (code, _, err) = run(&["check-wf", &p]);
    assert_eq!(code, 3);
    assert!(err.contains(":3:") && err.contains("version 2"), "{err}");
}

#[test]
fn realized_coalgebra_round_trips() {
    let (code, out, _) = run(&[
        "realize",
        "--sig",
        &fixture("binary.sig.json"),
        "--structure",
        &fixture("node-structure.json"),
        "--format",
        "json",
    ]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["report"]["term"], "node(node(leaf,leaf),leaf)");
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "realized.json", &v["report"]["coalgebra"].to_string());
    let (code, out, _) = run(&["fold", &p, "--algebra", "term", "--sig", &fixture("binary.sig.json")]);
    assert_eq!(code, 0);
    assert!(out.contains("x = node(node(leaf,leaf),leaf)"), "{out}");
}

#[test]
fn json_reports_reload() {
    let (code, out, _) = run(&["wf-part", &fixture("cycle-tail.json"), "--format", "json"]);
    assert_eq!(code, 1);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["exitCode"], 1);
    assert_eq!(v["report"]["wellFounded"], false);
    assert_eq!(v["report"]["wfPart"], serde_json::json!(["done", "leaf"]));
}

#[test]
fn fold_algebras() {
    let (code, out, _) = run(&["fold", &fixture("tree.json"), "--algebra", "count"]);
    assert_eq!(code, 0);
    assert!(out.contains("shared = 3"), "{out}");
    let (code, out, _) = run(&["fold", &fixture("cycle-tail.json"), "--algebra", "induction"]);
    assert_eq!(code, 1);
    assert!(out.contains("reaches a cycle"), "{out}");
    let (code, _, err) = run(&["fold", &fixture("chain.json"), "--algebra", "term", "--sig", &fixture("nat.sig.json")]);
    assert_eq!(code, 3, "{err}");
}

#[test]
fn multiple_inputs_keep_order_and_worst_code() {
    let (code, out, err) = run(&[
        "check-wf",
        &fixture("selfloop.json"),
        &fixture("chain.json"),
        &fixture("unknown-kind.json"),
    ]);
    assert_eq!(code, 3);
    let a = out.find("selfloop.json (exit 1)").unwrap();
    let b = out.find("chain.json (exit 0)").unwrap();
    let c = out.find("unknown-kind.json (exit 3)").unwrap();
    assert!(a < b && b < c, "{out}");
    assert!(err.contains("hypergraph"), "{err}");
}

#[test]
fn seeds_are_deterministic() {
    let args = ["check-wf", &fixture("nlts-acyclic.json"), "--seed", "7", "--format", "json"];
    assert_eq!(run(&args), run(&args));
}

#[test]
fn witness_length_follows_flag() {
    let (code, out, _) = run(&["check-wf", &fixture("convex-self-loop.json"), "--length", "12", "--format", "json"]);
    assert_eq!(code, 1);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["report"]["witness"]["steps"].as_array().unwrap().len(), 13);
}

#[test]
fn lazy_input_needs_koenig() {
    let (code, _, err) = run(&["check-wf", "gallery:example-3.11"]);
    assert_eq!(code, 3);
    assert!(err.contains("koenig"), "{err}");
}

#[test]
fn usage_errors_exit_3_and_help_exits_0() {
    assert_eq!(run(&["check-wf"]).0, 3);
    assert_eq!(run(&["gallery", "nope"]).0, 3);
    assert_eq!(run(&["--depth", "0", "check-initial", "--sig", &fixture("nat.sig.json")]).0, 3);
    assert_eq!(run(&["--help"]).0, 0);
    assert_eq!(run(&["--version"]).0, 0);
}

#[test]
fn in_process_run() {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = wfcoalg_cli::run_args(["wfcoalg", "gallery", "convex-chain"], &mut out, &mut err);
    assert_eq!(code, 0);
    assert!(String::from_utf8(out).unwrap().contains("generator ranks g0=2 g1=1"));
}
