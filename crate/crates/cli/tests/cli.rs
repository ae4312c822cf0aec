use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::{json, Value};
use tempfile::TempDir;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("scottlab").chain(args.iter().copied());
    let code = scottlab_cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn ok(args: &[&str]) -> Value {
    let (code, out, err) = run(args);
    assert_eq!(code, 0, "{args:?}: {err}");
    serde_json::from_str(&out).unwrap()
}

fn write(dir: &Path, name: &str, v: &Value) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, v.to_string()).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn tree(parents: &[Option<usize>]) -> Value {
    let nodes: Vec<Value> = parents.iter().enumerate().map(|(id, p)| json!({"id": id, "parent": p})).collect();
    json!({ "nodes": nodes })
}

fn pmodel(n: usize, p: usize) -> Value {
    ok(&["struct-gen", "--kind", "pmodel", "--n", &n.to_string(), "--p", &p.to_string()])
}

#[test]
fn tree_commands() {
    let dir = TempDir::new().unwrap();
    let t = write(dir.path(), "t.json", &tree(&[None, Some(0), Some(0), Some(1)]));
    assert_eq!(ok(&["tree-rank", "--input", s(&t)]), json!({"rank": 3}));
    let c = ok(&["tree-canonical", "--m", "3"]);
    assert_eq!(c["nodes"].as_array().unwrap().len(), 8);
    let e = ok(&["tree-embed", "--input", s(&t), "--width", "2"]);
    assert_eq!(e["targetIndex"], 4);
    assert_eq!(e["embedding"]["map"]["0"], 0);
    let w = ok(&["tree-witness", "--width", "2", "--beta", "2"]);
    assert_eq!(w["nodes"].as_array().unwrap().len(), 7);
}

#[test]
fn code_commands() {
    let dir = TempDir::new().unwrap();
    let base = |set: &[&str]| json!({"op": "base", "set": set});
    let inner = json!({"op": "intersect", "args": [base(&["a", "b"]), base(&["b", "c"])]});
    let expr = json!({"op": "union", "args": [base(&["a"]), {"op": "union", "args": [inner]}]});
    let e = write(dir.path(), "e.json", &expr);
    let code = ok(&["code-from-expr", "--input", s(&e)]);
    let c = write(dir.path(), "c.json", &code);
    let solved = ok(&["code-solve", "--input", s(&c)]);
    assert_eq!(solved, json!({"codedSet": ["a", "b"]}));
    assert_eq!(ok(&["code-solve", "--input", s(&c), "--oracle"]), solved);
    let back = ok(&["expr-from-code", "--input", s(&c)]);
    assert_eq!(back["piLevel"], 3);
    let padded = ok(&["code-pad", "--input", s(&c), "--m", "6"]);
    let p = write(dir.path(), "p.json", &padded);
    assert_eq!(ok(&["code-solve", "--input", s(&p)]), solved);

    let space = write(dir.path(), "space.json", &json!(["a", "b", "c", "d"]));
    let wide = ok(&["code-from-expr", "--input", s(&e), "--space", s(&space)]);
    assert_eq!(wide["space"], json!(["a", "b", "c", "d"]));
}

#[test]
fn code_pad_with_embedding() {
    let dir = TempDir::new().unwrap();
    let code = json!({
        "tree": tree(&[None, Some(0), Some(0)]),
        "space": ["x", "y"],
        "labels": {"1": ["x"], "2": ["y"]},
    });
    let c = write(dir.path(), "c.json", &code);
    let emb = write(dir.path(), "e.json", &json!({"map": {"0": 0, "1": 1, "2": 2}}));
    let padded = ok(&["code-pad", "--input", s(&c), "--m", "2", "--embedding", s(&emb)]);
    let p = write(dir.path(), "p.json", &padded);
    assert_eq!(ok(&["code-solve", "--input", s(&p)]), ok(&["code-solve", "--input", s(&c)]));
}

#[test]
fn structure_commands() {
    let dir = TempDir::new().unwrap();
    let a = write(dir.path(), "a.json", &pmodel(3, 1));
    let b = write(dir.path(), "b.json", &pmodel(3, 2));
    let iso = ok(&["struct-iso", "--left", s(&a), "--right", s(&a)]);
    assert_eq!(iso, json!({"isomorphic": true, "bijection": [0, 1, 2]}));
    assert_eq!(ok(&["struct-iso", "--left", s(&a), "--right", s(&b)]), json!({"isomorphic": false, "bijection": null}));

    let nested = ok(&["struct-gen", "--kind", "nested-eq", "--levels", "2", "--branching", "2", "--leaf-size", "1"]);
    assert_eq!(nested["universe"], 4);
    let args = ["struct-gen", "--kind", "random", "--seed", "7", "--signature", "E:2,P:1", "--n", "3"];
    assert_eq!(ok(&args), ok(&args));

    let r = ok(&["ef", "--left", s(&a), "--right", s(&b), "--alpha", "1"]);
    assert_eq!(r["winner"], "I");
    assert!(r["positionsExplored"].as_u64().unwrap() > 0);
    let t = write(dir.path(), "t.json", &tree(&[None]));
    let r = ok(&["ef", "--left", s(&a), "--right", s(&b), "--tree", s(&t), "--cap-c", "2", "--cap-f", "3"]);
    assert_eq!(r["winner"], "II");
}

#[test]
fn scott_and_link2() {
    let dir = TempDir::new().unwrap();
    let class = dir.path().join("class");
    fs::create_dir(&class).unwrap();
    for p in 0..=3 {
        write(&class, &format!("p{p}.json"), &pmodel(3, p));
    }
    fs::write(class.join("notes.txt"), "ignored").unwrap();
    let h = ok(&["scott", "--class", s(&class), "--cap-c", "3", "--cap-f", "3", "--jobs", "2"]);
    assert_eq!(h["scottHeight"], 1);
    assert_eq!(h["members"]["p0"], 1);
    assert_eq!((h["capC"].clone(), h["capF"].clone(), h["maxHeight"].clone()), (json!(3), json!(3), json!(5)));
    let one = ok(&["scott", "--class", s(&class), "--member", "p2", "--max-height", "3"]);
    assert_eq!(one["scottHeight"], 1);
    let r = ok(&["link2", "--class", s(&class), "--cap-c", "3", "--cap-f", "3"]);
    assert_eq!(
        r,
        json!({
            "scottHeight": 1,
            "runTreeRank": 3,
            "rankIdentityHolds": true,
            "codeDecidesIso": true,
            "borelRankUpperBound": 2,
        })
    );
}

#[test]
fn unbounded_height_is_null() {
    let dir = TempDir::new().unwrap();
    for p in 1..=2 {
        write(dir.path(), &format!("p{p}.json"), &pmodel(3, p));
    }
    let h = ok(&["scott", "--class", s(dir.path()), "--cap-c", "1", "--cap-f", "2"]);
    assert_eq!(h["scottHeight"], Value::Null);
    let (code, _, err) = run(&["link2", "--class", s(dir.path()), "--cap-c", "1", "--cap-f", "2"]);
    assert_eq!(code, 1, "{err}");
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let t = write(dir.path(), "t.json", &tree(&[None, Some(0), Some(0), Some(0)]));

    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("Usage"));
    assert_eq!(run(&["--version"]).0, 0);

    for bad in [&["frobnicate"][..], &["tree-rank"], &["tree-canonical", "--m", "x"], &["ef", "--left", "a", "--right", "b"]] {
        assert_eq!(run(bad).0, 2, "{bad:?}");
    }

    let (code, _, err) = run(&["tree-embed", "--input", s(&t), "--width", "2"]);
    assert_eq!(code, 1);
    assert!(err.contains("branching exceeds width"), "{err}");
    assert_eq!(run(&["tree-rank", "--input", s(&dir.path().join("missing.json"))]).0, 1);
    let junk = write(dir.path(), "junk.json", &json!({"nodes": [{"id": 0, "parent": 0}]}));
    assert_eq!(run(&["tree-rank", "--input", s(&junk)]).0, 1);
    assert_eq!(run(&["struct-gen", "--kind", "pmodel", "--n", "3"]).0, 1);
    assert_eq!(run(&["tree-embed", "--input", s(&t), "--width", "0"]).0, 1);

    let (code, _, err) = run(&["tree-canonical", "--m", "30"]);
    assert_eq!(code, 3, "{err}");
    assert_eq!(run(&["--node-budget", "4", "tree-canonical", "--m", "3"]).0, 3);
    let a = write(dir.path(), "a.json", &pmodel(3, 1));
    let b = write(dir.path(), "b.json", &pmodel(3, 1));
    assert_eq!(run(&["--position-budget", "1", "ef", "--left", s(&a), "--right", s(&b), "--alpha", "2"]).0, 3);
}

#[test]
fn binary_selftest_is_stable() {
    let bin = env!("CARGO_BIN_EXE_scottlab");
    let a = Command::new(bin).args(["selftest", "--seed", "9"]).output().unwrap();
    let b = Command::new(bin).args(["selftest", "--seed", "9"]).output().unwrap();
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["ok"], true);
    let usage = Command::new(bin).arg("nope").output().unwrap();
    assert_eq!(usage.status.code(), Some(2));
}
