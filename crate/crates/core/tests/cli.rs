use std::path::Path;
use std::process::Command;

use red_kit::cli;
use red_kit::harness::{gen_regression_novelty, Switch};

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("red-kit").chain(args.iter().copied());
    let code = cli::run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_string_lossy().into_owned()
}

fn json(s: &str) -> serde_json::Value {
    serde_json::from_str(s).unwrap_or_else(|e| panic!("{e}: {s}"))
}

#[test]
fn ncd_of_two_files() {
    let dir = tempfile::tempdir().unwrap();
    let mut state = 7u32;
    let a: Vec<u8> = (0..600)
        .map(|_| {
            state = state.wrapping_mul(1_103_515_245).wrapping_add(12_345);
            b'a' + (state >> 16) as u8 % 26
        })
        .collect();
    let mut b = a.clone();
    b[300] = b'#';
    std::fs::write(dir.path().join("a"), &a).unwrap();
    std::fs::write(dir.path().join("b"), &b).unwrap();
    let (code, out, _) = run(&["ncd", &path(dir.path(), "a"), &path(dir.path(), "b")]);
    assert_eq!(code, 0);
    let d: f64 = out.trim().parse().unwrap();
    assert!((0.0..0.5).contains(&d), "{d}");
    let (code, stored, _) = run(&[
        "ncd",
        &path(dir.path(), "a"),
        &path(dir.path(), "b"),
        "--backend",
        "store",
    ]);
    assert_eq!(code, 0);
    assert!(stored.trim().parse::<f64>().unwrap() > d);
}

#[test]
fn validation_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("a"), "x").unwrap();
    let a = path(dir.path(), "a");
    for args in [
        vec!["ncd", a.as_str(), "/nonexistent/file"],
        vec!["ncd", a.as_str(), a.as_str(), "--backend", "zip"],
        vec!["bogus"],
        vec!["fit", a.as_str()],
        vec!["matrix", a.as_str(), "--metric", "cosine"],
    ] {
        let (code, _, err) = run(&args);
        assert_eq!(code, 1, "{args:?}: {err}");
        assert!(!err.is_empty());
    }
    let (_, _, err) = run(&["ncd", &a, "/nonexistent/file"]);
    assert_eq!(json(&err)["error"]["kind"], "io");
}

#[test]
fn computation_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("corpus"), "apple pie\nbanana split\n").unwrap();
    let (code, _, err) = run(&[
        "nwd",
        "apple",
        "banana",
        "--corpus",
        &path(dir.path(), "corpus"),
    ]);
    assert_eq!(code, 2);
    assert_eq!(json(&err)["error"]["kind"], "nwd");

    std::fs::write(dir.path().join("a"), "abc").unwrap();
    let a = path(dir.path(), "a");
    let (code, _, _) = run(&["ncd", &a, &a, "--backend", "external:exit 3"]);
    assert_eq!(code, 2);
}

#[test]
fn matrix_is_symmetric_csv() {
    let dir = tempfile::tempdir().unwrap();
    for (name, text) in [
        ("one", "alpha beta gamma "),
        ("two", "alpha beta delta "),
        ("three", "zzzz yyyy "),
    ] {
        std::fs::write(dir.path().join(name), text.repeat(10)).unwrap();
    }
    let (code, out, _) = run(&["matrix", dir.path().to_str().unwrap()]);
    assert_eq!(code, 0);
    let rows: Vec<Vec<&str>> = out.lines().map(|l| l.split(',').collect()).collect();
    assert_eq!(rows[0], ["id", "one", "three", "two"]);
    for (i, row) in rows.iter().enumerate().skip(1) {
        for (j, cell) in row.iter().enumerate().skip(1) {
            assert_eq!(*cell, rows[j][i]);
        }
    }
    let (_, serial, _) = run(&[
        "matrix",
        dir.path().to_str().unwrap(),
        "--serial",
        "--metric",
        "nid",
    ]);
    assert_eq!(serial, out);
}

#[test]
fn nwd_on_a_corpus() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("c"),
        "red apple\nred car\napple pie\ngreen apple\n",
    )
    .unwrap();
    let (code, out, _) = run(&["nwd", "red", "apple", "--corpus", &path(dir.path(), "c")]);
    assert_eq!(code, 0);
    // G(red)=1, G(apple)=log2(4/3), G(red,apple)=2
    let want = (2.0 - (4.0f64 / 3.0).log2()) / 1.0;
    assert_eq!(out.trim(), format!("{want:.6}"));
}

#[test]
fn kg_encode_then_red() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("pre.tsv"), "a\tr\tb\nb\tr\tc\n").unwrap();
    std::fs::write(dir.path().join("post.tsv"), "a\tr\tb\nb\tr\tc\nc\tr\td\n").unwrap();
    let (code, out, _) = run(&["kg-encode", &path(dir.path(), "pre.tsv")]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["triples"], 2);
    assert!(v["hex"].as_str().unwrap().starts_with("4b4701"));

    for name in ["pre", "post"] {
        let (code, _, _) = run(&[
            "kg-encode",
            &path(dir.path(), &format!("{name}.tsv")),
            "--out",
            &path(dir.path(), &format!("{name}.bin")),
        ]);
        assert_eq!(code, 0);
    }
    let (pre, post) = (path(dir.path(), "pre.bin"), path(dir.path(), "post.bin"));
    let (code, out, _) = run(&[
        "red", "--pre", &pre, "--pretr", &pre, "--post", &post, "--kg",
    ]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert!(v["red_estimators"]["edit_script"].as_f64().is_some());
    assert!(v["red"].as_f64().unwrap() <= v["red_estimators"]["conditional"].as_f64().unwrap());
    let (_, plain, _) = run(&["red", "--pre", &pre, "--pretr", &pre, "--post", &post]);
    assert!(json(&plain)["red_estimators"]["edit_script"].is_null());

    std::fs::write(dir.path().join("bad.tsv"), "a\tr\n").unwrap();
    let (code, _, _) = run(&["kg-encode", &path(dir.path(), "bad.tsv")]);
    assert_eq!(code, 1);
}

#[test]
fn fit_then_detect() {
    let dir = tempfile::tempdir().unwrap();
    let data = gen_regression_novelty(11, 200, 50, Switch::PolyToSine).unwrap();
    std::fs::write(dir.path().join("train.csv"), data.train.to_csv()).unwrap();
    std::fs::write(dir.path().join("same.csv"), data.test_same.to_csv()).unwrap();
    std::fs::write(dir.path().join("novel.csv"), data.test_novel.to_csv()).unwrap();

    let (code, model, _) = run(&[
        "fit",
        &path(dir.path(), "train.csv"),
        "--family",
        "poly",
        "--max-terms",
        "6",
    ]);
    assert_eq!(code, 0);
    let v = json(&model);
    assert_eq!(v["k"], 3);
    assert_eq!(v["per_k_totals"].as_array().unwrap().len(), 6);
    std::fs::write(dir.path().join("model.json"), &model).unwrap();

    let m = path(dir.path(), "model.json");
    let (_, same, _) = run(&["detect", &m, &path(dir.path(), "same.csv")]);
    assert_eq!(json(&same)["classification"], "NONE");
    let (_, novel, _) = run(&["detect", &m, &path(dir.path(), "novel.csv"), "--tau", "3"]);
    assert_eq!(json(&novel)["flagged"], true);
    assert_eq!(json(&novel)["classification"], "CONTEXTUAL");
    let (code, _, _) = run(&["detect", &m, &path(dir.path(), "novel.csv"), "--tau", "0"]);
    assert_eq!(code, 1);
}

#[test]
fn experiment_report_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"scenario": "kg", "seed": 4, "kg": {"base_triples": 40, "novel_triples": 6}}"#;
    std::fs::write(dir.path().join("cfg.json"), cfg).unwrap();
    let c = path(dir.path(), "cfg.json");
    let (code, first, _) = run(&["experiment", &c]);
    assert_eq!(code, 0);
    let (_, second, _) = run(&["experiment", &c]);
    assert_eq!(first, second);
    let out = path(dir.path(), "report.json");
    assert_eq!(run(&["experiment", &c, "--out", &out]).0, 0);
    assert_eq!(std::fs::read_to_string(&out).unwrap(), first);

    std::fs::write(dir.path().join("bad.json"), r#"{"scenario": "kg"}"#).unwrap();
    let (code, _, err) = run(&["experiment", &path(dir.path(), "bad.json")]);
    assert_eq!(code, 1);
    assert_eq!(json(&err)["error"]["kind"], "config");
}

#[test]
fn battery_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"scenario": "kg", "seed": 20, "kg": {"base_triples": 30, "novel_triples": 4}}"#;
    std::fs::write(dir.path().join("cfg.json"), cfg).unwrap();
    let reports = dir.path().join("reports");
    let (code, out, _) = run(&[
        "battery",
        &path(dir.path(), "cfg.json"),
        "--seeds",
        "3",
        "--out-dir",
        reports.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let v = json(&out);
    let seeds: Vec<u64> = v["runs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["seed"].as_u64().unwrap())
        .collect();
    assert_eq!(seeds, [20, 21, 22]);
    for s in seeds {
        let report =
            json(&std::fs::read_to_string(reports.join(format!("report-{s}.json"))).unwrap());
        assert_eq!(report["backend"], "lz");
    }
    assert_eq!(
        run(&["battery", &path(dir.path(), "cfg.json"), "--seeds", "0"]).0,
        1
    );
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_red-kit");
    let ok = Command::new(bin).arg("--help").output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let help = String::from_utf8(ok.stdout).unwrap();
    for sub in [
        "ncd",
        "matrix",
        "nwd",
        "kg-encode",
        "fit",
        "detect",
        "red",
        "experiment",
        "battery",
    ] {
        assert!(help.contains(sub), "{sub} missing from help");
    }
    let bad = Command::new(bin)
        .args(["ncd", "/nonexistent/a", "/nonexistent/b"])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(1));
}
