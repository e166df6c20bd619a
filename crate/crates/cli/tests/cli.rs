use std::path::Path;
use std::process::{Command, Output};

fn featrec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_featrec")).args(args).output().expect("binary runs")
}

fn featrec_env(args: &[&str], key: &str, value: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_featrec"))
        .args(args)
        .env(key, value)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn assert_ok(o: &Output) {
    assert_eq!(code(o), 0, "stderr: {}", String::from_utf8_lossy(&o.stderr));
}

/// Small dataset plus a trained 5-tree model in `dir`.
fn trained(dir: &Path) {
    let data = dir.join("data");
    assert_ok(&featrec(&["gen", "--per-class", "5", "--nv", "27", "--out", s(&data)]));
    assert_ok(&featrec(&["train", s(&data), "--trees", "5", "--split", "60:0:40", "--out", s(dir)]));
}

#[test]
fn gen_train_eval_predict_round_trip() {
    let d = tempfile::tempdir().unwrap();
    trained(d.path());
    assert!(d.path().join("model.json").exists());
    assert!(d.path().join("train.json").exists());

    let eval_dir = d.path().join("eval");
    let o = featrec(&["eval", s(&d.path().join("model.json")), s(&d.path().join("data")), "--split", "60:0:40", "--out", s(&eval_dir)]);
    assert_ok(&o);
    for f in ["eval.json", "eval.confusion.csv", "eval.timing.json"] {
        assert!(eval_dir.join(f).exists(), "{f}");
    }
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(eval_dir.join("eval.json")).unwrap()).unwrap();
    assert_eq!(report["confusion"].as_array().unwrap().len(), 24);

    assert_ok(&featrec(&["gen", "--block", "blind hole", "--seed", "3", "--out", s(d.path())]));
    let pred = d.path().join("pred");
    let o = featrec(&["predict", s(&d.path().join("model.json")), s(&d.path().join("block_02.obj")), "--out", s(&pred)]);
    assert_ok(&o);
    let result: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(pred.join("block_02_result.json")).unwrap()).unwrap();
    assert_eq!(result["status"], "ok");
    assert_eq!(result["features"].as_array().unwrap().len(), 1);
    assert!(pred.join("block_02_labeled.obj").exists());
    assert!(pred.join("colors.json").exists());

    let o = featrec(&["noise", s(&d.path().join("model.json")), s(&d.path().join("block_02.obj")), "--trials", "3", "--out", s(&pred)]);
    assert_ok(&o);
    assert!(pred.join("block_02_noise.json").exists());
}

#[test]
fn training_is_byte_identical_across_runs_and_thread_counts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    trained(a.path());
    let data = b.path().join("data");
    assert_ok(&featrec_env(&["gen", "--per-class", "5", "--nv", "27", "--out", s(&data)], "FEATREC_THREADS", "1"));
    assert_ok(&featrec_env(
        &["train", s(&data), "--trees", "5", "--split", "60:0:40", "--out", s(b.path())],
        "FEATREC_THREADS",
        "1",
    ));
    for f in ["model.json", "train.json", "data/signatures.csv", "data/manifest.json"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn nv_mismatch_exits_with_3() {
    let d = tempfile::tempdir().unwrap();
    trained(d.path());
    let o = featrec(&["eval", s(&d.path().join("model.json")), s(&d.path().join("data")), "--nv", "102"]);
    assert_eq!(code(&o), 3);
    let o = featrec(&["train", s(&d.path().join("data")), "--nv", "102", "--out", s(d.path())]);
    assert_eq!(code(&o), 3);
}

#[test]
fn input_errors_exit_with_2() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(code(&featrec(&["extract", s(&d.path().join("missing.obj"))])), 2);
    assert_eq!(code(&featrec(&["gen", "--nv", "50"])), 2);
    assert_eq!(code(&featrec(&["gen", "--block", "no such class", "--out", s(d.path())])), 2);
    assert_eq!(code(&featrec_env(&["gen", "--block", "1", "--out", s(d.path())], "FEATREC_THREADS", "zero")), 2);
    let bad = d.path().join("bad.obj");
    std::fs::write(&bad, "v 0 0 0\nf 1 2 3\n").unwrap();
    assert_eq!(code(&featrec(&["extract", s(&bad)])), 2);
    trained(d.path());
    let o = featrec(&["train", s(&d.path().join("data")), "--split", "50:20:20"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn extract_align_and_sign_write_their_files() {
    let d = tempfile::tempdir().unwrap();
    assert_ok(&featrec(&["gen", "--block", "rectangular pocket", "--out", s(d.path())]));
    let block = d.path().join("block_10.obj");
    assert_ok(&featrec(&["extract", s(&block), "--out", s(d.path())]));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.path().join("block_10_features.json")).unwrap()).unwrap();
    let entries = manifest.as_array().unwrap();
    assert_eq!(entries.len(), 1);
    assert_eq!(entries[0]["provenance"], "stock-removal");
    let feat = d.path().join("block_10_feat0.obj");
    assert!(feat.exists());

    assert_ok(&featrec(&["align", s(&feat), "--out", s(d.path())]));
    assert!(d.path().join("block_10_feat0_aligned.obj").exists());
    let t: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.path().join("block_10_feat0_transform.json")).unwrap()).unwrap();
    assert_eq!(t["rotation"].as_array().unwrap().len(), 9);

    assert_ok(&featrec(&["sign", s(&feat), s(&feat), "--label", "10", "--nv", "27", "--out", s(d.path())]));
    let csv = std::fs::read_to_string(d.path().join("signatures.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn featureless_mesh_is_not_an_error() {
    let d = tempfile::tempdir().unwrap();
    trained(d.path());
    let cube = d.path().join("cube.obj");
    std::fs::write(
        &cube,
        "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nv 0 0 1\nv 1 0 1\nv 1 1 1\nv 0 1 1\n\
         f 1 3 2\nf 1 4 3\nf 5 6 7\nf 5 7 8\nf 1 2 6\nf 1 6 5\nf 2 3 7\nf 2 7 6\nf 3 4 8\nf 3 8 7\nf 4 1 5\nf 4 5 8\n",
    )
    .unwrap();
    let o = featrec(&["predict", s(&d.path().join("model.json")), s(&cube), "--out", s(d.path())]);
    assert_ok(&o);
    let result: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.path().join("cube_result.json")).unwrap()).unwrap();
    assert_eq!(result["status"], "featureless");
}
