//! End-to-end CLI tests: train/predict round trip, sweep output, and the
//! exit-code contract (0 ok, 1 usage, 2 data error, 3 I/O).

use std::path::Path;
use std::process::{Command, Output};

fn fwsvm(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fwsvm"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

const DATA: &str = "+1 1:2 2:1\n+1 1:1.5 2:0.5\n-1 1:-1 2:-0.5\n-1 1:-2 2:-1\n+1 1:2.5\n-1 2:-2\n";

#[test]
fn train_predict_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("train.txt"), DATA).unwrap();
    let out = fwsvm(
        &[
            "train",
            "--data",
            "train.txt",
            "--algo",
            "mfw",
            "--C",
            "1",
            "--model-out",
            "model.txt",
        ],
        tmp.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(tmp.path().join("model.txt").exists());

    let out = fwsvm(
        &[
            "predict",
            "--model",
            "model.txt",
            "--data",
            "train.txt",
            "--out",
            "labels.txt",
        ],
        tmp.path(),
    );
    assert!(out.status.success());
    let labels = std::fs::read_to_string(tmp.path().join("labels.txt")).unwrap();
    let predicted: Vec<&str> = labels.lines().collect();
    assert_eq!(predicted.len(), 6);
    assert!(predicted.iter().all(|&l| l == "+1" || l == "-1"));
    // training data is separable on the first feature: perfect recall
    assert_eq!(predicted, vec!["+1", "+1", "-1", "-1", "+1", "-1"]);
}

#[test]
fn sweep_emits_rows() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("train.txt"), DATA).unwrap();
    let out = fwsvm(
        &[
            "sweep",
            "--data",
            "train.txt",
            "--grid",
            "0.1,1,10",
            "--folds",
            "3",
            "--out",
            "sweep.csv",
        ],
        tmp.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(tmp.path().join("sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "algo,C,fold,acc,svs,iters");
    assert_eq!(lines.len(), 1 + 3 * 3);
}

#[test]
fn usage_errors_exit_1() {
    let tmp = tempfile::tempdir().unwrap();
    let out = fwsvm(&["train", "--bogus-flag"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    std::fs::write(tmp.path().join("train.txt"), DATA).unwrap();
    // rbf without sigma
    let out = fwsvm(
        &[
            "train",
            "--data",
            "train.txt",
            "--kernel",
            "rbf",
            "--model-out",
            "m.txt",
        ],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn data_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("bad.txt"), "3 1:1\n").unwrap();
    let out = fwsvm(
        &["train", "--data", "bad.txt", "--model-out", "m.txt"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn io_errors_exit_3() {
    let tmp = tempfile::tempdir().unwrap();
    let out = fwsvm(
        &["train", "--data", "missing.txt", "--model-out", "m.txt"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn help_exits_0() {
    let tmp = tempfile::tempdir().unwrap();
    let out = fwsvm(&["--help"], tmp.path());
    assert_eq!(out.status.code(), Some(0));
}
