use std::path::Path;
use std::process::{Command, Output};

fn selfloop(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_selfloop"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn plan(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../plans")
        .join(name)
        .display()
        .to_string()
}

#[test]
fn generate_config_p2() {
    let dir = tempfile::tempdir().unwrap();
    let out = selfloop(
        dir.path(),
        &[
            "generate",
            "--model",
            "config",
            "--degrees",
            "1,1",
            "--out",
            "p2.txt",
        ],
    );
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        std::fs::read_to_string(dir.path().join("p2.txt")).unwrap(),
        "# nodes 2\n0 1\n"
    );
    let config: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("run_config.json")).unwrap())
            .unwrap();
    assert_eq!(config["command"], "generate");
    assert_eq!(config["seed"], 0);
}

#[test]
fn generate_sbm_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &'static str| {
        vec![
            "generate",
            "--model",
            "sbm",
            "--p-intra",
            "6/100",
            "--p-inter",
            "3/900",
            "--classes",
            "10",
            "--per-class",
            "100",
            "--seed",
            "7",
            "--out",
            out,
        ]
    };
    assert!(selfloop(dir.path(), &args("a/g.txt")).status.success());
    assert!(selfloop(dir.path(), &args("b/g.txt")).status.success());
    for file in ["g.txt", "g.features.csv", "g.labels.csv"] {
        let a = std::fs::read(dir.path().join("a").join(file)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(file)).unwrap();
        assert_eq!(a, b, "{file}");
    }
    let labels = std::fs::read_to_string(dir.path().join("a/g.labels.csv")).unwrap();
    assert_eq!(labels.lines().count(), 1001);
    let config = std::fs::read_to_string(dir.path().join("a/run_config.json")).unwrap();
    assert!(config.contains("\"3/900\""), "{config}");
}

#[test]
fn verify_paradox_on_k3_and_p2() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("k3.txt"), "0 1\n1 2\n2 0\n").unwrap();
    let out = selfloop(
        dir.path(),
        &["verify-paradox", "--input", "k3.txt", "--out", "k3.csv"],
    );
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(
        text.contains("0.500000 > with self-loops 0.333333"),
        "{text}"
    );
    assert!(text.contains("paradox holds"));
    let csv = std::fs::read_to_string(dir.path().join("k3.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 6);

    std::fs::write(dir.path().join("p2.txt"), "0 1\n").unwrap();
    let out = selfloop(
        dir.path(),
        &["verify-paradox", "--input", "p2.txt", "--kmax", "2"],
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("1.000000 > with self-loops 0.500000"));
}

#[test]
fn influence_on_p2_with_loops() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("p2.txt"), "0 1\n").unwrap();
    let out = selfloop(
        dir.path(),
        &[
            "influence",
            "--input",
            "p2.txt",
            "--node",
            "0",
            "--k",
            "2",
            "--from",
            "0",
        ],
    );
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "source,influence\n0,0.5\n");
}

#[test]
fn train_writes_model() {
    let dir = tempfile::tempdir().unwrap();
    let out = selfloop(
        dir.path(),
        &[
            "train",
            "--p-intra",
            "6/100",
            "--p-inter",
            "3/900",
            "--layers",
            "2",
            "--out",
            "model.json",
        ],
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let model: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("model.json")).unwrap())
            .unwrap();
    assert_eq!(model["layers"].as_array().unwrap().len(), 2);
    assert!(stdout(&out).contains("test accuracy"));
}

#[test]
fn smoke_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out = selfloop(
        dir.path(),
        &[
            "grid",
            "--plan",
            &plan("smoke.json"),
            "--out",
            "report",
            "--workers",
            "2",
        ],
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = std::fs::read_to_string(dir.path().join("report/accuracies.csv")).unwrap();
    assert_eq!(csv.lines().count(), 9);
    for file in ["walk_stats.csv", "summary.json", "run_config.json"] {
        assert!(dir.path().join("report").join(file).exists(), "{file}");
    }
    let again = selfloop(
        dir.path(),
        &[
            "grid",
            "--plan",
            &plan("smoke.json"),
            "--out",
            "again",
            "--workers",
            "1",
        ],
    );
    assert!(again.status.success());
    for file in ["accuracies.csv", "walk_stats.csv", "summary.json"] {
        assert_eq!(
            std::fs::read(dir.path().join("report").join(file)).unwrap(),
            std::fs::read(dir.path().join("again").join(file)).unwrap(),
            "{file}"
        );
    }
}

#[test]
fn ingest_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("e.txt"), "0 1\n1 3\n2 2\n").unwrap();
    std::fs::write(dir.path().join("x.csv"), "1,2\n3,4\n5,6\n7,8\n").unwrap();
    std::fs::write(dir.path().join("y.csv"), "0,1\n1,0\n2,1\n3,0\n").unwrap();
    let out = selfloop(
        dir.path(),
        &[
            "ingest",
            "--edges",
            "e.txt",
            "--features",
            "x.csv",
            "--labels",
            "y.csv",
            "--out",
            "clean",
        ],
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let clean = dir.path().join("clean");
    assert_eq!(
        std::fs::read_to_string(clean.join("edges.txt")).unwrap(),
        "# nodes 3\n0 1\n1 2\n"
    );
    assert_eq!(
        std::fs::read_to_string(clean.join("edges.features.csv")).unwrap(),
        "1,2\n3,4\n7,8\n"
    );
    assert_eq!(
        std::fs::read_to_string(clean.join("node_ids.csv")).unwrap(),
        "node,original\n0,0\n1,1\n2,3\n"
    );
    let retrain = selfloop(
        dir.path(),
        &[
            "train",
            "--input",
            "clean/edges.txt",
            "--features",
            "clean/edges.features.csv",
            "--labels",
            "clean/edges.labels.csv",
            "--train-fraction",
            "0.5",
            "--epochs",
            "3",
        ],
    );
    assert_eq!(
        retrain.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&retrain.stderr)
    );
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    // usage errors
    assert_eq!(
        selfloop(dir.path(), &["stats", "--frobnicate"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        selfloop(dir.path(), &["verify-paradox"]).status.code(),
        Some(2)
    );
    assert_eq!(
        selfloop(
            dir.path(),
            &["generate", "--model", "sbm", "--out", "g.txt"]
        )
        .status
        .code(),
        Some(2)
    );
    assert_eq!(
        selfloop(
            dir.path(),
            &["generate", "--model", "sbm", "--p-intra", "6/0"]
        )
        .status
        .code(),
        Some(2)
    );
    // data errors
    assert_eq!(
        selfloop(dir.path(), &["stats", "--input", "missing.txt"])
            .status
            .code(),
        Some(3)
    );
    std::fs::write(dir.path().join("bad.txt"), "0 x\n").unwrap();
    let out = selfloop(dir.path(), &["stats", "--input", "bad.txt"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.txt:1"));
    assert_eq!(
        selfloop(
            dir.path(),
            &[
                "generate",
                "--model",
                "config",
                "--degrees",
                "1,1,1",
                "--out",
                "g.txt"
            ]
        )
        .status
        .code(),
        Some(3)
    );
    // help
    assert_eq!(selfloop(dir.path(), &["--help"]).status.code(), Some(0));
}

#[test]
fn help_documents_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let help = stdout(&selfloop(dir.path(), &["train", "--help"]));
    for default in [
        "[default: 70]",
        "[default: 0.01]",
        "[default: 0.8]",
        "[default: 16]",
        "[default: 0]",
        "[default: 10]",
        "[default: 100]",
        "[default: 0.4]",
    ] {
        assert!(help.contains(default), "missing {default}");
    }
    let help = stdout(&selfloop(dir.path(), &["verify-paradox", "--help"]));
    assert!(help.contains("[default: 6]"));
}
