use std::path::Path;
use std::process::{Command, Output};

use hybridssl::data::load_corpus;
use hybridssl::model::{DiscriminativeParams, GenerativeParams, HybridModel};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hybridssl"))
        .args(args)
        .output()
        .unwrap()
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_string_lossy().into_owned()
}

#[test]
fn train_then_predict_matches_the_library() {
    let dir = tempfile::tempdir().unwrap();
    let (c, m) = (path(dir.path(), "c.txt"), path(dir.path(), "m.txt"));
    assert!(bin(&[
        "synth",
        "--synthetic",
        "3,30,0.6,40",
        "--seed",
        "2",
        "--out",
        &c
    ])
    .status
    .success());
    let out = bin(&[
        "train",
        "--corpus",
        &c,
        "--lambda",
        "0.5",
        "--coupling",
        "beta",
        "--seed",
        "1",
        "--labeled-per-class",
        "5",
        "--unlabeled",
        "30",
        "--out",
        &m,
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report = String::from_utf8(out.stderr).unwrap();
    assert!(
        report.contains("iterations=")
            && report.contains("converged=")
            && report.contains("objective="),
        "{report}"
    );

    let out = bin(&["predict", "--model", &m, "--corpus", &c]);
    assert_eq!(out.status.code(), Some(0));
    let model = HybridModel::load(Path::new(&m)).unwrap();
    let data = load_corpus(Path::new(&c), None).unwrap();
    let stdout = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines.len(), data.len());
    let mut correct = 0;
    for (i, (line, inst)) in lines.iter().zip(data.instances()).enumerate() {
        let f: Vec<&str> = line.split('\t').collect();
        assert_eq!(f[0], i.to_string());
        let y: usize = f[1].parse().unwrap();
        assert_eq!(y, hybridssl::model::predict(&model.disc, &inst.features));
        correct += usize::from(Some(y) == inst.label);
    }
    let stderr = String::from_utf8(out.stderr).unwrap();
    let expected = format!(
        "accuracy={correct}/{}={:.6}",
        data.len(),
        correct as f64 / data.len() as f64
    );
    assert_eq!(stderr.trim(), expected);
}

#[test]
fn uniform_model_predicts_with_probability_one_over_k() {
    let dir = tempfile::tempdir().unwrap();
    let (c, m) = (path(dir.path(), "c.txt"), path(dir.path(), "m.txt"));
    assert!(bin(&["synth", "--synthetic", "4,12,0.5,3", "--out", &c])
        .status
        .success());
    let model = HybridModel::new(
        GenerativeParams::uniform(4, 12),
        DiscriminativeParams::zeros(4, 12),
    )
    .unwrap();
    model.save(Path::new(&m)).unwrap();
    let out = bin(&["predict", "--model", &m, "--corpus", &c]);
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout.lines().count(), 12);
    assert!(
        stdout.lines().all(|l| l.ends_with("\t0\t0.250000")),
        "{stdout}"
    );
}

#[test]
fn dimension_mismatch_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let (c, m) = (path(dir.path(), "c.txt"), path(dir.path(), "m.txt"));
    assert!(bin(&["synth", "--synthetic", "2,12,0.5,3", "--out", &c])
        .status
        .success());
    HybridModel::new(
        GenerativeParams::uniform(2, 13),
        DiscriminativeParams::zeros(2, 13),
    )
    .unwrap()
    .save(Path::new(&m))
    .unwrap();
    assert_eq!(
        bin(&["predict", "--model", &m, "--corpus", &c])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let m = path(dir.path(), "m.txt");
    let out = bin(&[
        "train",
        "--synthetic",
        "2,10,0.5,20",
        "--lambda",
        "1.5",
        "--out",
        &m,
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--lambda"));
    assert_eq!(
        bin(&[
            "sweep",
            "--synthetic",
            "2,10,0.5,20",
            "--lambdas",
            "",
            "--out",
            &m
        ])
        .status
        .code(),
        Some(2)
    );
    assert_eq!(bin(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        bin(&[
            "train",
            "--corpus",
            "/no/such/file",
            "--lambda",
            "0.5",
            "--out",
            &m
        ])
        .status
        .code(),
        Some(2)
    );
    assert_eq!(bin(&["train", "--help"]).status.code(), Some(0));
}

#[test]
fn sweep_writes_tables_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = path(dir.path(), "sw");
    let out = bin(&[
        "sweep",
        "--synthetic",
        "2,20,0.5,60",
        "--lambdas",
        "0,0.5,1",
        "--unlabeled",
        "0,20",
        "--labeled-per-class",
        "5",
        "--seeds",
        "2",
        "--max-iters",
        "20",
        "--out",
        &out_dir,
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let summary = String::from_utf8(out.stdout).unwrap();
    assert_eq!(summary.lines().count(), 2);
    assert!(summary.starts_with("unlabeled=0 best_lambda="));
    let results = std::fs::read_to_string(Path::new(&out_dir).join("results.csv")).unwrap();
    assert!(results.starts_with(
        "lambda,unlabeled,seed,accuracy,gen_accuracy,outer_iters,converged,wall_ms\n"
    ));
    assert_eq!(results.lines().count(), 1 + 3 * 2 * 2);
    let agg = std::fs::read_to_string(Path::new(&out_dir).join("aggregate.csv")).unwrap();
    assert!(agg.starts_with("lambda,unlabeled,mean_acc,std_acc,n_seeds\n0.000000,0,"));
}

#[test]
fn prior_curves_default_panels() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "curves.csv");
    assert!(bin(&["prior-curves", "--out", &out]).status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let mut gammas: Vec<&str> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap())
        .collect();
    gammas.dedup();
    assert_eq!(gammas, ["0.1", "1", "10", "100"]);
    assert_eq!(text.lines().count(), 1 + 4 * 2 * 2001);
}
