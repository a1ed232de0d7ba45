use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use ffd_core::eval::EvaluationReport;

const CONFIG: &str = r#"{
  "seed": 5,
  "models": {
    "random_forest": {"n_estimators": 40},
    "gradient_boosting": {"n_estimators": 40},
    "mlp": {"max_iter": 60}
  },
  "grids": {"random_forest": {"max_depth": [2, 5]}},
  "generator": {"counts": {
    "train": {"control": 30, "alcohol": 20, "drug": 15, "sleep": 15},
    "validation": {"control": 8, "alcohol": 8, "drug": 8, "sleep": 8},
    "test": {"control": 20, "alcohol": 8, "drug": 8, "sleep": 8}
  }}
}"#;

fn ffd(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ffd"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn ffd")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = ffd(dir, args);
    assert!(
        out.status.success(),
        "ffd {args:?} exited {:?}\n{}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn pipeline(dir: &Path) -> String {
    fs::write(dir.join("cfg.json"), CONFIG).unwrap();
    let c = ["--config", "cfg.json"];
    let run = |rest: &[&str]| ok(dir, &[&c[..], rest].concat());
    run(&["synth", "--masks", "2"]);
    run(&["localize"]);
    run(&["baseline"]);
    run(&["extract"]);
    run(&["train", "--family", "random_forest", "--search", "--cv"]);
    run(&["train", "--family", "gradient_boosting", "--family", "mlp"]);
    run(&["eval"]);
    run(&["report"]);
    run(&["predict", "--family", "gradient_boosting", "--sequences", "data/localized.csv"])
}

const ARTIFACTS: [&str; 17] = [
    "data/train.csv",
    "data/test.csv",
    "data/localized.csv",
    "data/train.features.jsonl",
    "data/validation.features.jsonl",
    "data/test.features.jsonl",
    "models/baselines.json",
    "models/random_forest.json",
    "models/random_forest.grid.json",
    "models/random_forest.cv.json",
    "models/gradient_boosting.json",
    "models/mlp.json",
    "out/random_forest/report.json",
    "out/gradient_boosting/report.txt",
    "out/mlp/report.json",
    "out/behaviour/behaviour.json",
    "out/behaviour/ratio_x.csv",
];

#[test]
fn full_pipeline_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let pa = pipeline(a.path());
    let pb = pipeline(b.path());

    let header = pa.lines().next().unwrap();
    assert_eq!(header, "id\tcondition\tcontrol\talcohol\tdrug\tsleep\tindicator\tunfit_score");
    assert_eq!(pa.lines().count(), 3, "{pa}");
    assert_eq!(pa, pb);

    for rel in ARTIFACTS {
        let x = fs::read(a.path().join(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"));
        let y = fs::read(b.path().join(rel)).unwrap();
        assert!(x == y, "{rel} differs between runs");
    }

    let report = EvaluationReport::load(a.path().join("out/mlp/report.json")).unwrap();
    assert_eq!(report.metadata.seed, 5);
    assert_eq!(report.conditions.confusion.total(), 44);
    assert_eq!(report.fit_unfit.confusion.classes, ["fit", "unfit"]);
}

#[test]
fn seed_flag_changes_the_data() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for (dir, seed) in [(&a, "1"), (&b, "2")] {
        fs::write(dir.path().join("cfg.json"), CONFIG).unwrap();
        ok(dir.path(), &["synth", "--config", "cfg.json", "--seed", seed]);
    }
    let x = fs::read(a.path().join("data/train.csv")).unwrap();
    let y = fs::read(b.path().join("data/train.csv")).unwrap();
    assert_ne!(x, y);
}

#[test]
fn missing_inputs_exit_one_with_a_hint() {
    let dir = tempfile::tempdir().unwrap();
    for args in [&["baseline"][..], &["extract"], &["train"], &["eval"], &["localize"]] {
        let out = ffd(dir.path(), args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains("ffd"), "{args:?}: {err}");
    }
    assert_eq!(ffd(dir.path(), &["train", "--family", "svm"]).status.code(), Some(1));
    assert_eq!(ffd(dir.path(), &["--help"]).status.code(), Some(0));
}
