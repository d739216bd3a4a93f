use std::fs;
use std::path::Path;

use rolsh::bench::cli::{run, EXIT_CONFIG, EXIT_OK, EXIT_STAGE};
use rolsh::bench::{run_experiment, run_query_demo, ExperimentConfig, Manifest, Pipeline, Stage, FAILED_MARKER};
use rolsh::eval::{parse_report_csv, FOLD_HELD_OUT};
use rolsh::regress::{RegressorKind, RegressorModel};
use rolsh::Error;

fn tiny(out: &Path) -> ExperimentConfig {
    let mut c = ExperimentConfig::default();
    c.dataset.n = 1500;
    c.dataset.d = 16;
    c.scenarios = vec![1, 3];
    c.kinds = vec![RegressorKind::Linear, RegressorKind::DecisionTree, RegressorKind::Mlp];
    c.folds = 3;
    c.scenario_scale = 0.02;
    c.demo.queries = 20;
    c.regressors.mlp_hidden = 16;
    c.regressors.mlp_max_epochs = 30;
    c.out = out.to_path_buf();
    c
}

#[test]
fn same_seed_same_report_bytes() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run_experiment(tiny(a.path())).unwrap();
    run_experiment(tiny(b.path())).unwrap();
    let ra = fs::read(a.path().join("report.csv")).unwrap();
    let rb = fs::read(b.path().join("report.csv")).unwrap();
    assert!(!ra.is_empty());
    assert_eq!(ra, rb);
    for rel in ["index.bin", "truth.csv", "splits/scenario_1.json"] {
        assert_eq!(fs::read(a.path().join(rel)).unwrap(), fs::read(b.path().join(rel)).unwrap(), "{rel}");
    }
    // model files also carry the measured fit time
    let load = |d: &Path| RegressorModel::from_bytes(&fs::read(d.join("models/s3_mlp.rgrm")).unwrap()).unwrap();
    assert_eq!(load(a.path()).params, load(b.path()).params);
}

#[test]
fn report_covers_every_cell() {
    let dir = tempfile::tempdir().unwrap();
    let c = tiny(dir.path());
    run_experiment(c.clone()).unwrap();
    let rows = parse_report_csv(&fs::read_to_string(dir.path().join("report.csv")).unwrap()).unwrap();
    // held-out + folds + mean + std per (scenario, kind)
    assert_eq!(rows.len(), c.scenarios.len() * c.kinds.len() * (1 + c.folds + 2));
    assert!(rows.iter().all(|r| r.train_ms.is_none() && r.predict_ms.is_none()));
    let held: Vec<_> = rows.iter().filter(|r| r.fold == FOLD_HELD_OUT).collect();
    assert_eq!(held.len(), 6);
    assert!(held.iter().all(|r| r.mse.is_finite() && r.mse >= 0.0));
    let timings = fs::read_to_string(dir.path().join("timings.csv")).unwrap();
    assert_eq!(timings.lines().count(), 1 + 6);
    assert!(!dir.path().join(FAILED_MARKER).exists());
}

#[test]
fn unchanged_stages_are_reused() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = tiny(dir.path());
    let first = run_experiment(c.clone()).unwrap();
    let second = run_experiment(c.clone()).unwrap();
    assert_eq!(first.stages, second.stages);

    // a regressor setting only invalidates training and what follows it
    c.regressors.ridge_alpha = 2.0;
    let third = run_experiment(c).unwrap();
    assert_eq!(first.stages["index"], third.stages["index"]);
    assert_eq!(first.stages["truth"], third.stages["truth"]);
    assert_ne!(first.stages["train"].input_hash, third.stages["train"].input_hash);
    assert_ne!(first.stages["report"].input_hash, third.stages["report"].input_hash);
}

#[test]
fn tampering_is_detected_and_repaired() {
    let dir = tempfile::tempdir().unwrap();
    let c = tiny(dir.path());
    run_experiment(c.clone()).unwrap();
    let manifest = Manifest::load(dir.path()).unwrap().unwrap();
    assert!(manifest.verify(dir.path()).is_empty());

    let truth = dir.path().join("truth.csv");
    let original = fs::read(&truth).unwrap();
    fs::write(&truth, b"k,label\n").unwrap();
    let bad = manifest.verify(dir.path());
    assert_eq!(bad.len(), 1, "{bad:?}");
    assert!(bad[0].contains("truth.csv"));

    let out = dir.path().to_str().unwrap();
    assert_eq!(run(["rolsh-bench", "verify", "--out", out]), EXIT_STAGE);
    // the damaged stage reruns and reproduces the same bytes
    let mut p = Pipeline::new(c).unwrap();
    p.run(Stage::Truth).unwrap();
    assert_eq!(fs::read(&truth).unwrap(), original);
    assert!(p.manifest().verify(dir.path()).is_empty());
}

#[test]
fn failed_stage_leaves_a_marker() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = tiny(dir.path());
    c.dataset.profile = None;
    let bad = dir.path().join("broken.fvecs");
    fs::write(&bad, [7u8, 0, 0]).unwrap();
    c.dataset.path = Some(bad);
    let mut p = Pipeline::new(c.clone()).unwrap();
    assert!(p.run_all().is_err());
    let marker = fs::read_to_string(dir.path().join(FAILED_MARKER)).unwrap();
    assert!(marker.contains("stage: index"), "{marker}");

    // a good run over the same directory clears it
    let good = tiny(dir.path());
    run_experiment(good).unwrap();
    assert!(!dir.path().join(FAILED_MARKER).exists());
}

#[test]
fn cli_filters_scenarios_and_kinds() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    let mut c = tiny(&dir.path().join("out"));
    c.kinds = RegressorKind::ALL.to_vec();
    fs::write(&cfg, c.to_toml()).unwrap();
    let code = run([
        "rolsh-bench",
        "all",
        "--config",
        cfg.to_str().unwrap(),
        "--scenarios",
        "1",
        "--kinds",
        "linear,mlp",
        "--threads",
        "2",
    ]);
    assert_eq!(code, EXIT_OK);
    let rows = parse_report_csv(&fs::read_to_string(dir.path().join("out/report.csv")).unwrap()).unwrap();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r.scenario == 1));
    assert!(rows.iter().all(|r| matches!(r.kind, RegressorKind::Linear | RegressorKind::Mlp)));
    assert!(rows.iter().any(|r| r.kind == RegressorKind::Mlp));
}

#[test]
fn cli_rejects_bad_configs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "folds = 1\n").unwrap();
    assert_eq!(run(["rolsh-bench", "all", "--config", cfg.to_str().unwrap()]), EXIT_CONFIG);
    fs::write(&cfg, "no_such_field = 3\n").unwrap();
    assert_eq!(run(["rolsh-bench", "all", "--config", cfg.to_str().unwrap()]), EXIT_CONFIG);
}

#[test]
fn demo_needs_a_trained_model() {
    let dir = tempfile::tempdir().unwrap();
    let c = tiny(dir.path());
    assert!(matches!(run_query_demo(c.clone(), 5, 10), Err(Error::ModelNotFound(_))));

    run_experiment(c.clone()).unwrap();
    let report = run_query_demo(c, 5, 10).unwrap();
    assert_eq!(report.rows.len(), 10);
    assert!(report.mean_levels_predicted <= report.mean_levels_from_one);
    assert!(dir.path().join("demo.csv").exists());
}

#[test]
fn example_config_parses() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/small.toml");
    let c = ExperimentConfig::load(&path).unwrap();
    c.validate().unwrap();
    assert_eq!(c.scenarios, vec![1, 3]);
}
