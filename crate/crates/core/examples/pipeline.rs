//! Run the whole experiment on a small synthetic dataset, then again to
//! show that every stage is reused.

use rolsh::bench::{run_experiment, ExperimentConfig};
use rolsh::regress::RegressorKind;

fn main() -> rolsh::Result<()> {
    let mut config = ExperimentConfig::from_toml(
        r#"
        scenarios = [1, 3]
        folds = 3
        scenario_scale = 0.05
        kinds = ["linear", "gradient_boosting", "mlp"]

        [dataset]
        profile = "sift_like"
        n = 4000
        d = 32
        "#,
    )?;
    config.out = std::env::temp_dir().join("rolsh-pipeline-example");
    config.demo.kind = RegressorKind::Mlp;

    let manifest = run_experiment(config.clone())?;
    for (stage, rec) in &manifest.stages {
        println!("{stage:7} {:8.0} ms  {} artifacts", rec.wall_ms, rec.artifacts.len());
    }
    let report = std::fs::read_to_string(config.out.join("report.csv"))?;
    println!("report.csv: {} lines", report.lines().count());

    let again = run_experiment(config)?;
    println!("second run reused every stage: {}", again.stages == manifest.stages);
    Ok(())
}
