//! Compare searches that grow the radius from 1 with searches that start at
//! a radius predicted by a trained model. The demo needs trained models, so
//! the experiment runs first.

use rolsh::bench::{run_experiment, run_query_demo, ExperimentConfig};
use rolsh::regress::RegressorKind;

fn main() -> rolsh::Result<()> {
    let mut config = ExperimentConfig::default();
    config.dataset.n = 5_000;
    config.dataset.d = 32;
    config.scenarios = vec![3];
    config.kinds = vec![RegressorKind::Mlp];
    config.folds = 2;
    config.scenario_scale = 0.1;
    config.out = std::env::temp_dir().join("rolsh-demo-example");

    run_experiment(config.clone())?;
    let report = run_query_demo(config, 10, 100)?;
    print!("{}", report.render());
    Ok(())
}
