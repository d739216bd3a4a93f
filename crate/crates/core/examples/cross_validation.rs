//! Ten-fold cross-validation of two regressors.

use rolsh::regress::{cross_validate, kfold_partition, RegressorConfig, RegressorKind};
use rolsh::{seed, Matrix};
use rand::Rng as _;

fn main() -> rolsh::Result<()> {
    let mut rng = seed::rng(5);
    let n = 500;
    let mut x = Matrix::zeros(n, 2);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let (a, b): (f64, f64) = (rng.random_range(0.0..4.0), rng.random_range(0.0..4.0));
        x.row_mut(i).copy_from_slice(&[a, b]);
        y.push((a * b).sqrt() + rng.random_range(-0.05..0.05));
    }

    let parts = kfold_partition(n, 10, 6)?;
    println!("fold sizes: {:?}", parts.iter().map(Vec::len).collect::<Vec<_>>());

    let config = RegressorConfig::default();
    for kind in [RegressorKind::Ridge, RegressorKind::GradientBoosting] {
        let folds = cross_validate(kind, &config, &x, &y, 10, 6)?;
        let mean = folds.iter().map(|f| f.mse).sum::<f64>() / folds.len() as f64;
        println!("{:18} mean fold mse {mean:.5}", kind.name());
        for f in &folds {
            println!("    fold {}: mse {:.5}, r2 {:.4}", f.fold, f.mse, f.r2_paper);
        }
    }
    Ok(())
}
