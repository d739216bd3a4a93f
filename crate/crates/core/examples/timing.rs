//! Median batch prediction time for a few model kinds.

use rolsh::eval::time_predictions;
use rolsh::regress::{fit, RegressorConfig, RegressorKind};
use rolsh::{seed, Matrix};
use rand::Rng as _;

fn main() -> rolsh::Result<()> {
    let mut rng = seed::rng(1);
    let (n, f) = (2_000, 8);
    let x = Matrix::from_vec(n, f, (0..n * f).map(|_| rng.random_range(-1.0..1.0)).collect())?;
    let y: Vec<f64> = x.iter_rows().map(|r| r.iter().map(|v| v * v).sum()).collect();

    let config = RegressorConfig::default();
    for kind in [RegressorKind::Linear, RegressorKind::GradientBoosting, RegressorKind::Svr, RegressorKind::Mlp] {
        let model = fit(kind, &config, &x, &y, 2)?;
        let ms = time_predictions(&model, &x, 5)?;
        println!("{:18} {ms:9.3} ms for {n} rows", kind.name());
    }
    Ok(())
}
