//! Fit every regressor kind on one problem and compare held-out accuracy,
//! then save and reload one model.

use rolsh::eval::{mse, r_squared_paper};
use rolsh::regress::{fit, RegressorConfig, RegressorKind, RegressorModel};
use rolsh::{seed, Matrix};
use rand::Rng as _;

fn problem(n: usize, seed_v: u64) -> (Matrix, Vec<f64>) {
    let mut rng = seed::rng(seed_v);
    let mut x = Matrix::zeros(n, 3);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let r: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
        x.row_mut(i).copy_from_slice(&r);
        y.push(3.0 * r[0] + r[1] * r[1] - r[2].sin() + rng.random_range(-0.1..0.1));
    }
    (x, y)
}

fn main() -> rolsh::Result<()> {
    let (x, y) = problem(800, 1);
    let (xt, yt) = problem(200, 2);
    let config = RegressorConfig::default();

    let mut best: Option<RegressorModel> = None;
    for kind in RegressorKind::ALL {
        let model = fit(kind, &config, &x, &y, 3)?;
        let pred = model.predict(&xt)?;
        let e = mse(&yt, &pred)?;
        println!(
            "{:18} mse {:8.4}  r2 {:6.3}  fit {:7.1} ms  converged {}",
            kind.name(),
            e,
            r_squared_paper(&yt, &pred)?,
            model.train_time_ms,
            model.converged
        );
        if best.as_ref().is_none_or(|b| mse(&yt, &b.predict(&xt).unwrap()).unwrap() > e) {
            best = Some(model);
        }
    }

    let best = best.unwrap();
    let bytes = best.to_bytes();
    let back = RegressorModel::from_bytes(&bytes)?;
    println!("best: {}, {} bytes serialized, reload identical = {}", best.kind, bytes.len(), back == best);
    Ok(())
}
