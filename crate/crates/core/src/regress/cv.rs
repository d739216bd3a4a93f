use rand::seq::SliceRandom;
use rayon::prelude::*;

use super::{fit, RegressorConfig, RegressorKind};
use crate::error::{Error, Result};
use crate::eval;
use crate::matrix::Matrix;
use crate::seed;

/// Held-out accuracy of one cross-validation fold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FoldMetrics {
    pub fold: usize,
    pub mse: f64,
    /// NaN when the fold's labels are constant.
    pub r2_paper: f64,
    pub r2_standard: f64,
    pub train_ms: f64,
    pub n_train: usize,
    pub n_test: usize,
    pub converged: bool,
}

/// Seeded partition of `0..samples` into `folds` disjoint parts whose sizes
/// differ by at most one (larger parts first).
pub fn kfold_partition(samples: usize, folds: usize, seed_v: u64) -> Result<Vec<Vec<usize>>> {
    if folds < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 folds, got {folds}")));
    }
    if samples < folds {
        return Err(Error::TooFewSamples { samples, folds });
    }
    let mut order: Vec<usize> = (0..samples).collect();
    order.shuffle(&mut seed::rng(seed_v));
    let (base, extra) = (samples / folds, samples % folds);
    let mut parts = Vec::with_capacity(folds);
    let mut at = 0;
    for f in 0..folds {
        let size = base + usize::from(f < extra);
        let mut part = order[at..at + size].to_vec();
        part.sort_unstable();
        parts.push(part);
        at += size;
    }
    Ok(parts)
}

/// Trains on all folds but one and scores on the held-out one, for every
/// fold. Folds run in parallel; each fold's fit is seeded independently.
pub fn cross_validate(
    kind: RegressorKind,
    config: &RegressorConfig,
    x: &Matrix,
    y: &[f64],
    folds: usize,
    seed_v: u64,
) -> Result<Vec<FoldMetrics>> {
    if x.rows() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.rows(),
            got: y.len(),
        });
    }
    let parts = kfold_partition(x.rows(), folds, seed_v)?;
    parts
        .par_iter()
        .enumerate()
        .map(|(f, test)| {
            let mut in_test = vec![false; x.rows()];
            test.iter().for_each(|&i| in_test[i] = true);
            let train: Vec<usize> = (0..x.rows()).filter(|&i| !in_test[i]).collect();
            let y_train: Vec<f64> = train.iter().map(|&i| y[i]).collect();
            let y_test: Vec<f64> = test.iter().map(|&i| y[i]).collect();
            let model = fit(
                kind,
                config,
                &x.select_rows(&train),
                &y_train,
                seed::derive_seed(seed_v, "fold", f as u64),
            )?;
            let pred = model.predict(&x.select_rows(test))?;
            Ok(FoldMetrics {
                fold: f,
                mse: eval::mse(&y_test, &pred)?,
                r2_paper: eval::r_squared_paper(&y_test, &pred).unwrap_or(f64::NAN),
                r2_standard: eval::r_squared_standard(&y_test, &pred).unwrap_or(f64::NAN),
                train_ms: model.train_time_ms,
                n_train: train.len(),
                n_test: test.len(),
                converged: model.converged,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng as _;

    #[test]
    fn ten_folds_of_two_thousand() {
        let parts = kfold_partition(2000, 10, 1).unwrap();
        assert!(parts.iter().all(|p| p.len() == 200));
        let mut all: Vec<usize> = parts.concat();
        all.sort_unstable();
        assert_eq!(all, (0..2000).collect::<Vec<_>>());
    }

    #[test]
    fn uneven_folds_differ_by_one() {
        let parts = kfold_partition(23, 5, 2).unwrap();
        let sizes: Vec<usize> = parts.iter().map(Vec::len).collect();
        assert_eq!(sizes, vec![5, 5, 5, 4, 4]);
        assert_eq!(kfold_partition(23, 5, 2).unwrap(), parts);
        assert_ne!(kfold_partition(23, 5, 3).unwrap(), parts);
    }

    #[test]
    fn too_few_samples() {
        assert!(matches!(
            kfold_partition(3, 4, 0),
            Err(Error::TooFewSamples { samples: 3, folds: 4 })
        ));
        assert!(kfold_partition(3, 1, 0).is_err());
    }

    #[test]
    fn linear_cv_on_noiseless_data_is_exact() {
        let mut rng = seed::rng(3);
        let x = Matrix::from_vec(200, 3, (0..600).map(|_| rng.random_range(-5.0..5.0)).collect()).unwrap();
        let y: Vec<f64> = x.iter_rows().map(|r| 1.5 * r[0] - 2.0 * r[1] + 0.25 * r[2] + 4.0).collect();
        let folds = cross_validate(RegressorKind::Linear, &RegressorConfig::default(), &x, &y, 10, 9).unwrap();
        assert_eq!(folds.len(), 10);
        let mean = folds.iter().map(|f| f.mse).sum::<f64>() / 10.0;
        assert!(mean < 1e-12, "mean fold mse {mean}");
        assert!(folds.iter().all(|f| f.n_train + f.n_test == 200));
    }
}
