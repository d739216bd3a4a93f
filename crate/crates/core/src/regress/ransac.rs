//! RANSAC around ordinary least squares.

use rand::seq::index::sample;

use super::linear::{fit_ols, LinearModel};
use super::RegressorConfig;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::seed;

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

pub(crate) fn median_absolute_deviation(y: &[f64]) -> f64 {
    let mut v = y.to_vec();
    let med = median(&mut v);
    let mut dev: Vec<f64> = y.iter().map(|a| (a - med).abs()).collect();
    median(&mut dev)
}

pub fn fit(x: &Matrix, y: &[f64], cfg: &RegressorConfig, seed: u64) -> Result<LinearModel> {
    let n = x.rows();
    let min_samples = cfg.ransac_min_samples.unwrap_or(x.cols() + 1);
    if min_samples == 0 || min_samples > n {
        return Err(Error::DegenerateFit(format!(
            "RANSAC needs {min_samples} samples per trial, have {n}"
        )));
    }
    let threshold = cfg.ransac_threshold.unwrap_or_else(|| median_absolute_deviation(y));
    let mut rng = seed::rng(seed);

    // best consensus: (inlier count, inlier SSE, inlier ids)
    let mut best: Option<(usize, f64, Vec<usize>)> = None;
    for _ in 0..cfg.ransac_trials {
        let subset = sample(&mut rng, n, min_samples).into_vec();
        let model = match fit_ols(&x.select_rows(&subset), &subset.iter().map(|&i| y[i]).collect::<Vec<_>>()) {
            Ok(m) => m,
            Err(_) => continue,
        };
        let mut inliers = Vec::new();
        let mut sse = 0.0;
        for i in 0..n {
            let r = y[i] - model.predict_row(x.row(i));
            // the subset fit is exact up to rounding; count its own rows
            if r.abs() <= threshold + 1e-9 * (1.0 + y[i].abs()) {
                inliers.push(i);
                sse += r * r;
            }
        }
        let better = match &best {
            None => true,
            Some((count, best_sse, _)) => inliers.len() > *count || (inliers.len() == *count && sse < *best_sse),
        };
        if better {
            best = Some((inliers.len(), sse, inliers));
        }
    }
    let Some((_, _, inliers)) = best else {
        return Err(Error::DegenerateFit("RANSAC found no valid consensus set".into()));
    };
    let consensus_y: Vec<f64> = inliers.iter().map(|&i| y[i]).collect();
    fit_ols(&x.select_rows(&inliers), &consensus_y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mad_of_small_vectors() {
        assert_eq!(median_absolute_deviation(&[1.0, 2.0, 3.0, 4.0, 100.0]), 1.0);
        assert_eq!(median_absolute_deviation(&[5.0, 5.0, 5.0]), 0.0);
    }

    #[test]
    fn ignores_gross_outliers() {
        let n = 50;
        let x = Matrix::from_vec(n, 1, (0..n).map(|i| i as f64 * 0.2).collect()).unwrap();
        let mut y: Vec<f64> = (0..n).map(|i| 3.0 * i as f64 * 0.2 - 1.0).collect();
        for i in (0..n).step_by(5) {
            y[i] += 500.0;
        }
        let m = fit(&x, &y, &RegressorConfig::default(), 1).unwrap();
        assert!((m.coef[0] - 3.0).abs() < 1e-9);
        assert!((m.intercept + 1.0).abs() < 1e-9);
    }

    #[test]
    fn seeded_and_repeatable() {
        let x = Matrix::from_vec(30, 1, (0..30).map(|i| (i * i % 17) as f64).collect()).unwrap();
        let y: Vec<f64> = (0..30).map(|i| (i * 7 % 11) as f64).collect();
        let c = RegressorConfig::default();
        assert_eq!(fit(&x, &y, &c, 4).unwrap(), fit(&x, &y, &c, 4).unwrap());
    }
}
