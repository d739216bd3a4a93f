use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::matrix::{dot, Matrix};

/// `ŷ = coef · x + intercept`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub coef: Vec<f64>,
    pub intercept: f64,
}

impl LinearModel {
    #[inline]
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        dot(&self.coef, row) + self.intercept
    }
}

/// Column-centered copy of `x` plus column means, and centered `y` plus its mean.
pub(crate) struct Centered {
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
    pub x_mean: Vec<f64>,
    pub y_mean: f64,
}

pub(crate) fn center(x: &Matrix, y: &[f64]) -> Centered {
    let x_mean = x.column_means();
    let y_mean = y.iter().sum::<f64>() / y.len() as f64;
    let xc = DMatrix::from_fn(x.rows(), x.cols(), |i, j| x.get(i, j) - x_mean[j]);
    let yc = DVector::from_iterator(y.len(), y.iter().map(|v| v - y_mean));
    Centered {
        x: xc,
        y: yc,
        x_mean,
        y_mean,
    }
}

pub(crate) fn with_intercept(coef: DVector<f64>, c: &Centered) -> LinearModel {
    let coef: Vec<f64> = coef.iter().copied().collect();
    let intercept = c.y_mean - dot(&coef, &c.x_mean);
    LinearModel { coef, intercept }
}

fn lstsq_svd(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
    let svd = x.clone().svd(true, true);
    let eps = svd.singular_values.max() * 1e-12;
    svd.solve(y, eps)
        .map_err(|e| Error::DegenerateFit(format!("least squares failed: {e}")))
}

/// Ordinary least squares with intercept. Householder QR; falls back to the
/// minimum-norm SVD solution when the design is rank deficient.
pub fn fit_ols(x: &Matrix, y: &[f64]) -> Result<LinearModel> {
    let c = center(x, y);
    let f = c.x.ncols();
    let coef = if c.x.nrows() >= f {
        let qr = c.x.clone().qr();
        let r = qr.r();
        let diag_max = (0..f).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
        let well_posed = diag_max > 0.0 && (0..f).all(|i| r[(i, i)].abs() > diag_max * 1e-10);
        if well_posed {
            let qty = qr.q().transpose() * &c.y;
            r.solve_upper_triangular(&qty)
                .ok_or_else(|| Error::DegenerateFit("singular triangular factor".into()))?
        } else {
            lstsq_svd(&c.x, &c.y)?
        }
    } else {
        lstsq_svd(&c.x, &c.y)?
    };
    Ok(with_intercept(coef, &c))
}

/// Ridge regression minimizing `‖y − Xβ − b‖² + α‖β‖²`; the intercept is
/// not penalized.
pub fn fit_ridge(x: &Matrix, y: &[f64], alpha: f64) -> Result<LinearModel> {
    if !(alpha >= 0.0) {
        return Err(Error::InvalidParameter(format!("ridge alpha {alpha} must be >= 0")));
    }
    let c = center(x, y);
    let mut gram = c.x.transpose() * &c.x;
    for i in 0..gram.nrows() {
        gram[(i, i)] += alpha;
    }
    let rhs = c.x.transpose() * &c.y;
    let coef = match gram.clone().cholesky() {
        Some(ch) => ch.solve(&rhs),
        None => lstsq_svd(&c.x, &c.y)?,
    };
    Ok(with_intercept(coef, &c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;
    use rand::Rng as _;

    #[test]
    fn exact_line() {
        let x = Matrix::from_vec(10, 1, (0..10).map(|i| i as f64).collect()).unwrap();
        let y: Vec<f64> = (0..10).map(|i| 2.0 * i as f64 + 1.0).collect();
        let m = fit_ols(&x, &y).unwrap();
        assert!((m.coef[0] - 2.0).abs() < 1e-9);
        assert!((m.intercept - 1.0).abs() < 1e-9);
        assert!((m.predict_row(&[3.0]) - 7.0).abs() < 1e-9);
    }

    #[test]
    fn rank_deficient_design_uses_min_norm() {
        // second column duplicates the first
        let x = Matrix::from_rows(&[[1.0, 1.0], [2.0, 2.0], [3.0, 3.0], [4.0, 4.0]]).unwrap();
        let y = [3.0, 5.0, 7.0, 9.0];
        let m = fit_ols(&x, &y).unwrap();
        assert!((m.coef[0] - 1.0).abs() < 1e-9 && (m.coef[1] - 1.0).abs() < 1e-9);
        assert!((m.intercept - 1.0).abs() < 1e-9);
    }

    #[test]
    fn ridge_limit_matches_ols_normal_equations() {
        let mut rng = seed::rng(3);
        let x = Matrix::from_vec(60, 4, (0..240).map(|_| rng.random_range(-3.0..3.0)).collect()).unwrap();
        let y: Vec<f64> = (0..60)
            .map(|i| x.row(i).iter().enumerate().map(|(j, v)| v * (j as f64 - 1.5)).sum::<f64>() + rng.random_range(-0.5..0.5))
            .collect();
        // independent oracle: solve the normal equations with nalgebra LU on
        // the explicit [X 1] design
        let design = DMatrix::from_fn(60, 5, |i, j| if j == 4 { 1.0 } else { x.get(i, j) });
        let yv = DVector::from_column_slice(&y);
        let beta = (design.transpose() * &design).lu().solve(&(design.transpose() * yv)).unwrap();
        let ridge = fit_ridge(&x, &y, 1e-10).unwrap();
        for j in 0..4 {
            assert!((ridge.coef[j] - beta[j]).abs() < 1e-6);
        }
        assert!((ridge.intercept - beta[4]).abs() < 1e-6);
        let ols = fit_ols(&x, &y).unwrap();
        for j in 0..4 {
            assert!((ols.coef[j] - beta[j]).abs() < 1e-9);
        }
    }

    #[test]
    fn ridge_shrinks() {
        let x = Matrix::from_vec(10, 1, (0..10).map(|i| i as f64).collect()).unwrap();
        let y: Vec<f64> = (0..10).map(|i| 2.0 * i as f64).collect();
        let m = fit_ridge(&x, &y, 100.0).unwrap();
        assert!(m.coef[0] > 0.0 && m.coef[0] < 2.0);
        assert!(fit_ridge(&x, &y, -1.0).is_err());
    }
}
