//! Cyclic coordinate descent for the elastic net
//! `(1/2n)‖y − Xβ‖² + α·ρ‖β‖₁ + (α(1−ρ)/2)‖β‖²` on centered data.

use nalgebra::DVector;

use super::linear::{center, with_intercept, LinearModel};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[inline]
fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

/// Returns the model and whether the sweep loop converged before the cap.
pub fn fit_elastic_net(
    x: &Matrix,
    y: &[f64],
    alpha: f64,
    l1_ratio: f64,
    tol: f64,
    max_sweeps: usize,
) -> Result<(LinearModel, bool)> {
    if !(alpha >= 0.0) || !(0.0..=1.0).contains(&l1_ratio) {
        return Err(Error::InvalidParameter(format!(
            "elastic net needs alpha >= 0 and l1_ratio in [0, 1], got {alpha}, {l1_ratio}"
        )));
    }
    let c = center(x, y);
    let (n, f) = (c.x.nrows(), c.x.ncols());
    let nf = n as f64;
    let l1 = alpha * l1_ratio * nf;
    let l2 = alpha * (1.0 - l1_ratio) * nf;

    // column-major copy for fast column access
    let cols: Vec<Vec<f64>> = (0..f).map(|j| c.x.column(j).iter().copied().collect()).collect();
    let norms: Vec<f64> = cols.iter().map(|col| col.iter().map(|v| v * v).sum()).collect();
    let mut beta = vec![0.0; f];
    let mut resid: Vec<f64> = c.y.iter().copied().collect();
    let mut converged = false;

    for _ in 0..max_sweeps {
        let mut max_change: f64 = 0.0;
        for j in 0..f {
            if norms[j] == 0.0 {
                continue;
            }
            let old = beta[j];
            let col = &cols[j];
            let rho: f64 = col.iter().zip(&resid).map(|(a, r)| a * r).sum::<f64>() + norms[j] * old;
            let new = soft_threshold(rho, l1) / (norms[j] + l2);
            if new != old {
                let delta = new - old;
                for (r, a) in resid.iter_mut().zip(col) {
                    *r -= a * delta;
                }
                beta[j] = new;
                max_change = max_change.max(delta.abs());
            }
        }
        if max_change < tol {
            converged = true;
            break;
        }
    }
    Ok((with_intercept(DVector::from_vec(beta), &c), converged))
}
