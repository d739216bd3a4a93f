//! Bayesian ridge regression with evidence maximization of the noise
//! precision `α` and weight precision `λ` under Gamma hyperpriors.

use nalgebra::DVector;

use super::linear::{center, with_intercept, LinearModel};
use super::RegressorConfig;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub fn fit(x: &Matrix, y: &[f64], cfg: &RegressorConfig) -> Result<(LinearModel, bool)> {
    let c = center(x, y);
    let n = c.x.nrows() as f64;
    let gram = c.x.transpose() * &c.x;
    let xty = c.x.transpose() * &c.y;
    let eig = gram.symmetric_eigen();
    let evals: Vec<f64> = eig.eigenvalues.iter().map(|v| v.max(0.0)).collect();
    let vecs = eig.eigenvectors;
    let vt_xty = vecs.transpose() * &xty;

    // posterior mean (XᵀX + (λ/α) I)⁻¹ Xᵀy through the eigenbasis
    let posterior_mean = |alpha: f64, lambda: f64| -> DVector<f64> {
        let ratio = lambda / alpha;
        let scaled = DVector::from_iterator(
            evals.len(),
            vt_xty.iter().zip(&evals).map(|(v, e)| v / (e + ratio)),
        );
        &vecs * scaled
    };

    if let Some((alpha, lambda)) = cfg.bayes_fixed_precisions {
        if !(alpha > 0.0 && lambda >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "fixed precisions must be positive, got ({alpha}, {lambda})"
            )));
        }
        return Ok((with_intercept(posterior_mean(alpha, lambda), &c), true));
    }

    let var_y = c.y.iter().map(|v| v * v).sum::<f64>() / n;
    let mut alpha = 1.0 / (var_y + f64::EPSILON);
    let mut lambda = 1.0;
    let mut coef = DVector::zeros(c.x.ncols());
    let mut converged = false;
    for iter in 0..cfg.bayes_max_iter {
        let new_coef = posterior_mean(alpha, lambda);
        let resid = &c.y - &c.x * &new_coef;
        let sse = resid.norm_squared();
        let gamma: f64 = evals.iter().map(|e| alpha * e / (lambda + alpha * e)).sum();
        lambda = (gamma + 2.0 * cfg.bayes_lambda_1) / (new_coef.norm_squared() + 2.0 * cfg.bayes_lambda_2);
        alpha = (n - gamma + 2.0 * cfg.bayes_alpha_1) / (sse + 2.0 * cfg.bayes_alpha_2);
        let change: f64 = (&coef - &new_coef).iter().map(|v| v.abs()).sum();
        coef = new_coef;
        if iter > 0 && change < cfg.bayes_tol {
            converged = true;
            break;
        }
    }
    if !alpha.is_finite() || !lambda.is_finite() {
        return Err(Error::DegenerateFit("evidence updates diverged".into()));
    }
    Ok((with_intercept(posterior_mean(alpha, lambda), &c), converged))
}
