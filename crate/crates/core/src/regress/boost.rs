//! Gradient boosting with squared loss: each round fits a shallow tree to
//! the current residuals and adds it with shrinkage.

use super::tree::{Presorted, Tree};
use super::RegressorConfig;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq)]
pub struct Boosting {
    pub init: f64,
    pub learning_rate: f64,
    pub trees: Vec<Tree>,
}

impl Boosting {
    pub fn fit(x: &Matrix, y: &[f64], cfg: &RegressorConfig) -> Result<Self> {
        Ok(Self::fit_with_trace(x, y, cfg)?.0)
    }

    /// Also returns the training MSE after each round.
    pub fn fit_with_trace(x: &Matrix, y: &[f64], cfg: &RegressorConfig) -> Result<(Self, Vec<f64>)> {
        if !(cfg.gb_learning_rate > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "learning rate {} must be positive",
                cfg.gb_learning_rate
            )));
        }
        let n = y.len();
        let init = y.iter().sum::<f64>() / n as f64;
        let data = Presorted::new(x);
        let mut fitted = vec![init; n];
        let mut residual: Vec<f64> = y.iter().map(|v| v - init).collect();
        let mut trees = Vec::with_capacity(cfg.gb_rounds);
        let mut trace = Vec::with_capacity(cfg.gb_rounds);
        for _ in 0..cfg.gb_rounds {
            let tree = Tree::fit_presorted(&data, &residual, Some(cfg.gb_max_depth), 2);
            for i in 0..n {
                fitted[i] += cfg.gb_learning_rate * tree.predict_row(x.row(i));
                residual[i] = y[i] - fitted[i];
            }
            trace.push(residual.iter().map(|r| r * r).sum::<f64>() / n as f64);
            trees.push(tree);
        }
        Ok((
            Self {
                init,
                learning_rate: cfg.gb_learning_rate,
                trees,
            },
            trace,
        ))
    }

    #[inline]
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.init + self.learning_rate * self.trees.iter().map(|t| t.predict_row(row)).sum::<f64>()
    }
}
