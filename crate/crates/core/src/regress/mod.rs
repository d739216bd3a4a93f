//! Ten regression techniques behind one fit/predict contract.
//!
//! Hyperparameter defaults follow the usual toolkit defaults so results are
//! reproducible without one. SVR and MLP standardize features (and, by
//! default, the target) internally; every other kind consumes raw values.

mod bayes;
mod boost;
mod cd;
mod cv;
mod linear;
pub mod mlp;
mod persist;
mod ransac;
mod scale;
mod svr;
mod tree;

use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use boost::Boosting;
pub use cv::{cross_validate, kfold_partition, FoldMetrics};
pub use linear::LinearModel;
pub use persist::MODEL_MAGIC;
pub use scale::Standardizer;
pub use svr::{Kernel, SvrModel};
pub use tree::Tree;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegressorKind {
    Linear,
    Ransac,
    Ridge,
    Lasso,
    DecisionTree,
    GradientBoosting,
    BayesianRidge,
    ElasticNet,
    Svr,
    Mlp,
}

impl RegressorKind {
    pub const ALL: [RegressorKind; 10] = [
        RegressorKind::Linear,
        RegressorKind::Ransac,
        RegressorKind::Ridge,
        RegressorKind::Lasso,
        RegressorKind::DecisionTree,
        RegressorKind::GradientBoosting,
        RegressorKind::BayesianRidge,
        RegressorKind::ElasticNet,
        RegressorKind::Svr,
        RegressorKind::Mlp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RegressorKind::Linear => "linear",
            RegressorKind::Ransac => "ransac",
            RegressorKind::Ridge => "ridge",
            RegressorKind::Lasso => "lasso",
            RegressorKind::DecisionTree => "decision_tree",
            RegressorKind::GradientBoosting => "gradient_boosting",
            RegressorKind::BayesianRidge => "bayesian_ridge",
            RegressorKind::ElasticNet => "elastic_net",
            RegressorKind::Svr => "svr",
            RegressorKind::Mlp => "mlp",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        let s = s.trim().to_ascii_lowercase().replace('-', "_");
        Self::ALL.into_iter().find(|k| k.name() == s)
    }

    pub(crate) fn tag(self) -> u8 {
        self as u8
    }

    pub(crate) fn from_tag(tag: u8) -> Option<Self> {
        Self::ALL.get(tag as usize).copied()
    }
}

impl std::fmt::Display for RegressorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Hyperparameters for every kind. Each kind reads only its own fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegressorConfig {
    pub ridge_alpha: f64,
    pub lasso_alpha: f64,
    pub elastic_net_alpha: f64,
    /// Share of the elastic-net penalty that is L1.
    pub l1_ratio: f64,
    /// Coordinate descent stops when no coefficient moves more than this.
    pub cd_tol: f64,
    pub cd_max_sweeps: usize,

    pub bayes_max_iter: usize,
    pub bayes_tol: f64,
    pub bayes_alpha_1: f64,
    pub bayes_alpha_2: f64,
    pub bayes_lambda_1: f64,
    pub bayes_lambda_2: f64,
    /// Fixed `(noise precision, weight precision)`; disables evidence updates.
    pub bayes_fixed_precisions: Option<(f64, f64)>,

    pub ransac_trials: usize,
    /// Defaults to `features + 1`.
    pub ransac_min_samples: Option<usize>,
    /// Defaults to the median absolute deviation of `y`.
    pub ransac_threshold: Option<f64>,

    pub tree_max_depth: Option<usize>,
    pub tree_min_samples_split: usize,

    pub gb_rounds: usize,
    pub gb_max_depth: usize,
    pub gb_learning_rate: f64,

    pub svr_kernel: Kernel,
    pub svr_c: f64,
    pub svr_epsilon: f64,
    /// Defaults to `1 / (features · var(X))` on standardized features.
    pub svr_gamma: Option<f64>,
    pub svr_tol: f64,
    /// Iteration cap, in multiples of the sample count.
    pub svr_max_passes: usize,
    pub svr_cache_mb: usize,

    pub mlp_hidden: usize,
    pub mlp_learning_rate: f64,
    pub mlp_beta1: f64,
    pub mlp_beta2: f64,
    pub mlp_epsilon: f64,
    pub mlp_l2: f64,
    pub mlp_batch: usize,
    pub mlp_max_epochs: usize,
    pub mlp_patience: usize,
    pub mlp_tol: f64,
    pub mlp_validation_fraction: f64,
    pub mlp_early_stopping: bool,

    /// SVR and MLP fit a z-scored target and map predictions back, so
    /// `svr_epsilon` and the MLP step size act in label standard deviations.
    pub standardize_target: bool,
}

impl Default for RegressorConfig {
    fn default() -> Self {
        Self {
            ridge_alpha: 1.0,
            lasso_alpha: 1.0,
            elastic_net_alpha: 1.0,
            l1_ratio: 0.5,
            cd_tol: 1e-4,
            cd_max_sweeps: 1000,
            bayes_max_iter: 300,
            bayes_tol: 1e-3,
            bayes_alpha_1: 1e-6,
            bayes_alpha_2: 1e-6,
            bayes_lambda_1: 1e-6,
            bayes_lambda_2: 1e-6,
            bayes_fixed_precisions: None,
            ransac_trials: 100,
            ransac_min_samples: None,
            ransac_threshold: None,
            tree_max_depth: None,
            tree_min_samples_split: 2,
            gb_rounds: 100,
            gb_max_depth: 3,
            gb_learning_rate: 0.1,
            svr_kernel: Kernel::Rbf,
            svr_c: 1.0,
            svr_epsilon: 0.1,
            svr_gamma: None,
            svr_tol: 1e-3,
            svr_max_passes: 1000,
            svr_cache_mb: 256,
            mlp_hidden: 100,
            mlp_learning_rate: 1e-3,
            mlp_beta1: 0.9,
            mlp_beta2: 0.999,
            mlp_epsilon: 1e-8,
            mlp_l2: 1e-4,
            mlp_batch: 200,
            mlp_max_epochs: 200,
            mlp_patience: 10,
            mlp_tol: 1e-4,
            mlp_validation_fraction: 0.1,
            mlp_early_stopping: true,
            standardize_target: true,
        }
    }
}

/// Kind-specific fitted state.
#[derive(Debug, Clone, PartialEq)]
pub enum FittedParams {
    Linear(LinearModel),
    Tree(Tree),
    Boosting(Boosting),
    Svr(SvrModel),
    Mlp(mlp::MlpModel),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressorModel {
    pub kind: RegressorKind,
    pub config: RegressorConfig,
    pub params: FittedParams,
    pub n_features: usize,
    pub train_time_ms: f64,
    /// False when an iterative solver stopped at its iteration cap.
    pub converged: bool,
    /// Predictions are `target_shift + target_scale · raw`; identity unless
    /// the target was standardized.
    pub target_shift: f64,
    pub target_scale: f64,
}

fn validate_training(x: &Matrix, y: &[f64]) -> Result<()> {
    if x.rows() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.rows(),
            got: y.len(),
        });
    }
    if x.rows() < 2 {
        return Err(Error::TooFewSamples {
            samples: x.rows(),
            folds: 1,
        });
    }
    if x.cols() == 0 {
        return Err(Error::InvalidParameter("no features".into()));
    }
    if let Some((row, col)) = x.find_non_finite() {
        return Err(Error::InvalidData { row, col });
    }
    if let Some(row) = y.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidData { row, col: x.cols() });
    }
    Ok(())
}

/// Fits `kind` on `(x, y)`. `seed` drives every random choice.
pub fn fit(kind: RegressorKind, config: &RegressorConfig, x: &Matrix, y: &[f64], seed: u64) -> Result<RegressorModel> {
    validate_training(x, y)?;
    let start = Instant::now();
    let (target_shift, target_scale) =
        if config.standardize_target && matches!(kind, RegressorKind::Svr | RegressorKind::Mlp) {
            let mean = y.iter().sum::<f64>() / y.len() as f64;
            let sd = (y.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / y.len() as f64).sqrt();
            if !(sd > 0.0) {
                return Err(Error::DegenerateFit(format!("{kind} target has zero variance")));
            }
            (mean, sd)
        } else {
            (0.0, 1.0)
        };
    let scaled: Vec<f64>;
    let y = if target_scale != 1.0 || target_shift != 0.0 {
        scaled = y.iter().map(|v| (v - target_shift) / target_scale).collect();
        &scaled[..]
    } else {
        y
    };
    let (params, converged) = match kind {
        RegressorKind::Linear => (FittedParams::Linear(linear::fit_ols(x, y)?), true),
        RegressorKind::Ridge => (FittedParams::Linear(linear::fit_ridge(x, y, config.ridge_alpha)?), true),
        RegressorKind::Lasso => {
            let (m, ok) = cd::fit_elastic_net(x, y, config.lasso_alpha, 1.0, config.cd_tol, config.cd_max_sweeps)?;
            (FittedParams::Linear(m), ok)
        }
        RegressorKind::ElasticNet => {
            let (m, ok) = cd::fit_elastic_net(
                x,
                y,
                config.elastic_net_alpha,
                config.l1_ratio,
                config.cd_tol,
                config.cd_max_sweeps,
            )?;
            (FittedParams::Linear(m), ok)
        }
        RegressorKind::BayesianRidge => {
            let (m, ok) = bayes::fit(x, y, config)?;
            (FittedParams::Linear(m), ok)
        }
        RegressorKind::Ransac => (FittedParams::Linear(ransac::fit(x, y, config, seed)?), true),
        RegressorKind::DecisionTree => (
            FittedParams::Tree(Tree::fit(
                x,
                y,
                config.tree_max_depth,
                config.tree_min_samples_split,
            )?),
            true,
        ),
        RegressorKind::GradientBoosting => (FittedParams::Boosting(Boosting::fit(x, y, config)?), true),
        RegressorKind::Svr => {
            let (m, ok) = SvrModel::fit(x, y, config)?;
            (FittedParams::Svr(m), ok)
        }
        RegressorKind::Mlp => {
            let (m, ok) = mlp::MlpModel::fit(x, y, config, seed)?;
            (FittedParams::Mlp(m), ok)
        }
    };
    Ok(RegressorModel {
        kind,
        config: config.clone(),
        params,
        n_features: x.cols(),
        train_time_ms: start.elapsed().as_secs_f64() * 1e3,
        converged,
        target_shift,
        target_scale,
    })
}

impl RegressorModel {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.unscale(self.raw_row(row))
    }

    #[inline]
    fn unscale(&self, v: f64) -> f64 {
        if self.target_scale != 1.0 || self.target_shift != 0.0 {
            self.target_shift + self.target_scale * v
        } else {
            v
        }
    }

    fn raw_row(&self, row: &[f64]) -> f64 {
        match &self.params {
            FittedParams::Linear(m) => m.predict_row(row),
            FittedParams::Tree(t) => t.predict_row(row),
            FittedParams::Boosting(b) => b.predict_row(row),
            FittedParams::Svr(s) => s.predict_row(row),
            FittedParams::Mlp(m) => m.predict_row(row),
        }
    }

    /// Predictions for every row of `x`.
    pub fn predict(&self, x: &Matrix) -> Result<Vec<f64>> {
        if x.cols() != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                got: x.cols(),
            });
        }
        let raw = match &self.params {
            FittedParams::Svr(s) => s.predict(x),
            FittedParams::Mlp(m) => m.predict(x),
            _ => x.iter_rows().map(|r| self.raw_row(r)).collect(),
        };
        Ok(raw.into_iter().map(|v| self.unscale(v)).collect())
    }

    /// Support vectors kept by an SVR model; zero for other kinds.
    pub fn support_vectors(&self) -> usize {
        match &self.params {
            FittedParams::Svr(s) => s.support_count(),
            _ => 0,
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        persist::encode(self)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        persist::decode(bytes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kind_names_round_trip() {
        for k in RegressorKind::ALL {
            assert_eq!(RegressorKind::parse(k.name()), Some(k));
            assert_eq!(RegressorKind::from_tag(k.tag()), Some(k));
        }
        assert_eq!(RegressorKind::parse("Gradient-Boosting"), Some(RegressorKind::GradientBoosting));
        assert_eq!(RegressorKind::parse("knn"), None);
    }

    #[test]
    fn rejects_bad_training_input() {
        let c = RegressorConfig::default();
        let x = Matrix::from_rows(&[[1.0], [2.0]]).unwrap();
        assert!(matches!(
            fit(RegressorKind::Linear, &c, &x, &[1.0], 0),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(fit(RegressorKind::Linear, &c, &x, &[1.0, f64::NAN], 0).is_err());
        let one = Matrix::from_rows(&[[1.0]]).unwrap();
        assert!(fit(RegressorKind::Linear, &c, &one, &[1.0], 0).is_err());
    }

    #[test]
    fn predict_checks_feature_count() {
        let x = Matrix::from_rows(&[[1.0], [2.0], [3.0]]).unwrap();
        let m = fit(RegressorKind::Linear, &RegressorConfig::default(), &x, &[1.0, 2.0, 3.0], 0).unwrap();
        let bad = Matrix::from_rows(&[[1.0, 2.0]]).unwrap();
        assert!(matches!(m.predict(&bad), Err(Error::DimensionMismatch { expected: 1, got: 2 })));
    }

    fn noisy_problem() -> (Matrix, Vec<f64>) {
        use rand::Rng as _;
        let mut rng = crate::seed::rng(21);
        let x = Matrix::from_vec(150, 3, (0..450).map(|_| rng.random_range(-3.0..3.0)).collect()).unwrap();
        let y = x
            .iter_rows()
            .map(|r| r[0] * r[0] - 2.0 * r[1] + r[2].sin() + rng.random_range(-0.3..0.3))
            .collect();
        (x, y)
    }

    #[test]
    fn shifting_labels_shifts_predictions() {
        let (x, y) = noisy_problem();
        let shifted: Vec<f64> = y.iter().map(|v| v + 37.5).collect();
        let c = RegressorConfig::default();
        for kind in [
            RegressorKind::Linear,
            RegressorKind::Ridge,
            RegressorKind::Lasso,
            RegressorKind::ElasticNet,
            RegressorKind::BayesianRidge,
            RegressorKind::DecisionTree,
            RegressorKind::GradientBoosting,
        ] {
            let a = fit(kind, &c, &x, &y, 3).unwrap().predict(&x).unwrap();
            let b = fit(kind, &c, &x, &shifted, 3).unwrap().predict(&x).unwrap();
            for (p, q) in a.iter().zip(&b) {
                assert!((q - p - 37.5).abs() <= 1e-6, "{kind}: {p} vs {q}");
            }
        }
    }

    #[test]
    fn batch_prediction_equals_row_prediction() {
        let (x, y) = noisy_problem();
        let c = RegressorConfig {
            mlp_max_epochs: 10,
            ..Default::default()
        };
        for kind in RegressorKind::ALL {
            let m = fit(kind, &c, &x, &y, 1).unwrap();
            let batch = m.predict(&x).unwrap();
            assert!(batch.iter().all(|v| v.is_finite()));
            for (i, b) in batch.iter().enumerate() {
                assert_eq!(b.to_bits(), m.predict_row(x.row(i)).to_bits(), "{kind} row {i}");
            }
        }
    }

    #[test]
    fn linear_arithmetic() {
        let x = Matrix::from_rows(&(0..10).map(|i| [i as f64]).collect::<Vec<_>>()).unwrap();
        let y: Vec<f64> = (0..10).map(|i| 2.0 * i as f64 + 1.0).collect();
        let m = fit(RegressorKind::Linear, &RegressorConfig::default(), &x, &y, 0).unwrap();
        let p = m.predict(&Matrix::from_rows(&[[3.0]]).unwrap()).unwrap();
        assert!((p[0] - 7.0).abs() < 1e-9);
    }

    #[test]
    fn standardized_target_makes_svr_and_mlp_affine_equivariant() {
        let (x, y) = noisy_problem();
        let big: Vec<f64> = y.iter().map(|v| 1000.0 * v + 5.0).collect();
        let c = RegressorConfig {
            mlp_max_epochs: 30,
            ..Default::default()
        };
        for kind in [RegressorKind::Svr, RegressorKind::Mlp] {
            let a = fit(kind, &c, &x, &y, 2).unwrap().predict(&x).unwrap();
            let b = fit(kind, &c, &x, &big, 2).unwrap().predict(&x).unwrap();
            for (p, q) in a.iter().zip(&b) {
                assert!((1000.0 * p + 5.0 - q).abs() <= 1e-6 * q.abs().max(1.0), "{kind}: {p} vs {q}");
            }
        }
        let raw = RegressorConfig {
            standardize_target: false,
            ..c
        };
        let m = fit(RegressorKind::Svr, &raw, &x, &y, 0).unwrap();
        assert_eq!((m.target_shift, m.target_scale), (0.0, 1.0));
    }
}
