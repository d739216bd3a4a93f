//! Approximate k-nearest-neighbor search with collision-counting Euclidean
//! LSH, a learned starting radius for virtual rehashing, and a harness that
//! benchmarks ten regression techniques as radius predictors.
//!
//! * [`lsh`]: index construction, collision counting, radius-level search.
//! * [`learn`]: ground-truth terminal radii, query features, training scenarios.
//! * [`regress`]: the ten regressors behind one fit/predict contract, plus k-fold CV.
//! * [`eval`]: MSE, both R² forms, prediction timing, report assembly.
//! * [`data`]: fvecs/bvecs readers and writers, synthetic dataset profiles.
//! * [`bench`]: the end-to-end experiment pipeline driven by `rolsh-bench`.

// `!(x > 0.0)` is how NaN gets rejected along with the rest
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod data;
pub mod error;
pub mod eval;
pub mod learn;
pub mod lsh;
pub mod matrix;
pub mod regress;
pub mod seed;

pub use error::{Error, Result};
pub use matrix::Matrix;
