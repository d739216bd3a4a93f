//! Ground-truth terminal radii, per-query features, and the five training
//! scenarios.

mod samples;
mod scenario;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use samples::{parse_samples_csv, write_samples_csv};
pub use scenario::{build_scenario, scenario_indices, ScenarioSpec, ALLOWED_K, ALLOWED_TOTALS};

use crate::error::{Error, Result};
use crate::lsh::{terminal_radii, ProjectionTable, SearchSettings};
use crate::matrix::Matrix;

/// What a query looks like to the radius predictor.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureMode {
    /// Base-level hash values divided by `m`, then `k`.
    #[default]
    Hashes,
    /// Raw query coordinates, then `k`.
    Coordinates,
}

/// One (query, k) observation: features and the terminal radius reached
/// when searching from radius 1.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSample {
    pub features: Vec<f64>,
    pub k: usize,
    pub label: f64,
}

/// Hash-mode features: the query's `m` base-level hashes divided by `m`,
/// followed by `k`.
pub fn extract_features(table: &ProjectionTable, query: &[f64], k: usize) -> Result<Vec<f64>> {
    extract_features_with(FeatureMode::Hashes, table, query, k)
}

pub fn extract_features_with(mode: FeatureMode, table: &ProjectionTable, query: &[f64], k: usize) -> Result<Vec<f64>> {
    if query.len() != table.d() {
        return Err(Error::DimensionMismatch {
            expected: table.d(),
            got: query.len(),
        });
    }
    let mut f = match mode {
        FeatureMode::Hashes => {
            let m = table.m() as f64;
            table.project(query)?.into_iter().map(|h| h as f64 / m).collect::<Vec<_>>()
        }
        FeatureMode::Coordinates => query.to_vec(),
    };
    f.push(k as f64);
    Ok(f)
}

/// Runs every query to termination from radius 1 for each `k` in `k_values`
/// and records the terminal radius as the label. Samples are ordered by
/// query, then by `k` as given.
///
/// Queries run in parallel. A query that fails is logged and skipped; the
/// whole batch fails if more than 1% of queries do.
pub fn generate_ground_truth(
    table: &ProjectionTable,
    dataset: &Matrix,
    queries: &Matrix,
    k_values: &[usize],
    settings: &SearchSettings,
    mode: FeatureMode,
) -> Result<Vec<TrainingSample>> {
    if k_values.is_empty() {
        return Err(Error::InvalidParameter("no k values".into()));
    }
    if queries.cols() != table.d() {
        return Err(Error::DimensionMismatch {
            expected: table.d(),
            got: queries.cols(),
        });
    }
    let per_query: Vec<Result<Vec<TrainingSample>>> = (0..queries.rows())
        .into_par_iter()
        .map(|i| {
            let q = queries.row(i);
            let radii = terminal_radii(table, dataset, q, k_values, settings)?;
            let base = extract_features_with(mode, table, q, 0)?;
            Ok(k_values
                .iter()
                .zip(radii)
                .map(|(&k, r)| {
                    let mut features = base.clone();
                    *features.last_mut().unwrap() = k as f64;
                    TrainingSample {
                        features,
                        k,
                        label: r as f64,
                    }
                })
                .collect())
        })
        .collect();
    let total = per_query.len();
    let mut failed = 0;
    let mut out = Vec::with_capacity(total * k_values.len());
    for (i, r) in per_query.into_iter().enumerate() {
        match r {
            Ok(s) => out.extend(s),
            Err(e) => {
                log::warn!("ground truth: query {i} skipped: {e}");
                failed += 1;
            }
        }
    }
    if failed * 100 > total {
        return Err(Error::TooManyFailures { failed, total });
    }
    Ok(out)
}

/// Splits samples into a feature matrix and label vector, optionally
/// taking `log2` of the labels.
pub fn to_design(samples: &[TrainingSample], log_labels: bool) -> Result<(Matrix, Vec<f64>)> {
    let first = samples.first().ok_or(Error::EmptyInput)?;
    let f = first.features.len();
    let mut data = Vec::with_capacity(samples.len() * f);
    for s in samples {
        if s.features.len() != f {
            return Err(Error::DimensionMismatch {
                expected: f,
                got: s.features.len(),
            });
        }
        data.extend_from_slice(&s.features);
    }
    let y = samples
        .iter()
        .map(|s| if log_labels { s.label.log2() } else { s.label })
        .collect();
    Ok((Matrix::from_vec(samples.len(), f, data)?, y))
}
