//! Vector dataset formats, synthetic stand-ins for the benchmark corpora,
//! and query hold-out splitting.

mod split;
mod synth;
mod vecs;

pub use split::{split_queries, QuerySplit};
pub use synth::{synth_dataset, synth_dataset_labeled, Profile, DEFAULT_CLUSTERS};
pub use vecs::{
    parse_bvecs, parse_fvecs, read_bvecs, read_fvecs, write_bvecs, write_fvecs, Format,
};

use serde::{Deserialize, Serialize};

use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataSource {
    File,
    Synthetic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub name: String,
    pub n: usize,
    pub d: usize,
    pub source: DataSource,
    /// Observed `(min, max)` over every component.
    pub value_range: (f64, f64),
}

impl DatasetMeta {
    pub fn describe(name: impl Into<String>, source: DataSource, data: &Matrix) -> Self {
        let (lo, hi) = data
            .as_slice()
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        Self {
            name: name.into(),
            n: data.rows(),
            d: data.cols(),
            source,
            value_range: (lo, hi),
        }
    }
}
