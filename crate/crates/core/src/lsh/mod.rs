//! Euclidean LSH with collision counting and virtual rehashing.
//!
//! Every projection stores the base-level bucket `⌊(a·x + b) / w⌋` of each
//! point. Coarser radius levels `1, c, c², …` are obtained by floor-dividing
//! those stored values, so the index never rehashes data while the search
//! radius grows.

mod hash;
mod params;
mod query;
mod table;

pub use hash::{bucket_at_level, HashFunction};
pub use params::{
    collision_probability, compute_collision_threshold, default_projection_count, LshParams,
    SearchSettings, SensitivityParams,
};
pub use query::{exact_knn, query_knn, query_knn_predicted, snap_radius, terminal_radii, Neighbor, QueryPlan, QueryResult};
pub use table::{build_index, collision_count, ProjectionTable, INDEX_MAGIC};
