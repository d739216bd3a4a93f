use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::seed;

/// Disjoint index / query partition of a dataset's rows.
#[derive(Debug, Clone, PartialEq)]
pub struct QuerySplit {
    pub index: Matrix,
    pub queries: Matrix,
    /// Original row of each index point, ascending.
    pub index_rows: Vec<usize>,
    /// Original row of each query, ascending.
    pub query_rows: Vec<usize>,
}

/// Holds out `q` seeded-uniform rows as queries.
pub fn split_queries(data: &Matrix, q: usize, seed: u64) -> Result<QuerySplit> {
    if q >= data.rows() {
        return Err(Error::InvalidParameter(format!(
            "cannot hold out {q} of {} rows",
            data.rows()
        )));
    }
    let mut order: Vec<usize> = (0..data.rows()).collect();
    order.shuffle(&mut seed::rng(seed));
    let mut query_rows = order[..q].to_vec();
    let mut index_rows = order[q..].to_vec();
    query_rows.sort_unstable();
    index_rows.sort_unstable();
    Ok(QuerySplit {
        index: data.select_rows(&index_rows),
        queries: data.select_rows(&query_rows),
        index_rows,
        query_rows,
    })
}
