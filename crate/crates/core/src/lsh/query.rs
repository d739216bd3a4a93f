use super::params::SearchSettings;
use super::table::ProjectionTable;
use crate::error::{Error, Result};
use crate::matrix::{euclidean, Matrix};

/// One k-NN request against a [`ProjectionTable`].
#[derive(Debug, Clone, PartialEq)]
pub struct QueryPlan {
    pub query: Vec<f64>,
    pub k: usize,
    /// First radius level searched; a power of `c`.
    pub start_radius: u64,
    pub c: u32,
    /// Minimum collision count for a point to become a candidate.
    pub l: usize,
    /// Candidate count that ends the search at the current level.
    pub candidate_quota: usize,
}

impl QueryPlan {
    /// Plan starting at radius 1 with quota `k + settings.extra_candidates`.
    pub fn new(query: Vec<f64>, k: usize, settings: &SearchSettings) -> Self {
        Self {
            query,
            k,
            start_radius: 1,
            c: settings.c,
            l: settings.l,
            candidate_quota: k.saturating_add(settings.extra_candidates),
        }
    }

    pub fn validate(&self, table: &ProjectionTable) -> Result<()> {
        if self.query.len() != table.d() {
            return Err(Error::DimensionMismatch {
                expected: table.d(),
                got: self.query.len(),
            });
        }
        if self.query.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("query has non-finite coordinates".into()));
        }
        if self.k == 0 {
            return Err(Error::InvalidParameter("k must be at least 1".into()));
        }
        if self.l == 0 || self.l > table.m() {
            return Err(Error::InvalidParameter(format!("l = {} outside [1, {}]", self.l, table.m())));
        }
        if self.c < 2 {
            return Err(Error::InvalidParameter(format!("c = {} must be >= 2", self.c)));
        }
        if self.start_radius == 0 || !is_power_of(self.start_radius, self.c as u64) {
            return Err(Error::InvalidParameter(format!(
                "start radius {} is not a power of {}",
                self.start_radius, self.c
            )));
        }
        if self.candidate_quota == 0 {
            return Err(Error::InvalidParameter("candidate quota must be positive".into()));
        }
        Ok(())
    }
}

fn is_power_of(mut v: u64, base: u64) -> bool {
    while v.is_multiple_of(base) {
        v /= base;
    }
    v == 1
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub id: usize,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryResult {
    /// Nearest verified candidates, by nondecreasing distance then id.
    pub neighbors: Vec<Neighbor>,
    pub terminal_radius: u64,
    pub start_radius: u64,
    pub levels_visited: usize,
    /// Candidates verified by exact distance.
    pub candidates: usize,
    /// `k` exceeded the dataset size and was clamped.
    pub k_clamped: bool,
    /// The predicted radius was unusable and the search started at 1.
    pub prediction_fallback: bool,
}

/// Largest level `c^i` not above `max(predicted, 1)`. `None` for non-finite input.
pub fn snap_radius(predicted: f64, c: u32) -> Option<u64> {
    if !predicted.is_finite() {
        return None;
    }
    let target = predicted.max(1.0);
    let c = c as u64;
    let mut level = 1u64;
    while let Some(next) = level.checked_mul(c) {
        if next as f64 > target {
            break;
        }
        level = next;
    }
    Some(level)
}

/// k-NN search with collision counting, growing the radius by `c` per level
/// from `plan.start_radius`.
///
/// Terminates at the first level where `k` verified candidates lie within
/// `c · r`, or the candidate quota is met, or every point is a candidate.
pub fn query_knn(table: &ProjectionTable, plan: &QueryPlan, dataset: &Matrix) -> Result<QueryResult> {
    plan.validate(table)?;
    check_dataset(table, dataset)?;
    let n = table.n();
    let k = plan.k.min(n);
    let reach_factor = plan.c as f64;
    let (level, visited, mut verified) = expand(table, dataset, &plan.query, plan.start_radius, plan.c, plan.l, |level, verified| {
        let reach = reach_factor * level as f64;
        let within = verified.iter().filter(|nb| nb.distance <= reach).count();
        within >= k || verified.len() >= plan.candidate_quota || verified.len() == n
    })?;
    verified.sort_by(|a, b| a.distance.total_cmp(&b.distance).then(a.id.cmp(&b.id)));
    let candidates = verified.len();
    verified.truncate(k);
    Ok(QueryResult {
        neighbors: verified,
        terminal_radius: level,
        start_radius: plan.start_radius,
        levels_visited: visited,
        candidates,
        k_clamped: plan.k > n,
        prediction_fallback: false,
    })
}

/// Terminal radius from level 1 for each entry of `ks`, sharing one radius
/// expansion. Entry `i` equals `query_knn` with `k = ks[i]` and quota
/// `ks[i] + settings.extra_candidates`.
pub fn terminal_radii(
    table: &ProjectionTable,
    dataset: &Matrix,
    query: &[f64],
    ks: &[usize],
    settings: &SearchSettings,
) -> Result<Vec<u64>> {
    let plan = QueryPlan::new(query.to_vec(), ks.iter().copied().min().unwrap_or(1), settings);
    plan.validate(table)?;
    if ks.contains(&0) {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    check_dataset(table, dataset)?;
    let n = table.n();
    let mut out = vec![0u64; ks.len()];
    let mut open = ks.len();
    let reach_factor = settings.c as f64;
    expand(table, dataset, query, 1, settings.c, settings.l, |level, verified| {
        let reach = reach_factor * level as f64;
        let within = verified.iter().filter(|nb| nb.distance <= reach).count();
        for (slot, &k) in out.iter_mut().zip(ks) {
            if *slot == 0
                && (within >= k.min(n)
                    || verified.len() >= k.saturating_add(settings.extra_candidates)
                    || verified.len() == n)
            {
                *slot = level;
                open -= 1;
            }
        }
        open == 0
    })?;
    Ok(out)
}

fn check_dataset(table: &ProjectionTable, dataset: &Matrix) -> Result<()> {
    if dataset.rows() != table.n() || dataset.cols() != table.d() {
        return Err(Error::DimensionMismatch {
            expected: table.n(),
            got: dataset.rows(),
        });
    }
    Ok(())
}

/// Grows the radius level by level, verifying each point the moment its
/// collision count reaches `l`, until `stop` accepts a level. Returns the
/// final level, the number of levels visited and every verified point.
fn expand(
    table: &ProjectionTable,
    dataset: &Matrix,
    query: &[f64],
    start: u64,
    c: u32,
    l: usize,
    mut stop: impl FnMut(u64, &[Neighbor]) -> bool,
) -> Result<(u64, usize, Vec<Neighbor>)> {
    let n = table.n();
    let m = table.m();
    let c = c as u64;
    let qh = table.project(query)?;

    // At this level every projection has at most two buckets left; treat it
    // as covering the whole dataset.
    let (lo, hi) = table.hash_span();
    let span = qh
        .iter()
        .fold(lo.abs().max(hi.abs()), |acc, &h| acc.max(h.abs()));
    let mut coverage = 1u64;
    while coverage < 2 * span as u64 + 2 {
        coverage = coverage.saturating_mul(c);
    }

    let mut counts = vec![0u16; n];
    let mut ranges = vec![(0usize, 0usize); m];
    let mut verified: Vec<Neighbor> = Vec::new();
    let mut is_candidate = vec![false; n];
    let mut level = start.min(coverage);
    let mut visited = 0;
    let l = l as u16;

    loop {
        visited += 1;
        if level >= coverage {
            for (id, flag) in is_candidate.iter_mut().enumerate() {
                if !*flag {
                    *flag = true;
                    verified.push(Neighbor {
                        id,
                        distance: euclidean(dataset.row(id), query),
                    });
                }
            }
            stop(level, &verified);
            break;
        }
        let r = level as i64;
        for (j, &q) in qh.iter().enumerate() {
            let sorted = table.sorted_projection(j);
            let bucket_lo = q.div_euclid(r) * r;
            let bucket_hi = bucket_lo + r - 1;
            let new_lo = sorted.partition_point(|&(h, _)| (h as i64) < bucket_lo);
            let new_hi = sorted.partition_point(|&(h, _)| (h as i64) <= bucket_hi);
            let (old_lo, old_hi) = ranges[j];
            // buckets nest, so the previous range sits inside the new one
            let fresh = if old_lo == old_hi {
                [(new_lo, new_hi), (0, 0)]
            } else {
                [(new_lo, old_lo), (old_hi, new_hi)]
            };
            for idx in fresh.into_iter().flat_map(|(a, b)| a..b) {
                let id = sorted[idx].1 as usize;
                counts[id] += 1;
                if counts[id] == l {
                    is_candidate[id] = true;
                    verified.push(Neighbor {
                        id,
                        distance: euclidean(dataset.row(id), query),
                    });
                }
            }
            ranges[j] = (new_lo, new_hi);
        }
        if stop(level, &verified) {
            break;
        }
        level = level.saturating_mul(c);
    }
    Ok((level, visited, verified))
}

/// Exact k nearest neighbors by linear scan, ordered by (distance, id).
pub fn exact_knn(dataset: &Matrix, query: &[f64], k: usize) -> Result<Vec<Neighbor>> {
    if query.len() != dataset.cols() {
        return Err(Error::DimensionMismatch {
            expected: dataset.cols(),
            got: query.len(),
        });
    }
    let mut all: Vec<Neighbor> = dataset
        .iter_rows()
        .enumerate()
        .map(|(id, p)| Neighbor {
            id,
            distance: euclidean(p, query),
        })
        .collect();
    let cmp = |a: &Neighbor, b: &Neighbor| a.distance.total_cmp(&b.distance).then(a.id.cmp(&b.id));
    let k = k.min(all.len());
    if k == 0 {
        return Ok(Vec::new());
    }
    all.select_nth_unstable_by(k - 1, cmp);
    all.truncate(k);
    all.sort_by(cmp);
    Ok(all)
}

/// [`query_knn`] starting from the snapped predicted radius instead of
/// `plan.start_radius`. Growth continues upward from the snapped level if it
/// is too small; a non-finite prediction falls back to radius 1.
pub fn query_knn_predicted(
    table: &ProjectionTable,
    plan: &QueryPlan,
    dataset: &Matrix,
    predicted_radius: f64,
) -> Result<QueryResult> {
    let (start, fallback) = match snap_radius(predicted_radius, plan.c) {
        Some(r) => (r, false),
        None => (1, true),
    };
    let mut p = plan.clone();
    p.start_radius = start;
    let mut res = query_knn(table, &p, dataset)?;
    res.prediction_fallback = fallback;
    Ok(res)
}
