use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::eval::fmt_f64;
use crate::lsh::{exact_knn, query_knn, query_knn_predicted, ProjectionTable, QueryPlan, QueryResult, SearchSettings};
use crate::matrix::Matrix;

/// Outcome of one search path for one query.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SearchSummary {
    pub levels_visited: usize,
    pub terminal_radius: u64,
    /// Share of the true k nearest neighbors returned.
    pub recall: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DemoRow {
    pub query: usize,
    pub predicted_radius: f64,
    pub from_one: SearchSummary,
    pub predicted: SearchSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DemoReport {
    pub k: usize,
    pub rows: Vec<DemoRow>,
    pub mean_levels_from_one: f64,
    pub mean_levels_predicted: f64,
    pub mean_recall_from_one: f64,
    pub mean_recall_predicted: f64,
}

/// Returned neighbors no farther than the true k-th neighbor, over `k`.
/// Counting by distance keeps exact ties from costing recall.
fn recall(result: &QueryResult, truth_kth: f64, k: usize) -> f64 {
    let hit = result.neighbors.iter().filter(|nb| nb.distance <= truth_kth).count();
    hit.min(k) as f64 / k as f64
}

/// Runs every query twice, once growing the radius from 1 and once starting
/// at `predict(query)`, and scores both against a linear scan.
pub fn compare_searches(
    table: &ProjectionTable,
    dataset: &Matrix,
    queries: &Matrix,
    k: usize,
    settings: &SearchSettings,
    mut predict: impl FnMut(&[f64]) -> Result<f64>,
) -> Result<DemoReport> {
    if queries.rows() == 0 {
        return Err(Error::EmptyInput);
    }
    let kk = k.min(dataset.rows());
    let mut rows = Vec::with_capacity(queries.rows());
    for (i, q) in queries.iter_rows().enumerate() {
        let truth = exact_knn(dataset, q, kk)?;
        let kth = truth.last().map_or(0.0, |nb| nb.distance);
        let plan = QueryPlan::new(q.to_vec(), k, settings);
        let a = query_knn(table, &plan, dataset)?;
        let guess = predict(q)?;
        let b = query_knn_predicted(table, &plan, dataset, guess)?;
        let summary = |r: &QueryResult| SearchSummary {
            levels_visited: r.levels_visited,
            terminal_radius: r.terminal_radius,
            recall: recall(r, kth, kk),
        };
        rows.push(DemoRow {
            query: i,
            predicted_radius: guess,
            from_one: summary(&a),
            predicted: summary(&b),
        });
    }
    let n = rows.len() as f64;
    let mean = |f: &dyn Fn(&DemoRow) -> f64| rows.iter().map(f).sum::<f64>() / n;
    Ok(DemoReport {
        k,
        mean_levels_from_one: mean(&|r| r.from_one.levels_visited as f64),
        mean_levels_predicted: mean(&|r| r.predicted.levels_visited as f64),
        mean_recall_from_one: mean(&|r| r.from_one.recall),
        mean_recall_predicted: mean(&|r| r.predicted.recall),
        rows,
    })
}

impl DemoReport {
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(
            out,
            "query,predicted_radius,levels_from_one,radius_from_one,recall_from_one,levels_predicted,radius_predicted,recall_predicted"
        )?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.query,
                fmt_f64(r.predicted_radius),
                r.from_one.levels_visited,
                r.from_one.terminal_radius,
                fmt_f64(r.from_one.recall),
                r.predicted.levels_visited,
                r.predicted.terminal_radius,
                fmt_f64(r.predicted.recall)
            )?;
        }
        Ok(())
    }

    /// Human-readable table with a summary line.
    pub fn render(&self) -> String {
        let mut s = format!(
            "{:>6} {:>10} | {:>6} {:>7} {:>6} | {:>6} {:>7} {:>6}\n",
            "query", "predicted", "levels", "radius", "recall", "levels", "radius", "recall"
        );
        for r in &self.rows {
            s += &format!(
                "{:>6} {:>10.1} | {:>6} {:>7} {:>6.2} | {:>6} {:>7} {:>6.2}\n",
                r.query,
                r.predicted_radius,
                r.from_one.levels_visited,
                r.from_one.terminal_radius,
                r.from_one.recall,
                r.predicted.levels_visited,
                r.predicted.terminal_radius,
                r.predicted.recall
            );
        }
        s += &format!(
            "mean levels: from 1 = {:.3}, predicted = {:.3}; mean recall@{}: from 1 = {:.4}, predicted = {:.4}\n",
            self.mean_levels_from_one, self.mean_levels_predicted, self.k, self.mean_recall_from_one, self.mean_recall_predicted
        );
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{synth_dataset, Profile};
    use crate::lsh::{build_index, LshParams};

    fn setup() -> (Matrix, Matrix, ProjectionTable, SearchSettings) {
        let data = synth_dataset(Profile::SiftLike, 3000, 16, 5);
        let queries = synth_dataset(Profile::SiftLike, 40, 16, 6);
        let p = LshParams::default();
        let m = p.projection_count().unwrap();
        let t = build_index(&data, m, p.w, 7).unwrap();
        let s = p.search_settings(3000, m).unwrap();
        (data, queries, t, s)
    }

    #[test]
    fn constant_one_predictor_changes_nothing() {
        let (data, queries, t, s) = setup();
        let r = compare_searches(&t, &data, &queries, 10, &s, |_| Ok(1.0)).unwrap();
        for row in &r.rows {
            assert_eq!(row.from_one, row.predicted);
        }
        assert_eq!(r.mean_levels_from_one, r.mean_levels_predicted);
    }

    #[test]
    fn oracle_predictor_needs_one_level() {
        let (data, queries, t, s) = setup();
        let truth: Vec<f64> = queries
            .iter_rows()
            .map(|q| query_knn(&t, &QueryPlan::new(q.to_vec(), 10, &s), &data).unwrap().terminal_radius as f64)
            .collect();
        let mut next = truth.iter();
        let r = compare_searches(&t, &data, &queries, 10, &s, |_| Ok(*next.next().unwrap())).unwrap();
        assert_eq!(r.mean_levels_predicted, 1.0);
        assert_eq!(r.mean_recall_predicted, r.mean_recall_from_one);
        let mut csv = Vec::new();
        r.write_csv(&mut csv).unwrap();
        assert_eq!(csv.iter().filter(|&&b| b == b'\n').count(), 41);
        assert!(r.render().contains("mean levels"));
    }
}
