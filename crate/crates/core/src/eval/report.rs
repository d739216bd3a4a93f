use std::collections::{BTreeMap, HashSet};
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::fmt_f64;
use super::metrics::MetricSet;
use crate::error::{Error, Result};
use crate::regress::RegressorKind;

pub const REPORT_HEADER: &str =
    "dataset,scenario,kind,fold,mse,r2_paper,r2_standard,train_ms,predict_ms,n_train,n_test,seed,flags";

/// Fold code of a held-out test evaluation.
pub const FOLD_HELD_OUT: i32 = -1;
/// Fold code of the mean over cross-validation folds.
pub const FOLD_CV_MEAN: i32 = -2;
/// Fold code of the sample standard deviation over cross-validation folds.
pub const FOLD_CV_STD: i32 = -3;

/// One measured (dataset, scenario, kind, fold) cell. Folds `0..` are
/// cross-validation folds; [`FOLD_HELD_OUT`] is the held-out test set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub dataset: String,
    pub scenario: u8,
    pub kind: RegressorKind,
    pub fold: i32,
    pub metrics: MetricSet,
    pub n_train: usize,
    pub n_test: usize,
    pub seed: u64,
    /// `;`-separated markers such as `standardized` or `not_converged`.
    pub flags: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub dataset: String,
    pub scenario: u8,
    pub kind: RegressorKind,
    pub fold: i32,
    pub mse: f64,
    pub r2_paper: f64,
    pub r2_standard: f64,
    /// Absent unless timings were requested, since wall-clock values would
    /// break byte-identical reruns.
    pub train_ms: Option<f64>,
    pub predict_ms: Option<f64>,
    pub n_train: usize,
    pub n_test: usize,
    pub seed: u64,
    pub flags: String,
}

fn fold_rank(fold: i32) -> i64 {
    match fold {
        FOLD_HELD_OUT => -1,
        FOLD_CV_MEAN => i64::MAX - 1,
        FOLD_CV_STD => i64::MAX,
        f => f as i64,
    }
}

fn mean_std(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let v: Vec<f64> = values.filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (v.len() - 1) as f64;
    (mean, var.sqrt())
}

/// Sorts cells by (dataset, scenario, kind, fold), appends cross-validation
/// mean and standard-deviation rows to every group that has folds, and
/// rejects duplicate cells.
pub fn build_report(cells: &[CellResult], include_timings: bool) -> Result<Vec<ReportRow>> {
    if cells.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut seen = HashSet::new();
    let mut groups: BTreeMap<(&str, u8, RegressorKind), Vec<&CellResult>> = BTreeMap::new();
    for c in cells {
        if c.fold < FOLD_HELD_OUT || !seen.insert((&c.dataset, c.scenario, c.kind, c.fold)) {
            return Err(Error::DuplicateCell {
                dataset: c.dataset.clone(),
                scenario: c.scenario,
                kind: c.kind.to_string(),
                fold: c.fold,
            });
        }
        groups.entry((&c.dataset, c.scenario, c.kind)).or_default().push(c);
    }
    let timing = |v: f64| include_timings.then_some(v);
    let mut rows = Vec::with_capacity(cells.len() + 2 * groups.len());
    for ((dataset, scenario, kind), mut group) in groups {
        group.sort_by_key(|c| fold_rank(c.fold));
        for c in &group {
            rows.push(ReportRow {
                dataset: dataset.to_string(),
                scenario,
                kind,
                fold: c.fold,
                mse: c.metrics.mse,
                r2_paper: c.metrics.r2_paper,
                r2_standard: c.metrics.r2_standard,
                train_ms: timing(c.metrics.train_time_ms),
                predict_ms: if c.fold == FOLD_HELD_OUT {
                    timing(c.metrics.predict_time_ms)
                } else {
                    None
                },
                n_train: c.n_train,
                n_test: c.n_test,
                seed: c.seed,
                flags: c.flags.clone(),
            });
        }
        let folds: Vec<&&CellResult> = group.iter().filter(|c| c.fold >= 0).collect();
        if folds.is_empty() {
            continue;
        }
        let stat = |f: fn(&MetricSet) -> f64| mean_std(folds.iter().map(|c| f(&c.metrics)));
        let (mse, r2p, r2s, train) = (
            stat(|m| m.mse),
            stat(|m| m.r2_paper),
            stat(|m| m.r2_standard),
            stat(|m| m.train_time_ms),
        );
        let n_train = folds.iter().map(|c| c.n_train).sum::<usize>() / folds.len();
        let n_test = folds.iter().map(|c| c.n_test).sum::<usize>();
        let mut flags: Vec<&str> = folds
            .iter()
            .flat_map(|c| c.flags.split(';'))
            .filter(|f| !f.is_empty())
            .collect();
        flags.sort_unstable();
        flags.dedup();
        let flags = flags.join(";");
        for (fold, pick) in [(FOLD_CV_MEAN, 0usize), (FOLD_CV_STD, 1)] {
            let get = |p: (f64, f64)| if pick == 0 { p.0 } else { p.1 };
            rows.push(ReportRow {
                dataset: dataset.to_string(),
                scenario,
                kind,
                fold,
                mse: get(mse),
                r2_paper: get(r2p),
                r2_standard: get(r2s),
                train_ms: timing(get(train)),
                predict_ms: None,
                n_train,
                n_test,
                seed: folds[0].seed,
                flags: flags.clone(),
            });
        }
    }
    Ok(rows)
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

pub fn write_report_csv<W: Write>(rows: &[ReportRow], mut out: W) -> Result<()> {
    writeln!(out, "{REPORT_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.dataset,
            r.scenario,
            r.kind,
            r.fold,
            fmt_f64(r.mse),
            fmt_f64(r.r2_paper),
            fmt_f64(r.r2_standard),
            opt(r.train_ms),
            opt(r.predict_ms),
            r.n_train,
            r.n_test,
            r.seed,
            r.flags
        )?;
    }
    Ok(())
}

pub fn parse_report_csv(text: &str) -> Result<Vec<ReportRow>> {
    let mut lines = text.lines();
    if lines.next() != Some(REPORT_HEADER) {
        return Err(Error::Parse("report header missing or different".into()));
    }
    lines
        .enumerate()
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, line)| {
            let bad = |what: &str| Error::Parse(format!("report line {}: bad {what}", i + 2));
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 13 {
                return Err(bad("column count"));
            }
            let real = |s: &str, what: &str| s.parse::<f64>().map_err(|_| bad(what));
            let opt_real = |s: &str, what: &str| {
                if s.is_empty() {
                    Ok(None)
                } else {
                    real(s, what).map(Some)
                }
            };
            Ok(ReportRow {
                dataset: f[0].to_string(),
                scenario: f[1].parse().map_err(|_| bad("scenario"))?,
                kind: RegressorKind::parse(f[2]).ok_or_else(|| bad("kind"))?,
                fold: f[3].parse().map_err(|_| bad("fold"))?,
                mse: real(f[4], "mse")?,
                r2_paper: real(f[5], "r2_paper")?,
                r2_standard: real(f[6], "r2_standard")?,
                train_ms: opt_real(f[7], "train_ms")?,
                predict_ms: opt_real(f[8], "predict_ms")?,
                n_train: f[9].parse().map_err(|_| bad("n_train"))?,
                n_test: f[10].parse().map_err(|_| bad("n_test"))?,
                seed: f[11].parse().map_err(|_| bad("seed"))?,
                flags: f[12].to_string(),
            })
        })
        .collect()
}
