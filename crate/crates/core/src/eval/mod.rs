//! Accuracy metrics, prediction timing, and the comparison report.

mod metrics;
mod report;
mod timing;

pub use metrics::{mse, r_squared_paper, r_squared_standard, MetricSet};
pub use report::{
    build_report, parse_report_csv, write_report_csv, CellResult, ReportRow, FOLD_CV_MEAN,
    FOLD_CV_STD, FOLD_HELD_OUT, REPORT_HEADER,
};
pub use timing::{active_workers, time_predictions, WorkerGuard};

/// Formats a float with 17 significant digits; `NaN` for missing values.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else {
        format!("{v:.16e}")
    }
}
