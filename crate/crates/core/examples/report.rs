//! Assemble a results table from individual cells and round-trip it
//! through CSV.

use rolsh::eval::{build_report, parse_report_csv, write_report_csv, CellResult, MetricSet, FOLD_HELD_OUT};
use rolsh::regress::RegressorKind;

fn cell(kind: RegressorKind, fold: i32, mse: f64) -> CellResult {
    CellResult {
        dataset: "sift_like".into(),
        scenario: 1,
        kind,
        fold,
        metrics: MetricSet {
            mse,
            r2_paper: 1.0 - mse / 40.0,
            r2_standard: 1.0 - mse / 40.0,
            predict_time_ms: 0.5,
            train_time_ms: 12.0,
            n_eval: 100,
        },
        n_train: 900,
        n_test: 100,
        seed: 42,
        flags: String::new(),
    }
}

fn main() -> rolsh::Result<()> {
    let mut cells = Vec::new();
    for kind in [RegressorKind::Mlp, RegressorKind::Linear] {
        cells.push(cell(kind, FOLD_HELD_OUT, 9.0));
        for f in 0..3 {
            cells.push(cell(kind, f, 8.0 + f as f64));
        }
    }
    let rows = build_report(&cells, false)?;
    let mut csv = Vec::new();
    write_report_csv(&rows, &mut csv)?;
    let text = String::from_utf8(csv).expect("report is utf-8");
    print!("{text}");
    assert_eq!(parse_report_csv(&text)?, rows);
    Ok(())
}
