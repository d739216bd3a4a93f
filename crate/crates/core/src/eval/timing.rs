use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::regress::RegressorModel;

static ACTIVE: AtomicUsize = AtomicUsize::new(0);

/// Marks one unit of compute-heavy work as running for as long as it lives.
/// Parallel stages hold one per job so prediction timing can refuse to run
/// alongside them.
#[derive(Debug)]
pub struct WorkerGuard(());

impl WorkerGuard {
    pub fn enter() -> Self {
        ACTIVE.fetch_add(1, Ordering::SeqCst);
        WorkerGuard(())
    }
}

impl Drop for WorkerGuard {
    fn drop(&mut self) {
        ACTIVE.fetch_sub(1, Ordering::SeqCst);
    }
}

/// Workers currently registered through [`WorkerGuard`].
pub fn active_workers() -> usize {
    ACTIVE.load(Ordering::SeqCst)
}

/// Median wall-clock milliseconds of `repetitions` full-batch predictions
/// after one untimed warmup call. Runs on the calling thread and fails with
/// `ConcurrentTiming` if any other registered worker was active at any
/// point during the measurement.
pub fn time_predictions(model: &RegressorModel, x: &Matrix, repetitions: usize) -> Result<f64> {
    if repetitions < 3 {
        return Err(Error::InvalidParameter(format!(
            "timing needs at least 3 repetitions, got {repetitions}"
        )));
    }
    let _me = WorkerGuard::enter();
    let check = || match active_workers() {
        1 => Ok(()),
        n => Err(Error::ConcurrentTiming(n)),
    };
    check()?;
    std::hint::black_box(model.predict(x)?);
    let mut times = Vec::with_capacity(repetitions);
    for _ in 0..repetitions {
        let t = Instant::now();
        std::hint::black_box(model.predict(std::hint::black_box(x))?);
        times.push(t.elapsed().as_secs_f64() * 1e3);
        check()?;
    }
    times.sort_by(f64::total_cmp);
    let mid = times.len() / 2;
    Ok(if times.len() % 2 == 1 {
        times[mid]
    } else {
        0.5 * (times[mid - 1] + times[mid])
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regress::{fit, RegressorConfig, RegressorKind};

    // Kept in one test: the guard counter is process-wide and other tests in
    // this binary never register workers.
    #[test]
    fn timing_contract() {
        let x = Matrix::from_vec(200, 2, (0..400).map(|i| i as f64).collect()).unwrap();
        let y: Vec<f64> = (0..200).map(|i| i as f64).collect();
        let m = fit(RegressorKind::Linear, &RegressorConfig::default(), &x, &y, 0).unwrap();
        assert!(time_predictions(&m, &x, 2).is_err());
        assert!(time_predictions(&m, &x, 3).unwrap() >= 0.0);
        let busy = WorkerGuard::enter();
        assert!(matches!(time_predictions(&m, &x, 3), Err(Error::ConcurrentTiming(2))));
        drop(busy);
        assert!(time_predictions(&m, &x, 4).is_ok());
    }
}
