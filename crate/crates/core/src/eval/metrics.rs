use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Accuracy and timing of one model on one evaluation set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSet {
    pub mse: f64,
    #[serde(with = "nan_as_null")]
    pub r2_paper: f64,
    #[serde(with = "nan_as_null")]
    pub r2_standard: f64,
    #[serde(with = "nan_as_null")]
    pub predict_time_ms: f64,
    pub train_time_ms: f64,
    pub n_eval: usize,
}

/// JSON has no NaN; missing values travel as `null`.
mod nan_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_nan() {
            s.serialize_none()
        } else {
            s.serialize_some(v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

fn check(y: &[f64], yhat: &[f64]) -> Result<()> {
    if y.len() != yhat.len() {
        return Err(Error::DimensionMismatch {
            expected: y.len(),
            got: yhat.len(),
        });
    }
    if y.is_empty() {
        return Err(Error::EmptyInput);
    }
    if y.iter().chain(yhat).any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("non-finite value in metric input".into()));
    }
    Ok(())
}

/// Mean squared error `(1/n) Σ (y_i − ŷ_i)²`.
pub fn mse(y: &[f64], yhat: &[f64]) -> Result<f64> {
    check(y, yhat)?;
    let sse: f64 = y.iter().zip(yhat).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(sse / y.len() as f64)
}

fn mean_and_sst(y: &[f64]) -> Result<(f64, f64)> {
    if y.len() < 2 {
        return Err(Error::ZeroVariance);
    }
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let sst: f64 = y.iter().map(|v| (v - mean) * (v - mean)).sum();
    if !(sst > 0.0) {
        return Err(Error::ZeroVariance);
    }
    Ok((mean, sst))
}

/// Explained-variance ratio `Σ (ŷ_i − ȳ)² / Σ (y_i − ȳ)²`, with `ȳ` the
/// mean of the actual values.
///
/// Equals [`r_squared_standard`] only for least-squares fits evaluated on
/// their training data; for other predictors the two diverge and this form
/// can exceed 1.
pub fn r_squared_paper(y: &[f64], yhat: &[f64]) -> Result<f64> {
    check(y, yhat)?;
    let (mean, sst) = mean_and_sst(y)?;
    let ssr: f64 = yhat.iter().map(|v| (v - mean) * (v - mean)).sum();
    Ok(ssr / sst)
}

/// Coefficient of determination `1 − SS_res / SS_tot`.
pub fn r_squared_standard(y: &[f64], yhat: &[f64]) -> Result<f64> {
    check(y, yhat)?;
    let (_, sst) = mean_and_sst(y)?;
    let sse: f64 = y.iter().zip(yhat).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(1.0 - sse / sst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn mse_examples() {
        assert_eq!(mse(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 0.0);
        assert_eq!(mse(&[0.0; 4], &[2.0; 4]).unwrap(), 4.0);
        assert_eq!(mse(&[1.0, 2.0], &[2.0, 4.0]).unwrap(), 2.5);
    }

    #[test]
    fn mse_errors() {
        assert!(matches!(mse(&[1.0], &[1.0, 2.0]), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(mse(&[], &[]), Err(Error::EmptyInput)));
    }

    #[test]
    fn r2_examples() {
        let y = [1.0, 4.0, 2.0, 7.0];
        assert_eq!(r_squared_paper(&y, &y).unwrap(), 1.0);
        assert_eq!(r_squared_standard(&y, &y).unwrap(), 1.0);
        let mean = [3.5; 4];
        assert_eq!(r_squared_paper(&y, &mean).unwrap(), 0.0);
        assert_eq!(r_squared_standard(&y, &mean).unwrap(), 0.0);
    }

    #[test]
    fn mirrored_predictor_separates_the_two_forms() {
        // ŷ = −y + 2ȳ: residuals are 2(y − ȳ), so SSE = 4 SST
        let y = [1.0, 4.0, 2.0, 7.0, 6.0];
        let mean = y.iter().sum::<f64>() / 5.0;
        let yhat: Vec<f64> = y.iter().map(|v| -v + 2.0 * mean).collect();
        assert!((r_squared_standard(&y, &yhat).unwrap() + 3.0).abs() < 1e-12);
        assert!((r_squared_paper(&y, &yhat).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_variance() {
        assert!(matches!(r_squared_paper(&[2.0, 2.0], &[1.0, 3.0]), Err(Error::ZeroVariance)));
        assert!(matches!(r_squared_standard(&[2.0], &[1.0]), Err(Error::ZeroVariance)));
    }

    proptest! {
        #[test]
        fn mse_symmetric_in_residual_sign(
            pairs in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 1..40)
        ) {
            let y: Vec<f64> = pairs.iter().map(|p| p.0).collect();
            let plus: Vec<f64> = pairs.iter().map(|p| p.0 + p.1).collect();
            let minus: Vec<f64> = pairs.iter().map(|p| p.0 - p.1).collect();
            let a = mse(&y, &plus).unwrap();
            let b = mse(&y, &minus).unwrap();
            prop_assert!((a - b).abs() <= 1e-9 * a.max(1.0));
        }

        #[test]
        fn r2_forms_scale_invariant(
            y in prop::collection::vec(-100f64..100.0, 3..30),
            s in 0.01f64..100.0,
        ) {
            let yhat: Vec<f64> = y.iter().enumerate().map(|(i, v)| v * 0.9 + (i % 3) as f64).collect();
            prop_assume!(mean_and_sst(&y).is_ok());
            let ys: Vec<f64> = y.iter().map(|v| v * s).collect();
            let yhs: Vec<f64> = yhat.iter().map(|v| v * s).collect();
            let p0 = r_squared_paper(&y, &yhat).unwrap();
            let p1 = r_squared_paper(&ys, &yhs).unwrap();
            let s0 = r_squared_standard(&y, &yhat).unwrap();
            let s1 = r_squared_standard(&ys, &yhs).unwrap();
            prop_assert!((p0 - p1).abs() <= 1e-9 * p0.abs().max(1.0));
            prop_assert!((s0 - s1).abs() <= 1e-9 * s0.abs().max(1.0));
        }
    }

    #[test]
    fn missing_values_survive_json() {
        let m = MetricSet {
            mse: 1.0 / 3.0,
            r2_paper: f64::NAN,
            r2_standard: -0.5,
            predict_time_ms: f64::NAN,
            train_time_ms: 2.0,
            n_eval: 4,
        };
        let back: MetricSet = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        assert_eq!(back.mse.to_bits(), m.mse.to_bits());
        assert!(back.r2_paper.is_nan() && back.predict_time_ms.is_nan());
        assert_eq!(back.r2_standard, -0.5);
    }
}
