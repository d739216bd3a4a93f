use std::f64::consts::PI;

use statrs::function::erf::erfc;

use crate::error::{Error, Result};

/// `(R, cR, p1, p2)`-sensitivity of the hash family plus the allowed error
/// probability `delta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensitivityParams {
    pub radius: f64,
    pub c: f64,
    pub p1: f64,
    pub p2: f64,
    pub delta: f64,
}

impl SensitivityParams {
    pub fn new(radius: f64, c: f64, p1: f64, p2: f64, delta: f64) -> Result<Self> {
        let p = Self {
            radius,
            c,
            p1,
            p2,
            delta,
        };
        p.validate()?;
        Ok(p)
    }

    /// `p1 = p(1)`, `p2 = p(c)` for bucket width `w` at base radius 1.
    pub fn for_bucket_width(w: f64, c: f64, delta: f64) -> Result<Self> {
        if !(w > 0.0) {
            return Err(Error::InvalidParameter(format!("bucket width {w} must be positive")));
        }
        Self::new(
            1.0,
            c,
            collision_probability(w, 1.0),
            collision_probability(w, c),
            delta,
        )
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0) {
            return Err(Error::InvalidSensitivity(format!("radius {} must be positive", self.radius)));
        }
        if !(self.c > 1.0) {
            return Err(Error::InvalidSensitivity(format!("c = {} must exceed 1", self.c)));
        }
        if !(self.p1 > 0.0 && self.p1 <= 1.0 && self.p2 > 0.0 && self.p2 < 1.0) {
            return Err(Error::InvalidSensitivity(format!(
                "probabilities out of range: p1 = {}, p2 = {}",
                self.p1, self.p2
            )));
        }
        if !(self.p1 > self.p2) {
            return Err(Error::InvalidSensitivity(format!(
                "p1 = {} must exceed p2 = {}",
                self.p1, self.p2
            )));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidSensitivity(format!("delta = {} outside (0, 1)", self.delta)));
        }
        Ok(())
    }
}

fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Probability that two points at distance `s` share a bucket of width `w`
/// under one p-stable (Gaussian) projection.
pub fn collision_probability(w: f64, s: f64) -> f64 {
    if s <= 0.0 {
        return 1.0;
    }
    let t = w / s;
    1.0 - 2.0 * std_normal_cdf(-t) - 2.0 / ((2.0 * PI).sqrt() * t) * (1.0 - (-t * t / 2.0).exp())
}

/// Collision threshold `l = ⌈m (p1 + p2) / 2⌉` clamped to `[1, m]`.
///
/// `n` is accepted for interface parity with threshold rules that depend on
/// the dataset size; the midpoint rule ignores it.
pub fn compute_collision_threshold(_n: usize, m: usize, params: &SensitivityParams) -> Result<usize> {
    if m == 0 {
        return Err(Error::InvalidParameter("projection count must be at least 1".into()));
    }
    if !(params.p1 > params.p2) {
        return Err(Error::InvalidSensitivity(format!(
            "p1 = {} must exceed p2 = {}",
            params.p1, params.p2
        )));
    }
    let raw = (m as f64 * (params.p1 + params.p2) / 2.0).ceil();
    Ok((raw.max(1.0) as usize).min(m))
}

/// `m = ⌈ln(1/δ) / (2 (p1 − p2)²)⌉` clamped to `[16, 256]`.
pub fn default_projection_count(params: &SensitivityParams) -> usize {
    let gap = params.p1 - params.p2;
    let raw = ((1.0 / params.delta).ln() / (2.0 * gap * gap)).ceil();
    if raw.is_finite() {
        (raw as usize).clamp(16, 256)
    } else {
        256
    }
}

/// User-facing LSH parameters.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LshParams {
    /// Bucket width.
    pub w: f64,
    /// Allowed error probability.
    pub delta: f64,
    /// Approximation ratio, also the radius growth factor.
    pub c: u32,
    /// Projection count override.
    pub m: Option<usize>,
    /// Collision threshold override.
    pub l: Option<usize>,
    /// Extra candidates, as a fraction of `n`, that end a level.
    pub beta: f64,
}

impl Default for LshParams {
    fn default() -> Self {
        Self {
            w: 2.184,
            delta: 0.1,
            c: 2,
            m: None,
            l: None,
            beta: 0.01,
        }
    }
}

impl LshParams {
    pub fn sensitivity(&self) -> Result<SensitivityParams> {
        if self.c < 2 {
            return Err(Error::InvalidParameter(format!("c = {} must be an integer >= 2", self.c)));
        }
        SensitivityParams::for_bucket_width(self.w, self.c as f64, self.delta)
    }

    pub fn projection_count(&self) -> Result<usize> {
        match self.m {
            Some(0) => Err(Error::InvalidParameter("m must be at least 1".into())),
            Some(m) if m > u16::MAX as usize => {
                Err(Error::InvalidParameter(format!("m = {m} is too large")))
            }
            Some(m) => Ok(m),
            None => Ok(default_projection_count(&self.sensitivity()?)),
        }
    }

    /// Search settings for a table with `n` points and `m` projections.
    pub fn search_settings(&self, n: usize, m: usize) -> Result<SearchSettings> {
        let l = match self.l {
            Some(l) if l == 0 || l > m => {
                return Err(Error::InvalidParameter(format!("l = {l} outside [1, {m}]")))
            }
            Some(l) => l,
            None => compute_collision_threshold(n, m, &self.sensitivity()?)?,
        };
        if !(self.beta >= 0.0) {
            return Err(Error::InvalidParameter(format!("beta = {} must be >= 0", self.beta)));
        }
        Ok(SearchSettings {
            c: self.c,
            l,
            extra_candidates: (self.beta * n as f64).ceil() as usize,
        })
    }
}

/// Per-table search parameters shared by all queries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchSettings {
    pub c: u32,
    pub l: usize,
    /// Candidate quota is `k + extra_candidates`.
    pub extra_candidates: usize,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn collision_probability_reference_values() {
        // independent evaluation by numerical integration of
        // ∫_0^w (1/s) f(t/s) (1 - t/w) dt with f the folded normal density
        fn quad(w: f64, s: f64) -> f64 {
            let steps = 200_000;
            let h = w / steps as f64;
            let f = |t: f64| {
                let z = t / s;
                2.0 / (2.0 * PI).sqrt() * (-z * z / 2.0).exp() / s * (1.0 - t / w)
            };
            let mut acc = f(0.0) + f(w);
            for i in 1..steps {
                let t = i as f64 * h;
                acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(t);
            }
            acc * h / 3.0
        }
        for s in [0.5, 1.0, 2.0, 4.0] {
            let p = collision_probability(2.184, s);
            assert!((p - quad(2.184, s)).abs() < 1e-9, "s={s}: {p} vs {}", quad(2.184, s));
        }
        let p1 = collision_probability(2.184, 1.0);
        let p2 = collision_probability(2.184, 2.0);
        assert!(p1 > p2 && p1 < 1.0 && p2 > 0.0);
    }

    #[test]
    fn threshold_midpoint_rule() {
        let p = SensitivityParams::new(1.0, 2.0, 0.8, 0.6, 0.1).unwrap();
        assert_eq!(compute_collision_threshold(1000, 100, &p).unwrap(), 70);
        let p = SensitivityParams::new(1.0, 2.0, 1.0, 0.999_999, 0.1).unwrap();
        assert_eq!(compute_collision_threshold(1000, 10, &p).unwrap(), 10);
        let p = SensitivityParams::new(1.0, 2.0, 0.02, 0.01, 0.1).unwrap();
        assert_eq!(compute_collision_threshold(1000, 10, &p).unwrap(), 1);
    }

    #[test]
    fn threshold_rejects_inverted_probabilities() {
        let p = SensitivityParams {
            radius: 1.0,
            c: 2.0,
            p1: 0.5,
            p2: 0.5,
            delta: 0.1,
        };
        assert!(matches!(
            compute_collision_threshold(10, 10, &p),
            Err(Error::InvalidSensitivity(_))
        ));
        assert!(SensitivityParams::new(1.0, 2.0, 0.4, 0.6, 0.1).is_err());
    }

    #[test]
    fn threshold_monotone_in_p1() {
        let mut last = 0;
        for i in 0..50 {
            let p1 = 0.31 + i as f64 * 0.0138;
            let p = SensitivityParams::new(1.0, 2.0, p1, 0.3, 0.1).unwrap();
            let l = compute_collision_threshold(5000, 64, &p).unwrap();
            assert!(l >= last && (1..=64).contains(&l));
            last = l;
        }
    }

    #[test]
    fn default_parameters() {
        let lsh = LshParams::default();
        let s = lsh.sensitivity().unwrap();
        let m = lsh.projection_count().unwrap();
        assert!((16..=256).contains(&m));
        let expected = ((10f64).ln() / (2.0 * (s.p1 - s.p2).powi(2))).ceil() as usize;
        assert_eq!(m, expected.clamp(16, 256));
        let settings = lsh.search_settings(20_000, m).unwrap();
        assert_eq!(settings.extra_candidates, 200);
        assert_eq!(settings.c, 2);
    }
}
