use crate::error::{Error, Result};
use crate::matrix::dot;

/// One p-stable projection `H(x) = ⌊(a·x + b) / w⌋`.
#[derive(Debug, Clone, PartialEq)]
pub struct HashFunction {
    pub a: Vec<f64>,
    pub b: f64,
    pub w: f64,
}

impl HashFunction {
    pub fn new(a: Vec<f64>, b: f64, w: f64) -> Result<Self> {
        if !(w > 0.0) || !w.is_finite() {
            return Err(Error::InvalidParameter(format!("bucket width {w} must be positive")));
        }
        if !(0.0..w).contains(&b) {
            return Err(Error::InvalidParameter(format!("offset {b} outside [0, {w})")));
        }
        Ok(Self { a, b, w })
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    /// Base-level hash of `x`. Caller guarantees `x.len() == self.dim()`.
    #[inline]
    pub fn hash(&self, x: &[f64]) -> i64 {
        ((dot(&self.a, x) + self.b) / self.w).floor() as i64
    }
}

/// Bucket of a base-level hash at a coarser radius level, `⌊h / r⌋`
/// rounding toward negative infinity.
#[inline]
pub fn bucket_at_level(base_hash: i64, radius_level: i64) -> Result<i64> {
    if radius_level <= 0 {
        return Err(Error::InvalidRadius(radius_level));
    }
    Ok(base_hash.div_euclid(radius_level))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signature_of_single_point() {
        let h = HashFunction::new(vec![1.0, 0.0], 0.5, 2.184).unwrap();
        assert_eq!(h.hash(&[3.0, 7.0]), 1);
    }

    #[test]
    fn origin_hashes_to_zero() {
        let h = HashFunction::new(vec![0.3, -1.7, 2.2], 0.0, 2.184).unwrap();
        assert_eq!(h.hash(&[0.0, 0.0, 0.0]), 0);
    }

    #[test]
    fn negative_projection_floors_down() {
        let h = HashFunction::new(vec![1.0], 0.0, 2.0).unwrap();
        assert_eq!(h.hash(&[-0.5]), -1);
    }

    #[test]
    fn rejects_bad_offset_and_width() {
        assert!(HashFunction::new(vec![1.0], 2.0, 2.0).is_err());
        assert!(HashFunction::new(vec![1.0], -0.1, 2.0).is_err());
        assert!(HashFunction::new(vec![1.0], 0.0, 0.0).is_err());
    }

    #[test]
    fn bucket_floor_semantics() {
        assert_eq!(bucket_at_level(5, 1).unwrap(), 5);
        assert_eq!(bucket_at_level(5, 4).unwrap(), 1);
        assert_eq!(bucket_at_level(-5, 4).unwrap(), -2);
        assert_eq!(bucket_at_level(-4, 4).unwrap(), -1);
        assert!(matches!(bucket_at_level(3, 0), Err(Error::InvalidRadius(0))));
        assert!(matches!(bucket_at_level(3, -2), Err(Error::InvalidRadius(-2))));
    }

    #[test]
    fn buckets_nest_exhaustively() {
        // levels 1, 2, 4, ..., 64 and the multiples 3 -> 6 -> 12
        let chains: [&[i64]; 2] = [&[1, 2, 4, 8, 16, 32, 64], &[1, 3, 6, 12, 36]];
        for chain in chains {
            for w in chain.windows(2) {
                let (r1, r2) = (w[0], w[1]);
                for h1 in -1000i64..=1000 {
                    for h2 in (h1 - 80)..=(h1 + 80) {
                        if bucket_at_level(h1, r1).unwrap() == bucket_at_level(h2, r1).unwrap() {
                            assert_eq!(
                                bucket_at_level(h1, r2).unwrap(),
                                bucket_at_level(h2, r2).unwrap(),
                                "h1={h1} h2={h2} r1={r1} r2={r2}"
                            );
                        }
                    }
                }
            }
        }
    }
}
