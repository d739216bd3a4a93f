use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::matrix::Matrix;
use crate::seed;

pub const DEFAULT_CLUSTERS: usize = 16;

/// Value conventions of the corpora the synthetic draws imitate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// Nonnegative integers up to 218.
    SiftLike,
    /// Unconstrained reals.
    DeepLike,
    /// Grayscale-style integers in `[0, 255]`.
    MnistLike,
    /// Nonnegative reals up to 58104.
    LabelmeLike,
}

impl Profile {
    pub const ALL: [Profile; 4] = [
        Profile::SiftLike,
        Profile::DeepLike,
        Profile::MnistLike,
        Profile::LabelmeLike,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Profile::SiftLike => "sift_like",
            Profile::DeepLike => "deep_like",
            Profile::MnistLike => "mnist_like",
            Profile::LabelmeLike => "labelme_like",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == s)
    }

    /// `(center_lo, center_hi, spread_lo, spread_hi)`; deep_like centers are
    /// Gaussian with standard deviation `center_hi`.
    fn shape(self) -> (f64, f64, f64, f64) {
        match self {
            Profile::SiftLike => (0.0, 218.0, 3.0, 30.0),
            Profile::MnistLike => (0.0, 255.0, 4.0, 40.0),
            Profile::LabelmeLike => (0.0, 58104.0, 600.0, 6000.0),
            Profile::DeepLike => (0.0, 16.0, 0.5, 5.0),
        }
    }

    fn finish(self, v: f64) -> f64 {
        match self {
            Profile::SiftLike => v.round().clamp(0.0, 218.0),
            Profile::MnistLike => v.round().clamp(0.0, 255.0),
            Profile::LabelmeLike => v.clamp(0.0, 58104.0),
            Profile::DeepLike => v,
        }
    }
}

impl std::fmt::Display for Profile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Seeded Gaussian-mixture draw with [`DEFAULT_CLUSTERS`] clusters.
pub fn synth_dataset(profile: Profile, n: usize, d: usize, seed: u64) -> Matrix {
    synth_dataset_labeled(profile, n, d, DEFAULT_CLUSTERS, seed).0
}

/// Mixture draw that also returns each row's cluster.
///
/// Clusters get uneven weights and log-uniform spreads, so neighbor
/// distances (and therefore terminal search radii) depend on where a point
/// falls.
pub fn synth_dataset_labeled(
    profile: Profile,
    n: usize,
    d: usize,
    clusters: usize,
    seed: u64,
) -> (Matrix, Vec<usize>) {
    let clusters = clusters.max(1);
    let (lo, hi, s_lo, s_hi) = profile.shape();
    let mut rng = seed::rng(seed);

    let centers: Vec<Vec<f64>> = (0..clusters)
        .map(|_| {
            (0..d)
                .map(|_| match profile {
                    Profile::DeepLike => hi * rng.sample::<f64, _>(StandardNormal),
                    _ => rng.random_range(lo..hi),
                })
                .collect()
        })
        .collect();
    let spreads: Vec<f64> = (0..clusters)
        .map(|_| (rng.random_range(s_lo.ln()..s_hi.ln())).exp())
        .collect();
    let weights: Vec<f64> = (0..clusters).map(|_| rng.random_range(0.5..1.5)).collect();
    let total: f64 = weights.iter().sum();
    let cumulative: Vec<f64> = weights
        .iter()
        .scan(0.0, |acc, w| {
            *acc += w / total;
            Some(*acc)
        })
        .collect();

    let mut data = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let u: f64 = rng.random();
        let c = cumulative.iter().position(|&p| u < p).unwrap_or(clusters - 1);
        labels.push(c);
        for &mu in &centers[c] {
            let z: f64 = rng.sample(StandardNormal);
            data.push(profile.finish(mu + spreads[c] * z));
        }
    }
    (Matrix::from_vec(n, d, data).expect("sized above"), labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::euclidean;

    #[test]
    fn sift_like_values_are_small_integers() {
        let m = synth_dataset(Profile::SiftLike, 500, 32, 1);
        assert!(m.as_slice().iter().all(|&v| v.fract() == 0.0 && (0.0..=218.0).contains(&v)));
    }

    #[test]
    fn profile_ranges() {
        let m = synth_dataset(Profile::MnistLike, 300, 16, 2);
        assert!(m.as_slice().iter().all(|&v| v.fract() == 0.0 && (0.0..=255.0).contains(&v)));
        let m = synth_dataset(Profile::LabelmeLike, 300, 16, 2);
        assert!(m.as_slice().iter().all(|&v| (0.0..=58104.0).contains(&v)));
        let m = synth_dataset(Profile::DeepLike, 300, 16, 2);
        assert!(m.as_slice().iter().any(|&v| v < 0.0));
    }

    #[test]
    fn deterministic() {
        for p in Profile::ALL {
            assert_eq!(synth_dataset(p, 100, 8, 5), synth_dataset(p, 100, 8, 5));
        }
        assert_ne!(
            synth_dataset(Profile::SiftLike, 100, 8, 5),
            synth_dataset(Profile::SiftLike, 100, 8, 6)
        );
    }

    #[test]
    fn intra_cluster_closer_than_inter_cluster() {
        for p in Profile::ALL {
            let (m, labels) = synth_dataset_labeled(p, 1000, 32, DEFAULT_CLUSTERS, 9);
            let (mut intra, mut ni, mut inter, mut nx) = (0.0, 0usize, 0.0, 0usize);
            for i in 0..1000 {
                for j in (i + 1)..1000 {
                    let dist = euclidean(m.row(i), m.row(j));
                    if labels[i] == labels[j] {
                        intra += dist;
                        ni += 1;
                    } else {
                        inter += dist;
                        nx += 1;
                    }
                }
            }
            assert!(intra / (ni as f64) < inter / (nx as f64), "{p}");
        }
    }

    #[test]
    fn profile_names_round_trip() {
        for p in Profile::ALL {
            assert_eq!(Profile::parse(p.name()), Some(p));
        }
        assert_eq!(Profile::parse("gist"), None);
    }
}
