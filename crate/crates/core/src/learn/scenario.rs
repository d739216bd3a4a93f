use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::TrainingSample;
use crate::error::{Error, Result};
use crate::seed;

pub const ALLOWED_K: [usize; 7] = [1, 10, 25, 50, 75, 90, 100];
pub const ALLOWED_TOTALS: [usize; 3] = [5_000, 10_000, 50_000];

/// Which k values a predictor sees and how many training samples it gets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub id: u8,
    /// Ascending.
    pub k_values: Vec<usize>,
    pub total_size: usize,
}

impl ScenarioSpec {
    /// The five standard scenarios.
    pub fn standard(id: u8) -> Result<Self> {
        let (k_values, total_size): (&[usize], usize) = match id {
            1 => (&[1, 50, 100], 10_000),
            2 => (&[1, 25, 50, 75, 100], 5_000),
            3 => (&[1, 25, 50, 75, 100], 10_000),
            4 => (&[1, 25, 50, 75, 100], 50_000),
            5 => (&[1, 10, 25, 50, 75, 90, 100], 10_000),
            _ => return Err(Error::InvalidParameter(format!("scenario id {id} outside 1..=5"))),
        };
        Ok(Self {
            id,
            k_values: k_values.to_vec(),
            total_size,
        })
    }

    pub fn all() -> Vec<Self> {
        (1..=5).map(|id| Self::standard(id).unwrap()).collect()
    }

    /// Same k composition with the training size multiplied by `factor`
    /// (rounded, at least one sample per k). Desk-scale runs use this.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0) || !factor.is_finite() {
            return Err(Error::InvalidParameter(format!("scale factor {factor} must be positive")));
        }
        Ok(Self {
            total_size: ((self.total_size as f64 * factor).round() as usize).max(self.k_values.len()),
            ..self.clone()
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_values.is_empty() || self.k_values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter("k values must be nonempty and ascending".into()));
        }
        if let Some(k) = self.k_values.iter().find(|k| !ALLOWED_K.contains(k)) {
            return Err(Error::InvalidParameter(format!("k = {k} not in {ALLOWED_K:?}")));
        }
        if self.total_size < self.k_values.len() {
            return Err(Error::InvalidParameter("fewer samples than k values".into()));
        }
        Ok(())
    }

    /// Held-out test size, `⌈0.2 · total_size⌉`.
    pub fn test_size(&self) -> usize {
        self.total_size.div_ceil(5)
    }

    /// Even split of `total` across the k values; the remainder goes to the
    /// smallest k.
    pub fn allocation(&self, total: usize) -> Vec<(usize, usize)> {
        let parts = self.k_values.len();
        let (base, rem) = (total / parts, total % parts);
        self.k_values
            .iter()
            .enumerate()
            .map(|(i, &k)| (k, base + if i == 0 { rem } else { 0 }))
            .collect()
    }
}

/// Pool indices of the train and test samples of `spec`, each sorted.
pub fn scenario_indices(pool: &[TrainingSample], spec: &ScenarioSpec, seed_v: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    spec.validate()?;
    let train_alloc = spec.allocation(spec.total_size);
    let test_alloc = spec.allocation(spec.test_size());
    let mut by_k: BTreeMap<usize, Vec<usize>> = spec.k_values.iter().map(|&k| (k, Vec::new())).collect();
    for (i, s) in pool.iter().enumerate() {
        if let Some(v) = by_k.get_mut(&s.k) {
            v.push(i);
        }
    }
    let needed = spec.total_size + spec.test_size();
    let have: usize = by_k.values().map(Vec::len).sum();
    let short = train_alloc
        .iter()
        .zip(&test_alloc)
        .any(|(&(k, a), &(_, b))| by_k[&k].len() < a + b);
    if short {
        return Err(Error::PoolTooSmall { needed, have });
    }
    let mut rng = seed::rng(seed_v);
    let (mut train, mut test) = (Vec::with_capacity(spec.total_size), Vec::with_capacity(spec.test_size()));
    for (&(k, a), &(_, b)) in train_alloc.iter().zip(&test_alloc) {
        let idx = by_k.get_mut(&k).unwrap();
        let (chosen, _) = idx.partial_shuffle(&mut rng, a + b);
        train.extend_from_slice(&chosen[..a]);
        test.extend_from_slice(&chosen[a..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Seeded uniform draw of `spec.total_size` training and
/// `⌈0.2 · total_size⌉` disjoint test samples from `pool`, both restricted
/// to `spec.k_values` and allocated evenly across them.
pub fn build_scenario(
    pool: &[TrainingSample],
    spec: &ScenarioSpec,
    seed_v: u64,
) -> Result<(Vec<TrainingSample>, Vec<TrainingSample>)> {
    let (train, test) = scenario_indices(pool, spec, seed_v)?;
    let pick = |idx: &[usize]| idx.iter().map(|&i| pool[i].clone()).collect();
    Ok((pick(&train), pick(&test)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pool(per_k: usize) -> Vec<TrainingSample> {
        (0..per_k)
            .flat_map(|q| {
                ALLOWED_K.map(|k| TrainingSample {
                    features: vec![q as f64, k as f64],
                    k,
                    label: 1.0,
                })
            })
            .collect()
    }

    #[test]
    fn standard_sizes() {
        let sizes: Vec<(usize, usize)> = ScenarioSpec::all().iter().map(|s| (s.total_size, s.test_size())).collect();
        assert_eq!(sizes, vec![(10_000, 2_000), (5_000, 1_000), (10_000, 2_000), (50_000, 10_000), (10_000, 2_000)]);
        assert_eq!(ScenarioSpec::standard(1).unwrap().k_values, vec![1, 50, 100]);
        assert_eq!(ScenarioSpec::standard(5).unwrap().k_values, ALLOWED_K.to_vec());
        assert!(ScenarioSpec::standard(6).is_err());
        for s in ScenarioSpec::all() {
            assert!(ALLOWED_TOTALS.contains(&s.total_size));
        }
    }

    #[test]
    fn remainder_goes_to_smallest_k() {
        let s = ScenarioSpec::standard(1).unwrap();
        assert_eq!(s.allocation(10_000), vec![(1, 3334), (50, 3333), (100, 3333)]);
        assert_eq!(s.allocation(2_000), vec![(1, 668), (50, 666), (100, 666)]);
    }

    #[test]
    fn scenario_one_draw() {
        let p = pool(4100);
        let spec = ScenarioSpec::standard(1).unwrap();
        let (train, test) = build_scenario(&p, &spec, 4).unwrap();
        assert_eq!((train.len(), test.len()), (10_000, 2_000));
        assert!(train.iter().chain(&test).all(|s| spec.k_values.contains(&s.k)));
        assert_eq!(train.iter().filter(|s| s.k == 1).count(), 3334);
        assert_eq!(build_scenario(&p, &spec, 4).unwrap().0, train);
    }

    #[test]
    fn small_pool_is_reported() {
        let p = pool(100);
        assert!(matches!(
            build_scenario(&p, &ScenarioSpec::standard(2).unwrap(), 0),
            Err(Error::PoolTooSmall { needed: 6000, have: 500 })
        ));
    }

    #[test]
    fn scaling_keeps_composition() {
        let s = ScenarioSpec::standard(4).unwrap().scaled(0.1).unwrap();
        assert_eq!((s.total_size, s.test_size()), (5_000, 1_000));
        assert_eq!(ScenarioSpec::standard(1).unwrap().scaled(1e-9).unwrap().total_size, 3);
    }

    proptest! {
        #[test]
        fn train_and_test_are_disjoint(seed_v in any::<u64>(), id in 1u8..=5, scale in 0.01f64..0.2) {
            let p = pool(2500);
            let spec = ScenarioSpec::standard(id).unwrap().scaled(scale).unwrap();
            let (train, test) = scenario_indices(&p, &spec, seed_v).unwrap();
            prop_assert_eq!(train.len(), spec.total_size);
            prop_assert_eq!(test.len(), spec.test_size());
            let mut all = [train.clone(), test.clone()].concat();
            all.sort_unstable();
            all.dedup();
            prop_assert_eq!(all.len(), train.len() + test.len());
            let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
            for &i in &train {
                *counts.entry(p[i].k).or_default() += 1;
            }
            let c: Vec<usize> = counts.values().copied().collect();
            prop_assert!(c[1..].iter().all(|&v| v == c[1]) || c.len() == 1);
            prop_assert!(c[0] >= *c.iter().max().unwrap());
        }
    }
}
