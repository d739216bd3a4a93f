//! ε-insensitive support vector regression solved by SMO with
//! second-order working-set selection over the doubled dual
//! (one variable per sample for each side of the tube).

use std::collections::VecDeque;
use std::rc::Rc;

use serde::{Deserialize, Serialize};

use super::scale::Standardizer;
use super::RegressorConfig;
use crate::error::{Error, Result};
use crate::matrix::{dot, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kernel {
    /// `exp(−γ‖a − b‖²)`
    Rbf,
    /// `a · b`
    Linear,
}

impl Kernel {
    pub(crate) fn tag(self) -> u8 {
        match self {
            Kernel::Rbf => 0,
            Kernel::Linear => 1,
        }
    }

    pub(crate) fn from_tag(t: u8) -> Option<Self> {
        match t {
            0 => Some(Kernel::Rbf),
            1 => Some(Kernel::Linear),
            _ => None,
        }
    }

    #[inline]
    fn eval(self, gamma: f64, a: &[f64], a_norm: f64, b: &[f64], b_norm: f64) -> f64 {
        let ab = dot(a, b);
        match self {
            Kernel::Linear => ab,
            Kernel::Rbf => (-gamma * (a_norm + b_norm - 2.0 * ab).max(0.0)).exp(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvrModel {
    pub scaler: Standardizer,
    pub kernel: Kernel,
    pub gamma: f64,
    /// Standardized support vectors.
    pub support: Matrix,
    pub coef: Vec<f64>,
    pub rho: f64,
    support_norms: Vec<f64>,
}

/// Kernel rows over the training set with a FIFO row cache.
struct KernelRows<'a> {
    x: &'a Matrix,
    norms: Vec<f64>,
    kernel: Kernel,
    gamma: f64,
    rows: Vec<Option<Rc<Vec<f64>>>>,
    order: VecDeque<usize>,
    capacity: usize,
}

impl<'a> KernelRows<'a> {
    fn new(x: &'a Matrix, kernel: Kernel, gamma: f64, cache_mb: usize) -> Self {
        let norms = x.iter_rows().map(|r| dot(r, r)).collect();
        let row_bytes = 8 * x.rows().max(1);
        let capacity = (cache_mb * 1024 * 1024 / row_bytes).max(2);
        Self {
            x,
            norms,
            kernel,
            gamma,
            rows: vec![None; x.rows()],
            order: VecDeque::new(),
            capacity,
        }
    }

    fn diag(&self, i: usize) -> f64 {
        match self.kernel {
            Kernel::Rbf => 1.0,
            Kernel::Linear => self.norms[i],
        }
    }

    fn row(&mut self, i: usize) -> Rc<Vec<f64>> {
        if let Some(r) = &self.rows[i] {
            return Rc::clone(r);
        }
        let xi = self.x.row(i);
        let ni = self.norms[i];
        let row: Vec<f64> = (0..self.x.rows())
            .map(|t| self.kernel.eval(self.gamma, xi, ni, self.x.row(t), self.norms[t]))
            .collect();
        let row = Rc::new(row);
        if self.order.len() >= self.capacity {
            if let Some(old) = self.order.pop_front() {
                self.rows[old] = None;
            }
        }
        self.rows[i] = Some(Rc::clone(&row));
        self.order.push_back(i);
        row
    }
}

const TAU: f64 = 1e-12;

impl SvrModel {
    pub fn fit(x: &Matrix, y: &[f64], cfg: &RegressorConfig) -> Result<(Self, bool)> {
        let l = x.rows();
        let mean = y.iter().sum::<f64>() / l as f64;
        if y.iter().all(|&v| v == mean) {
            return Err(Error::DegenerateFit("SVR target has zero variance".into()));
        }
        let c = cfg.svr_c;
        if !(c > 0.0) || !(cfg.svr_epsilon >= 0.0) {
            return Err(Error::InvalidParameter("SVR needs C > 0 and epsilon >= 0".into()));
        }
        let scaler = Standardizer::fit(x);
        let xs = scaler.transform(x);
        let gamma = cfg.svr_gamma.unwrap_or_else(|| {
            let vals = xs.as_slice();
            let m = vals.iter().sum::<f64>() / vals.len() as f64;
            let var = vals.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / vals.len() as f64;
            if var > 0.0 {
                1.0 / (x.cols() as f64 * var)
            } else {
                1.0
            }
        });

        let mut k = KernelRows::new(&xs, cfg.svr_kernel, gamma, cfg.svr_cache_mb);
        let len = 2 * l;
        let sign = |t: usize| if t < l { 1.0 } else { -1.0 };
        let mut alpha = vec![0.0; len];
        let mut grad: Vec<f64> = (0..len)
            .map(|t| {
                if t < l {
                    cfg.svr_epsilon - y[t]
                } else {
                    cfg.svr_epsilon + y[t - l]
                }
            })
            .collect();
        let max_iter = cfg.svr_max_passes.saturating_mul(l).max(1);
        let mut converged = false;

        for _ in 0..max_iter {
            // i: maximal violator among the "up" set
            let mut gmax = f64::NEG_INFINITY;
            let mut pick_i = None;
            for t in 0..len {
                if sign(t) > 0.0 {
                    if alpha[t] < c && -grad[t] >= gmax {
                        gmax = -grad[t];
                        pick_i = Some(t);
                    }
                } else if alpha[t] > 0.0 && grad[t] >= gmax {
                    gmax = grad[t];
                    pick_i = Some(t);
                }
            }
            let Some(i) = pick_i else {
                converged = true;
                break;
            };
            let yi = sign(i);
            let ki = k.row(i % l);
            let qd_i = k.diag(i % l);

            // j: best second-order decrease among the "low" set
            let mut gmax2 = f64::NEG_INFINITY;
            let mut pick_j = None;
            let mut obj_min = f64::INFINITY;
            for t in 0..len {
                let yt = sign(t);
                let q_it = yi * yt * ki[t % l];
                let qd_t = k.diag(t % l);
                if yt > 0.0 {
                    if alpha[t] > 0.0 {
                        let gd = gmax + grad[t];
                        if grad[t] >= gmax2 {
                            gmax2 = grad[t];
                        }
                        if gd > 0.0 {
                            let quad = qd_i + qd_t - 2.0 * yi * q_it;
                            let od = -(gd * gd) / if quad > 0.0 { quad } else { TAU };
                            if od <= obj_min {
                                obj_min = od;
                                pick_j = Some(t);
                            }
                        }
                    }
                } else if alpha[t] < c {
                    let gd = gmax - grad[t];
                    if -grad[t] >= gmax2 {
                        gmax2 = -grad[t];
                    }
                    if gd > 0.0 {
                        let quad = qd_i + qd_t + 2.0 * yi * q_it;
                        let od = -(gd * gd) / if quad > 0.0 { quad } else { TAU };
                        if od <= obj_min {
                            obj_min = od;
                            pick_j = Some(t);
                        }
                    }
                }
            }
            let j = match pick_j {
                Some(j) if gmax + gmax2 >= cfg.svr_tol => j,
                _ => {
                    converged = true;
                    break;
                }
            };
            let yj = sign(j);
            let kj = k.row(j % l);
            let qd_j = k.diag(j % l);
            let q_ij = yi * yj * ki[j % l];

            let (old_i, old_j) = (alpha[i], alpha[j]);
            let (mut ai, mut aj) = (old_i, old_j);
            if yi != yj {
                let quad = (qd_i + qd_j + 2.0 * q_ij).max(TAU);
                let delta = (-grad[i] - grad[j]) / quad;
                let diff = ai - aj;
                ai += delta;
                aj += delta;
                if diff > 0.0 {
                    if aj < 0.0 {
                        aj = 0.0;
                        ai = diff;
                    }
                } else if ai < 0.0 {
                    ai = 0.0;
                    aj = -diff;
                }
                if diff > 0.0 {
                    if ai > c {
                        ai = c;
                        aj = c - diff;
                    }
                } else if aj > c {
                    aj = c;
                    ai = c + diff;
                }
            } else {
                let quad = (qd_i + qd_j - 2.0 * q_ij).max(TAU);
                let delta = (grad[i] - grad[j]) / quad;
                let sum = ai + aj;
                ai -= delta;
                aj += delta;
                if sum > c {
                    if ai > c {
                        ai = c;
                        aj = sum - c;
                    }
                } else if aj < 0.0 {
                    aj = 0.0;
                    ai = sum;
                }
                if sum > c {
                    if aj > c {
                        aj = c;
                        ai = sum - c;
                    }
                } else if ai < 0.0 {
                    ai = 0.0;
                    aj = sum;
                }
            }
            alpha[i] = ai;
            alpha[j] = aj;
            let (di, dj) = (ai - old_i, aj - old_j);
            for t in 0..len {
                let yt = sign(t);
                grad[t] += yt * (yi * ki[t % l] * di + yj * kj[t % l] * dj);
            }
        }

        // offset from free variables, else the midpoint of the feasible interval
        let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut sum_free, mut n_free) = (0.0, 0usize);
        for t in 0..len {
            let yg = sign(t) * grad[t];
            if alpha[t] >= c {
                if sign(t) < 0.0 {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else if alpha[t] <= 0.0 {
                if sign(t) > 0.0 {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else {
                n_free += 1;
                sum_free += yg;
            }
        }
        let rho = if n_free > 0 {
            sum_free / n_free as f64
        } else {
            (ub + lb) / 2.0
        };

        let mut sv_rows = Vec::new();
        let mut coef = Vec::new();
        for i in 0..l {
            let w = alpha[i] - alpha[i + l];
            if w != 0.0 {
                sv_rows.push(i);
                coef.push(w);
            }
        }
        let support = xs.select_rows(&sv_rows);
        let support_norms = support.iter_rows().map(|r| dot(r, r)).collect();
        Ok((
            Self {
                scaler,
                kernel: cfg.svr_kernel,
                gamma,
                support,
                coef,
                rho,
                support_norms,
            },
            converged,
        ))
    }

    pub(crate) fn from_parts(
        scaler: Standardizer,
        kernel: Kernel,
        gamma: f64,
        support: Matrix,
        coef: Vec<f64>,
        rho: f64,
    ) -> Self {
        let support_norms = support.iter_rows().map(|r| dot(r, r)).collect();
        Self {
            scaler,
            kernel,
            gamma,
            support,
            coef,
            rho,
            support_norms,
        }
    }

    pub fn support_count(&self) -> usize {
        self.coef.len()
    }

    fn decision(&self, z: &[f64]) -> f64 {
        let zn = dot(z, z);
        let mut acc = 0.0;
        for (s, (&w, &sn)) in self.coef.iter().zip(&self.support_norms).enumerate() {
            acc += w * self.kernel.eval(self.gamma, self.support.row(s), sn, z, zn);
        }
        acc - self.rho
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut z = vec![0.0; row.len()];
        self.scaler.apply_row(row, &mut z);
        self.decision(&z)
    }

    pub fn predict(&self, x: &Matrix) -> Vec<f64> {
        let mut z = vec![0.0; x.cols()];
        x.iter_rows()
            .map(|r| {
                self.scaler.apply_row(r, &mut z);
                self.decision(&z)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;
    use rand::Rng as _;

    #[test]
    fn linear_kernel_fits_inside_the_tube() {
        let x = Matrix::from_vec(40, 1, (0..40).map(|i| i as f64 / 4.0).collect()).unwrap();
        let y: Vec<f64> = (0..40).map(|i| 2.0 * (i as f64 / 4.0) + 1.0).collect();
        let cfg = RegressorConfig {
            svr_kernel: Kernel::Linear,
            svr_c: 1000.0,
            svr_epsilon: 0.5,
            svr_tol: 1e-6,
            ..Default::default()
        };
        let (m, ok) = SvrModel::fit(&x, &y, &cfg).unwrap();
        assert!(ok);
        for (p, t) in m.predict(&x).iter().zip(&y) {
            assert!((p - t).abs() <= 0.5 + 1e-5, "{p} vs {t}");
        }
    }

    #[test]
    fn wide_tube_gives_constant_midpoint() {
        let x = Matrix::from_vec(20, 2, (0..40).map(|i| (i % 7) as f64).collect()).unwrap();
        let y: Vec<f64> = (0..20).map(|i| (i % 5) as f64).collect();
        let cfg = RegressorConfig {
            svr_epsilon: 3.0,
            ..Default::default()
        };
        let (m, ok) = SvrModel::fit(&x, &y, &cfg).unwrap();
        assert!(ok);
        assert_eq!(m.support_count(), 0);
        assert!((m.predict_row(&[1.0, 1.0]) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn rbf_tracks_smooth_target() {
        let mut rng = seed::rng(2);
        let x = Matrix::from_vec(300, 2, (0..600).map(|_| rng.random_range(-2.0..2.0)).collect()).unwrap();
        let y: Vec<f64> = (0..300).map(|i| x.get(i, 0).sin() + 0.5 * x.get(i, 1)).collect();
        let (m, ok) = SvrModel::fit(&x, &y, &RegressorConfig::default()).unwrap();
        assert!(ok);
        let pred = m.predict(&x);
        let mse = pred.iter().zip(&y).map(|(p, t)| (p - t).powi(2)).sum::<f64>() / 300.0;
        assert!(mse < 0.02, "mse {mse}");
        // eps-tube keeps only part of the data as support vectors
        assert!(m.support_count() < 300);
    }

    #[test]
    fn tiny_cache_matches_large_cache() {
        let mut rng = seed::rng(3);
        let x = Matrix::from_vec(80, 3, (0..240).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
        let y: Vec<f64> = (0..80).map(|i| x.get(i, 0) * x.get(i, 1) * 3.0).collect();
        let big = SvrModel::fit(&x, &y, &RegressorConfig::default()).unwrap().0;
        let small_cfg = RegressorConfig {
            svr_cache_mb: 0,
            ..Default::default()
        };
        let small = SvrModel::fit(&x, &y, &small_cfg).unwrap().0;
        assert_eq!(big.predict(&x), small.predict(&x));
    }

    #[test]
    fn constant_target_is_degenerate() {
        let x = Matrix::from_rows(&[[1.0], [2.0]]).unwrap();
        assert!(matches!(
            SvrModel::fit(&x, &[3.0, 3.0], &RegressorConfig::default()),
            Err(Error::DegenerateFit(_))
        ));
    }
}
