//! One-hidden-layer ReLU perceptron trained with Adam on squared loss.

use rand::seq::SliceRandom;
use rand::Rng as _;

use super::scale::Standardizer;
use super::RegressorConfig;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::seed;

/// `ŷ = b2 + Σ_k w2[k] · relu(b1[k] + Σ_i w1[k, i] x[i])`.
///
/// Parameters live in one flat vector laid out as `[w1 (hidden × inputs,
/// row-major), b1, w2, b2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub inputs: usize,
    pub hidden: usize,
    theta: Vec<f64>,
}

impl Network {
    pub fn param_count(inputs: usize, hidden: usize) -> usize {
        hidden * inputs + 2 * hidden + 1
    }

    /// Uniform initialization with bound `sqrt(6 / fan_in)` per layer.
    pub fn random(inputs: usize, hidden: usize, seed: u64) -> Self {
        let mut rng = seed::rng(seed);
        let b_in = (6.0 / inputs as f64).sqrt();
        let b_hid = (6.0 / hidden as f64).sqrt();
        let mut theta = Vec::with_capacity(Self::param_count(inputs, hidden));
        for _ in 0..hidden * inputs + hidden {
            theta.push(rng.random_range(-b_in..b_in));
        }
        for _ in 0..hidden + 1 {
            theta.push(rng.random_range(-b_hid..b_hid));
        }
        Self { inputs, hidden, theta }
    }

    pub fn from_params(inputs: usize, hidden: usize, theta: Vec<f64>) -> Result<Self> {
        if theta.len() != Self::param_count(inputs, hidden) {
            return Err(Error::DimensionMismatch {
                expected: Self::param_count(inputs, hidden),
                got: theta.len(),
            });
        }
        Ok(Self { inputs, hidden, theta })
    }

    pub fn params(&self) -> &[f64] {
        &self.theta
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.theta
    }

    #[inline]
    fn split(&self) -> (&[f64], &[f64], &[f64], f64) {
        let (w1, rest) = self.theta.split_at(self.hidden * self.inputs);
        let (b1, rest) = rest.split_at(self.hidden);
        let (w2, rest) = rest.split_at(self.hidden);
        (w1, b1, w2, rest[0])
    }

    pub fn forward(&self, x: &[f64]) -> f64 {
        let (w1, b1, w2, b2) = self.split();
        let mut out = b2;
        for k in 0..self.hidden {
            let row = &w1[k * self.inputs..(k + 1) * self.inputs];
            let a = b1[k] + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
            if a > 0.0 {
                out += w2[k] * a;
            }
        }
        out
    }

    /// Loss `(1/2B) Σ (ŷ − y)² + (l2/2B) ‖W‖²` over the rows `idx` and its
    /// gradient, written into `grad`. Biases are not penalized.
    pub fn loss_and_gradient_rows(&self, x: &Matrix, y: &[f64], idx: &[usize], l2: f64, grad: &mut [f64]) -> f64 {
        let (f, h) = (self.inputs, self.hidden);
        let batch = idx.len() as f64;
        grad.iter_mut().for_each(|g| *g = 0.0);
        let (w1, b1, w2, b2) = self.split();
        let mut act = vec![0.0; h];
        let mut loss = 0.0;
        {
            let (gw1, rest) = grad.split_at_mut(h * f);
            let (gb1, rest) = rest.split_at_mut(h);
            let (gw2, gb2) = rest.split_at_mut(h);
            for &i in idx {
                let xi = x.row(i);
                let mut out = b2;
                for k in 0..h {
                    let row = &w1[k * f..(k + 1) * f];
                    act[k] = b1[k] + row.iter().zip(xi).map(|(w, v)| w * v).sum::<f64>();
                    if act[k] > 0.0 {
                        out += w2[k] * act[k];
                    }
                }
                let err = out - y[i];
                loss += err * err;
                let d = err / batch;
                gb2[0] += d;
                for k in 0..h {
                    if act[k] > 0.0 {
                        gw2[k] += d * act[k];
                        let dk = d * w2[k];
                        gb1[k] += dk;
                        for (g, v) in gw1[k * f..(k + 1) * f].iter_mut().zip(xi) {
                            *g += dk * v;
                        }
                    }
                }
            }
        }
        let mut penalty = 0.0;
        if l2 > 0.0 {
            for (g, w) in grad[..h * f].iter_mut().zip(w1) {
                *g += l2 * w / batch;
                penalty += w * w;
            }
            let off = h * f + h;
            for (g, w) in grad[off..off + h].iter_mut().zip(w2) {
                *g += l2 * w / batch;
                penalty += w * w;
            }
        }
        loss / (2.0 * batch) + l2 * penalty / (2.0 * batch)
    }

    pub fn loss_and_gradient(&self, x: &Matrix, y: &[f64], l2: f64) -> (f64, Vec<f64>) {
        let idx: Vec<usize> = (0..x.rows()).collect();
        let mut grad = vec![0.0; self.theta.len()];
        let loss = self.loss_and_gradient_rows(x, y, &idx, l2, &mut grad);
        (loss, grad)
    }

    fn mse_rows(&self, x: &Matrix, y: &[f64], idx: &[usize]) -> f64 {
        idx.iter().map(|&i| (self.forward(x.row(i)) - y[i]).powi(2)).sum::<f64>() / idx.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    pub scaler: Standardizer,
    pub net: Network,
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl MlpModel {
    pub fn fit(x: &Matrix, y: &[f64], cfg: &RegressorConfig, seed: u64) -> Result<(Self, bool)> {
        if cfg.mlp_hidden == 0 || cfg.mlp_batch == 0 || !(cfg.mlp_learning_rate > 0.0) {
            return Err(Error::InvalidParameter("MLP needs hidden > 0, batch > 0, learning rate > 0".into()));
        }
        let n = x.rows();
        let scaler = Standardizer::fit(x);
        let xs = scaler.transform(x);
        let mut rng = seed::rng(seed);
        let mut net = Network::random(x.cols(), cfg.mlp_hidden, rng.random());

        let mut order: Vec<usize> = (0..n).collect();
        let n_val = if cfg.mlp_early_stopping {
            (cfg.mlp_validation_fraction * n as f64).floor() as usize
        } else {
            0
        };
        let (val, train) = if n_val >= 1 && n - n_val >= 1 {
            order.shuffle(&mut rng);
            let (v, t) = order.split_at(n_val);
            (v.to_vec(), t.to_vec())
        } else {
            (Vec::new(), order)
        };
        let mut train = train;
        let batch = cfg.mlp_batch.min(train.len());

        let p = net.params().len();
        let mut adam = Adam {
            m: vec![0.0; p],
            v: vec![0.0; p],
            t: 0,
        };
        let mut grad = vec![0.0; p];
        let mut best_loss = f64::INFINITY;
        let mut best_params = net.params().to_vec();
        let mut stale = 0;
        let mut converged = false;

        for _ in 0..cfg.mlp_max_epochs {
            train.shuffle(&mut rng);
            let mut epoch_loss = 0.0;
            for chunk in train.chunks(batch) {
                let loss = net.loss_and_gradient_rows(&xs, y, chunk, cfg.mlp_l2, &mut grad);
                epoch_loss += loss * chunk.len() as f64;
                adam.t += 1;
                let lr = cfg.mlp_learning_rate * (1.0 - cfg.mlp_beta2.powi(adam.t)).sqrt()
                    / (1.0 - cfg.mlp_beta1.powi(adam.t));
                for (((w, g), m), v) in net
                    .params_mut()
                    .iter_mut()
                    .zip(&grad)
                    .zip(adam.m.iter_mut())
                    .zip(adam.v.iter_mut())
                {
                    *m = cfg.mlp_beta1 * *m + (1.0 - cfg.mlp_beta1) * g;
                    *v = cfg.mlp_beta2 * *v + (1.0 - cfg.mlp_beta2) * g * g;
                    *w -= lr * *m / (v.sqrt() + cfg.mlp_epsilon);
                }
            }
            let monitored = if val.is_empty() {
                epoch_loss / train.len() as f64
            } else {
                net.mse_rows(&xs, y, &val)
            };
            if !monitored.is_finite() {
                return Err(Error::DegenerateFit("MLP loss diverged".into()));
            }
            if monitored < best_loss - cfg.mlp_tol {
                stale = 0;
            } else {
                stale += 1;
            }
            if monitored < best_loss {
                best_loss = monitored;
                best_params.copy_from_slice(net.params());
            }
            if stale >= cfg.mlp_patience {
                converged = true;
                break;
            }
        }
        if !val.is_empty() {
            net.params_mut().copy_from_slice(&best_params);
        }
        Ok((Self { scaler, net }, converged))
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut z = vec![0.0; row.len()];
        self.scaler.apply_row(row, &mut z);
        self.net.forward(&z)
    }

    pub fn predict(&self, x: &Matrix) -> Vec<f64> {
        let mut z = vec![0.0; x.cols()];
        x.iter_rows()
            .map(|r| {
                self.scaler.apply_row(r, &mut z);
                self.net.forward(&z)
            })
            .collect()
    }
}
