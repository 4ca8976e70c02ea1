//! High-SNR geometric-programming power control.
//!
//! In log-power variables `x_i = ln(P_i / Pmax_i)` the problem
//! `min prod t_i^{w_i}` s.t. `(1 + sum_{j != i} g_ji P_j) / (g_ii P_i) <= t_i`
//! becomes the concave maximization of
//! `f(x) = sum_i w_i (ln g_ii + x_i - ln(1 + sum_{j != i} g_ji e^{x_j}))` over `x <= 0`,
//! with `g` the noise-normalized full-power gains.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{ChannelMatrix, PhysicalNetwork};
use crate::optimize::lp::{max_weighted_gdof_lp, weighted_users};

/// Lower bound on log-power fractions.
pub const LOG_POWER_FLOOR: f64 = -100.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GpConfig {
    pub max_iter: usize,
    /// Stop once the projected gradient's largest entry falls below this.
    pub tol: f64,
}

impl Default for GpConfig {
    fn default() -> Self {
        Self { max_iter: 500, tol: 1e-10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GpSolution {
    /// Transmit power as a fraction of each cap, in `(0, 1]`; 0 for users left off.
    pub powers: Vec<f64>,
    pub sinr: Vec<f64>,
    /// `sum w_k log2(1 + SINR_k)`, bits per channel use.
    pub objective: f64,
    /// `sum w_k log2 SINR_k`, the quantity the program maximizes.
    pub log_sinr_objective: f64,
    /// `prod t_k^{w_k}` with `t_k = 1 / SINR_k`.
    pub product_t: f64,
    pub t: Vec<f64>,
    pub users: Vec<usize>,
    pub iterations: usize,
}

/// Noise-normalized gains restricted to `users`: `g[a][b]` from `users[a]` to `users[b]`.
fn local_gains(net: &PhysicalNetwork, users: &[usize]) -> Vec<Vec<f64>> {
    users
        .iter()
        .map(|&i| users.iter().map(|&j| net.full_power_snr(i, j)).collect())
        .collect()
}

struct LogProblem<'a> {
    g: &'a [Vec<f64>],
    w: &'a [f64],
}

impl LogProblem<'_> {
    fn n(&self) -> usize {
        self.w.len()
    }

    /// `q_i = 1 + sum_{j != i} g_ji e^{x_j}`.
    fn q(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n();
        (0..n)
            .map(|i| 1.0 + (0..n).filter(|&j| j != i).map(|j| self.g[j][i] * x[j].exp()).sum::<f64>())
            .collect()
    }

    fn value(&self, x: &[f64]) -> f64 {
        let q = self.q(x);
        (0..self.n())
            .map(|i| self.w[i] * (self.g[i][i].ln() + x[i] - q[i].ln()))
            .sum()
    }

    fn grad_hess(&self, x: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
        let n = self.n();
        let q = self.q(x);
        let mut grad = DVector::from_column_slice(self.w);
        let mut hess = DMatrix::zeros(n, n);
        for i in 0..n {
            let s: Vec<f64> = (0..n)
                .map(|j| if j == i { 0.0 } else { self.g[j][i] * x[j].exp() / q[i] })
                .collect();
            for k in 0..n {
                grad[k] -= self.w[i] * s[k];
                hess[(k, k)] -= self.w[i] * s[k];
                for l in 0..n {
                    hess[(k, l)] += self.w[i] * s[k] * s[l];
                }
            }
        }
        (grad, hess)
    }
}

fn is_free(x: f64, g: f64) -> bool {
    !((x >= 0.0 && g > 0.0) || (x <= LOG_POWER_FLOOR && g < 0.0))
}

fn projected_grad_norm(x: &[f64], grad: &DVector<f64>) -> f64 {
    x.iter()
        .zip(grad.iter())
        .map(|(&xi, &gi)| if is_free(xi, gi) { gi.abs() } else { 0.0 })
        .fold(0.0, f64::max)
}

/// Projected Newton ascent with an active set, Levenberg damping and Armijo backtracking.
fn maximize(p: &LogProblem, cfg: GpConfig) -> Result<(Vec<f64>, usize)> {
    let n = p.n();
    let mut x = vec![0.0; n];
    let mut fx = p.value(&x);
    let scale = p.w.iter().sum::<f64>().max(1.0);
    for iter in 0..cfg.max_iter {
        let (grad, hess) = p.grad_hess(&x);
        if projected_grad_norm(&x, &grad) <= cfg.tol * scale {
            return Ok((x, iter));
        }
        let free: Vec<usize> = (0..n).filter(|&k| is_free(x[k], grad[k])).collect();
        let m = free.len();
        let g_f = DVector::from_iterator(m, free.iter().map(|&k| grad[k]));
        let neg_h = DMatrix::from_fn(m, m, |a, b| -hess[(free[a], free[b])]);
        let mut mu = 1e-10 * (1.0 + neg_h.diagonal().amax());
        let dir = loop {
            let damped = &neg_h + DMatrix::identity(m, m) * mu;
            if let Some(ch) = damped.cholesky() {
                break ch.solve(&g_f);
            }
            mu *= 10.0;
            if mu > 1e12 {
                break g_f.clone();
            }
        };
        let slope = g_f.dot(&dir);
        let mut step = 1.0;
        let mut improved = false;
        for _ in 0..60 {
            let mut trial = x.clone();
            for (a, &k) in free.iter().enumerate() {
                trial[k] = (x[k] + step * dir[a]).clamp(LOG_POWER_FLOOR, 0.0);
            }
            let ft = p.value(&trial);
            let gain: f64 = free.iter().map(|&k| grad[k] * (trial[k] - x[k])).sum();
            if ft >= fx + 1e-4 * gain.min(step * slope) {
                improved = ft > fx || trial == x;
                x = trial;
                fx = ft;
                break;
            }
            step *= 0.5;
        }
        if !improved {
            // No ascent left at machine precision.
            return Ok((x, iter));
        }
    }
    let (grad, _) = p.grad_hess(&x);
    if projected_grad_norm(&x, &grad) <= 1e3 * cfg.tol * scale {
        return Ok((x, cfg.max_iter));
    }
    Err(Error::ConvergenceFailure { solver: "gp", iterations: cfg.max_iter })
}

/// Log-domain objective `sum w ln SINR` at log-power fractions `x` (users in subset order).
pub fn log_domain_objective(net: &PhysicalNetwork, users: &[usize], w: &[f64], x: &[f64]) -> f64 {
    let g = local_gains(net, users);
    let wl: Vec<f64> = users.iter().map(|&u| w[u]).collect();
    LogProblem { g: &g, w: &wl }.value(x)
}

pub fn gp_power_control(net: &PhysicalNetwork, subset: &[usize], w: &[f64]) -> Result<GpSolution> {
    gp_power_control_with(net, subset, w, GpConfig::default())
}

pub fn gp_power_control_with(net: &PhysicalNetwork, subset: &[usize], w: &[f64], cfg: GpConfig) -> Result<GpSolution> {
    net.validate()?;
    let shape = ChannelMatrix::from_flat(net.k, vec![0.0; net.k * net.k])?;
    let users = weighted_users(&shape, subset, w)?;
    for &u in &users {
        if !(net.gain(u, u) > 0.0) {
            return Err(Error::InvalidChannel(format!("user {u} has no direct gain")));
        }
    }
    let g = local_gains(net, &users);
    let wl: Vec<f64> = users.iter().map(|&u| w[u]).collect();
    let (x, iterations) = if users.is_empty() {
        (Vec::new(), 0)
    } else {
        maximize(&LogProblem { g: &g, w: &wl }, cfg)?
    };

    let mut powers = vec![0.0; net.k];
    for (a, &u) in users.iter().enumerate() {
        powers[u] = x[a].exp();
    }
    let watts: Vec<f64> = powers.iter().zip(&net.max_tx_power).map(|(f, p)| f * p).collect();
    let sinr = net.sinr_at_powers(&watts);
    let t: Vec<f64> = sinr.iter().map(|s| if *s > 0.0 { 1.0 / s } else { f64::INFINITY }).collect();
    let mut objective = 0.0;
    let mut log_sinr_objective = 0.0;
    let mut ln_product_t = 0.0;
    for &u in &users {
        objective += w[u] * sinr[u].ln_1p() / std::f64::consts::LN_2;
        log_sinr_objective += w[u] * sinr[u].log2();
        ln_product_t += w[u] * t[u].ln();
    }
    Ok(GpSolution {
        powers,
        sinr,
        objective,
        log_sinr_objective,
        product_t: ln_product_t.exp(),
        t,
        users,
        iterations,
    })
}

/// `|sum w log(1+SINR) / log P - LP optimum|` for the GP solution against the LP over
/// the strengths `alpha = log_P SNR` of the same network.
pub fn gp_gdof_equivalence_gap(net: &PhysicalNetwork, subset: &[usize], w: &[f64]) -> Result<f64> {
    let gp = gp_power_control(net, subset, w)?;
    let alpha = crate::model::strength_from_physical(net)?;
    let (_, lp) = max_weighted_gdof_lp(&alpha, subset, w)?;
    let rate: f64 = gp.users.iter().map(|&u| w[u] * gp.sinr[u].ln_1p()).sum();
    Ok((rate / net.reference_power.ln() - lp).abs())
}
