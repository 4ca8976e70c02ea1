//! Decentralized weighted sum-GDoF power control by dual decomposition.
//!
//! Rx-i keeps local copies `z_ji` of the received exponents `alpha_ji + r_j` and
//! Tx-j keeps `r_j`; duals `gamma_ji` price the coupling `z_ji = alpha_ji + r_j`.
//! A quadratic penalty `rho/2 (z_ji - alpha_ji - r_j)^2` keeps the local problems
//! bounded, so each local step has a closed form.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::model::{achieved_gdof, ChannelMatrix, GdofTuple, PowerAlloc};
use crate::optimize::lp::weighted_users;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum StepSchedule {
    /// `delta(t) = delta0 / sqrt(t)`.
    InvSqrt(f64),
    Constant(f64),
}

impl StepSchedule {
    pub fn at(self, t: usize) -> f64 {
        match self {
            StepSchedule::InvSqrt(d0) => d0 / (t.max(1) as f64).sqrt(),
            StepSchedule::Constant(d) => d,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DgpConfig {
    pub step: StepSchedule,
    pub iters: usize,
    /// Penalty weight of the coupling residual.
    pub rho: f64,
    /// Lowest power exponent a transmitter may choose.
    pub r_floor: f64,
    /// Stop early once the coupling residual falls below this.
    pub tol: f64,
    /// Consecutive residual increases treated as divergence.
    pub divergence_window: usize,
}

impl Default for DgpConfig {
    fn default() -> Self {
        Self {
            step: StepSchedule::InvSqrt(0.5),
            iters: 5000,
            rho: 0.5,
            r_floor: -10.0,
            tol: 1e-9,
            divergence_window: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DgpResult {
    pub r: PowerAlloc,
    pub d: GdofTuple,
    pub objective: f64,
    /// `sum |z_ji - alpha_ji - r_j|` at the last iterate.
    pub residual: f64,
    pub iterations: usize,
}

/// `argmin_z lambda * max(0, max_j z_j) + 1/2 |z - v|^2`.
fn prox_max_plus(v: &[f64], lambda: f64) -> Vec<f64> {
    let top = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top <= 0.0 {
        return v.to_vec();
    }
    let pos_mass: f64 = v.iter().map(|x| x.max(0.0)).sum();
    let tau = if pos_mass <= lambda {
        0.0
    } else {
        // Solve sum (v - tau)_+ = lambda over tau in [0, top].
        let mut sorted: Vec<f64> = v.iter().copied().filter(|x| *x > 0.0).collect();
        sorted.sort_by(|a, b| b.total_cmp(a));
        let mut acc = 0.0;
        let mut tau = 0.0;
        for (m, &x) in sorted.iter().enumerate() {
            acc += x;
            let cand = (acc - lambda) / (m + 1) as f64;
            let next = sorted.get(m + 1).copied().unwrap_or(0.0);
            if cand >= next {
                tau = cand;
                break;
            }
        }
        tau.max(0.0)
    };
    v.iter().map(|x| x.min(tau)).collect()
}

pub fn decentralized_gp(alpha: &ChannelMatrix, subset: &[usize], w: &[f64], cfg: DgpConfig) -> Result<DgpResult> {
    decentralized_gp_with(alpha, subset, w, cfg, Exec::Sequential)
}

/// Runs the local steps of all users through `exec`; results do not depend on it.
pub fn decentralized_gp_with(
    alpha: &ChannelMatrix,
    subset: &[usize],
    w: &[f64],
    cfg: DgpConfig,
    exec: Exec,
) -> Result<DgpResult> {
    if !(cfg.rho > 0.0) || !(cfg.step.at(1) > 0.0) || !(cfg.r_floor < 0.0) {
        return Err(Error::InvalidArgument("rho, step size must be positive and the power floor negative".into()));
    }
    let users = weighted_users(alpha, subset, w)?;
    let n = users.len();
    let k = alpha.k();
    let finish = |r_local: &[f64], residual: f64, iterations: usize| -> Result<DgpResult> {
        let mut r = PowerAlloc::off(k);
        for (a, &u) in users.iter().enumerate() {
            r.0[u] = r_local[a].min(0.0);
        }
        let d = achieved_gdof(alpha, &r, true)?;
        let objective = d.iter().zip(w).map(|(x, wi)| x * wi).sum();
        Ok(DgpResult { r, d, objective, residual, iterations })
    };
    if n <= 1 {
        return finish(&vec![0.0; n], 0.0, 0);
    }

    let a = |tx: usize, rx: usize| alpha.get(users[tx], users[rx]);
    let wl: Vec<f64> = users.iter().map(|&u| w[u]).collect();
    let rho = cfg.rho;
    let mut r = vec![0.0; n];
    // z[i][j], gamma[i][j]: copy held by Rx-i of the exponent from Tx-j.
    let mut z = vec![vec![0.0; n]; n];
    let mut gamma = vec![vec![0.0; n]; n];
    let mut last_residual = f64::INFINITY;
    let mut rising = 0usize;
    let mut residual = f64::INFINITY;

    for t in 1..=cfg.iters {
        // Rx step: each receiver refreshes its copies from the current powers.
        z = exec.map_range(n, |i| {
            let others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
            let v: Vec<f64> = others.iter().map(|&j| a(j, i) + r[j] - gamma[i][j] / rho).collect();
            let zi = prox_max_plus(&v, wl[i] / rho);
            let mut row = vec![0.0; n];
            for (m, &j) in others.iter().enumerate() {
                row[j] = zi[m];
            }
            row
        });
        // Tx step: each transmitter balances its own weight against the copies.
        r = exec.map_range(n, |j| {
            let mut num = 0.0;
            let mut dual = 0.0;
            for i in (0..n).filter(|&i| i != j) {
                num += z[i][j] - a(j, i);
                dual += gamma[i][j];
            }
            ((num + (wl[j] + dual) / rho) / (n - 1) as f64).clamp(cfg.r_floor, 0.0)
        });
        let delta = cfg.step.at(t);
        residual = 0.0;
        for i in 0..n {
            for j in (0..n).filter(|&j| j != i) {
                let gap = z[i][j] - a(j, i) - r[j];
                gamma[i][j] += delta * gap;
                residual += gap.abs();
            }
        }
        if !residual.is_finite() {
            return Err(Error::DivergenceDetected { step: t, residual });
        }
        if residual > last_residual {
            rising += 1;
            if rising >= cfg.divergence_window {
                return Err(Error::DivergenceDetected { step: t, residual });
            }
        } else {
            rising = 0;
        }
        last_residual = residual;
        if residual <= cfg.tol {
            return finish(&r, residual, t);
        }
    }
    finish(&r, residual, cfg.iters)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::fix_b;
    use crate::optimize::lp::max_weighted_gdof_lp;

    #[test]
    fn prox_cases() {
        assert_eq!(prox_max_plus(&[-1.0, -0.5], 3.0), vec![-1.0, -0.5]);
        assert_eq!(prox_max_plus(&[0.5, -1.0], 1.0), vec![0.0, -1.0]);
        let z = prox_max_plus(&[2.0, 1.0, -1.0], 1.0);
        // sum (v - tau)_+ = 1 gives tau = 1.
        assert!((z[0] - 1.0).abs() < 1e-12 && (z[1] - 1.0).abs() < 1e-12 && z[2] == -1.0);
        let z = prox_max_plus(&[3.0, 1.0], 1.0);
        assert!((z[0] - 2.0).abs() < 1e-12 && z[1] == 1.0);
    }

    #[test]
    fn single_user_is_immediate() {
        let a = ChannelMatrix::new(vec![vec![1.7]]).unwrap();
        let res = decentralized_gp(&a, &[0], &[1.0], DgpConfig::default()).unwrap();
        assert_eq!(res.r.0, vec![0.0]);
        assert_eq!(res.d.0, vec![1.7]);
    }

    #[test]
    fn reaches_lp_on_example_two() {
        let res = decentralized_gp(&fix_b(), &[0, 1, 2], &[1.0; 3], DgpConfig::default()).unwrap();
        assert!((res.d.sum() - 1.8).abs() <= 0.05, "{:?} residual {}", res.d, res.residual);
    }

    #[test]
    fn weak_interference_pair() {
        let a = ChannelMatrix::new(vec![vec![1.0, 0.1], vec![0.1, 1.0]]).unwrap();
        let (_, lp) = max_weighted_gdof_lp(&a, &[0, 1], &[1.0, 1.0]).unwrap();
        assert!((lp - 1.8).abs() < 1e-9);
        let res = decentralized_gp(&a, &[0, 1], &[1.0, 1.0], DgpConfig::default()).unwrap();
        assert!((res.d.sum() - lp).abs() <= 0.05, "{:?}", res.d);
    }

    #[test]
    fn exec_modes_agree() {
        let cfg = DgpConfig { iters: 300, ..DgpConfig::default() };
        let s = decentralized_gp_with(&fix_b(), &[0, 1, 2], &[1.0; 3], cfg, Exec::Sequential).unwrap();
        let p = decentralized_gp_with(&fix_b(), &[0, 1, 2], &[1.0; 3], cfg, Exec::Parallel).unwrap();
        assert_eq!(s, p);
    }
}
