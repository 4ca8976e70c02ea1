//! Channel strengths, power exponents and the TIN GDoF / SINR arithmetic.
//!
//! Matrices are stored row-major with rows indexing transmitters and columns
//! indexing receivers: entry `(i, j)` is the link Tx-i -> Rx-j.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// K x K matrix of channel strength exponents (log-P scale).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelMatrix {
    k: usize,
    alpha: Vec<f64>,
}

impl ChannelMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let k = rows.len();
        if k == 0 {
            return Err(Error::InvalidChannel("at least one user is required".into()));
        }
        let mut alpha = Vec::with_capacity(k * k);
        for row in rows {
            if row.len() != k {
                return Err(Error::InvalidChannel(format!(
                    "matrix is not square: row of length {} for {k} users",
                    row.len()
                )));
            }
            alpha.extend(row);
        }
        Self::from_flat(k, alpha)
    }

    pub fn from_flat(k: usize, alpha: Vec<f64>) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidChannel("at least one user is required".into()));
        }
        if alpha.len() != k * k {
            return Err(Error::ShapeError { expected: k * k, got: alpha.len() });
        }
        if let Some(x) = alpha.iter().find(|x| !x.is_finite() || **x < 0.0) {
            return Err(Error::InvalidChannel(format!(
                "strength exponents must be finite and non-negative, got {x}"
            )));
        }
        Ok(Self { k, alpha })
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn get(&self, tx: usize, rx: usize) -> f64 {
        self.alpha[tx * self.k + rx]
    }

    /// Matching weight: the cross strength off the diagonal, zero on it.
    #[inline]
    pub fn alpha_prime(&self, tx: usize, rx: usize) -> f64 {
        if tx == rx {
            0.0
        } else {
            self.get(tx, rx)
        }
    }

    #[inline]
    pub fn direct(&self, user: usize) -> f64 {
        self.get(user, user)
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.alpha.chunks(self.k).map(|r| r.to_vec()).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.alpha
    }

    pub fn check_index(&self, index: usize) -> Result<()> {
        if index < self.k {
            Ok(())
        } else {
            Err(Error::IndexError { index, k: self.k })
        }
    }

    /// Validates a user subset: non-empty, in range, no duplicates. Returns it sorted.
    pub fn normalize_subset(&self, subset: &[usize]) -> Result<Vec<usize>> {
        if subset.is_empty() {
            return Err(Error::InvalidSubset);
        }
        let mut s = subset.to_vec();
        for &u in &s {
            self.check_index(u)?;
        }
        s.sort_unstable();
        if s.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidSubset);
        }
        Ok(s)
    }

    pub fn all_users(&self) -> Vec<usize> {
        (0..self.k).collect()
    }
}

/// Per-user GDoF values; zero for inactive users.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GdofTuple(pub Vec<f64>);

impl GdofTuple {
    pub fn zeros(k: usize) -> Self {
        Self(vec![0.0; k])
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    /// Users with GDoF above `tol`.
    pub fn support(&self, tol: f64) -> Vec<usize> {
        self.0.iter().enumerate().filter(|(_, d)| **d > tol).map(|(i, _)| i).collect()
    }
}

impl std::ops::Deref for GdofTuple {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Transmit power exponents `r_k <= 0`: Tx-k sends at `P_k * P^{r_k}`.
/// `f64::NEG_INFINITY` marks a switched-off transmitter.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerAlloc(pub Vec<f64>);

impl PowerAlloc {
    pub fn full(k: usize) -> Self {
        Self(vec![0.0; k])
    }

    pub fn off(k: usize) -> Self {
        Self(vec![f64::NEG_INFINITY; k])
    }

    pub fn is_active(&self, user: usize) -> bool {
        self.0[user] > f64::NEG_INFINITY
    }

    /// Exponents mapped to linear fractions of the per-Tx maximum power.
    pub fn linear_fractions(&self, reference_power: f64) -> Vec<f64> {
        let lp = reference_power.ln();
        self.0.iter().map(|r| if r.is_finite() { (r * lp).exp() } else { 0.0 }).collect()
    }
}

impl std::ops::Deref for PowerAlloc {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Physical description of a K-pair network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysicalNetwork {
    pub k: usize,
    /// Linear power gains `G_ij = |h_ij|^2`, row-major (Tx, Rx).
    pub gains: Vec<f64>,
    /// Per-Tx power cap in watts.
    pub max_tx_power: Vec<f64>,
    pub noise_power: f64,
    /// SNR scale `P > 1` used to express strengths as exponents.
    pub reference_power: f64,
}

impl PhysicalNetwork {
    pub fn new(
        k: usize,
        gains: Vec<f64>,
        max_tx_power: Vec<f64>,
        noise_power: f64,
        reference_power: f64,
    ) -> Result<Self> {
        let net = Self { k, gains, max_tx_power, noise_power, reference_power };
        net.validate()?;
        Ok(net)
    }

    /// Network whose received SNR on every link is exactly `P^{alpha_ij}`
    /// (unit noise, unit power caps).
    pub fn from_strengths(alpha: &ChannelMatrix, reference_power: f64) -> Result<Self> {
        let k = alpha.k();
        let gains = alpha.as_slice().iter().map(|a| reference_power.powf(*a)).collect();
        Self::new(k, gains, vec![1.0; k], 1.0, reference_power)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidChannel("at least one user is required".into()));
        }
        if self.gains.len() != self.k * self.k {
            return Err(Error::ShapeError { expected: self.k * self.k, got: self.gains.len() });
        }
        if self.max_tx_power.len() != self.k {
            return Err(Error::ShapeError { expected: self.k, got: self.max_tx_power.len() });
        }
        if self.gains.iter().any(|g| !g.is_finite() || *g < 0.0) {
            return Err(Error::InvalidChannel("gains must be finite and non-negative".into()));
        }
        if self.max_tx_power.iter().any(|p| !p.is_finite() || *p <= 0.0) {
            return Err(Error::InvalidChannel("power caps must be positive".into()));
        }
        if !(self.noise_power.is_finite() && self.noise_power > 0.0) {
            return Err(Error::InvalidChannel("noise power must be positive".into()));
        }
        if !(self.reference_power.is_finite() && self.reference_power > 1.0) {
            return Err(Error::InvalidReferencePower(self.reference_power));
        }
        Ok(())
    }

    #[inline]
    pub fn gain(&self, tx: usize, rx: usize) -> f64 {
        self.gains[tx * self.k + rx]
    }

    /// Received SNR of link (tx, rx) at full power of `tx`.
    #[inline]
    pub fn full_power_snr(&self, tx: usize, rx: usize) -> f64 {
        self.gain(tx, rx) * self.max_tx_power[tx] / self.noise_power
    }

    /// Noise-normalized gain matrix `G_ij P_i / N` (row-major).
    pub fn normalized_gains(&self) -> Vec<f64> {
        (0..self.k * self.k).map(|e| self.full_power_snr(e / self.k, e % self.k)).collect()
    }

    /// Linear SINR per receiver given transmit powers in watts.
    pub fn sinr_at_powers(&self, powers_w: &[f64]) -> Vec<f64> {
        (0..self.k)
            .map(|j| {
                let interference: f64 = (0..self.k)
                    .filter(|&i| i != j)
                    .map(|i| self.gain(i, j) * powers_w[i])
                    .sum();
                self.gain(j, j) * powers_w[j] / (self.noise_power + interference)
            })
            .collect()
    }
}

/// `alpha_ij = log(max{1, G_ij P_i / N}) / log P`.
pub fn strength_from_physical(net: &PhysicalNetwork) -> Result<ChannelMatrix> {
    if !(net.reference_power.is_finite() && net.reference_power > 1.0) {
        return Err(Error::InvalidReferencePower(net.reference_power));
    }
    net.validate()?;
    let lp = net.reference_power.ln();
    let alpha = (0..net.k * net.k)
        .map(|e| net.full_power_snr(e / net.k, e % net.k).max(1.0).ln() / lp)
        .collect();
    ChannelMatrix::from_flat(net.k, alpha)
}

/// Per-user GDoF achieved by TIN under power exponents `r`:
/// `d_j = alpha_jj + r_j - max{0, max_{i != j}(alpha_ij + r_i)}`,
/// optionally clamped at zero.
pub fn achieved_gdof(alpha: &ChannelMatrix, r: &PowerAlloc, clamp: bool) -> Result<GdofTuple> {
    let k = alpha.k();
    if r.len() != k {
        return Err(Error::ShapeError { expected: k, got: r.len() });
    }
    let d = (0..k)
        .map(|j| {
            let interference = (0..k)
                .filter(|&i| i != j)
                .map(|i| alpha.get(i, j) + r[i])
                .fold(0.0_f64, f64::max);
            let dj = alpha.direct(j) + r[j] - interference;
            if clamp {
                dj.max(0.0)
            } else {
                dj
            }
        })
        .collect();
    Ok(GdofTuple(d))
}

/// Linear SINR at each receiver when Tx-i sends at `P_i * P^{r_i}`.
pub fn sinr(net: &PhysicalNetwork, r: &PowerAlloc) -> Result<Vec<f64>> {
    if r.len() != net.k {
        return Err(Error::ShapeError { expected: net.k, got: r.len() });
    }
    let fractions = r.linear_fractions(net.reference_power);
    let powers: Vec<f64> = fractions.iter().zip(&net.max_tx_power).map(|(f, p)| f * p).collect();
    Ok(net.sinr_at_powers(&powers))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn strength_definition() {
        let p = 1e6;
        let net = PhysicalNetwork::new(1, vec![p], vec![1.0], 1.0, p).unwrap();
        assert!(close(strength_from_physical(&net).unwrap().get(0, 0), 1.0, 1e-12));

        let net = PhysicalNetwork::new(1, vec![0.5], vec![1.0], 1.0, p).unwrap();
        assert_eq!(strength_from_physical(&net).unwrap().get(0, 0), 0.0);

        let net = PhysicalNetwork::new(1, vec![p * p], vec![1.0], 1.0, p).unwrap();
        assert!(close(strength_from_physical(&net).unwrap().get(0, 0), 2.0, 1e-12));
    }

    #[test]
    fn reference_power_must_exceed_one() {
        let net = PhysicalNetwork { k: 1, gains: vec![1.0], max_tx_power: vec![1.0], noise_power: 1.0, reference_power: 1.0 };
        assert_eq!(strength_from_physical(&net), Err(Error::InvalidReferencePower(1.0)));
    }

    #[test]
    fn example_one_power_gives_target() {
        let a = fixtures::fix_a();
        let d = achieved_gdof(&a, &PowerAlloc(vec![-1.2, -0.4, -0.7]), true).unwrap();
        for (x, y) in d.iter().zip([0.5, 0.6, 0.7]) {
            assert!(close(*x, y, 1e-12), "{d:?}");
        }
    }

    #[test]
    fn full_power_unclamped() {
        let a = fixtures::fix_a();
        let d = achieved_gdof(&a, &PowerAlloc::full(3), false).unwrap();
        for (x, y) in d.iter().zip([1.0, 0.5, 1.0]) {
            assert!(close(*x, y, 1e-12));
        }
        assert_eq!(d, achieved_gdof(&a, &PowerAlloc::full(3), true).unwrap());
    }

    #[test]
    fn single_user_has_no_interference() {
        let a = ChannelMatrix::new(vec![vec![1.7]]).unwrap();
        assert_eq!(achieved_gdof(&a, &PowerAlloc(vec![0.0]), true).unwrap().0, vec![1.7]);
    }

    #[test]
    fn shape_errors() {
        let a = fixtures::fix_a();
        assert!(matches!(achieved_gdof(&a, &PowerAlloc(vec![0.0]), true), Err(Error::ShapeError { .. })));
        assert!(ChannelMatrix::new(vec![vec![1.0, 2.0]]).is_err());
        assert!(ChannelMatrix::new(vec![vec![-1.0]]).is_err());
    }

    #[test]
    fn sinr_examples() {
        let one = ChannelMatrix::new(vec![vec![1.0]]).unwrap();
        let net = PhysicalNetwork::from_strengths(&one, 100.0).unwrap();
        assert!(close(sinr(&net, &PowerAlloc::full(1)).unwrap()[0], 100.0, 1e-9));

        let p = 1e6;
        let net = PhysicalNetwork::from_strengths(&fixtures::fix_a(), p).unwrap();
        let s = sinr(&net, &PowerAlloc(vec![-1.2, -0.4, -0.7])).unwrap();
        for (x, y) in s.iter().zip([0.5, 0.6, 0.7]) {
            assert!(close(x.ln() / p.ln(), y, 0.05), "{s:?}");
        }

        let sym = ChannelMatrix::new(vec![vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let net = PhysicalNetwork::from_strengths(&sym, p).unwrap();
        let s = sinr(&net, &PowerAlloc::full(2)).unwrap();
        assert!(s[0] < 1.0 && close(s[0], p / (1.0 + p), 1e-12));
    }

    fn alpha_strategy(k: usize) -> impl Strategy<Value = ChannelMatrix> {
        proptest::collection::vec(0.0f64..2.0, k * k).prop_map(move |v| ChannelMatrix::from_flat(k, v).unwrap())
    }

    proptest! {
        #[test]
        fn clamp_is_positive_part(
            (a, r) in (1usize..6).prop_flat_map(|k| (alpha_strategy(k), proptest::collection::vec(-2.0f64..0.0, k)))
        ) {
            let r = PowerAlloc(r);
            let on = achieved_gdof(&a, &r, true).unwrap();
            let off = achieved_gdof(&a, &r, false).unwrap();
            for (x, y) in on.iter().zip(off.iter()) {
                prop_assert_eq!(*x, y.max(0.0));
            }
        }

        #[test]
        fn raising_power_hurts_others(
            (a, r, who, step) in (2usize..6).prop_flat_map(|k| (
                alpha_strategy(k),
                proptest::collection::vec(-2.0f64..-0.5, k),
                0..k,
                0.0f64..0.5,
            ))
        ) {
            let before = achieved_gdof(&a, &PowerAlloc(r.clone()), false).unwrap();
            let mut r2 = r;
            r2[who] += step;
            let after = achieved_gdof(&a, &PowerAlloc(r2), false).unwrap();
            for j in 0..a.k() {
                if j != who {
                    prop_assert!(after[j] <= before[j] + 1e-12);
                }
            }
        }

        #[test]
        fn log_sinr_tracks_gdof(
            (a, r) in (1usize..6).prop_flat_map(|k| (alpha_strategy(k), proptest::collection::vec(-1.0f64..0.0, k))),
            log10_p in 2.0f64..8.0,
        ) {
            let p = 10f64.powf(log10_p);
            let net = PhysicalNetwork::from_strengths(&a, p).unwrap();
            let r = PowerAlloc(r);
            let s = sinr(&net, &r).unwrap();
            let d = achieved_gdof(&a, &r, false).unwrap();
            let bound = (a.k() as f64).ln() / p.ln() + 1e-9;
            for j in 0..a.k() {
                prop_assert!((s[j].ln() / p.ln() - d[j]).abs() <= bound);
            }
        }
    }
}
