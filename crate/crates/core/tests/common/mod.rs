//! Random instance generators shared by the integration tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tin_gdof::model::{achieved_gdof, ChannelMatrix, GdofTuple, PowerAlloc};
use tin_gdof::region;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Every entry uniform in `[0, 2)`.
pub fn random_alpha(rng: &mut impl Rng, k: usize) -> ChannelMatrix {
    ChannelMatrix::from_flat(k, (0..k * k).map(|_| rng.random_range(0.0..2.0)).collect()).unwrap()
}

/// Direct links in `[1, 2)`, cross links in `[0, cross_max)`, each cross link
/// zeroed with probability `p_zero`.
pub fn weak_alpha(rng: &mut impl Rng, k: usize, cross_max: f64, p_zero: f64) -> ChannelMatrix {
    let mut v = vec![0.0; k * k];
    for tx in 0..k {
        for rx in 0..k {
            v[tx * k + rx] = if tx == rx {
                rng.random_range(1.0..2.0)
            } else if rng.random_bool(p_zero) {
                0.0
            } else {
                rng.random_range(0.0..cross_max)
            };
        }
    }
    ChannelMatrix::from_flat(k, v).unwrap()
}

/// Rejection sample satisfying the relaxed condition for every user.
pub fn c1_alpha(rng: &mut impl Rng, k: usize) -> ChannelMatrix {
    // Shrink the cross range after repeated rejections; large K rarely passes at 1.0.
    let mut cross_max = 1.0;
    loop {
        for _ in 0..50 {
            let a = weak_alpha(rng, k, cross_max, 0.2);
            if region::c1_holds_on(&a, &a.all_users()) {
                return a;
            }
        }
        cross_max *= 0.9;
    }
}

/// Rejection sample satisfying both the relaxed condition and the zero-edge condition.
pub fn c1_c2_alpha(rng: &mut impl Rng, k: usize) -> ChannelMatrix {
    loop {
        let a = weak_alpha(rng, k, 1.0, 0.5);
        let rep = region::check_conditions(&a);
        if rep.all_c1() && rep.c2.holds() {
            return a;
        }
    }
}

/// A target reached by random powers, some users switched off, near-zero entries dropped.
pub fn feasible_target(rng: &mut impl Rng, alpha: &ChannelMatrix) -> GdofTuple {
    loop {
        // Switching users off keeps weak-direct networks from stalling the loop.
        let r = PowerAlloc(
            (0..alpha.k())
                .map(|_| if rng.random_bool(0.25) { f64::NEG_INFINITY } else { rng.random_range(-1.0..=0.0) })
                .collect(),
        );
        let mut d = achieved_gdof(alpha, &r, true).unwrap();
        for x in d.0.iter_mut() {
            if *x < 1e-6 {
                *x = 0.0;
            }
        }
        if d.sum() > 0.0 {
            return d;
        }
    }
}

/// Non-empty subset drawn from the bits of a random mask.
pub fn random_subset(rng: &mut impl Rng, k: usize) -> Vec<usize> {
    let mask = rng.random_range(1u32..(1 << k));
    (0..k).filter(|u| mask >> u & 1 == 1).collect()
}
