//! GP power control followed by the minimum-power assignment step.
//!
//! The GP powers fix a GDoF tuple; the auction then finds the least powers
//! achieving that same tuple, which never exceed the GP powers.

use crate::error::Result;
use crate::model::{achieved_gdof, strength_from_physical, GdofTuple, PhysicalNetwork, PowerAlloc};
use crate::optimize::gp::{gp_power_control, GpSolution};
use crate::power::{solve_power_auction, AuctionConfig};

/// GDoF below this is treated as zero and the user is switched off.
pub const ACTIVE_GDOF_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineResult {
    pub gp: GpSolution,
    /// GP powers as exponents of the reference power.
    pub r_gp: PowerAlloc,
    pub d: GdofTuple,
    pub r_min: PowerAlloc,
}

pub fn gp_then_assignment(net: &PhysicalNetwork, subset: &[usize], w: &[f64]) -> Result<PipelineResult> {
    gp_then_assignment_with(net, subset, w, AuctionConfig { snap: true, ..AuctionConfig::default() })
}

pub fn gp_then_assignment_with(
    net: &PhysicalNetwork,
    subset: &[usize],
    w: &[f64],
    auction: AuctionConfig,
) -> Result<PipelineResult> {
    let gp = gp_power_control(net, subset, w)?;
    let alpha = strength_from_physical(net)?;
    let lp = net.reference_power.ln();
    let r_gp = PowerAlloc(
        gp.powers
            .iter()
            .map(|&p| if p > 0.0 { (p.ln() / lp).min(0.0) } else { f64::NEG_INFINITY })
            .collect(),
    );
    let d = achieved_gdof(&alpha, &r_gp, true)?;
    let support = d.support(ACTIVE_GDOF_TOL);
    let mut target = GdofTuple::zeros(net.k);
    for &u in &support {
        target.0[u] = d[u];
    }
    let r_min = if support.is_empty() {
        PowerAlloc::off(net.k)
    } else {
        solve_power_auction(&alpha, &target, &support, auction)?.r
    };
    Ok(PipelineResult { gp, r_gp, d: target, r_min })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::fix_a;
    use crate::model::ChannelMatrix;

    #[test]
    fn single_user() {
        let net = PhysicalNetwork::from_strengths(&ChannelMatrix::new(vec![vec![1.2]]).unwrap(), 1e4).unwrap();
        let res = gp_then_assignment(&net, &[0], &[1.0]).unwrap();
        assert_eq!(res.r_gp.0, vec![0.0]);
        assert!((res.d[0] - 1.2).abs() < 1e-12);
        assert_eq!(res.r_min.0, vec![0.0]);
    }

    #[test]
    fn orthogonal_pair_keeps_full_power() {
        let a = ChannelMatrix::new(vec![vec![1.0, 0.0], vec![0.0, 1.5]]).unwrap();
        let net = PhysicalNetwork::from_strengths(&a, 1e4).unwrap();
        let res = gp_then_assignment(&net, &[0, 1], &[1.0, 1.0]).unwrap();
        assert_eq!(res.r_gp.0, vec![0.0, 0.0]);
        assert_eq!(res.r_min.0, vec![0.0, 0.0]);
    }

    #[test]
    fn example_one_uses_no_more_power() {
        let alpha = fix_a();
        let net = PhysicalNetwork::from_strengths(&alpha, 1e4).unwrap();
        let res = gp_then_assignment(&net, &[0, 1, 2], &[1.0; 3]).unwrap();
        for u in 0..3 {
            assert!(res.r_min[u] <= res.r_gp[u] + 1e-12);
        }
        let again = achieved_gdof(&alpha, &res.r_min, true).unwrap();
        for u in 0..3 {
            assert!((again[u] - res.d[u]).abs() < 1e-9);
        }
    }
}
