//! Weighted sum-GDoF maximization over TINA polytopes.

use minilp::{ComparisonOp, OptimizationDirection, Problem};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::matching::max_matching_weight;
use crate::model::{ChannelMatrix, GdofTuple};

/// Largest active subset handed to the LP (`2^16 - 1` constraints).
pub const LP_SUBSET_CAP: usize = 16;
/// Largest network for the exhaustive disjunctive search.
pub const EXACT_LIMIT: usize = 10;

/// Checks shape and sign of a weight vector; at least one weight must be positive.
pub fn validate_weights(alpha: &ChannelMatrix, w: &[f64]) -> Result<()> {
    if w.len() != alpha.k() {
        return Err(Error::ShapeError { expected: alpha.k(), got: w.len() });
    }
    if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(Error::InvalidArgument("weights must be finite and non-negative".into()));
    }
    if !w.iter().any(|x| *x > 0.0) {
        return Err(Error::InvalidArgument("at least one weight must be positive".into()));
    }
    Ok(())
}

/// Users of `subset` whose weight is positive.
pub fn weighted_users(alpha: &ChannelMatrix, subset: &[usize], w: &[f64]) -> Result<Vec<usize>> {
    validate_weights(alpha, w)?;
    let s = alpha.normalize_subset(subset)?;
    Ok(s.into_iter().filter(|&u| w[u] > 0.0).collect())
}

/// `bounds[mask]` = right-hand side of the constraint on `{users[p] : bit p of mask}`.
fn bound_table(alpha: &ChannelMatrix, users: &[usize], exec: Exec) -> Vec<f64> {
    let n_masks = 1usize << users.len();
    exec.map_range(n_masks, |mask| {
        if mask == 0 {
            return 0.0;
        }
        let members: Vec<usize> = (0..users.len()).filter(|p| mask >> p & 1 == 1).map(|p| users[p]).collect();
        members.iter().map(|&u| alpha.direct(u)).sum::<f64>() - max_matching_weight(alpha, &members)
    })
}

/// LP over the polytope of `{users[p] : bit p of active}` using a precomputed bound table.
fn solve_masked(users: &[usize], bounds: &[f64], active: usize, w: &[f64], k: usize) -> Result<(GdofTuple, f64)> {
    let pos: Vec<usize> = (0..users.len()).filter(|p| active >> p & 1 == 1).collect();
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let vars: Vec<_> = pos.iter().map(|&p| lp.add_var(w[users[p]], (0.0, f64::INFINITY))).collect();
    // Enumerate submasks of `active`.
    let mut sub = active;
    while sub > 0 {
        let terms: Vec<_> = pos
            .iter()
            .zip(&vars)
            .filter(|(p, _)| sub >> **p & 1 == 1)
            .map(|(_, v)| (*v, 1.0))
            .collect();
        lp.add_constraint(terms, ComparisonOp::Le, bounds[sub]);
        sub = (sub - 1) & active;
    }
    let sol = match lp.solve() {
        Ok(sol) => sol,
        Err(minilp::Error::Infeasible) => return Err(Error::EmptyRegion),
        Err(e) => return Err(Error::Lp(e.to_string())),
    };
    let mut d = GdofTuple::zeros(k);
    for (&p, v) in pos.iter().zip(&vars) {
        d.0[users[p]] = sol[*v].max(0.0);
    }
    let objective = d.iter().zip(w).map(|(x, wi)| x * wi).sum();
    Ok((d, objective))
}

/// Maximizes `sum w_i d_i` over the TINA polytope of `subset`.
/// Users with zero weight are removed from the subset first and get `d = 0`.
pub fn max_weighted_gdof_lp(alpha: &ChannelMatrix, subset: &[usize], w: &[f64]) -> Result<(GdofTuple, f64)> {
    let users = weighted_users(alpha, subset, w)?;
    if users.is_empty() {
        return Ok((GdofTuple::zeros(alpha.k()), 0.0));
    }
    if users.len() > LP_SUBSET_CAP {
        return Err(Error::SubsetTooLarge { cap: LP_SUBSET_CAP, got: users.len() });
    }
    let bounds = bound_table(alpha, &users, Exec::Sequential);
    solve_masked(&users, &bounds, (1 << users.len()) - 1, w, alpha.k())
}

/// Global optimum over the union of all TINA polytopes by enumerating active subsets.
/// Returns the maximizing tuple, its active subset and the objective.
pub fn max_weighted_gdof_exact(alpha: &ChannelMatrix, w: &[f64]) -> Result<(GdofTuple, Vec<usize>, f64)> {
    max_weighted_gdof_exact_with(alpha, w, Exec::default())
}

pub fn max_weighted_gdof_exact_with(alpha: &ChannelMatrix, w: &[f64], exec: Exec) -> Result<(GdofTuple, Vec<usize>, f64)> {
    if alpha.k() > EXACT_LIMIT {
        return Err(Error::TooLargeForExact { limit: EXACT_LIMIT, got: alpha.k() });
    }
    let users = weighted_users(alpha, &alpha.all_users(), w)?;
    let bounds = bound_table(alpha, &users, exec);
    let n_masks = (1usize << users.len()) - 1;
    let results = exec.map_range(n_masks, |idx| solve_masked(&users, &bounds, idx + 1, w, alpha.k()));
    let mut best: Option<(GdofTuple, usize, f64)> = None;
    for (idx, res) in results.into_iter().enumerate() {
        let (d, obj) = match res {
            Err(Error::EmptyRegion) => continue,
            other => other?,
        };
        // Earliest mask wins ties.
        if best.as_ref().is_none_or(|(_, _, b)| obj > b + 1e-12) {
            best = Some((d, idx + 1, obj));
        }
    }
    // Singletons are never empty, so some subset always survives.
    let (d, mask, obj) = best.ok_or(Error::EmptyRegion)?;
    let subset = (0..users.len()).filter(|p| mask >> p & 1 == 1).map(|p| users[p]).collect();
    Ok((d, subset, obj))
}
