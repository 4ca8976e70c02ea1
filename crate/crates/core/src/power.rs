//! Minimum-power allocation for a target GDoF tuple via the assignment problem.
//!
//! For active users `S` with targets `d`, the assignment matrix is
//! `A_ij = alpha_ij` (i != j) and `A_jj = alpha_jj - d_j`. The target is feasible iff
//! the diagonal is a maximum-weight assignment of `A`; the dual labels with the
//! largest left labels (equivalently the smallest right labels, or "prices") give
//! the componentwise-minimal power exponents `r_j = -y_u_j`.

use std::collections::VecDeque;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{ChannelMatrix, GdofTuple, PowerAlloc};
use crate::region;

/// Tolerance for equality-subgraph membership and feasibility checks.
pub const LABEL_TOL: f64 = 1e-9;
/// Default auction price increment.
pub const DEFAULT_EPSILON: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq)]
pub struct AssignmentMatrix {
    /// Active users, ascending; row/column `p` belongs to `users[p]`.
    pub users: Vec<usize>,
    pub n: usize,
    /// Row-major `n x n`.
    pub a: Vec<f64>,
}

impl AssignmentMatrix {
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    pub fn max_entry(&self) -> f64 {
        self.a.iter().copied().fold(0.0, f64::max)
    }
}

/// Left labels `y_u` (negated power exponents) and right labels `y_v` (prices),
/// indexed by position in the active subset.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabelPair {
    pub y_u: Vec<f64>,
    pub y_v: Vec<f64>,
}

/// One label update of the Kuhn-Munkres loop.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KmRound {
    pub alpha_l: f64,
    /// Left-side tree (positions) when the update fired.
    pub s: Vec<usize>,
    /// Right-side tree (positions) when the update fired.
    pub t: Vec<usize>,
    pub labels: LabelPair,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KmTrace {
    pub initial: LabelPair,
    pub rounds: Vec<KmRound>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerSolution {
    /// Exponents for all K users; `-inf` outside the active subset.
    pub r: PowerAlloc,
    pub labels: LabelPair,
    pub users: Vec<usize>,
    /// Label-update rounds (Hungarian) or bids (auction).
    pub rounds: u64,
}

pub fn build_assignment_matrix(alpha: &ChannelMatrix, d: &GdofTuple, subset: &[usize]) -> Result<AssignmentMatrix> {
    if d.len() != alpha.k() {
        return Err(Error::ShapeError { expected: alpha.k(), got: d.len() });
    }
    let users = alpha.normalize_subset(subset)?;
    for &u in &users {
        if !(d[u] > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "user {u} has GDoF {}; zero-GDoF users must be removed from the active set",
                d[u]
            )));
        }
        if d[u] > alpha.direct(u) + LABEL_TOL {
            return Err(Error::ImmediatelyInfeasible { user: u, d: d[u], alpha: alpha.direct(u) });
        }
    }
    let n = users.len();
    let mut a = Vec::with_capacity(n * n);
    for &i in &users {
        for &j in &users {
            a.push(if i == j { (alpha.direct(j) - d[j]).max(0.0) } else { alpha.get(i, j) });
        }
    }
    Ok(AssignmentMatrix { users, n, a })
}

fn expand(alpha: &ChannelMatrix, users: &[usize], exponents: &[f64]) -> PowerAlloc {
    let mut r = PowerAlloc::off(alpha.k());
    for (p, &u) in users.iter().enumerate() {
        r.0[u] = exponents[p];
    }
    r
}

/// Kuhn-Munkres with the diagonal-tightness termination test, recording every label update.
///
/// Labels start at `y_u = row max`, `y_v = 0`. Each iteration grows an alternating
/// tree from the lowest free left vertex inside the equality subgraph; when the tree
/// cannot grow, labels move by `alpha_L` and the search restarts.
pub fn kuhn_munkres(m: &AssignmentMatrix) -> Result<(LabelPair, KmTrace)> {
    let n = m.n;
    let mut y_u: Vec<f64> = (0..n).map(|i| (0..n).map(|j| m.get(i, j)).fold(f64::NEG_INFINITY, f64::max)).collect();
    let mut y_v = vec![0.0; n];
    let initial = LabelPair { y_u: y_u.clone(), y_v: y_v.clone() };
    let mut rounds = Vec::new();

    let tight = |y_u: &[f64], y_v: &[f64], i: usize, j: usize| (y_u[i] + y_v[j] - m.get(i, j)).abs() <= LABEL_TOL;

    // Initial matching: greedy over tight edges in index order.
    let mut match_u: Vec<Option<usize>> = vec![None; n];
    let mut match_v: Vec<Option<usize>> = vec![None; n];
    for i in 0..n {
        if let Some(j) = (0..n).find(|&j| match_v[j].is_none() && tight(&y_u, &y_v, i, j)) {
            match_u[i] = Some(j);
            match_v[j] = Some(i);
        }
    }

    // Augmentations are bounded by n and each tree grows by one vertex per update.
    let max_updates = n * n + n;
    loop {
        if (0..n).all(|j| tight(&y_u, &y_v, j, j)) {
            let labels = LabelPair { y_u, y_v };
            if labels.y_u.iter().any(|&y| y < -LABEL_TOL) {
                return Err(Error::InfeasibleGdof);
            }
            return Ok((labels, KmTrace { initial, rounds }));
        }
        let Some(root) = (0..n).find(|&i| match_u[i].is_none()) else {
            // Perfect matching in the equality subgraph without a tight diagonal:
            // the optimal assignment is not the identity.
            return Err(Error::InfeasibleGdof);
        };

        let mut in_s = vec![false; n];
        let mut in_t = vec![false; n];
        let mut parent_of_v = vec![usize::MAX; n];
        in_s[root] = true;
        let mut s_order = vec![root];
        let mut t_order: Vec<usize> = Vec::new();
        loop {
            // Lowest-index v in N(S) \ T, with the S-vertex that reaches it.
            let mut pick = None;
            'outer: for j in 0..n {
                if in_t[j] {
                    continue;
                }
                for &i in &s_order {
                    if tight(&y_u, &y_v, i, j) {
                        pick = Some((i, j));
                        break 'outer;
                    }
                }
            }
            match pick {
                None => {
                    let mut alpha_l = f64::INFINITY;
                    for &i in &s_order {
                        for j in (0..n).filter(|&j| !in_t[j]) {
                            alpha_l = alpha_l.min(y_u[i] + y_v[j] - m.get(i, j));
                        }
                    }
                    for &i in &s_order {
                        y_u[i] -= alpha_l;
                    }
                    for &j in &t_order {
                        y_v[j] += alpha_l;
                    }
                    let mut s_sorted = s_order.clone();
                    s_sorted.sort_unstable();
                    let mut t_sorted = t_order.clone();
                    t_sorted.sort_unstable();
                    rounds.push(KmRound {
                        alpha_l,
                        s: s_sorted,
                        t: t_sorted,
                        labels: LabelPair { y_u: y_u.clone(), y_v: y_v.clone() },
                    });
                    if rounds.len() > max_updates {
                        return Err(Error::InfeasibleGdof);
                    }
                    break;
                }
                Some((i, j)) => {
                    parent_of_v[j] = i;
                    match match_v[j] {
                        None => {
                            // Augment along root -> ... -> i -> j.
                            let mut v = j;
                            loop {
                                let u = parent_of_v[v];
                                let prev = match_u[u];
                                match_u[u] = Some(v);
                                match_v[v] = Some(u);
                                match prev {
                                    Some(pv) => v = pv,
                                    None => break,
                                }
                            }
                            break;
                        }
                        Some(u2) => {
                            in_t[j] = true;
                            t_order.push(j);
                            if !in_s[u2] {
                                in_s[u2] = true;
                                s_order.push(u2);
                            }
                        }
                    }
                }
            }
        }
    }
}

/// Centralized minimum-power allocation via Kuhn-Munkres.
pub fn solve_power_hungarian(alpha: &ChannelMatrix, d: &GdofTuple, subset: &[usize]) -> Result<PowerSolution> {
    solve_power_hungarian_traced(alpha, d, subset).map(|(s, _)| s)
}

pub fn solve_power_hungarian_traced(
    alpha: &ChannelMatrix,
    d: &GdofTuple,
    subset: &[usize],
) -> Result<(PowerSolution, KmTrace)> {
    let m = build_assignment_matrix(alpha, d, subset)?;
    let (labels, trace) = kuhn_munkres(&m)?;
    let exps: Vec<f64> = labels.y_u.iter().map(|y| (-y).min(0.0)).collect();
    let r = expand(alpha, &m.users, &exps);
    let rounds = trace.rounds.len() as u64;
    Ok((PowerSolution { r, labels, users: m.users, rounds }, trace))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuctionConfig {
    pub epsilon: f64,
    /// Replace the auction prices by the exact minimum prices of the final assignment.
    pub snap: bool,
    /// Override for the bid cap `10 K^2 max(A) / epsilon`.
    pub max_bids: Option<u64>,
}

impl Default for AuctionConfig {
    fn default() -> Self {
        Self { epsilon: DEFAULT_EPSILON, snap: false, max_bids: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuctionOutcome {
    /// `owner[j]` = bidder holding product j.
    pub owner: Vec<Option<usize>>,
    pub prices: Vec<f64>,
    pub bids: u64,
}

/// Ascending-price auction: transmitters bid for receivers.
///
/// Bidders leave a FIFO demand queue, bid for their most profitable product
/// (lowest index on ties) if its profit is at least `epsilon`, displace the current
/// owner back into the queue and raise that product's price by `epsilon`.
pub fn run_auction(m: &AssignmentMatrix, epsilon: f64, max_bids: u64) -> Result<AuctionOutcome> {
    let n = m.n;
    let mut prices = vec![0.0; n];
    let mut owner: Vec<Option<usize>> = vec![None; n];
    let mut demand: VecDeque<usize> = (0..n).collect();
    let mut bids = 0u64;
    while let Some(i) = demand.pop_front() {
        let mut best = f64::NEG_INFINITY;
        let mut j_star = 0;
        for j in 0..n {
            let profit = m.get(i, j) - prices[j];
            if profit > best {
                best = profit;
                j_star = j;
            }
        }
        if best >= epsilon && owner[j_star] != Some(i) {
            if let Some(prev) = owner[j_star] {
                demand.push_back(prev);
            }
            owner[j_star] = Some(i);
            prices[j_star] += epsilon;
            bids += 1;
            if bids > max_bids && !demand.is_empty() {
                return Err(Error::InfeasibleOrEpsilonTooLarge { bids });
            }
        }
    }
    Ok(AuctionOutcome { owner, prices, bids })
}

/// Least prices supporting the identity assignment:
/// the smallest `y_v >= 0` with `y_v_j >= A_ij - A_ii + y_v_i` for all `i != j`.
/// `None` when a positive cycle shows the identity is not optimal.
pub fn minimum_prices_for_identity(m: &AssignmentMatrix) -> Option<Vec<f64>> {
    let n = m.n;
    let mut y = vec![0.0_f64; n];
    for _ in 0..=n {
        let mut changed = false;
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let cand = m.get(i, j) - m.get(i, i) + y[i];
                if cand > y[j] + LABEL_TOL {
                    y[j] = cand;
                    changed = true;
                }
            }
        }
        if !changed {
            return Some(y);
        }
    }
    None
}

/// Decentralized minimum-power allocation via the auction.
///
/// Power exponents follow `r_i = y_v_i - A_ii` on the identity assignment. A
/// non-identity final assignment is accepted only when the identity is within
/// `n * epsilon` of its weight.
pub fn solve_power_auction(alpha: &ChannelMatrix, d: &GdofTuple, subset: &[usize], cfg: AuctionConfig) -> Result<PowerSolution> {
    if !(cfg.epsilon > 0.0) {
        return Err(Error::InvalidArgument("auction epsilon must be positive".into()));
    }
    let m = build_assignment_matrix(alpha, d, subset)?;
    let n = m.n;
    let cap = cfg
        .max_bids
        .unwrap_or_else(|| (10.0 * (n * n) as f64 * m.max_entry().max(1.0) / cfg.epsilon).ceil() as u64);
    let out = run_auction(&m, cfg.epsilon, cap)?;

    let gap = n as f64 * cfg.epsilon;
    let mut assigned_weight = 0.0;
    for (j, o) in out.owner.iter().enumerate() {
        if let Some(i) = o {
            assigned_weight += m.get(*i, j);
        }
    }
    let identity_weight: f64 = (0..n).map(|j| m.get(j, j)).sum();
    if identity_weight + gap + LABEL_TOL < assigned_weight {
        return Err(Error::InfeasibleOrEpsilonTooLarge { bids: out.bids });
    }

    let prices = if cfg.snap {
        minimum_prices_for_identity(&m).ok_or(Error::InfeasibleGdof)?
    } else {
        out.prices.clone()
    };
    let mut exps = Vec::with_capacity(n);
    for j in 0..n {
        let r = prices[j] - m.get(j, j);
        if r > gap + LABEL_TOL {
            return Err(Error::InfeasibleOrEpsilonTooLarge { bids: out.bids });
        }
        exps.push(r.min(0.0));
    }
    let labels = LabelPair { y_u: exps.iter().map(|r| -r).collect(), y_v: prices };
    let r = expand(alpha, &m.users, &exps);
    Ok(PowerSolution { r, labels, users: m.users, rounds: out.bids })
}

/// Feasibility of a GDoF tuple via the assignment test on its support.
pub fn is_feasible(alpha: &ChannelMatrix, d: &GdofTuple) -> bool {
    if d.len() != alpha.k() || d.iter().any(|x| *x < -region::MEMBERSHIP_TOL) {
        return false;
    }
    let support = d.support(region::MEMBERSHIP_TOL);
    if support.is_empty() {
        return true;
    }
    solve_power_hungarian(alpha, d, &support).is_ok()
}
