//! TINA polytopes, membership tests, TIN-optimality conditions and the cyclic
//! converse bound.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::matching::{self, max_matching_weight, max_matching_weight_between, next_permutation};
use crate::model::{ChannelMatrix, GdofTuple};

/// Default cap on `|S|` for explicit polytope construction (`2^|S| - 1` constraints).
pub const DEFAULT_SUBSET_CAP: usize = 20;
/// Membership tolerance on each inequality.
pub const MEMBERSHIP_TOL: f64 = 1e-9;
/// Largest network for which the C2 subset scan runs.
pub const C2_LIMIT: usize = 12;
/// Largest subset for the permutation-based converse bound.
pub const CONVERSE_LIMIT: usize = 7;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Constraint {
    /// Users in the constraint, ascending.
    pub members: Vec<usize>,
    /// Upper bound on the sum of their GDoF.
    pub bound: f64,
}

/// Halfspace description of the TINA polytope of an active subset.
#[derive(Debug, Clone, PartialEq)]
pub struct TinaPolytope {
    pub k: usize,
    pub subset: Vec<usize>,
    /// One entry per non-empty subset of `subset`, ordered by size then lexicographically.
    pub constraints: Vec<Constraint>,
}

impl TinaPolytope {
    pub fn bound_of(&self, members: &[usize]) -> Option<f64> {
        let mut m = members.to_vec();
        m.sort_unstable();
        self.constraints.iter().find(|c| c.members == m).map(|c| c.bound)
    }

    /// True iff `d` is non-negative, zero off the subset and meets every inequality.
    pub fn contains(&self, d: &[f64]) -> bool {
        if d.len() != self.k {
            return false;
        }
        for (u, &x) in d.iter().enumerate() {
            if x < -MEMBERSHIP_TOL {
                return false;
            }
            if self.subset.binary_search(&u).is_err() && x.abs() > MEMBERSHIP_TOL {
                return false;
            }
        }
        self.constraints
            .iter()
            .all(|c| c.members.iter().map(|&u| d[u]).sum::<f64>() <= c.bound + MEMBERSHIP_TOL)
    }
}

fn members_of(subset: &[usize], mask: u64) -> Vec<usize> {
    subset.iter().enumerate().filter(|(p, _)| mask >> p & 1 == 1).map(|(_, &u)| u).collect()
}

fn sort_constraints(cs: &mut [Constraint]) {
    cs.sort_by(|a, b| a.members.len().cmp(&b.members.len()).then_with(|| a.members.cmp(&b.members)));
}

/// Builds `P_S = {sum_{k in S'} d_k <= sum_{k in S'} alpha_kk - w(M*_{S'}) for all S' in S}`.
pub fn tina_polytope(alpha: &ChannelMatrix, subset: &[usize]) -> Result<TinaPolytope> {
    tina_polytope_with(alpha, subset, DEFAULT_SUBSET_CAP, Exec::default())
}

pub fn tina_polytope_with(alpha: &ChannelMatrix, subset: &[usize], cap: usize, exec: Exec) -> Result<TinaPolytope> {
    let s = alpha.normalize_subset(subset)?;
    if s.len() > cap.min(63) {
        return Err(Error::SubsetTooLarge { cap, got: s.len() });
    }
    let n_masks = (1usize << s.len()) - 1;
    let mut constraints = exec.map_range(n_masks, |idx| {
        let members = members_of(&s, idx as u64 + 1);
        let direct: f64 = members.iter().map(|&u| alpha.direct(u)).sum();
        let bound = direct - max_matching_weight(alpha, &members);
        Constraint { members, bound }
    });
    sort_constraints(&mut constraints);
    Ok(TinaPolytope { k: alpha.k(), subset: s, constraints })
}

/// Ordered-subset (cyclic) description: each unordered set gets the tightest bound
/// implied by cyclic-order constraints on disjoint blocks covering it.
/// Exponential; oracle use only.
pub fn tina_polytope_cyclic(alpha: &ChannelMatrix, subset: &[usize]) -> Result<Vec<Constraint>> {
    let s = alpha.normalize_subset(subset)?;
    if s.len() > matching::ORACLE_LIMIT {
        return Err(Error::OracleLimitExceeded { limit: matching::ORACLE_LIMIT, got: s.len() });
    }
    let mut single = vec![0.0; 1 << s.len()];
    for (mask, slot) in single.iter_mut().enumerate().skip(1) {
        let members = members_of(&s, mask as u64);
        *slot = if members.len() == 1 {
            alpha.direct(members[0])
        } else {
            // Fix the first element; orders of the rest enumerate every cycle once.
            let first = members[0];
            let mut rest: Vec<usize> = members[1..].to_vec();
            let mut best = f64::INFINITY;
            loop {
                let order: Vec<usize> = std::iter::once(first).chain(rest.iter().copied()).collect();
                let m = order.len();
                let b: f64 = (0..m)
                    .map(|t| {
                        let cur = order[t];
                        let prev = order[(t + m - 1) % m];
                        alpha.direct(cur) - alpha.get(prev, cur)
                    })
                    .sum();
                best = best.min(b);
                if !next_permutation(&mut rest) {
                    break;
                }
            }
            best
        };
    }
    let combined = min_over_partitions(&single);
    let mut out: Vec<Constraint> = (1..single.len())
        .map(|mask| Constraint { members: members_of(&s, mask as u64), bound: combined[mask] })
        .collect();
    sort_constraints(&mut out);
    Ok(out)
}

/// `best[mask] = min` over set partitions of `mask` of the summed block values.
fn min_over_partitions(block: &[f64]) -> Vec<f64> {
    let mut best = vec![f64::INFINITY; block.len()];
    best[0] = 0.0;
    for mask in 1..block.len() {
        // The block holding the lowest member is chosen first so each partition is visited once.
        let low = mask & mask.wrapping_neg();
        let rest = mask ^ low;
        let mut sub = rest;
        loop {
            let b = sub | low;
            best[mask] = best[mask].min(block[b] + best[mask ^ b]);
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
    }
    best
}

pub fn contains(poly: &TinaPolytope, d: &GdofTuple) -> bool {
    poly.contains(d)
}

/// Membership in the union of all subset polytopes. Only the polytope of the
/// support of `d` can contain it, so that support is the witness.
pub fn union_membership(alpha: &ChannelMatrix, d: &GdofTuple) -> Result<(bool, Vec<usize>)> {
    if d.len() != alpha.k() {
        return Err(Error::ShapeError { expected: alpha.k(), got: d.len() });
    }
    if d.iter().any(|x| *x < -MEMBERSHIP_TOL) {
        return Ok((false, Vec::new()));
    }
    let support = d.support(MEMBERSHIP_TOL);
    if support.is_empty() {
        return Ok((true, support));
    }
    let poly = tina_polytope(alpha, &support)?;
    Ok((poly.contains(d), support))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum C2Status {
    Holds,
    /// First subset (ascending by size, then lexicographic) without a zero edge in any maximum matching.
    Fails { subset: Vec<usize> },
    Skipped { reason: String },
}

impl C2Status {
    pub fn holds(&self) -> bool {
        matches!(self, C2Status::Holds)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub gnaj: Vec<bool>,
    pub c1: Vec<bool>,
    pub c2: C2Status,
    /// `(i, j, k)`: incoming link i->k and outgoing link k->j breaking GNAJ at user k.
    pub gnaj_witnesses: Vec<(usize, usize, usize)>,
    /// `(i, j, k)` maximizing `alpha_ik + alpha_kj - alpha'_ij` where the relaxed condition fails.
    pub c1_witnesses: Vec<(usize, usize, usize)>,
}

impl ConditionReport {
    pub fn all_gnaj(&self) -> bool {
        self.gnaj.iter().all(|x| *x)
    }

    pub fn all_c1(&self) -> bool {
        self.c1.iter().all(|x| *x)
    }
}

/// GNAJ at user `k` within `others`: `alpha_kk >= max_i alpha_ik + max_j alpha_kj`.
/// Returns the arg-max pair when violated.
pub fn gnaj_violation(alpha: &ChannelMatrix, k: usize, others: &[usize]) -> Option<(usize, usize)> {
    let best_in = others.iter().filter(|&&i| i != k).map(|&i| (alpha.get(i, k), i)).max_by(|a, b| a.0.total_cmp(&b.0));
    let best_out = others.iter().filter(|&&j| j != k).map(|&j| (alpha.get(k, j), j)).max_by(|a, b| a.0.total_cmp(&b.0));
    match (best_in, best_out) {
        (Some((vin, i)), Some((vout, j))) if alpha.direct(k) < vin + vout => Some((i, j)),
        _ => None,
    }
}

/// Relaxed condition at user `k` within `others`:
/// `alpha_kk >= max_{i,j != k} (alpha_ik + alpha_kj - alpha'_ij)`, `i = j` allowed.
pub fn c1_violation(alpha: &ChannelMatrix, k: usize, others: &[usize]) -> Option<(usize, usize)> {
    let mut worst: Option<(f64, usize, usize)> = None;
    for &i in others.iter().filter(|&&i| i != k) {
        for &j in others.iter().filter(|&&j| j != k) {
            let v = alpha.get(i, k) + alpha.get(k, j) - alpha.alpha_prime(i, j);
            if worst.is_none_or(|w| v > w.0) {
                worst = Some((v, i, j));
            }
        }
    }
    match worst {
        Some((v, i, j)) if alpha.direct(k) < v => Some((i, j)),
        _ => None,
    }
}

/// True iff the relaxed condition holds for every user of `subset` within it.
pub fn c1_holds_on(alpha: &ChannelMatrix, subset: &[usize]) -> bool {
    subset.iter().all(|&k| c1_violation(alpha, k, subset).is_none())
}

/// True iff GNAJ holds for every user of `subset` within it.
pub fn gnaj_holds_on(alpha: &ChannelMatrix, subset: &[usize]) -> bool {
    subset.iter().all(|&k| gnaj_violation(alpha, k, subset).is_none())
}

/// Whether some maximum matching of `G[S]` contains a cross edge with `alpha_ij = 0`,
/// tested by forcing each zero edge and re-solving the remainder.
pub fn zero_edge_in_some_max_matching(alpha: &ChannelMatrix, s: &[usize]) -> bool {
    let best = max_matching_weight(alpha, s);
    for &i in s {
        for &j in s {
            if i == j || alpha.get(i, j) != 0.0 {
                continue;
            }
            let rows: Vec<usize> = s.iter().copied().filter(|&u| u != i).collect();
            let cols: Vec<usize> = s.iter().copied().filter(|&u| u != j).collect();
            if max_matching_weight_between(alpha, &rows, &cols) >= best - matching::WEIGHT_TOL {
                return true;
            }
        }
    }
    false
}

pub fn check_conditions(alpha: &ChannelMatrix) -> ConditionReport {
    check_conditions_with(alpha, Exec::default())
}

pub fn check_conditions_with(alpha: &ChannelMatrix, exec: Exec) -> ConditionReport {
    let users = alpha.all_users();
    let mut gnaj = Vec::with_capacity(users.len());
    let mut c1 = Vec::with_capacity(users.len());
    let mut gnaj_witnesses = Vec::new();
    let mut c1_witnesses = Vec::new();
    for &k in &users {
        match gnaj_violation(alpha, k, &users) {
            Some((i, j)) => {
                gnaj.push(false);
                gnaj_witnesses.push((i, j, k));
            }
            None => gnaj.push(true),
        }
        match c1_violation(alpha, k, &users) {
            Some((i, j)) => {
                c1.push(false);
                c1_witnesses.push((i, j, k));
            }
            None => c1.push(true),
        }
    }

    let c2 = if alpha.k() > C2_LIMIT {
        C2Status::Skipped { reason: format!("subset scan limited to {C2_LIMIT} users") }
    } else {
        let k = alpha.k();
        let masks: Vec<u64> = (1u64..(1u64 << k)).filter(|m| m.count_ones() > 2).collect();
        let ok = exec.map_slice(&masks, |&m| zero_edge_in_some_max_matching(alpha, &members_of(&users, m)));
        let mut failing: Vec<Vec<usize>> =
            masks.iter().zip(ok).filter(|(_, ok)| !ok).map(|(&m, _)| members_of(&users, m)).collect();
        failing.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        match failing.into_iter().next() {
            None => C2Status::Holds,
            Some(subset) => C2Status::Fails { subset },
        }
    };

    ConditionReport { gnaj, c1, c2, gnaj_witnesses, c1_witnesses }
}

/// Cyclic outer bound on `sum_{j in S} d_j`:
/// `min_pi min_k g_{pi,k}`, `g_{pi,k} = sum_j (alpha_{i_j i_j} - alpha_{i_{j-1} i_j}) + alpha_{i_{k-1} i_k}`.
pub fn converse_g_bound(alpha: &ChannelMatrix, subset: &[usize]) -> Result<f64> {
    let s = alpha.normalize_subset(subset)?;
    if s.len() > CONVERSE_LIMIT {
        return Err(Error::OracleLimitExceeded { limit: CONVERSE_LIMIT, got: s.len() });
    }
    let m = s.len();
    let mut order = s.clone();
    let mut best = f64::INFINITY;
    loop {
        let incoming: Vec<f64> = (0..m).map(|t| alpha.get(order[(t + m - 1) % m], order[t])).collect();
        let cyclic: f64 = (0..m).map(|t| alpha.direct(order[t]) - incoming[t]).sum();
        let weakest = incoming.iter().copied().fold(f64::INFINITY, f64::min);
        best = best.min(cyclic + weakest);
        if !next_permutation(&mut order) {
            break;
        }
    }
    Ok(best)
}

/// Outer bound on one block of a partition: `alpha_jj` for a single user, the
/// two-user noisy-interference bound for a pair, the cyclic bound otherwise.
fn block_bound(alpha: &ChannelMatrix, block: &[usize]) -> Result<f64> {
    match *block {
        [j] => Ok(alpha.direct(j)),
        [i, j] => {
            let noisy = alpha.direct(i) + alpha.direct(j) - alpha.get(i, j) - alpha.get(j, i);
            Ok(noisy.min(converse_g_bound(alpha, block)?))
        }
        _ => converse_g_bound(alpha, block),
    }
}

/// Outer bound on `sum_{j in S} d_j` combining block bounds over every set partition
/// of `S`; covers optimal matchings made of several cycles.
/// The pair bound presumes GNAJ holds on the pair.
pub fn converse_partition_bound(alpha: &ChannelMatrix, subset: &[usize]) -> Result<f64> {
    let s = alpha.normalize_subset(subset)?;
    if s.len() > CONVERSE_LIMIT {
        return Err(Error::OracleLimitExceeded { limit: CONVERSE_LIMIT, got: s.len() });
    }
    let m = s.len();
    let full = (1usize << m) - 1;
    let mut block = vec![0.0; 1 << m];
    for mask in 1..=full {
        block[mask] = block_bound(alpha, &members_of(&s, mask as u64))?;
    }
    Ok(min_over_partitions(&block)[full])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{fix_a, fix_b};

    fn assert_bounds(poly: &TinaPolytope, expected: &[(&[usize], f64)]) {
        assert_eq!(poly.constraints.len(), expected.len());
        for (m, b) in expected {
            let got = poly.bound_of(m).unwrap();
            assert!((got - b).abs() < 1e-9, "{m:?}: {got} vs {b}");
        }
    }

    #[test]
    fn example_one_region() {
        let poly = tina_polytope(&fix_a(), &[0, 1, 2]).unwrap();
        assert_bounds(
            &poly,
            &[(&[0], 2.0), (&[1], 1.0), (&[2], 1.5), (&[0, 1], 2.3), (&[1, 2], 1.5), (&[0, 2], 2.4), (&[0, 1, 2], 2.5)],
        );
    }

    #[test]
    fn example_two_region() {
        let poly = tina_polytope(&fix_b(), &[0, 1, 2]).unwrap();
        assert_bounds(
            &poly,
            &[(&[0], 1.0), (&[1], 1.0), (&[2], 1.0), (&[0, 1], 1.1), (&[1, 2], 1.3), (&[0, 2], 1.2), (&[0, 1, 2], 1.8)],
        );
    }

    #[test]
    fn zero_cross_links_only_sum_directs() {
        let a = ChannelMatrix::new(vec![vec![1.0, 0.0, 0.0], vec![0.0, 2.0, 0.0], vec![0.0, 0.0, 0.5]]).unwrap();
        let poly = tina_polytope(&a, &[0, 1, 2]).unwrap();
        for c in &poly.constraints {
            let direct: f64 = c.members.iter().map(|&u| a.direct(u)).sum();
            assert!((c.bound - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn cap_enforced() {
        let a = ChannelMatrix::from_flat(5, vec![0.5; 25]).unwrap();
        let err = tina_polytope_with(&a, &[0, 1, 2, 3, 4], 4, Exec::Sequential).unwrap_err();
        assert_eq!(err, Error::SubsetTooLarge { cap: 4, got: 5 });
    }

    #[test]
    fn cyclic_form_examples() {
        let a = fix_a();
        let c = tina_polytope_cyclic(&a, &[0, 1]).unwrap();
        assert!((c.iter().find(|c| c.members == [0, 1]).unwrap().bound - 2.3).abs() < 1e-12);
        let c = tina_polytope_cyclic(&a, &[0, 1, 2]).unwrap();
        assert!((c.last().unwrap().bound - 2.5).abs() < 1e-12);
        let sym = ChannelMatrix::new(vec![vec![1.0, 0.4], vec![0.4, 1.0]]).unwrap();
        let c = tina_polytope_cyclic(&sym, &[0, 1]).unwrap();
        assert!((c.last().unwrap().bound - 1.2).abs() < 1e-12);
    }

    #[test]
    fn membership_examples() {
        let poly = tina_polytope(&fix_a(), &[0, 1, 2]).unwrap();
        assert!(contains(&poly, &GdofTuple(vec![0.5, 0.6, 0.7])));
        assert!(!contains(&poly, &GdofTuple(vec![2.0, 1.0, 1.5])));
        assert!(contains(&poly, &GdofTuple::zeros(3)));

        assert_eq!(union_membership(&fix_a(), &GdofTuple(vec![0.5, 0.6, 0.7])).unwrap(), (true, vec![0, 1, 2]));
        assert_eq!(union_membership(&fix_a(), &GdofTuple(vec![2.0, 0.0, 0.0])).unwrap(), (true, vec![0]));
        assert_eq!(union_membership(&fix_b(), &GdofTuple(vec![1.0, 0.9, 0.0])).unwrap(), (false, vec![0, 1]));
    }

    #[test]
    fn example_two_conditions() {
        let rep = check_conditions(&fix_b());
        assert_eq!(rep.c1, vec![true, true, true]);
        assert_eq!(rep.gnaj, vec![false, false, true]);
        assert_eq!(rep.c2, C2Status::Holds);
        assert_eq!(rep.gnaj_witnesses.iter().map(|w| w.2).collect::<Vec<_>>(), vec![0, 1]);
    }

    #[test]
    fn diagonal_dominant_conditions() {
        let mut rows = vec![vec![1.0; 4]; 4];
        for (i, row) in rows.iter_mut().enumerate() {
            row[i] = 10.0;
        }
        let rep = check_conditions(&ChannelMatrix::new(rows).unwrap());
        assert!(rep.all_gnaj() && rep.all_c1());
    }

    #[test]
    fn hand_evaluated_conditions() {
        // alpha_12 = alpha_23 = alpha_31 = 1, reverse links 0.8, directs 1.5.
        let a = ChannelMatrix::new(vec![vec![1.5, 1.0, 0.8], vec![0.8, 1.5, 1.0], vec![1.0, 0.8, 1.5]]).unwrap();
        let rep = check_conditions(&a);
        assert_eq!(rep.gnaj, vec![false; 3]);
        // i = j gives alpha_ik + alpha_ki = 1.8 > 1.5 for every user.
        assert_eq!(rep.c1, vec![false; 3]);
    }

    #[test]
    fn converse_examples() {
        assert!((converse_g_bound(&fix_b(), &[0, 1, 2]).unwrap() - 1.8).abs() < 1e-12);
        let a = ChannelMatrix::new(vec![vec![1.3, 0.2], vec![0.7, 0.9]]).unwrap();
        let expected = 1.3 + 0.9 - 0.2 - 0.7 + 0.2;
        assert!((converse_g_bound(&a, &[0, 1]).unwrap() - expected).abs() < 1e-12);
        let diag = ChannelMatrix::new(vec![vec![1.0, 0.0], vec![0.0, 2.0]]).unwrap();
        assert!((converse_g_bound(&diag, &[0, 1]).unwrap() - 3.0).abs() < 1e-12);
        let big = ChannelMatrix::from_flat(8, vec![0.1; 64]).unwrap();
        assert!(converse_g_bound(&big, &(0..8).collect::<Vec<_>>()).is_err());
    }

    #[test]
    fn partition_bound_matches_example_two_region() {
        let a = fix_b();
        let poly = tina_polytope(&a, &[0, 1, 2]).unwrap();
        for c in &poly.constraints {
            let got = converse_partition_bound(&a, &c.members).unwrap();
            assert!((got - c.bound).abs() < 1e-9, "{:?}: {got} vs {}", c.members, c.bound);
        }
        // The single-cycle bound alone is loose on the pair {1,2}.
        assert!((converse_g_bound(&a, &[0, 1]).unwrap() - 1.4).abs() < 1e-12);
    }

    #[test]
    fn exec_modes_agree() {
        let a = fix_a();
        assert_eq!(
            tina_polytope_with(&a, &[0, 1, 2], 20, Exec::Sequential).unwrap(),
            tina_polytope_with(&a, &[0, 1, 2], 20, Exec::Parallel).unwrap()
        );
    }
}
