//! Maximum-weight bipartite matching on the cross-strength graph of a user subset.
//!
//! The graph of subset `S` has transmitters of `S` on the left, receivers of `S`
//! on the right and weight `alpha'_ij` (zero on the diagonal). Because all weights
//! are non-negative, a maximum matching can always be completed to a perfect one
//! with diagonal edges, so every matching here is stored as a permutation.

use crate::error::{Error, Result};
use crate::model::ChannelMatrix;

/// Absolute tolerance for weight comparisons.
pub const WEIGHT_TOL: f64 = 1e-9;

/// Largest subset the exhaustive oracle accepts.
pub const ORACLE_LIMIT: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct Matching {
    /// `(tx, rx)` user pairs, sorted by tx. Diagonal pairs carry weight 0.
    pub pairs: Vec<(usize, usize)>,
    pub weight: f64,
}

impl Matching {
    /// Pairs that use an interference link.
    pub fn cross_edges(&self) -> impl Iterator<Item = &(usize, usize)> {
        self.pairs.iter().filter(|(i, j)| i != j)
    }

    pub fn recomputed_weight(&self, alpha: &ChannelMatrix) -> f64 {
        self.pairs.iter().map(|&(i, j)| alpha.alpha_prime(i, j)).sum()
    }
}

/// Cycle decomposition of a perfect matching viewed as the permutation tx -> rx.
#[derive(Debug, Clone, PartialEq)]
pub struct CyclicPartition {
    /// Each cycle starts at its smallest user; cycles ordered by that user.
    pub cycles: Vec<Vec<usize>>,
    /// True when the matching weight equals the sum of the per-cycle optimal weights.
    pub is_best: bool,
}

/// Solves the square assignment problem `max sum_i w[i][perm[i]]` (row-major `w`).
///
/// Shortest-augmenting-path Hungarian method with potentials, O(n^3).
pub fn max_weight_assignment(n: usize, w: &[f64]) -> (Vec<usize>, f64) {
    debug_assert_eq!(w.len(), n * n);
    if n == 0 {
        return (Vec::new(), 0.0);
    }
    // 1-based arrays; column 0 is the virtual root.
    let cost = |i: usize, j: usize| -w[(i - 1) * n + (j - 1)];
    let mut u = vec![0.0_f64; n + 1];
    let mut v = vec![0.0_f64; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost(i0, j) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut perm = vec![0usize; n];
    for j in 1..=n {
        perm[owner[j] - 1] = j - 1;
    }
    let total = perm.iter().enumerate().map(|(i, &j)| w[i * n + j]).sum();
    (perm, total)
}

/// Weight matrix `alpha'` restricted to `rows x cols` (positions, row-major).
fn weight_block(alpha: &ChannelMatrix, rows: &[usize], cols: &[usize]) -> Vec<f64> {
    let mut w = Vec::with_capacity(rows.len() * cols.len());
    for &i in rows {
        for &j in cols {
            w.push(alpha.alpha_prime(i, j));
        }
    }
    w
}

/// Weight of a maximum matching between transmitters `rows` and receivers `cols`
/// (equal lengths), using `alpha'` weights.
pub fn max_matching_weight_between(alpha: &ChannelMatrix, rows: &[usize], cols: &[usize]) -> f64 {
    debug_assert_eq!(rows.len(), cols.len());
    max_weight_assignment(rows.len(), &weight_block(alpha, rows, cols)).1
}

/// `w(M*_S)`: weight only, no tie-breaking. Assumes a validated, sorted subset.
pub fn max_matching_weight(alpha: &ChannelMatrix, subset: &[usize]) -> f64 {
    if subset.len() <= 1 {
        return 0.0;
    }
    max_matching_weight_between(alpha, subset, subset)
}

/// Maximum-weight matching of `G[S]`.
///
/// Among equally heavy optimal matchings the lexicographically smallest list of
/// `(tx, rx)` pairs is returned, so repeated calls agree across platforms.
pub fn max_weight_matching(alpha: &ChannelMatrix, subset: &[usize]) -> Result<Matching> {
    let s = alpha.normalize_subset(subset)?;
    let n = s.len();
    if n == 1 {
        return Ok(Matching { pairs: vec![(s[0], s[0])], weight: 0.0 });
    }
    let best = max_matching_weight(alpha, &s);

    // Fix rows in order, each to the smallest column that keeps the optimum reachable.
    let mut rows: Vec<usize> = s.clone();
    let mut cols: Vec<usize> = s.clone();
    let mut fixed = 0.0;
    let mut pairs = Vec::with_capacity(n);
    while !rows.is_empty() {
        let i = rows[0];
        let rest_rows = &rows[1..];
        let mut chosen = None;
        for (ci, &j) in cols.iter().enumerate() {
            let mut rest_cols = cols.clone();
            rest_cols.remove(ci);
            let total = fixed + alpha.alpha_prime(i, j) + max_matching_weight_between(alpha, rest_rows, &rest_cols);
            if total >= best - WEIGHT_TOL {
                chosen = Some(ci);
                break;
            }
        }
        // The optimum is always reachable from some column; fall back defensively to the first.
        let ci = chosen.unwrap_or(0);
        let j = cols.remove(ci);
        fixed += alpha.alpha_prime(i, j);
        pairs.push((i, j));
        rows.remove(0);
    }
    let weight = pairs.iter().map(|&(i, j)| alpha.alpha_prime(i, j)).sum();
    Ok(Matching { pairs, weight })
}

/// Exhaustive search over all permutations of the subset (test oracle).
pub fn brute_force_matching(alpha: &ChannelMatrix, subset: &[usize]) -> Result<Matching> {
    let s = alpha.normalize_subset(subset)?;
    if s.len() > ORACLE_LIMIT {
        return Err(Error::OracleLimitExceeded { limit: ORACLE_LIMIT, got: s.len() });
    }
    let n = s.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best_perm = perm.clone();
    let mut best = f64::NEG_INFINITY;
    // Lexicographic permutation order visits candidates in lexicographic pair order,
    // so keeping the first strict improvement yields the smallest optimal edge list.
    loop {
        let w: f64 = (0..n).map(|p| alpha.alpha_prime(s[p], s[perm[p]])).sum();
        if w > best + WEIGHT_TOL {
            best = w;
            best_perm = perm.clone();
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    let pairs: Vec<(usize, usize)> = (0..n).map(|p| (s[p], s[best_perm[p]])).collect();
    let weight = pairs.iter().map(|&(i, j)| alpha.alpha_prime(i, j)).sum();
    Ok(Matching { pairs, weight })
}

/// Advances to the next lexicographic permutation; false after the last one.
pub(crate) fn next_permutation(p: &mut [usize]) -> bool {
    if p.len() < 2 {
        return false;
    }
    let mut i = p.len() - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = p.len() - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Decomposes a perfect matching of `subset` into the cycles of the permutation
/// `tx -> rx`, and reports whether the partition attains the best-cyclic-partition
/// equality `w(M*_S) = sum_i w(M*_{S_i})`.
pub fn cyclic_partition(alpha: &ChannelMatrix, m: &Matching, subset: &[usize]) -> Result<CyclicPartition> {
    let s = alpha.normalize_subset(subset)?;
    if m.pairs.len() != s.len() {
        return Err(Error::NotPerfect);
    }
    let pos = |u: usize| s.binary_search(&u).ok();
    let mut next = vec![usize::MAX; s.len()];
    let mut hit_rx = vec![false; s.len()];
    for &(i, j) in &m.pairs {
        let (pi, pj) = match (pos(i), pos(j)) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(Error::NotPerfect),
        };
        if next[pi] != usize::MAX || hit_rx[pj] {
            return Err(Error::NotPerfect);
        }
        next[pi] = pj;
        hit_rx[pj] = true;
    }

    let mut seen = vec![false; s.len()];
    let mut cycles = Vec::new();
    for start in 0..s.len() {
        if seen[start] {
            continue;
        }
        let mut cycle = Vec::new();
        let mut cur = start;
        while !seen[cur] {
            seen[cur] = true;
            cycle.push(s[cur]);
            cur = next[cur];
        }
        cycles.push(cycle);
    }

    let parts: f64 = cycles
        .iter()
        .map(|c| {
            let mut sorted = c.clone();
            sorted.sort_unstable();
            max_matching_weight(alpha, &sorted)
        })
        .sum();
    let whole = max_matching_weight(alpha, &s);
    let is_best = (whole - parts).abs() <= WEIGHT_TOL && (m.recomputed_weight(alpha) - whole).abs() <= WEIGHT_TOL;
    Ok(CyclicPartition { cycles, is_best })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{fix_a, fix_b};
    use proptest::prelude::*;

    fn random_alpha(k: usize) -> impl Strategy<Value = ChannelMatrix> {
        proptest::collection::vec(0.0f64..2.0, k * k).prop_map(move |v| ChannelMatrix::from_flat(k, v).unwrap())
    }

    #[test]
    fn fix_a_full_set() {
        let a = fix_a();
        let m = max_weight_matching(&a, &[0, 1, 2]).unwrap();
        assert!((m.weight - 2.0).abs() < 1e-12);
        assert_eq!(m.pairs, vec![(0, 1), (1, 2), (2, 0)]);
        assert!((brute_force_matching(&a, &[0, 1, 2]).unwrap().weight - 2.0).abs() < 1e-12);
        assert!((brute_force_matching(&a, &[0, 1]).unwrap().weight - 0.7).abs() < 1e-12);
    }

    #[test]
    fn fix_b_uses_zero_edge() {
        let a = fix_b();
        let m = max_weight_matching(&a, &[0, 1, 2]).unwrap();
        assert!((m.weight - 1.2).abs() < 1e-12);
        // Both 3-cycles weigh 1.2; the lexicographic choice is 1->2->3->1.
        assert_eq!(m.pairs, vec![(0, 1), (1, 2), (2, 0)]);
        let forced = a.get(0, 2) + max_matching_weight_between(&a, &[1, 2], &[0, 1]);
        assert!((forced - 1.2).abs() < 1e-12);
    }

    #[test]
    fn singleton_and_zero_cross() {
        let a = fix_a();
        assert_eq!(max_weight_matching(&a, &[1]).unwrap().weight, 0.0);
        let diag = ChannelMatrix::new(vec![vec![1.0, 0.0, 0.0], vec![0.0, 2.0, 0.0], vec![0.0, 0.0, 3.0]]).unwrap();
        assert_eq!(brute_force_matching(&diag, &[0, 1, 2]).unwrap().weight, 0.0);
        assert_eq!(max_weight_matching(&diag, &[0, 1, 2]).unwrap().weight, 0.0);
    }

    #[test]
    fn errors() {
        let a = fix_a();
        assert_eq!(max_weight_matching(&a, &[0, 7]), Err(Error::IndexError { index: 7, k: 3 }));
        assert_eq!(max_weight_matching(&a, &[]), Err(Error::InvalidSubset));
        let big = ChannelMatrix::from_flat(9, vec![0.1; 81]).unwrap();
        assert!(matches!(brute_force_matching(&big, &(0..9).collect::<Vec<_>>()), Err(Error::OracleLimitExceeded { .. })));
    }

    #[test]
    fn cycles_of_fix_a() {
        let a = fix_a();
        let m = max_weight_matching(&a, &[0, 1, 2]).unwrap();
        let cp = cyclic_partition(&a, &m, &[0, 1, 2]).unwrap();
        assert_eq!(cp.cycles, vec![vec![0, 1, 2]]);
        assert!(cp.is_best);

        let id = Matching { pairs: vec![(0, 0), (1, 1), (2, 2)], weight: 0.0 };
        let cp = cyclic_partition(&a, &id, &[0, 1, 2]).unwrap();
        assert_eq!(cp.cycles, vec![vec![0], vec![1], vec![2]]);
        assert!(!cp.is_best);
    }

    #[test]
    fn two_disjoint_two_cycles() {
        let mut rows = vec![vec![0.0; 4]; 4];
        for (i, j) in [(0, 1), (1, 0), (2, 3), (3, 2)] {
            rows[i][j] = 1.0;
        }
        for (i, row) in rows.iter_mut().enumerate() {
            row[i] = 3.0;
        }
        let a = ChannelMatrix::new(rows).unwrap();
        let m = max_weight_matching(&a, &[0, 1, 2, 3]).unwrap();
        assert!((m.weight - 4.0).abs() < 1e-12);
        let cp = cyclic_partition(&a, &m, &[0, 1, 2, 3]).unwrap();
        assert_eq!(cp.cycles, vec![vec![0, 1], vec![2, 3]]);
        assert!(cp.is_best);
    }

    #[test]
    fn non_perfect_rejected() {
        let a = fix_a();
        let m = Matching { pairs: vec![(0, 1), (1, 1)], weight: 0.5 };
        assert_eq!(cyclic_partition(&a, &m, &[0, 1]), Err(Error::NotPerfect));
        let m = Matching { pairs: vec![(0, 1)], weight: 0.5 };
        assert_eq!(cyclic_partition(&a, &m, &[0, 1]), Err(Error::NotPerfect));
    }

    #[test]
    fn fractional_relaxation_is_integral() {
        use minilp::{ComparisonOp, OptimizationDirection, Problem};
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..60 {
            let n = rng.random_range(2..=6);
            let a = ChannelMatrix::from_flat(n, (0..n * n).map(|_| rng.random_range(0.0..2.0)).collect()).unwrap();
            let mut lp = Problem::new(OptimizationDirection::Maximize);
            let x: Vec<_> = (0..n * n).map(|e| lp.add_var(a.alpha_prime(e / n, e % n), (0.0, 1.0))).collect();
            for i in 0..n {
                lp.add_constraint((0..n).map(|j| (x[i * n + j], 1.0)).collect::<Vec<_>>(), ComparisonOp::Le, 1.0);
                lp.add_constraint((0..n).map(|j| (x[j * n + i], 1.0)).collect::<Vec<_>>(), ComparisonOp::Le, 1.0);
            }
            let sol = lp.solve().unwrap();
            let users: Vec<usize> = (0..n).collect();
            assert!((sol.objective() - max_matching_weight(&a, &users)).abs() < 1e-7);
        }
    }

    proptest! {
        #[test]
        fn hungarian_matches_oracle((a, mask) in (2usize..=8).prop_flat_map(|k| (random_alpha(k), 1u32..(1 << k)))) {
            let subset: Vec<usize> = (0..a.k()).filter(|i| mask >> i & 1 == 1).collect();
            let fast = max_weight_matching(&a, &subset).unwrap();
            let slow = brute_force_matching(&a, &subset).unwrap();
            prop_assert!((fast.weight - slow.weight).abs() <= 1e-9);
            prop_assert!((fast.weight - fast.recomputed_weight(&a)).abs() <= 1e-12);
            prop_assert_eq!(fast.pairs, slow.pairs);
        }

        #[test]
        fn matching_difference_bound((a, mask, pick) in (2usize..=7).prop_flat_map(|k| (random_alpha(k), 1u32..(1 << k), 0usize..7))) {
            let s: Vec<usize> = (0..a.k()).filter(|i| mask >> i & 1 == 1).collect();
            prop_assume!(s.len() >= 2);
            let k = s[pick % s.len()];
            let rest: Vec<usize> = s.iter().copied().filter(|&u| u != k).collect();
            let diff = max_matching_weight(&a, &s) - max_matching_weight(&a, &rest);
            let mut bound = f64::NEG_INFINITY;
            for &i in &rest {
                for &j in &rest {
                    bound = bound.max(a.get(i, k) + a.get(k, j) - a.alpha_prime(i, j));
                }
            }
            prop_assert!(diff <= bound + 1e-9);
        }

        #[test]
        fn superadditive((a, split) in (2usize..=7).prop_flat_map(|k| (random_alpha(k), proptest::collection::vec(0u8..3, k)))) {
            let s1: Vec<usize> = (0..a.k()).filter(|&i| split[i] == 1).collect();
            let s2: Vec<usize> = (0..a.k()).filter(|&i| split[i] == 2).collect();
            let mut both: Vec<usize> = s1.iter().chain(&s2).copied().collect();
            both.sort_unstable();
            prop_assert!(max_matching_weight(&a, &both) + 1e-9 >= max_matching_weight(&a, &s1) + max_matching_weight(&a, &s2));
        }
    }
}
