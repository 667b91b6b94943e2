//! Occurrence counting: how many `k`-subsets of positions of `p` are
//! order-isomorphic to `q`.
//!
//! [`count_naive`] is the exhaustive oracle. [`count_fast`] dispatches on the
//! shape of `q`:
//!
//! * monotone `q`: chain DP over a Fenwick tree, `O(n k log n)`;
//! * `k = 3`: left/right smaller/greater counts per position, `O(n log n)`;
//! * anything else: position-ordered DFS with value-window pruning, the last
//!   level answered by a 2-D dominance table.

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::asymptotics::binomial;
use crate::exec;
use crate::fenwick::Fenwick;
use crate::perm::{Pattern, Permutation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Naive,
    MonotoneDp,
    /// Prefix/suffix smaller-greater decomposition, `k <= 3`.
    Decomposition,
    Pruned,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountResult {
    pub count: BigUint,
    pub method: Method,
}

impl CountResult {
    fn new(count: impl Into<BigUint>, method: Method) -> Self {
        Self {
            count: count.into(),
            method,
        }
    }
}

/// Largest `n` for which the pruned path builds its `(n+1)^2` lookup table.
const RANGE_TABLE_MAX_N: usize = 2048;
/// Below this the pruned path does not split the outer loop across threads.
const PARALLEL_MIN_N: usize = 512;

/// Exhaustive count over all `C(n, k)` position subsets.
pub fn count_naive(p: &Permutation, q: &Pattern) -> CountResult {
    let (n, k) = (p.len(), q.len());
    if k > n {
        return CountResult::new(0u32, Method::Naive);
    }
    let vals = p.as_slice();
    // q matches a subset iff reading it in q's rank order gives rising values.
    let by_rank = q.positions_by_rank();
    let mut idx: Vec<usize> = (0..k).collect();
    let mut total: u128 = 0;
    loop {
        if by_rank
            .windows(2)
            .all(|w| vals[idx[w[0]]] < vals[idx[w[1]]])
        {
            total += 1;
        }
        // next k-combination of 0..n in lexicographic order
        let mut i = k;
        loop {
            if i == 0 {
                return CountResult::new(total, Method::Naive);
            }
            i -= 1;
            if idx[i] < n - k + i {
                break;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Exact count using the fastest applicable algorithm.
pub fn count_fast(p: &Permutation, q: &Pattern) -> CountResult {
    let (n, k) = (p.len(), q.len());
    if k > n {
        return CountResult::new(0u32, Method::MonotoneDp);
    }
    if k <= 1 || q.is_increasing() {
        return CountResult::new(count_increasing(p.as_slice(), k), Method::MonotoneDp);
    }
    if q.is_decreasing() {
        return CountResult::new(
            count_increasing(p.complement().as_slice(), k),
            Method::MonotoneDp,
        );
    }
    if k == 3 {
        return CountResult::new(count_length_three(p.as_slice(), q.as_slice()), Method::Decomposition);
    }
    count_pruned(p, q)
}

/// Pruned depth-first enumeration; exact for every `q`.
pub fn count_pruned(p: &Permutation, q: &Pattern) -> CountResult {
    let (n, k) = (p.len(), q.len());
    if k > n {
        return CountResult::new(0u32, Method::Pruned);
    }
    if k == 0 {
        return CountResult::new(1u32, Method::Pruned);
    }
    let search = Search::new(p.as_slice(), q.as_slice(), n <= RANGE_TABLE_MAX_N);
    let branches = n - k + 1;
    let branch = |first: usize| -> u128 {
        let mut chosen = vec![0u32; k];
        search.from_first(first, &mut chosen)
    };
    let total = if n >= PARALLEL_MIN_N {
        exec::map_range(branches, branch)
            .into_iter()
            .fold(BigUint::default(), |acc, c| acc + c)
    } else {
        BigUint::from((0..branches).map(branch).sum::<u128>())
    };
    CountResult::new(total, Method::Pruned)
}

/// True iff `p` contains at least one occurrence of `q`.
pub fn contains(p: &Permutation, q: &Pattern) -> bool {
    let (n, k) = (p.len(), q.len());
    if k > n {
        return false;
    }
    if k == 0 {
        return true;
    }
    let search = Search::new(p.as_slice(), q.as_slice(), false);
    let mut chosen = vec![0u32; k];
    search.exists(0, 0, &mut chosen)
}

/// Number of increasing subsequences of length `k`.
fn count_increasing(vals: &[u32], k: usize) -> BigUint {
    let n = vals.len();
    if k == 0 {
        return BigUint::from(1u32);
    }
    if k > n {
        return BigUint::default();
    }
    if binomial(n as i64, k as i64) <= BigUint::from(u128::MAX) {
        BigUint::from(chain_dp::<u128>(vals, k).into_iter().sum::<u128>())
    } else {
        chain_dp::<BigUint>(vals, k).into_iter().sum()
    }
}

/// `dp[i]` = increasing chains of length `k` ending at position `i`.
fn chain_dp<T>(vals: &[u32], k: usize) -> Vec<T>
where
    T: Clone + Default + From<u32> + for<'a> std::ops::AddAssign<&'a T>,
{
    let n = vals.len();
    let mut dp = vec![T::from(1u32); n];
    for _ in 1..k {
        let mut tree = Fenwick::<T>::new(n);
        let mut next = Vec::with_capacity(n);
        for (v, ends) in vals.iter().zip(&dp) {
            let v = *v as usize;
            next.push(tree.prefix(v - 1));
            tree.add(v, ends);
        }
        dp = next;
    }
    dp
}

/// Length-3 patterns from per-position smaller/greater counts.
///
/// With `ls, lg` the entries left of `i` smaller/greater than `p_i` and
/// `rs, rg` likewise on the right:
/// `123 = Σ ls·rg`, `321 = Σ lg·rs`, and each remaining pattern is a pair
/// count anchored at its first or last entry minus a monotone count.
fn count_length_three(vals: &[u32], q: &[u32]) -> u128 {
    let n = vals.len();
    let mut tree = Fenwick::<u64>::new(n);
    let (mut inc, mut dec) = (0u128, 0u128);
    let (mut rg2, mut rs2, mut ls2, mut lg2) = (0u128, 0u128, 0u128, 0u128);
    let pairs = |m: u64| (m as u128) * (m.saturating_sub(1) as u128) / 2;
    for (i, &v) in vals.iter().enumerate() {
        let v = v as usize;
        let ls = tree.prefix(v - 1);
        let lg = i as u64 - ls;
        let rs = (v as u64 - 1) - ls;
        let rg = (n - v) as u64 - lg;
        tree.add(v, &1);
        inc += ls as u128 * rg as u128;
        dec += lg as u128 * rs as u128;
        rg2 += pairs(rg);
        rs2 += pairs(rs);
        ls2 += pairs(ls);
        lg2 += pairs(lg);
    }
    match q {
        [1, 2, 3] => inc,
        [3, 2, 1] => dec,
        [1, 3, 2] => rg2 - inc,
        [3, 1, 2] => rs2 - dec,
        [2, 1, 3] => ls2 - inc,
        [2, 3, 1] => lg2 - dec,
        _ => unreachable!("not a pattern of length 3: {q:?}"),
    }
}

/// `cells[x * stride + v]` = number of positions `< x` holding a value `< v`.
struct RangeTable {
    stride: usize,
    n: usize,
    cells: Vec<u32>,
}

impl RangeTable {
    fn new(vals: &[u32]) -> Self {
        let n = vals.len();
        let stride = n + 2;
        let mut cells = vec![0u32; (n + 1) * stride];
        for (x, &v) in vals.iter().enumerate() {
            let (prev, row) = cells[x * stride..(x + 2) * stride].split_at_mut(stride);
            row.copy_from_slice(prev);
            for c in &mut row[v as usize + 1..] {
                *c += 1;
            }
        }
        Self { stride, n, cells }
    }

    #[inline]
    fn below(&self, x: usize, v: u32) -> u32 {
        self.cells[x * self.stride + v as usize]
    }

    /// Positions in `from..n` with a value strictly inside `(lo, hi)`.
    #[inline]
    fn count_window(&self, from: usize, lo: u32, hi: u32) -> u32 {
        let all = self.below(self.n, hi) - self.below(self.n, lo + 1);
        let before = self.below(from, hi) - self.below(from, lo + 1);
        all - before
    }
}

/// DFS state shared by every branch of one (p, q) search.
struct Search<'a> {
    vals: &'a [u32],
    k: usize,
    /// Earlier pattern index holding the nearest smaller / larger value.
    lower: Vec<Option<usize>>,
    upper: Vec<Option<usize>>,
    table: Option<RangeTable>,
}

impl<'a> Search<'a> {
    fn new(vals: &'a [u32], q: &[u32], with_table: bool) -> Self {
        let k = q.len();
        let mut lower = Vec::with_capacity(k);
        let mut upper = Vec::with_capacity(k);
        for t in 0..k {
            let below = (0..t).filter(|&s| q[s] < q[t]).max_by_key(|&s| q[s]);
            let above = (0..t).filter(|&s| q[s] > q[t]).min_by_key(|&s| q[s]);
            lower.push(below);
            upper.push(above);
        }
        Self {
            vals,
            k,
            lower,
            upper,
            table: with_table.then(|| RangeTable::new(vals)),
        }
    }

    #[inline]
    fn window(&self, depth: usize, chosen: &[u32]) -> (u32, u32) {
        let lo = self.lower[depth].map_or(0, |s| chosen[s]);
        let hi = self.upper[depth].map_or(self.vals.len() as u32 + 1, |s| chosen[s]);
        (lo, hi)
    }

    fn from_first(&self, first: usize, chosen: &mut [u32]) -> u128 {
        if self.k == 1 {
            return 1;
        }
        chosen[0] = self.vals[first];
        self.count(1, first + 1, chosen)
    }

    fn count(&self, depth: usize, start: usize, chosen: &mut [u32]) -> u128 {
        let n = self.vals.len();
        let (lo, hi) = self.window(depth, chosen);
        let last = n - (self.k - depth);
        if depth + 1 == self.k {
            if let Some(table) = &self.table {
                return table.count_window(start, lo, hi) as u128;
            }
            return self.vals[start..]
                .iter()
                .filter(|&&v| lo < v && v < hi)
                .count() as u128;
        }
        let mut total = 0;
        for pos in start..=last {
            let v = self.vals[pos];
            if lo < v && v < hi {
                chosen[depth] = v;
                total += self.count(depth + 1, pos + 1, chosen);
            }
        }
        total
    }

    fn exists(&self, depth: usize, start: usize, chosen: &mut [u32]) -> bool {
        if depth == self.k {
            return true;
        }
        let (lo, hi) = self.window(depth, chosen);
        let last = self.vals.len() - (self.k - depth);
        for pos in start..=last {
            let v = self.vals[pos];
            if lo < v && v < hi {
                chosen[depth] = v;
                if self.exists(depth + 1, pos + 1, chosen) {
                    return true;
                }
            }
        }
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::{all_permutations, random_permutation, stream_rng, Seed};
    use proptest::prelude::*;

    fn perm(v: &[i64]) -> Permutation {
        Permutation::new(v.iter().copied()).unwrap()
    }

    fn big(x: u64) -> BigUint {
        BigUint::from(x)
    }

    #[test]
    fn naive_examples() {
        assert_eq!(count_naive(&perm(&[2, 3, 1]), &perm(&[2, 1])).count, big(2));
        assert_eq!(count_naive(&Permutation::identity(5), &perm(&[1, 2])).count, big(10));
        assert_eq!(count_naive(&perm(&[1, 4, 3, 2]), &perm(&[1, 3, 2])).count, big(3));
    }

    #[test]
    fn fast_examples() {
        let r = count_fast(&Permutation::identity(100), &perm(&[1, 2, 3]));
        assert_eq!(r.count, big(161_700));
        assert_eq!(r.method, Method::MonotoneDp);
        assert_eq!(count_fast(&perm(&[5, 4, 3, 2, 1]), &perm(&[1, 2])).count, big(0));
        let p = random_permutation(60, &mut stream_rng(Seed(7), 0));
        let q = perm(&[2, 4, 1, 3]);
        let fast = count_fast(&p, &q);
        assert_eq!(fast.method, Method::Pruned);
        assert_eq!(fast.count, count_naive(&p, &q).count);
    }

    #[test]
    fn contains_examples() {
        let q = perm(&[3, 5, 1, 4, 2]);
        assert!(contains(&q, &q));
        assert!(!contains(&perm(&[1, 2, 3]), &perm(&[3, 2, 1])));
        assert!(!contains(&perm(&[2, 4, 1, 3]), &perm(&[1, 2, 3])));
        assert!(contains(&perm(&[2, 4, 1, 3]), &perm(&[2, 1])));
    }

    #[test]
    fn degenerate_lengths() {
        let p = perm(&[3, 1, 2]);
        let empty = Permutation::identity(0);
        for f in [count_naive, count_fast, count_pruned] {
            assert_eq!(f(&p, &empty).count, big(1));
            assert_eq!(f(&p, &perm(&[1])).count, big(3));
            assert_eq!(f(&p, &perm(&[1, 2, 3, 4])).count, big(0));
            assert_eq!(f(&empty, &empty).count, big(1));
        }
        assert!(contains(&p, &empty));
        assert!(!contains(&p, &perm(&[1, 2, 3, 4])));
    }

    #[test]
    fn every_length_three_pattern_on_all_of_s6() {
        let patterns: Vec<_> = all_permutations(3).collect();
        for p in all_permutations(6) {
            for q in &patterns {
                assert_eq!(count_fast(&p, q).count, count_naive(&p, q).count, "{p} / {q}");
            }
        }
    }

    #[test]
    fn sum_over_length_three_patterns_is_binomial() {
        let mut rng = stream_rng(Seed(11), 0);
        for n in [0, 2, 3, 7, 40] {
            let p = random_permutation(n, &mut rng);
            let total: BigUint = all_permutations(3).map(|q| count_fast(&p, &q).count).sum();
            assert_eq!(total, binomial(n as i64, 3));
        }
    }

    #[test]
    fn seeded_oracle_equivalence() {
        // 200 seeded (p, q) pairs, n <= 10, k <= 5
        let mut rng = stream_rng(Seed(0xC0FFEE), 0);
        use rand::Rng;
        for _ in 0..200 {
            let n = rng.random_range(0..=10);
            let k = rng.random_range(1..=5);
            let p = random_permutation(n, &mut rng);
            let q = random_permutation(k, &mut rng);
            let expected = count_naive(&p, &q).count;
            assert_eq!(count_fast(&p, &q).count, expected, "{p} / {q}");
            assert_eq!(count_pruned(&p, &q).count, expected, "{p} / {q}");
            assert_eq!(contains(&p, &q), expected > BigUint::default());
        }
    }

    #[test]
    fn pruned_without_table_agrees() {
        let p = random_permutation(40, &mut stream_rng(Seed(3), 1));
        for q in all_permutations(4) {
            let search = Search::new(p.as_slice(), q.as_slice(), false);
            let mut chosen = vec![0u32; 4];
            let plain: u128 = (0..=36).map(|f| search.from_first(f, &mut chosen)).sum();
            assert_eq!(BigUint::from(plain), count_naive(&p, &q).count);
        }
    }

    #[test]
    fn large_monotone_uses_big_integers() {
        // C(300, 40) does not fit in u128.
        assert!(binomial(300, 40) > BigUint::from(u128::MAX));
        let r = count_fast(&Permutation::identity(300), &Permutation::identity(40));
        assert_eq!(r.count, binomial(300, 40));
    }

    fn arb_perm(max: usize) -> impl Strategy<Value = Permutation> {
        (0..=max)
            .prop_flat_map(|n| Just((1..=n as u32).collect::<Vec<_>>()).prop_shuffle())
            .prop_map(|v| Permutation::new(v).unwrap())
    }

    proptest! {
        #[test]
        fn prop_fast_matches_naive(p in arb_perm(11), q in arb_perm(5)) {
            prop_assert_eq!(count_fast(&p, &q).count, count_naive(&p, &q).count);
        }

        #[test]
        fn prop_symmetry_equivariance(p in arb_perm(10), q in arb_perm(4)) {
            let base = count_fast(&p, &q).count;
            prop_assert_eq!(count_fast(&p.reverse(), &q.reverse()).count, base.clone());
            prop_assert_eq!(count_fast(&p.complement(), &q.complement()).count, base.clone());
            prop_assert_eq!(count_fast(&p.inverse(), &q.inverse()).count, base);
        }

        #[test]
        fn prop_count_bounded_by_binomial(p in arb_perm(12), q in arb_perm(4)) {
            prop_assert!(count_fast(&p, &q).count <= binomial(p.len() as i64, q.len() as i64));
        }
    }
}
