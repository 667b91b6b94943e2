//! Exact mean and variance of the occurrence count `X_{n,q}` in a uniform
//! random permutation of length `n`.
//!
//! Write `X = Σ_I X_I` over `k`-subsets `I`. In the ordered double sum
//! `Var X = Σ_{I1,I2} (E[X_I1 X_I2] - 1/k!^2)`, disjoint pairs contribute
//! exactly zero, the diagonal contributes `1/k! - 1/k!^2` per subset, and a
//! pair sharing `j` positions depends only on how the two subsets sit inside
//! their union window of size `u = 2k - j`. Grouping pairs by that
//! [`OverlapScheme`] gives
//!
//! ```text
//! Var X = (1/k! - 1/k!^2) C(n,k) + Σ_{j=1}^{k-1} T_j C(n, 2k-j),
//! T_j   = Σ_{schemes s with overlap j} (A(s)/u! - 1/k!^2),
//! ```
//!
//! where `A(s)` counts the permutations of the window in which both subsets
//! form `q`. The coefficients are independent of `n`, so the polynomial is
//! exact at every `n`.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{binomial, factorial};
use crate::count::count_naive;
use crate::error::{Error, Result};
use crate::exec;
use crate::json;
use crate::perm::{all_permutations, next_lexicographic, Pattern};
use crate::poly::Poly;

/// Default cap on pattern length for scheme enumeration (`9!` words per scheme at `k = 5`).
pub const DEFAULT_MAX_K: usize = 5;
/// Largest `n` accepted by [`brute_force_moments`].
pub const BRUTE_FORCE_MAX_N: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MomentsConfig {
    /// Longest pattern for which the variance polynomial is computed.
    pub max_k: usize,
}

impl Default for MomentsConfig {
    fn default() -> Self {
        Self { max_k: DEFAULT_MAX_K }
    }
}

/// How two `k`-subsets overlap inside their union window `1..=u`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OverlapScheme {
    pub union_size: usize,
    /// 1-based, increasing.
    pub first: Vec<usize>,
    /// 1-based, increasing.
    pub second: Vec<usize>,
    pub overlap: usize,
}

impl OverlapScheme {
    pub fn k(&self) -> usize {
        self.first.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariancePolynomial {
    pub pattern: Pattern,
    /// Coefficient of `C(n, k)`.
    #[serde(with = "json::rational")]
    pub diag_coeff: BigRational,
    /// `overlap_coeffs[j - 1]` is the coefficient of `C(n, 2k - j)`.
    #[serde(with = "json::rational_vec")]
    pub overlap_coeffs: Vec<BigRational>,
}

impl VariancePolynomial {
    pub fn k(&self) -> usize {
        self.pattern.len()
    }

    /// `T_j`, `1 <= j <= k - 1`.
    pub fn overlap_coeff(&self, j: usize) -> Option<&BigRational> {
        j.checked_sub(1).and_then(|i| self.overlap_coeffs.get(i))
    }

    /// Exact `Var(X_{n,q})`.
    pub fn evaluate(&self, n: usize) -> BigRational {
        let k = self.k() as i64;
        let n = n as i64;
        let mut acc = &self.diag_coeff * int(binomial(n, k));
        for (i, t) in self.overlap_coeffs.iter().enumerate() {
            let j = i as i64 + 1;
            acc += t * int(binomial(n, 2 * k - j));
        }
        acc
    }

    /// The same polynomial in powers of `n`.
    pub fn to_power_basis(&self) -> Poly {
        let k = self.k();
        let mut acc = Poly::binomial(k).scale(&self.diag_coeff);
        for (i, t) in self.overlap_coeffs.iter().enumerate() {
            acc = &acc + &Poly::binomial(2 * k - (i + 1)).scale(t);
        }
        acc
    }

    /// Coefficient of `n^(2k-1)` in the power basis.
    pub fn leading_coefficient(&self) -> BigRational {
        let k = self.k();
        if k == 0 {
            return BigRational::zero();
        }
        self.to_power_basis().coeff(2 * k - 1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MomentReport {
    pub n: usize,
    pub pattern: Pattern,
    #[serde(with = "json::rational")]
    pub mean: BigRational,
    #[serde(with = "json::rational")]
    pub variance: BigRational,
}

fn int(x: impl Into<BigInt>) -> BigRational {
    BigRational::from_integer(x.into())
}

/// `E(X_{n,q}) = C(n,k) / k!`.
pub fn expectation(n: usize, k: usize) -> BigRational {
    BigRational::new(binomial(n as i64, k as i64).into(), factorial(k as u64).into())
}

/// Sum over ordered disjoint pairs of `E[X_I1 X_I2] = 1/k!^2`:
/// `C(n,k) C(n-k,k) / k!^2`.
pub fn disjoint_pair_sum(n: usize, k: usize) -> BigRational {
    let (n, k) = (n as i64, k as i64);
    let kf = factorial(k as u64);
    BigRational::new(
        (binomial(n, k) * binomial(n - k, k)).into(),
        (&kf * &kf).into(),
    )
}

/// All `r`-subsets of `1..=n`, each increasing, in lexicographic order.
fn subsets(n: usize, r: usize) -> Vec<Vec<usize>> {
    if r > n {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (1..=r).collect();
    loop {
        out.push(idx.clone());
        let mut i = r;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] < n - r + i + 1 {
                break;
            }
        }
        idx[i] += 1;
        for j in i + 1..r {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Every ordered scheme of two `k`-subsets sharing `j` positions; there are
/// `C(2k-j, k) · C(k, j)` of them.
pub fn enumerate_schemes(k: usize, j: usize) -> Result<Vec<OverlapScheme>> {
    if j == 0 || j >= k {
        return Err(Error::OverlapOutOfRange {
            k,
            overlap: j,
            max: k.saturating_sub(1),
        });
    }
    let u = 2 * k - j;
    let mut out = Vec::new();
    for first in subsets(u, k) {
        let rest: Vec<usize> = (1..=u).filter(|x| !first.contains(x)).collect();
        for shared in subsets(k, j) {
            let mut second: Vec<usize> = rest.clone();
            second.extend(shared.iter().map(|&i| first[i - 1]));
            second.sort_unstable();
            out.push(OverlapScheme {
                union_size: u,
                first: first.clone(),
                second,
                overlap: j,
            });
        }
    }
    Ok(out)
}

/// `A(s)`: permutations `w` of the window `1..=u` such that both
/// `w|first` and `w|second` standardize to `q`. Exhaustive over `u!` words.
pub fn joint_count(s: &OverlapScheme, q: &Pattern) -> Result<BigUint> {
    if s.first.len() != q.len() || s.second.len() != q.len() {
        return Err(Error::ArityMismatch {
            scheme: s.first.len(),
            pattern: q.len(),
        });
    }
    let by_rank = q.positions_by_rank();
    // window positions read in q's rank order; each must hold rising values
    let chain = |set: &[usize]| -> Vec<usize> { by_rank.iter().map(|&r| set[r] - 1).collect() };
    let (c1, c2) = (chain(&s.first), chain(&s.second));
    let rising = |w: &[u8], c: &[usize]| c.windows(2).all(|p| w[p[0]] < w[p[1]]);
    let mut w: Vec<u8> = (0..s.union_size as u8).collect();
    let mut hits: u64 = 0;
    loop {
        if rising(&w, &c1) && rising(&w, &c2) {
            hits += 1;
        }
        if !next_lexicographic(&mut w) {
            break;
        }
    }
    Ok(BigUint::from(hits))
}

pub fn variance_polynomial(q: &Pattern) -> Result<VariancePolynomial> {
    variance_polynomial_with(q, &MomentsConfig::default())
}

pub fn variance_polynomial_with(q: &Pattern, cfg: &MomentsConfig) -> Result<VariancePolynomial> {
    let k = q.len();
    if k == 0 {
        return Err(Error::InvalidParameter("pattern length must be at least 1".into()));
    }
    if k > cfg.max_k {
        return Err(Error::PatternTooLong { k, cap: cfg.max_k });
    }
    if k > DEFAULT_MAX_K {
        log::warn!(
            "pattern length {k} is above the default cap {DEFAULT_MAX_K}; \
             enumerating {}! words per scheme",
            2 * k - 1
        );
    }
    let kf = int(factorial(k as u64));
    let indep = (&kf * &kf).recip();
    let diag_coeff = kf.recip() - &indep;

    let mut overlap_coeffs = Vec::with_capacity(k.saturating_sub(1));
    for j in 1..k {
        let schemes = enumerate_schemes(k, j)?;
        let counts = exec::map_range(schemes.len(), |i| joint_count(&schemes[i], q));
        let total = counts.into_iter().sum::<Result<BigUint>>()?;
        let u_fact = int(factorial((2 * k - j) as u64));
        let t = int(total) / u_fact - &indep * int(schemes.len());
        overlap_coeffs.push(t);
    }
    Ok(VariancePolynomial {
        pattern: q.clone(),
        diag_coeff,
        overlap_coeffs,
    })
}

/// Exact `Var(X_{n,q})` from the variance polynomial.
pub fn exact_variance(n: usize, q: &Pattern) -> Result<BigRational> {
    Ok(variance_polynomial(q)?.evaluate(n))
}

/// Closed-form mean and variance.
pub fn moment_report(n: usize, q: &Pattern) -> Result<MomentReport> {
    Ok(MomentReport {
        n,
        pattern: q.clone(),
        mean: expectation(n, q.len()),
        variance: exact_variance(n, q)?,
    })
}

/// Mean and variance by enumerating all of `S_n` and counting naively.
pub fn brute_force_moments(n: usize, q: &Pattern) -> Result<MomentReport> {
    if n > BRUTE_FORCE_MAX_N {
        return Err(Error::BruteForceTooLarge { n, cap: BRUTE_FORCE_MAX_N });
    }
    let perms: Vec<_> = all_permutations(n).collect();
    let counts = exec::map_range(perms.len(), |i| count_naive(&perms[i], q).count);
    let mut sum = BigUint::zero();
    let mut sum_sq = BigUint::zero();
    for c in &counts {
        sum += c;
        sum_sq += c * c;
    }
    let total = int(perms.len());
    let mean = int(sum) / &total;
    let variance = int(sum_sq) / &total - &mean * &mean;
    Ok(MomentReport {
        n,
        pattern: q.clone(),
        mean,
        variance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymptotics::{c_k, pattern_leading_coefficient, pattern_overlap_sum, s_sum};
    use crate::perm::Permutation;
    use num_traits::{One, Signed};

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn pat(s: &str) -> Pattern {
        s.parse().unwrap()
    }

    #[test]
    fn expectation_examples() {
        assert_eq!(expectation(4, 2), r(3, 1));
        assert_eq!(expectation(3, 3), r(1, 6));
        assert_eq!(expectation(10, 3), r(20, 1));
    }

    #[test]
    fn enumerate_schemes_examples() {
        let s = enumerate_schemes(2, 1).unwrap();
        let pairs: Vec<_> = s.iter().map(|s| (s.first.clone(), s.second.clone())).collect();
        assert_eq!(
            pairs,
            vec![
                (vec![1, 2], vec![1, 3]),
                (vec![1, 2], vec![2, 3]),
                (vec![1, 3], vec![1, 2]),
                (vec![1, 3], vec![2, 3]),
                (vec![2, 3], vec![1, 2]),
                (vec![2, 3], vec![1, 3]),
            ]
        );
        assert_eq!(enumerate_schemes(3, 2).unwrap().len(), 12);
        assert_eq!(
            enumerate_schemes(2, 0),
            Err(Error::OverlapOutOfRange { k: 2, overlap: 0, max: 1 })
        );
        assert!(enumerate_schemes(3, 3).is_err());
    }

    #[test]
    fn scheme_invariants() {
        for k in 2..=5 {
            for j in 1..k {
                let schemes = enumerate_schemes(k, j).unwrap();
                let expected = binomial((2 * k - j) as i64, k as i64) * binomial(k as i64, j as i64);
                assert_eq!(BigUint::from(schemes.len()), expected);
                for s in &schemes {
                    let mut union: Vec<usize> = s.first.iter().chain(&s.second).copied().collect();
                    union.sort_unstable();
                    union.dedup();
                    assert_eq!(union, (1..=s.union_size).collect::<Vec<_>>());
                    let shared = s.first.iter().filter(|x| s.second.contains(x)).count();
                    assert_eq!(shared, j);
                }
            }
        }
    }

    #[test]
    fn joint_count_examples() {
        let q = pat("1 2");
        let s = |a: Vec<usize>, b: Vec<usize>| OverlapScheme {
            union_size: 3,
            first: a,
            second: b,
            overlap: 1,
        };
        assert_eq!(joint_count(&s(vec![1, 2], vec![2, 3]), &q).unwrap(), BigUint::from(1u32));
        assert_eq!(joint_count(&s(vec![1, 2], vec![1, 3]), &q).unwrap(), BigUint::from(2u32));
        let same = OverlapScheme {
            union_size: 2,
            first: vec![1, 2],
            second: vec![1, 2],
            overlap: 2,
        };
        assert_eq!(joint_count(&same, &q).unwrap(), BigUint::from(1u32));
        assert!(matches!(
            joint_count(&s(vec![1, 2], vec![2, 3]), &pat("1 2 3")),
            Err(Error::ArityMismatch { .. })
        ));
    }

    #[test]
    fn variance_polynomial_examples() {
        let vp = variance_polynomial(&pat("1 2")).unwrap();
        assert_eq!(vp.diag_coeff, r(1, 4));
        assert_eq!(vp.overlap_coeffs, vec![r(1, 6)]);
        assert_eq!(vp.evaluate(2), r(1, 4));
        assert_eq!(vp.evaluate(3), r(11, 12));
        let rev = variance_polynomial(&pat("2 1")).unwrap();
        assert_eq!(rev.diag_coeff, vp.diag_coeff);
        assert_eq!(rev.overlap_coeffs, vp.overlap_coeffs);
        let one = variance_polynomial(&pat("1")).unwrap();
        assert_eq!(one.diag_coeff, BigRational::zero());
        assert!(one.overlap_coeffs.is_empty());
        assert_eq!(one.evaluate(100), BigRational::zero());
    }

    #[test]
    fn exact_variance_examples() {
        assert_eq!(exact_variance(4, &pat("1 2")).unwrap(), r(13, 6));
        assert_eq!(exact_variance(3, &pat("1 3 2")).unwrap(), r(5, 36));
        assert_eq!(exact_variance(2, &pat("1 2 3")).unwrap(), BigRational::zero());
    }

    #[test]
    fn brute_force_examples() {
        let m = brute_force_moments(4, &pat("1 2")).unwrap();
        assert_eq!((m.mean, m.variance), (r(3, 1), r(13, 6)));
        let m = brute_force_moments(3, &pat("1 2 3")).unwrap();
        assert_eq!((m.mean, m.variance), (r(1, 6), r(5, 36)));
        let a = brute_force_moments(4, &pat("1 2 3")).unwrap().variance;
        let b = brute_force_moments(4, &pat("1 3 2")).unwrap().variance;
        assert_ne!(a, b);
        assert_eq!(
            brute_force_moments(9, &pat("1 2")),
            Err(Error::BruteForceTooLarge { n: 9, cap: 8 })
        );
    }

    #[test]
    fn disjoint_pair_sum_examples() {
        for k in 1..=4usize {
            let kf = factorial(k as u64);
            assert_eq!(
                disjoint_pair_sum(2 * k, k),
                BigRational::new(binomial(2 * k as i64, k as i64).into(), (&kf * &kf).into())
            );
            assert_eq!(disjoint_pair_sum(2 * k - 1, k), BigRational::zero());
        }
        assert_eq!(disjoint_pair_sum(4, 2), r(3, 2));
    }

    #[test]
    fn closed_form_matches_enumeration_small() {
        for k in 1..=3 {
            for q in all_permutations(k) {
                let vp = variance_polynomial(&q).unwrap();
                for n in k..=7 {
                    let bf = brute_force_moments(n, &q).unwrap();
                    assert_eq!(vp.evaluate(n), bf.variance, "q = {q}, n = {n}");
                    assert_eq!(expectation(n, k), bf.mean);
                }
            }
        }
    }

    #[test]
    fn scheme_sum_is_pattern_overlap_sum() {
        for k in 2..=4 {
            let schemes = enumerate_schemes(k, 1).unwrap();
            for q in all_permutations(k) {
                let total: BigUint = schemes.iter().map(|s| joint_count(s, &q).unwrap()).sum();
                assert_eq!(total, pattern_overlap_sum(&q), "q = {q}");
                if q.is_increasing() || q.is_decreasing() {
                    assert_eq!(total, s_sum(k));
                }
            }
        }
        let k3: BigUint = enumerate_schemes(3, 1)
            .unwrap()
            .iter()
            .map(|s| joint_count(s, &pat("1 3 2")).unwrap())
            .sum();
        assert_eq!(k3, BigUint::from(114u32));
    }

    #[test]
    fn single_overlap_coefficient() {
        for k in 2..=4usize {
            let kf = BigRational::from_integer(factorial(k as u64).into());
            let uf = BigRational::from_integer(factorial(2 * k as u64 - 1).into());
            let excess = BigRational::from_integer(
                (BigUint::from(k) * binomial(2 * k as i64 - 1, k as i64)).into(),
            ) / (&kf * &kf);
            for q in all_permutations(k) {
                let t1 = variance_polynomial(&q).unwrap().overlap_coeff(1).unwrap().clone();
                let sum = BigRational::from_integer(pattern_overlap_sum(&q).into());
                assert_eq!(t1, &sum / &uf - &excess, "q = {q}");
                if q.is_increasing() || q.is_decreasing() {
                    let s = BigRational::from_integer(s_sum(k).into());
                    assert_eq!(t1, s / &uf - &excess);
                }
            }
        }
    }

    #[test]
    fn leading_coefficient_is_pattern_aware() {
        for k in 1..=4 {
            for q in all_permutations(k) {
                let vp = variance_polynomial(&q).unwrap();
                let lead = vp.leading_coefficient();
                assert_eq!(lead, pattern_leading_coefficient(&q), "q = {q}");
                if q.is_increasing() || q.is_decreasing() {
                    assert_eq!(lead, c_k(k));
                }
            }
        }
        assert_eq!(variance_polynomial(&pat("1 2")).unwrap().leading_coefficient(), r(1, 36));
    }

    #[test]
    fn symmetry_classes_share_polynomials() {
        for q in all_permutations(4) {
            let base = variance_polynomial(&q).unwrap();
            for sym in [q.reverse(), q.complement(), q.inverse()] {
                let other = variance_polynomial(&sym).unwrap();
                assert_eq!(other.diag_coeff, base.diag_coeff);
                assert_eq!(other.overlap_coeffs, base.overlap_coeffs, "{q} vs {sym}");
            }
        }
    }

    #[test]
    fn variance_positive_above_k() {
        for k in 2..=4 {
            let kf = int(factorial(k as u64));
            for q in all_permutations(k) {
                let vp = variance_polynomial(&q).unwrap();
                assert_eq!(vp.evaluate(k), kf.recip() * (BigRational::one() - kf.recip()));
                for n in k + 1..=40 {
                    assert!(vp.evaluate(n).is_positive(), "q = {q}, n = {n}");
                }
            }
        }
    }

    #[test]
    fn scaled_variance_approaches_c3_for_monotone() {
        let n = 10_000usize;
        let scaled = exact_variance(n, &Permutation::identity(3)).unwrap()
            / int(BigUint::from(n).pow(5));
        let rel = (scaled / c_k(3) - BigRational::one()).abs();
        assert!(rel < r(1, 100), "relative gap {rel}");
    }

    #[test]
    fn cap_is_enforced() {
        let q = Permutation::identity(6);
        assert_eq!(
            variance_polynomial(&q),
            Err(Error::PatternTooLong { k: 6, cap: DEFAULT_MAX_K })
        );
        assert!(variance_polynomial(&Permutation::identity(0)).is_err());
    }

    #[test]
    fn json_shapes() {
        let vp = variance_polynomial(&pat("1 2")).unwrap();
        let v = serde_json::to_value(&vp).unwrap();
        assert_eq!(v["diag_coeff"], serde_json::json!({"num": "1", "den": "4"}));
        assert_eq!(v["overlap_coeffs"][0], serde_json::json!({"num": "1", "den": "6"}));
        assert_eq!(v["pattern"], serde_json::json!([1, 2]));
        let back: VariancePolynomial = serde_json::from_value(v).unwrap();
        assert_eq!(back, vp);
        let rep = moment_report(4, &pat("1 2")).unwrap();
        let v = serde_json::to_value(&rep).unwrap();
        assert_eq!(v["variance"], serde_json::json!({"num": "13", "den": "6"}));
    }
}
