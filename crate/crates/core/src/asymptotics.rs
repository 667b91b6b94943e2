//! Closed-form constants behind the variance lower bound and the dependency
//! criterion: one-point overlap probabilities, the squared-weight sum `S_k`,
//! the Vandermonde and Cauchy-Schwarz steps, the leading constant `c_k`,
//! the dependency-degree bound and the criterion ratio
//! `N_n Δ_n^(m-1) (A_n / σ_n)^m`.

use std::f64::consts::LN_2;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::json;
use crate::moments;
use crate::perm::Pattern;
use crate::poly::Poly;

/// `C(n, k)`; zero when `k < 0`, `k > n` or `n < 0`.
pub fn binomial(n: i64, k: i64) -> BigUint {
    if n < 0 || k < 0 || k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k) as u64;
    let n = n as u64;
    let mut acc = BigUint::one();
    for i in 1..=k {
        acc *= n - k + i;
        acc /= i;
    }
    acc
}

pub fn factorial(n: u64) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, i| acc * i)
}

fn ratio(num: impl Into<BigInt>, den: impl Into<BigInt>) -> BigRational {
    BigRational::new(num.into(), den.into())
}

fn int(x: impl Into<BigInt>) -> BigRational {
    BigRational::from_integer(x.into())
}

fn check_k(k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidParameter("pattern length must be at least 1".into()));
    }
    Ok(())
}

/// Number of ways to place the smaller / larger companions around a shared
/// entry of rank `a` in one occurrence and `b` in the other:
/// `C(a+b-2, a-1) C(2k-a-b, k-a)`.
pub fn overlap_weight(k: usize, a: usize, b: usize) -> BigUint {
    let (k, a, b) = (k as i64, a as i64, b as i64);
    binomial(a + b - 2, a - 1) * binomial(2 * k - a - b, k - a)
}

/// Upper bound on the dependency-graph degree, `C(n,k) - C(n-k,k) - 1`.
pub fn delta_bound(n: usize, k: usize) -> Result<BigUint> {
    if k == 0 || n < k {
        return Err(Error::InvalidParameter(format!(
            "delta bound needs n >= k >= 1, got n = {n}, k = {k}"
        )));
    }
    let (n, k) = (n as i64, k as i64);
    Ok(binomial(n, k) - binomial(n - k, k) - 1u32)
}

/// Both forms of `P(both occurrences are q | they share one entry of rank
/// a in the first and b in the second)`: the product of the three
/// independent events, and the simplified binomial form.
pub fn one_overlap_probability_forms(k: usize, a: usize, b: usize) -> Result<(BigRational, BigRational)> {
    check_k(k)?;
    if a == 0 || b == 0 || a > k || b > k {
        return Err(Error::InvalidParameter(format!(
            "ranks (a, b) = ({a}, {b}) must lie in 1..={k}"
        )));
    }
    let (kk, aa, bb) = (k as i64, a as i64, b as i64);
    let product_den = BigUint::from(2 * k - 1)
        * binomial(2 * kk - 2, aa + bb - 2)
        * factorial(a as u64 - 1)
        * factorial(b as u64 - 1)
        * factorial((k - a) as u64)
        * factorial((k - b) as u64);
    let product = ratio(1, product_den);
    let simplified = ratio(overlap_weight(k, a, b), factorial(2 * k as u64 - 1));
    Ok((product, simplified))
}

/// Probability that two occurrences sharing exactly one entry (rank `a` in
/// the first, rank `b` in the second) both form the pattern.
pub fn one_overlap_probability(k: usize, a: usize, b: usize) -> Result<BigRational> {
    let (product, simplified) = one_overlap_probability_forms(k, a, b)?;
    if product != simplified {
        return Err(Error::IdentityViolation(format!(
            "one-overlap probability k={k} a={a} b={b}: product {product} != simplified {simplified}"
        )));
    }
    Ok(product)
}

/// `S_k = Σ_{a,b} C(a+b-2,a-1)^2 C(2k-a-b,k-a)^2`.
pub fn s_sum(k: usize) -> BigUint {
    let mut acc = BigUint::zero();
    for a in 1..=k {
        for b in 1..=k {
            let w = overlap_weight(k, a, b);
            acc += &w * &w;
        }
    }
    acc
}

/// `(Σ_{a,b} C(a+b-2,a-1) C(2k-a-b,k-a), (2k-1) C(2k-2,k-1))`.
pub fn vandermonde_check(k: usize) -> (BigUint, BigUint) {
    let mut lhs = BigUint::zero();
    for a in 1..=k {
        for b in 1..=k {
            lhs += overlap_weight(k, a, b);
        }
    }
    let k = k as i64;
    let rhs = BigUint::from((2 * k - 1).max(0) as u64) * binomial(2 * k - 2, k - 1);
    (lhs, rhs)
}

/// `S_k - (2k-1)^2 C(2k-2,k-1)^2 / k^2`; strictly positive because the
/// weights are not all equal.
pub fn cauchy_gap(k: usize) -> Result<BigRational> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("cauchy gap needs k >= 2, got {k}")));
    }
    let (_, total) = vandermonde_check(k);
    let kk = BigUint::from(k);
    Ok(int(s_sum(k)) - ratio(&total * &total, &kk * &kk))
}

/// `S_k / (2k-1)!^2 - k^2 / k!^4`.
pub fn c_k(k: usize) -> BigRational {
    if k == 0 {
        return BigRational::zero();
    }
    let f = factorial(2 * k as u64 - 1);
    let kf = factorial(k as u64);
    ratio(s_sum(k), &f * &f) - ratio(BigUint::from(k * k), kf.pow(4))
}

/// `Σ_{α,β} w(α,β) · w(q_α, q_β)` over positions `α, β` of `q`, with `w`
/// the [`overlap_weight`]. Equals the exact sum of joint counts over all
/// one-entry overlap schemes. Reduces to [`s_sum`] when `q` is monotone.
pub fn pattern_overlap_sum(q: &Pattern) -> BigUint {
    let k = q.len();
    let vals = q.as_slice();
    let mut acc = BigUint::zero();
    for alpha in 1..=k {
        for beta in 1..=k {
            let a = vals[alpha - 1] as usize;
            let b = vals[beta - 1] as usize;
            acc += overlap_weight(k, alpha, beta) * overlap_weight(k, a, b);
        }
    }
    acc
}

/// Exact coefficient of `n^(2k-1)` in `Var(X_{n,q})`.
pub fn pattern_leading_coefficient(q: &Pattern) -> BigRational {
    let k = q.len();
    if k == 0 {
        return BigRational::zero();
    }
    let f = factorial(2 * k as u64 - 1);
    let kf = factorial(k as u64);
    ratio(pattern_overlap_sum(q), &f * &f) - ratio(BigUint::from(k * k), kf.pow(4))
}

/// Coefficient of `n^(2k-1)` in `(C(n,k) C(n-k,k) - C(n,k)^2) / k!^2`,
/// from an exact polynomial expansion.
pub fn easy_term_coefficient(k: usize) -> BigRational {
    let choose = Poly::binomial(k);
    let disjoint = &choose * &Poly::shifted_binomial(k as i64, k);
    let all = &choose * &choose;
    let kf = int(factorial(k as u64));
    let diff = (&disjoint - &all).scale(&(&kf * &kf).recip());
    diff.coeff((2 * k).saturating_sub(1))
}

/// Where `σ_n` comes from in the criterion ratio.
#[derive(Debug, Clone, PartialEq)]
pub enum SigmaSource {
    /// `sqrt(Var(X_{n,q}))` from the exact variance polynomial.
    Exact(Pattern),
    /// `constant · n^(k - 1/2)`.
    ScalingEstimate { constant: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JansonAssessment {
    pub n: usize,
    pub k: usize,
    pub m: u32,
    #[serde(with = "json::biguint_str")]
    pub n_n: BigUint,
    #[serde(with = "json::biguint_str")]
    pub delta_n: BigUint,
    pub a_n: u32,
    pub sigma_n: f64,
    pub ratio: f64,
    pub log_ratio: f64,
    /// Exact value; present when `σ_n^2` is rational and `m` is even.
    #[serde(with = "json::rational_opt")]
    pub ratio_exact: Option<BigRational>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JansonSweep {
    pub k: usize,
    pub m: u32,
    pub points: Vec<JansonAssessment>,
    /// Least-squares slope of `ln ratio` against `ln n`.
    pub slope: f64,
    /// `1 - m/2`.
    pub expected_slope: f64,
    /// True iff the exponent `1 - m/2` is negative, i.e. `m >= 3`.
    pub vanishing_regime: bool,
}

/// Minimum number of doublings for the slope fit.
pub const MIN_DOUBLINGS: u32 = 6;

/// Natural log of a big integer that may exceed `f64` range.
pub(crate) fn ln_biguint(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits < 1000 {
        return x.to_f64().map_or(f64::NAN, f64::ln);
    }
    let shift = bits - 64;
    (x >> shift).to_f64().map_or(f64::NAN, f64::ln) + shift as f64 * LN_2
}

fn ln_rational(r: &BigRational) -> f64 {
    if !r.is_positive() {
        return f64::NEG_INFINITY;
    }
    let num = r.numer().magnitude();
    let den = r.denom().magnitude();
    ln_biguint(num) - ln_biguint(den)
}

pub fn janson_assess(n: usize, k: usize, m: u32, source: &SigmaSource) -> Result<JansonAssessment> {
    if m == 0 {
        return Err(Error::InvalidParameter("m must be a positive integer".into()));
    }
    let delta_n = delta_bound(n, k)?;
    let n_n = binomial(n as i64, k as i64);
    let (ln_sigma, variance) = match source {
        SigmaSource::Exact(q) => {
            if q.len() != k {
                return Err(Error::ArityMismatch { scheme: k, pattern: q.len() });
            }
            let var = moments::exact_variance(n, q)?;
            if var.is_zero() {
                return Err(Error::ZeroSigma);
            }
            (0.5 * ln_rational(&var), Some(var))
        }
        SigmaSource::ScalingEstimate { constant } => {
            if !(*constant > 0.0) {
                return Err(Error::ZeroSigma);
            }
            (constant.ln() + (k as f64 - 0.5) * (n as f64).ln(), None)
        }
    };
    let ln_delta = if delta_n.is_zero() {
        f64::NEG_INFINITY
    } else {
        ln_biguint(&delta_n)
    };
    let delta_term = if m == 1 { 0.0 } else { (m - 1) as f64 * ln_delta };
    let log_ratio = ln_biguint(&n_n) + delta_term - m as f64 * ln_sigma;
    let ratio_exact = variance.filter(|_| m % 2 == 0).map(|var| {
        let top = int(&n_n * delta_n.pow(m - 1));
        top / num_traits::pow(var, (m / 2) as usize)
    });
    Ok(JansonAssessment {
        n,
        k,
        m,
        n_n,
        delta_n,
        a_n: 1,
        sigma_n: ln_sigma.exp(),
        ratio: log_ratio.exp(),
        log_ratio,
        ratio_exact,
    })
}

/// Criterion ratio at `n_start · 2^i`, `i = 0..=doublings`, and the fitted
/// log-log slope.
pub fn janson_sweep(
    k: usize,
    m: u32,
    source: &SigmaSource,
    n_start: usize,
    doublings: u32,
) -> Result<JansonSweep> {
    if doublings < MIN_DOUBLINGS {
        return Err(Error::InvalidParameter(format!(
            "the slope fit needs at least {MIN_DOUBLINGS} doublings, got {doublings}"
        )));
    }
    if n_start <= k {
        return Err(Error::InvalidParameter(format!(
            "n_start = {n_start} must exceed k = {k}"
        )));
    }
    let points = (0..=doublings)
        .map(|i| janson_assess(n_start << i, k, m, source))
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = points.iter().map(|p| (p.n as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.log_ratio).collect();
    let expected_slope = 1.0 - m as f64 / 2.0;
    Ok(JansonSweep {
        k,
        m,
        points,
        slope: least_squares_slope(&xs, &ys),
        expected_slope,
        vanishing_regime: expected_slope < 0.0,
    })
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let len = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / len;
    let my = ys.iter().sum::<f64>() / len;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::{all_permutations, Permutation};

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn pascal(n: usize, k: usize) -> BigUint {
        let mut row = vec![BigUint::one()];
        for _ in 0..n {
            let mut next = vec![BigUint::one(); row.len() + 1];
            for i in 1..row.len() {
                next[i] = &row[i - 1] + &row[i];
            }
            row = next;
        }
        row.get(k).cloned().unwrap_or_default()
    }

    #[test]
    fn binomial_examples() {
        assert_eq!(binomial(5, 2), BigUint::from(10u32));
        assert_eq!(binomial(4, 7), BigUint::zero());
        assert_eq!(binomial(4, -1), BigUint::zero());
        assert_eq!(binomial(50, 25), BigUint::from(126_410_606_437_752u64));
        assert_eq!(binomial(50, 25), pascal(50, 25));
        for n in 0..30 {
            for k in 0..=n + 1 {
                assert_eq!(binomial(n as i64, k as i64), pascal(n, k));
            }
        }
    }

    #[test]
    fn delta_bound_examples() {
        assert_eq!(delta_bound(4, 2).unwrap(), BigUint::from(4u32));
        for k in 1..6 {
            assert_eq!(delta_bound(2 * k, k).unwrap(), binomial(2 * k as i64, k as i64) - 2u32);
        }
        // subsets meeting a fixed k-set in j entries, j = 1..k-1
        let by_overlap: BigUint = (1..=2).map(|j| binomial(3, j) * binomial(97, 3 - j)).sum();
        assert_eq!(delta_bound(100, 3).unwrap(), by_overlap);
        assert!(delta_bound(2, 3).is_err());
        assert!(delta_bound(5, 0).is_err());
    }

    #[test]
    fn delta_bound_matches_direct_enumeration() {
        // 2-subsets of {1..4} other than {1,2} that meet {1,2}
        let mut meeting = 0;
        for a in 1..=4 {
            for b in a + 1..=4 {
                if (a, b) != (1, 2) && (a <= 2 || b <= 2) {
                    meeting += 1;
                }
            }
        }
        assert_eq!(BigUint::from(meeting as u32), delta_bound(4, 2).unwrap());
    }

    #[test]
    fn one_overlap_probability_examples() {
        assert_eq!(one_overlap_probability(2, 1, 1).unwrap(), r(1, 3));
        assert_eq!(one_overlap_probability(2, 1, 2).unwrap(), r(1, 6));
        assert_eq!(one_overlap_probability(2, 2, 1).unwrap(), r(1, 6));
        assert!(one_overlap_probability(2, 0, 1).is_err());
        assert!(one_overlap_probability(2, 1, 3).is_err());
    }

    #[test]
    fn one_overlap_probability_brute_force_k2() {
        // P(w1 < w2 and w1 < w3) over S_3: shared entry is smallest in both
        let hits = all_permutations(3)
            .filter(|w| w.as_slice()[0] < w.as_slice()[1] && w.as_slice()[0] < w.as_slice()[2])
            .count();
        assert_eq!(r(hits as i64, 6), one_overlap_probability(2, 1, 1).unwrap());
    }

    #[test]
    fn one_overlap_forms_agree_and_recombine() {
        for k in 1..=8 {
            let mut total = BigRational::zero();
            for a in 1..=k {
                for b in 1..=k {
                    let (prod, simp) = one_overlap_probability_forms(k, a, b).unwrap();
                    assert_eq!(prod, simp);
                    assert_eq!(prod, one_overlap_probability(k, b, a).unwrap());
                    total += int(overlap_weight(k, a, b)) * prod;
                }
            }
            assert_eq!(total, ratio(s_sum(k), factorial(2 * k as u64 - 1)));
        }
    }

    #[test]
    fn s_sum_examples() {
        assert_eq!(s_sum(1), BigUint::from(1u32));
        assert_eq!(s_sum(2), BigUint::from(10u32));
        assert_eq!(s_sum(3), BigUint::from(126u32));
    }

    #[test]
    fn vandermonde_examples() {
        let pair = |a: u32, b: u32| (BigUint::from(a), BigUint::from(b));
        assert_eq!(vandermonde_check(1), pair(1, 1));
        assert_eq!(vandermonde_check(2), pair(6, 6));
        assert_eq!(vandermonde_check(3), pair(30, 30));
        for k in 1..=12 {
            let (l, r) = vandermonde_check(k);
            assert_eq!(l, r, "k = {k}");
        }
    }

    #[test]
    fn cauchy_gap_examples() {
        assert_eq!(cauchy_gap(2).unwrap(), r(1, 1));
        assert_eq!(cauchy_gap(3).unwrap(), r(26, 1));
        assert!(cauchy_gap(1).is_err());
        for k in 2..=12 {
            assert!(cauchy_gap(k).unwrap().is_positive());
            assert!(c_k(k).is_positive());
        }
    }

    #[test]
    fn c_k_examples() {
        assert_eq!(c_k(1), BigRational::zero());
        assert_eq!(c_k(2), r(1, 36));
        assert_eq!(c_k(3), r(13, 7200));
    }

    #[test]
    fn easy_term_examples() {
        assert_eq!(easy_term_coefficient(1), r(-1, 1));
        assert_eq!(easy_term_coefficient(2), r(-1, 4));
        assert_eq!(easy_term_coefficient(3), r(-1, 144));
        for k in 1..=8u64 {
            let kf = int(factorial(k));
            let expected = -int(k * k) / (&kf * &kf * &kf * &kf);
            assert_eq!(easy_term_coefficient(k as usize), expected);
        }
    }

    #[test]
    fn pattern_overlap_sum_monotone_and_otherwise() {
        for k in 1..=6 {
            let id = Permutation::identity(k);
            assert_eq!(pattern_overlap_sum(&id), s_sum(k));
            assert_eq!(pattern_overlap_sum(&id.reverse()), s_sum(k));
            assert_eq!(pattern_leading_coefficient(&id), c_k(k));
        }
        let q: Permutation = "1 3 2".parse().unwrap();
        assert_eq!(pattern_overlap_sum(&q), BigUint::from(114u32));
        // never above S_k
        for q in all_permutations(4) {
            assert!(pattern_overlap_sum(&q) <= s_sum(4));
            assert!(pattern_leading_coefficient(&q).is_positive());
        }
    }

    #[test]
    fn janson_slopes() {
        let q: Permutation = "1 3 2".parse().unwrap();
        for m in 1..=4u32 {
            let sweep = janson_sweep(3, m, &SigmaSource::Exact(q.clone()), 100, 6).unwrap();
            assert_eq!(sweep.points.len(), 7);
            assert!(
                (sweep.slope - (1.0 - m as f64 / 2.0)).abs() < 0.05,
                "m = {m}: slope {}",
                sweep.slope
            );
            assert_eq!(sweep.vanishing_regime, m >= 3);
        }
    }

    #[test]
    fn janson_exact_ratio_matches_float() {
        let q: Permutation = "1 2".parse().unwrap();
        let a = janson_assess(40, 2, 2, &SigmaSource::Exact(q)).unwrap();
        let exact = a.ratio_exact.clone().unwrap().to_f64().unwrap();
        assert!((exact - a.ratio).abs() / exact < 1e-12);
        assert_eq!(a.a_n, 1);
        let odd = janson_assess(40, 2, 3, &SigmaSource::Exact("2 1".parse().unwrap())).unwrap();
        assert!(odd.ratio_exact.is_none());
    }

    #[test]
    fn janson_scaling_estimate_and_errors() {
        let s = janson_sweep(3, 4, &SigmaSource::ScalingEstimate { constant: 0.03 }, 100, 6).unwrap();
        assert!((s.slope + 1.0).abs() < 0.05);
        let one = Permutation::identity(1);
        assert_eq!(janson_assess(10, 1, 3, &SigmaSource::Exact(one)), Err(Error::ZeroSigma));
        assert!(janson_assess(10, 2, 0, &SigmaSource::ScalingEstimate { constant: 1.0 }).is_err());
        assert!(matches!(
            janson_assess(10, 3, 2, &SigmaSource::Exact(Permutation::identity(2))),
            Err(Error::ArityMismatch { .. })
        ));
        assert!(janson_sweep(3, 4, &SigmaSource::ScalingEstimate { constant: 1.0 }, 100, 5).is_err());
    }

    #[test]
    fn ln_of_huge_integers() {
        let x = BigUint::one() << 5000u32;
        assert!((ln_biguint(&x) - 5000.0 * LN_2).abs() < 1e-9);
        assert!((ln_biguint(&BigUint::from(1000u32)) - 1000f64.ln()).abs() < 1e-12);
    }
}
