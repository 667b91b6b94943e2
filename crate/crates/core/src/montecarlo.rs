//! Seeded sampling of `X_{n,q}` and goodness of fit against `N(0,1)`.
//!
//! Sample `i` is drawn from its own generator seeded by
//! [`stream_seed`](crate::perm::stream_seed)`(seed, i)`, and every summary
//! statistic is reduced sequentially in sample order, so a [`SimSummary`] is
//! bit-identical for any worker count.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::count::count_fast;
use crate::error::{Error, Result};
use crate::exec;
use crate::json;
use crate::moments::{self, MomentsConfig};
use crate::perm::{random_permutation, stream_rng, Pattern, Seed};

pub const DEFAULT_BINS: usize = 60;
/// Histogram range for standardized values.
pub const HIST_RANGE: (f64, f64) = (-5.0, 5.0);

/// Documents the sample statistics reported in [`SimSummary`].
pub const MOMENT_FORMULAS: &str = "mean = Σx/N; variance = Σ(x-mean)^2/(N-1); \
    skewness = m3/m2^1.5; excess_kurtosis = m4/m2^2 - 3; m_r = Σ(x-mean)^r/N; \
    sums are pairwise in sample order";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Standardization {
    /// Exact mean and `sqrt(exact variance)`.
    ExactMoments,
    /// Sample mean and sample standard deviation.
    EmpiricalMoments,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub pattern: Pattern,
    pub n: usize,
    pub samples: usize,
    pub seed: Seed,
    pub workers: usize,
    pub standardization: Standardization,
    pub bins: usize,
    pub moments: MomentsConfig,
}

impl SimConfig {
    pub fn new(pattern: Pattern, n: usize, samples: usize, seed: Seed) -> Self {
        Self {
            pattern,
            n,
            samples,
            seed,
            workers: 1,
            standardization: Standardization::ExactMoments,
            bins: DEFAULT_BINS,
            moments: MomentsConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::InvalidParameter("samples must be at least 1".into()));
        }
        if self.workers == 0 {
            return Err(Error::InvalidParameter("workers must be at least 1".into()));
        }
        if self.bins == 0 {
            return Err(Error::InvalidParameter("bins must be at least 1".into()));
        }
        if self.pattern.is_empty() {
            return Err(Error::InvalidParameter("pattern must be non-empty".into()));
        }
        if self.n < self.pattern.len() {
            return Err(Error::InvalidParameter(format!(
                "n = {} is shorter than the pattern (k = {})",
                self.n,
                self.pattern.len()
            )));
        }
        if self.standardization == Standardization::ExactMoments
            && self.pattern.len() > self.moments.max_k
        {
            return Err(Error::PatternTooLong {
                k: self.pattern.len(),
                cap: self.moments.max_k,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// `bins + 1` edges.
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    /// Values below the first edge, included in `counts[0]`.
    pub clipped_low: u64,
    /// Values at or above the last edge, included in the last bin.
    pub clipped_high: u64,
}

impl Histogram {
    pub fn new(values: &[f64], bins: usize, (lo, hi): (f64, f64)) -> Self {
        let width = (hi - lo) / bins as f64;
        let edges = (0..=bins).map(|i| lo + width * i as f64).collect();
        let mut counts = vec![0u64; bins];
        let (mut clipped_low, mut clipped_high) = (0, 0);
        for &x in values {
            let bin = if x < lo {
                clipped_low += 1;
                0
            } else if x >= hi {
                clipped_high += 1;
                bins - 1
            } else {
                (((x - lo) / width) as usize).min(bins - 1)
            };
            counts[bin] += 1;
        }
        Self {
            edges,
            counts,
            clipped_low,
            clipped_high,
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// `bin_left,bin_right,count` rows with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_left,bin_right,count\n");
        for (i, c) in self.counts.iter().enumerate() {
            out.push_str(&format!("{},{},{}\n", self.edges[i], self.edges[i + 1], c));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimSummary {
    pub pattern: Pattern,
    pub n: usize,
    pub samples: usize,
    pub seed: Seed,
    pub standardization: Standardization,
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
    pub moment_formulas: String,
    /// Mean and standard deviation used to standardize.
    pub center: f64,
    pub scale: f64,
    pub ks_distance: f64,
    #[serde(with = "json::rational")]
    pub exact_mean: BigRational,
    #[serde(with = "json::rational_opt")]
    pub exact_variance: Option<BigRational>,
    pub histogram: Histogram,
}

/// Draws `cfg.samples` independent counts of `q` in uniform permutations.
pub fn sample_counts(cfg: &SimConfig) -> Result<Vec<BigUint>> {
    cfg.validate()?;
    Ok(exec::map_range_with_workers(cfg.samples, cfg.workers, |i| {
        let p = random_permutation(cfg.n, &mut stream_rng(cfg.seed, i as u64));
        count_fast(&p, &cfg.pattern).count
    }))
}

/// `(x - mean) / sd` elementwise.
pub fn standardize_counts(counts: &[BigUint], mean: f64, sd: f64) -> Result<Vec<f64>> {
    if !(sd > 0.0) {
        return Err(Error::NonPositiveSd(sd));
    }
    Ok(counts.iter().map(|c| (to_f64(c) - mean) / sd).collect())
}

fn to_f64(c: &BigUint) -> f64 {
    c.to_f64().unwrap_or(f64::INFINITY)
}

/// Standard normal CDF via `erfc`; absolute error well below `1e-10`.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// `sup_x |F_N(x) - Φ(x)|` for the sample's empirical CDF `F_N`.
pub fn ks_statistic(standardized: &[f64]) -> Result<f64> {
    if standardized.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut sorted = standardized.to_vec();
    sorted.sort_by(f64::total_cmp);
    let len = sorted.len() as f64;
    let mut sup = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let phi = normal_cdf(x);
        let above = (i + 1) as f64 / len - phi;
        let below = phi - i as f64 / len;
        sup = sup.max(above).max(below);
    }
    Ok(sup.clamp(0.0, 1.0))
}

/// Sum in a fixed pairwise order; the result depends only on `xs`.
fn pairwise_sum(xs: &[f64]) -> f64 {
    const LEAF: usize = 64;
    if xs.len() <= LEAF {
        return xs.iter().sum();
    }
    let (a, b) = xs.split_at(xs.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

struct SampleMoments {
    mean: f64,
    variance: f64,
    skewness: f64,
    excess_kurtosis: f64,
}

fn sample_moments(xs: &[f64]) -> SampleMoments {
    let len = xs.len() as f64;
    let mean = pairwise_sum(xs) / len;
    let central = |r: i32| -> f64 {
        let powers: Vec<f64> = xs.iter().map(|x| (x - mean).powi(r)).collect();
        pairwise_sum(&powers)
    };
    let (s2, s3, s4) = (central(2), central(3), central(4));
    let m2 = s2 / len;
    let variance = if xs.len() > 1 { s2 / (len - 1.0) } else { 0.0 };
    let (skewness, excess_kurtosis) = if m2 > 0.0 {
        (s3 / len / m2.powf(1.5), s4 / len / (m2 * m2) - 3.0)
    } else {
        (0.0, 0.0)
    };
    SampleMoments {
        mean,
        variance,
        skewness,
        excess_kurtosis,
    }
}

/// Sample, standardize, and summarize.
pub fn simulate(cfg: &SimConfig) -> Result<SimSummary> {
    cfg.validate()?;
    let counts = sample_counts(cfg)?;
    let raw: Vec<f64> = counts.iter().map(to_f64).collect();
    let stats = sample_moments(&raw);
    let k = cfg.pattern.len();
    let exact_mean = moments::expectation(cfg.n, k);
    let exact_variance = match cfg.standardization {
        Standardization::ExactMoments => {
            Some(moments::variance_polynomial_with(&cfg.pattern, &cfg.moments)?.evaluate(cfg.n))
        }
        Standardization::EmpiricalMoments => None,
    };
    let (center, scale) = match &exact_variance {
        Some(var) => (
            exact_mean.to_f64().unwrap_or(f64::NAN),
            var.to_f64().unwrap_or(f64::NAN).sqrt(),
        ),
        None => (stats.mean, stats.variance.sqrt()),
    };
    let z = standardize_counts(&counts, center, scale)?;
    let ks_distance = ks_statistic(&z)?;
    let histogram = Histogram::new(&z, cfg.bins, HIST_RANGE);
    Ok(SimSummary {
        pattern: cfg.pattern.clone(),
        n: cfg.n,
        samples: cfg.samples,
        seed: cfg.seed,
        standardization: cfg.standardization,
        mean: stats.mean,
        variance: stats.variance,
        skewness: stats.skewness,
        excess_kurtosis: stats.excess_kurtosis,
        moment_formulas: MOMENT_FORMULAS.to_string(),
        center,
        scale,
        ks_distance,
        exact_mean,
        exact_variance,
        histogram,
    })
}
