//! Occurrences of a fixed pattern in uniformly random permutations.
//!
//! * [`perm`]: permutations, standardization, symmetries, seeded sampling.
//! * [`count`]: exact occurrence counting with an exhaustive oracle.
//! * [`moments`]: exact mean and variance polynomial of the count.
//! * [`asymptotics`]: closed-form constants of the variance bound and the
//!   dependency-criterion ratio.
//! * [`montecarlo`]: seeded simulation and normality diagnostics.

pub mod asymptotics;
pub mod count;
pub mod error;
pub mod exec;
mod fenwick;
pub mod json;
pub mod moments;
pub mod montecarlo;
pub mod perm;
pub mod poly;

pub use error::{Error, Result};
pub use perm::{Pattern, Permutation, Seed};
