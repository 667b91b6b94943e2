//! Permutations in one-line notation, standardization and seeded sampling.
//!
//! Ranks and positions are 1-based at every public boundary. A [`Pattern`] is
//! just a (usually short) [`Permutation`] that plays the role of the searched
//! word.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A rearrangement of `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<i64>", into = "Vec<u32>")]
pub struct Permutation {
    values: Vec<u32>,
}

/// The pattern being searched for. Same representation as [`Permutation`].
pub type Pattern = Permutation;

/// Master seed for all random generation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Seed(pub u64);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Symmetry {
    Reverse,
    Complement,
    Inverse,
}

impl Symmetry {
    pub const ALL: [Symmetry; 3] = [Symmetry::Reverse, Symmetry::Complement, Symmetry::Inverse];
}

impl Permutation {
    /// Validates `values` as a rearrangement of `1..=n`.
    ///
    /// The first offending index (0-based) is reported: ranks outside
    /// `1..=n` before duplicates.
    pub fn new<I>(values: I) -> Result<Self>
    where
        I: IntoIterator,
        I::Item: Into<i64>,
    {
        let raw: Vec<i64> = values.into_iter().map(Into::into).collect();
        let n = raw.len();
        let mut seen = vec![false; n + 1];
        let mut out = Vec::with_capacity(n);
        for (index, &rank) in raw.iter().enumerate() {
            if rank < 1 || rank > n as i64 {
                return Err(Error::RankOutOfRange { index, rank, len: n });
            }
            let slot = &mut seen[rank as usize];
            if *slot {
                return Err(Error::DuplicateRank { index, rank });
            }
            *slot = true;
            out.push(rank as u32);
        }
        Ok(Self { values: out })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            values: (1..=n as u32).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.values
    }

    pub fn into_vec(self) -> Vec<u32> {
        self.values
    }

    pub fn is_increasing(&self) -> bool {
        self.values.windows(2).all(|w| w[0] < w[1])
    }

    pub fn is_decreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[0] > w[1])
    }

    /// Entries at the given 1-based, strictly increasing positions.
    pub fn restrict(&self, positions: &[usize]) -> Result<Vec<u32>> {
        let n = self.len();
        let mut out = Vec::with_capacity(positions.len());
        let mut prev = 0usize;
        for (index, &pos) in positions.iter().enumerate() {
            if pos == 0 || pos > n {
                return Err(Error::PositionOutOfRange { position: pos, len: n });
            }
            if index > 0 && pos <= prev {
                return Err(Error::PositionsNotIncreasing { index });
            }
            prev = pos;
            out.push(self.values[pos - 1]);
        }
        Ok(out)
    }

    /// Deletes the `rank`-th smallest entry and re-standardizes.
    pub fn remove_entry(&self, rank: usize) -> Result<Pattern> {
        let k = self.len();
        if rank == 0 || rank > k {
            return Err(Error::InvalidParameter(format!(
                "rank {rank} is outside 1..={k}"
            )));
        }
        let rank = rank as u32;
        let values = self
            .values
            .iter()
            .filter(|&&v| v != rank)
            .map(|&v| if v > rank { v - 1 } else { v })
            .collect();
        Ok(Self { values })
    }

    pub fn reverse(&self) -> Self {
        Self {
            values: self.values.iter().rev().copied().collect(),
        }
    }

    pub fn complement(&self) -> Self {
        let top = self.len() as u32 + 1;
        Self {
            values: self.values.iter().map(|&v| top - v).collect(),
        }
    }

    pub fn inverse(&self) -> Self {
        let mut values = vec![0u32; self.len()];
        for (pos, &v) in self.values.iter().enumerate() {
            values[(v - 1) as usize] = pos as u32 + 1;
        }
        Self { values }
    }

    pub fn apply(&self, which: Symmetry) -> Self {
        match which {
            Symmetry::Reverse => self.reverse(),
            Symmetry::Complement => self.complement(),
            Symmetry::Inverse => self.inverse(),
        }
    }

    /// `order[r]` is the 0-based position holding rank `r + 1`.
    pub(crate) fn positions_by_rank(&self) -> Vec<usize> {
        let mut order = vec![0usize; self.len()];
        for (pos, &v) in self.values.iter().enumerate() {
            order[(v - 1) as usize] = pos;
        }
        order
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.values.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl FromStr for Permutation {
    type Err = Error;

    /// Parses whitespace-separated 1-based ranks, e.g. `"3 5 1 4 2"`.
    fn from_str(s: &str) -> Result<Self> {
        let mut raw = Vec::new();
        for (index, tok) in s.split_whitespace().enumerate() {
            let rank: i64 = tok.parse().map_err(|_| {
                Error::InvalidParameter(format!("token {tok:?} at index {index} is not an integer"))
            })?;
            raw.push(rank);
        }
        Self::new(raw)
    }
}

impl TryFrom<Vec<i64>> for Permutation {
    type Error = Error;

    fn try_from(v: Vec<i64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<Permutation> for Vec<u32> {
    fn from(p: Permutation) -> Self {
        p.values
    }
}

/// Replaces each entry of a word of distinct values by its rank in the word.
pub fn standardize<T: Ord>(word: &[T]) -> Result<Pattern> {
    let mut order: Vec<usize> = (0..word.len()).collect();
    order.sort_by(|&a, &b| word[a].cmp(&word[b]));
    let mut values = vec![0u32; word.len()];
    for (rank, w) in order.windows(2).enumerate() {
        if word[w[0]] == word[w[1]] {
            return Err(Error::DuplicateEntry { index: w[0].max(w[1]) });
        }
        values[w[0]] = rank as u32 + 1;
    }
    if let Some(&last) = order.last() {
        values[last] = word.len() as u32;
    }
    Ok(Permutation { values })
}

/// Child seed for stream `stream` of `master`.
///
/// SplitMix64 finalizer applied to the master seed and then to the mix of
/// the result with the stream index, so nearby `(master, stream)` pairs land
/// far apart.
pub fn stream_seed(master: Seed, stream: u64) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    mix(mix(master.0) ^ stream.wrapping_mul(0xD1B5_4A32_D192_ED03))
}

/// Generator for stream `stream` of `master`.
pub fn stream_rng(master: Seed, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_seed(master, stream))
}

/// Uniform random permutation by Fisher-Yates shuffle.
pub fn random_permutation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Permutation {
    let mut values: Vec<u32> = (1..=n as u32).collect();
    values.shuffle(rng);
    Permutation { values }
}

/// Uniform random permutation drawn from stream `stream` of `seed`.
pub fn random_permutation_seeded(n: usize, seed: Seed, stream: u64) -> Permutation {
    random_permutation(n, &mut stream_rng(seed, stream))
}

/// All permutations of `1..=n` in lexicographic order.
pub fn all_permutations(n: usize) -> AllPermutations {
    AllPermutations {
        next: Some((1..=n as u32).collect()),
    }
}

pub struct AllPermutations {
    next: Option<Vec<u32>>,
}

impl Iterator for AllPermutations {
    type Item = Permutation;

    fn next(&mut self) -> Option<Permutation> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        if next_lexicographic(&mut succ) {
            self.next = Some(succ);
        }
        Some(Permutation { values: current })
    }
}

/// Advances `v` to its lexicographic successor; false when `v` was the last.
pub(crate) fn next_lexicographic<T: Ord>(v: &mut [T]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}
