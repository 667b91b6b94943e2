//! Binary indexed tree over value slots `1..=n`.

use std::ops::{AddAssign, Sub};

#[derive(Debug, Clone)]
pub(crate) struct Fenwick<T> {
    tree: Vec<T>,
}

impl<T> Fenwick<T>
where
    T: Clone + Default + for<'a> AddAssign<&'a T>,
{
    pub fn new(n: usize) -> Self {
        Self {
            tree: vec![T::default(); n + 1],
        }
    }

    /// Adds `delta` at 1-based slot `i`.
    pub fn add(&mut self, mut i: usize, delta: &T) {
        while i < self.tree.len() {
            self.tree[i] += delta;
            i += i & i.wrapping_neg();
        }
    }

    /// Sum over slots `1..=i`.
    pub fn prefix(&self, mut i: usize) -> T {
        let mut acc = T::default();
        while i > 0 {
            acc += &self.tree[i];
            i &= i - 1;
        }
        acc
    }
}

impl<T> Fenwick<T>
where
    T: Clone + Default + for<'a> AddAssign<&'a T> + Sub<Output = T>,
{
    /// Sum over slots `lo..=hi` (empty when `lo > hi`).
    #[allow(dead_code)]
    pub fn range(&self, lo: usize, hi: usize) -> T {
        if lo > hi {
            return T::default();
        }
        self.prefix(hi) - self.prefix(lo - 1)
    }
}
