//! Bit-packed agent subsets with fast intersection counting.

use serde::{Deserialize, Serialize};

/// A subset of the agents `0..n`, stored as a bitset.
///
/// Membership tests, insertion, and removal are O(1); intersection counting
/// is word-parallel. Sets are value types and never grow beyond the universe
/// they were created with.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AgentSet {
    n: usize,
    words: Vec<u64>,
}

impl AgentSet {
    /// Empty subset of `0..n`.
    pub fn empty(n: usize) -> Self {
        AgentSet {
            n,
            words: vec![0; n.div_ceil(64)],
        }
    }

    /// The full set `0..n`.
    pub fn full(n: usize) -> Self {
        let mut s = Self::empty(n);
        for v in 0..n {
            s.insert(v);
        }
        s
    }

    /// Build from an explicit member list. Members must lie in `0..n`.
    pub fn from_members(n: usize, members: &[usize]) -> Self {
        let mut s = Self::empty(n);
        for &v in members {
            assert!(v < n, "agent {v} outside universe 0..{n}");
            s.insert(v);
        }
        s
    }

    /// Build from the low `n` bits of a mask (`n <= 64`).
    pub fn from_mask(n: usize, mask: u64) -> Self {
        assert!(n <= 64);
        let mut s = Self::empty(n);
        if n > 0 {
            s.words[0] = mask & mask_low(n);
        }
        s
    }

    /// Low word as a mask, for the `n <= 64` fast paths.
    pub fn to_mask(&self) -> u64 {
        assert!(self.n <= 64);
        self.words.first().copied().unwrap_or(0)
    }

    pub fn universe(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn contains(&self, v: usize) -> bool {
        debug_assert!(v < self.n);
        self.words[v >> 6] >> (v & 63) & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, v: usize) {
        debug_assert!(v < self.n);
        self.words[v >> 6] |= 1u64 << (v & 63);
    }

    #[inline]
    pub fn remove(&mut self, v: usize) {
        debug_assert!(v < self.n);
        self.words[v >> 6] &= !(1u64 << (v & 63));
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// `|self ∩ other|`.
    pub fn intersection_count(&self, other: &AgentSet) -> usize {
        debug_assert_eq!(self.n, other.n);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    pub fn is_subset_of(&self, other: &AgentSet) -> bool {
        debug_assert_eq!(self.n, other.n);
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn union_with(&mut self, other: &AgentSet) {
        debug_assert_eq!(self.n, other.n);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    /// Members in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    None
                } else {
                    let b = rest.trailing_zeros() as usize;
                    rest &= rest - 1;
                    Some((wi << 6) | b)
                }
            })
        })
    }

    pub fn members(&self) -> Vec<usize> {
        self.iter().collect()
    }

    /// Orders by cardinality, then lexicographically by the sorted member
    /// list. Used for deterministic tie-breaking among equal-value sets.
    pub fn cmp_card_lex(&self, other: &AgentSet) -> std::cmp::Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.members().cmp(&other.members()))
    }
}

impl std::fmt::Debug for AgentSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "AgentSet{:?}", self.members())
    }
}

#[inline]
fn mask_low(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn insert_remove_contains() {
        let mut s = AgentSet::empty(130);
        s.insert(0);
        s.insert(64);
        s.insert(129);
        assert!(s.contains(0) && s.contains(64) && s.contains(129));
        assert_eq!(s.len(), 3);
        s.remove(64);
        assert!(!s.contains(64));
        assert_eq!(s.members(), vec![0, 129]);
    }

    #[test]
    fn intersection_count_across_words() {
        let a = AgentSet::from_members(200, &[1, 63, 64, 150]);
        let b = AgentSet::from_members(200, &[63, 64, 151]);
        assert_eq!(a.intersection_count(&b), 2);
    }

    #[test]
    fn card_lex_ordering() {
        let a = AgentSet::from_members(5, &[0, 2]);
        let b = AgentSet::from_members(5, &[1, 2]);
        let c = AgentSet::from_members(5, &[3]);
        assert_eq!(a.cmp_card_lex(&b), std::cmp::Ordering::Less);
        assert_eq!(c.cmp_card_lex(&a), std::cmp::Ordering::Less);
    }

    #[test]
    fn mask_round_trip() {
        let s = AgentSet::from_mask(6, 0b101101);
        assert_eq!(s.members(), vec![0, 2, 3, 5]);
        assert_eq!(s.to_mask(), 0b101101);
    }
}
