//! Coalitions and partitions of the player set.
//!
//! Players are indexed `0..n` with `n <= 12`; a coalition is a bit set over
//! those indices. A partition stores its blocks ordered by lowest member,
//! which is the canonical order produced by restricted-growth strings.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::GameError;

pub const MAX_PLAYERS: usize = 12;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Coalition(u32);

impl Coalition {
    pub const EMPTY: Coalition = Coalition(0);

    pub fn from_bits(bits: u32) -> Self {
        Coalition(bits)
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn singleton(player: usize) -> Self {
        Coalition(1 << player)
    }

    pub fn grand(n: usize) -> Self {
        Coalition(((1u64 << n) - 1) as u32)
    }

    pub fn from_members<I: IntoIterator<Item = usize>>(members: I) -> Self {
        Coalition(members.into_iter().fold(0, |acc, i| acc | (1 << i)))
    }

    pub fn contains(self, player: usize) -> bool {
        self.0 & (1 << player) != 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: Coalition) -> Coalition {
        Coalition(self.0 | other.0)
    }

    pub fn intersection(self, other: Coalition) -> Coalition {
        Coalition(self.0 & other.0)
    }

    pub fn difference(self, other: Coalition) -> Coalition {
        Coalition(self.0 & !other.0)
    }

    pub fn is_subset(self, other: Coalition) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_disjoint(self, other: Coalition) -> bool {
        self.0 & other.0 == 0
    }

    pub fn with(self, player: usize) -> Coalition {
        Coalition(self.0 | (1 << player))
    }

    pub fn members(self) -> impl Iterator<Item = usize> {
        let bits = self.0;
        (0..32).filter(move |i| bits & (1 << i) != 0)
    }

    /// Lowest member index, `None` for the empty coalition.
    pub fn first(self) -> Option<usize> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as usize)
    }

    /// All nonempty subsets of `self`, in increasing bit order.
    pub fn subsets(self) -> impl Iterator<Item = Coalition> {
        let full = self.0;
        // (s - full) & full steps through submasks in increasing order.
        let mut sub: u32 = 0;
        std::iter::from_fn(move || {
            sub = sub.wrapping_sub(full) & full;
            (sub != 0).then_some(Coalition(sub))
        })
    }

    /// Render with the given player labels, e.g. `{A,B}`.
    pub fn label(self, ids: &[String]) -> String {
        let names: Vec<&str> = self.members().map(|i| ids[i].as_str()).collect();
        format!("{{{}}}", names.join(","))
    }
}

impl fmt::Debug for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m: Vec<usize> = self.members().collect();
        write!(f, "C{m:?}")
    }
}

/// A partition of some player set into disjoint nonempty coalitions.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Partition {
    blocks: Vec<Coalition>,
}

impl Partition {
    /// Builds a partition, sorting blocks canonically. Blocks must be
    /// nonempty and pairwise disjoint.
    pub fn new(mut blocks: Vec<Coalition>) -> Option<Self> {
        let mut seen = Coalition::EMPTY;
        for b in &blocks {
            if b.is_empty() || !b.is_disjoint(seen) {
                return None;
            }
            seen = seen.union(*b);
        }
        blocks.sort_by_key(|b| b.first());
        Some(Partition { blocks })
    }

    pub fn singletons(players: Coalition) -> Self {
        Partition {
            blocks: players.members().map(Coalition::singleton).collect(),
        }
    }

    pub fn blocks(&self) -> &[Coalition] {
        &self.blocks
    }

    pub fn support(&self) -> Coalition {
        self.blocks.iter().fold(Coalition::EMPTY, |a, b| a.union(*b))
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn block_of(&self, player: usize) -> Option<Coalition> {
        self.blocks.iter().copied().find(|b| b.contains(player))
    }

    pub fn position(&self, coalition: Coalition) -> Option<usize> {
        self.blocks.iter().position(|b| *b == coalition)
    }

    /// Union of two partitions over disjoint supports.
    pub fn merge(&self, other: &Partition) -> Option<Partition> {
        let mut blocks = self.blocks.clone();
        blocks.extend_from_slice(&other.blocks);
        Partition::new(blocks)
    }

    pub fn label(&self, ids: &[String]) -> String {
        self.blocks
            .iter()
            .map(|b| b.label(ids))
            .collect::<Vec<_>>()
            .join("+")
    }
}

impl fmt::Debug for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.blocks.iter()).finish()
    }
}

/// Bell number B(n), the count of partitions of an n-element set.
pub fn bell_number(n: usize) -> u64 {
    // Bell triangle.
    let mut row = vec![1u64];
    for _ in 0..n {
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(*row.last().unwrap());
        for v in &row {
            let last = *next.last().unwrap();
            next.push(last + v);
        }
        row = next;
    }
    row[0]
}

/// Enumerates every partition of `{0..n}` in lexicographic order of
/// restricted-growth strings.
pub fn enumerate_partitions(n: usize) -> Result<Vec<Partition>, GameError> {
    if n == 0 || n > MAX_PLAYERS {
        return Err(GameError::PlayerCount(n));
    }
    let members: Vec<usize> = (0..n).collect();
    Ok(partitions_of_members(&members))
}

/// All partitions of the given coalition, in restricted-growth order over
/// its members sorted ascending. The empty coalition has exactly one
/// (empty) partition.
pub fn partitions_of(players: Coalition) -> Vec<Partition> {
    let members: Vec<usize> = players.members().collect();
    if members.is_empty() {
        return vec![Partition { blocks: Vec::new() }];
    }
    partitions_of_members(&members)
}

fn partitions_of_members(members: &[usize]) -> Vec<Partition> {
    let n = members.len();
    let mut out = Vec::new();
    // a[i] = block label of element i; m[i] = max(a[0..=i]).
    let mut a = vec![0usize; n];
    loop {
        let blocks = a.iter().max().map_or(0, |mx| mx + 1);
        let mut cs = vec![Coalition::EMPTY; blocks];
        for (i, &label) in a.iter().enumerate() {
            cs[label] = cs[label].with(members[i]);
        }
        out.push(Partition { blocks: cs });

        // Advance to the next restricted-growth string.
        let mut i = n;
        loop {
            if i <= 1 {
                return out;
            }
            i -= 1;
            let prefix_max = a[..i].iter().copied().max().unwrap_or(0);
            if a[i] <= prefix_max {
                a[i] += 1;
                for x in a.iter_mut().skip(i + 1) {
                    *x = 0;
                }
                break;
            }
        }
    }
}

/// Falling-factorial helper used by Shapley weights.
pub(crate) fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}
