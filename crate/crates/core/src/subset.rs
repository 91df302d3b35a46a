use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{invalid_arg, Result};
use crate::sample::MAX_DIMENSION;

/// A subset `H` of the coordinates `{1, …, p}`, stored as a bit pattern.
///
/// Bit `j` is set when coordinate `j + 1` belongs to `H`. The empty mask is
/// only meaningful inside [`crate::decompose`]; every test statistic is
/// indexed by a nonempty one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubsetMask(u32);

impl SubsetMask {
    pub const EMPTY: SubsetMask = SubsetMask(0);

    pub const fn from_bits(bits: u32) -> Self {
        SubsetMask(bits)
    }

    /// The full set `{1, …, p}`.
    pub fn full(p: usize) -> Self {
        debug_assert!(p <= 32);
        if p == 32 {
            SubsetMask(u32::MAX)
        } else {
            SubsetMask((1u32 << p) - 1)
        }
    }

    /// Builds a mask from zero-based coordinate indices.
    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Self {
        SubsetMask(indices.into_iter().fold(0, |acc, j| acc | (1 << j)))
    }

    pub const fn bits(self) -> u32 {
        self.0
    }

    pub const fn cardinality(self) -> usize {
        self.0.count_ones() as usize
    }

    pub const fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// Membership of the zero-based coordinate `j`.
    pub const fn contains(self, j: usize) -> bool {
        self.0 >> j & 1 == 1
    }

    pub fn is_subset_of(self, other: SubsetMask) -> bool {
        self.0 & !other.0 == 0
    }

    /// Zero-based index of the lowest member, `None` for the empty set.
    pub fn lowest(self) -> Option<usize> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as usize)
    }

    /// `H` with its lowest member removed.
    pub const fn without_lowest(self) -> Self {
        SubsetMask(self.0 & self.0.wrapping_sub(1))
    }

    /// Zero-based member indices in increasing order.
    pub fn indices(self) -> impl Iterator<Item = usize> {
        let mut rest = self.0;
        std::iter::from_fn(move || {
            if rest == 0 {
                return None;
            }
            let j = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            Some(j)
        })
    }

    /// Image of `H` under a relabelling of coordinates: `j ↦ perm[j]`.
    pub fn permuted(self, perm: &[usize]) -> Self {
        SubsetMask::from_indices(self.indices().map(|j| perm[j]))
    }
}

impl fmt::Display for SubsetMask {
    /// Renders one-based members, e.g. `{1,3}`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, j) in self.indices().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", j + 1)?;
        }
        f.write_str("}")
    }
}

impl fmt::LowerHex for SubsetMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::LowerHex::fmt(&self.0, f)
    }
}

impl Serialize for SubsetMask {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Every nonempty `H ⊂ {1, …, p}` with `#H ≤ h`, ordered by cardinality and
/// then by bit pattern.
pub fn enumerate_subsets(p: usize, h: usize) -> Result<Vec<SubsetMask>> {
    if p == 0 || p > MAX_DIMENSION {
        return Err(invalid_arg!("dimension p = {p} outside 1..={MAX_DIMENSION}"));
    }
    if h < 1 || h > p {
        return Err(invalid_arg!("max cardinality h = {h} outside 1..={p}"));
    }
    let mut masks: Vec<SubsetMask> = (1..1u32 << p)
        .map(SubsetMask)
        .filter(|m| m.cardinality() <= h)
        .collect();
    masks.sort_by_key(|m| (m.cardinality(), m.bits()));
    Ok(masks)
}
