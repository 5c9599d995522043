//! Combinatorial dyadic grid.
//!
//! A dyadic subinterval of the main interval `I` is named by its generation
//! `level` and its position `index` within that generation, `0 <= index <
//! 2^level`. Real endpoints never appear: every quantity in this crate is a
//! ratio `|J|/|I|`, which only depends on the level.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::rational::DyadicRational;

/// Deepest level whose indices still fit in a `u64`.
pub const MAX_LEVEL: u32 = 63;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeAddress {
    pub level: u32,
    pub index: u64,
}

impl NodeAddress {
    pub const ROOT: NodeAddress = NodeAddress { level: 0, index: 0 };

    /// Returns `None` when `index >= 2^level` or the level is too deep.
    pub fn new(level: u32, index: u64) -> Option<Self> {
        if level > MAX_LEVEL || index >> level != 0 {
            return None;
        }
        Some(NodeAddress { level, index })
    }

    pub fn children(self) -> (NodeAddress, NodeAddress) {
        debug_assert!(self.level < MAX_LEVEL);
        (
            NodeAddress {
                level: self.level + 1,
                index: 2 * self.index,
            },
            NodeAddress {
                level: self.level + 1,
                index: 2 * self.index + 1,
            },
        )
    }

    pub fn left(self) -> NodeAddress {
        self.children().0
    }

    pub fn right(self) -> NodeAddress {
        self.children().1
    }

    pub fn parent(self) -> Option<NodeAddress> {
        (self.level > 0).then(|| NodeAddress {
            level: self.level - 1,
            index: self.index / 2,
        })
    }

    /// The ancestor of `self` at `level` (itself when the levels match).
    pub fn ancestor_at(self, level: u32) -> Option<NodeAddress> {
        (level <= self.level).then(|| NodeAddress {
            level,
            index: self.index >> (self.level - level),
        })
    }

    /// `true` iff the interval of `self` contains the interval of `other`
    /// (non-strictly).
    pub fn is_ancestor_of(self, other: NodeAddress) -> bool {
        self.level <= other.level && other.index >> (other.level - self.level) == self.index
    }

    pub fn is_strict_ancestor_of(self, other: NodeAddress) -> bool {
        self.level < other.level && self.is_ancestor_of(other)
    }

    /// Grid trichotomy: two dyadic intervals either nest or are disjoint.
    pub fn intersects(self, other: NodeAddress) -> bool {
        self.is_ancestor_of(other) || other.is_ancestor_of(self)
    }

    /// `|J| / |I| = 2^{-level}`.
    pub fn relative_measure(self) -> DyadicRational {
        DyadicRational::pow2_inv(self.level)
    }

    /// All `2^level` addresses of one generation, left to right.
    pub fn generation(level: u32) -> impl Iterator<Item = NodeAddress> {
        assert!(level <= MAX_LEVEL);
        (0..1u64 << level).map(move |index| NodeAddress { level, index })
    }

    /// The addresses of generation `level` lying inside `self`.
    pub fn descendants_at(self, level: u32) -> impl Iterator<Item = NodeAddress> {
        assert!(level >= self.level && level <= MAX_LEVEL);
        let shift = level - self.level;
        let start = self.index << shift;
        (start..start + (1u64 << shift)).map(move |index| NodeAddress { level, index })
    }
}

impl fmt::Display for NodeAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.level, self.index)
    }
}

/// Free-function form of [`NodeAddress::children`].
pub fn children(a: NodeAddress) -> (NodeAddress, NodeAddress) {
    a.children()
}

/// Free-function form of [`NodeAddress::is_ancestor_of`].
pub fn is_ancestor(a: NodeAddress, b: NodeAddress) -> bool {
    a.is_ancestor_of(b)
}

/// Free-function form of [`NodeAddress::relative_measure`].
pub fn relative_measure(a: NodeAddress) -> DyadicRational {
    a.relative_measure()
}
