//! Sequences realizing a prescribed root average.
//!
//! For `0 <= a <= C` these build a `C`-Carleson sequence whose average over
//! the main interval is exactly `a`: a disjoint "binary expansion" layer for
//! the fractional part, covered by a roof of `floor(a)` fully selected
//! generations.

use std::fmt;
use std::str::FromStr;

use num_traits::ToPrimitive;
use thiserror::Error;

use crate::grid::{NodeAddress, MAX_LEVEL};
use crate::rational::{DyadicRational, GeneralRational};
use crate::sequence::CarlesonSeq;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AdmissibleError {
    #[error("target average {0} is negative")]
    Negative(GeneralRational),
    #[error("fractional construction needs 0 <= a < 1, got {0}")]
    NotFractional(DyadicRational),
    #[error("target average {a} exceeds the Carleson parameter {c}")]
    NotAdmissible { a: GeneralRational, c: GeneralRational },
    #[error("the Carleson parameter must be at least 1, got {0}")]
    ParameterBelowOne(GeneralRational),
    #[error("fractional part {0} is not dyadic; round it to a power-of-two denominator first")]
    NotDyadic(GeneralRational),
    #[error("{value} needs {needed} binary digits below its anchor but only {available} levels are available")]
    Precision {
        value: DyadicRational,
        needed: u32,
        available: u32,
    },
    #[error("the partition construction only realizes the average 1, got {0}")]
    StyleUnsupported(GeneralRational),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ConstructionStyle {
    /// Fully selected generations over a disjoint fractional layer.
    #[default]
    Roof,
    /// Average 1 from a partition of the main interval into proper
    /// subintervals instead of selecting the main interval itself.
    Partition,
}

impl FromStr for ConstructionStyle {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "roof" => Ok(Self::Roof),
            "partition" => Ok(Self::Partition),
            other => Err(format!("unknown style `{other}` (expected roof or partition)")),
        }
    }
}

impl fmt::Display for ConstructionStyle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Roof => "roof",
            Self::Partition => "partition",
        })
    }
}

/// Bits `b_1..b_depth` with `a = sum b_m 2^{-m}`.
pub fn binary_expansion(a: &DyadicRational, depth: u32) -> Result<Vec<u8>, AdmissibleError> {
    if a.is_negative() || *a >= DyadicRational::one() {
        return Err(AdmissibleError::NotFractional(a.clone()));
    }
    let numer = a.scaled_numerator(depth).ok_or_else(|| AdmissibleError::Precision {
        value: a.clone(),
        needed: a.log2_denominator(),
        available: depth,
    })?;
    Ok((1..=depth)
        .map(|m| u8::from(numer.bit(u64::from(depth - m))))
        .collect())
}

/// Disjoint selections below `anchor` whose measures, relative to `anchor`,
/// follow `bits`: a 1 selects the right child of the current search interval
/// and moves the search into the left child; a 0 moves the search into the
/// right child.
fn expansion_layer(bits: &[u8], anchor: NodeAddress) -> Vec<NodeAddress> {
    let mut search = anchor;
    let mut out = Vec::new();
    for &b in bits {
        let (left, right) = search.children();
        if b == 1 {
            out.push(right);
            search = left;
        } else {
            search = right;
        }
    }
    out
}

/// A pairwise-disjoint sequence with root average exactly `a`, `0 <= a < 1`.
pub fn construct_fractional(a: &DyadicRational, depth: u32) -> Result<CarlesonSeq, AdmissibleError> {
    let bits = binary_expansion(a, depth)?;
    Ok(CarlesonSeq::new(depth, expansion_layer(&bits, NodeAddress::ROOT)).expect("levels <= depth"))
}

/// A `c`-Carleson sequence of the given depth with root average exactly `a`.
///
/// Integer `a >= 1` selects generations `0..a`. Otherwise the generations
/// `0..floor(a)` form a roof and the binary-expansion layer of the fractional
/// part is replicated inside every interval of generation `floor(a) - 1`
/// (inside the main interval when `floor(a) = 0`), so all subtrees at that
/// generation carry the same average.
pub fn construct_admissible(
    a: &GeneralRational,
    c: &GeneralRational,
    depth: u32,
    style: ConstructionStyle,
) -> Result<CarlesonSeq, AdmissibleError> {
    if *c < GeneralRational::one() {
        return Err(AdmissibleError::ParameterBelowOne(c.clone()));
    }
    if a.numer() < &0.into() {
        return Err(AdmissibleError::Negative(a.clone()));
    }
    if a > c {
        return Err(AdmissibleError::NotAdmissible {
            a: a.clone(),
            c: c.clone(),
        });
    }
    let frac_g = a.fract();
    let frac = frac_g
        .to_dyadic()
        .ok_or_else(|| AdmissibleError::NotDyadic(frac_g.clone()))?;
    let depth_err = |needed: u32, available: u32| AdmissibleError::Precision {
        value: a.to_dyadic().unwrap_or_else(|| frac.clone()),
        needed,
        available,
    };
    let roof = a
        .floor()
        .to_u32()
        .filter(|&f| f <= MAX_LEVEL + 1)
        .ok_or_else(|| depth_err(u32::MAX, depth))?;

    if style == ConstructionStyle::Partition {
        if *a != GeneralRational::one() {
            return Err(AdmissibleError::StyleUnsupported(a.clone()));
        }
        if depth == 0 {
            return Err(depth_err(1, 0));
        }
        let mut sel: Vec<NodeAddress> = (1..=depth)
            .map(|k| NodeAddress { level: k, index: 1 })
            .collect();
        sel.push(NodeAddress { level: depth, index: 0 });
        return Ok(CarlesonSeq::new(depth, sel).expect("levels <= depth"));
    }

    if roof == 0 {
        return construct_fractional(&frac, depth);
    }
    if roof - 1 > depth {
        return Err(depth_err(roof - 1, depth));
    }
    let mut sel: Vec<NodeAddress> = (0..roof).flat_map(NodeAddress::generation).collect();
    if !frac.is_zero() {
        // Each anchor at generation roof-1 owns levels roof..=depth below it.
        let available = depth + 1 - roof;
        let bits = binary_expansion(&frac, available).map_err(|_| AdmissibleError::Precision {
            value: frac.clone(),
            needed: frac.log2_denominator(),
            available,
        })?;
        for anchor in NodeAddress::generation(roof - 1) {
            sel.extend(expansion_layer(&bits, anchor));
        }
    }
    Ok(CarlesonSeq::new(depth, sel).expect("levels <= depth"))
}
