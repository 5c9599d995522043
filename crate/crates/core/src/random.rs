//! Seeded generation of random `C`-Carleson sequences for test corpora.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::grid::NodeAddress;
use crate::rational::GeneralRational;
use crate::sequence::CarlesonSeq;

/// Dense generation visits every node, so the depth is kept modest.
pub const MAX_RANDOM_DEPTH: u32 = 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RandomSeqError {
    #[error("random sequences are limited to depth {MAX_RANDOM_DEPTH}, got {0}")]
    DepthTooLarge(u32),
    #[error("the Carleson parameter must be at least 1, got {0}")]
    ParameterBelowOne(GeneralRational),
}

/// Builds a random sequence with Carleson constant at most `c`.
///
/// Nodes are visited top-down in breadth-first order and each is proposed
/// with a per-sequence selection rate drawn from the seed. A proposal is
/// rejected when it would push the average of any ancestor-or-self above `c`;
/// since later selections only add mass, accepted prefixes never need to be
/// revisited.
pub fn random_carleson(
    depth: u32,
    c: &GeneralRational,
    seed: u64,
) -> Result<CarlesonSeq, RandomSeqError> {
    if depth > MAX_RANDOM_DEPTH {
        return Err(RandomSeqError::DepthTooLarge(depth));
    }
    if *c < GeneralRational::one() {
        return Err(RandomSeqError::ParameterBelowOne(c.clone()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rate: u32 = rng.gen_range(1..=15);

    // Mass in units of 2^{-depth}, indexed in heap order.
    let node_count = (1usize << (depth + 1)) - 1;
    let mut mass = vec![0u64; node_count];
    // Largest admissible mass at each level: floor(c * 2^{depth - level}).
    let cap: Vec<u64> = (0..=depth)
        .map(|level| {
            let f = c.floor_scaled(depth - level);
            u64::try_from(f).unwrap_or(u64::MAX)
        })
        .collect();

    let heap = |a: NodeAddress| (1usize << a.level) - 1 + a.index as usize;
    let mut selected = Vec::new();
    for level in 0..=depth {
        let w = 1u64 << (depth - level);
        for a in NodeAddress::generation(level) {
            if rng.gen_range(0..16) >= rate {
                continue;
            }
            let fits = (0..=level).all(|l| {
                let anc = a.ancestor_at(l).expect("l <= level");
                mass[heap(anc)] + w <= cap[l as usize]
            });
            if !fits {
                continue;
            }
            for l in 0..=level {
                mass[heap(a.ancestor_at(l).expect("l <= level"))] += w;
            }
            selected.push(a);
        }
    }
    Ok(CarlesonSeq::new(depth, selected).expect("levels bounded by depth"))
}
