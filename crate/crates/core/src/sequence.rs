//! Finite binary Carleson sequences and the quantities derived from them.
//!
//! A [`CarlesonSeq`] of depth `N` selects dyadic intervals of levels `0..=N`.
//! Heights are only ever evaluated on the `2^N` leaf intervals of level `N`:
//! a finite sequence has constant height on each of them. Leaves own their
//! points under the half-open `[a, b)` convention, so boundary points never
//! need separate treatment.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::Deserialize;
use thiserror::Error;

use crate::grid::{NodeAddress, MAX_LEVEL};
use crate::rational::{DyadicRational, GeneralRational};

pub const JSON_FORMAT: &str = "carleson-seq/1";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeqError {
    #[error("depth {0} exceeds the supported maximum {MAX_LEVEL}")]
    DepthTooLarge(u32),
    #[error("selected address {address} lies below the truncation depth {depth}")]
    SelectionTooDeep { address: NodeAddress, depth: u32 },
    #[error("height requested at {address}, but leaves of a depth-{depth} sequence sit at level {depth}")]
    LevelMismatch { address: NodeAddress, depth: u32 },
    #[error("cannot truncate a depth-{depth} sequence at level {requested}")]
    TruncateBeyondDepth { requested: u32, depth: u32 },
    #[error("invalid carleson-seq/1 document: {0}")]
    Json(String),
}

/// A finite binary sequence `alpha` adapted to the main interval, truncated
/// at `depth`. Immutable once built; every derived quantity is cached by a
/// single pass at construction.
#[derive(Clone, Debug)]
pub struct CarlesonSeq {
    depth: u32,
    selected: BTreeSet<NodeAddress>,
    /// `sum_{K subset J, K selected} |K|/|I|`, stored for every `J` that is an
    /// ancestor-or-self of some selected address; zero elsewhere.
    mass: BTreeMap<NodeAddress, DyadicRational>,
    /// Alpha-children of each selected address.
    alpha_children: BTreeMap<NodeAddress, Vec<NodeAddress>>,
    /// Nearest selected strict ancestor of each selected address.
    nearest_selected: BTreeMap<NodeAddress, Option<NodeAddress>>,
}

impl PartialEq for CarlesonSeq {
    fn eq(&self, other: &Self) -> bool {
        self.depth == other.depth && self.selected == other.selected
    }
}

impl Eq for CarlesonSeq {}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationReport {
    pub carleson_constant: DyadicRational,
    pub average_at_root: DyadicRational,
    pub is_c_carleson: bool,
    /// An interval attaining the supremum (the root for the empty sequence).
    pub worst_witness: NodeAddress,
}

impl CarlesonSeq {
    pub fn new(
        depth: u32,
        selected: impl IntoIterator<Item = NodeAddress>,
    ) -> Result<Self, SeqError> {
        if depth > MAX_LEVEL {
            return Err(SeqError::DepthTooLarge(depth));
        }
        let selected: BTreeSet<NodeAddress> = selected.into_iter().collect();
        if let Some(&address) = selected.iter().find(|a| a.level > depth) {
            return Err(SeqError::SelectionTooDeep { address, depth });
        }

        let mut mass: BTreeMap<NodeAddress, DyadicRational> = BTreeMap::new();
        let mut nearest_selected = BTreeMap::new();
        let mut alpha_children: BTreeMap<NodeAddress, Vec<NodeAddress>> =
            selected.iter().map(|&k| (k, Vec::new())).collect();
        for &k in &selected {
            let w = k.relative_measure();
            let mut nearest = None;
            let mut cur = Some(k);
            while let Some(j) = cur {
                let m = mass.entry(j).or_default();
                *m = &*m + &w;
                if nearest.is_none() && j != k && selected.contains(&j) {
                    nearest = Some(j);
                }
                cur = j.parent();
            }
            nearest_selected.insert(k, nearest);
            if let Some(p) = nearest {
                alpha_children.get_mut(&p).expect("selected").push(k);
            }
        }

        Ok(CarlesonSeq {
            depth,
            selected,
            mass,
            alpha_children,
            nearest_selected,
        })
    }

    pub fn empty(depth: u32) -> Self {
        Self::new(depth, []).expect("empty sequence is always valid")
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn selected(&self) -> &BTreeSet<NodeAddress> {
        &self.selected
    }

    pub fn is_selected(&self, a: NodeAddress) -> bool {
        self.selected.contains(&a)
    }

    pub fn is_empty(&self) -> bool {
        self.selected.is_empty()
    }

    /// `|J|^{-1} sum_{K subset J, K selected} |K|`.
    pub fn carleson_average(&self, j: NodeAddress) -> DyadicRational {
        match self.mass.get(&j) {
            Some(m) => m.shl(j.level),
            None => DyadicRational::zero(),
        }
    }

    pub fn average_at_root(&self) -> DyadicRational {
        self.carleson_average(NodeAddress::ROOT)
    }

    /// The Carleson constant and an interval attaining it. Only selected
    /// intervals are inspected: for an unselected `J` the average is a convex
    /// combination of averages over its alpha-children.
    pub fn carleson_constant(&self) -> (DyadicRational, NodeAddress) {
        let mut best = (DyadicRational::zero(), NodeAddress::ROOT);
        let mut first = true;
        for &k in &self.selected {
            let avg = self.carleson_average(k);
            if first || avg > best.0 {
                best = (avg, k);
                first = false;
            }
        }
        best
    }

    pub fn validate(&self, c: &GeneralRational) -> ValidationReport {
        let (carleson_constant, worst_witness) = self.carleson_constant();
        ValidationReport {
            is_c_carleson: carleson_constant.cmp_general(c).is_le(),
            average_at_root: self.average_at_root(),
            carleson_constant,
            worst_witness,
        }
    }

    /// The maximal selected strict descendants of `j`.
    pub fn alpha_children(&self, j: NodeAddress) -> Vec<NodeAddress> {
        if let Some(ch) = self.alpha_children.get(&j) {
            return ch.clone();
        }
        self.selected
            .iter()
            .copied()
            .filter(|&k| {
                j.is_strict_ancestor_of(k)
                    && self.nearest_selected[&k].is_none_or(|l| l.level <= j.level)
            })
            .collect()
    }

    /// Maximal selected intervals (the first sparse generation).
    pub fn maximal_selected(&self) -> Vec<NodeAddress> {
        self.nearest_selected
            .iter()
            .filter(|(_, n)| n.is_none())
            .map(|(&k, _)| k)
            .collect()
    }

    /// `[G^0, G^1, ...]` up to (excluding) the first empty generation.
    pub fn sparse_generations(&self) -> Vec<Vec<NodeAddress>> {
        let mut out = Vec::new();
        let mut current = self.maximal_selected();
        while !current.is_empty() {
            let mut next: Vec<NodeAddress> = current
                .iter()
                .flat_map(|&k| self.alpha_children(k))
                .collect();
            next.sort_unstable();
            out.push(current);
            current = next;
        }
        out
    }

    /// `|S^m| / |I|`, zero once the generations run out.
    pub fn generation_measure(&self, m: usize) -> DyadicRational {
        self.sparse_generations()
            .get(m)
            .map(|g| g.iter().map(|k| k.relative_measure()).sum())
            .unwrap_or_default()
    }

    /// All generation measures `|S^0|/|I|, |S^1|/|I|, ...` in one pass.
    pub fn generation_measures(&self) -> Vec<DyadicRational> {
        self.sparse_generations()
            .iter()
            .map(|g| g.iter().map(|k| k.relative_measure()).sum())
            .collect()
    }

    /// Number of selected intervals containing the leaf.
    pub fn height_at(&self, leaf: NodeAddress) -> Result<u32, SeqError> {
        if leaf.level != self.depth {
            return Err(SeqError::LevelMismatch {
                address: leaf,
                depth: self.depth,
            });
        }
        Ok((0..=self.depth)
            .filter(|&l| self.selected.contains(&leaf.ancestor_at(l).expect("level <= depth")))
            .count() as u32)
    }

    /// `V_lambda = |{t : h(t) >= lambda}| / |I|`, read off the sparse
    /// generations: `1` for `lambda <= 0`, otherwise `|S^{ceil(lambda)-1}|/|I|`.
    pub fn level_set_measure(&self, lambda: &GeneralRational) -> DyadicRational {
        let m = lambda.ceil();
        if m <= BigInt::from(0) {
            return DyadicRational::one();
        }
        match (m - BigInt::from(1)).to_usize() {
            Some(idx) => self.generation_measure(idx),
            None => DyadicRational::zero(),
        }
    }

    /// Keeps only selections with `|J|/|I| > 2^{-n}`, i.e. levels `< n`.
    pub fn truncate(&self, n: u32) -> Result<CarlesonSeq, SeqError> {
        if n > self.depth {
            return Err(SeqError::TruncateBeyondDepth {
                requested: n,
                depth: self.depth,
            });
        }
        CarlesonSeq::new(n, self.selected.iter().copied().filter(|a| a.level < n))
    }

    /// Same selections viewed at a greater depth.
    pub fn with_depth(&self, depth: u32) -> Result<CarlesonSeq, SeqError> {
        CarlesonSeq::new(depth, self.selected.iter().copied())
    }

    /// The selections inside `j`, re-rooted so that `j` becomes the main
    /// interval.
    pub fn subtree(&self, j: NodeAddress) -> CarlesonSeq {
        let depth = self.depth.saturating_sub(j.level);
        CarlesonSeq::new(
            depth,
            self.selected.iter().filter(|k| j.is_ancestor_of(**k)).map(|k| {
                let rel = k.level - j.level;
                NodeAddress {
                    level: rel,
                    index: k.index - (j.index << rel),
                }
            }),
        )
        .expect("subtree of a valid sequence is valid")
    }

    /// Canonical `carleson-seq/1` JSON: fixed key order, selections sorted.
    pub fn to_json(&self) -> String {
        let sel: Vec<String> = self
            .selected
            .iter()
            .map(|a| format!("[{}, {}]", a.level, a.index))
            .collect();
        format!(
            "{{\"format\": \"{JSON_FORMAT}\", \"depth\": {}, \"selected\": [{}]}}",
            self.depth,
            sel.join(", ")
        )
    }

    pub fn from_json(text: &str) -> Result<CarlesonSeq, SeqError> {
        #[derive(Deserialize)]
        struct Doc {
            format: String,
            depth: u32,
            selected: Vec<(u32, u64)>,
        }
        let doc: Doc = serde_json::from_str(text).map_err(|e| SeqError::Json(e.to_string()))?;
        if doc.format != JSON_FORMAT {
            return Err(SeqError::Json(format!(
                "field `format`: expected \"{JSON_FORMAT}\", found \"{}\"",
                doc.format
            )));
        }
        let mut seen = BTreeSet::new();
        for (i, &(level, index)) in doc.selected.iter().enumerate() {
            let a = NodeAddress::new(level, index).ok_or_else(|| {
                SeqError::Json(format!(
                    "field `selected[{i}]`: [{level}, {index}] is not a dyadic address (index must be < 2^level)"
                ))
            })?;
            if level > doc.depth {
                return Err(SeqError::Json(format!(
                    "field `selected[{i}]`: level {level} exceeds depth {}",
                    doc.depth
                )));
            }
            if !seen.insert(a) {
                return Err(SeqError::Json(format!("field `selected[{i}]`: duplicate address {a}")));
            }
        }
        CarlesonSeq::new(doc.depth, seen)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(level: u32, index: u64) -> NodeAddress {
        NodeAddress::new(level, index).unwrap()
    }

    fn d(s: &str) -> DyadicRational {
        s.parse().unwrap()
    }

    fn g(s: &str) -> GeneralRational {
        s.parse().unwrap()
    }

    fn chain(n: u32) -> CarlesonSeq {
        CarlesonSeq::new(n, (0..=n).map(|k| a(k, 0))).unwrap()
    }

    fn full(levels: u32, depth: u32) -> CarlesonSeq {
        CarlesonSeq::new(depth, (0..levels).flat_map(NodeAddress::generation)).unwrap()
    }

    #[test]
    fn averages() {
        let root = CarlesonSeq::new(0, [a(0, 0)]).unwrap();
        assert_eq!(root.carleson_average(a(0, 0)), d("1"));
        assert_eq!(full(3, 2).carleson_average(a(0, 0)), d("3"));
        assert_eq!(chain(4).carleson_average(a(0, 0)), d("31/16"));
        assert_eq!(chain(4).carleson_average(a(2, 0)), d("7/4"));
        assert_eq!(chain(4).carleson_average(a(2, 1)), d("0"));
    }

    #[test]
    fn carleson_constant_examples() {
        let disjoint = CarlesonSeq::new(3, [a(1, 0), a(2, 2), a(3, 7)]).unwrap();
        assert_eq!(disjoint.carleson_constant().0, d("1"));
        assert_eq!(chain(4).carleson_constant(), (d("31/16"), a(0, 0)));
        let empty = CarlesonSeq::empty(3);
        assert_eq!(empty.carleson_constant(), (d("0"), NodeAddress::ROOT));
        let r = chain(4).validate(&g("2"));
        assert!(r.is_c_carleson);
        assert!(!chain(4).validate(&g("3/2")).is_c_carleson);
        assert_eq!(r.average_at_root, d("31/16"));
    }

    #[test]
    fn alpha_children_examples() {
        let s = CarlesonSeq::new(2, [a(0, 0), a(1, 0), a(2, 1)]).unwrap();
        assert_eq!(s.alpha_children(a(0, 0)), vec![a(1, 0)]);
        let s = CarlesonSeq::new(1, [a(1, 0), a(1, 1)]).unwrap();
        assert_eq!(s.alpha_children(a(0, 0)), vec![a(1, 0), a(1, 1)]);
        assert!(chain(4).alpha_children(a(4, 0)).is_empty());
        // unselected J: maximal selected strict descendants
        let s = CarlesonSeq::new(3, [a(2, 0), a(3, 0), a(3, 7)]).unwrap();
        assert_eq!(s.alpha_children(a(1, 0)), vec![a(2, 0)]);
        assert_eq!(s.alpha_children(a(0, 0)), vec![a(2, 0), a(3, 7)]);
    }

    #[test]
    fn generations() {
        let s = CarlesonSeq::new(0, [a(0, 0)]).unwrap();
        assert_eq!(s.sparse_generations(), vec![vec![a(0, 0)]]);
        let s = CarlesonSeq::new(1, [a(0, 0), a(1, 0), a(1, 1)]).unwrap();
        assert_eq!(s.sparse_generations(), vec![vec![a(0, 0)], vec![a(1, 0), a(1, 1)]]);
        assert!(CarlesonSeq::empty(4).sparse_generations().is_empty());
    }

    #[test]
    fn generation_measure_examples() {
        assert_eq!(CarlesonSeq::new(0, [a(0, 0)]).unwrap().generation_measure(0), d("1"));
        assert_eq!(CarlesonSeq::new(2, [a(1, 0), a(2, 2)]).unwrap().generation_measure(0), d("3/4"));
        assert_eq!(CarlesonSeq::new(1, [a(0, 0), a(1, 0)]).unwrap().generation_measure(1), d("1/2"));
        assert_eq!(CarlesonSeq::new(1, [a(0, 0)]).unwrap().generation_measure(5), d("0"));
    }

    #[test]
    fn heights() {
        let s = CarlesonSeq::new(3, [a(0, 0)]).unwrap();
        assert!(NodeAddress::generation(3).all(|l| s.height_at(l) == Ok(1)));
        assert_eq!(chain(4).height_at(a(4, 0)), Ok(5));
        assert_eq!(chain(4).height_at(a(4, 8)), Ok(1));
        assert_eq!(
            chain(4).height_at(a(3, 0)),
            Err(SeqError::LevelMismatch { address: a(3, 0), depth: 4 })
        );
    }

    #[test]
    fn level_sets() {
        assert_eq!(chain(4).level_set_measure(&g("-3")), d("1"));
        assert_eq!(CarlesonSeq::empty(2).level_set_measure(&g("0")), d("1"));
        let root = CarlesonSeq::new(2, [a(0, 0)]).unwrap();
        assert_eq!(root.level_set_measure(&g("3.2")), d("0"));
        assert_eq!(root.level_set_measure(&g("1/2")), d("1"));
        assert_eq!(chain(4).level_set_measure(&g("2")), d("1/2"));
        assert_eq!(chain(4).level_set_measure(&g("3/2")), d("1/2"));
        assert_eq!(CarlesonSeq::empty(2).level_set_measure(&g("1")), d("0"));
    }

    #[test]
    fn truncation() {
        let t = chain(4).truncate(2).unwrap();
        assert_eq!(t.depth(), 2);
        assert_eq!(t.selected().iter().copied().collect::<Vec<_>>(), vec![a(0, 0), a(1, 0)]);
        let shallow = CarlesonSeq::new(3, [a(0, 0), a(2, 1)]).unwrap();
        assert_eq!(shallow.truncate(3).unwrap(), shallow);
        assert_eq!(CarlesonSeq::empty(0).truncate(0).unwrap(), CarlesonSeq::empty(0));
        assert_eq!(
            chain(2).truncate(3),
            Err(SeqError::TruncateBeyondDepth { requested: 3, depth: 2 })
        );
    }

    #[test]
    fn construction_errors() {
        assert!(matches!(
            CarlesonSeq::new(1, [a(2, 0)]),
            Err(SeqError::SelectionTooDeep { .. })
        ));
        assert!(matches!(CarlesonSeq::new(64, []), Err(SeqError::DepthTooLarge(64))));
    }

    #[test]
    fn json_format_is_canonical() {
        let s = CarlesonSeq::new(2, [a(1, 1), a(0, 0), a(2, 3)]).unwrap();
        assert_eq!(
            s.to_json(),
            r#"{"format": "carleson-seq/1", "depth": 2, "selected": [[0, 0], [1, 1], [2, 3]]}"#
        );
        assert_eq!(CarlesonSeq::from_json(&s.to_json()).unwrap(), s);
        assert_eq!(
            CarlesonSeq::empty(3).to_json(),
            r#"{"format": "carleson-seq/1", "depth": 3, "selected": []}"#
        );
    }

    #[test]
    fn json_diagnostics() {
        let err = |t: &str| match CarlesonSeq::from_json(t) {
            Err(SeqError::Json(m)) => m,
            other => panic!("expected json error, got {other:?}"),
        };
        assert!(err(r#"{"format": "x", "depth": 1, "selected": []}"#).contains("format"));
        assert!(err(r#"{"format": "carleson-seq/1", "depth": 1, "selected": [[1, 2]]}"#).contains("selected[0]"));
        assert!(err(r#"{"format": "carleson-seq/1", "depth": 1, "selected": [[2, 0]]}"#).contains("exceeds depth"));
        assert!(err(r#"{"format": "carleson-seq/1", "depth": 1, "selected": [[0, 0], [0, 0]]}"#).contains("duplicate"));
        assert!(err("{\n  \"format\": \"carleson-seq/1\",\n  \"depth\": \"x\"\n}").contains("line 3"));
    }

    #[test]
    fn subtree_reroots() {
        let s = CarlesonSeq::new(3, [a(1, 1), a(2, 3), a(3, 6), a(3, 0)]).unwrap();
        let t = s.subtree(a(1, 1));
        assert_eq!(t.depth(), 2);
        assert_eq!(t.selected().iter().copied().collect::<Vec<_>>(), vec![a(0, 0), a(1, 1), a(2, 2)]);
        assert_eq!(t.average_at_root(), s.carleson_average(a(1, 1)));
    }
}
