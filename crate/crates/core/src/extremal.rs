//! Exact dynamic program for the largest level-set measure at finite depth.
//!
//! `F_D(a, m)` is the maximum of `V_m(alpha)` over sequences of depth `D`
//! with root average exactly `a` and Carleson constant at most `C`. A depth-`d`
//! tree either selects its root (`gamma = 1`) or not, and hands averages
//! `a1, a2` to its two depth-`(d - 1)` subtrees with `a = gamma + (a1 + a2) / 2`;
//! the residual level drops by `gamma`. Every subtree average is capped at
//! `min(C, d + 1)`, which is exactly the Carleson constraint at its root.
//!
//! Rows are filled level by level in integer units: at depth `d` the average
//! `a` is stored as `p = a * 2^d` and the value as `k = F * 2^d`.

use std::fmt;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use thiserror::Error;

use crate::candidate::{candidate_eval, BellmanPoint, CandidateParams};
use crate::grid::NodeAddress;
use crate::rational::{DyadicRational, GeneralRational};
use crate::sequence::CarlesonSeq;

pub const DEFAULT_MAX_DEPTH: u32 = 12;
pub const DEFAULT_MAX_CELLS: u64 = 8_000_000;
/// Environment variable overriding [`DEFAULT_MAX_CELLS`].
pub const MAX_CELLS_ENV: &str = "DYADIC_BELLMAN_MAX_CELLS";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DpLimits {
    pub max_depth: u32,
    pub max_cells: u64,
}

impl Default for DpLimits {
    fn default() -> Self {
        DpLimits {
            max_depth: DEFAULT_MAX_DEPTH,
            max_cells: DEFAULT_MAX_CELLS,
        }
    }
}

impl DpLimits {
    /// Defaults, with the cell cap read from [`MAX_CELLS_ENV`] when set.
    pub fn from_env() -> Self {
        let mut l = DpLimits::default();
        if let Some(n) = std::env::var(MAX_CELLS_ENV).ok().and_then(|v| v.trim().parse().ok()) {
            l.max_cells = n;
        }
        l
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DpError {
    #[error("the Carleson parameter must be at least 1, got {0}")]
    ParameterBelowOne(GeneralRational),
    #[error("depth {depth} exceeds the configured limit {limit}")]
    DepthLimit { depth: u32, limit: u32 },
    #[error("table needs {cells} cells, more than the configured cap {limit} (set {MAX_CELLS_ENV} to raise it)")]
    ResourceLimit { cells: u64, limit: u64 },
    #[error("average {a} is not representable at depth {depth} (denominator 2^{depth})")]
    Precision { a: DyadicRational, depth: u32 },
    #[error("average {a} is outside [0, {bound}] at depth {depth}")]
    NotAdmissible { a: DyadicRational, bound: GeneralRational, depth: u32 },
    #[error("no cell for {0}")]
    MissingKey(DPKey),
    #[error("computed value {value} at {key} exceeds the candidate bound {bound}")]
    UpperBound {
        key: DPKey,
        value: DyadicRational,
        bound: GeneralRational,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DPKey {
    pub depth: u32,
    pub average: DyadicRational,
    pub level: i64,
}

impl fmt::Display for DPKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(depth {}, a = {}, m = {})", self.depth, self.average, self.level)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Choice {
    /// Depth 0: the single interval is selected iff its average is 1.
    Leaf,
    Split {
        gamma: u8,
        a_left: DyadicRational,
        a_right: DyadicRational,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DPCell {
    pub value: DyadicRational,
    pub choice: Choice,
}

/// One depth of the table, `(m_max + 1) x (cap + 1)` cells indexed `[m][p]`.
#[derive(Clone, Debug)]
struct Row {
    cap: u64,
    /// `u64::MAX` marks an infeasible average.
    value: Vec<u64>,
    gamma: Vec<u8>,
    left: Vec<u64>,
}

const INFEASIBLE: u64 = u64::MAX;

impl Row {
    fn idx(&self, m: usize, p: u64) -> usize {
        m * (self.cap as usize + 1) + p as usize
    }
}

#[derive(Clone, Debug)]
pub struct DpTable {
    c: GeneralRational,
    m_max: u32,
    rows: Vec<Row>,
}

fn depth_cap(c: &GeneralRational, d: u32) -> u64 {
    let bound = c.clone().min(GeneralRational::from_integer(d + 1));
    bound.floor_scaled(d).to_u64().expect("cap fits in u64 below the depth limit")
}

/// Total number of cells for depths `0..=depth`.
pub fn cell_count(c: &GeneralRational, depth: u32, m_max: u32) -> u64 {
    (0..=depth)
        .map(|d| (depth_cap(c, d) + 1) * (u64::from(m_max) + 1))
        .sum()
}

/// Fills every depth `0..=depth` for `m in 0..=m_max`.
///
/// Every computed cell is compared against the candidate Bellman function;
/// exceeding it is reported as [`DpError::UpperBound`].
pub fn dp_table(c: &GeneralRational, depth: u32, m_max: u32, limits: DpLimits) -> Result<DpTable, DpError> {
    if *c < GeneralRational::one() {
        return Err(DpError::ParameterBelowOne(c.clone()));
    }
    if depth > limits.max_depth {
        return Err(DpError::DepthLimit {
            depth,
            limit: limits.max_depth,
        });
    }
    let cells = cell_count(c, depth, m_max);
    if cells > limits.max_cells {
        return Err(DpError::ResourceLimit {
            cells,
            limit: limits.max_cells,
        });
    }
    let params = CandidateParams::new(c.clone()).map_err(|_| DpError::ParameterBelowOne(c.clone()))?;
    let ms = m_max as usize + 1;
    let mut rows: Vec<Row> = Vec::with_capacity(depth as usize + 1);

    for d in 0..=depth {
        let cap = depth_cap(c, d);
        let n = ms * (cap as usize + 1);
        let mut row = Row {
            cap,
            value: vec![INFEASIBLE; n],
            gamma: vec![0; n],
            left: vec![0; n],
        };
        if d == 0 {
            for m in 0..ms {
                for p in 0..=cap {
                    let i = row.idx(m, p);
                    row.value[i] = u64::from(m as u64 <= p);
                }
            }
        } else {
            let prev = rows.last().expect("previous depth");
            let unit = 1u64 << d;
            for m in 0..ms {
                for p in 0..=cap {
                    if let Some((k, g, p1)) = best_split(prev, m, p, unit) {
                        let i = row.idx(m, p);
                        row.value[i] = k;
                        row.gamma[i] = g;
                        row.left[i] = p1;
                    }
                }
            }
        }
        for m in 0..ms {
            for p in 0..=cap {
                let k = row.value[row.idx(m, p)];
                if k == INFEASIBLE {
                    continue;
                }
                let value = DyadicRational::new(k, d);
                let a = DyadicRational::new(p, d);
                let bound = candidate_eval(
                    &params,
                    &BellmanPoint::new(a.to_general(), GeneralRational::from_integer(m as i64)),
                )
                .expect("average within [0, C]");
                if value.cmp_general(&bound).is_gt() {
                    return Err(DpError::UpperBound {
                        key: DPKey {
                            depth: d,
                            average: a,
                            level: m as i64,
                        },
                        value,
                        bound,
                    });
                }
            }
        }
        rows.push(row);
    }
    Ok(DpTable {
        c: c.clone(),
        m_max,
        rows,
    })
}

/// Best `(value, gamma, p_left)` for cell `(m, p)` given the row below.
/// Ties keep the first candidate in the order `gamma = 1, 0`, then `p_left`
/// ascending, with `p_left <= p_right`.
fn best_split(prev: &Row, m: usize, p: u64, unit: u64) -> Option<(u64, u8, u64)> {
    let mut best: Option<(u64, u8, u64)> = None;
    for gamma in [1u8, 0] {
        let Some(q) = p.checked_sub(u64::from(gamma) * unit) else {
            continue;
        };
        if q > 2 * prev.cap {
            continue;
        }
        let mm = m.saturating_sub(gamma as usize);
        let base = prev.idx(mm, 0);
        let vals = &prev.value[base..base + prev.cap as usize + 1];
        for p1 in q.saturating_sub(prev.cap)..=q / 2 {
            let (v1, v2) = (vals[p1 as usize], vals[(q - p1) as usize]);
            if v1 == INFEASIBLE || v2 == INFEASIBLE {
                continue;
            }
            let k = v1 + v2;
            if best.is_none_or(|(b, _, _)| k > b) {
                best = Some((k, gamma, p1));
            }
        }
    }
    best
}

impl DpTable {
    pub fn c(&self) -> &GeneralRational {
        &self.c
    }

    pub fn depth(&self) -> u32 {
        self.rows.len() as u32 - 1
    }

    pub fn m_max(&self) -> u32 {
        self.m_max
    }

    /// Largest stored average at depth `d`.
    pub fn max_average(&self, d: u32) -> Option<DyadicRational> {
        self.rows.get(d as usize).map(|r| DyadicRational::new(r.cap, d))
    }

    fn locate(&self, key: &DPKey) -> Option<(&Row, usize)> {
        let row = self.rows.get(key.depth as usize)?;
        let p = key.average.scaled_numerator(key.depth)?.to_u64()?;
        if p > row.cap || key.level > i64::from(self.m_max) {
            return None;
        }
        let m = key.level.max(0) as usize;
        let i = row.idx(m, p);
        (row.value[i] != INFEASIBLE).then_some((row, i))
    }

    /// The cell for `key`; levels `m <= 0` share the obstacle cell.
    pub fn get(&self, key: &DPKey) -> Option<DPCell> {
        let (row, i) = self.locate(key)?;
        let d = key.depth;
        let choice = if d == 0 {
            Choice::Leaf
        } else {
            let p = key.average.scaled_numerator(d)?.to_u64()?;
            let gamma = row.gamma[i];
            let p1 = row.left[i];
            let p2 = p - u64::from(gamma) * (1u64 << d) - p1;
            Choice::Split {
                gamma,
                a_left: DyadicRational::new(p1, d - 1),
                a_right: DyadicRational::new(p2, d - 1),
            }
        };
        Some(DPCell {
            value: DyadicRational::new(row.value[i], d),
            choice,
        })
    }

    pub fn value(&self, depth: u32, a: &DyadicRational, m: i64) -> Option<DyadicRational> {
        self.get(&DPKey {
            depth,
            average: a.clone(),
            level: m,
        })
        .map(|c| c.value)
    }

    /// All cells at one depth in `(m, a)` order.
    pub fn cells(&self, depth: u32) -> Vec<(DyadicRational, u32, DyadicRational)> {
        let Some(row) = self.rows.get(depth as usize) else {
            return Vec::new();
        };
        let mut out = Vec::new();
        for m in 0..=self.m_max {
            for p in 0..=row.cap {
                let k = row.value[row.idx(m as usize, p)];
                if k != INFEASIBLE {
                    out.push((DyadicRational::new(p, depth), m, DyadicRational::new(k, depth)));
                }
            }
        }
        out
    }
}

fn check_key(c: &GeneralRational, depth: u32, a: &DyadicRational) -> Result<(), DpError> {
    if a.scaled_numerator(depth).is_none() {
        return Err(DpError::Precision { a: a.clone(), depth });
    }
    let bound = c.clone().min(GeneralRational::from_integer(depth + 1));
    if a.is_negative() || a.cmp_general(&bound).is_gt() {
        return Err(DpError::NotAdmissible {
            a: a.clone(),
            bound,
            depth,
        });
    }
    Ok(())
}

/// Backtracks the stored choices into a sequence of depth `key.depth`.
pub fn reconstruct_witness(table: &DpTable, key: &DPKey) -> Result<CarlesonSeq, DpError> {
    table.locate(key).ok_or_else(|| DpError::MissingKey(key.clone()))?;
    let mut selected = Vec::new();
    // (node, depth of its subtree, p in units of 2^{-depth}, residual level)
    let mut stack = vec![(NodeAddress::ROOT, key.depth, key.average.scaled_numerator(key.depth).and_then(|n| n.to_u64()).unwrap_or(0), key.level.max(0) as usize)];
    while let Some((node, d, p, m)) = stack.pop() {
        let row = &table.rows[d as usize];
        if d == 0 {
            if p == 1 {
                selected.push(node);
            }
            continue;
        }
        let i = row.idx(m, p);
        let gamma = row.gamma[i];
        let p1 = row.left[i];
        let p2 = p - u64::from(gamma) * (1u64 << d) - p1;
        if gamma == 1 {
            selected.push(node);
        }
        let mm = m.saturating_sub(gamma as usize);
        let (l, r) = node.children();
        stack.push((l, d - 1, p1, mm));
        stack.push((r, d - 1, p2, mm));
    }
    Ok(CarlesonSeq::new(key.depth, selected).expect("levels bounded by depth"))
}

/// `F_D(a, m)` with a witness attaining it.
pub fn dp_max_levelset(
    c: &GeneralRational,
    depth: u32,
    a: &DyadicRational,
    m: i64,
    limits: DpLimits,
) -> Result<(DyadicRational, CarlesonSeq), DpError> {
    if *c < GeneralRational::one() {
        return Err(DpError::ParameterBelowOne(c.clone()));
    }
    check_key(c, depth, a)?;
    let table = dp_table(c, depth, m.max(0).try_into().unwrap_or(u32::MAX), limits)?;
    let key = DPKey {
        depth,
        average: a.clone(),
        level: m,
    };
    let cell = table.get(&key).ok_or_else(|| DpError::MissingKey(key.clone()))?;
    Ok((cell.value, reconstruct_witness(&table, &key)?))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConvergenceRow {
    pub depth: u32,
    pub value: DyadicRational,
    pub bound: GeneralRational,
    pub gap: GeneralRational,
}

/// `F_D(a, m)` and its gap to the candidate for every depth up to `d_max`
/// at which `a` is a valid average.
pub fn convergence_report(
    c: &GeneralRational,
    a: &DyadicRational,
    m: i64,
    d_max: u32,
    limits: DpLimits,
) -> Result<Vec<ConvergenceRow>, DpError> {
    let params = CandidateParams::new(c.clone()).map_err(|_| DpError::ParameterBelowOne(c.clone()))?;
    check_key(c, d_max, a)?;
    let table = dp_table(c, d_max, m.max(0).try_into().unwrap_or(u32::MAX), limits)?;
    let bound = candidate_eval(
        &params,
        &BellmanPoint::new(a.to_general(), GeneralRational::from_integer(BigInt::from(m))),
    )
    .expect("checked average");
    Ok((0..=d_max)
        .filter(|&d| check_key(c, d, a).is_ok())
        .filter_map(|d| {
            let value = table.value(d, a, m)?;
            let gap = &bound - &value.to_general();
            Some(ConvergenceRow {
                depth: d,
                value,
                bound: bound.clone(),
                gap,
            })
        })
        .collect())
}
