//! Exhaustive exact checks of the supersolution conditions.
//!
//! A function `G` on `[0, C] x R` is a supersolution when it equals 1 for
//! `lambda <= 0` (obstacle) and satisfies
//!
//! ```text
//! G(A + g, lambda + g) >= (G(A1, lambda) + G(A2, lambda)) / 2,   A = (A1 + A2) / 2,
//! ```
//!
//! for `g in {0, 1}` with `A + g <= C` (main inequality). The `g = 0` case is
//! midpoint concavity; `A1 = A2, g = 1` is the jump inequality.
//!
//! Checks run over a finite [`CheckGrid`]: every comparison is an exact
//! rational comparison, so a reported [`Violation`] is a genuine failure of
//! the inequality at grid points, and an empty report certifies the grid only.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Add;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};

use crate::candidate::{BellmanFunction, BellmanPoint, DomainError};
use crate::grid::NodeAddress;
use crate::rational::{DyadicRational, GeneralRational};
use crate::sequence::CarlesonSeq;

/// The discretization `A in {j / 2^d} cap [0, C]`, `lambda` from an explicit
/// list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckGrid {
    pub a_denominator_exp: u32,
    pub lambda_values: Vec<GeneralRational>,
    pub c: GeneralRational,
    /// At most this many violations are stored per check; all are counted.
    pub max_reported: usize,
}

impl CheckGrid {
    pub fn new(c: GeneralRational, a_denominator_exp: u32, lambda_values: Vec<GeneralRational>) -> Self {
        CheckGrid {
            a_denominator_exp,
            lambda_values,
            c,
            max_reported: 64,
        }
    }

    /// Integer `lambda` in `lambda_min..=lambda_max` followed by `extra`
    /// values not already present.
    pub fn with_integer_lambdas(
        c: GeneralRational,
        a_denominator_exp: u32,
        lambda_min: i64,
        lambda_max: i64,
        extra: &[GeneralRational],
    ) -> Self {
        let mut lambdas: Vec<GeneralRational> =
            (lambda_min..=lambda_max).map(GeneralRational::from_integer).collect();
        for e in extra {
            if !lambdas.contains(e) {
                lambdas.push(e.clone());
            }
        }
        Self::new(c, a_denominator_exp, lambdas)
    }

    /// Number of grid steps `j` with `j / 2^exp <= C`.
    fn last_index(&self, exp: u32) -> usize {
        self.c
            .floor_scaled(exp)
            .to_usize()
            .expect("grid too large to enumerate")
    }

    pub fn a_values(&self) -> Vec<GeneralRational> {
        let d = self.a_denominator_exp;
        (0..=self.last_index(d)).map(|j| grid_point(j, d)).collect()
    }

    pub fn describe(&self) -> String {
        let ls: Vec<String> = self.lambda_values.iter().map(|l| l.to_string()).collect();
        format!(
            "A in {{j/2^{}}} cap [0, {}]; lambda in {{{}}}",
            self.a_denominator_exp,
            self.c,
            ls.join(", ")
        )
    }
}

fn grid_point(j: usize, exp: u32) -> GeneralRational {
    GeneralRational::new(BigInt::from(j), BigInt::one() << exp as usize).expect("nonzero")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ViolationKind {
    Obstacle,
    Concavity,
    Jump,
    Main,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ViolationKind::Obstacle => "obstacle",
            ViolationKind::Concavity => "concavity",
            ViolationKind::Jump => "jump",
            ViolationKind::Main => "main",
        })
    }
}

/// A failed inequality `lhs >= rhs` (or, for the obstacle, `value = 1`),
/// stored with `lhs < rhs`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub points: Vec<BellmanPoint>,
    pub lhs: GeneralRational,
    pub rhs: GeneralRational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckReport {
    pub kind: ViolationKind,
    pub function: String,
    pub instances_checked: u64,
    pub violation_count: u64,
    pub violations: Vec<Violation>,
    /// How often each branch of the candidate's case analysis was hit.
    pub coverage: BTreeMap<&'static str, u64>,
}

impl CheckReport {
    fn new(kind: ViolationKind, function: String) -> Self {
        CheckReport {
            kind,
            function,
            instances_checked: 0,
            violation_count: 0,
            violations: Vec::new(),
            coverage: BTreeMap::new(),
        }
    }

    pub fn is_clean(&self) -> bool {
        self.violation_count == 0
    }

    fn record(&mut self, limit: usize, v: impl FnOnce() -> Violation) {
        self.violation_count += 1;
        if self.violations.len() < limit {
            self.violations.push(v());
        }
    }

    fn hit(&mut self, case: &'static str) {
        *self.coverage.entry(case).or_default() += 1;
    }
}

/// Values of a function along one `lambda`, on the refined grid
/// `{k / 2^(d+1)}`, which holds every grid point and every midpoint.
struct Row {
    lambda: GeneralRational,
    values: Vec<GeneralRational>,
}

impl Row {
    fn build(f: &dyn BellmanFunction, grid: &CheckGrid, lambda: &GeneralRational) -> Result<Row, DomainError> {
        let exp = grid.a_denominator_exp + 1;
        let values = (0..=grid.last_index(exp))
            .map(|k| f.eval(&grid_point(k, exp), lambda))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Row {
            lambda: lambda.clone(),
            values,
        })
    }
}

/// Integer numerators of several rows over one shared denominator. Small
/// numerators take a machine-integer path; anything else stays big.
enum Scaled {
    Small(Vec<Vec<i128>>),
    Big(Vec<Vec<BigInt>>),
}

fn scale_rows(rows: &[&Row]) -> Scaled {
    let mut lcm = BigInt::one();
    for r in rows {
        for v in &r.values {
            lcm = lcm.lcm(v.denom());
        }
    }
    let big: Vec<Vec<BigInt>> = rows
        .iter()
        .map(|r| {
            r.values
                .iter()
                .map(|v| v.numer() * (&lcm / v.denom()))
                .collect()
        })
        .collect();
    let small: Option<Vec<Vec<i128>>> = big
        .iter()
        .map(|r| r.iter().map(|n| n.to_i64().map(i128::from)).collect())
        .collect();
    match small {
        Some(s) => Scaled::Small(s),
        None => Scaled::Big(big),
    }
}

fn pt(a: GeneralRational, lambda: &GeneralRational) -> BellmanPoint {
    BellmanPoint::new(a, lambda.clone())
}

fn half(x: &GeneralRational) -> GeneralRational {
    x * &GeneralRational::new(1, 2).expect("nonzero")
}

/// Region of `lambda` relative to the candidate's branches.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Band {
    Obstacle,
    Middle,
    Outer,
}

fn band(lambda: &GeneralRational, floor_c: &BigInt) -> Band {
    if *lambda <= GeneralRational::zero() {
        Band::Obstacle
    } else if *lambda <= GeneralRational::from_integer(floor_c.clone()) {
        Band::Middle
    } else {
        Band::Outer
    }
}

/// `min(1, A / ceil(lambda))` saturates at 1.
fn saturated(a: &GeneralRational, lambda: &GeneralRational) -> bool {
    *a >= GeneralRational::from_integer(lambda.ceil())
}

#[cfg(test)]
fn concavity_case(a1: &GeneralRational, a2: &GeneralRational, lambda: &GeneralRational, floor_c: &BigInt) -> &'static str {
    match band(lambda, floor_c) {
        Band::Obstacle => "midpoint-concavity/case-1",
        Band::Outer => "midpoint-concavity/case-3",
        Band::Middle => match (saturated(a1, lambda), saturated(a2, lambda)) {
            (true, true) => "midpoint-concavity/case-2a",
            (false, false) => "midpoint-concavity/case-2c",
            _ => "midpoint-concavity/case-2b",
        },
    }
}

/// Tallies [`concavity_case`] over all pairs `i1 <= i2` of `a_values`
/// without visiting them: the case only depends on how many of the two
/// points saturate.
fn count_concavity_cases(report: &mut CheckReport, a_values: &[GeneralRational], lambda: &GeneralRational, floor_c: &BigInt) {
    let n = a_values.len() as u64;
    let pairs = |k: u64| k * (k + 1) / 2;
    match band(lambda, floor_c) {
        Band::Obstacle => *report.coverage.entry("midpoint-concavity/case-1").or_default() += pairs(n),
        Band::Outer => *report.coverage.entry("midpoint-concavity/case-3").or_default() += pairs(n),
        Band::Middle => {
            let sat = a_values.iter().filter(|a| saturated(a, lambda)).count() as u64;
            let unsat = n - sat;
            for (case, count) in [
                ("midpoint-concavity/case-2a", pairs(sat)),
                ("midpoint-concavity/case-2b", sat * unsat),
                ("midpoint-concavity/case-2c", pairs(unsat)),
            ] {
                if count > 0 {
                    *report.coverage.entry(case).or_default() += count;
                }
            }
        }
    }
}

fn jump_case(a: &GeneralRational, lambda: &GeneralRational, floor_c: &BigInt) -> &'static str {
    let lifted = lambda + &GeneralRational::one();
    let a_up = a + &GeneralRational::one();
    match (band(lambda, floor_c), band(&lifted, floor_c)) {
        (Band::Obstacle, Band::Obstacle) => "jump/case-1",
        (Band::Obstacle, _) => {
            if saturated(&a_up, &lifted) {
                "jump/case-2a"
            } else {
                "jump/case-2b"
            }
        }
        (Band::Middle, Band::Middle) => match (saturated(&a_up, &lifted), saturated(a, lambda)) {
            (true, true) => "jump/case-3a",
            (true, false) => "jump/case-3b",
            (false, true) => "jump/case-3c",
            (false, false) => "jump/case-3d",
        },
        (Band::Middle, Band::Outer) => "jump/case-4",
        _ => "jump/case-5",
    }
}

/// Top-level branches of the midpoint-concavity case analysis.
pub const CONCAVITY_CASES: [&str; 3] = [
    "midpoint-concavity/case-1",
    "midpoint-concavity/case-2",
    "midpoint-concavity/case-3",
];

/// Top-level branches of the jump-inequality case analysis.
pub const JUMP_CASES: [&str; 5] = ["jump/case-1", "jump/case-2", "jump/case-3", "jump/case-4", "jump/case-5"];

/// Sums sub-case counters (`case-2a`, `case-2b`, ...) into their top-level
/// case.
pub fn top_level_coverage(coverage: &BTreeMap<&'static str, u64>) -> BTreeMap<String, u64> {
    let mut out = BTreeMap::new();
    for (k, v) in coverage {
        let key = k.trim_end_matches(|c: char| c.is_ascii_lowercase());
        *out.entry(key.to_string()).or_default() += v;
    }
    out
}

/// `G(A, lambda) = 1` for every grid `A` and grid `lambda <= 0`.
pub fn check_obstacle(f: &dyn BellmanFunction, grid: &CheckGrid) -> Result<CheckReport, DomainError> {
    let mut report = CheckReport::new(ViolationKind::Obstacle, f.name());
    let one = GeneralRational::one();
    let a_values = grid.a_values();
    for lambda in grid.lambda_values.iter().filter(|l| **l <= GeneralRational::zero()) {
        for a in &a_values {
            report.instances_checked += 1;
            let v = f.eval(a, lambda)?;
            if v != one {
                let (lhs, rhs) = if v < one { (v, one.clone()) } else { (one.clone(), v) };
                report.record(grid.max_reported, || Violation {
                    kind: ViolationKind::Obstacle,
                    points: vec![pt(a.clone(), lambda)],
                    lhs,
                    rhs,
                });
            }
        }
    }
    Ok(report)
}

fn floor_c(grid: &CheckGrid) -> BigInt {
    grid.c.floor()
}

/// Exhaustive pair scan over one `lambda` row. `visit(i1, i2)` receives grid
/// indices with `i1 <= i2`.
fn for_pairs(n: usize, mut visit: impl FnMut(usize, usize)) {
    for i1 in 0..n {
        for i2 in i1..n {
            visit(i1, i2);
        }
    }
}

/// `2 * a >= b + c` on scaled numerators.
fn holds<T>(a: &T, b: &T, c: &T) -> bool
where
    T: Clone + Ord + for<'x> Add<&'x T, Output = T>,
{
    a.clone() + a >= b.clone() + c
}

/// `G((A1 + A2) / 2, lambda) >= (G(A1, lambda) + G(A2, lambda)) / 2` for all
/// grid pairs and grid `lambda`.
pub fn check_midpoint_concavity(f: &dyn BellmanFunction, grid: &CheckGrid) -> Result<CheckReport, DomainError> {
    let mut report = CheckReport::new(ViolationKind::Concavity, f.name());
    let fc = floor_c(grid);
    let a_values = grid.a_values();
    let n = a_values.len();
    for lambda in &grid.lambda_values {
        let row = Row::build(f, grid, lambda)?;
        let scaled = scale_rows(&[&row]);
        let mut failing = Vec::new();
        for_pairs(n, |i1, i2| {
            let ok = match &scaled {
                Scaled::Small(s) => holds(&s[0][i1 + i2], &s[0][2 * i1], &s[0][2 * i2]),
                Scaled::Big(s) => holds(&s[0][i1 + i2], &s[0][2 * i1], &s[0][2 * i2]),
            };
            if !ok {
                failing.push((i1, i2));
            }
        });
        report.instances_checked += (n * (n + 1) / 2) as u64;
        count_concavity_cases(&mut report, &a_values, lambda, &fc);
        for (i1, i2) in failing {
            report.record(grid.max_reported, || concavity_violation(&row, &a_values, i1, i2, ViolationKind::Concavity));
        }
    }
    Ok(report)
}

fn concavity_violation(row: &Row, a_values: &[GeneralRational], i1: usize, i2: usize, kind: ViolationKind) -> Violation {
    let mid = half(&(&a_values[i1] + &a_values[i2]));
    Violation {
        kind,
        points: vec![
            pt(a_values[i1].clone(), &row.lambda),
            pt(a_values[i2].clone(), &row.lambda),
            pt(mid, &row.lambda),
        ],
        lhs: row.values[i1 + i2].clone(),
        rhs: half(&(&row.values[2 * i1] + &row.values[2 * i2])),
    }
}

/// `G(A + 1, lambda + 1) >= G(A, lambda)` for grid `A <= C - 1` and grid
/// `lambda`.
pub fn check_jump(f: &dyn BellmanFunction, grid: &CheckGrid) -> Result<CheckReport, DomainError> {
    let mut report = CheckReport::new(ViolationKind::Jump, f.name());
    let fc = floor_c(grid);
    let one = GeneralRational::one();
    let limit = &grid.c - &one;
    let a_values: Vec<GeneralRational> = grid.a_values().into_iter().filter(|a| *a <= limit).collect();
    for lambda in &grid.lambda_values {
        let lifted = lambda + &one;
        for a in &a_values {
            report.instances_checked += 1;
            report.hit(jump_case(a, lambda, &fc));
            let a_up = a + &one;
            let lhs = f.eval(&a_up, &lifted)?;
            let rhs = f.eval(a, lambda)?;
            if lhs < rhs {
                report.record(grid.max_reported, || Violation {
                    kind: ViolationKind::Jump,
                    points: vec![pt(a.clone(), lambda), pt(a_up, &lifted)],
                    lhs,
                    rhs,
                });
            }
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MainInequalityReport {
    pub report: CheckReport,
    /// Failures among the `g = 0` instances (midpoint concavity).
    pub concavity_failures: u64,
    /// Failures among the `A1 = A2`, `g = 1` instances (jump inequality).
    pub jump_failures: u64,
    /// The main inequality fails somewhere iff concavity or jump fails
    /// somewhere.
    pub equivalence_holds: bool,
}

/// The two-point, `g`-shifted inequality over all grid pairs and both `g`.
pub fn check_main_inequality(f: &dyn BellmanFunction, grid: &CheckGrid) -> Result<MainInequalityReport, DomainError> {
    let mut report = CheckReport::new(ViolationKind::Main, f.name());
    let a_values = grid.a_values();
    let n = a_values.len();
    let one = GeneralRational::one();
    // offset of +1 on the refined grid
    let shift = 1usize << (grid.a_denominator_exp + 1);
    let last_fine = grid.last_index(grid.a_denominator_exp + 1);
    let mut concavity_failures = 0u64;
    let mut jump_failures = 0u64;

    for lambda in &grid.lambda_values {
        let row = Row::build(f, grid, lambda)?;
        let lifted = lambda + &one;
        let row_up = Row::build(f, grid, &lifted)?;
        let scaled = scale_rows(&[&row, &row_up]);
        let mut failing = Vec::new();
        for_pairs(n, |i1, i2| {
            let mid = i1 + i2;
            let ok0 = match &scaled {
                Scaled::Small(s) => holds(&s[0][mid], &s[0][2 * i1], &s[0][2 * i2]),
                Scaled::Big(s) => holds(&s[0][mid], &s[0][2 * i1], &s[0][2 * i2]),
            };
            if !ok0 {
                failing.push((i1, i2, 0u8));
            }
            if mid + shift <= last_fine {
                let ok1 = match &scaled {
                    Scaled::Small(s) => holds(&s[1][mid + shift], &s[0][2 * i1], &s[0][2 * i2]),
                    Scaled::Big(s) => holds(&s[1][mid + shift], &s[0][2 * i1], &s[0][2 * i2]),
                };
                if !ok1 {
                    failing.push((i1, i2, 1u8));
                }
            }
        });
        report.instances_checked += (n * (n + 1) / 2) as u64;
        report.instances_checked += (0..n)
            .map(|i1| (i1..n).filter(|i2| i1 + i2 + shift <= last_fine).count() as u64)
            .sum::<u64>();
        for (i1, i2, gamma) in failing {
            if gamma == 0 {
                concavity_failures += 1;
                report.record(grid.max_reported, || concavity_violation(&row, &a_values, i1, i2, ViolationKind::Main));
            } else {
                if i1 == i2 {
                    jump_failures += 1;
                }
                let mid = half(&(&a_values[i1] + &a_values[i2]));
                report.record(grid.max_reported, || Violation {
                    kind: ViolationKind::Main,
                    points: vec![
                        pt(a_values[i1].clone(), lambda),
                        pt(a_values[i2].clone(), lambda),
                        pt(&mid + &one, &lifted),
                    ],
                    lhs: row_up.values[i1 + i2 + shift].clone(),
                    rhs: half(&(&row.values[2 * i1] + &row.values[2 * i2])),
                });
            }
        }
    }
    let main_fails = report.violation_count > 0;
    let parts_fail = concavity_failures > 0 || jump_failures > 0;
    Ok(MainInequalityReport {
        report,
        concavity_failures,
        jump_failures,
        equivalence_holds: main_fails == parts_fail,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SupersolutionReport {
    pub grid: CheckGrid,
    pub obstacle: CheckReport,
    pub concavity: CheckReport,
    pub jump: CheckReport,
    pub main: MainInequalityReport,
    /// Main inequality clean iff both concavity and jump are clean, using
    /// the separate concavity and jump checks.
    pub reduction_consistent: bool,
}

impl SupersolutionReport {
    pub fn is_clean(&self) -> bool {
        self.obstacle.is_clean() && self.concavity.is_clean() && self.jump.is_clean() && self.main.report.is_clean()
    }

    pub fn all_violations(&self) -> impl Iterator<Item = &Violation> {
        self.obstacle
            .violations
            .iter()
            .chain(&self.concavity.violations)
            .chain(&self.jump.violations)
            .chain(&self.main.report.violations)
    }
}

/// Runs all four checks.
pub fn check_supersolution(f: &dyn BellmanFunction, grid: &CheckGrid) -> Result<SupersolutionReport, DomainError> {
    let obstacle = check_obstacle(f, grid)?;
    let concavity = check_midpoint_concavity(f, grid)?;
    let jump = check_jump(f, grid)?;
    let main = check_main_inequality(f, grid)?;
    let reduction_consistent = main.report.is_clean() == (concavity.is_clean() && jump.is_clean());
    Ok(SupersolutionReport {
        grid: grid.clone(),
        obstacle,
        concavity,
        jump,
        main,
        reduction_consistent,
    })
}

/// `f = 1` for `lambda <= 0` and `0` otherwise: below every supersolution,
/// yet not one itself since `f(1, 1) = 0 < 1 = f(0, 0)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Counterexample;

impl BellmanFunction for Counterexample {
    fn name(&self) -> String {
        "counterexample".into()
    }
    fn eval(&self, _a: &GeneralRational, lambda: &GeneralRational) -> Result<GeneralRational, DomainError> {
        Ok(if *lambda <= GeneralRational::zero() {
            GeneralRational::one()
        } else {
            GeneralRational::zero()
        })
    }
}

/// Wraps a closure as a [`BellmanFunction`].
pub struct PointFn<F> {
    pub name: String,
    pub f: F,
}

impl<F> BellmanFunction for PointFn<F>
where
    F: Fn(&GeneralRational, &GeneralRational) -> GeneralRational,
{
    fn name(&self) -> String {
        self.name.clone()
    }
    fn eval(&self, a: &GeneralRational, lambda: &GeneralRational) -> Result<GeneralRational, DomainError> {
        Ok((self.f)(a, lambda))
    }
}

/// One node where the main inequality was run backwards and failed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeFailure {
    pub address: NodeAddress,
    pub point: BellmanPoint,
    pub lhs: GeneralRational,
    pub rhs: GeneralRational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceLevel {
    pub level: u32,
    /// `2^{-k} sum_{J in D_k} G(A_J, lambda_J)`.
    pub sum: GeneralRational,
    /// This level's sum dominates the next one.
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceReport {
    pub function: String,
    pub lambda: GeneralRational,
    pub levels: Vec<TraceLevel>,
    pub failures: Vec<NodeFailure>,
    /// `G(A(alpha; I), lambda)`.
    pub root_value: GeneralRational,
    /// Fraction of terminal intervals with `lambda_J <= 0`.
    pub stopped_fraction: DyadicRational,
    /// `V_lambda(alpha)` computed independently from the sparse generations.
    pub level_set: DyadicRational,
    pub holds: bool,
}

/// Runs the main inequality backwards down the tree of `seq`.
///
/// Each interval `J` carries `A_J = A(alpha; J)` and `lambda_J = lambda -`
/// (number of selected strict ancestors). The chain is followed one level
/// past the leaves, where every average is 0 and the obstacle condition
/// stops the induction, and ends with `G(A, lambda) >= V_lambda(alpha)`.
pub fn induction_trace(
    f: &dyn BellmanFunction,
    seq: &CarlesonSeq,
    lambda: &GeneralRational,
) -> Result<TraceReport, DomainError> {
    let n = seq.depth();
    // values[k][i] = G(A_J, lambda_J) for J = (k, i); ancestors[i] = selected strict ancestors
    let mut values: Vec<Vec<GeneralRational>> = Vec::with_capacity(n as usize + 2);
    let mut points: Vec<Vec<BellmanPoint>> = Vec::with_capacity(n as usize + 2);
    let mut ancestors: Vec<u32> = vec![0];
    for k in 0..=n + 1 {
        if k > 0 {
            ancestors = (0..1u64 << k)
                .map(|i| {
                    let parent = NodeAddress { level: k - 1, index: i / 2 };
                    ancestors[(i / 2) as usize] + u32::from(seq.is_selected(parent))
                })
                .collect();
        }
        let mut row = Vec::with_capacity(ancestors.len());
        let mut prow = Vec::with_capacity(ancestors.len());
        for (i, &h) in ancestors.iter().enumerate() {
            let a = if k <= n {
                seq.carleson_average(NodeAddress { level: k, index: i as u64 }).to_general()
            } else {
                GeneralRational::zero()
            };
            let l = lambda - &GeneralRational::from_integer(h);
            row.push(f.eval(&a, &l)?);
            prow.push(BellmanPoint::new(a, l));
        }
        values.push(row);
        points.push(prow);
    }

    let mut failures = Vec::new();
    for k in 0..=n {
        for i in 0..values[k as usize].len() {
            let lhs = &values[k as usize][i];
            let next = &values[k as usize + 1];
            let rhs = half(&(&next[2 * i] + &next[2 * i + 1]));
            if *lhs < rhs {
                failures.push(NodeFailure {
                    address: NodeAddress { level: k, index: i as u64 },
                    point: points[k as usize][i].clone(),
                    lhs: lhs.clone(),
                    rhs,
                });
            }
        }
    }

    let sums: Vec<GeneralRational> = values
        .iter()
        .enumerate()
        .map(|(k, row)| {
            let total = row.iter().fold(GeneralRational::zero(), |acc, v| &acc + v);
            &total / &GeneralRational::from_integer(BigInt::one() << k)
        })
        .collect();
    let levels = sums
        .iter()
        .enumerate()
        .map(|(k, s)| TraceLevel {
            level: k as u32,
            sum: s.clone(),
            holds: sums.get(k + 1).is_none_or(|next| s >= next),
        })
        .collect();

    let terminal = &points[n as usize + 1];
    let stopped = terminal
        .iter()
        .filter(|p| p.lambda <= GeneralRational::zero())
        .count();
    let stopped_fraction = DyadicRational::new(stopped as u64, n + 1);
    let level_set = seq.level_set_measure(lambda);
    let root_value = values[0][0].clone();
    let holds = failures.is_empty()
        && stopped_fraction == level_set
        && root_value.cmp_dyadic(&level_set).is_ge();

    Ok(TraceReport {
        function: f.name(),
        lambda: lambda.clone(),
        levels,
        failures,
        root_value,
        stopped_fraction,
        level_set,
        holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::candidate::{Candidate, SpecialCase};

    fn g(s: &str) -> GeneralRational {
        s.parse().unwrap()
    }

    fn grid(c: &str, d: u32, lmin: i64, lmax: i64) -> CheckGrid {
        CheckGrid::with_integer_lambdas(g(c), d, lmin, lmax, &[g("1/2"), g("7/2")])
    }

    fn candidate(c: &str) -> Candidate {
        Candidate::new(g(c)).unwrap()
    }

    #[test]
    fn obstacle_examples() {
        let gr = grid("2", 3, -2, 4);
        assert!(check_obstacle(&candidate("2"), &gr).unwrap().is_clean());
        assert!(check_obstacle(&Counterexample, &gr).unwrap().is_clean());
        let zero = PointFn { name: "zero".into(), f: |_: &GeneralRational, _: &GeneralRational| GeneralRational::zero() };
        let r = check_obstacle(&zero, &gr).unwrap();
        // 17 grid A values times lambda in {-2, -1, 0}
        assert_eq!(r.violation_count, 17 * 3);
        assert_eq!(r.violations[0].lhs, g("0"));
        assert_eq!(r.violations[0].rhs, g("1"));
    }

    #[test]
    fn concavity_examples() {
        for c in ["1", "2", "16/5"] {
            assert!(check_midpoint_concavity(&candidate(c), &grid(c, 4, -2, 8)).unwrap().is_clean());
        }
        let square = PointFn { name: "square".into(), f: |a: &GeneralRational, _: &GeneralRational| a * a };
        let gr = CheckGrid::new(g("1"), 2, vec![g("1")]);
        let r = check_midpoint_concavity(&square, &gr).unwrap();
        // every pair with A1 != A2 is strictly convex: C(5, 2) = 10
        assert_eq!(r.violation_count, 10);
        let v = &r.violations[0];
        assert!(v.lhs < v.rhs);
        let affine = PointFn { name: "affine".into(), f: |a: &GeneralRational, _: &GeneralRational| &(a * &g("-1/3")) + &g("1") };
        assert!(check_midpoint_concavity(&affine, &grid("1", 3, -1, 3)).unwrap().is_clean());
    }

    #[test]
    fn jump_examples() {
        for c in ["1", "2", "16/5", "7"] {
            assert!(check_jump(&candidate(c), &grid(c, 4, -2, 13)).unwrap().is_clean());
        }
        let r = check_jump(&Counterexample, &grid("2", 3, -2, 4)).unwrap();
        assert!(!r.is_clean());
        let first = &r.violations[0];
        assert_eq!(first.points, vec![BellmanPoint::new(g("0"), g("0")), BellmanPoint::new(g("1"), g("1"))]);
        assert_eq!((first.lhs.clone(), first.rhs.clone()), (g("0"), g("1")));
        let one = PointFn { name: "one".into(), f: |_: &GeneralRational, _: &GeneralRational| GeneralRational::one() };
        assert!(check_jump(&one, &grid("2", 3, -2, 4)).unwrap().is_clean());
    }

    #[test]
    fn main_inequality_examples() {
        let m = check_main_inequality(&candidate("2"), &grid("2", 4, -2, 8)).unwrap();
        assert!(m.report.is_clean() && m.equivalence_holds);
        let m = check_main_inequality(&Counterexample, &grid("2", 3, -2, 4)).unwrap();
        assert!(!m.report.is_clean());
        assert_eq!(m.concavity_failures, 0);
        assert!(m.jump_failures > 0);
        assert!(m.equivalence_holds);
    }

    #[test]
    fn special_case_oracles_are_supersolutions() {
        for sc in [SpecialCase::C1, SpecialCase::C2, SpecialCase::C32] {
            let gr = CheckGrid::with_integer_lambdas(sc.c(), 4, -2, 10, &[g("1/2")]);
            let r = check_supersolution(&sc, &gr).unwrap();
            assert!(r.is_clean(), "{}", sc.name());
            assert!(r.reduction_consistent);
        }
    }

    #[test]
    fn coverage_rollup() {
        let r = check_jump(&candidate("16/5"), &grid("16/5", 3, -2, 9)).unwrap();
        let top = top_level_coverage(&r.coverage);
        for case in JUMP_CASES {
            assert!(top.get(case).copied().unwrap_or(0) > 0, "{case} not hit: {top:?}");
        }
        let r = check_midpoint_concavity(&candidate("2"), &grid("2", 3, -1, 4)).unwrap();
        let top = top_level_coverage(&r.coverage);
        for case in CONCAVITY_CASES {
            assert!(top[case] > 0);
        }
        assert!(r.coverage["midpoint-concavity/case-2b"] > 0);
    }

    #[test]
    fn counted_coverage_matches_pairwise() {
        for c in ["1", "3/2", "16/5"] {
            let gr = grid(c, 3, -1, 5);
            let fc = gr.c.floor();
            let a_values = gr.a_values();
            for lambda in &gr.lambda_values {
                let mut counted = CheckReport::new(ViolationKind::Concavity, String::new());
                count_concavity_cases(&mut counted, &a_values, lambda, &fc);
                let mut pairwise = CheckReport::new(ViolationKind::Concavity, String::new());
                for i1 in 0..a_values.len() {
                    for i2 in i1..a_values.len() {
                        pairwise.hit(concavity_case(&a_values[i1], &a_values[i2], lambda, &fc));
                    }
                }
                assert_eq!(counted.coverage, pairwise.coverage);
            }
        }
    }

    #[test]
    fn trace_examples() {
        let root = CarlesonSeq::new(0, [NodeAddress::ROOT]).unwrap();
        let t = induction_trace(&candidate("2"), &root, &g("1")).unwrap();
        assert!(t.holds);
        assert_eq!(t.root_value, g("1"));
        assert_eq!(t.level_set, DyadicRational::one());
        assert_eq!(t.levels.len(), 2);

        let t = induction_trace(&Counterexample, &root, &g("1")).unwrap();
        assert!(!t.holds);
        assert_eq!(t.failures[0].address, NodeAddress::ROOT);
        assert_eq!((t.failures[0].lhs.clone(), t.failures[0].rhs.clone()), (g("0"), g("1")));
        assert!(!t.levels[0].holds);
    }

    #[test]
    fn trace_on_deeper_sequence() {
        let a = |l, i| NodeAddress::new(l, i).unwrap();
        let seq = CarlesonSeq::new(3, [a(0, 0), a(1, 0), a(1, 1), a(2, 0), a(3, 7)]).unwrap();
        let c = seq.carleson_constant().0.to_general();
        for l in -1..=5 {
            let t = induction_trace(&candidate(&c.to_string()), &seq, &GeneralRational::from_integer(l)).unwrap();
            assert!(t.holds, "lambda = {l}: {t:?}");
            assert!(t.levels.windows(2).all(|w| w[0].sum >= w[1].sum));
        }
    }
}
