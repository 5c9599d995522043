//! The closed-form Bellman candidate and its special-case forms.
//!
//! For `C >= 1` and `(A, lambda)` in `[0, C] x R`:
//!
//! ```text
//!             { 1                                          lambda <= 0
//! G_C(A, l) = { min(1, A / ceil(l))                        0 < lambda <= floor(C)
//!             { A / floor(C) * ((C-1)/C)^(ceil(l)-floor(C)) otherwise
//! ```
//!
//! The `C = 1`, `C = 2` and `C = 16/5` forms below are written out
//! independently, branch by branch, and serve as oracles for the general
//! formula.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use thiserror::Error;

use crate::rational::GeneralRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DomainError {
    #[error("the Carleson parameter must be at least 1, got {0}")]
    ParameterBelowOne(GeneralRational),
    #[error("A = {a} lies outside [0, {c}]")]
    OutsideDomain { a: GeneralRational, c: GeneralRational },
    #[error("lambda = {0} is too large to evaluate")]
    LambdaTooLarge(GeneralRational),
}

/// `C` together with `floor(C)`, `{C}` and the decay ratio `(C-1)/C`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CandidateParams {
    c: GeneralRational,
    floor_c: BigInt,
    frac_c: GeneralRational,
    decay: GeneralRational,
}

impl CandidateParams {
    pub fn new(c: GeneralRational) -> Result<Self, DomainError> {
        if c < GeneralRational::one() {
            return Err(DomainError::ParameterBelowOne(c));
        }
        let floor_c = c.floor();
        let frac_c = c.fract();
        let decay = &(&c - &GeneralRational::one()) / &c;
        Ok(CandidateParams {
            c,
            floor_c,
            frac_c,
            decay,
        })
    }

    pub fn c(&self) -> &GeneralRational {
        &self.c
    }

    pub fn floor_c(&self) -> &BigInt {
        &self.floor_c
    }

    pub fn frac_c(&self) -> &GeneralRational {
        &self.frac_c
    }

    pub fn decay(&self) -> &GeneralRational {
        &self.decay
    }

    pub fn contains(&self, a: &GeneralRational) -> bool {
        !a.numer().lt(&BigInt::from(0)) && a <= &self.c
    }

    fn check_domain(&self, a: &GeneralRational) -> Result<(), DomainError> {
        if self.contains(a) {
            Ok(())
        } else {
            Err(DomainError::OutsideDomain {
                a: a.clone(),
                c: self.c.clone(),
            })
        }
    }
}

/// A point `(A, lambda)` of `[0, C] x R`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct BellmanPoint {
    pub a: GeneralRational,
    pub lambda: GeneralRational,
}

impl BellmanPoint {
    pub fn new(a: GeneralRational, lambda: GeneralRational) -> Self {
        BellmanPoint { a, lambda }
    }
}

impl std::fmt::Display for BellmanPoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.a, self.lambda)
    }
}

/// Anything that can be evaluated pointwise on `[0, C] x R`. The
/// supersolution checks and the induction trace accept any implementor.
pub trait BellmanFunction {
    fn name(&self) -> String;
    fn eval(&self, a: &GeneralRational, lambda: &GeneralRational) -> Result<GeneralRational, DomainError>;
}

fn int(n: impl Into<BigInt>) -> GeneralRational {
    GeneralRational::from_integer(n)
}

fn exponent(n: BigInt, lambda: &GeneralRational) -> Result<u32, DomainError> {
    n.to_u32().ok_or_else(|| DomainError::LambdaTooLarge(lambda.clone()))
}

pub fn candidate_eval(p: &CandidateParams, pt: &BellmanPoint) -> Result<GeneralRational, DomainError> {
    p.check_domain(&pt.a)?;
    if pt.lambda <= GeneralRational::zero() {
        return Ok(GeneralRational::one());
    }
    let m = pt.lambda.ceil();
    if pt.lambda <= int(p.floor_c.clone()) {
        return Ok(GeneralRational::one().min(&pt.a / &int(m)));
    }
    let k = exponent(m - &p.floor_c, &pt.lambda)?;
    Ok(&(&pt.a / &int(p.floor_c.clone())) * &p.decay.pow(k))
}

/// `C = 1`: `1`, `A`, `0` on `lambda <= 0`, `(0, 1]`, `(1, inf)`.
pub fn candidate_c1(pt: &BellmanPoint) -> Result<GeneralRational, DomainError> {
    let one = GeneralRational::one();
    if pt.a < GeneralRational::zero() || pt.a > one {
        return Err(DomainError::OutsideDomain { a: pt.a.clone(), c: one });
    }
    Ok(if pt.lambda <= GeneralRational::zero() {
        one
    } else if pt.lambda <= one {
        pt.a.clone()
    } else {
        GeneralRational::zero()
    })
}

/// `C = 2`: `1`, `min(1, A)`, `A / 2^(ceil(lambda) - 1)`.
pub fn candidate_c2(pt: &BellmanPoint) -> Result<GeneralRational, DomainError> {
    let two = int(2);
    if pt.a < GeneralRational::zero() || pt.a > two {
        return Err(DomainError::OutsideDomain { a: pt.a.clone(), c: two });
    }
    if pt.lambda <= GeneralRational::zero() {
        return Ok(GeneralRational::one());
    }
    if pt.lambda <= GeneralRational::one() {
        return Ok(GeneralRational::one().min(pt.a.clone()));
    }
    let k = exponent(pt.lambda.ceil() - 1, &pt.lambda)?;
    Ok(&pt.a / &two.pow(k))
}

/// `C = 16/5`, transcribed level by level:
/// `min(1, A)`, `min(1, A/2)`, `min(1, A/3)` on the first three unit bands,
/// then `(A / 3.2)(2.2 / 3)(2.2 / 3.2)^(n-1)` on `(3 + n - 1, 3 + n]`.
pub fn candidate_c32(pt: &BellmanPoint) -> Result<GeneralRational, DomainError> {
    let c = GeneralRational::new(16, 5).expect("nonzero");
    if pt.a < GeneralRational::zero() || pt.a > c {
        return Err(DomainError::OutsideDomain { a: pt.a.clone(), c });
    }
    let one = GeneralRational::one();
    let l = &pt.lambda;
    if *l <= GeneralRational::zero() {
        return Ok(one);
    }
    if *l <= one {
        return Ok(one.min(pt.a.clone()));
    }
    if *l <= int(2) {
        return Ok(one.min(&pt.a / &int(2)));
    }
    if *l <= int(3) {
        return Ok(one.min(&pt.a / &int(3)));
    }
    let two_point_two = GeneralRational::new(11, 5).expect("nonzero");
    let n = exponent(l.ceil() - 3, l)?;
    let head = &(&pt.a / &c) * &(&two_point_two / &int(3));
    Ok(&head * &(&two_point_two / &c).pow(n - 1))
}

/// The closed-form candidate for a fixed `C`.
#[derive(Clone, Debug)]
pub struct Candidate(pub CandidateParams);

impl Candidate {
    pub fn new(c: GeneralRational) -> Result<Self, DomainError> {
        CandidateParams::new(c).map(Candidate)
    }
}

impl BellmanFunction for Candidate {
    fn name(&self) -> String {
        format!("candidate(C={})", self.0.c())
    }
    fn eval(&self, a: &GeneralRational, lambda: &GeneralRational) -> Result<GeneralRational, DomainError> {
        candidate_eval(&self.0, &BellmanPoint::new(a.clone(), lambda.clone()))
    }
}

/// Which special-case oracle to expose through [`BellmanFunction`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpecialCase {
    C1,
    C2,
    C32,
}

impl SpecialCase {
    pub fn c(self) -> GeneralRational {
        match self {
            SpecialCase::C1 => int(1),
            SpecialCase::C2 => int(2),
            SpecialCase::C32 => GeneralRational::new(16, 5).expect("nonzero"),
        }
    }
}

impl BellmanFunction for SpecialCase {
    fn name(&self) -> String {
        match self {
            SpecialCase::C1 => "c1".into(),
            SpecialCase::C2 => "c2".into(),
            SpecialCase::C32 => "c32".into(),
        }
    }
    fn eval(&self, a: &GeneralRational, lambda: &GeneralRational) -> Result<GeneralRational, DomainError> {
        let pt = BellmanPoint::new(a.clone(), lambda.clone());
        match self {
            SpecialCase::C1 => candidate_c1(&pt),
            SpecialCase::C2 => candidate_c2(&pt),
            SpecialCase::C32 => candidate_c32(&pt),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SurfaceRow {
    pub a: GeneralRational,
    pub lambda: GeneralRational,
    pub value: GeneralRational,
}

/// Exact values on the grid `A in {j / 2^grid_exp} cap [0, C]` times the
/// integer range `lambda_min..=lambda_max`, ordered by `A` then `lambda`.
pub fn candidate_surface(p: &CandidateParams, grid_exp: u32, lambda_range: (i64, i64)) -> Vec<SurfaceRow> {
    let (lo, hi) = lambda_range;
    let denom = BigInt::from(1u8) << grid_exp as usize;
    let last = p.c().floor_scaled(grid_exp);
    let mut rows = Vec::new();
    let mut j = BigInt::from(0);
    while j <= last {
        let a = GeneralRational::new(j.clone(), denom.clone()).expect("nonzero");
        for l in lo..=hi {
            let lambda = int(l);
            let value = candidate_eval(p, &BellmanPoint::new(a.clone(), lambda.clone()))
                .expect("grid lies in the domain");
            rows.push(SurfaceRow {
                a: a.clone(),
                lambda,
                value,
            });
        }
        j += 1;
    }
    rows
}
