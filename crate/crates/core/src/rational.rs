//! Exact numbers.
//!
//! Every average, measure and level-set value produced from a finite dyadic
//! sequence has a power-of-two denominator, so those live in
//! [`DyadicRational`]. The Carleson parameter and the Bellman-function values
//! need not be dyadic (`C = 16/5`, `(C-1)/C = 11/16`, `A/3`), so they live in
//! [`GeneralRational`]. The two only meet through exact comparison and the
//! lossless `DyadicRational -> GeneralRational` conversion.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RationalError {
    #[error("cannot parse `{0}` as a rational (expected p/q, p/2^e, an integer or a finite decimal)")]
    Parse(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
    #[error("{0} is not a dyadic rational")]
    NotDyadic(String),
}

/// A number of the form `p / 2^e`, kept in canonical form: either `p` is odd,
/// or `p == 0` and `e == 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DyadicRational {
    numerator: BigInt,
    log2_denominator: u32,
}

impl DyadicRational {
    pub fn new(numerator: impl Into<BigInt>, log2_denominator: u32) -> Self {
        let mut numerator = numerator.into();
        let mut exp = log2_denominator;
        if numerator.is_zero() {
            exp = 0;
        } else if exp > 0 {
            let tz = numerator.trailing_zeros().unwrap_or(0);
            let shift = tz.min(u64::from(exp)) as u32;
            if shift > 0 {
                numerator >>= shift as usize;
                exp -= shift;
            }
        }
        DyadicRational {
            numerator,
            log2_denominator: exp,
        }
    }

    pub fn zero() -> Self {
        Self::new(0, 0)
    }

    pub fn one() -> Self {
        Self::new(1, 0)
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        Self::new(n, 0)
    }

    /// `2^{-k}`.
    pub fn pow2_inv(k: u32) -> Self {
        Self::new(1, k)
    }

    pub fn numerator(&self) -> &BigInt {
        &self.numerator
    }

    pub fn log2_denominator(&self) -> u32 {
        self.log2_denominator
    }

    pub fn is_zero(&self) -> bool {
        self.numerator.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.numerator.is_negative()
    }

    pub fn halve(&self) -> Self {
        Self::new(self.numerator.clone(), self.log2_denominator + 1)
    }

    pub fn double(&self) -> Self {
        if self.log2_denominator > 0 {
            Self::new(self.numerator.clone(), self.log2_denominator - 1)
        } else {
            Self::new(&self.numerator << 1usize, 0)
        }
    }

    /// Multiply by `2^k`.
    pub fn shl(&self, k: u32) -> Self {
        if k <= self.log2_denominator {
            Self::new(self.numerator.clone(), self.log2_denominator - k)
        } else {
            let extra = (k - self.log2_denominator) as usize;
            Self::new(&self.numerator << extra, 0)
        }
    }

    /// Multiply by `2^{-k}`.
    pub fn shr(&self, k: u32) -> Self {
        Self::new(self.numerator.clone(), self.log2_denominator + k)
    }

    /// The integer `p'` with `self = p' / 2^exp`, if one exists.
    pub fn scaled_numerator(&self, exp: u32) -> Option<BigInt> {
        if exp < self.log2_denominator {
            return None;
        }
        Some(&self.numerator << (exp - self.log2_denominator) as usize)
    }

    pub fn floor(&self) -> BigInt {
        self.numerator.div_floor(&(BigInt::one() << self.log2_denominator as usize))
    }

    pub fn ceil(&self) -> BigInt {
        self.numerator.div_ceil(&(BigInt::one() << self.log2_denominator as usize))
    }

    /// `self - floor(self)`, in `[0, 1)`.
    pub fn fract(&self) -> Self {
        self - &Self::from_integer(self.floor())
    }

    pub fn to_general(&self) -> GeneralRational {
        GeneralRational::from(self.clone())
    }

    /// Exact three-way comparison against a general rational.
    pub fn cmp_general(&self, other: &GeneralRational) -> Ordering {
        // p / 2^e  vs  a / b  with b > 0  <=>  p * b  vs  a * 2^e
        let lhs = &self.numerator * other.0.denom();
        let rhs = other.0.numer() << self.log2_denominator as usize;
        lhs.cmp(&rhs)
    }

    pub fn to_f64_lossy(&self) -> f64 {
        self.to_general().to_f64_lossy()
    }
}

impl Default for DyadicRational {
    fn default() -> Self {
        Self::zero()
    }
}

impl From<i64> for DyadicRational {
    fn from(n: i64) -> Self {
        Self::from_integer(n)
    }
}

impl fmt::Display for DyadicRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2^{}", self.numerator, self.log2_denominator)
    }
}

impl Ord for DyadicRational {
    fn cmp(&self, other: &Self) -> Ordering {
        let e = self.log2_denominator.max(other.log2_denominator);
        let a = &self.numerator << (e - self.log2_denominator) as usize;
        let b = &other.numerator << (e - other.log2_denominator) as usize;
        a.cmp(&b)
    }
}

impl PartialOrd for DyadicRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn align(a: &DyadicRational, b: &DyadicRational) -> (BigInt, BigInt, u32) {
    let e = a.log2_denominator.max(b.log2_denominator);
    (
        &a.numerator << (e - a.log2_denominator) as usize,
        &b.numerator << (e - b.log2_denominator) as usize,
        e,
    )
}

impl Add for &DyadicRational {
    type Output = DyadicRational;
    fn add(self, rhs: &DyadicRational) -> DyadicRational {
        let (a, b, e) = align(self, rhs);
        DyadicRational::new(a + b, e)
    }
}

impl Sub for &DyadicRational {
    type Output = DyadicRational;
    fn sub(self, rhs: &DyadicRational) -> DyadicRational {
        let (a, b, e) = align(self, rhs);
        DyadicRational::new(a - b, e)
    }
}

impl Mul for &DyadicRational {
    type Output = DyadicRational;
    fn mul(self, rhs: &DyadicRational) -> DyadicRational {
        DyadicRational::new(
            &self.numerator * &rhs.numerator,
            self.log2_denominator + rhs.log2_denominator,
        )
    }
}

impl Neg for &DyadicRational {
    type Output = DyadicRational;
    fn neg(self) -> DyadicRational {
        DyadicRational::new(-&self.numerator, self.log2_denominator)
    }
}

macro_rules! forward_owned {
    ($ty:ty, $($tr:ident $m:ident),*) => {$(
        impl $tr for $ty {
            type Output = $ty;
            fn $m(self, rhs: $ty) -> $ty { (&self).$m(&rhs) }
        }
        impl $tr<&$ty> for $ty {
            type Output = $ty;
            fn $m(self, rhs: &$ty) -> $ty { (&self).$m(rhs) }
        }
    )*};
}

forward_owned!(DyadicRational, Add add, Sub sub, Mul mul);

impl std::iter::Sum for DyadicRational {
    fn sum<I: Iterator<Item = DyadicRational>>(iter: I) -> Self {
        iter.fold(DyadicRational::zero(), |acc, x| &acc + &x)
    }
}

impl<'a> std::iter::Sum<&'a DyadicRational> for DyadicRational {
    fn sum<I: Iterator<Item = &'a DyadicRational>>(iter: I) -> Self {
        iter.fold(DyadicRational::zero(), |acc, x| &acc + x)
    }
}

impl FromStr for DyadicRational {
    type Err = RationalError;

    /// Accepts `p/2^e`, `p/q` with `q` a power of two, integers and finite
    /// decimals whose value is dyadic (`0.8125`).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if let Some((p, e)) = t.split_once("/2^") {
            let p: BigInt = p.trim().parse().map_err(|_| RationalError::Parse(s.into()))?;
            let e: u32 = e.trim().parse().map_err(|_| RationalError::Parse(s.into()))?;
            return Ok(DyadicRational::new(p, e));
        }
        let g: GeneralRational = t.parse()?;
        g.to_dyadic()
            .ok_or_else(|| RationalError::NotDyadic(s.trim().to_string()))
    }
}

/// An arbitrary rational in lowest terms with positive denominator.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GeneralRational(BigRational);

impl GeneralRational {
    pub fn new(numer: impl Into<BigInt>, denom: impl Into<BigInt>) -> Result<Self, RationalError> {
        let numer = numer.into();
        let denom = denom.into();
        if denom.is_zero() {
            return Err(RationalError::ZeroDenominator(format!("{numer}/0")));
        }
        Ok(GeneralRational(BigRational::new(numer, denom)))
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        GeneralRational(BigRational::from_integer(n.into()))
    }

    pub fn zero() -> Self {
        Self::from_integer(0)
    }

    pub fn one() -> Self {
        Self::from_integer(1)
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn as_ratio(&self) -> &BigRational {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn floor(&self) -> BigInt {
        self.0.numer().div_floor(self.0.denom())
    }

    pub fn ceil(&self) -> BigInt {
        self.0.numer().div_ceil(self.0.denom())
    }

    pub fn fract(&self) -> Self {
        self - &Self::from_integer(self.floor())
    }

    pub fn pow(&self, exp: u32) -> Self {
        GeneralRational(num_traits::Pow::pow(&self.0, exp))
    }

    pub fn recip(&self) -> Option<Self> {
        (!self.is_zero()).then(|| GeneralRational(self.0.recip()))
    }

    pub fn min(self, other: Self) -> Self {
        std::cmp::min(self, other)
    }

    /// The dyadic value of `self`, if the reduced denominator is a power of two.
    pub fn to_dyadic(&self) -> Option<DyadicRational> {
        let d = self.0.denom();
        let tz = d.trailing_zeros().unwrap_or(0);
        if (d >> tz as usize) != BigInt::one() {
            return None;
        }
        Some(DyadicRational::new(self.0.numer().clone(), tz as u32))
    }

    /// `self * 2^k`, rounded down to an integer.
    pub fn floor_scaled(&self, k: u32) -> BigInt {
        (self.0.numer() << k as usize).div_floor(self.0.denom())
    }

    pub fn cmp_dyadic(&self, other: &DyadicRational) -> Ordering {
        other.cmp_general(self).reverse()
    }

    pub fn to_f64_lossy(&self) -> f64 {
        let n = self.0.numer().to_f64().unwrap_or(f64::NAN);
        let d = self.0.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    }
}

impl From<DyadicRational> for GeneralRational {
    fn from(d: DyadicRational) -> Self {
        GeneralRational(BigRational::new(
            d.numerator,
            BigInt::one() << d.log2_denominator as usize,
        ))
    }
}

impl From<i64> for GeneralRational {
    fn from(n: i64) -> Self {
        Self::from_integer(n)
    }
}

impl fmt::Display for GeneralRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

impl FromStr for GeneralRational {
    type Err = RationalError;

    /// Accepts `p/q`, `p/2^e`, integers and finite decimal literals
    /// (`3.2` parses to `16/5`).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let bad = || RationalError::Parse(s.to_string());
        if t.is_empty() {
            return Err(bad());
        }
        if t.contains("/2^") {
            return t.parse::<DyadicRational>().map(GeneralRational::from);
        }
        if let Some((p, q)) = t.split_once('/') {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(RationalError::ZeroDenominator(t.to_string()));
            }
            return Ok(GeneralRational(BigRational::new(p, q)));
        }
        if let Some((int_part, frac_part)) = t.split_once('.') {
            let (neg, int_digits) = match int_part.strip_prefix('-') {
                Some(rest) => (true, rest),
                None => (false, int_part.strip_prefix('+').unwrap_or(int_part)),
            };
            let digits_ok = |d: &str| d.chars().all(|c| c.is_ascii_digit());
            if !digits_ok(int_digits)
                || !digits_ok(frac_part)
                || (int_digits.is_empty() && frac_part.is_empty())
            {
                return Err(bad());
            }
            let all = format!("{int_digits}{frac_part}");
            let mut n: BigInt = if all.is_empty() { BigInt::zero() } else { all.parse().map_err(|_| bad())? };
            if neg {
                n = -n;
            }
            let d = num_traits::pow(BigInt::from(10), frac_part.len());
            return Ok(GeneralRational(BigRational::new(n, d)));
        }
        let n: BigInt = t.parse().map_err(|_| bad())?;
        Ok(GeneralRational::from_integer(n))
    }
}

impl Add for &GeneralRational {
    type Output = GeneralRational;
    fn add(self, rhs: &GeneralRational) -> GeneralRational {
        GeneralRational(&self.0 + &rhs.0)
    }
}

impl Sub for &GeneralRational {
    type Output = GeneralRational;
    fn sub(self, rhs: &GeneralRational) -> GeneralRational {
        GeneralRational(&self.0 - &rhs.0)
    }
}

impl Mul for &GeneralRational {
    type Output = GeneralRational;
    fn mul(self, rhs: &GeneralRational) -> GeneralRational {
        GeneralRational(&self.0 * &rhs.0)
    }
}

impl std::ops::Div for &GeneralRational {
    type Output = GeneralRational;
    /// Panics on division by zero, like the underlying ratio type.
    fn div(self, rhs: &GeneralRational) -> GeneralRational {
        GeneralRational(&self.0 / &rhs.0)
    }
}

impl Neg for &GeneralRational {
    type Output = GeneralRational;
    fn neg(self) -> GeneralRational {
        GeneralRational(-&self.0)
    }
}

forward_owned!(GeneralRational, Add add, Sub sub, Mul mul);

impl std::ops::Div for GeneralRational {
    type Output = GeneralRational;
    fn div(self, rhs: GeneralRational) -> GeneralRational {
        &self / &rhs
    }
}
