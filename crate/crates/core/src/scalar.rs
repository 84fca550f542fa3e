//! Numeric types used as weights and as accumulators in multiplicity tables.
//!
//! Unit-weight counts run on `u128` (or [`BigUint`] when a bound check says
//! `u128` could overflow). Weighted counts run on exact rationals or on
//! `f64`; the lifting module additionally accepts complex weights.

use std::fmt::Debug;

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// An additive accumulator with a multiplication, as needed by the
/// multiplicity tables.
pub trait Tally: Clone + Send + Sync + Debug + 'static {
    fn zero() -> Self;
    fn from_u128(n: u128) -> Self;
    fn add_assign(&mut self, other: &Self);
    fn mul(&self, other: &Self) -> Self;
    fn is_zero(&self) -> bool;
    fn conj(&self) -> Self;
    /// `self · conj(self)`.
    fn abs_sq(&self) -> Self {
        self.mul(&self.conj())
    }
    fn to_c64(&self) -> Complex64;
}

impl Tally for u128 {
    fn zero() -> Self {
        0
    }
    fn from_u128(n: u128) -> Self {
        n
    }
    fn add_assign(&mut self, other: &Self) {
        *self = self.checked_add(*other).expect("u128 tally overflow after bound check");
    }
    fn mul(&self, other: &Self) -> Self {
        self.checked_mul(*other).expect("u128 tally overflow after bound check")
    }
    fn is_zero(&self) -> bool {
        *self == 0
    }
    fn conj(&self) -> Self {
        *self
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(*self as f64, 0.0)
    }
}

impl Tally for BigUint {
    fn zero() -> Self {
        Zero::zero()
    }
    fn from_u128(n: u128) -> Self {
        BigUint::from(n)
    }
    fn add_assign(&mut self, other: &Self) {
        *self += other;
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn conj(&self) -> Self {
        self.clone()
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(self.to_f64().unwrap_or(f64::INFINITY), 0.0)
    }
}

impl Tally for f64 {
    fn zero() -> Self {
        0.0
    }
    fn from_u128(n: u128) -> Self {
        n as f64
    }
    fn add_assign(&mut self, other: &Self) {
        *self += *other;
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn conj(&self) -> Self {
        *self
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(*self, 0.0)
    }
}

impl Tally for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn from_u128(n: u128) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }
    fn add_assign(&mut self, other: &Self) {
        *self += other;
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn conj(&self) -> Self {
        self.clone()
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(ratio_to_f64(self), 0.0)
    }
}

impl Tally for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn from_u128(n: u128) -> Self {
        Complex64::new(n as f64, 0.0)
    }
    fn add_assign(&mut self, other: &Self) {
        *self += *other;
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn conj(&self) -> Self {
        Complex64::conj(self)
    }
    fn to_c64(&self) -> Complex64 {
        *self
    }
}

/// Real, ordered weights: exact rationals or doubles.
pub trait Real: Tally + PartialOrd {
    /// Whether arithmetic is exact, so identities can be checked with `==`.
    const EXACT: bool;
    fn one() -> Self {
        Self::from_u128(1)
    }
    fn sub(&self, other: &Self) -> Self;
    fn div(&self, other: &Self) -> Self;
    fn powi(&self, exp: i32) -> Self;
    fn to_f64(&self) -> f64;
    fn from_biguint(n: &BigUint) -> Self;
    /// For exact weights: integers `n_x` and a common denominator `D` with
    /// `w_x = n_x / D`. `None` means the weights must be tallied as-is.
    fn integer_scaling(weights: &[Self]) -> Option<(Vec<BigUint>, Self)>;
    fn to_count_value(&self) -> CountValue;
}

impl Real for f64 {
    const EXACT: bool = false;

    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn div(&self, other: &Self) -> Self {
        self / other
    }
    fn powi(&self, exp: i32) -> Self {
        f64::powi(*self, exp)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn from_biguint(n: &BigUint) -> Self {
        n.to_f64().unwrap_or(f64::INFINITY)
    }
    fn integer_scaling(_: &[Self]) -> Option<(Vec<BigUint>, Self)> {
        None
    }
    fn to_count_value(&self) -> CountValue {
        CountValue::Float(*self)
    }
}

impl Real for BigRational {
    const EXACT: bool = true;

    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn div(&self, other: &Self) -> Self {
        self / other
    }
    fn powi(&self, exp: i32) -> Self {
        num_traits::Pow::pow(self, exp)
    }
    fn to_f64(&self) -> f64 {
        ratio_to_f64(self)
    }
    fn from_biguint(n: &BigUint) -> Self {
        BigRational::from_integer(BigInt::from(n.clone()))
    }
    fn integer_scaling(weights: &[Self]) -> Option<(Vec<BigUint>, Self)> {
        if weights.iter().any(|w| w.is_negative()) {
            return None;
        }
        let denom = weights.iter().fold(BigInt::one(), |acc, w| acc.lcm(w.denom()));
        let scaled = weights
            .iter()
            .map(|w| {
                let n = w.numer() * (&denom / w.denom());
                n.to_biguint().expect("non-negative weight")
            })
            .collect();
        Some((scaled, BigRational::from_integer(denom)))
    }
    fn to_count_value(&self) -> CountValue {
        if self.is_integer() && !self.is_negative() {
            CountValue::Exact(self.to_integer().to_biguint().expect("non-negative"))
        } else {
            CountValue::Rational(self.clone())
        }
    }
}

/// A solution count: exact for unit weights, exact rational or double
/// precision for weighted counts.
#[derive(Debug, Clone, PartialEq)]
pub enum CountValue {
    Exact(BigUint),
    Rational(BigRational),
    Float(f64),
}

impl CountValue {
    pub fn to_f64(&self) -> f64 {
        match self {
            CountValue::Exact(n) => n.to_f64().unwrap_or(f64::INFINITY),
            CountValue::Rational(r) => ratio_to_f64(r),
            CountValue::Float(x) => *x,
        }
    }

    pub fn as_exact(&self) -> Option<&BigUint> {
        match self {
            CountValue::Exact(n) => Some(n),
            _ => None,
        }
    }

    pub fn is_exact(&self) -> bool {
        !matches!(self, CountValue::Float(_))
    }
}

impl std::fmt::Display for CountValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CountValue::Exact(n) => write!(f, "{n}"),
            CountValue::Rational(r) => write!(f, "{r}"),
            CountValue::Float(x) => write!(f, "{x:.12e}"),
        }
    }
}

/// Converts an exact rational to the nearest `f64` without overflowing on
/// large numerators and denominators.
pub fn ratio_to_f64(r: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    let shift = r.numer().bits().max(r.denom().bits()) as i64 - 900;
    let shift = shift.max(0) as usize;
    let n = (r.numer() >> shift).to_f64().unwrap_or(0.0);
    let d = (r.denom() >> shift).to_f64().unwrap_or(0.0);
    if d == 0.0 {
        return if n == 0.0 { 0.0 } else { f64::INFINITY * n.signum() };
    }
    n / d
}

/// Natural logarithm of a positive rational, accurate for huge operands.
pub fn ratio_ln(r: &BigRational) -> f64 {
    fn big_ln(n: &BigInt) -> f64 {
        let bits = n.bits() as i64;
        let shift = (bits - 60).max(0) as usize;
        let top = (n >> shift).to_f64().unwrap_or(f64::NAN);
        top.ln() + shift as f64 * std::f64::consts::LN_2
    }
    big_ln(r.numer()) - big_ln(r.denom())
}

/// Parses `"3/7"`, `"1"`, or a decimal such as `"0.25"` into an exact rational.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let text = text.trim();
    if let Some((n, d)) = text.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    if let Some((int, frac)) = text.split_once('.') {
        let neg = int.starts_with('-');
        let digits = format!("{}{}", int.trim_start_matches('-'), frac);
        let n: BigInt = digits.parse().ok()?;
        let d = num_traits::pow(BigInt::from(10), frac.len());
        let r = BigRational::new(n, d);
        return Some(if neg { -r } else { r });
    }
    text.parse::<BigInt>().ok().map(BigRational::from_integer)
}
