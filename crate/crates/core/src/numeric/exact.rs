use std::cmp::Ordering;
use std::fmt;
use std::hash::Hash;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::NumericError;

/// An exact real scalar: either a rational or a quadratic surd `a + b·√d`.
///
/// Values are always normalized: fractions in lowest terms, `d` square-free
/// and at least 2, and a surd whose `b` vanishes collapses to `Rational`.
/// Equality and hashing are therefore structural.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ExactNumber {
    Rational(BigRational),
    Surd(QuadraticSurd),
}

/// `a + b·√d` with `b ≠ 0` and `d` square-free, `d ≥ 2`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuadraticSurd {
    a: BigRational,
    b: BigRational,
    d: BigInt,
}

impl QuadraticSurd {
    pub fn rational_part(&self) -> &BigRational {
        &self.a
    }

    pub fn surd_coefficient(&self) -> &BigRational {
        &self.b
    }

    pub fn radicand(&self) -> &BigInt {
        &self.d
    }
}

/// Splits `n > 0` as `k²·m` with `m` square-free; returns `(k, m)`.
///
/// Trial division, so only intended for the small radicands that occur in
/// map files.
pub(crate) fn square_free_split(n: &BigInt) -> (BigInt, BigInt) {
    let mut m = n.clone();
    let mut k = BigInt::one();
    let mut p = BigInt::from(2u32);
    while &p * &p <= m {
        let sq = &p * &p;
        while (&m % &sq).is_zero() {
            m /= &sq;
            k *= &p;
        }
        p += 1u32;
    }
    (k, m)
}

impl ExactNumber {
    pub fn zero() -> Self {
        ExactNumber::Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        ExactNumber::Rational(BigRational::one())
    }

    pub fn from_integer(n: i64) -> Self {
        ExactNumber::Rational(BigRational::from_integer(BigInt::from(n)))
    }

    /// `num/den`; panics if `den == 0`.
    pub fn ratio(num: i64, den: i64) -> Self {
        ExactNumber::Rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn from_rational(r: BigRational) -> Self {
        ExactNumber::Rational(r)
    }

    /// `a + b·√d` for any positive `d`; square factors of `d` are pulled out
    /// and a perfect square collapses to a rational.
    pub fn surd(a: BigRational, b: BigRational, d: BigInt) -> Result<Self, NumericError> {
        if d.sign() != Sign::Plus {
            return Err(NumericError::BadRadicand(d.to_string()));
        }
        let (k, m) = square_free_split(&d);
        let b = b * BigRational::from_integer(k);
        Ok(Self::normalized(a, b, m))
    }

    fn normalized(a: BigRational, b: BigRational, d: BigInt) -> Self {
        if b.is_zero() || d.is_one() {
            let b = if d.is_one() { b } else { BigRational::zero() };
            ExactNumber::Rational(a + b)
        } else {
            ExactNumber::Surd(QuadraticSurd { a, b, d })
        }
    }

    /// The golden ratio `(1+√5)/2`.
    pub fn golden_ratio() -> Self {
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        Self::normalized(half.clone(), half, BigInt::from(5))
    }

    pub fn sqrt_of(n: i64) -> Result<Self, NumericError> {
        Self::surd(BigRational::zero(), BigRational::one(), BigInt::from(n))
    }

    /// Radicand of the field this value lives in, `None` for rationals.
    pub fn radicand(&self) -> Option<&BigInt> {
        match self {
            ExactNumber::Rational(_) => None,
            ExactNumber::Surd(s) => Some(&s.d),
        }
    }

    pub fn is_rational(&self) -> bool {
        matches!(self, ExactNumber::Rational(_))
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            ExactNumber::Rational(r) => Some(r),
            ExactNumber::Surd(_) => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, ExactNumber::Rational(r) if r.is_zero())
    }

    /// Splits into `(a, b, d)` with `d = 0` for rationals.
    fn parts(&self) -> (BigRational, BigRational, Option<&BigInt>) {
        match self {
            ExactNumber::Rational(r) => (r.clone(), BigRational::zero(), None),
            ExactNumber::Surd(s) => (s.a.clone(), s.b.clone(), Some(&s.d)),
        }
    }

    fn common_radicand<'a>(&'a self, other: &'a Self) -> Result<Option<&'a BigInt>, NumericError> {
        match (self.radicand(), other.radicand()) {
            (Some(d1), Some(d2)) if d1 != d2 => Err(NumericError::IncompatibleRadicands {
                left: d1.to_string(),
                right: d2.to_string(),
            }),
            (Some(d), _) | (_, Some(d)) => Ok(Some(d)),
            (None, None) => Ok(None),
        }
    }

    /// Whether `self` and `other` can be combined (at most one radicand).
    pub fn compatible(&self, other: &Self) -> bool {
        self.common_radicand(other).is_ok()
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, NumericError> {
        if let (ExactNumber::Rational(x), ExactNumber::Rational(y)) = (self, other) {
            return Ok(ExactNumber::Rational(x + y));
        }
        let d = self.common_radicand(other)?.cloned().unwrap_or_else(BigInt::one);
        let (a1, b1, _) = self.parts();
        let (a2, b2, _) = other.parts();
        Ok(Self::normalized(a1 + a2, b1 + b2, d))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self, NumericError> {
        self.checked_add(&-other)
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self, NumericError> {
        if let (ExactNumber::Rational(x), ExactNumber::Rational(y)) = (self, other) {
            return Ok(ExactNumber::Rational(x * y));
        }
        let d = self.common_radicand(other)?.cloned().unwrap_or_else(BigInt::one);
        let (a1, b1, _) = self.parts();
        let (a2, b2, _) = other.parts();
        let dq = BigRational::from_integer(d.clone());
        let a = &a1 * &a2 + &b1 * &b2 * dq;
        let b = a1 * b2 + b1 * a2;
        Ok(Self::normalized(a, b, d))
    }

    pub fn recip(&self) -> Result<Self, NumericError> {
        match self {
            ExactNumber::Rational(r) => {
                if r.is_zero() {
                    Err(NumericError::DivisionByZero)
                } else {
                    Ok(ExactNumber::Rational(r.recip()))
                }
            }
            ExactNumber::Surd(s) => {
                // (a + b√d)⁻¹ = (a − b√d) / (a² − b²d); the norm is nonzero
                // because d is not a perfect square.
                let norm = &s.a * &s.a - &s.b * &s.b * BigRational::from_integer(s.d.clone());
                Ok(Self::normalized(&s.a / &norm, -(&s.b / &norm), s.d.clone()))
            }
        }
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self, NumericError> {
        self.common_radicand(other)?;
        self.checked_mul(&other.recip()?)
    }

    pub fn abs(&self) -> Self {
        if self.signum() < 0 {
            -self
        } else {
            self.clone()
        }
    }

    /// Exact sign: −1, 0 or 1.
    pub fn signum(&self) -> i32 {
        match self {
            ExactNumber::Rational(r) => sign_of(r),
            ExactNumber::Surd(s) => surd_sign(&s.a, &s.b, &s.d),
        }
    }

    /// Exact comparison; fails only for two surds over different radicands.
    pub fn compare(&self, other: &Self) -> Result<Ordering, NumericError> {
        let diff = self.checked_sub(other)?;
        Ok(diff.signum().cmp(&0))
    }

    /// Ordering for values already known to share a field.
    ///
    /// Panics on incompatible radicands; map constructors reject those.
    pub fn cmp_exact(&self, other: &Self) -> Ordering {
        self.compare(other).expect("operands share a radicand")
    }

    pub fn min_exact<'a>(&'a self, other: &'a Self) -> &'a Self {
        if self.cmp_exact(other) == Ordering::Greater {
            other
        } else {
            self
        }
    }

    pub fn max_exact<'a>(&'a self, other: &'a Self) -> &'a Self {
        if self.cmp_exact(other) == Ordering::Less {
            other
        } else {
            self
        }
    }

    /// Multiply by `2^k` (negative `k` divides).
    pub fn mul_pow2(&self, k: i64) -> Self {
        let factor = if k >= 0 {
            BigRational::from_integer(BigInt::one() << (k as u64))
        } else {
            BigRational::new(BigInt::one(), BigInt::one() << ((-k) as u64))
        };
        match self {
            ExactNumber::Rational(r) => ExactNumber::Rational(r * factor),
            ExactNumber::Surd(s) => Self::normalized(&s.a * &factor, &s.b * &factor, s.d.clone()),
        }
    }

    /// Largest bit length among the integers in the normalized representation.
    pub fn bit_size(&self) -> u64 {
        let r_bits = |r: &BigRational| r.numer().bits().max(r.denom().bits());
        match self {
            ExactNumber::Rational(r) => r_bits(r),
            ExactNumber::Surd(s) => r_bits(&s.a).max(r_bits(&s.b)),
        }
    }

    /// Nearest-ish `f64`; for display and statistics only.
    pub fn to_f64(&self) -> f64 {
        let r = |r: &BigRational| rational_to_f64(r);
        match self {
            ExactNumber::Rational(x) => r(x),
            ExactNumber::Surd(s) => r(&s.a) + r(&s.b) * s.d.to_f64().unwrap_or(f64::NAN).sqrt(),
        }
    }

    /// Canonical text: `p/q` for rationals, `(a+b*sqrt(d))/c` for surds with
    /// `c > 0` the least common denominator. A negative `b` is written as
    /// `(a-|b|*sqrt(d))/c`.
    pub fn to_canonical(&self) -> String {
        match self {
            ExactNumber::Rational(r) => format!("{}/{}", r.numer(), r.denom()),
            ExactNumber::Surd(s) => {
                let c = s.a.denom().lcm(s.b.denom());
                let a = s.a.numer() * (&c / s.a.denom());
                let b = s.b.numer() * (&c / s.b.denom());
                let (op, b_abs) = if b.is_negative() { ('-', -b) } else { ('+', b) };
                format!("({a}{op}{b_abs}*sqrt({}))/{c}", s.d)
            }
        }
    }
}

pub(crate) fn sign_of(r: &BigRational) -> i32 {
    if r.is_zero() {
        0
    } else if r.is_negative() {
        -1
    } else {
        1
    }
}

/// Sign of `a + b√d` by case analysis on the signs of `a` and `b`, then
/// comparing `a²` with `b²d`.
fn surd_sign(a: &BigRational, b: &BigRational, d: &BigInt) -> i32 {
    let sa = sign_of(a);
    let sb = sign_of(b);
    if sb == 0 {
        return sa;
    }
    if sa == 0 || sa == sb {
        return sb;
    }
    let a2 = a * a;
    let b2d = b * b * BigRational::from_integer(d.clone());
    match a2.cmp(&b2d) {
        Ordering::Greater => sa,
        Ordering::Less => sb,
        // a² = b²d is impossible for square-free d ≥ 2 and b ≠ 0
        Ordering::Equal => 0,
    }
}

pub(crate) fn rational_to_f64(r: &BigRational) -> f64 {
    // Scale so both parts fit comfortably in f64 before dividing.
    let n = r.numer();
    let d = r.denom();
    let shift = (n.bits().max(d.bits()) as i64 - 900).max(0) as u64;
    let nf = (n >> shift).to_f64().unwrap_or(0.0);
    let df = (d >> shift).to_f64().unwrap_or(f64::INFINITY);
    if df == 0.0 {
        return 0.0;
    }
    nf / df
}

impl PartialOrd for ExactNumber {
    /// `None` when the operands live in different quadratic fields.
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.compare(other).ok()
    }
}

impl fmt::Display for ExactNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_canonical())
    }
}

impl From<BigRational> for ExactNumber {
    fn from(r: BigRational) -> Self {
        ExactNumber::Rational(r)
    }
}

impl From<i64> for ExactNumber {
    fn from(n: i64) -> Self {
        ExactNumber::from_integer(n)
    }
}

impl Neg for &ExactNumber {
    type Output = ExactNumber;
    fn neg(self) -> ExactNumber {
        match self {
            ExactNumber::Rational(r) => ExactNumber::Rational(-r),
            ExactNumber::Surd(s) => ExactNumber::Surd(QuadraticSurd {
                a: -&s.a,
                b: -&s.b,
                d: s.d.clone(),
            }),
        }
    }
}

impl Neg for ExactNumber {
    type Output = ExactNumber;
    fn neg(self) -> ExactNumber {
        -&self
    }
}

// Operator forms panic on incompatible radicands; use the `checked_*`
// methods on untrusted input.
macro_rules! forward_binop {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl $trait<&ExactNumber> for &ExactNumber {
            type Output = ExactNumber;
            fn $method(self, rhs: &ExactNumber) -> ExactNumber {
                self.$checked(rhs).unwrap_or_else(|e| panic!("{e}"))
            }
        }
        impl $trait<ExactNumber> for ExactNumber {
            type Output = ExactNumber;
            fn $method(self, rhs: ExactNumber) -> ExactNumber {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&ExactNumber> for ExactNumber {
            type Output = ExactNumber;
            fn $method(self, rhs: &ExactNumber) -> ExactNumber {
                (&self).$method(rhs)
            }
        }
        impl $trait<ExactNumber> for &ExactNumber {
            type Output = ExactNumber;
            fn $method(self, rhs: ExactNumber) -> ExactNumber {
                self.$method(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, checked_add);
forward_binop!(Sub, sub, checked_sub);
forward_binop!(Mul, mul, checked_mul);
forward_binop!(Div, div, checked_div);

#[cfg(test)]
mod tests {
    use super::*;

    fn phi() -> ExactNumber {
        ExactNumber::golden_ratio()
    }

    #[test]
    fn rational_sum() {
        let s = ExactNumber::ratio(1, 2) + ExactNumber::ratio(1, 3);
        assert_eq!(s, ExactNumber::ratio(5, 6));
    }

    #[test]
    fn surd_parts_cancel() {
        let two = ExactNumber::from(2);
        let s = (&two - phi()) + phi();
        assert_eq!(s, two);
        assert!(s.is_rational());
    }

    #[test]
    fn golden_unit_identity() {
        // φ·(φ−1) = 1
        let p = phi() * (phi() - ExactNumber::one());
        assert_eq!(p, ExactNumber::one());
    }

    #[test]
    fn comparisons_near_golden_values() {
        let two = ExactNumber::from(2);
        let alpha = &two - phi();
        assert_eq!(alpha.compare(&ExactNumber::ratio(1, 2)).unwrap(), Ordering::Less);
        let third = ExactNumber::ratio(1, 3);
        assert_eq!(third.compare(&ExactNumber::ratio(1, 3)).unwrap(), Ordering::Equal);
        let beta = phi() - ExactNumber::one();
        assert_eq!(beta.compare(&alpha).unwrap(), Ordering::Greater);
    }

    #[test]
    fn division_by_zero_and_incompatible_fields() {
        let e = ExactNumber::one().checked_div(&ExactNumber::zero());
        assert_eq!(e, Err(NumericError::DivisionByZero));
        let r2 = ExactNumber::sqrt_of(2).unwrap();
        let r3 = ExactNumber::sqrt_of(3).unwrap();
        assert!(matches!(
            r2.checked_add(&r3),
            Err(NumericError::IncompatibleRadicands { .. })
        ));
        assert!(r2.compare(&r3).is_err());
        assert!(r2.partial_cmp(&r3).is_none());
    }

    #[test]
    fn surd_normalization() {
        // √12 = 2√3, √9 = 3
        let s = ExactNumber::sqrt_of(12).unwrap();
        assert_eq!(s.radicand(), Some(&BigInt::from(3)));
        assert_eq!(s.to_canonical(), "(0+2*sqrt(3))/1");
        assert_eq!(ExactNumber::sqrt_of(9).unwrap(), ExactNumber::from(3));
        assert!(ExactNumber::sqrt_of(-5).is_err());
    }

    #[test]
    fn surd_reciprocal() {
        let r = phi().recip().unwrap();
        assert_eq!(r, phi() - ExactNumber::one());
    }

    #[test]
    fn canonical_text() {
        assert_eq!(ExactNumber::from(3).to_canonical(), "3/1");
        assert_eq!(ExactNumber::ratio(-2, 4).to_canonical(), "-1/2");
        assert_eq!(phi().to_canonical(), "(1+1*sqrt(5))/2");
        let alpha = ExactNumber::from(2) - phi();
        assert_eq!(alpha.to_canonical(), "(3-1*sqrt(5))/2");
    }

    #[test]
    fn sign_cases() {
        let r5 = ExactNumber::sqrt_of(5).unwrap();
        assert_eq!((ExactNumber::from(2) - &r5).signum(), -1);
        assert_eq!((ExactNumber::from(3) - &r5).signum(), 1);
        assert_eq!((&r5 - ExactNumber::from(3)).signum(), -1);
        assert_eq!((-&r5).signum(), -1);
    }
}
