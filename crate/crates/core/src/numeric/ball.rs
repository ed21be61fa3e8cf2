use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::exact::{rational_to_f64, ExactNumber};

/// `mantissa · 2^exponent`, normalized so the mantissa is odd (or zero with
/// exponent 0).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Dyadic {
    mantissa: BigInt,
    exponent: i64,
}

impl Dyadic {
    pub fn new(mantissa: BigInt, exponent: i64) -> Self {
        if mantissa.is_zero() {
            return Self::zero();
        }
        let tz = mantissa.trailing_zeros().unwrap_or(0);
        Dyadic {
            mantissa: mantissa >> tz,
            exponent: exponent + tz as i64,
        }
    }

    pub fn zero() -> Self {
        Dyadic {
            mantissa: BigInt::zero(),
            exponent: 0,
        }
    }

    pub fn one() -> Self {
        Dyadic::new(BigInt::one(), 0)
    }

    /// `2^k`.
    pub fn pow2(k: i64) -> Self {
        Dyadic::new(BigInt::one(), k)
    }

    pub fn from_integer(n: i64) -> Self {
        Dyadic::new(BigInt::from(n), 0)
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mantissa
    }

    pub fn exponent(&self) -> i64 {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mantissa.is_negative()
    }

    pub fn abs(&self) -> Self {
        Dyadic {
            mantissa: self.mantissa.abs(),
            exponent: self.exponent,
        }
    }

    pub fn mul_pow2(&self, k: i64) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        Dyadic {
            mantissa: self.mantissa.clone(),
            exponent: self.exponent + k,
        }
    }

    /// Mantissas of both operands aligned to the smaller exponent.
    fn aligned(&self, other: &Self) -> (BigInt, BigInt, i64) {
        let e = self.exponent.min(other.exponent);
        let a = &self.mantissa << ((self.exponent - e) as u64);
        let b = &other.mantissa << ((other.exponent - e) as u64);
        (a, b, e)
    }

    pub fn to_rational(&self) -> BigRational {
        if self.exponent >= 0 {
            BigRational::from_integer(&self.mantissa << (self.exponent as u64))
        } else {
            BigRational::new(self.mantissa.clone(), BigInt::one() << ((-self.exponent) as u64))
        }
    }

    pub fn to_exact(&self) -> ExactNumber {
        ExactNumber::Rational(self.to_rational())
    }

    /// Decimal expansion rounded toward −∞ to `places` digits after the point.
    pub fn to_decimal(&self, places: usize) -> String {
        let r = self.to_rational();
        let scaled = (r * BigRational::from_integer(BigInt::from(10).pow(places as u32))).floor();
        let n = scaled.to_integer();
        let digits = n.magnitude().to_string();
        let sign = if n.sign() == num_bigint::Sign::Minus { "-" } else { "" };
        if places == 0 {
            return format!("{sign}{digits}");
        }
        let padded = format!("{digits:0>width$}", width = places + 1);
        let (int, frac) = padded.split_at(padded.len() - places);
        format!("{sign}{int}.{frac}")
    }

    /// Decimal expansion rounded toward +∞.
    pub fn to_decimal_ceil(&self, places: usize) -> String {
        let down = (-self).to_decimal(places);
        match down.strip_prefix('-') {
            Some(rest) => rest.to_string(),
            None if down.chars().all(|c| c == '0' || c == '.') => down,
            None => format!("-{down}"),
        }
    }

    pub fn to_f64(&self) -> f64 {
        rational_to_f64(&self.to_rational())
    }

    /// Rounds `r` to a multiple of `2^-bits`: toward −∞ or +∞.
    pub fn from_rational_floor(r: &BigRational, bits: u64) -> Self {
        let scaled = r.numer() << bits;
        Dyadic::new(scaled.div_floor(r.denom()), -(bits as i64))
    }

    pub fn from_rational_ceil(r: &BigRational, bits: u64) -> Self {
        let scaled = r.numer() << bits;
        Dyadic::new(scaled.div_ceil(r.denom()), -(bits as i64))
    }

    /// Nearest multiple of `2^-bits` (ties toward +∞).
    pub fn from_rational_nearest(r: &BigRational, bits: u64) -> Self {
        let scaled = (r.numer() << (bits + 1)) + r.denom();
        let q = scaled.div_floor(&(r.denom() << 1u32));
        Dyadic::new(q, -(bits as i64))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b, _) = self.aligned(other);
        a.cmp(&b)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for &Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: &Dyadic) -> Dyadic {
        let (a, b, e) = self.aligned(rhs);
        Dyadic::new(a + b, e)
    }
}

impl Sub for &Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: &Dyadic) -> Dyadic {
        let (a, b, e) = self.aligned(rhs);
        Dyadic::new(a - b, e)
    }
}

impl Mul for &Dyadic {
    type Output = Dyadic;
    fn mul(self, rhs: &Dyadic) -> Dyadic {
        Dyadic::new(&self.mantissa * &rhs.mantissa, self.exponent + rhs.exponent)
    }
}

impl Neg for &Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic {
            mantissa: -&self.mantissa,
            exponent: self.exponent,
        }
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = self.to_rational();
        write!(f, "{}/{}", r.numer(), r.denom())
    }
}

/// Closed ball `[center − radius, center + radius]` with dyadic endpoints.
///
/// All operations round outward: the result of an operation contains every
/// value obtainable from members of the operands.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Ball {
    center: Dyadic,
    radius: Dyadic,
}

impl Ball {
    pub fn new(center: Dyadic, radius: Dyadic) -> Self {
        assert!(!radius.is_negative(), "ball radius must be non-negative");
        Ball { center, radius }
    }

    pub fn exact(center: Dyadic) -> Self {
        Ball {
            center,
            radius: Dyadic::zero(),
        }
    }

    /// Smallest dyadic ball (at resolution `2^-bits`) enclosing `[lo, hi]`.
    pub fn from_rational_bounds(lo: &BigRational, hi: &BigRational, bits: u64) -> Self {
        debug_assert!(lo <= hi);
        let mid = (lo + hi) / BigRational::from_integer(BigInt::from(2));
        let center = Dyadic::from_rational_nearest(&mid, bits);
        let c = center.to_rational();
        let spread = (&c - lo).max(hi - &c);
        let radius = if spread.is_zero() {
            Dyadic::zero()
        } else {
            Dyadic::from_rational_ceil(&spread, bits)
        };
        Ball { center, radius }
    }

    /// Ball spanning two dyadic endpoints exactly.
    pub fn from_endpoints(lo: &Dyadic, hi: &Dyadic) -> Self {
        let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        let sum = lo + hi;
        let center = sum.mul_pow2(-1);
        let radius = (hi - lo).mul_pow2(-1);
        Ball { center, radius }
    }

    pub fn center(&self) -> &Dyadic {
        &self.center
    }

    pub fn radius(&self) -> &Dyadic {
        &self.radius
    }

    pub fn lo(&self) -> Dyadic {
        &self.center - &self.radius
    }

    pub fn hi(&self) -> Dyadic {
        &self.center + &self.radius
    }

    pub fn width(&self) -> Dyadic {
        self.radius.mul_pow2(1)
    }

    pub fn contains(&self, x: &ExactNumber) -> bool {
        let lo = self.lo().to_exact();
        let hi = self.hi().to_exact();
        x.cmp_exact(&lo) != Ordering::Less && x.cmp_exact(&hi) != Ordering::Greater
    }

    pub fn contains_dyadic(&self, x: &Dyadic) -> bool {
        self.lo() <= *x && *x <= self.hi()
    }

    pub fn contains_ball(&self, other: &Ball) -> bool {
        self.lo() <= other.lo() && other.hi() <= self.hi()
    }

    pub fn overlaps(&self, other: &Ball) -> bool {
        self.lo() <= other.hi() && other.lo() <= self.hi()
    }

    /// True when every member is strictly below every member of `other`.
    pub fn certainly_below(&self, other: &Ball) -> bool {
        self.hi() < other.lo()
    }

    pub fn mul_pow2(&self, k: i64) -> Self {
        Ball {
            center: self.center.mul_pow2(k),
            radius: self.radius.mul_pow2(k),
        }
    }

    pub fn add_dyadic(&self, x: &Dyadic) -> Self {
        Ball {
            center: &self.center + x,
            radius: self.radius.clone(),
        }
    }

    /// Widens the radius so the center fits in `bits` fractional bits.
    pub fn rounded(&self, bits: u64) -> Self {
        let c = self.center.to_rational();
        let center = Dyadic::from_rational_nearest(&c, bits);
        let shift = (&center - &self.center).abs();
        Ball {
            center,
            radius: &self.radius + &shift,
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.center.to_f64()
    }
}

impl Add for &Ball {
    type Output = Ball;
    fn add(self, rhs: &Ball) -> Ball {
        Ball {
            center: &self.center + &rhs.center,
            radius: &self.radius + &rhs.radius,
        }
    }
}

impl Sub for &Ball {
    type Output = Ball;
    fn sub(self, rhs: &Ball) -> Ball {
        Ball {
            center: &self.center - &rhs.center,
            radius: &self.radius + &rhs.radius,
        }
    }
}

impl Mul for &Ball {
    type Output = Ball;
    fn mul(self, rhs: &Ball) -> Ball {
        // |xy − cd| ≤ |c|s + |d|r + rs
        let radius = &(&(&self.center.abs() * &rhs.radius) + &(&rhs.center.abs() * &self.radius))
            + &(&self.radius * &rhs.radius);
        Ball {
            center: &self.center * &rhs.center,
            radius,
        }
    }
}

impl Neg for &Ball {
    type Output = Ball;
    fn neg(self) -> Ball {
        Ball {
            center: -&self.center,
            radius: self.radius.clone(),
        }
    }
}

impl fmt::Display for Ball {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e} ± {:e}", self.center.to_f64(), self.radius.to_f64())
    }
}

/// Encloses `x` in a ball of radius at most `2^-precision_bits`.
pub fn to_ball(x: &ExactNumber, precision_bits: u32) -> Ball {
    let bits = precision_bits as u64;
    match x {
        ExactNumber::Rational(r) => {
            let lo = Dyadic::from_rational_floor(r, bits + 1);
            if lo.to_rational() == *r {
                return Ball::exact(lo);
            }
            Ball::from_rational_bounds(r, r, bits + 1)
        }
        ExactNumber::Surd(s) => {
            // s·2^k ≤ √d·2^k < s·2^k + 1 with s = isqrt(d·4^k)
            let b = s.surd_coefficient();
            let b_mag = (b.numer().abs().bits() as i64 - b.denom().bits() as i64 + 1).max(0) as u64;
            let k = bits + 2 + b_mag;
            let root = (s.radicand() << (2 * k)).sqrt();
            let scale = BigRational::from_integer(BigInt::one() << k);
            let r_lo = BigRational::from_integer(root.clone()) / &scale;
            let r_hi = BigRational::from_integer(root + 1u32) / &scale;
            let a = s.rational_part();
            let (lo, hi) = if b.is_negative() {
                (a + b * &r_hi, a + b * &r_lo)
            } else {
                (a + b * &r_lo, a + b * &r_hi)
            };
            Ball::from_rational_bounds(&lo, &hi, bits + 3)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_expansion_rounds_down() {
        assert_eq!(Dyadic::pow2(-1).to_decimal(3), "0.500");
        assert_eq!(Dyadic::new(BigInt::from(3), -3).to_decimal(2), "0.37");
        assert_eq!(Dyadic::new(BigInt::from(-1), -4).to_decimal(1), "-0.1");
        assert_eq!(Dyadic::from_integer(12).to_decimal(0), "12");
        assert_eq!(Dyadic::pow2(-10).to_decimal(4), "0.0009");
        assert_eq!(Dyadic::pow2(-10).to_decimal_ceil(4), "0.0010");
        assert_eq!(Dyadic::new(BigInt::from(-3), -3).to_decimal_ceil(2), "-0.37");
        assert_eq!(Dyadic::zero().to_decimal_ceil(2), "0.00");
    }

    #[test]
    fn third_at_four_bits() {
        let b = to_ball(&ExactNumber::ratio(1, 3), 4);
        assert!(b.contains(&ExactNumber::ratio(1, 3)));
        assert!(b.radius() <= &Dyadic::pow2(-4));
    }

    #[test]
    fn zero_is_exact() {
        let b = to_ball(&ExactNumber::zero(), 10);
        assert!(b.center().is_zero());
        assert!(b.radius().is_zero());
    }

    #[test]
    fn dyadic_rational_is_exact() {
        let b = to_ball(&ExactNumber::ratio(3, 8), 2);
        assert_eq!(b.center().to_rational(), BigRational::new(3.into(), 8.into()));
        assert!(b.radius().is_zero());
    }

    #[test]
    fn golden_ratio_enclosure() {
        // Independent check: bisection on x² = x + 1 over exact rationals.
        let phi = ExactNumber::golden_ratio();
        let b = to_ball(&phi, 53);
        assert!(b.contains(&phi));
        assert!(b.radius() <= &Dyadic::pow2(-53));
        let mut lo = BigRational::from_integer(1.into());
        let mut hi = BigRational::from_integer(2.into());
        for _ in 0..80 {
            let mid = (&lo + &hi) / BigRational::from_integer(2.into());
            if &mid * &mid - &mid - BigRational::from_integer(1.into()) < BigRational::zero() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!(b.contains(&ExactNumber::Rational(lo)));
        assert!((b.to_f64() - 1.618_033_988_749_895).abs() < 1e-15);
    }

    #[test]
    fn dyadic_rounding_directions() {
        let r = BigRational::new(1.into(), 3.into());
        let f = Dyadic::from_rational_floor(&r, 4).to_rational();
        let c = Dyadic::from_rational_ceil(&r, 4).to_rational();
        assert!(f < r && r < c);
        assert_eq!(&c - &f, BigRational::new(1.into(), 16.into()));
        assert_eq!(
            Dyadic::from_rational_nearest(&r, 4).to_rational(),
            BigRational::new(5.into(), 16.into())
        );
    }

    #[test]
    fn ball_ops_enclose() {
        let a = Ball::new(Dyadic::from_integer(1), Dyadic::pow2(-3));
        let b = Ball::new(Dyadic::from_integer(-2), Dyadic::pow2(-4));
        let p = &a * &b;
        let s = &a - &b;
        for x in [a.lo(), a.center().clone(), a.hi()] {
            for y in [b.lo(), b.center().clone(), b.hi()] {
                assert!(p.contains_dyadic(&(&x * &y)));
                assert!(s.contains_dyadic(&(&x - &y)));
            }
        }
        assert_eq!(s.radius(), &(&Dyadic::pow2(-3) + &Dyadic::pow2(-4)));
    }
}
