//! Fixed-point decimals with 96 fractional digits, for the quantities that
//! involve `N^(1/P)`.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub const FRACTION_DIGITS: u32 = 96;

fn scale() -> &'static BigInt {
    static SCALE: OnceLock<BigInt> = OnceLock::new();
    SCALE.get_or_init(|| BigInt::from(10u32).pow(FRACTION_DIGITS))
}

/// `mantissa / 10^FRACTION_DIGITS`. Products and quotients truncate.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Decimal {
    mantissa: BigInt,
}

impl Decimal {
    pub fn from_int(v: i64) -> Self {
        Self { mantissa: BigInt::from(v) * scale() }
    }

    pub fn from_rational(r: &BigRational) -> Self {
        Self { mantissa: r.numer() * scale() / r.denom() }
    }

    /// `floor(value^(1/p))` at full working precision.
    pub fn root_of_int(value: u64, p: u32) -> Self {
        let scaled = BigInt::from(value) * BigInt::from(10u32).pow(FRACTION_DIGITS * p);
        Self { mantissa: scaled.nth_root(p) }
    }

    pub fn abs(&self) -> Self {
        Self { mantissa: self.mantissa.abs() }
    }

    pub fn to_f64(&self) -> f64 {
        // exact enough: both parts are far inside f64 range
        let int = &self.mantissa / scale();
        let frac = &self.mantissa - &int * scale();
        int.to_f64().unwrap_or(f64::NAN)
            + frac.to_f64().unwrap_or(f64::NAN) / 10f64.powi(FRACTION_DIGITS as i32)
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    /// Fixed notation with `digits` fractional digits (truncated).
    pub fn to_string_with(&self, digits: u32) -> String {
        let digits = digits.min(FRACTION_DIGITS);
        let m = self.mantissa.abs();
        let int = &m / scale();
        let frac = (&m - &int * scale()) / BigInt::from(10u32).pow(FRACTION_DIGITS - digits);
        let sign = if self.mantissa.is_negative() { "-" } else { "" };
        if digits == 0 {
            format!("{sign}{int}")
        } else {
            format!("{sign}{int}.{:0>width$}", frac.to_string(), width = digits as usize)
        }
    }
}

impl fmt::Debug for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_string_with(FRACTION_DIGITS))
    }
}

impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_string_with(f.precision().unwrap_or(30) as u32))
    }
}

impl Add for Decimal {
    type Output = Decimal;
    fn add(self, rhs: Decimal) -> Decimal {
        Decimal { mantissa: self.mantissa + rhs.mantissa }
    }
}

impl Sub for Decimal {
    type Output = Decimal;
    fn sub(self, rhs: Decimal) -> Decimal {
        Decimal { mantissa: self.mantissa - rhs.mantissa }
    }
}

impl Mul for Decimal {
    type Output = Decimal;
    fn mul(self, rhs: Decimal) -> Decimal {
        Decimal { mantissa: self.mantissa * rhs.mantissa / scale() }
    }
}

impl Div for Decimal {
    type Output = Decimal;
    fn div(self, rhs: Decimal) -> Decimal {
        assert!(!rhs.is_zero(), "decimal division by zero");
        Decimal { mantissa: self.mantissa * scale() / rhs.mantissa }
    }
}

impl Neg for Decimal {
    type Output = Decimal;
    fn neg(self) -> Decimal {
        Decimal { mantissa: -self.mantissa }
    }
}

/// Arithmetic shared by exact rationals and fixed-point decimals, so the
/// accounting sums are written once.
pub trait Scalar:
    Clone + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self>
{
    fn from_u128(v: u128) -> Self;

    fn unit() -> Self {
        Self::from_u128(1)
    }

    fn ipow(&self, exp: i64) -> Self {
        let mut acc = Self::unit();
        for _ in 0..exp.unsigned_abs() {
            acc = acc * self.clone();
        }
        if exp < 0 {
            Self::unit() / acc
        } else {
            acc
        }
    }
}

impl Scalar for BigRational {
    fn from_u128(v: u128) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn unit() -> Self {
        <BigRational as One>::one()
    }
}

impl Scalar for Decimal {
    fn from_u128(v: u128) -> Self {
        Decimal { mantissa: BigInt::from(v) * scale() }
    }
}

/// A load value: exact where the arithmetic allows it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Real {
    Exact(BigRational),
    Approx(Decimal),
}

impl Real {
    pub fn to_decimal(&self) -> Decimal {
        match self {
            Real::Exact(r) => Decimal::from_rational(r),
            Real::Approx(d) => d.clone(),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Real::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            Real::Approx(d) => d.to_f64(),
        }
    }

    pub fn as_exact(&self) -> Option<&BigRational> {
        match self {
            Real::Exact(r) => Some(r),
            Real::Approx(_) => None,
        }
    }

    /// `|self - other|` at working precision.
    pub fn distance(&self, other: &Real) -> f64 {
        match (self, other) {
            (Real::Exact(a), Real::Exact(b)) => (a - b).abs().to_f64().unwrap_or(f64::NAN),
            _ => (self.to_decimal() - other.to_decimal()).abs().to_f64(),
        }
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Real::Exact(r) => write!(f, "{r}"),
            Real::Approx(d) => write!(f, "~{d:.30}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_two_digits() {
        let s = Decimal::root_of_int(2, 2);
        assert_eq!(
            s.to_string_with(60),
            "1.414213562373095048801688724209698078569671875376948073176679"
        );
        let back = s.clone() * s;
        assert!((back - Decimal::from_int(2)).abs().to_f64() < 1e-90);
    }

    #[test]
    fn cube_root_three_cubed() {
        let c = Decimal::root_of_int(3, 3);
        let cubed = c.ipow(3);
        assert!((cubed - Decimal::from_int(3)).abs().to_f64() < 1e-90);
        assert_eq!(Decimal::root_of_int(8, 3), Decimal::from_int(2));
    }

    #[test]
    fn rational_round_trip_and_display() {
        let third = BigRational::new(1.into(), 3.into());
        let d = Decimal::from_rational(&third);
        assert_eq!(d.to_string_with(5), "0.33333");
        assert!((d.to_f64() - 1.0 / 3.0).abs() < 1e-16);
        assert_eq!((-Decimal::from_int(3) / Decimal::from_int(2)).to_string_with(2), "-1.50");
        assert_eq!(Decimal::from_int(2).ipow(-2).to_string_with(3), "0.250");
    }

    #[test]
    fn real_distance() {
        let a = Real::Exact(BigRational::new(5.into(), 4.into()));
        let b = Real::Approx(Decimal::from_rational(&BigRational::new(5.into(), 4.into())));
        assert_eq!(a.distance(&b), 0.0);
        assert_eq!(a.to_string(), "5/4");
    }
}
