//! Exact costs in ℚ ∪ {∞}.

use alloc::string::{String, ToString};
use core::cmp::Ordering;
use core::fmt;
use core::ops::Add;
use core::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Rational = BigRational;

/// A cost value: an exact rational or infinity.
///
/// Arithmetic: `a + ∞ = ∞`, `0 · ∞ = 0`, `r · ∞ = ∞` for `r > 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Cost {
    Finite(Rational),
    Infinite,
}

impl Cost {
    pub fn zero() -> Cost {
        Cost::Finite(Rational::zero())
    }

    pub fn one() -> Cost {
        Cost::Finite(Rational::one())
    }

    pub fn int(v: i64) -> Cost {
        Cost::Finite(rat(v))
    }

    pub fn frac(p: i64, q: i64) -> Cost {
        Cost::Finite(Rational::new(BigInt::from(p), BigInt::from(q)))
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Cost::Finite(_))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Cost::Infinite)
    }

    pub fn finite(&self) -> Option<&Rational> {
        match self {
            Cost::Finite(r) => Some(r),
            Cost::Infinite => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Cost::Finite(r) if r.is_zero())
    }

    /// Multiplication by a non-negative rational, with `0 · ∞ = 0`.
    pub fn scale(&self, r: &Rational) -> Cost {
        debug_assert!(!r.is_negative(), "scaling by a negative factor");
        match self {
            Cost::Finite(v) => Cost::Finite(v * r),
            Cost::Infinite if r.is_zero() => Cost::zero(),
            Cost::Infinite => Cost::Infinite,
        }
    }

    pub fn add_rational(&self, r: &Rational) -> Cost {
        match self {
            Cost::Finite(v) => Cost::Finite(v + r),
            Cost::Infinite => Cost::Infinite,
        }
    }

    pub fn min(self, other: Cost) -> Cost {
        if other < self {
            other
        } else {
            self
        }
    }
}

pub fn rat(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn frac(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

impl Ord for Cost {
    fn cmp(&self, other: &Cost) -> Ordering {
        match (self, other) {
            (Cost::Finite(a), Cost::Finite(b)) => a.cmp(b),
            (Cost::Finite(_), Cost::Infinite) => Ordering::Less,
            (Cost::Infinite, Cost::Finite(_)) => Ordering::Greater,
            (Cost::Infinite, Cost::Infinite) => Ordering::Equal,
        }
    }
}

impl PartialOrd for Cost {
    fn partial_cmp(&self, other: &Cost) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add<&Cost> for &Cost {
    type Output = Cost;
    fn add(self, rhs: &Cost) -> Cost {
        match (self, rhs) {
            (Cost::Finite(a), Cost::Finite(b)) => Cost::Finite(a + b),
            _ => Cost::Infinite,
        }
    }
}

impl Add for Cost {
    type Output = Cost;
    fn add(self, rhs: Cost) -> Cost {
        &self + &rhs
    }
}

impl core::iter::Sum for Cost {
    fn sum<I: Iterator<Item = Cost>>(iter: I) -> Cost {
        let mut acc = Rational::zero();
        for c in iter {
            match c {
                Cost::Finite(v) => acc += v,
                Cost::Infinite => return Cost::Infinite,
            }
        }
        Cost::Finite(acc)
    }
}

impl From<Rational> for Cost {
    fn from(r: Rational) -> Cost {
        Cost::Finite(r)
    }
}

impl fmt::Display for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cost::Finite(r) => write!(f, "{}", format_rational(r)),
            Cost::Infinite => f.write_str("inf"),
        }
    }
}

pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        alloc::format!("{}/{}", r.numer(), r.denom())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse `{0}` as a rational number")]
pub struct ParseRationalError(pub String);

/// Parses `p`, `p/q` or a decimal such as `-1.25`.
pub fn parse_rational(s: &str) -> Result<Rational, ParseRationalError> {
    let err = || ParseRationalError(s.to_string());
    let t = s.trim();
    if let Some((p, q)) = t.split_once('/') {
        let p = BigInt::from_str(p.trim()).map_err(|_| err())?;
        let q = BigInt::from_str(q.trim()).map_err(|_| err())?;
        if q.is_zero() {
            return Err(err());
        }
        return Ok(Rational::new(p, q));
    }
    if let Some((int, dec)) = t.split_once('.') {
        if dec.is_empty() || !dec.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err());
        }
        let negative = int.starts_with('-');
        let whole = if int.is_empty() || int == "-" || int == "+" {
            BigInt::zero()
        } else {
            BigInt::from_str(int).map_err(|_| err())?
        };
        let digits = BigInt::from_str(dec).map_err(|_| err())?;
        let scale = num_traits::pow(BigInt::from(10), dec.len());
        let frac_part = Rational::new(digits, scale);
        let whole = Rational::from_integer(whole.abs());
        let v = whole + frac_part;
        return Ok(if negative { -v } else { v });
    }
    BigInt::from_str(t).map(Rational::from_integer).map_err(|_| err())
}

impl FromStr for Cost {
    type Err = ParseRationalError;
    fn from_str(s: &str) -> Result<Cost, ParseRationalError> {
        match s.trim() {
            "inf" | "Inf" | "infinity" | "∞" => Ok(Cost::Infinite),
            t => parse_rational(t).map(Cost::Finite),
        }
    }
}

/// Least common multiple of the denominators of the finite costs.
pub fn common_denominator<'a, I: IntoIterator<Item = &'a Cost>>(costs: I) -> BigInt {
    use num_integer::Integer;
    let mut d = BigInt::one();
    for c in costs {
        if let Cost::Finite(r) = c {
            d = d.lcm(r.denom());
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn infinity_absorbs_addition() {
        assert_eq!(Cost::int(3) + Cost::Infinite, Cost::Infinite);
        assert_eq!(Cost::int(3) + Cost::frac(1, 2), Cost::frac(7, 2));
    }

    #[test]
    fn zero_times_infinity_is_zero() {
        assert_eq!(Cost::Infinite.scale(&rat(0)), Cost::zero());
        assert_eq!(Cost::Infinite.scale(&frac(1, 3)), Cost::Infinite);
    }

    #[test]
    fn ordering_puts_infinity_last() {
        assert!(Cost::int(1_000_000) < Cost::Infinite);
        assert!(Cost::int(-2) < Cost::frac(-3, 2));
    }

    #[test]
    fn parse_and_print() {
        assert_eq!("3/6".parse::<Cost>().unwrap(), Cost::frac(1, 2));
        assert_eq!("inf".parse::<Cost>().unwrap(), Cost::Infinite);
        assert_eq!("-1.25".parse::<Cost>().unwrap(), Cost::frac(-5, 4));
        assert_eq!(Cost::frac(-5, 4).to_string(), "-5/4");
        assert_eq!(Cost::int(7).to_string(), "7");
        assert!("1/0".parse::<Cost>().is_err());
        assert!("x".parse::<Cost>().is_err());
    }
}
