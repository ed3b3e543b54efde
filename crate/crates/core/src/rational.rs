//! Exact rational numbers used for every weight, threshold and payoff.
//!
//! Values are always kept in canonical form (positive denominator, reduced
//! fraction); no operation ever rounds. Text input accepts integers,
//! decimals (`"0.3"` is exactly `3/10`) and fractions (`"3/10"`); text
//! output is always `"num/den"`.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num::bigint::BigInt;
use num::{BigRational, One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid rational literal {literal:?}: {reason}")]
pub struct ParseRationalError {
    pub literal: String,
    pub reason: &'static str,
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Rational(BigRational);

impl Rational {
    /// Builds `numer/denom` in canonical form. Panics on a zero denominator.
    pub fn new(numer: i64, denom: i64) -> Self {
        assert!(denom != 0, "zero denominator");
        Rational(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
    }

    pub fn from_bigints(numer: BigInt, denom: BigInt) -> Self {
        assert!(!denom.is_zero(), "zero denominator");
        Rational(BigRational::new(numer, denom))
    }

    pub fn from_integer(value: i64) -> Self {
        Rational(BigRational::from_integer(BigInt::from(value)))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn recip(&self) -> Self {
        Rational(self.0.recip())
    }

    /// True when `0 < self <= 1`.
    pub fn in_unit_open_closed(&self) -> bool {
        self.is_positive() && self.0 <= BigRational::one()
    }

    /// True when `0 <= self <= 1`.
    pub fn in_unit_closed(&self) -> bool {
        !self.is_negative() && self.0 <= BigRational::one()
    }

    pub fn as_big(&self) -> &BigRational {
        &self.0
    }

    pub fn to_f64(&self) -> f64 {
        use num::ToPrimitive;
        self.0.to_f64().unwrap_or(f64::NAN)
    }
}

impl From<BigRational> for Rational {
    fn from(value: BigRational) -> Self {
        Rational(value)
    }
}

impl From<i64> for Rational {
    fn from(value: i64) -> Self {
        Rational::from_integer(value)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

fn parse_int(text: &str, literal: &str) -> Result<BigInt, ParseRationalError> {
    let digits = text.strip_prefix('+').unwrap_or(text);
    let unsigned = digits.strip_prefix('-').unwrap_or(digits);
    if unsigned.is_empty() || !unsigned.bytes().all(|b| b.is_ascii_digit()) {
        return Err(ParseRationalError {
            literal: literal.to_string(),
            reason: "expected decimal digits",
        });
    }
    digits.parse::<BigInt>().map_err(|_| ParseRationalError {
        literal: literal.to_string(),
        reason: "expected decimal digits",
    })
}

impl FromStr for Rational {
    type Err = ParseRationalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let text = s.trim();
        if let Some((num, den)) = text.split_once('/') {
            let numer = parse_int(num.trim(), s)?;
            let denom = parse_int(den.trim(), s)?;
            if denom.is_zero() {
                return Err(ParseRationalError {
                    literal: s.to_string(),
                    reason: "zero denominator",
                });
            }
            return Ok(Rational(BigRational::new(numer, denom)));
        }
        if let Some((int_part, frac_part)) = text.split_once('.') {
            let negative = int_part.trim_start().starts_with('-');
            let int_digits = int_part.trim_start_matches(['+', '-']);
            if (int_digits.is_empty() && frac_part.is_empty())
                || !frac_part.bytes().all(|b| b.is_ascii_digit())
            {
                return Err(ParseRationalError {
                    literal: s.to_string(),
                    reason: "malformed decimal",
                });
            }
            let whole = if int_digits.is_empty() {
                BigInt::zero()
            } else {
                parse_int(int_digits, s)?
            };
            let scale = num::pow(BigInt::from(10u32), frac_part.len());
            let frac = if frac_part.is_empty() {
                BigInt::zero()
            } else {
                parse_int(frac_part, s)?
            };
            let mut numer = whole * &scale + frac;
            if negative {
                numer = -numer;
            }
            return Ok(Rational(BigRational::new(numer, scale)));
        }
        Ok(Rational(BigRational::from_integer(parse_int(text, s)?)))
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational(self.0.$method(rhs.0))
            }
        }
        impl<'a> $trait<&'a Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                Rational(self.0.$method(&rhs.0))
            }
        }
        impl<'a> $trait<Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational((&self.0).$method(rhs.0))
            }
        }
        impl<'a, 'b> $trait<&'b Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: &'b Rational) -> Rational {
                Rational((&self.0).$method(&rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
forward_binop!(Div, div);

impl AddAssign<&Rational> for Rational {
    fn add_assign(&mut self, rhs: &Rational) {
        self.0 += &rhs.0;
    }
}

impl SubAssign<&Rational> for Rational {
    fn sub_assign(&mut self, rhs: &Rational) {
        self.0 -= &rhs.0;
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Rational> for Rational {
    fn sum<I: Iterator<Item = &'a Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl PartialEq<i64> for Rational {
    fn eq(&self, other: &i64) -> bool {
        self.0 == BigRational::from_integer(BigInt::from(*other))
    }
}

impl PartialOrd<i64> for Rational {
    fn partial_cmp(&self, other: &i64) -> Option<Ordering> {
        self.0.partial_cmp(&BigRational::from_integer(BigInt::from(*other)))
    }
}

/// Shorthand for `Rational::new`.
pub fn q(numer: i64, denom: i64) -> Rational {
    Rational::new(numer, denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn decimals_are_exact() {
        assert_eq!("0.3".parse::<Rational>().unwrap(), q(3, 10));
        assert_eq!("-1.25".parse::<Rational>().unwrap(), q(-5, 4));
        assert_eq!(".5".parse::<Rational>().unwrap(), q(1, 2));
        assert_eq!("2.".parse::<Rational>().unwrap(), q(2, 1));
        assert_eq!("0.1".parse::<Rational>().unwrap() * q(3, 1), q(3, 10));
    }

    #[test]
    fn fractions_and_integers() {
        assert_eq!("1/3".parse::<Rational>().unwrap(), q(1, 3));
        assert_eq!(" 6 / 4 ".parse::<Rational>().unwrap(), q(3, 2));
        assert_eq!("-2/-4".parse::<Rational>().unwrap(), q(1, 2));
        assert_eq!("7".parse::<Rational>().unwrap(), q(7, 1));
    }

    #[test]
    fn rejects_garbage() {
        for bad in ["", "abc", "1/0", "1.2.3", "0.3e1", "/", "1/", "."] {
            assert!(bad.parse::<Rational>().is_err(), "{bad:?} parsed");
        }
    }

    #[test]
    fn display_is_num_over_den() {
        assert_eq!(q(2, 10).to_string(), "1/5");
        assert_eq!(q(3, 1).to_string(), "3/1");
        assert_eq!(q(-1, 2).to_string(), "-1/2");
    }

    #[test]
    fn canonical_form() {
        let r = q(6, -8);
        assert_eq!(r.numer(), &BigInt::from(-3));
        assert_eq!(r.denom(), &BigInt::from(4));
    }

    proptest! {
        #[test]
        fn text_round_trip(n in -10_000i64..10_000, d in 1i64..10_000) {
            let r = q(n, d);
            prop_assert_eq!(r.to_string().parse::<Rational>().unwrap(), r.clone());
            let json = serde_json::to_string(&r).unwrap();
            prop_assert_eq!(serde_json::from_str::<Rational>(&json).unwrap(), r);
        }
    }
}
