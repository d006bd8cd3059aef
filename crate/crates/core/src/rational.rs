//! Exact rational scalars.
//!
//! Everything symbolic in this crate computes over arbitrary precision
//! rationals, so identities such as `d(d w) = 0` are checked by equality.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Shorthand for `num / den` with small integers.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

pub fn to_f64(value: &Rational) -> f64 {
    value.to_f64().unwrap_or_else(|| {
        // Fall back to a ratio of rounded halves when either side overflows.
        let n = value.numer().to_f64().unwrap_or(f64::NAN);
        let d = value.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Exact conversion of a finite float (every finite double is a dyadic rational).
pub fn from_f64_exact(value: f64) -> Result<Rational> {
    Rational::from_float(value)
        .ok_or_else(|| Error::InvalidArgument(format!("non-finite value {value}")))
}

/// Rounds `value` to the nearest multiple of `2^-bits`.
pub fn from_f64_dyadic(value: f64, bits: u32) -> Result<Rational> {
    if !value.is_finite() {
        return Err(Error::InvalidArgument(format!("non-finite value {value}")));
    }
    let scaled = (value * 2f64.powi(bits as i32)).round();
    let numer = Rational::from_float(scaled)
        .ok_or_else(|| Error::InvalidArgument(format!("non-finite value {value}")))?;
    Ok(numer / Rational::from_integer(BigInt::one() << bits as usize))
}

pub fn abs(value: &Rational) -> Rational {
    value.abs()
}

pub fn max(a: &Rational, b: &Rational) -> Rational {
    if a >= b {
        a.clone()
    } else {
        b.clone()
    }
}

/// `(-1)^k` as a rational.
pub fn sign_pow(k: usize) -> Rational {
    if k.is_multiple_of(2) {
        Rational::one()
    } else {
        -Rational::one()
    }
}

pub fn is_zero(value: &Rational) -> bool {
    value.is_zero()
}

/// Parses `"3/4"`, `"-2"` or `"0.25"` style literals.
pub fn parse(text: &str) -> Result<Rational> {
    let text = text.trim();
    if let Some((n, d)) = text.split_once('/') {
        let n: BigInt = n
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad numerator in {text:?}")))?;
        let d: BigInt = d
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad denominator in {text:?}")))?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {text:?}")));
        }
        return Ok(Rational::new(n, d));
    }
    if let Ok(n) = text.parse::<BigInt>() {
        return Ok(Rational::from_integer(n));
    }
    if let Some((whole, frac)) = text.split_once('.') {
        let negative = whole.starts_with('-');
        let digits = format!("{}{}", whole.trim_start_matches('-'), frac);
        let n: BigInt = digits
            .parse()
            .map_err(|_| Error::Parse(format!("bad decimal {text:?}")))?;
        let d = num_traits::pow(BigInt::from(10), frac.len());
        let r = Rational::new(n, d);
        return Ok(if negative { -r } else { r });
    }
    Err(Error::Parse(format!("cannot parse rational {text:?}")))
}

pub fn format(value: &Rational) -> String {
    if value.is_integer() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

/// Wire representation: integers as decimal strings so no precision is lost.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalJson {
    pub num: String,
    pub den: String,
}

impl From<&Rational> for RationalJson {
    fn from(value: &Rational) -> Self {
        RationalJson {
            num: value.numer().to_string(),
            den: value.denom().to_string(),
        }
    }
}

impl TryFrom<&RationalJson> for Rational {
    type Error = Error;

    fn try_from(value: &RationalJson) -> Result<Rational> {
        let n: BigInt = value
            .num
            .parse()
            .map_err(|_| Error::Parse(format!("bad numerator {:?}", value.num)))?;
        let d: BigInt = value
            .den
            .parse()
            .map_err(|_| Error::Parse(format!("bad denominator {:?}", value.den)))?;
        if !d.is_positive() {
            return Err(Error::Parse(format!(
                "denominator must be positive, got {}",
                value.den
            )));
        }
        Ok(Rational::new(n, d))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_common_literals() {
        assert_eq!(parse("3/6").unwrap(), rat(1, 2));
        assert_eq!(parse("-7").unwrap(), int(-7));
        assert_eq!(parse("-0.25").unwrap(), rat(-1, 4));
        assert!(parse("1/0").is_err());
        assert!(parse("abc").is_err());
    }

    #[test]
    fn dyadic_rounding() {
        assert_eq!(from_f64_dyadic(0.3, 2).unwrap(), rat(1, 4));
        assert_eq!(from_f64_dyadic(-0.75, 8).unwrap(), rat(-3, 4));
        assert_eq!(from_f64_exact(0.046875).unwrap(), rat(3, 64));
    }

    #[test]
    fn json_rejects_nonpositive_denominator() {
        let bad = RationalJson {
            num: "1".into(),
            den: "-2".into(),
        };
        assert!(Rational::try_from(&bad).is_err());
        let good = RationalJson::from(&rat(-6, 4));
        assert_eq!(good.num, "-3");
        assert_eq!(good.den, "2");
    }
}
