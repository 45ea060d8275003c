//! Exact rationals and the big-float backend used for eigen data and logarithms.

use crate::error::{OslError, Result};
use dashu_float::FBig;
use dashu_int::IBig;
use num::traits::Euclid;
use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};
use std::str::FromStr;

pub type Q = BigRational;
pub type Z = BigInt;
pub type Float = FBig;

pub const DEFAULT_PRECISION: usize = 256;
pub const PRECISION_ENV: &str = "OSL_PRECISION_BITS";

/// Precision in bits, honouring the environment override; never below 64.
pub fn default_precision() -> usize {
    std::env::var(PRECISION_ENV)
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .map(|b| b.max(64))
        .unwrap_or(DEFAULT_PRECISION)
}

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn zi(n: i64) -> Z {
    BigInt::from(n)
}

/// Accepts `p/q`, integers and finite decimals such as `0.62` or `-1.5e-3`.
pub fn parse_rational(s: &str) -> Result<Q> {
    let t = s.trim();
    let bad = || OslError::Parse(format!("not a rational: {s:?}"));
    if t.is_empty() {
        return Err(bad());
    }
    if let Some((n, d)) = t.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
        let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Q::new(n, d));
    }
    let (mant, exp) = match t.find(['e', 'E']) {
        Some(p) => (&t[..p], t[p + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (t, 0),
    };
    let (neg, digits) = match mant.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all = format!("{int_part}{frac_part}");
    let n = BigInt::from_str(if all.is_empty() { "0" } else { &all }).map_err(|_| bad())?;
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut v = Q::from_integer(n);
    if scale >= 0 {
        v *= Q::from_integer(num::pow(ten, scale as usize));
    } else {
        v /= Q::from_integer(num::pow(ten, (-scale) as usize));
    }
    Ok(if neg { -v } else { v })
}

pub fn format_rational(x: &Q) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn parse_int(s: &str) -> Result<Z> {
    BigInt::from_str(s.trim()).map_err(|_| OslError::Parse(format!("not an integer: {s:?}")))
}

pub fn to_ibig(z: &Z) -> IBig {
    IBig::from_str_radix(&z.to_str_radix(16), 16).expect("hex digits round-trip")
}

pub fn int_to_float(z: &Z, bits: usize) -> Float {
    Float::from(to_ibig(z)).with_precision(bits).value()
}

pub fn rational_to_float(x: &Q, bits: usize) -> Float {
    int_to_float(x.numer(), bits) / int_to_float(x.denom(), bits)
}

pub fn float_to_f64(x: &Float) -> f64 {
    x.to_f64().value()
}

pub fn float_zero(bits: usize) -> Float {
    Float::ZERO.with_precision(bits).value()
}

/// Decimal rendering with roughly `digits` significant digits.
pub fn format_float(x: &Float, digits: usize) -> String {
    let d = x.to_decimal().value();
    d.with_precision(digits.max(1)).value().to_string()
}

pub fn rational_to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        let n = x.numer().to_f64().unwrap_or(f64::NAN);
        let d = x.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Natural logarithm of a positive rational on the big-float backend.
pub fn ln_rational(x: &Q, bits: usize) -> Result<Float> {
    if !x.is_positive() {
        return Err(OslError::NonPositive);
    }
    Ok(rational_to_float(x, bits).ln())
}

/// Closest rational with denominator `den` (round half up).
pub fn round_to_denominator(x: &Q, den: &Z) -> Q {
    let scaled = x * Q::from_integer(den.clone());
    let two = BigInt::from(2);
    let n = (scaled.numer() * &two + scaled.denom()).div_euclid(&(scaled.denom() * &two));
    Q::new(n, den.clone())
}

pub fn sum(v: &[Q]) -> Q {
    v.iter().fold(Q::zero(), |a, b| a + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_rational("3/6").unwrap(), q(1, 2));
        assert_eq!(parse_rational("0.62").unwrap(), q(31, 50));
        assert_eq!(parse_rational("-1.5e-1").unwrap(), q(-3, 20));
        assert_eq!(parse_rational("7").unwrap(), qi(7));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn formats_round_trip() {
        for s in ["1/3", "-5/7", "12"] {
            assert_eq!(format_rational(&parse_rational(s).unwrap()), s);
        }
    }

    #[test]
    fn log_of_five_thirds() {
        let v = float_to_f64(&ln_rational(&q(5, 3), 256).unwrap());
        assert!((v - (5.0f64 / 3.0).ln()).abs() < 1e-15);
    }

    #[test]
    fn rounding_to_grid() {
        assert_eq!(round_to_denominator(&q(1, 3), &zi(10)), q(3, 10));
        assert_eq!(round_to_denominator(&q(2, 3), &zi(10)), q(7, 10));
    }
}
