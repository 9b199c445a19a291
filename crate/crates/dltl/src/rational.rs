//! Exact rational scalars.
//!
//! Discount factors, reward-deficit bookkeeping and machine rewards are all
//! kept as arbitrary-precision rationals so that state payloads compare
//! exactly. Floating point is reserved for value vectors, where the
//! contraction of the Bellman operator makes rounding benign.

use alloc::string::String;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exact rational number, always stored in lowest terms with a positive
/// denominator.
pub type Rational = num_rational::BigRational;

/// Shorthand for a rational from machine integers.
pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

/// `base^exp` for a nonnegative integer exponent.
pub fn pow(base: &Rational, exp: usize) -> Rational {
    let mut acc = Rational::one();
    let mut sq = base.clone();
    let mut e = exp;
    while e > 0 {
        if e & 1 == 1 {
            acc *= &sq;
        }
        e >>= 1;
        if e > 0 {
            sq = &sq * &sq;
        }
    }
    acc
}

/// Nearest `f64` to the exact value.
pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Error produced when a rational literal cannot be parsed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseRationalError(pub String);

impl core::fmt::Display for ParseRationalError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "invalid rational literal: {}", self.0)
    }
}

impl core::error::Error for ParseRationalError {}

/// Parses `"2/3"`, `"7"`, `"0.25"` or `"1e-6"` into an exact rational.
///
/// Decimal and scientific notation are converted exactly, so `"0.1"` becomes
/// `1/10` and not the nearest double.
pub fn parse_rational(text: &str) -> Result<Rational, ParseRationalError> {
    let s = text.trim();
    let err = || ParseRationalError(String::from(text));
    if s.is_empty() {
        return Err(err());
    }
    if let Some((n, d)) = s.split_once('/') {
        let numer: BigInt = n.trim().parse().map_err(|_| err())?;
        let denom: BigInt = d.trim().parse().map_err(|_| err())?;
        if denom.is_zero() {
            return Err(err());
        }
        return Ok(Rational::new(numer, denom));
    }
    // decimal, optionally with an exponent part
    let (mantissa, exp10) = match s.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i32>().map_err(|_| err())?),
        None => (s, 0),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(err());
    }
    let digits: String = [int_part, frac_part].concat();
    let numer: BigInt = if digits == "-" || digits == "+" {
        return Err(err());
    } else {
        digits.parse().map_err(|_| err())?
    };
    if frac_part.chars().any(|c| !c.is_ascii_digit()) {
        return Err(err());
    }
    let scale = frac_part.len() as i32 - exp10;
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        Rational::new(numer, num_traits::pow(ten, scale as usize))
    } else {
        Rational::from(numer * num_traits::pow(ten, (-scale) as usize))
    };
    Ok(value)
}

/// True when `0 <= r < 1`.
pub fn is_valid_discount(r: &Rational) -> bool {
    !r.is_negative() && r < &Rational::one()
}
