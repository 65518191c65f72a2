//! Exact rationals.
//!
//! `BigRational` already keeps the denominator positive and the fraction
//! reduced, which is all the kernel needs.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rational = num_rational::BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn frac(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Binomial coefficient C(n, k) for nonnegative `k`, as a polynomial in `n`.
///
/// Works for negative `n` as well: C(n, k) = n(n-1)...(n-k+1)/k!.
pub fn binomial(n: i64, k: u32) -> Rational {
    let mut acc = Rational::one();
    for i in 0..k as i64 {
        acc = acc * int(n - i) / int(i + 1);
    }
    acc
}

/// Parses `p`, `-p` or `p/q`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num
        .parse()
        .map_err(|_| Error::Parse(format!("bad rational `{s}`")))?;
    let den: BigInt = den
        .parse()
        .map_err(|_| Error::Parse(format!("bad rational `{s}`")))?;
    if den.is_zero() {
        return Err(Error::Parse(format!("zero denominator in `{s}`")));
    }
    Ok(Rational::new(num, den))
}

/// Always `p/q`, even for integers; used by the machine-readable output.
pub fn to_pair_string(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub(crate) fn is_negative(r: &Rational) -> bool {
    r.is_negative()
}

pub(crate) fn abs(r: &Rational) -> Rational {
    r.abs()
}
