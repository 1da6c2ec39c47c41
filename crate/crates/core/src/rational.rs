//! Exact rational helpers shared by the arithmetic and symbolic layers.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

/// Largest exponent magnitude accepted when folding powers of constants.
pub const MAX_EXPONENT: i64 = 4096;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn frac(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn is_integer(r: &Rational) -> bool {
    r.is_integer()
}

/// Returns the value as an `i64` when it is an integer small enough to use as an exponent.
pub fn as_small_int(r: &Rational) -> Option<i64> {
    if !r.is_integer() {
        return None;
    }
    r.to_integer().to_i64()
}

/// Formats as `p` or `p/q`.
pub fn fmt_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `p`, `-p`, `p/q` or a decimal literal such as `1.25` exactly.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n = parse_decimal(n.trim())?;
        let d = parse_decimal(d.trim())?;
        if d.is_zero() {
            return None;
        }
        return Some(n / d);
    }
    parse_decimal(s)
}

fn parse_decimal(s: &str) -> Option<Rational> {
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    if body.is_empty() {
        return None;
    }
    let (whole, fractional) = match body.split_once('.') {
        Some((w, f)) => (w, f),
        None => (body, ""),
    };
    if whole.is_empty() && fractional.is_empty() {
        return None;
    }
    if !whole.chars().chain(fractional.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{whole}{fractional}");
    let numer: BigInt = digits.parse().ok()?;
    let denom = num::pow(BigInt::from(10), fractional.len());
    let r = Rational::new(numer, denom);
    Some(if neg { -r } else { r })
}

/// Exact `base^exp` when the result is rational, `None` otherwise.
///
/// Integer exponents always succeed for nonzero bases (and for zero with a positive exponent).
/// Fractional exponents `p/q` succeed when `base` is a perfect `q`-th power.
pub fn checked_pow(base: &Rational, exp: &Rational) -> Option<Rational> {
    if exp.is_zero() {
        return Some(Rational::one());
    }
    if base.is_zero() {
        return if exp.is_positive() { Some(Rational::zero()) } else { None };
    }
    if exp.numer().abs() > BigInt::from(MAX_EXPONENT) {
        return None;
    }
    let p = exp.numer().to_i64()?;
    let q = exp.denom().to_u32()?;
    let root = if q == 1 { base.clone() } else { exact_root(base, q)? };
    let mut out = num::pow(root, p.unsigned_abs() as usize);
    if p < 0 {
        out = out.recip();
    }
    Some(out)
}

fn exact_root(base: &Rational, q: u32) -> Option<Rational> {
    if base.is_negative() && q.is_multiple_of(2) {
        return None;
    }
    let n = int_root(base.numer(), q)?;
    let d = int_root(base.denom(), q)?;
    Some(Rational::new(n, d))
}

fn int_root(n: &BigInt, q: u32) -> Option<BigInt> {
    let r = n.nth_root(q);
    if num::pow(r.clone(), q as usize) == *n {
        Some(r)
    } else {
        None
    }
}

pub fn binomial(n: u64, k: u64) -> BigInt {
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// Generalized binomial coefficient `C(s, k)` for rational `s`.
pub fn gen_binomial(s: &Rational, k: u64) -> Rational {
    let mut acc = Rational::one();
    for i in 0..k {
        acc = acc * (s - int(i as i64)) / int(i as i64 + 1);
    }
    acc
}

pub fn factorial(k: u64) -> BigInt {
    (1..=k).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}
