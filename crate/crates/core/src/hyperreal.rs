//! Truncated Levi-Civita series: a computable model of hyperreal arithmetic.
//!
//! A value is a finite sum `Σ c_k ε^k` with integer exponents and exact rational
//! coefficients, together with a truncation window. Inside the window the value is
//! known exactly; everything above the truncation order is unknown. `ω = ε⁻¹` is the
//! benchmark infinite element.
//!
//! Values built from literals are *exact* (no unknown tail). Arithmetic propagates the
//! window pessimistically, so any coefficient that is reported is correct.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::rational::{self, fmt_rational, Rational};

/// Window used when an exact value must be expanded into an infinite series.
pub const DEFAULT_TRUNC: i64 = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HyperrealError {
    #[error("division by a value that is zero within its window")]
    DivisionByZero,
    #[error("order is indeterminate: values agree on the whole known window")]
    IndeterminateOrder,
    #[error("standard part is undetermined: truncation order {0} is below zero")]
    Undetermined(i64),
    #[error("result is not rational: {0}")]
    NonRational(String),
}

/// Order of the leading term; the zero value has infinite valuation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Valuation {
    Finite(i64),
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum StandardPart {
    Finite(Rational),
    PlusInfinity,
    MinusInfinity,
}

impl StandardPart {
    pub fn finite(&self) -> Option<&Rational> {
        match self {
            StandardPart::Finite(r) => Some(r),
            _ => None,
        }
    }
}

impl fmt::Display for StandardPart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StandardPart::Finite(r) => f.write_str(&fmt_rational(r)),
            StandardPart::PlusInfinity => f.write_str("+inf"),
            StandardPart::MinusInfinity => f.write_str("-inf"),
        }
    }
}

/// Leading monomial `c·ε^k`. `pt(0)` is the zero monomial.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PrincipalMonomial {
    pub coefficient: Rational,
    pub exponent: i64,
}

impl PrincipalMonomial {
    pub fn zero() -> Self {
        PrincipalMonomial { coefficient: Rational::zero(), exponent: 0 }
    }

    pub fn is_zero(&self) -> bool {
        self.coefficient.is_zero()
    }

    pub fn to_number(&self) -> LeviCivitaNumber {
        LeviCivitaNumber::monomial(self.coefficient.clone(), self.exponent)
    }
}

impl fmt::Display for PrincipalMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        f.write_str(&render_term(&self.coefficient, self.exponent))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LeviCivitaNumber {
    terms: BTreeMap<i64, Rational>,
    /// `None` means exact: there is no unknown tail.
    trunc: Option<i64>,
}

fn add_opt(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    Some(a? + b?)
}

fn min_opt(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

impl LeviCivitaNumber {
    pub fn from_terms<I>(terms: I, trunc: Option<i64>) -> Self
    where
        I: IntoIterator<Item = (i64, Rational)>,
    {
        let mut map: BTreeMap<i64, Rational> = BTreeMap::new();
        for (k, c) in terms {
            *map.entry(k).or_insert_with(Rational::zero) += c;
        }
        map.retain(|k, c| !c.is_zero() && trunc.is_none_or(|m| *k <= m));
        LeviCivitaNumber { terms: map, trunc }
    }

    pub fn zero() -> Self {
        LeviCivitaNumber { terms: BTreeMap::new(), trunc: None }
    }

    pub fn one() -> Self {
        Self::from_rational(Rational::one())
    }

    pub fn from_rational(r: Rational) -> Self {
        Self::monomial(r, 0)
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rational(rational::int(n))
    }

    pub fn monomial(c: Rational, k: i64) -> Self {
        Self::from_terms([(k, c)], None)
    }

    /// The benchmark infinitesimal ε.
    pub fn eps() -> Self {
        Self::monomial(Rational::one(), 1)
    }

    /// The benchmark infinite element ω = ε⁻¹.
    pub fn omega() -> Self {
        Self::monomial(Rational::one(), -1)
    }

    /// Restricts the known window to exponents `<= m`.
    pub fn truncate(&self, m: i64) -> Self {
        let trunc = min_opt(self.trunc, Some(m));
        Self::from_terms(self.terms.iter().map(|(k, c)| (*k, c.clone())), trunc)
    }

    pub fn terms(&self) -> &BTreeMap<i64, Rational> {
        &self.terms
    }

    pub fn trunc_order(&self) -> Option<i64> {
        self.trunc
    }

    pub fn is_exact(&self) -> bool {
        self.trunc.is_none()
    }

    pub fn coefficient(&self, k: i64) -> Rational {
        self.terms.get(&k).cloned().unwrap_or_else(Rational::zero)
    }

    /// True when every known coefficient is zero.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn valuation(&self) -> Valuation {
        match self.terms.keys().next() {
            Some(k) => Valuation::Finite(*k),
            None => Valuation::Infinite,
        }
    }

    /// Valuation used for window propagation: a zero with a finite window is only
    /// known to be `O(ε^(M+1))`.
    fn effective_valuation(&self) -> Option<i64> {
        match self.terms.keys().next() {
            Some(k) => Some(*k),
            None => self.trunc.map(|m| m + 1),
        }
    }

    fn leading(&self) -> Option<(i64, &Rational)> {
        self.terms.iter().next().map(|(k, c)| (*k, c))
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self::from_terms(self.terms.iter().map(|(k, v)| (*k, v * c)), self.trunc)
    }

    /// Multiplies by `ε^s`.
    pub fn shift(&self, s: i64) -> Self {
        Self::from_terms(self.terms.iter().map(|(k, v)| (k + s, v.clone())), self.trunc.map(|m| m + s))
    }

    /// Splits a nonzero value as `c·ε^v·(1 + r)` with `v(r) ≥ 1`.
    fn split_unit(&self) -> Option<(Rational, i64, LeviCivitaNumber)> {
        let (v, c) = self.leading()?;
        let c = c.clone();
        let inv_c = c.recip();
        let rest =
            Self::from_terms(self.terms.iter().skip(1).map(|(k, x)| (k - v, x * &inv_c)), self.trunc.map(|m| m - v));
        Some((c, v, rest))
    }

    pub fn invert(&self) -> Result<Self, HyperrealError> {
        let (c, v, r) = self.split_unit().ok_or(HyperrealError::DivisionByZero)?;
        let c_inv = c.recip();
        if r.is_zero() && r.is_exact() {
            return Ok(Self::monomial(c_inv, -v));
        }
        let window = r.trunc.unwrap_or(DEFAULT_TRUNC);
        let s = unit_series(&(-&r), window, |_| Rational::one());
        Ok(s.shift(-v).scale(&c_inv))
    }

    pub fn checked_div(&self, rhs: &Self) -> Result<Self, HyperrealError> {
        Ok(self * &rhs.invert()?)
    }

    pub fn powi(&self, n: i64) -> Result<Self, HyperrealError> {
        if n < 0 {
            return self.powi(-n)?.invert();
        }
        let mut base = self.clone();
        let mut acc = Self::one();
        let mut e = n as u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        Ok(acc)
    }

    /// Rational power, defined when the leading coefficient has a rational root and the
    /// leading exponent stays integral.
    pub fn pow_rational(&self, s: &Rational) -> Result<Self, HyperrealError> {
        if let Some(n) = rational::as_small_int(s) {
            return self.powi(n);
        }
        let (c, v, r) = self.split_unit().ok_or_else(|| {
            if s.is_positive() {
                HyperrealError::NonRational("fractional power of zero".into())
            } else {
                HyperrealError::DivisionByZero
            }
        })?;
        let shift = s * rational::int(v);
        let shift = rational::as_small_int(&shift)
            .ok_or_else(|| HyperrealError::NonRational(format!("ε^{v} raised to {}", fmt_rational(s))))?;
        let c_pow = rational::checked_pow(&c, s)
            .ok_or_else(|| HyperrealError::NonRational(format!("{}^{}", fmt_rational(&c), fmt_rational(s))))?;
        if r.is_zero() && r.is_exact() {
            return Ok(Self::monomial(c_pow, shift));
        }
        let window = r.trunc.unwrap_or(DEFAULT_TRUNC);
        let series = unit_series(&r, window, |k| rational::gen_binomial(s, k));
        Ok(series.shift(shift).scale(&c_pow))
    }

    /// `a ≤ b`.
    pub fn leq(&self, other: &Self) -> Result<bool, HyperrealError> {
        let d = other - self;
        match d.leading() {
            Some((_, c)) => Ok(c.is_positive()),
            None if d.is_exact() => Ok(true),
            None => Err(HyperrealError::IndeterminateOrder),
        }
    }

    pub fn compare(&self, other: &Self) -> Result<Ordering, HyperrealError> {
        let d = other - self;
        match d.leading() {
            Some((_, c)) if c.is_positive() => Ok(Ordering::Less),
            Some(_) => Ok(Ordering::Greater),
            None if d.is_exact() => Ok(Ordering::Equal),
            None => Err(HyperrealError::IndeterminateOrder),
        }
    }

    pub fn abs(&self) -> Result<Self, HyperrealError> {
        if Self::zero().leq(self)? {
            Ok(self.clone())
        } else {
            Ok(-self)
        }
    }

    pub fn standard_part(&self) -> Result<StandardPart, HyperrealError> {
        if let Some((k, c)) = self.leading() {
            if k < 0 {
                return Ok(if c.is_positive() { StandardPart::PlusInfinity } else { StandardPart::MinusInfinity });
            }
        }
        match self.trunc {
            Some(m) if m < 0 => Err(HyperrealError::Undetermined(m)),
            _ => Ok(StandardPart::Finite(self.coefficient(0))),
        }
    }

    pub fn principal_part(&self) -> PrincipalMonomial {
        match self.leading() {
            Some((k, c)) => PrincipalMonomial { coefficient: c.clone(), exponent: k },
            None => PrincipalMonomial::zero(),
        }
    }

    pub fn is_infinitesimal(&self) -> bool {
        match self.valuation() {
            Valuation::Infinite => true,
            Valuation::Finite(v) => v >= 1,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self.valuation(), Valuation::Finite(v) if v <= -1)
    }

    fn expansion_window(&self) -> i64 {
        self.trunc.unwrap_or(DEFAULT_TRUNC)
    }

    fn require_infinitesimal(&self, what: &str) -> Result<(), HyperrealError> {
        if self.is_infinitesimal() {
            Ok(())
        } else {
            Err(HyperrealError::NonRational(format!("{what} of a value with nonzero standard part")))
        }
    }

    pub fn exp(&self) -> Result<Self, HyperrealError> {
        self.require_infinitesimal("exp")?;
        if self.is_zero() && self.is_exact() {
            return Ok(Self::one());
        }
        let w = self.expansion_window();
        Ok(unit_series(self, w, |k| Rational::from_integer(rational::factorial(k)).recip()))
    }

    pub fn sin(&self) -> Result<Self, HyperrealError> {
        self.require_infinitesimal("sin")?;
        if self.is_zero() && self.is_exact() {
            return Ok(Self::zero());
        }
        let w = self.expansion_window();
        Ok(unit_series(self, w, |k| {
            if k % 2 == 0 {
                Rational::zero()
            } else {
                let sign = if (k / 2) % 2 == 0 { 1 } else { -1 };
                Rational::from_integer(rational::factorial(k)).recip() * rational::int(sign)
            }
        }))
    }

    pub fn cos(&self) -> Result<Self, HyperrealError> {
        self.require_infinitesimal("cos")?;
        if self.is_zero() && self.is_exact() {
            return Ok(Self::one());
        }
        let w = self.expansion_window();
        Ok(unit_series(self, w, |k| {
            if k % 2 == 1 {
                Rational::zero()
            } else {
                let sign = if (k / 2) % 2 == 0 { 1 } else { -1 };
                Rational::from_integer(rational::factorial(k)).recip() * rational::int(sign)
            }
        }))
    }

    pub fn ln(&self) -> Result<Self, HyperrealError> {
        let r = self - &Self::one();
        if !r.is_infinitesimal() {
            return Err(HyperrealError::NonRational("ln of a value whose standard part is not 1".into()));
        }
        if r.is_zero() && r.is_exact() {
            return Ok(Self::zero());
        }
        let w = r.expansion_window();
        Ok(unit_series(&r, w, |k| {
            if k == 0 {
                Rational::zero()
            } else {
                let sign = if k % 2 == 1 { 1 } else { -1 };
                rational::frac(sign, k as i64)
            }
        }))
    }
}

/// `Σ_{k=0..=window} coeff(k)·r^k`, valid when `v(r) ≥ 1`; the result is known through `ε^window`.
fn unit_series(r: &LeviCivitaNumber, window: i64, coeff: impl Fn(u64) -> Rational) -> LeviCivitaNumber {
    let mut acc = LeviCivitaNumber::from_terms([(0, coeff(0))], Some(window));
    if window < 1 {
        return acc;
    }
    let r = r.truncate(window);
    let mut power = LeviCivitaNumber::one().truncate(window);
    for k in 1..=window as u64 {
        power = (&power * &r).truncate(window);
        if power.is_zero() {
            break;
        }
        let c = coeff(k);
        if !c.is_zero() {
            acc = &acc + &power.scale(&c);
        }
    }
    acc.truncate(window)
}

impl Add for &LeviCivitaNumber {
    type Output = LeviCivitaNumber;
    fn add(self, rhs: &LeviCivitaNumber) -> LeviCivitaNumber {
        let trunc = min_opt(self.trunc, rhs.trunc);
        LeviCivitaNumber::from_terms(self.terms.iter().chain(rhs.terms.iter()).map(|(k, c)| (*k, c.clone())), trunc)
    }
}

impl Sub for &LeviCivitaNumber {
    type Output = LeviCivitaNumber;
    fn sub(self, rhs: &LeviCivitaNumber) -> LeviCivitaNumber {
        self + &(-rhs)
    }
}

impl Neg for &LeviCivitaNumber {
    type Output = LeviCivitaNumber;
    fn neg(self) -> LeviCivitaNumber {
        LeviCivitaNumber { terms: self.terms.iter().map(|(k, c)| (*k, -c)).collect(), trunc: self.trunc }
    }
}

impl Mul for &LeviCivitaNumber {
    type Output = LeviCivitaNumber;
    fn mul(self, rhs: &LeviCivitaNumber) -> LeviCivitaNumber {
        let trunc =
            min_opt(add_opt(self.trunc, rhs.effective_valuation()), add_opt(rhs.trunc, self.effective_valuation()));
        let mut out: BTreeMap<i64, Rational> = BTreeMap::new();
        for (ka, ca) in &self.terms {
            for (kb, cb) in &rhs.terms {
                let k = ka + kb;
                if trunc.is_some_and(|m| k > m) {
                    continue;
                }
                *out.entry(k).or_insert_with(Rational::zero) += ca * cb;
            }
        }
        LeviCivitaNumber::from_terms(out, trunc)
    }
}

macro_rules! owned_ops {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr for LeviCivitaNumber {
            type Output = LeviCivitaNumber;
            fn $m(self, rhs: LeviCivitaNumber) -> LeviCivitaNumber {
                (&self).$m(&rhs)
            }
        }
    )*};
}
owned_ops!(Add add, Sub sub, Mul mul);

impl Neg for LeviCivitaNumber {
    type Output = LeviCivitaNumber;
    fn neg(self) -> LeviCivitaNumber {
        -&self
    }
}

fn render_term(c: &Rational, k: i64) -> String {
    if k == 0 {
        return fmt_rational(c);
    }
    let unit = match k {
        1 => "eps".to_string(),
        -1 => "omega".to_string(),
        k if k > 1 => format!("eps^{k}"),
        k => format!("omega^{}", -k),
    };
    if c.is_one() {
        unit
    } else if *c == -Rational::one() {
        format!("-{unit}")
    } else {
        format!("{}*{unit}", fmt_rational(c))
    }
}

/// Terms in ascending exponent order, each `c*eps^k` or `c*omega^k`, joined by `" + "`.
impl fmt::Display for LeviCivitaNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self.terms.iter().map(|(k, c)| render_term(c, *k)).collect();
        f.write_str(&parts.join(" + "))
    }
}
