//! Canonical normalization.
//!
//! Expressions are mapped to sums of monomials with exact rational coefficients, where a
//! monomial is a product of bases raised to nonzero rational exponents. Positive integer
//! powers of sums are expanded; other powers of sums are kept as bases after pulling out
//! the leading coefficient, so `(2x+2)·(x+1)⁻¹` still cancels. Constants with fractional
//! exponents are kept as bases with exponent in `(0, 1)`.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num::{One, Signed, Zero};
use thiserror::Error;

use crate::expr::{Expr, Grade};
use crate::rational::{self, fmt_rational, Rational, MAX_EXPONENT};
use crate::render;

/// Largest positive integer power of a sum that will be expanded.
const MAX_EXPANSION: i64 = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NormalizeError {
    #[error("({base})^{exponent} has non-integer differential grade")]
    NonIntegerGrade { base: String, exponent: String },
    #[error("division by zero")]
    DivisionByZero,
    #[error("exponent too large: {0}")]
    ExponentTooLarge(String),
}

type Result<T> = std::result::Result<T, NormalizeError>;

#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord)]
struct Monomial(BTreeMap<Expr, Rational>);

#[derive(Debug, Clone, Default)]
struct Poly(BTreeMap<Monomial, Rational>);

impl Poly {
    fn constant(c: Rational) -> Poly {
        let mut p = Poly::default();
        if !c.is_zero() {
            p.0.insert(Monomial::default(), c);
        }
        p
    }

    fn atom(e: Expr) -> Poly {
        let mut m = BTreeMap::new();
        m.insert(e, Rational::one());
        let mut p = Poly::default();
        p.0.insert(Monomial(m), Rational::one());
        p
    }

    fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        let slot = self.0.entry(m).or_insert_with(Rational::zero);
        *slot += c;
        if slot.is_zero() {
            self.0.retain(|_, v| !v.is_zero());
        }
    }

    fn add_poly(&mut self, other: Poly) {
        for (m, c) in other.0 {
            self.add_term(m, c);
        }
    }

    fn single_term(&self) -> Option<(&Monomial, &Rational)> {
        if self.0.len() == 1 {
            self.0.iter().next()
        } else {
            None
        }
    }

    fn mul(&self, other: &Poly) -> Result<Poly> {
        let mut out = Poly::default();
        for (m1, c1) in &self.0 {
            for (m2, c2) in &other.0 {
                let mut bases = m1.0.clone();
                for (b, e) in &m2.0 {
                    *bases.entry(b.clone()).or_insert_with(Rational::zero) += e;
                }
                out.add_poly(finish(c1 * c2, bases)?);
            }
        }
        Ok(out)
    }

    fn pow_uint(&self, k: i64) -> Result<Poly> {
        if k > MAX_EXPANSION {
            return Err(NormalizeError::ExponentTooLarge(k.to_string()));
        }
        let mut acc = Poly::constant(Rational::one());
        for _ in 0..k {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    fn sorted_terms(&self) -> Vec<(&Monomial, &Rational)> {
        let mut terms: Vec<_> = self.0.iter().collect();
        terms.sort_by(|a, b| term_cmp(a.0, b.0));
        terms
    }

    fn to_expr(&self) -> Expr {
        let terms = self.sorted_terms();
        match terms.len() {
            0 => Expr::zero(),
            1 => term_expr(terms[0].0, terms[0].1),
            _ => Expr::Add(terms.into_iter().map(|(m, c)| term_expr(m, c)).collect()),
        }
    }
}

fn term_expr(m: &Monomial, c: &Rational) -> Expr {
    let mut factors = Vec::with_capacity(m.0.len() + 1);
    if !c.is_one() || m.0.is_empty() {
        factors.push(Expr::Const(c.clone()));
    }
    for (b, e) in &m.0 {
        if e.is_one() {
            factors.push(b.clone());
        } else {
            factors.push(Expr::Pow(Box::new(b.clone()), e.clone()));
        }
    }
    if factors.len() == 1 {
        factors.pop().unwrap()
    } else {
        Expr::Mul(factors)
    }
}

fn base_order(b: &Expr) -> u32 {
    match b {
        Expr::DiffAtom(_, n) => *n,
        Expr::PartialAtom(..) => 1,
        _ => 0,
    }
}

fn base_grade(b: &Expr) -> i64 {
    match b.grade() {
        Grade::Homogeneous(g) => g,
        Grade::Mixed => 0,
    }
}

/// Term order for sums: highest differential in the numerator first, then smaller
/// denominators, then fewer factors, then structure.
fn term_cmp(a: &Monomial, b: &Monomial) -> Ordering {
    let max_order =
        |m: &Monomial| m.0.iter().filter(|(_, e)| e.is_positive()).map(|(b, _)| base_order(b)).max().unwrap_or(0);
    let denominator = |m: &Monomial| {
        m.0.iter()
            .filter(|(_, e)| e.is_negative())
            .fold(Rational::zero(), |acc, (b, e)| acc + e.abs() * rational::int(base_grade(b)))
    };
    max_order(b)
        .cmp(&max_order(a))
        .then_with(|| denominator(a).cmp(&denominator(b)))
        .then_with(|| a.0.len().cmp(&b.0.len()))
        .then_with(|| a.cmp(b))
}

/// Canonical form of a single term. Folds integer powers of constant bases into the
/// coefficient and expands positive integer powers of sums.
fn finish(mut coef: Rational, bases: BTreeMap<Expr, Rational>) -> Result<Poly> {
    if coef.is_zero() {
        return Ok(Poly::default());
    }
    let mut mono = BTreeMap::new();
    let mut expansions = Vec::new();
    for (b, e) in bases {
        if e.is_zero() {
            continue;
        }
        match &b {
            Expr::Const(c) => {
                let whole = e.floor();
                let frac = &e - &whole;
                let whole_pow = rational::checked_pow(c, &whole)
                    .ok_or_else(|| NormalizeError::ExponentTooLarge(fmt_rational(&e)))?;
                coef *= whole_pow;
                if !frac.is_zero() {
                    match rational::checked_pow(c, &frac) {
                        Some(v) => coef *= v,
                        None => {
                            mono.insert(b.clone(), frac);
                        }
                    }
                }
            }
            Expr::Add(_) if e.is_integer() && e.is_positive() => {
                let k = rational::as_small_int(&e)
                    .filter(|k| *k <= MAX_EXPANSION)
                    .ok_or_else(|| NormalizeError::ExponentTooLarge(fmt_rational(&e)))?;
                expansions.push((to_poly(&b)?, k));
            }
            _ => {
                mono.insert(b, e);
            }
        }
    }
    let mut out = Poly::default();
    out.add_term(Monomial(mono), coef);
    for (p, k) in expansions {
        out = out.mul(&p.pow_uint(k)?)?;
    }
    Ok(out)
}

/// Splits a sum as `k·S` where the leading term of `S` has coefficient 1.
fn primitive(p: &Poly) -> (Rational, Expr) {
    let terms = p.sorted_terms();
    let k = terms[0].1.clone();
    let inv = k.recip();
    let mut s = Poly::default();
    for (m, c) in terms {
        s.add_term(m.clone(), c * &inv);
    }
    (k, s.to_expr())
}

#[derive(Default)]
struct Product {
    coef: Rational,
    bases: BTreeMap<Expr, Rational>,
    zero: bool,
}

impl Product {
    fn new() -> Self {
        Product { coef: Rational::one(), ..Default::default() }
    }

    fn push_base(&mut self, b: Expr, e: Rational) {
        *self.bases.entry(b).or_insert_with(Rational::zero) += e;
    }

    fn push_coef_pow(&mut self, c: &Rational, e: &Rational) -> Result<()> {
        if e.is_one() {
            self.coef *= c;
            return Ok(());
        }
        if let Some(v) = rational::checked_pow(c, e) {
            self.coef *= v;
        } else if c.is_zero() {
            return Err(NormalizeError::DivisionByZero);
        } else if e.is_integer() {
            return Err(NormalizeError::ExponentTooLarge(fmt_rational(e)));
        } else {
            self.push_base(Expr::Const(c.clone()), e.clone());
        }
        Ok(())
    }

    /// Multiplies by `p^e`.
    fn push(&mut self, p: Poly, e: &Rational) -> Result<()> {
        if e.is_zero() {
            return Ok(());
        }
        if p.is_zero() {
            if e.is_negative() {
                return Err(NormalizeError::DivisionByZero);
            }
            self.zero = true;
            return Ok(());
        }
        if let Some((m, c)) = p.single_term() {
            self.push_coef_pow(c, e)?;
            for (b, be) in &m.0 {
                self.push_base(b.clone(), be * e);
            }
            return Ok(());
        }
        let (k, s) = primitive(&p);
        self.push_coef_pow(&k, e)?;
        self.push_base(s, e.clone());
        Ok(())
    }

    fn finish(self) -> Result<Poly> {
        if self.zero {
            return Ok(Poly::default());
        }
        finish(self.coef, self.bases)
    }
}

fn check_grade(base: &Expr, exponent: &Rational) -> Result<()> {
    if let Grade::Homogeneous(g) = base.grade() {
        if !(exponent * rational::int(g)).is_integer() {
            return Err(NormalizeError::NonIntegerGrade { base: render::text(base), exponent: fmt_rational(exponent) });
        }
    }
    Ok(())
}

fn to_poly(e: &Expr) -> Result<Poly> {
    match e {
        Expr::Const(c) => Ok(Poly::constant(c.clone())),
        Expr::Var(_) | Expr::DiffAtom(..) => Ok(Poly::atom(e.clone())),
        Expr::Func(name, args) => {
            let args = args.iter().map(normalize).collect::<Result<Vec<_>>>()?;
            Ok(Poly::atom(Expr::Func(name.clone(), args)))
        }
        Expr::PartialAtom(target, vary) => {
            let mut seen = Vec::with_capacity(vary.len());
            for v in vary {
                if !seen.contains(v) {
                    seen.push(v.clone());
                }
            }
            Ok(Poly::atom(Expr::PartialAtom(Box::new(normalize(target)?), seen)))
        }
        Expr::DerivAtom(target, wrt, n) => {
            Ok(Poly::atom(Expr::DerivAtom(Box::new(normalize(target)?), wrt.clone(), *n)))
        }
        Expr::Add(terms) => {
            let mut acc = Poly::default();
            for t in terms {
                acc.add_poly(to_poly(t)?);
            }
            Ok(acc)
        }
        Expr::Mul(_) | Expr::Pow(..) => {
            let mut prod = Product::new();
            push_factor(&mut prod, e, &Rational::one())?;
            prod.finish()
        }
    }
}

fn push_factor(prod: &mut Product, e: &Expr, outer: &Rational) -> Result<()> {
    match e {
        Expr::Mul(fs) => {
            for f in fs {
                push_factor(prod, f, outer)?;
            }
            Ok(())
        }
        Expr::Pow(b, r) => {
            let exponent = r * outer;
            if exponent.numer().abs() > num::BigInt::from(MAX_EXPONENT)
                || exponent.denom() > &num::BigInt::from(MAX_EXPONENT)
            {
                return Err(NormalizeError::ExponentTooLarge(fmt_rational(&exponent)));
            }
            let inner = normalize(b)?;
            check_grade(&inner, r)?;
            prod.push(to_poly(&inner)?, &exponent)
        }
        _ => prod.push(to_poly(e)?, outer),
    }
}

/// Canonical form: flattened, sorted, like terms collected. Idempotent.
pub fn normalize(e: &Expr) -> Result<Expr> {
    Ok(to_poly(e)?.to_expr())
}

pub fn substitute(e: &Expr, bindings: &BTreeMap<String, Expr>) -> Result<Expr> {
    normalize(&e.substitute_raw(bindings))
}
