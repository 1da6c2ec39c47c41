//! Independent oracles and generators shared by the integration tests.
//!
//! The oracles use plain dense polynomials with rational coefficients and never touch the
//! crate's series or expression types.

#![allow(dead_code)]

use leibniz::rational::{frac, int, Rational};
use leibniz::{DependencyDecls, Expr, LeviCivitaNumber};
use num::{One, Zero};
use proptest::prelude::*;

pub mod props;

/// Dense polynomial, coefficients in ascending order.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly(pub Vec<Rational>);

impl Poly {
    pub fn from_ints(c: &[i64]) -> Self {
        Poly(c.iter().map(|x| int(*x)).collect()).trimmed()
    }

    pub fn constant(c: Rational) -> Self {
        Poly(vec![c]).trimmed()
    }

    /// `a + b·e`
    pub fn linear(a: Rational, b: Rational) -> Self {
        Poly(vec![a, b]).trimmed()
    }

    fn trimmed(mut self) -> Self {
        while self.0.last().is_some_and(|c| c.is_zero()) {
            self.0.pop();
        }
        self
    }

    pub fn coeff(&self, k: usize) -> Rational {
        self.0.get(k).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let n = self.0.len().max(o.0.len());
        Poly((0..n).map(|k| self.coeff(k) + o.coeff(k)).collect()).trimmed()
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        Poly(self.0.iter().map(|x| x * c).collect()).trimmed()
    }

    /// Schoolbook convolution.
    pub fn mul(&self, o: &Poly) -> Poly {
        if self.0.is_empty() || o.0.is_empty() {
            return Poly(vec![]);
        }
        let mut out = vec![Rational::zero(); self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in o.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly(out).trimmed()
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for c in self.0.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// `self(inner(e))`
    pub fn compose(&self, inner: &Poly) -> Poly {
        let mut acc = Poly(vec![]);
        for c in self.0.iter().rev() {
            acc = acc.mul(inner).add(&Poly::constant(c.clone()));
        }
        acc
    }

    pub fn derivative(&self) -> Poly {
        Poly(self.0.iter().enumerate().skip(1).map(|(k, c)| c * int(k as i64)).collect()).trimmed()
    }

    pub fn nth_derivative(&self, n: usize) -> Poly {
        (0..n).fold(self.clone(), |p, _| p.derivative())
    }
}

fn binom(n: usize, k: usize) -> Rational {
    let mut r = Rational::one();
    for i in 0..k {
        r = r * int((n - i) as i64) / int((i + 1) as i64);
    }
    r
}

/// `Δⁿ p` at `q0` as a polynomial in `ε`: `Σⱼ (−1)^(n−j)·C(n,j)·p(q0 + j·ε)`.
pub fn forward_difference(p: &Poly, q0: &Rational, n: usize) -> Poly {
    let mut acc = Poly(vec![]);
    for j in 0..=n {
        let shifted = p.compose(&Poly::linear(q0.clone(), int(j as i64)));
        let sign = if (n - j).is_multiple_of(2) { int(1) } else { int(-1) };
        acc = acc.add(&shifted.scale(&(binom(n, j) * sign)));
    }
    acc
}

/// Coefficients of a series as a dense map for comparison with an oracle polynomial.
pub fn series_matches(x: &LeviCivitaNumber, p: &Poly, through: i64) -> bool {
    (0..=through).all(|k| x.coefficient(k) == p.coeff(k as usize)) && x.terms().keys().all(|k| *k >= 0)
}

/// Builds `Σ cₖ·vᵏ` as an expression.
pub fn poly_expr(p: &Poly, v: &str) -> Expr {
    let terms =
        p.0.iter()
            .enumerate()
            .map(|(k, c)| Expr::Mul(vec![Expr::Const(c.clone()), Expr::var(v).powi(k as i64)]))
            .collect();
    leibniz::normalize(&Expr::Add(terms)).unwrap()
}

// ---- generators ----

pub fn small_rational() -> impl Strategy<Value = Rational> {
    (-6i64..=6, 1i64..=3).prop_map(|(n, d)| frac(n, d))
}

pub fn nonzero_int() -> impl Strategy<Value = i64> {
    prop_oneof![-3i64..=-1, 1i64..=3]
}

/// Polynomial of degree 1..=max_degree with a nonzero leading coefficient.
pub fn poly(max_degree: usize) -> impl Strategy<Value = Poly> {
    (1..=max_degree).prop_flat_map(|d| (prop::collection::vec(-3i64..=3, d), nonzero_int())).prop_map(
        |(mut c, lead)| {
            c.push(lead);
            Poly::from_ints(&c)
        },
    )
}

pub fn sample_point() -> impl Strategy<Value = Rational> {
    (-6i64..=6).prop_map(|k| frac(k, 2))
}

/// Exact series with exponents in `[-2, 4]`.
pub fn exact_series() -> impl Strategy<Value = LeviCivitaNumber> {
    prop::collection::vec((-2i64..=4, small_rational()), 0..5).prop_map(|t| LeviCivitaNumber::from_terms(t, None))
}

/// Series with a finite window between 2 and 8.
pub fn windowed_series() -> impl Strategy<Value = LeviCivitaNumber> {
    (prop::collection::vec((-2i64..=4, small_rational()), 0..5), 2i64..=8)
        .prop_map(|(t, m)| LeviCivitaNumber::from_terms(t, Some(m)))
}

pub fn any_series() -> impl Strategy<Value = LeviCivitaNumber> {
    prop_oneof![exact_series(), windowed_series()]
}

/// True when two series agree on every coefficient both of them know.
pub fn agree(a: &LeviCivitaNumber, b: &LeviCivitaNumber) -> bool {
    let m = match (a.trunc_order(), b.trunc_order()) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    };
    match m {
        None => a == b,
        Some(m) => a.truncate(m) == b.truncate(m),
    }
}

pub const VARS: &[&str] = &["x", "y"];

pub fn decls_fxy() -> DependencyDecls {
    DependencyDecls::new().with_var("x").with_var("y").with_function("f", &["x", "y"])
}

fn leaf(with_atoms: bool) -> BoxedStrategy<Expr> {
    let consts = (-4i64..=4, 1i64..=3).prop_map(|(n, d)| Expr::Const(frac(n, d)));
    let vars = prop::sample::select(VARS).prop_map(Expr::var);
    if with_atoms {
        let diffs = (prop::sample::select(VARS), 1u32..=2).prop_map(|(v, n)| Expr::diff(v, n));
        prop_oneof![3 => consts, 3 => vars, 2 => diffs].boxed()
    } else {
        prop_oneof![consts, vars].boxed()
    }
}

/// Raw polynomial-like trees: sums, products and small non-negative integer powers.
pub fn poly_tree(with_atoms: bool) -> BoxedStrategy<Expr> {
    leaf(with_atoms)
        .prop_recursive(3, 16, 3, |inner| {
            prop_oneof![
                prop::collection::vec(inner.clone(), 2..4).prop_map(Expr::Add),
                prop::collection::vec(inner.clone(), 2..4).prop_map(Expr::Mul),
                (inner, 0i64..=3).prop_map(|(b, e)| b.powi(e)),
            ]
        })
        .boxed()
}

/// Raw trees that also contain negative and fractional powers, elementary functions,
/// partial atoms and derivative atoms.
pub fn rich_tree() -> BoxedStrategy<Expr> {
    let partial = prop::sample::subsequence(vec!["x", "y"], 1..=1).prop_map(|v| Expr::partial("f", &["x", "y"], &v));
    let deriv = (prop::sample::select(VARS), prop::sample::select(VARS), 1u32..=2)
        .prop_map(|(y, x, n)| Expr::deriv(Expr::var(y), x, n));
    let base = prop_oneof![6 => leaf(true), 1 => partial, 1 => deriv];
    base.prop_recursive(3, 16, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..4).prop_map(Expr::Add),
            prop::collection::vec(inner.clone(), 2..4).prop_map(Expr::Mul),
            (inner.clone(), -2i64..=3).prop_map(|(b, e)| b.powi(e)),
            (inner.clone(), prop::sample::select(vec![frac(1, 2), frac(-1, 2), frac(2, 3)]))
                .prop_map(|(b, e)| b.pow(e)),
            (prop::sample::select(vec!["sin", "cos", "exp", "ln"]), inner).prop_map(|(f, a)| Expr::func(f, vec![a])),
        ]
    })
    .boxed()
}
