//! Arbogast derivatives expanded into differential ratios, and the identities built
//! from them.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::decls::DependencyDecls;
use crate::differential::{differential, nth_differential, DiffConfig, DiffError, Result};
use crate::expr::Expr;
use crate::normalize::normalize;

/// `D_x^n y = d(D_x^{n-1} y) / dx`, with `D_x^0 y = y`.
pub fn expand_derivative(y: &Expr, x: &str, n: u32, decls: &DependencyDecls, cfg: &DiffConfig) -> Result<Expr> {
    if n == 0 {
        return Err(DiffError::ZeroOrder);
    }
    if n > cfg.max_derivative_order {
        return Err(DiffError::OrderGuardExceeded { order: n, limit: cfg.max_derivative_order });
    }
    let dx_inv = Expr::diff(x, 1).recip();
    let mut cur = expand_atoms(y, decls, cfg)?;
    for _ in 0..n {
        let d = differential(&cur, decls, cfg)?;
        cur = normalize(&(d * dx_inv.clone()))?;
    }
    Ok(cur)
}

/// Recognizes an expanded `D_x^n y` for `n ≤ 3` and returns the atom. Only exact matches
/// of the whole normalized expression are collapsed.
pub fn collapse(e: &Expr, x: &str, decls: &DependencyDecls, cfg: &DiffConfig) -> Result<Expr> {
    let e = normalize(e)?;
    let mut targets = std::collections::BTreeSet::new();
    collect_diff_targets(&e, &mut targets);
    targets.remove(x);
    for y in targets {
        for n in 1..=3 {
            let form = expand_derivative(&Expr::var(&y), x, n, decls, cfg)?;
            if form == e {
                return Ok(Expr::DerivAtom(Box::new(Expr::var(&y)), x.to_string(), n));
            }
        }
    }
    Ok(e)
}

fn collect_diff_targets(e: &Expr, out: &mut std::collections::BTreeSet<String>) {
    match e {
        Expr::DiffAtom(v, _) => {
            out.insert(v.clone());
        }
        Expr::Add(xs) | Expr::Mul(xs) | Expr::Func(_, xs) => xs.iter().for_each(|c| collect_diff_targets(c, out)),
        Expr::Pow(b, _) => collect_diff_targets(b, out),
        _ => {}
    }
}

/// Replaces every `DerivAtom` by its expansion.
pub fn expand_atoms(e: &Expr, decls: &DependencyDecls, cfg: &DiffConfig) -> Result<Expr> {
    if !e.contains_deriv_atom() {
        return Ok(normalize(e)?);
    }
    let out = map_children(e, &mut |c| expand_atoms(c, decls, cfg))?;
    match out {
        Expr::DerivAtom(t, x, n) => expand_derivative(&t, &x, n, decls, cfg),
        other => Ok(normalize(&other)?),
    }
}

/// Rebuilds `e` with `f` applied to each direct child expression.
pub(crate) fn map_children<E>(
    e: &Expr,
    f: &mut impl FnMut(&Expr) -> std::result::Result<Expr, E>,
) -> std::result::Result<Expr, E> {
    Ok(match e {
        Expr::Const(_) | Expr::Var(_) | Expr::DiffAtom(..) => e.clone(),
        Expr::Add(xs) => Expr::Add(xs.iter().map(&mut *f).collect::<std::result::Result<_, _>>()?),
        Expr::Mul(xs) => Expr::Mul(xs.iter().map(&mut *f).collect::<std::result::Result<_, _>>()?),
        Expr::Func(n, xs) => Expr::Func(n.clone(), xs.iter().map(&mut *f).collect::<std::result::Result<_, _>>()?),
        Expr::Pow(b, r) => Expr::Pow(Box::new(f(b)?), r.clone()),
        Expr::PartialAtom(t, vs) => Expr::PartialAtom(Box::new(f(t)?), vs.clone()),
        Expr::DerivAtom(t, x, n) => Expr::DerivAtom(Box::new(f(t)?), x.clone(), *n),
    })
}

/// Replaces a dependent variable by a concrete expression, including its differentials:
/// `dⁿv` becomes `dⁿ(value)`.
pub fn realize(e: &Expr, var: &str, value: &Expr, decls: &DependencyDecls, cfg: &DiffConfig) -> Result<Expr> {
    fn go(e: &Expr, var: &str, value: &Expr, decls: &DependencyDecls, cfg: &DiffConfig) -> Result<Expr> {
        match e {
            Expr::Var(v) if v == var => Ok(value.clone()),
            Expr::DiffAtom(v, n) if v == var => nth_differential(value, *n, decls, cfg),
            _ => map_children(e, &mut |c| go(c, var, value, decls, cfg)),
        }
    }
    let expanded = expand_atoms(e, decls, cfg)?;
    Ok(normalize(&go(&expanded, var, value, decls, cfg)?)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckMode {
    /// `lhs − rhs` vanishes throughout the known window.
    Exact,
    /// `lhs − rhs` is infinitesimal.
    LeadingOrder,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Identity {
    pub name: String,
    pub lhs: Expr,
    pub rhs: Expr,
    pub decls: DependencyDecls,
    pub mode: CheckMode,
}

impl Identity {
    /// `lhs − rhs` with derivative atoms expanded and like terms collected.
    /// A partial differential over every argument is rewritten as the sum of its singleton
    /// partials, which is exact at grade 1.
    pub fn symbolic_difference(&self, cfg: &DiffConfig) -> Result<Expr> {
        let l = split_full_partials(&expand_atoms(&self.lhs, &self.decls, cfg)?, &self.decls, cfg)?;
        let r = split_full_partials(&expand_atoms(&self.rhs, &self.decls, cfg)?, &self.decls, cfg)?;
        Ok(normalize(&(l - r))?)
    }
}

fn split_full_partials(e: &Expr, decls: &DependencyDecls, cfg: &DiffConfig) -> Result<Expr> {
    match e {
        Expr::PartialAtom(target, vary) => crate::differential::partial_differential(target, vary, decls, cfg),
        _ => map_children(e, &mut |c| split_full_partials(c, decls, cfg)),
    }
}

fn d(y: &Expr, x: &str, n: u32, decls: &DependencyDecls, cfg: &DiffConfig) -> Result<Expr> {
    expand_derivative(y, x, n, decls, cfg)
}

/// `dx/dy = 1 / (dy/dx)`.
pub fn inverse_first(y: &str, x: &str, decls: &DependencyDecls, cfg: &DiffConfig) -> Result<Identity> {
    let lhs = d(&Expr::var(x), y, 1, decls, cfg)?;
    let rhs = normalize(&d(&Expr::var(y), x, 1, decls, cfg)?.recip())?;
    Ok(Identity { name: "inverse1".into(), lhs, rhs, decls: decls.clone(), mode: CheckMode::Exact })
}

/// `−D²ₓy · (D¹ₓy)⁻³ = D²_y x`.
pub fn inverse_second(y: &str, x: &str, decls: &DependencyDecls, cfg: &DiffConfig) -> Result<Identity> {
    let (yv, xv) = (Expr::var(y), Expr::var(x));
    let lhs = normalize(&(-(d(&yv, x, 2, decls, cfg)? * d(&yv, x, 1, decls, cfg)?.powi(-3))))?;
    let rhs = d(&xv, y, 2, decls, cfg)?;
    Ok(Identity { name: "inverse2".into(), lhs, rhs, decls: decls.clone(), mode: CheckMode::Exact })
}

/// `(D²ₓy)(D¹ₜx)² + (D¹ₓy)(D²ₜx) = D²ₜy`.
pub fn chain_second(y: &str, x: &str, t: &str, decls: &DependencyDecls, cfg: &DiffConfig) -> Result<Identity> {
    let (yv, xv) = (Expr::var(y), Expr::var(x));
    let lhs = normalize(
        &(d(&yv, x, 2, decls, cfg)? * d(&xv, t, 1, decls, cfg)?.powi(2)
            + d(&yv, x, 1, decls, cfg)? * d(&xv, t, 2, decls, cfg)?),
    )?;
    let rhs = d(&yv, t, 2, decls, cfg)?;
    Ok(Identity { name: "chain2".into(), lhs, rhs, decls: decls.clone(), mode: CheckMode::Exact })
}

/// The product `(D²ₓy)(D¹ₜx)²` set equal to `D²ₜy`, as old notation suggests.
pub fn naive_chain_second(y: &str, x: &str, t: &str, decls: &DependencyDecls, cfg: &DiffConfig) -> Result<Identity> {
    let (yv, xv) = (Expr::var(y), Expr::var(x));
    let lhs = normalize(&(d(&yv, x, 2, decls, cfg)? * d(&xv, t, 1, decls, cfg)?.powi(2)))?;
    let rhs = d(&yv, t, 2, decls, cfg)?;
    Ok(Identity { name: "naive_chain2_counterexample".into(), lhs, rhs, decls: decls.clone(), mode: CheckMode::Exact })
}

/// The change in `f` when every argument varies.
pub fn full_change(f: &str, decls: &DependencyDecls) -> Result<Expr> {
    let args = decls.function_args(f).ok_or_else(|| DiffError::UnknownFunction(f.to_string()))?;
    let target = Expr::Func(f.to_string(), args.iter().map(|a| Expr::var(a)).collect());
    Ok(Expr::PartialAtom(Box::new(target), args.to_vec()))
}

/// `Σᵥ ∂(f, v)/dv · dv/dt = df/dt`, where `df` is the change in `f` with every argument
/// varying. The sides agree to leading order.
pub fn chain_multivariate(f: &str, t: &str, decls: &DependencyDecls, cfg: &DiffConfig) -> Result<Identity> {
    let args = decls.function_args(f).ok_or_else(|| DiffError::UnknownFunction(f.to_string()))?;
    let target = Expr::Func(f.to_string(), args.iter().map(|a| Expr::var(a)).collect());
    let dt_inv = Expr::diff(t, 1).recip();
    let terms = args
        .iter()
        .map(|v| {
            let partial = Expr::PartialAtom(Box::new(target.clone()), vec![v.clone()]);
            Ok(partial * Expr::diff(v, 1).recip() * d(&Expr::var(v), t, 1, decls, cfg)?)
        })
        .collect::<Result<Vec<_>>>()?;
    let lhs = normalize(&Expr::Add(terms))?;
    let rhs = normalize(&(full_change(f, decls)? * dt_inv))?;
    Ok(Identity { name: "chain_multi".into(), lhs, rhs, decls: decls.clone(), mode: CheckMode::LeadingOrder })
}

/// Old notation writes every `∂f` the same way. Reading each as the full change `df`,
/// the chain rule `df/dt = ∂f/∂x·∂x/∂t + ∂f/∂y·∂y/∂t` cancels to `df/dt = 2·df/dt`.
/// Dividing through by `df/dt` gives `1 = 2`.
pub fn old_notation_contradiction(f: &str, t: &str, decls: &DependencyDecls, cfg: &DiffConfig) -> Result<Identity> {
    let args = decls.function_args(f).ok_or_else(|| DiffError::UnknownFunction(f.to_string()))?;
    let df = full_change(f, decls)?;
    let dt_inv = Expr::diff(t, 1).recip();
    let df_dt = df.clone() * dt_inv;
    let chain = args
        .iter()
        .map(|v| Ok(df.clone() * Expr::diff(v, 1).recip() * d(&Expr::var(v), t, 1, decls, cfg)?))
        .collect::<Result<Vec<_>>>()?;
    let lhs = normalize(&(df_dt.clone() / df_dt.clone()))?;
    let rhs = normalize(&(Expr::Add(chain) / df_dt))?;
    Ok(Identity { name: "contradiction_1eq2".into(), lhs, rhs, decls: decls.clone(), mode: CheckMode::Exact })
}

/// `D²ₓx = d²x/dx² − (dx/dx)(d²x/dx²) = 0`. The left side is kept unsimplified so numeric
/// evaluation exercises both terms.
pub fn second_derivative_of_self(x: &str, decls: &DependencyDecls, cfg: &DiffConfig) -> Result<Identity> {
    let placeholder = "#y";
    let form = d(&Expr::var(placeholder), x, 2, decls, cfg)?;
    let lhs = raw_rename(&form, placeholder, x);
    Ok(Identity { name: "dxdx_zero".into(), lhs, rhs: Expr::zero(), decls: decls.clone(), mode: CheckMode::Exact })
}

fn raw_rename(e: &Expr, from: &str, to: &str) -> Expr {
    e.substitute_raw(&BTreeMap::from([(from.to_string(), Expr::var(to))]))
}
