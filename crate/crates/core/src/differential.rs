//! The differential `d` as a graded derivation, the partial differential `∂(f, S)`,
//! total differentials and principal-part reduction.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::decls::DependencyDecls;
use crate::expr::{Expr, Grade};
use crate::normalize::{normalize, NormalizeError};
use crate::render;

/// Placeholder for the argument inside an elementary derivative template.
pub const ARG: &str = "#0";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiffError {
    #[error("differential order {order} exceeds the limit {limit}")]
    OrderGuardExceeded { order: u32, limit: u32 },
    #[error("order must be at least 1")]
    ZeroOrder,
    #[error("cannot take the differential of {0}; expand it first")]
    UnsupportedDifferential(String),
    #[error("`{var}` is not an argument of `{function}`")]
    VaryVarNotArgument { var: String, function: String },
    #[error("unknown function `{0}`")]
    UnknownFunction(String),
    #[error("`{function}` expects {expected} argument(s), got {found}")]
    Arity { function: String, expected: usize, found: usize },
    #[error(transparent)]
    Normalize(#[from] NormalizeError),
}

pub type Result<T> = std::result::Result<T, DiffError>;

/// Derivative of a unary elementary function, written in terms of [`ARG`].
#[derive(Debug, Clone, PartialEq)]
pub struct Elementary {
    pub derivative: Expr,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiffConfig {
    pub elementary: BTreeMap<String, Elementary>,
    /// Largest order of any `d^n x` the engine will produce.
    pub max_order: u32,
    /// Largest order accepted by derivative expansion.
    pub max_derivative_order: u32,
}

impl Default for DiffConfig {
    fn default() -> Self {
        let arg = || Expr::var(ARG);
        let table = [
            ("sin", Expr::func("cos", vec![arg()])),
            ("cos", -Expr::func("sin", vec![arg()])),
            ("exp", Expr::func("exp", vec![arg()])),
            ("ln", arg().recip()),
        ];
        let elementary = table
            .into_iter()
            .map(|(n, d)| (n.to_string(), Elementary { derivative: normalize(&d).expect("static template") }))
            .collect();
        DiffConfig { elementary, max_order: 6, max_derivative_order: 4 }
    }
}

impl DiffConfig {
    pub fn is_elementary(&self, name: &str) -> bool {
        self.elementary.contains_key(name)
    }
}

/// `d(e)`. The result is normalized and has grade `grade(e) + 1`.
pub fn differential(e: &Expr, decls: &DependencyDecls, cfg: &DiffConfig) -> Result<Expr> {
    let raw = derive(e, None, decls, cfg)?;
    Ok(normalize(&raw)?)
}

/// `dⁿ(e)`, normalizing between steps.
pub fn nth_differential(e: &Expr, n: u32, decls: &DependencyDecls, cfg: &DiffConfig) -> Result<Expr> {
    if n == 0 {
        return Err(DiffError::ZeroOrder);
    }
    let mut cur = normalize(e)?;
    for _ in 0..n {
        cur = differential(&cur, decls, cfg)?;
    }
    Ok(cur)
}

/// `∂(f, vary)`.
///
/// On an opaque declared function this is a `PartialAtom`, except that varying every
/// argument gives the total differential. On a concrete expression it is the differential
/// with every variable outside `vary` held fixed.
pub fn partial_differential(f: &Expr, vary: &[String], decls: &DependencyDecls, cfg: &DiffConfig) -> Result<Expr> {
    if let Expr::Func(name, args) = f {
        if !cfg.is_elementary(name) {
            let arg_names = opaque_args(name, args, decls)?;
            return opaque_partial(f, name, &arg_names, vary);
        }
    }
    let free = f.free_vars();
    for v in vary {
        if !free.contains(v) {
            return Err(DiffError::VaryVarNotArgument { var: v.clone(), function: render::text(f) });
        }
    }
    let mask: BTreeSet<String> = vary.iter().cloned().collect();
    Ok(normalize(&derive(f, Some(&mask), decls, cfg)?)?)
}

/// Sum of the singleton partial differentials over the arguments of `f`, or over its
/// free variables when `f` is a concrete expression.
pub fn total_differential(f: &Expr, decls: &DependencyDecls, cfg: &DiffConfig) -> Result<Expr> {
    let vars: Vec<String> = match f {
        Expr::Func(name, args) if !cfg.is_elementary(name) => opaque_args(name, args, decls)?,
        _ => f.free_vars().into_iter().collect(),
    };
    let mut terms = Vec::with_capacity(vars.len());
    for v in vars {
        terms.push(partial_differential(f, &[v], decls, cfg)?);
    }
    Ok(normalize(&Expr::Add(terms))?)
}

/// Keeps only the terms of least grade.
pub fn principal_reduce(e: &Expr) -> Result<Expr> {
    let n = normalize(e)?;
    let Expr::Add(terms) = &n else {
        return Ok(n);
    };
    let grades: Vec<Option<i64>> = terms
        .iter()
        .map(|t| match t.grade() {
            Grade::Homogeneous(g) => Some(g),
            Grade::Mixed => None,
        })
        .collect();
    let Some(least) = grades.iter().flatten().min().copied() else {
        return Ok(n);
    };
    let kept =
        terms.iter().zip(&grades).filter(|(_, g)| g.is_none_or(|g| g == least)).map(|(t, _)| t.clone()).collect();
    Ok(normalize(&Expr::Add(kept))?)
}

fn opaque_args(name: &str, args: &[Expr], decls: &DependencyDecls) -> Result<Vec<String>> {
    let declared = decls.function_args(name).ok_or_else(|| DiffError::UnknownFunction(name.to_string()))?;
    if declared.len() != args.len() {
        return Err(DiffError::Arity { function: name.to_string(), expected: declared.len(), found: args.len() });
    }
    let mut names = Vec::with_capacity(args.len());
    for a in args {
        match a {
            Expr::Var(v) if !names.contains(v) => names.push(v.clone()),
            _ => {
                return Err(DiffError::UnsupportedDifferential(format!(
                    "{}: opaque functions take distinct variables as arguments",
                    render::text(&Expr::Func(name.to_string(), args.to_vec()))
                )))
            }
        }
    }
    Ok(names)
}

fn opaque_partial(f: &Expr, name: &str, args: &[String], vary: &[String]) -> Result<Expr> {
    for v in vary {
        if !args.contains(v) {
            return Err(DiffError::VaryVarNotArgument { var: v.clone(), function: name.to_string() });
        }
    }
    let chosen: Vec<String> = args.iter().filter(|a| vary.contains(a)).cloned().collect();
    if chosen.is_empty() {
        return Ok(Expr::zero());
    }
    if chosen.len() == args.len() && args.len() > 1 {
        let terms = chosen.into_iter().map(|a| Expr::PartialAtom(Box::new(f.clone()), vec![a])).collect();
        return Ok(normalize(&Expr::Add(terms))?);
    }
    Ok(Expr::PartialAtom(Box::new(f.clone()), chosen))
}

/// Raw derivation. With a mask, variables outside it are constants.
fn derive(e: &Expr, mask: Option<&BTreeSet<String>>, decls: &DependencyDecls, cfg: &DiffConfig) -> Result<Expr> {
    let varies = |v: &str| mask.is_none_or(|m| m.contains(v));
    Ok(match e {
        Expr::Const(_) => Expr::zero(),
        Expr::Var(v) => {
            if varies(v) {
                Expr::DiffAtom(v.clone(), 1)
            } else {
                Expr::zero()
            }
        }
        Expr::DiffAtom(v, n) => {
            if !varies(v) {
                return Ok(Expr::zero());
            }
            let order = n + 1;
            if order > cfg.max_order {
                return Err(DiffError::OrderGuardExceeded { order, limit: cfg.max_order });
            }
            Expr::DiffAtom(v.clone(), order)
        }
        Expr::Add(ts) => Expr::Add(ts.iter().map(|t| derive(t, mask, decls, cfg)).collect::<Result<_>>()?),
        Expr::Mul(fs) => {
            let mut terms = Vec::with_capacity(fs.len());
            for i in 0..fs.len() {
                let df = derive(&fs[i], mask, decls, cfg)?;
                if df.is_zero() {
                    continue;
                }
                let mut factors: Vec<Expr> =
                    fs.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, f)| f.clone()).collect();
                factors.push(df);
                terms.push(Expr::Mul(factors));
            }
            Expr::Add(terms)
        }
        Expr::Pow(b, r) => {
            let db = derive(b, mask, decls, cfg)?;
            if db.is_zero() {
                return Ok(Expr::zero());
            }
            let lowered = r - crate::rational::int(1);
            Expr::Mul(vec![Expr::Const(r.clone()), Expr::Pow(b.clone(), lowered), db])
        }
        Expr::Func(name, args) => {
            if let Some(el) = cfg.elementary.get(name) {
                if args.len() != 1 {
                    return Err(DiffError::Arity { function: name.clone(), expected: 1, found: args.len() });
                }
                let da = derive(&args[0], mask, decls, cfg)?;
                if da.is_zero() {
                    return Ok(Expr::zero());
                }
                let outer = el.derivative.substitute_raw(&BTreeMap::from([(ARG.to_string(), args[0].clone())]));
                Expr::Mul(vec![outer, da])
            } else {
                let names = opaque_args(name, args, decls)?;
                match mask {
                    None => {
                        Expr::Add(names.into_iter().map(|a| Expr::PartialAtom(Box::new(e.clone()), vec![a])).collect())
                    }
                    Some(m) => {
                        let vary: Vec<String> = names.iter().filter(|a| m.contains(*a)).cloned().collect();
                        opaque_partial(e, name, &names, &vary)?
                    }
                }
            }
        }
        Expr::DerivAtom(target, x, n) => {
            let expanded = crate::derivative::expand_derivative(target, x, *n, decls, cfg)?;
            derive(&expanded, mask, decls, cfg)?
        }
        Expr::PartialAtom(..) => {
            return Err(DiffError::UnsupportedDifferential(render::text(e)));
        }
    })
}
