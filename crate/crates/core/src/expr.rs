//! Immutable expression trees with differential, partial-differential and
//! Arbogast-derivative atoms.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops;

use num::{One, Zero};

use crate::rational::{self, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Const(Rational),
    Var(String),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Pow(Box<Expr>, Rational),
    Func(String, Vec<Expr>),
    /// `d^n x`
    DiffAtom(String, u32),
    /// `∂(f, x₁, …)`: change in `f` when only the listed variables vary.
    PartialAtom(Box<Expr>, Vec<String>),
    /// `D_x^n y`, unexpanded.
    DerivAtom(Box<Expr>, String, u32),
}

/// Total differential order of a term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Grade {
    Homogeneous(i64),
    Mixed,
}

impl fmt::Display for Grade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Grade::Homogeneous(g) => write!(f, "{g}"),
            Grade::Mixed => f.write_str("mixed"),
        }
    }
}

impl Expr {
    pub fn int(n: i64) -> Expr {
        Expr::Const(rational::int(n))
    }

    pub fn rational(r: Rational) -> Expr {
        Expr::Const(r)
    }

    pub fn zero() -> Expr {
        Expr::int(0)
    }

    pub fn one() -> Expr {
        Expr::int(1)
    }

    pub fn var(name: &str) -> Expr {
        Expr::Var(name.to_string())
    }

    pub fn diff(name: &str, order: u32) -> Expr {
        Expr::DiffAtom(name.to_string(), order)
    }

    /// `∂(f(args…), vary…)` for a function applied to variables.
    pub fn partial(func: &str, args: &[&str], vary: &[&str]) -> Expr {
        Expr::PartialAtom(
            Box::new(Expr::func(func, args.iter().map(|a| Expr::var(a)).collect())),
            vary.iter().map(|v| v.to_string()).collect(),
        )
    }

    pub fn deriv(target: Expr, wrt: &str, order: u32) -> Expr {
        Expr::DerivAtom(Box::new(target), wrt.to_string(), order)
    }

    pub fn func(name: &str, args: Vec<Expr>) -> Expr {
        Expr::Func(name.to_string(), args)
    }

    pub fn pow(self, e: Rational) -> Expr {
        Expr::Pow(Box::new(self), e)
    }

    pub fn powi(self, e: i64) -> Expr {
        self.pow(rational::int(e))
    }

    pub fn recip(self) -> Expr {
        self.powi(-1)
    }

    pub fn sum(terms: Vec<Expr>) -> Expr {
        Expr::Add(terms)
    }

    pub fn product(factors: Vec<Expr>) -> Expr {
        Expr::Mul(factors)
    }

    pub fn as_const(&self) -> Option<&Rational> {
        match self {
            Expr::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn as_var(&self) -> Option<&str> {
        match self {
            Expr::Var(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Const(c) if c.is_zero())
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Expr::Const(c) if c.is_one())
    }

    fn tag(&self) -> u8 {
        match self {
            Expr::Const(_) => 0,
            Expr::Var(_) => 1,
            Expr::Func(..) => 2,
            Expr::Add(_) => 3,
            Expr::Mul(_) => 4,
            Expr::Pow(..) => 5,
            Expr::DerivAtom(..) => 6,
            Expr::DiffAtom(..) => 7,
            Expr::PartialAtom(..) => 8,
        }
    }

    /// Grade of a normalized expression.
    pub fn grade(&self) -> Grade {
        match self {
            Expr::Const(_) | Expr::Var(_) | Expr::Func(..) | Expr::DerivAtom(..) => Grade::Homogeneous(0),
            Expr::DiffAtom(_, n) => Grade::Homogeneous(*n as i64),
            Expr::PartialAtom(..) => Grade::Homogeneous(1),
            Expr::Mul(fs) => {
                let mut total = 0;
                for f in fs {
                    match f.grade() {
                        Grade::Homogeneous(g) => total += g,
                        Grade::Mixed => return Grade::Mixed,
                    }
                }
                Grade::Homogeneous(total)
            }
            Expr::Pow(b, e) => match b.grade() {
                Grade::Homogeneous(g) => {
                    let scaled = e * rational::int(g);
                    match rational::as_small_int(&scaled) {
                        Some(v) => Grade::Homogeneous(v),
                        None => Grade::Mixed,
                    }
                }
                Grade::Mixed => Grade::Mixed,
            },
            Expr::Add(ts) => {
                let mut grades = ts.iter().map(Expr::grade);
                let first = match grades.next() {
                    Some(g) => g,
                    None => return Grade::Homogeneous(0),
                };
                if grades.all(|g| g == first) {
                    first
                } else {
                    Grade::Mixed
                }
            }
        }
    }

    /// Variables the expression depends on; differential atoms contribute their targets.
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(v) | Expr::DiffAtom(v, _) => {
                out.insert(v.clone());
            }
            Expr::Add(xs) | Expr::Mul(xs) | Expr::Func(_, xs) => xs.iter().for_each(|x| x.collect_vars(out)),
            Expr::Pow(b, _) => b.collect_vars(out),
            Expr::PartialAtom(t, vs) => {
                t.collect_vars(out);
                out.extend(vs.iter().cloned());
            }
            Expr::DerivAtom(t, x, _) => {
                t.collect_vars(out);
                out.insert(x.clone());
            }
        }
    }

    /// Largest differential order appearing in the tree.
    pub fn max_diff_order(&self) -> u32 {
        match self {
            Expr::DiffAtom(_, n) => *n,
            Expr::PartialAtom(..) => 1,
            Expr::DerivAtom(t, _, n) => t.max_diff_order() + n,
            Expr::Const(_) | Expr::Var(_) => 0,
            Expr::Add(xs) | Expr::Mul(xs) | Expr::Func(_, xs) => xs.iter().map(Expr::max_diff_order).max().unwrap_or(0),
            Expr::Pow(b, _) => b.max_diff_order(),
        }
    }

    pub fn contains_deriv_atom(&self) -> bool {
        match self {
            Expr::DerivAtom(..) => true,
            Expr::Const(_) | Expr::Var(_) | Expr::DiffAtom(..) => false,
            Expr::Add(xs) | Expr::Mul(xs) | Expr::Func(_, xs) => xs.iter().any(Expr::contains_deriv_atom),
            Expr::Pow(b, _) => b.contains_deriv_atom(),
            Expr::PartialAtom(t, _) => t.contains_deriv_atom(),
        }
    }

    /// Structural substitution of variables. The result is not normalized.
    ///
    /// Atoms that name a variable (`d^n x`, the varied set of `∂`, the `wrt` of `D`) are
    /// renamed when the binding is itself a variable and left untouched otherwise.
    pub fn substitute_raw(&self, bindings: &BTreeMap<String, Expr>) -> Expr {
        let rename = |v: &String| match bindings.get(v) {
            Some(Expr::Var(w)) => w.clone(),
            _ => v.clone(),
        };
        match self {
            Expr::Const(_) => self.clone(),
            Expr::Var(v) => bindings.get(v).cloned().unwrap_or_else(|| self.clone()),
            Expr::Add(xs) => Expr::Add(xs.iter().map(|x| x.substitute_raw(bindings)).collect()),
            Expr::Mul(xs) => Expr::Mul(xs.iter().map(|x| x.substitute_raw(bindings)).collect()),
            Expr::Func(n, xs) => Expr::Func(n.clone(), xs.iter().map(|x| x.substitute_raw(bindings)).collect()),
            Expr::Pow(b, e) => Expr::Pow(Box::new(b.substitute_raw(bindings)), e.clone()),
            Expr::DiffAtom(v, n) => Expr::DiffAtom(rename(v), *n),
            Expr::PartialAtom(t, vs) => {
                Expr::PartialAtom(Box::new(t.substitute_raw(bindings)), vs.iter().map(rename).collect())
            }
            Expr::DerivAtom(t, x, n) => Expr::DerivAtom(Box::new(t.substitute_raw(bindings)), rename(x), *n),
        }
    }
}

fn cmp_slices(a: &[Expr], b: &[Expr]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        let c = x.cmp(y);
        if c != Ordering::Equal {
            return c;
        }
    }
    a.len().cmp(&b.len())
}

/// Fixed structural order: constructor tag, then names, then children.
/// Differential atoms order by differential order before target name.
impl Ord for Expr {
    fn cmp(&self, other: &Self) -> Ordering {
        let t = self.tag().cmp(&other.tag());
        if t != Ordering::Equal {
            return t;
        }
        match (self, other) {
            (Expr::Const(a), Expr::Const(b)) => a.cmp(b),
            (Expr::Var(a), Expr::Var(b)) => a.cmp(b),
            (Expr::Func(n, xs), Expr::Func(m, ys)) => n.cmp(m).then_with(|| cmp_slices(xs, ys)),
            (Expr::Add(xs), Expr::Add(ys)) | (Expr::Mul(xs), Expr::Mul(ys)) => cmp_slices(xs, ys),
            (Expr::Pow(b1, e1), Expr::Pow(b2, e2)) => b1.cmp(b2).then_with(|| e1.cmp(e2)),
            (Expr::DerivAtom(t1, x1, n1), Expr::DerivAtom(t2, x2, n2)) => {
                t1.cmp(t2).then_with(|| x1.cmp(x2)).then_with(|| n1.cmp(n2))
            }
            (Expr::DiffAtom(x1, n1), Expr::DiffAtom(x2, n2)) => n1.cmp(n2).then_with(|| x1.cmp(x2)),
            (Expr::PartialAtom(t1, v1), Expr::PartialAtom(t2, v2)) => t1.cmp(t2).then_with(|| v1.cmp(v2)),
            _ => unreachable!("tags compared equal"),
        }
    }
}

impl PartialOrd for Expr {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

// Raw builders. They do not normalize; call `normalize` on the result.

impl ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::Add(vec![self, rhs])
    }
}

impl ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::Add(vec![self, -rhs])
    }
}

impl ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::Mul(vec![self, rhs])
    }
}

impl ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        Expr::Mul(vec![self, rhs.recip()])
    }
}

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Mul(vec![Expr::int(-1), self])
    }
}
