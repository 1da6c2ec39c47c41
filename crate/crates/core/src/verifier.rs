//! Jet evaluation and identity verification.
//!
//! A jet assignment gives every variable as a polynomial in its single dependency, down to
//! a hidden parameter `q`. Step `j` advances `q` to `q0 + j·ε`, so `dⁿx` evaluates to the
//! forward difference `Σⱼ (−1)^(n−j)·C(n, j)·x(q0 + j·ε)`. All arithmetic is exact in the
//! truncated Levi-Civita field.

use std::collections::{BTreeMap, HashMap};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::decls::DependencyDecls;
use crate::derivative::{expand_atoms, CheckMode, Identity};
use crate::differential::DiffConfig;
use crate::expr::Expr;
use crate::hyperreal::{HyperrealError, LeviCivitaNumber, StandardPart, Valuation, DEFAULT_TRUNC};
use crate::normalize::normalize;
use crate::parser::{self, apply_decl, lines, parse_embedded, syntax_at, ParseError, ParseErrorKind};
use crate::rational::{self, fmt_rational, Rational};
use crate::render;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("insufficient truncation: {0}")]
    InsufficientTruncation(String),
    #[error("variable `{0}` has no polynomial in the jet assignment")]
    UnboundVariable(String),
    #[error("function `{0}` has no body in the jet assignment")]
    UnboundFunction(String),
    #[error("value is not representable: {0}")]
    NonRational(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("cannot evaluate {0}")]
    Unsupported(String),
}

impl From<HyperrealError> for EvalError {
    fn from(e: HyperrealError) -> Self {
        match e {
            HyperrealError::DivisionByZero => EvalError::DivisionByZero,
            HyperrealError::NonRational(m) => EvalError::NonRational(m),
            HyperrealError::IndeterminateOrder => EvalError::InsufficientTruncation("order is undecided".into()),
            HyperrealError::Undetermined(m) => {
                EvalError::InsufficientTruncation(format!("result is only known through ε^{m}"))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JetAssignment {
    /// Coefficients in ascending order, in the variable's dependency (or `q` for a root).
    pub polys: BTreeMap<String, Vec<Rational>>,
    /// Bodies of declared functions, written in their declared parameters.
    pub bodies: BTreeMap<String, Expr>,
    pub q0: Rational,
    pub trunc: i64,
}

impl Default for JetAssignment {
    fn default() -> Self {
        JetAssignment { polys: BTreeMap::new(), bodies: BTreeMap::new(), q0: rational::int(0), trunc: DEFAULT_TRUNC }
    }
}

impl JetAssignment {
    pub fn with_poly(mut self, v: &str, coeffs: &[i64]) -> Self {
        self.polys.insert(v.to_string(), coeffs.iter().map(|c| rational::int(*c)).collect());
        self
    }

    pub fn at(mut self, q0: Rational) -> Self {
        self.q0 = q0;
        self
    }

    pub fn with_trunc(mut self, m: i64) -> Self {
        self.trunc = m;
        self
    }

    pub fn with_body(mut self, f: &str, body: Expr) -> Self {
        self.bodies.insert(f.to_string(), body);
        self
    }
}

struct Evaluator<'a> {
    a: &'a JetAssignment,
    decls: &'a DependencyDecls,
    cache: HashMap<(String, u32), LeviCivitaNumber>,
}

impl<'a> Evaluator<'a> {
    /// The variable's value at step `j`.
    fn value(&mut self, v: &str, j: u32) -> Result<LeviCivitaNumber, EvalError> {
        if let Some(hit) = self.cache.get(&(v.to_string(), j)) {
            return Ok(hit.clone());
        }
        let m = self.a.trunc;
        let step = || {
            let q = LeviCivitaNumber::from_rational(self.a.q0.clone()) + LeviCivitaNumber::from_int(j as i64).shift(1);
            q.truncate(m)
        };
        let out = match self.a.polys.get(v) {
            None if self.decls.base.as_deref() == Some(v) => step(),
            None => return Err(EvalError::UnboundVariable(v.to_string())),
            Some(coeffs) => {
                let arg = match self.decls.parents(v) {
                    [] => step(),
                    [p] => {
                        let p = p.clone();
                        self.value(&p, j)?
                    }
                    _ => {
                        return Err(EvalError::Unsupported(format!(
                            "`{v}`: a variable with several dependencies cannot be given by one polynomial"
                        )))
                    }
                };
                horner(coeffs, &arg, m)
            }
        };
        self.cache.insert((v.to_string(), j), out.clone());
        Ok(out)
    }

    fn forward_difference(&mut self, v: &str, n: u32) -> Result<LeviCivitaNumber, EvalError> {
        let mut acc = LeviCivitaNumber::zero();
        for j in 0..=n {
            let c = rational::binomial(n as u64, j as u64);
            let sign = if (n - j).is_multiple_of(2) { 1 } else { -1 };
            let term = self.value(v, j)?.scale(&(Rational::from_integer(c) * rational::int(sign)));
            acc = &acc + &term;
        }
        Ok(acc.truncate(self.a.trunc))
    }

    fn eval(
        &mut self,
        e: &Expr,
        env: Option<&BTreeMap<String, LeviCivitaNumber>>,
    ) -> Result<LeviCivitaNumber, EvalError> {
        Ok(match e {
            Expr::Const(c) => LeviCivitaNumber::from_rational(c.clone()),
            Expr::Var(v) => match env {
                Some(env) => env.get(v).cloned().ok_or_else(|| EvalError::UnboundVariable(v.clone()))?,
                None => self.value(v, 0)?,
            },
            Expr::DiffAtom(v, n) => {
                if env.is_some() {
                    return Err(EvalError::Unsupported(format!("{} inside a function body", render::text(e))));
                }
                self.forward_difference(v, *n)?
            }
            Expr::Add(ts) => {
                let mut acc = LeviCivitaNumber::zero();
                for t in ts {
                    acc = &acc + &self.eval(t, env)?;
                }
                acc
            }
            Expr::Mul(fs) => {
                let mut acc = LeviCivitaNumber::one();
                for f in fs {
                    acc = &acc * &self.eval(f, env)?;
                }
                acc
            }
            Expr::Pow(b, r) => self.eval(b, env)?.pow_rational(r)?,
            Expr::Func(name, args) => {
                let vals = args.iter().map(|x| self.eval(x, env)).collect::<Result<Vec<_>, _>>()?;
                self.apply(name, vals)?
            }
            Expr::PartialAtom(target, vary) => {
                if env.is_some() {
                    return Err(EvalError::Unsupported(format!("{} inside a function body", render::text(e))));
                }
                let Expr::Func(name, args) = target.as_ref() else {
                    return Err(EvalError::Unsupported(render::text(e)));
                };
                let mut moved = Vec::with_capacity(args.len());
                let mut fixed = Vec::with_capacity(args.len());
                for a in args {
                    let Expr::Var(v) = a else {
                        return Err(EvalError::Unsupported(render::text(e)));
                    };
                    let base = self.value(v, 0)?;
                    moved.push(if vary.contains(v) { self.value(v, 1)? } else { base.clone() });
                    fixed.push(base);
                }
                let after = self.apply(name, moved)?;
                let before = self.apply(name, fixed)?;
                &after - &before
            }
            Expr::DerivAtom(..) => return Err(EvalError::Unsupported(render::text(e))),
        })
    }

    fn apply(&mut self, name: &str, vals: Vec<LeviCivitaNumber>) -> Result<LeviCivitaNumber, EvalError> {
        let unary = |vals: &[LeviCivitaNumber]| {
            if vals.len() == 1 {
                Ok(vals[0].clone())
            } else {
                Err(EvalError::Unsupported(format!("{name} with {} arguments", vals.len())))
            }
        };
        match name {
            "sin" => return Ok(unary(&vals)?.sin()?),
            "cos" => return Ok(unary(&vals)?.cos()?),
            "exp" => return Ok(unary(&vals)?.exp()?),
            "ln" => return Ok(unary(&vals)?.ln()?),
            _ => {}
        }
        let body = self.a.bodies.get(name).ok_or_else(|| EvalError::UnboundFunction(name.to_string()))?.clone();
        let params = self.decls.function_args(name).ok_or_else(|| EvalError::UnboundFunction(name.to_string()))?;
        if params.len() != vals.len() {
            return Err(EvalError::Unsupported(format!("{name} with {} arguments", vals.len())));
        }
        let env: BTreeMap<String, LeviCivitaNumber> = params.iter().cloned().zip(vals).collect();
        self.eval(&body, Some(&env))
    }
}

fn horner(coeffs: &[Rational], x: &LeviCivitaNumber, m: i64) -> LeviCivitaNumber {
    let mut acc = LeviCivitaNumber::zero();
    for c in coeffs.iter().rev() {
        acc = (&(&acc * x) + &LeviCivitaNumber::from_rational(c.clone())).truncate(m);
    }
    acc.truncate(m)
}

/// Evaluates `e` under the jet assignment. Derivative atoms are expanded first.
pub fn eval_jet(e: &Expr, a: &JetAssignment, decls: &DependencyDecls) -> Result<LeviCivitaNumber, EvalError> {
    let e = if e.contains_deriv_atom() {
        expand_atoms(e, decls, &DiffConfig::default()).map_err(|err| EvalError::Unsupported(err.to_string()))?
    } else {
        e.clone()
    };
    let needed = e.max_diff_order() as i64 + 2;
    if a.trunc < needed {
        return Err(EvalError::InsufficientTruncation(format!(
            "order {} needs a window of at least {needed}, have {}",
            e.max_diff_order(),
            a.trunc
        )));
    }
    let mut ev = Evaluator { a, decls, cache: HashMap::new() };
    let out = ev.eval(&e, None)?;
    if let Some(m) = out.trunc_order() {
        if m < 0 {
            return Err(EvalError::InsufficientTruncation(format!("result is only known through ε^{m}")));
        }
    }
    Ok(out)
}

/// Parses a jets file: declaration lines plus `poly x c0 c1 …`, `at q0` and
/// `body f <expr>`. Declarations in the file are merged into `decls`.
pub fn parse_jets(src: &str, decls: &DependencyDecls) -> Result<(DependencyDecls, JetAssignment), ParseError> {
    let mut own = DependencyDecls::new();
    let mut seen = BTreeMap::new();
    let all = lines(src);
    let mut rest = Vec::new();
    for line in &all {
        if !apply_decl(src, line, &mut own, &mut seen)? {
            rest.push(line);
        }
    }
    parser::validate_decls(src, &own, &seen)?;
    let mut merged = decls.clone();
    merged.merge(&own).map_err(|e| ParseError {
        offset: 0,
        line: 1,
        column: 1,
        expected: String::new(),
        found: String::new(),
        kind: ParseErrorKind::Decl(e),
    })?;
    let mut a = JetAssignment::default();
    let mut have_at = false;
    for line in rest {
        let (kw, kw_at) = line.words[0];
        match kw {
            "poly" => {
                let Some(&(v, v_at)) = line.words.get(1) else {
                    return Err(syntax_at(src, kw_at + kw.len(), "a variable name", "end of line"));
                };
                if line.words.len() < 3 {
                    return Err(syntax_at(src, v_at + v.len(), "a coefficient", "end of line"));
                }
                let mut coeffs = Vec::new();
                for (w, at) in &line.words[2..] {
                    coeffs.push(
                        rational::parse_rational(w)
                            .ok_or_else(|| syntax_at(src, *at, "a rational", &format!("`{w}`")))?,
                    );
                }
                if a.polys.insert(v.to_string(), coeffs).is_some() {
                    return Err(dup(src, v, v_at));
                }
            }
            "at" => {
                // `at q0 <rational>` is accepted as a spelled-out form of `at <rational>`.
                let skip = if line.words.get(1).is_some_and(|(w, _)| *w == "q0") { 1 } else { 0 };
                let Some(&(w, at)) = line.words.get(1 + skip) else {
                    return Err(syntax_at(src, kw_at + kw.len(), "a rational", "end of line"));
                };
                if let Some((extra, at)) = line.words.get(2 + skip) {
                    return Err(syntax_at(src, *at, "end of line", &format!("`{extra}`")));
                }
                if have_at {
                    return Err(dup(src, "at", kw_at));
                }
                a.q0 =
                    rational::parse_rational(w).ok_or_else(|| syntax_at(src, at, "a rational", &format!("`{w}`")))?;
                have_at = true;
            }
            "body" => {
                let Some(&(f, f_at)) = line.words.get(1) else {
                    return Err(syntax_at(src, kw_at + kw.len(), "a function name", "end of line"));
                };
                if merged.function_args(f).is_none() {
                    return Err(ParseError {
                        kind: ParseErrorKind::UnknownFunction(f.to_string()),
                        ..syntax_at(src, f_at, "", "")
                    });
                }
                let (text, at) = line.rest;
                let body = parse_embedded(src, text, at, &merged)?;
                if a.bodies.insert(f.to_string(), body).is_some() {
                    return Err(dup(src, f, f_at));
                }
            }
            other => {
                return Err(syntax_at(
                    src,
                    kw_at,
                    "`base`, `var`, `depends`, `function`, `poly`, `at` or `body`",
                    &format!("`{other}`"),
                ))
            }
        }
    }
    if !have_at {
        return Err(syntax_at(src, src.len(), "an `at` line", "end of input"));
    }
    Ok((merged, a))
}

fn dup(src: &str, name: &str, at: usize) -> ParseError {
    let base = syntax_at(src, at, "", "");
    let line = base.line;
    ParseError {
        kind: ParseErrorKind::Decl(crate::decls::DeclError::DuplicateDeclaration { name: name.to_string(), line }),
        ..base
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SymbolicVerdict {
    pub pass: bool,
    /// `lhs − rhs` after normalization, or the error that prevented it.
    pub difference: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NumericVerdict {
    pub label: String,
    pub pass: bool,
    pub lhs_st: Option<String>,
    pub rhs_st: Option<String>,
    pub difference_st: Option<String>,
    /// Valuation of `lhs − rhs`; `inf` when it vanishes in the window.
    pub valuation: Option<String>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Expectation {
    Pass,
    Fail,
}

/// Expected standard parts for one entry, compared against the `reference` assignment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReferenceCheck {
    pub lhs_st: String,
    pub rhs_st: String,
    pub matched: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IdentityReport {
    pub name: String,
    pub mode: CheckMode,
    pub expected: Expectation,
    pub symbolic: SymbolicVerdict,
    pub numeric: Vec<NumericVerdict>,
    /// Symbolic and every numeric verdict passed.
    pub passed: bool,
    pub reference: Option<ReferenceCheck>,
}

impl IdentityReport {
    /// Whether the outcome is the expected one. An expected failure must also reproduce the
    /// reference values when they were evaluated.
    pub fn expectation_met(&self) -> bool {
        let reference_ok = self.reference.as_ref().is_none_or(|p| p.matched);
        match self.expected {
            Expectation::Pass => self.passed && reference_ok,
            Expectation::Fail => !self.passed && reference_ok,
        }
    }

    pub fn to_text(&self) -> String {
        let verdict = |b: bool| if b { "pass" } else { "fail" };
        let expected = match self.expected {
            Expectation::Pass => "pass",
            Expectation::Fail => "fail",
        };
        let status = if self.expectation_met() { "ok" } else { "UNEXPECTED" };
        let mut out = format!(
            "{}: {} (expected {expected}, {status})\n  symbolic: {}, lhs - rhs = {}\n",
            self.name,
            verdict(self.passed),
            verdict(self.symbolic.pass),
            self.symbolic.difference
        );
        for n in &self.numeric {
            match &n.error {
                Some(e) => out.push_str(&format!("  {}: fail, {e}\n", n.label)),
                None => out.push_str(&format!(
                    "  {}: {}, st(lhs) = {}, st(rhs) = {}, st(lhs - rhs) = {}, v(lhs - rhs) = {}\n",
                    n.label,
                    verdict(n.pass),
                    n.lhs_st.as_deref().unwrap_or("?"),
                    n.rhs_st.as_deref().unwrap_or("?"),
                    n.difference_st.as_deref().unwrap_or("?"),
                    n.valuation.as_deref().unwrap_or("?"),
                )),
            }
        }
        if let Some(p) = &self.reference {
            out.push_str(&format!(
                "  reference: st(lhs) = {}, st(rhs) = {}, {}\n",
                p.lhs_st,
                p.rhs_st,
                if p.matched { "reproduced" } else { "NOT reproduced" }
            ));
        }
        out
    }
}

fn st_text(x: &LeviCivitaNumber) -> Option<String> {
    x.standard_part().ok().map(|s| s.to_string())
}

/// Evaluates both sides under one assignment.
pub fn check_assignment(id: &Identity, a: &JetAssignment, label: &str) -> NumericVerdict {
    let mut v = NumericVerdict {
        label: label.to_string(),
        pass: false,
        lhs_st: None,
        rhs_st: None,
        difference_st: None,
        valuation: None,
        error: None,
    };
    let sides = eval_jet(&id.lhs, a, &id.decls).and_then(|l| Ok((l, eval_jet(&id.rhs, a, &id.decls)?)));
    let (l, r) = match sides {
        Ok(s) => s,
        Err(e) => {
            v.error = Some(e.to_string());
            return v;
        }
    };
    let diff = &l - &r;
    v.lhs_st = st_text(&l);
    v.rhs_st = st_text(&r);
    v.difference_st = st_text(&diff);
    v.valuation = Some(diff.valuation().to_string());
    if diff.trunc_order().is_some_and(|m| m < 0) {
        v.error = Some(EvalError::InsufficientTruncation("difference has no known terms".into()).to_string());
        return v;
    }
    v.pass = match id.mode {
        CheckMode::Exact => diff.is_zero(),
        CheckMode::LeadingOrder => {
            matches!(diff.standard_part(), Ok(StandardPart::Finite(ref s)) if num::Zero::is_zero(s))
                && match diff.valuation() {
                    Valuation::Infinite => true,
                    Valuation::Finite(k) => k >= 1,
                }
        }
    };
    v
}

/// Symbolic check plus one numeric check per assignment, labeled `#1`, `#2`, ….
pub fn verify_identity(id: &Identity, assignments: &[JetAssignment], cfg: &DiffConfig) -> IdentityReport {
    let labeled: Vec<(String, &JetAssignment)> =
        assignments.iter().enumerate().map(|(i, a)| (format!("#{}", i + 1), a)).collect();
    verify_labeled(id, &labeled, cfg, Execution::Sequential)
}

fn verify_labeled(
    id: &Identity,
    assignments: &[(String, &JetAssignment)],
    cfg: &DiffConfig,
    exec: Execution,
) -> IdentityReport {
    let symbolic = match id.symbolic_difference(cfg) {
        Ok(d) => SymbolicVerdict { pass: d.is_zero(), difference: render::text(&d) },
        Err(e) => SymbolicVerdict { pass: false, difference: format!("error: {e}") },
    };
    let numeric = map_ordered(assignments.to_vec(), exec, |(label, a)| check_assignment(id, a, &label));
    let passed = symbolic.pass && numeric.iter().all(|n| n.pass);
    IdentityReport {
        name: id.name.clone(),
        mode: id.mode,
        expected: Expectation::Pass,
        symbolic,
        numeric,
        passed,
        reference: None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// Uses rayon when the `parallel` feature is enabled; sequential otherwise.
    #[default]
    Parallel,
}

fn map_ordered<T, R, F>(items: Vec<T>, exec: Execution, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec == Execution::Parallel {
        use rayon::prelude::*;
        return items.into_par_iter().map(f).collect();
    }
    let _ = exec;
    items.into_iter().map(f).collect()
}

/// A random polynomial of degree 1 to 4 with integer coefficients in `[-3, 3]`.
fn random_poly(rng: &mut ChaCha8Rng) -> Vec<Rational> {
    let degree = rng.gen_range(1..=4);
    let mut c: Vec<Rational> = (0..=degree).map(|_| rational::int(rng.gen_range(-3..=3))).collect();
    while num::Zero::is_zero(&c[degree]) {
        c[degree] = rational::int(rng.gen_range(-3..=3));
    }
    c
}

/// A polynomial of total degree at most 3 in the given parameters.
fn random_body(params: &[String], rng: &mut ChaCha8Rng) -> Expr {
    fn monomials(n: usize, max: u32) -> Vec<Vec<u32>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for e in 0..=max {
            for mut rest in monomials(n - 1, max - e) {
                rest.insert(0, e);
                out.push(rest);
            }
        }
        out
    }
    let terms = monomials(params.len(), 3)
        .into_iter()
        .map(|exps| {
            let mut fs = vec![Expr::int(rng.gen_range(-3..=3))];
            for (p, e) in params.iter().zip(exps) {
                if e > 0 {
                    fs.push(Expr::var(p).powi(e as i64));
                }
            }
            Expr::Mul(fs)
        })
        .collect();
    normalize(&Expr::Add(terms)).expect("polynomial")
}

/// Draws a random assignment for every non-base variable and declared function of
/// `decls`, resampling until every first differential has valuation exactly 1 and both
/// sides of `id` evaluate without dividing by zero.
pub fn random_assignment(id: &Identity, trunc: i64, rng: &mut ChaCha8Rng) -> JetAssignment {
    let decls = &id.decls;
    let mut last = JetAssignment::default();
    for _ in 0..1000 {
        let mut a = JetAssignment { trunc, ..JetAssignment::default() };
        let k: i64 = rng.gen_range(-6..=6);
        a.q0 = if rng.gen_bool(0.5) { rational::int(k / 2) } else { rational::frac(k, 2) };
        for v in &decls.vars {
            if decls.base.as_deref() != Some(v.as_str()) {
                a.polys.insert(v.clone(), random_poly(rng));
            }
        }
        for (f, params) in &decls.functions {
            a.bodies.insert(f.clone(), random_body(params, rng));
        }
        let ok = decls
            .vars
            .iter()
            .all(|v| eval_jet(&Expr::diff(v, 1), &a, decls).is_ok_and(|d| d.valuation() == Valuation::Finite(1)))
            && !matches!(eval_jet(&id.lhs, &a, decls), Err(EvalError::DivisionByZero))
            && !matches!(eval_jet(&id.rhs, &a, decls), Err(EvalError::DivisionByZero));
        if ok {
            return a;
        }
        last = a;
    }
    last
}

/// One named identity with its expected outcome and reference values.
#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub decls: &'static str,
    pub expected: Expectation,
    /// Jets file for the reference assignment.
    pub reference: &'static str,
    pub lhs_st: Rational,
    pub rhs_st: Rational,
    build: fn(&DependencyDecls, &DiffConfig) -> crate::differential::Result<Identity>,
}

impl CatalogEntry {
    pub fn identity(&self, cfg: &DiffConfig) -> Result<Identity, String> {
        let decls = parser::parse_decls(self.decls).map_err(|e| e.to_string())?;
        (self.build)(&decls, cfg).map_err(|e| e.to_string())
    }

    pub fn reference_assignment(&self, decls: &DependencyDecls, trunc: i64) -> Result<JetAssignment, String> {
        let (_, a) = parse_jets(self.reference, decls).map_err(|e| e.to_string())?;
        Ok(a.with_trunc(trunc))
    }
}

pub fn catalog() -> Vec<CatalogEntry> {
    use crate::derivative as dv;
    let r = rational::frac;
    vec![
        CatalogEntry {
            name: "inverse1",
            decls: "var x\ndepends y x\n",
            expected: Expectation::Pass,
            reference: "poly x 0 1\npoly y 0 0 1\nat 3\n",
            lhs_st: r(1, 6),
            rhs_st: r(1, 6),
            build: |d, c| dv::inverse_first("y", "x", d, c),
        },
        CatalogEntry {
            name: "inverse2",
            decls: "var x\ndepends y x\n",
            expected: Expectation::Pass,
            reference: "poly x 0 1\npoly y 0 0 0 1\nat 2\n",
            lhs_st: r(-1, 144),
            rhs_st: r(-1, 144),
            build: |d, c| dv::inverse_second("y", "x", d, c),
        },
        CatalogEntry {
            name: "chain2",
            decls: "var t\ndepends x t\ndepends y x\n",
            expected: Expectation::Pass,
            reference: "poly t 0 1\npoly x 0 0 1\npoly y 0 0 0 1\nat 1\n",
            lhs_st: r(30, 1),
            rhs_st: r(30, 1),
            build: |d, c| dv::chain_second("y", "x", "t", d, c),
        },
        CatalogEntry {
            name: "chain_multi",
            decls: "var t\ndepends x t\ndepends y t\nfunction f x y\n",
            expected: Expectation::Pass,
            reference: "poly t 0 1\npoly x 0 0 1\npoly y 0 0 0 1\nbody f x^2 + y^2\nat 1\n",
            lhs_st: r(10, 1),
            rhs_st: r(10, 1),
            build: |d, c| dv::chain_multivariate("f", "t", d, c),
        },
        CatalogEntry {
            name: "naive_chain2_counterexample",
            decls: "var t\ndepends x t\ndepends y x\n",
            expected: Expectation::Fail,
            reference: "poly t 0 1\npoly x 0 0 1\npoly y 0 0 0 1\nat 1\n",
            lhs_st: r(24, 1),
            rhs_st: r(30, 1),
            build: |d, c| dv::naive_chain_second("y", "x", "t", d, c),
        },
        CatalogEntry {
            name: "contradiction_1eq2",
            decls: "var t\ndepends x t\ndepends y t\nfunction f x y\n",
            expected: Expectation::Fail,
            reference: "poly t 0 1\npoly x 0 0 1\npoly y 0 0 0 1\nbody f x^2 + y^2\nat 1\n",
            lhs_st: r(1, 1),
            rhs_st: r(2, 1),
            build: |d, c| dv::old_notation_contradiction("f", "t", d, c),
        },
        CatalogEntry {
            name: "dxdx_zero",
            decls: "var t\ndepends x t\n",
            expected: Expectation::Pass,
            reference: "poly t 0 1\npoly x 0 0 1\nat 1\n",
            lhs_st: r(0, 1),
            rhs_st: r(0, 1),
            build: |d, c| dv::second_derivative_of_self("x", d, c),
        },
    ]
}

pub fn catalog_entry(name: &str) -> Option<CatalogEntry> {
    catalog().into_iter().find(|e| e.name == name)
}

#[derive(Debug, Clone)]
pub struct SuiteOptions {
    pub seed: u64,
    /// Random assignments per identity. Zero gives symbolic verdicts only.
    pub count: usize,
    pub trunc: i64,
    pub execution: Execution,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions { seed: 0, count: 5, trunc: DEFAULT_TRUNC, execution: Execution::default() }
    }
}

/// Runs one catalog entry: the reference assignment first, then `count` random ones drawn
/// from the entry's own stream.
pub fn run_entry(index: usize, entry: &CatalogEntry, opts: &SuiteOptions, cfg: &DiffConfig) -> IdentityReport {
    let failed = |why: String| IdentityReport {
        name: entry.name.to_string(),
        mode: CheckMode::Exact,
        expected: entry.expected,
        symbolic: SymbolicVerdict { pass: false, difference: format!("error: {why}") },
        numeric: Vec::new(),
        passed: false,
        reference: None,
    };
    let id = match entry.identity(cfg) {
        Ok(id) => id,
        Err(e) => return failed(e),
    };
    let mut owned = Vec::new();
    if opts.count > 0 {
        match entry.reference_assignment(&id.decls, opts.trunc) {
            Ok(a) => owned.push(("reference".to_string(), a)),
            Err(e) => return failed(e),
        }
        let mut rng = <ChaCha8Rng as rand::SeedableRng>::seed_from_u64(opts.seed);
        rng.set_stream(index as u64);
        for i in 0..opts.count {
            owned.push((format!("random#{}", i + 1), random_assignment(&id, opts.trunc, &mut rng)));
        }
    }
    let labeled: Vec<(String, &JetAssignment)> = owned.iter().map(|(l, a)| (l.clone(), a)).collect();
    let mut report = verify_labeled(&id, &labeled, cfg, opts.execution);
    report.expected = entry.expected;
    if let Some(first) = report.numeric.first() {
        let matched = first.lhs_st.as_deref() == Some(fmt_rational(&entry.lhs_st).as_str())
            && first.rhs_st.as_deref() == Some(fmt_rational(&entry.rhs_st).as_str());
        report.reference =
            Some(ReferenceCheck { lhs_st: fmt_rational(&entry.lhs_st), rhs_st: fmt_rational(&entry.rhs_st), matched });
    }
    report
}

/// Runs the whole catalog. Reports come back in catalog order for any execution mode.
pub fn run_suite(opts: &SuiteOptions) -> Vec<IdentityReport> {
    let cfg = DiffConfig::default();
    let entries: Vec<(usize, CatalogEntry)> = catalog().into_iter().enumerate().collect();
    map_ordered(entries, opts.execution, |(i, e)| run_entry(i, &e, opts, &cfg))
}
