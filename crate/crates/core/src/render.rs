//! Text and LaTeX rendering.
//!
//! The text form is the parser's input syntax, so `parse(render_text(e)) == e` for
//! normalized `e`. Products put the coefficient first, then factors with positive
//! exponents joined by `*`, then each factor with a negative exponent after a `/`.
//!
//! The LaTeX form writes `d^n x` as `\mathrm{d}^n x`, `∂(f, x)` as `\partial(f, x)` and
//! `D_x^n y` as `D_{x}^{n}y`. When every denominator of a term is a power of a single
//! first differential `dx`, each differential in the numerator is paired with the matching
//! power of `dx`, producing forms like `\frac{\mathrm{d}y}{\mathrm{d}x}\frac{\mathrm{d}^2x}{\mathrm{d}x^2}`.

use num::{One, Signed, Zero};

use crate::expr::Expr;
use crate::rational::{fmt_rational, Rational};

/// Elementary functions with a LaTeX operator name.
const LATEX_FUNCS: &[&str] = &["sin", "cos", "exp", "ln"];

pub fn text(e: &Expr) -> String {
    match e {
        Expr::Add(terms) => join_terms(terms, text_term),
        _ => text_term(e),
    }
}

fn join_terms(terms: &[Expr], render_term: fn(&Expr) -> String) -> String {
    if terms.is_empty() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (i, t) in terms.iter().enumerate() {
        let (negative, magnitude) = split_sign(t);
        match (i, negative) {
            (0, true) => out.push('-'),
            (0, false) => {}
            (_, true) => out.push_str(" - "),
            (_, false) => out.push_str(" + "),
        }
        out.push_str(&render_term(&magnitude));
    }
    out
}

/// Separates a leading negative coefficient from a term.
fn split_sign(t: &Expr) -> (bool, Expr) {
    match t {
        Expr::Const(c) if c.is_negative() => (true, Expr::Const(-c)),
        Expr::Mul(fs) => match fs.first() {
            Some(Expr::Const(c)) if c.is_negative() => {
                let mut rest = fs.clone();
                let magnitude = -c;
                if magnitude.is_one() {
                    rest.remove(0);
                } else {
                    rest[0] = Expr::Const(magnitude);
                }
                let term = if rest.len() == 1 { rest.pop().unwrap() } else { Expr::Mul(rest) };
                (true, term)
            }
            _ => (false, t.clone()),
        },
        _ => (false, t.clone()),
    }
}

type Factors = Vec<(Expr, Rational)>;

/// Splits a term into coefficient, numerator factors and denominator factors
/// (denominator exponents are returned positive).
fn split_term(t: &Expr) -> (Rational, Factors, Factors) {
    let factors: Vec<Expr> = match t {
        Expr::Mul(fs) => fs.clone(),
        other => vec![other.clone()],
    };
    let mut coef = Rational::one();
    let mut num = Vec::new();
    let mut den = Vec::new();
    for f in factors {
        match f {
            Expr::Const(c) => coef *= c,
            Expr::Pow(b, e) => {
                if e.is_negative() && !matches!(*b, Expr::Const(_)) {
                    den.push((*b, -e));
                } else {
                    num.push((*b, e));
                }
            }
            other => num.push((other, Rational::one())),
        }
    }
    (coef, num, den)
}

fn text_term(t: &Expr) -> String {
    let (coef, num, den) = split_term(t);
    let mut out = String::new();
    if coef.is_negative() {
        out.push('-');
    }
    let magnitude = coef.abs();
    let num_text: Vec<String> = num.iter().map(|(b, e)| text_factor(b, e)).collect();
    if num_text.is_empty() {
        out.push_str(&fmt_rational(&magnitude));
    } else {
        if !magnitude.is_one() {
            out.push_str(&fmt_rational(&magnitude));
            out.push('*');
        }
        out.push_str(&num_text.join("*"));
    }
    for (b, e) in &den {
        out.push('/');
        out.push_str(&text_factor(b, e));
    }
    out
}

fn text_factor(base: &Expr, e: &Rational) -> String {
    let b = text_base(base);
    if e.is_one() {
        b
    } else {
        format!("{b}^{}", fmt_rational(e))
    }
}

fn text_base(base: &Expr) -> String {
    match base {
        Expr::Const(c) if c.is_negative() || !c.is_integer() => format!("({})", fmt_rational(c)),
        Expr::Add(_) | Expr::Mul(_) | Expr::Pow(..) => format!("({})", text(base)),
        _ => text_atom(base),
    }
}

fn text_atom(e: &Expr) -> String {
    match e {
        Expr::Const(c) => fmt_rational(c),
        Expr::Var(v) => v.clone(),
        Expr::Func(name, args) => {
            let args: Vec<String> = args.iter().map(text).collect();
            format!("{name}({})", args.join(", "))
        }
        Expr::DiffAtom(x, 1) => format!("d[{x}]"),
        Expr::DiffAtom(x, n) => format!("d[{x},{n}]"),
        Expr::PartialAtom(target, vary) => {
            let head = match target.as_ref() {
                Expr::Func(name, _) => name.clone(),
                other => text(other),
            };
            format!("pd[{head},{}]", vary.join(","))
        }
        Expr::DerivAtom(target, x, 1) => format!("D[{};{x}]", text(target)),
        Expr::DerivAtom(target, x, n) => format!("D[{};{x};{n}]", text(target)),
        Expr::Add(_) | Expr::Mul(_) | Expr::Pow(..) => text(e),
    }
}

pub fn latex(e: &Expr) -> String {
    match e {
        Expr::Add(terms) => join_terms(terms, latex_term),
        _ => latex_term(e),
    }
}

fn latex_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        let sign = if r.is_negative() { "-" } else { "" };
        format!("{sign}\\frac{{{}}}{{{}}}", r.numer().abs(), r.denom())
    }
}

fn latex_exponent(e: &Rational) -> String {
    if e.is_integer() && e.is_positive() && e < &Rational::from_integer(10.into()) {
        format!("^{}", e.numer())
    } else {
        format!("^{{{}}}", latex_rational(e))
    }
}

fn diff_order(b: &Expr) -> Option<u32> {
    match b {
        Expr::DiffAtom(_, n) => Some(*n),
        Expr::PartialAtom(..) => Some(1),
        _ => None,
    }
}

fn latex_term(t: &Expr) -> String {
    let (coef, num, den) = split_term(t);
    let mut out = String::new();
    if coef.is_negative() {
        out.push('-');
    }
    let magnitude = coef.abs();
    let coef_text = if magnitude.is_one() { String::new() } else { latex_rational(&magnitude) };

    if let Some(paired) = latex_paired(&num, &den) {
        out.push_str(&coef_text);
        out.push_str(&paired);
        return out;
    }

    let p = Rational::from_integer(magnitude.numer().clone());
    let q = Rational::from_integer(magnitude.denom().clone());
    let mut num_text = latex_product(&num);
    if !p.is_one() {
        num_text =
            if num_text.is_empty() { latex_rational(&p) } else { join_coef(&latex_rational(&p), &num, &num_text) };
    }
    let mut den_text = latex_product(&den);
    if !q.is_one() {
        den_text =
            if den_text.is_empty() { latex_rational(&q) } else { join_coef(&latex_rational(&q), &den, &den_text) };
    }
    if num_text.is_empty() {
        num_text = "1".to_string();
    }
    if den_text.is_empty() {
        out.push_str(&num_text);
    } else {
        out.push_str(&format!("\\frac{{{num_text}}}{{{den_text}}}"));
    }
    out
}

fn join_coef(coef: &str, num: &[(Expr, Rational)], num_text: &str) -> String {
    match num.first() {
        Some((Expr::Var(_), _)) => format!("{coef}{num_text}"),
        _ => format!("{coef}\\,{num_text}"),
    }
}

/// Ratio form used when the denominator is a power of a single first differential.
fn latex_paired(num: &[(Expr, Rational)], den: &[(Expr, Rational)]) -> Option<String> {
    let [(Expr::DiffAtom(wrt, 1), power)] = den else {
        return None;
    };
    let mut plain = Vec::new();
    let mut diffs = Vec::new();
    let mut total = Rational::zero();
    for (b, e) in num {
        match diff_order(b) {
            Some(k) if e.is_integer() => {
                total += e * Rational::from_integer(k.into());
                diffs.push((b, e, e * Rational::from_integer(k.into())));
            }
            Some(_) => return None,
            None => plain.push((b.clone(), e.clone())),
        }
    }
    if &total != power || diffs.is_empty() {
        return None;
    }
    let mut out = latex_product(&plain);
    if !out.is_empty() {
        out.push_str("\\,");
    }
    for (b, e, k) in diffs {
        let denom = if k.is_one() {
            format!("\\mathrm{{d}}{wrt}")
        } else {
            format!("\\mathrm{{d}}{wrt}{}", latex_exponent(&k))
        };
        out.push_str(&format!("\\frac{{{}}}{{{denom}}}", latex_factor(b, e)));
    }
    Some(out)
}

fn latex_product(factors: &[(Expr, Rational)]) -> String {
    let parts: Vec<String> = factors.iter().map(|(b, e)| latex_factor(b, e)).collect();
    parts.join("\\,")
}

fn latex_factor(base: &Expr, e: &Rational) -> String {
    if e.is_one() {
        return latex_base(base, false);
    }
    let b = match base {
        // dx^2 is the square of dx; higher differentials need parentheses.
        Expr::DiffAtom(_, 1) => latex_atom(base),
        _ => latex_base(base, true),
    };
    format!("{b}{}", latex_exponent(e))
}

fn latex_base(base: &Expr, powered: bool) -> String {
    match base {
        Expr::Add(_) | Expr::Mul(_) | Expr::Pow(..) => format!("\\left({}\\right)", latex(base)),
        Expr::Const(c) if c.is_negative() || !c.is_integer() => format!("\\left({}\\right)", latex_rational(c)),
        Expr::DiffAtom(_, n) if powered && *n > 1 => format!("({})", latex_atom(base)),
        Expr::DerivAtom(..) if powered => format!("\\left({}\\right)", latex_atom(base)),
        _ => latex_atom(base),
    }
}

fn latex_atom(e: &Expr) -> String {
    match e {
        Expr::Const(c) => latex_rational(c),
        Expr::Var(v) => v.clone(),
        Expr::Func(name, args) => {
            let args: Vec<String> = args.iter().map(latex).collect();
            if LATEX_FUNCS.contains(&name.as_str()) {
                format!("\\{name}\\left({}\\right)", args.join(", "))
            } else {
                format!("{name}({})", args.join(", "))
            }
        }
        Expr::DiffAtom(x, 1) => format!("\\mathrm{{d}}{x}"),
        Expr::DiffAtom(x, n) => format!("\\mathrm{{d}}{}{x}", latex_exponent(&Rational::from_integer((*n).into()))),
        Expr::PartialAtom(target, vary) => {
            let head = match target.as_ref() {
                Expr::Func(name, _) => name.clone(),
                other => latex(other),
            };
            format!("\\partial({head}, {})", vary.join(", "))
        }
        Expr::DerivAtom(target, x, n) => {
            let inner = match target.as_ref() {
                Expr::Var(_) | Expr::Func(..) => latex(target),
                other => format!("\\left({}\\right)", latex(other)),
            };
            format!("D_{{{x}}}^{{{n}}}{inner}")
        }
        Expr::Add(_) | Expr::Mul(_) | Expr::Pow(..) => latex(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normalize::normalize;

    fn n(e: Expr) -> Expr {
        normalize(&e).unwrap()
    }

    #[test]
    fn atoms() {
        assert_eq!(text(&Expr::deriv(Expr::var("y"), "x", 2)), "D[y;x;2]");
        assert_eq!(text(&Expr::diff("x", 2)), "d[x,2]");
        assert_eq!(latex(&Expr::diff("x", 2)), "\\mathrm{d}^2x");
        let p = Expr::partial("f", &["x", "y"], &["x"]);
        assert_eq!(text(&p), "pd[f,x]");
        assert_eq!(latex(&p), "\\partial(f, x)");
    }

    #[test]
    fn second_differential_text() {
        let e = n(Expr::int(2) * Expr::var("x") * Expr::diff("x", 2) + Expr::int(2) * Expr::diff("x", 1).powi(2));
        assert_eq!(text(&e), "2*x*d[x,2] + 2*d[x]^2");
        assert_eq!(latex(&e), "2x\\,\\mathrm{d}^2x + 2\\,\\mathrm{d}x^2");
    }

    #[test]
    fn quotients_and_signs() {
        let dy = Expr::diff("y", 1);
        let dx = Expr::diff("x", 1);
        let e = n(Expr::diff("y", 2) / dx.clone().powi(2) - dy * Expr::diff("x", 2) / dx.powi(3));
        assert_eq!(text(&e), "d[y,2]/d[x]^2 - d[y]*d[x,2]/d[x]^3");
        assert_eq!(
            latex(&e),
            "\\frac{\\mathrm{d}^2y}{\\mathrm{d}x^2} - \\frac{\\mathrm{d}y}{\\mathrm{d}x}\\frac{\\mathrm{d}^2x}{\\mathrm{d}x^2}"
        );
        let r = n(Expr::rational(crate::rational::frac(-1, 3)) * Expr::var("x").powi(-2));
        assert_eq!(text(&r), "-1/3/x^2");
        assert_eq!(latex(&r), "-\\frac{1}{3x^2}");
    }

    #[test]
    fn fractional_powers() {
        let e = n(Expr::int(2).pow(crate::rational::frac(1, 2)) * Expr::var("x").pow(crate::rational::frac(-1, 2)));
        assert_eq!(text(&e), "2^1/2/x^1/2");
    }
}
