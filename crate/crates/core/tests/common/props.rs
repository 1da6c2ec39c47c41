//! Property checks driven by an explicit deterministic `TestRunner`, so the same checks can
//! run under `cargo test` and from the acceptance binary.

use std::cmp::Ordering;

use leibniz::rational::{frac, int};
use leibniz::verifier::JetAssignment;
use leibniz::{
    differential, eval_jet, expand_derivative, normalize, nth_differential, parse_expr, render, DependencyDecls,
    DiffConfig, Expr, Grade, LeviCivitaNumber, StandardPart, Valuation,
};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

use super::*;

pub const CASES: u32 = 256;

pub fn run<S: Strategy>(strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String> {
    let config = Config { cases: CASES, failure_persistence: None, max_global_rejects: 8192, ..Config::default() };
    let mut runner = TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    runner.run(&strategy, test).map_err(|e| e.to_string())
}

fn xy() -> DependencyDecls {
    DependencyDecls::new().with_var("x").with_var("y")
}

fn cfg() -> DiffConfig {
    DiffConfig::default()
}

fn norm(e: &Expr) -> Result<Expr, TestCaseError> {
    normalize(e).map_err(|err| TestCaseError::fail(format!("normalize failed on {e:?}: {err}")))
}

fn ok_or_reject<T, E>(r: Result<T, E>) -> Result<T, TestCaseError> {
    r.map_err(|_| TestCaseError::reject("outside the domain"))
}

// ---- hyperreal arithmetic ----

#[allow(clippy::eq_op)]
pub fn field_laws() -> Result<(), String> {
    run((any_series(), any_series(), any_series()), |(a, b, c)| {
        prop_assert!(agree(&(&a + &b), &(&b + &a)));
        prop_assert!(agree(&(&a * &b), &(&b * &a)));
        prop_assert!(agree(&(&(&a + &b) + &c), &(&a + &(&b + &c))));
        prop_assert!(agree(&(&(&a * &b) * &c), &(&a * &(&b * &c))));
        prop_assert!(agree(&(&a * &(&b + &c)), &(&(&a * &b) + &(&a * &c))));
        prop_assert!(agree(&(&a + &LeviCivitaNumber::zero()), &a));
        prop_assert!(agree(&(&a * &LeviCivitaNumber::one()), &a));
        prop_assert!((&a - &a).is_zero());
        if !a.is_zero() {
            let inv = a.invert().map_err(|e| TestCaseError::fail(e.to_string()))?;
            prop_assert!(agree(&(&a * &inv), &LeviCivitaNumber::one()), "{a} * {inv}");
        }
        Ok(())
    })
}

pub fn total_order() -> Result<(), String> {
    run((exact_series(), exact_series(), exact_series()), |(a, b, c)| {
        let ab = a.compare(&b).unwrap();
        prop_assert_eq!(ab, b.compare(&a).unwrap().reverse());
        prop_assert_eq!(ab == Ordering::Equal, a == b);
        if a.leq(&b).unwrap() && b.leq(&c).unwrap() {
            prop_assert!(a.leq(&c).unwrap());
        }
        prop_assert_eq!((&a + &c).compare(&(&b + &c)).unwrap(), ab);
        let zero = LeviCivitaNumber::zero();
        if c.compare(&zero).unwrap() == Ordering::Greater {
            prop_assert_eq!((&a * &c).compare(&(&b * &c)).unwrap(), ab);
        }
        // Every positive real exceeds a positive infinitesimal.
        if a.is_infinitesimal() {
            prop_assert!(a.abs().unwrap().leq(&LeviCivitaNumber::from_rational(frac(1, 1000))).unwrap());
        }
        Ok(())
    })
}

pub fn valuation_laws() -> Result<(), String> {
    run((exact_series(), exact_series()), |(a, b)| {
        match (a.valuation(), b.valuation()) {
            (Valuation::Finite(va), Valuation::Finite(vb)) => {
                prop_assert_eq!((&a * &b).valuation(), Valuation::Finite(va + vb));
                prop_assert!((&a + &b).valuation() >= Valuation::Finite(va.min(vb)));
            }
            _ => prop_assert!((&a * &b).is_zero()),
        }
        Ok(())
    })
}

pub fn standard_part_homomorphism() -> Result<(), String> {
    let finite = || exact_series().prop_filter("finite", |a| !a.is_infinite());
    run((finite(), finite()), |(a, b)| {
        let st = |x: &LeviCivitaNumber| x.standard_part().unwrap().finite().cloned().unwrap();
        prop_assert_eq!(st(&(&a + &b)), st(&a) + st(&b));
        prop_assert_eq!(st(&(&a * &b)), st(&a) * st(&b));
        prop_assert_eq!(st(&a), a.coefficient(0));
        Ok(())
    })
}

pub fn principal_part_leading() -> Result<(), String> {
    run((exact_series(), exact_series()), |(a, b)| {
        let pa = a.principal_part();
        if a.is_zero() {
            prop_assert!(pa.is_zero());
            return Ok(());
        }
        prop_assert_eq!(Valuation::Finite(pa.exponent), a.valuation());
        prop_assert!((&a - &pa.to_number()).valuation() > a.valuation());
        if !b.is_zero() {
            let pab = (&a * &b).principal_part().to_number();
            prop_assert_eq!(pab, &pa.to_number() * &b.principal_part().to_number());
        }
        let sign = a.compare(&LeviCivitaNumber::zero()).unwrap();
        prop_assert_eq!(sign, pa.to_number().compare(&LeviCivitaNumber::zero()).unwrap());
        if a.is_infinite() {
            let expected =
                if sign == Ordering::Greater { StandardPart::PlusInfinity } else { StandardPart::MinusInfinity };
            prop_assert_eq!(a.standard_part().unwrap(), expected);
        }
        Ok(())
    })
}

// ---- differentials ----

pub fn derivation_rules() -> Result<(), String> {
    run((poly_tree(true), poly_tree(true)), |(a, b)| {
        let (decls, cfg) = (xy(), cfg());
        let d = |e: &Expr| ok_or_reject(differential(e, &decls, &cfg));
        let sum = norm(&(a.clone() + b.clone()))?;
        prop_assert_eq!(d(&sum)?, norm(&(d(&a)? + d(&b)?))?);
        let prod = norm(&(a.clone() * b.clone()))?;
        let leibniz = norm(&(a.clone() * d(&b)? + b.clone() * d(&a)?))?;
        prop_assert_eq!(d(&prod)?, leibniz);
        let c = Expr::rational(frac(3, 2));
        prop_assert_eq!(d(&norm(&(c.clone() * a.clone()))?)?, norm(&(c * d(&a)?))?);
        Ok(())
    })
}

pub fn grade_increment() -> Result<(), String> {
    run(poly_tree(true), |a| {
        let (decls, cfg) = (xy(), cfg());
        let a = norm(&a)?;
        let da = ok_or_reject(differential(&a, &decls, &cfg))?;
        if let (Grade::Homogeneous(g), false) = (a.grade(), da.is_zero()) {
            prop_assert_eq!(da.grade(), Grade::Homogeneous(g + 1));
        }
        if a.as_const().is_some() {
            prop_assert!(da.is_zero());
        }
        Ok(())
    })
}

pub fn normalize_idempotent() -> Result<(), String> {
    run(rich_tree(), |e| {
        let Ok(once) = normalize(&e) else { return Err(TestCaseError::reject("not normalizable")) };
        prop_assert_eq!(norm(&once)?, once);
        Ok(())
    })
}

pub fn normalize_preserves_value() -> Result<(), String> {
    let jets = (poly(3), poly(3), sample_point());
    run((poly_tree(true), jets), |(e, (px, py, q0))| {
        let decls = xy();
        let a = JetAssignment { q0, ..JetAssignment::default() };
        let a = JetAssignment { polys: [("x".to_string(), px.0.clone()), ("y".to_string(), py.0.clone())].into(), ..a };
        let raw = ok_or_reject(eval_jet(&e, &a, &decls))?;
        let n = ok_or_reject(eval_jet(&norm(&e)?, &a, &decls))?;
        prop_assert!(agree(&raw, &n), "{raw} vs {n}");
        Ok(())
    })
}

pub fn parser_round_trip() -> Result<(), String> {
    run(rich_tree(), |e| {
        let decls = decls_fxy();
        let Ok(n) = normalize(&e) else { return Err(TestCaseError::reject("not normalizable")) };
        let src = render::text(&n);
        let back = parse_expr(&src, &decls).map_err(|err| TestCaseError::fail(format!("{src}: {err}")))?;
        prop_assert_eq!(back, n, "{}", src);
        Ok(())
    })
}

pub fn parser_total() -> Result<(), String> {
    let alphabet = prop::sample::select(vec![
        "x", "y", "f", "d", "pd", "D", "[", "]", "(", ")", ",", ";", "+", "-", "*", "/", "^", "1", "2", "0.5", " ",
        "sin", "ln", "#", "?", "é",
    ]);
    run(prop::collection::vec(alphabet, 0..24), |parts| {
        let src: String = parts.concat();
        if let Err(err) = parse_expr(&src, &decls_fxy()) {
            prop_assert!(err.offset <= src.len(), "offset {} past {}", err.offset, src.len());
            prop_assert!(err.line >= 1 && err.column >= 1);
        }
        Ok(())
    })
}

// ---- jet model against the polynomial oracle ----

pub fn differential_matches_oracle() -> Result<(), String> {
    run((poly(4), sample_point(), 1u32..=3), |(p, q0, n)| {
        let decls = DependencyDecls::new().with_var("x");
        let a = JetAssignment { polys: [("x".to_string(), p.0.clone())].into(), q0: q0.clone(), ..Default::default() };
        let got = eval_jet(&Expr::diff("x", n), &a, &decls).map_err(|e| TestCaseError::fail(e.to_string()))?;
        let want = forward_difference(&p, &q0, n as usize);
        prop_assert!(series_matches(&got, &want, got.trunc_order().unwrap()), "{got} vs {want:?}");
        prop_assert!(got.valuation() >= Valuation::Finite(n as i64));

        // A symbolic n-th differential of p(x) with x = q leads with p⁽ⁿ⁾(q0)·εⁿ.
        let lin = JetAssignment { polys: [("x".to_string(), vec![int(0), int(1)])].into(), q0: q0.clone(), ..a };
        let dn = nth_differential(&poly_expr(&p, "x"), n, &decls, &cfg()).unwrap();
        let v = eval_jet(&dn, &lin, &decls).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert_eq!(v.coefficient(n as i64), p.nth_derivative(n as usize).eval(&q0));
        for k in 0..n as i64 {
            prop_assert_eq!(v.coefficient(k), int(0));
        }
        Ok(())
    })
}

pub fn partial_sum_is_full_change_to_first_order() -> Result<(), String> {
    let jets = (poly(3), poly(3), sample_point());
    run((poly_tree(false), jets), |(body, (px, py, q0))| {
        let decls = DependencyDecls::new()
            .with_var("t")
            .with_depends("x", &["t"])
            .with_depends("y", &["t"])
            .with_function("f", &["x", "y"]);
        let a = JetAssignment {
            polys: [("t".to_string(), vec![int(0), int(1)]), ("x".to_string(), px.0), ("y".to_string(), py.0)].into(),
            bodies: [("f".to_string(), norm(&body)?)].into(),
            q0,
            ..Default::default()
        };
        let e = Expr::partial("f", &["x", "y"], &["x"]) + Expr::partial("f", &["x", "y"], &["y"])
            - Expr::partial("f", &["x", "y"], &["x", "y"]);
        let v = ok_or_reject(eval_jet(&e, &a, &decls))?;
        prop_assert!(v.valuation() >= Valuation::Finite(2), "{}", v);
        Ok(())
    })
}

pub fn derivative_recursion_and_grade() -> Result<(), String> {
    run(1u32..=4, |n| {
        let decls = DependencyDecls::new().with_depends("y", &["x"]);
        let y = Expr::var("y");
        let dn = expand_derivative(&y, "x", n, &decls, &cfg()).unwrap();
        prop_assert_eq!(dn.grade(), Grade::Homogeneous(0));
        if n > 1 {
            let prev = expand_derivative(&y, "x", n - 1, &decls, &cfg()).unwrap();
            let step = norm(&(differential(&prev, &decls, &cfg()).unwrap() / Expr::diff("x", 1)))?;
            prop_assert_eq!(step, dn);
        }
        Ok(())
    })
}

pub fn reparameterization_invariance() -> Result<(), String> {
    run((poly(4), poly(3), sample_point(), 1u32..=2), |(py, px, q0, n)| {
        prop_assume!(!px.derivative().eval(&q0).is_zero());
        let decls = DependencyDecls::new().with_var("x").with_depends("y", &["x"]);
        let a = JetAssignment {
            polys: [("x".to_string(), px.0.clone()), ("y".to_string(), py.0.clone())].into(),
            q0: q0.clone(),
            ..Default::default()
        };
        let e = expand_derivative(&Expr::var("y"), "x", n, &decls, &cfg()).unwrap();
        let v = eval_jet(&e, &a, &decls).map_err(|err| TestCaseError::fail(err.to_string()))?;
        let want = py.nth_derivative(n as usize).eval(&px.eval(&q0));
        prop_assert_eq!(v.standard_part().unwrap(), StandardPart::Finite(want));
        Ok(())
    })
}

pub type Check = fn() -> Result<(), String>;

pub fn all() -> Vec<(&'static str, Check)> {
    vec![
        ("hyperreal field laws", field_laws),
        ("hyperreal total order", total_order),
        ("valuation laws", valuation_laws),
        ("standard part homomorphism", standard_part_homomorphism),
        ("principal part is the leading monomial", principal_part_leading),
        ("derivation linearity and product rule", derivation_rules),
        ("grade increment", grade_increment),
        ("normalize idempotence", normalize_idempotent),
        ("normalize preserves jet values", normalize_preserves_value),
        ("parser round trip", parser_round_trip),
        ("parser error positions", parser_total),
        ("differentials match forward differences", differential_matches_oracle),
        ("partial differentials sum to the full change", partial_sum_is_full_change_to_first_order),
        ("derivative recursion and grade", derivative_recursion_and_grade),
        ("reparameterization invariance", reparameterization_invariance),
    ]
}
