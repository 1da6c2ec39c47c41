//! Differentials as first-class algebraic objects.
//!
//! Expressions carry `d^n x`, `∂(f, S)` and `D_x^n y` atoms, normalize to a canonical
//! polynomial form, and can be evaluated exactly in a truncated Levi-Civita field where
//! each variable is a polynomial in a hidden parameter advanced by an infinitesimal step.

pub mod decls;
pub mod derivative;
pub mod differential;
pub mod expr;
pub mod hyperreal;
pub mod normalize;
pub mod parser;
pub mod rational;
pub mod render;
pub mod verifier;

pub use decls::{DeclError, DependencyDecls};
pub use derivative::{collapse, expand_atoms, expand_derivative, CheckMode, Identity};
pub use differential::{
    differential, nth_differential, partial_differential, principal_reduce, total_differential, DiffConfig, DiffError,
};
pub use expr::{Expr, Grade};
pub use hyperreal::{HyperrealError, LeviCivitaNumber, PrincipalMonomial, StandardPart, Valuation};
pub use normalize::{normalize, substitute, NormalizeError};
pub use parser::{parse_decls, parse_expr, parse_expr_with, ParseError, ParseErrorKind};
pub use rational::Rational;
pub use verifier::{
    catalog, catalog_entry, eval_jet, parse_jets, run_suite, verify_identity, EvalError, Execution, IdentityReport,
    JetAssignment, SuiteOptions,
};
