//! Recursive-descent parser for expressions and declaration files.
//!
//! ```text
//! expr     := term (("+" | "-") term)*
//! term     := unary (("*" | "/") unary)*
//! unary    := "-" unary | factor
//! factor   := atom ("^" exponent)?
//! exponent := "-"? int ("/" int)? | "(" "-"? int ("/" int)? ")"
//! atom     := number | ident | ident "(" expr ("," expr)* ")" | "(" expr ")"
//!           | "d" "[" expr ("," int)? "]"
//!           | "pd" "[" ident ("," ident)+ "]"
//!           | "D" "[" expr ";" ident (";" int)? "]"
//! ```
//!
//! `x^2/3` reads as `x^(2/3)`. Numbers are integers or exact decimals.

use std::collections::BTreeMap;
use std::fmt;

use crate::decls::{DeclError, DependencyDecls};
use crate::differential::{self, DiffConfig, DiffError};
use crate::expr::Expr;
use crate::normalize::normalize;
use crate::rational::{self, Rational};

const MAX_DEPTH: usize = 96;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax,
    UnknownFunction(String),
    VaryVarNotArgument {
        var: String,
        function: String,
    },
    Decl(DeclError),
    /// The expression parsed but could not be normalized or expanded.
    Math(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub offset: usize,
    pub line: usize,
    pub column: usize,
    pub expected: String,
    pub found: String,
    pub kind: ParseErrorKind,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: ", self.line, self.column)?;
        match &self.kind {
            ParseErrorKind::Syntax => write!(f, "expected {}, found {}", self.expected, self.found),
            ParseErrorKind::UnknownFunction(n) => write!(f, "unknown function `{n}`"),
            ParseErrorKind::VaryVarNotArgument { var, function } => {
                write!(f, "`{var}` is not an argument of `{function}`")
            }
            ParseErrorKind::Decl(e) => write!(f, "{e}"),
            ParseErrorKind::Math(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for ParseError {}

impl ParseError {
    fn at(src: &str, offset: usize, kind: ParseErrorKind, expected: &str, found: &str) -> Self {
        let offset = offset.min(src.len());
        let before = &src.as_bytes()[..offset];
        let line = before.iter().filter(|&&b| b == b'\n').count() + 1;
        let line_start = before.iter().rposition(|&b| b == b'\n').map_or(0, |p| p + 1);
        let column = String::from_utf8_lossy(&before[line_start..]).chars().count() + 1;
        ParseError { offset, line, column, expected: expected.to_string(), found: found.to_string(), kind }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(String),
    Ident(String),
    Sym(char),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num(n) => write!(f, "number `{n}`"),
            Tok::Ident(i) => write!(f, "`{i}`"),
            Tok::Sym(c) => write!(f, "`{c}`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

fn tokenize(src: &str, base: usize, full: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || (c == b'.' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit)) {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i < bytes.len() && bytes[i] == b'.' {
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
            out.push((Tok::Num(src[start..i].to_string()), base + start));
        } else if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(src[start..i].to_string()), base + start));
        } else if b"+-*/^()[],;".contains(&c) {
            out.push((Tok::Sym(c as char), base + i));
            i += 1;
        } else {
            let ch = src[i..].chars().next().unwrap_or('?');
            return Err(ParseError::at(full, base + i, ParseErrorKind::Syntax, "a token", &format!("`{ch}`")));
        }
    }
    out.push((Tok::Eof, base + src.len()));
    Ok(out)
}

struct Parser<'a> {
    full: &'a str,
    toks: Vec<(Tok, usize)>,
    pos: usize,
    depth: usize,
    decls: &'a DependencyDecls,
    cfg: &'a DiffConfig,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err(&self, expected: &str) -> ParseError {
        ParseError::at(self.full, self.offset(), ParseErrorKind::Syntax, expected, &self.peek().to_string())
    }

    fn err_kind(&self, offset: usize, kind: ParseErrorKind) -> ParseError {
        ParseError::at(self.full, offset, kind, "", "")
    }

    fn math(&self, offset: usize, e: impl fmt::Display) -> ParseError {
        self.err_kind(offset, ParseErrorKind::Math(e.to_string()))
    }

    fn diff_err(&self, offset: usize, e: DiffError) -> ParseError {
        match e {
            DiffError::VaryVarNotArgument { var, function } => {
                self.err_kind(offset, ParseErrorKind::VaryVarNotArgument { var, function })
            }
            DiffError::UnknownFunction(n) => self.err_kind(offset, ParseErrorKind::UnknownFunction(n)),
            other => self.math(offset, other),
        }
    }

    fn eat(&mut self, c: char) -> bool {
        if *self.peek() == Tok::Sym(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(&format!("`{c}`")))
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.err("an identifier")),
        }
    }

    fn positive_int(&mut self) -> Result<u32, ParseError> {
        match self.peek().clone() {
            Tok::Num(s) if !s.contains('.') => {
                let v: u32 = s.parse().map_err(|_| self.err("a small positive integer"))?;
                if v == 0 {
                    return Err(self.err("a positive integer"));
                }
                self.bump();
                Ok(v)
            }
            _ => Err(self.err("a positive integer")),
        }
    }

    fn integer(&mut self) -> Result<Rational, ParseError> {
        match self.peek().clone() {
            Tok::Num(s) if !s.contains('.') => {
                self.bump();
                Ok(rational::parse_rational(&s).expect("digits"))
            }
            _ => Err(self.err("an integer")),
        }
    }

    fn enter(&mut self) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(self.math(self.offset(), "expression nested too deeply"));
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        self.enter()?;
        let mut terms = vec![self.term()?];
        loop {
            if self.eat('+') {
                terms.push(self.term()?);
            } else if self.eat('-') {
                terms.push(-self.term()?);
            } else {
                break;
            }
        }
        self.depth -= 1;
        Ok(if terms.len() == 1 { terms.pop().unwrap() } else { Expr::Add(terms) })
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut factors = vec![self.unary()?];
        loop {
            if self.eat('*') {
                factors.push(self.unary()?);
            } else if self.eat('/') {
                factors.push(self.unary()?.recip());
            } else {
                break;
            }
        }
        Ok(if factors.len() == 1 { factors.pop().unwrap() } else { Expr::Mul(factors) })
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat('-') {
            self.enter()?;
            let inner = self.unary()?;
            self.depth -= 1;
            return Ok(-inner);
        }
        self.factor()
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if !self.eat('^') {
            return Ok(base);
        }
        let paren = self.eat('(');
        let neg = self.eat('-');
        let mut r = self.integer()?;
        if *self.peek() == Tok::Sym('/') && matches!(self.peek_at(1), Tok::Num(_)) {
            self.bump();
            let at = self.offset();
            let den = self.integer()?;
            if num::Zero::is_zero(&den) {
                return Err(self.math(at, "zero denominator in exponent"));
            }
            r /= den;
        }
        if paren {
            self.expect(')')?;
        }
        Ok(base.pow(if neg { -r } else { r }))
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let start = self.offset();
        match self.peek().clone() {
            Tok::Num(s) => {
                self.bump();
                let r = rational::parse_rational(&s).ok_or_else(|| self.err_kind(start, ParseErrorKind::Syntax))?;
                Ok(Expr::Const(r))
            }
            Tok::Sym('(') => {
                self.bump();
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) if *self.peek_at(1) == Tok::Sym('[') => match name.as_str() {
                "d" => self.differential(start),
                "pd" => self.partial(start),
                "D" => self.derivative(),
                _ => Err(ParseError::at(
                    self.full,
                    self.toks[self.pos + 1].1,
                    ParseErrorKind::Syntax,
                    "an operator",
                    "`[`",
                )),
            },
            Tok::Ident(name) if *self.peek_at(1) == Tok::Sym('(') => self.call(name, start),
            Tok::Ident(name) => {
                if self.decls.functions.contains_key(&name) || self.cfg.is_elementary(&name) {
                    self.bump();
                    return Err(self.err("`(` after a function name"));
                }
                self.bump();
                Ok(Expr::Var(name))
            }
            _ => Err(self.err("an expression")),
        }
    }

    fn call(&mut self, name: String, start: usize) -> Result<Expr, ParseError> {
        let arity = if self.cfg.is_elementary(&name) {
            1
        } else if let Some(args) = self.decls.function_args(&name) {
            args.len()
        } else {
            return Err(self.err_kind(start, ParseErrorKind::UnknownFunction(name)));
        };
        self.bump();
        self.expect('(')?;
        let mut args = vec![self.expr()?];
        while self.eat(',') {
            args.push(self.expr()?);
        }
        self.expect(')')?;
        if args.len() != arity {
            return Err(self.math(start, format!("`{name}` expects {arity} argument(s), got {}", args.len())));
        }
        Ok(Expr::Func(name, args))
    }

    fn differential(&mut self, start: usize) -> Result<Expr, ParseError> {
        self.bump();
        self.expect('[')?;
        let inner = self.expr()?;
        let n = if self.eat(',') { self.positive_int()? } else { 1 };
        self.expect(']')?;
        if let Expr::Var(v) = &inner {
            if n > self.cfg.max_order {
                return Err(self.diff_err(start, DiffError::OrderGuardExceeded { order: n, limit: self.cfg.max_order }));
            }
            return Ok(Expr::DiffAtom(v.clone(), n));
        }
        let inner = normalize(&inner).map_err(|e| self.math(start, e))?;
        differential::nth_differential(&inner, n, self.decls, self.cfg).map_err(|e| self.diff_err(start, e))
    }

    fn partial(&mut self, start: usize) -> Result<Expr, ParseError> {
        self.bump();
        self.expect('[')?;
        let fstart = self.offset();
        let f = self.ident()?;
        let Some(args) = self.decls.function_args(&f).map(<[String]>::to_vec) else {
            return Err(self.err_kind(fstart, ParseErrorKind::UnknownFunction(f)));
        };
        let mut vary = Vec::new();
        self.expect(',')?;
        loop {
            let vstart = self.offset();
            let v = self.ident()?;
            if !args.contains(&v) {
                return Err(self.err_kind(vstart, ParseErrorKind::VaryVarNotArgument { var: v, function: f }));
            }
            if vary.contains(&v) {
                return Err(self.math(vstart, format!("`{v}` listed twice")));
            }
            vary.push(v);
            if !self.eat(',') {
                break;
            }
        }
        self.expect(']')?;
        let target = Expr::Func(f, args.iter().map(|a| Expr::Var(a.clone())).collect());
        differential::partial_differential(&target, &vary, self.decls, self.cfg).map_err(|e| self.diff_err(start, e))
    }

    fn derivative(&mut self) -> Result<Expr, ParseError> {
        self.bump();
        self.expect('[')?;
        let target = self.expr()?;
        self.expect(';')?;
        let wrt = self.ident()?;
        let n = if self.eat(';') { self.positive_int()? } else { 1 };
        self.expect(']')?;
        Ok(Expr::DerivAtom(Box::new(target), wrt, n))
    }
}

/// Parses and normalizes an expression.
pub fn parse_expr(src: &str, decls: &DependencyDecls) -> Result<Expr, ParseError> {
    parse_expr_with(src, decls, &DiffConfig::default())
}

pub fn parse_expr_with(src: &str, decls: &DependencyDecls, cfg: &DiffConfig) -> Result<Expr, ParseError> {
    parse_fragment(src, 0, src, decls, cfg)
}

fn parse_fragment(
    frag: &str,
    base: usize,
    full: &str,
    decls: &DependencyDecls,
    cfg: &DiffConfig,
) -> Result<Expr, ParseError> {
    let toks = tokenize(frag, base, full)?;
    let mut p = Parser { full, toks, pos: 0, depth: 0, decls, cfg };
    let raw = p.expr()?;
    if *p.peek() != Tok::Eof {
        return Err(p.err("an operator or end of input"));
    }
    normalize(&raw).map_err(|e| p.math(base, e))
}

/// One statement of a declaration or jets file, with its byte offset.
pub(crate) struct Line<'a> {
    pub offset: usize,
    pub words: Vec<(&'a str, usize)>,
    /// The text after the first two words, for statements that carry an expression.
    pub rest: (&'a str, usize),
}

pub(crate) fn lines(src: &str) -> Vec<Line<'_>> {
    let mut out = Vec::new();
    let mut offset = 0;
    for raw in src.split_inclusive('\n') {
        let content = raw.split('#').next().unwrap_or("");
        let content = content.trim_end_matches(['\n', '\r']);
        let mut words = Vec::new();
        let mut idx = 0;
        for w in content.split(|c: char| c.is_ascii_whitespace()) {
            if !w.is_empty() {
                let at = content[idx..].find(w).map_or(idx, |p| idx + p);
                words.push((w, offset + at));
                idx = at + w.len();
            }
        }
        if !words.is_empty() {
            let rest = if words.len() > 2 {
                let at = words[2].1 - offset;
                (&content[at..], words[2].1)
            } else {
                ("", offset + content.len())
            };
            out.push(Line { offset, words, rest });
        }
        offset += raw.len();
    }
    out
}

fn is_ident(s: &str) -> bool {
    let mut cs = s.chars();
    cs.next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_') && cs.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

pub(crate) fn syntax_at(src: &str, offset: usize, expected: &str, found: &str) -> ParseError {
    ParseError::at(src, offset, ParseErrorKind::Syntax, expected, found)
}

/// Applies one declaration statement. Returns `Ok(false)` when the keyword is not a
/// declaration keyword.
pub(crate) fn apply_decl(
    src: &str,
    line: &Line<'_>,
    decls: &mut DependencyDecls,
    seen: &mut BTreeMap<String, usize>,
) -> Result<bool, ParseError> {
    let (kw, _) = line.words[0];
    let args = &line.words[1..];
    if !matches!(kw, "base" | "var" | "depends" | "function") {
        return Ok(false);
    }
    for (w, at) in args {
        if !is_ident(w) {
            return Err(syntax_at(src, *at, "an identifier", &format!("`{w}`")));
        }
    }
    let line_no = ParseError::at(src, line.offset, ParseErrorKind::Syntax, "", "").line;
    let dup = |name: &str, at: usize| {
        ParseError::at(
            src,
            at,
            ParseErrorKind::Decl(DeclError::DuplicateDeclaration { name: name.to_string(), line: line_no }),
            "",
            "",
        )
    };
    let need = |n: usize, what: &str| -> Result<(), ParseError> {
        if args.len() < n {
            let end = line.words.last().map_or(line.offset, |(w, at)| at + w.len());
            return Err(syntax_at(src, end, what, "end of line"));
        }
        Ok(())
    };
    match kw {
        "base" => {
            need(1, "a variable name")?;
            if args.len() > 1 {
                return Err(syntax_at(src, args[1].1, "end of line", &format!("`{}`", args[1].0)));
            }
            if decls.base.is_some() {
                return Err(dup("base", line.offset));
            }
            decls.base = Some(args[0].0.to_string());
            decls.vars.insert(args[0].0.to_string());
        }
        "var" => {
            need(1, "a variable name")?;
            for (v, at) in args {
                if seen.insert(format!("var {v}"), *at).is_some() {
                    return Err(dup(v, *at));
                }
                decls.vars.insert(v.to_string());
            }
        }
        "depends" => {
            need(2, "a variable it depends on")?;
            let (v, at) = args[0];
            if seen.insert(format!("depends {v}"), at).is_some() {
                return Err(dup(v, at));
            }
            let on: Vec<&str> = args[1..].iter().map(|(w, _)| *w).collect();
            *decls = std::mem::take(decls).with_depends(v, &on);
        }
        "function" => {
            need(1, "a function name")?;
            let (f, at) = args[0];
            if decls.functions.contains_key(f) {
                return Err(dup(f, at));
            }
            let params: Vec<&str> = args[1..].iter().map(|(w, _)| *w).collect();
            for (i, p) in params.iter().enumerate() {
                if params[..i].contains(p) {
                    return Err(dup(p, args[i + 1].1));
                }
            }
            *decls = std::mem::take(decls).with_function(f, &params);
        }
        _ => return Ok(false),
    }
    Ok(true)
}

pub(crate) fn validate_decls(
    src: &str,
    decls: &DependencyDecls,
    seen: &BTreeMap<String, usize>,
) -> Result<(), ParseError> {
    decls.validate().map_err(|e| {
        let offset = match &e {
            DeclError::CyclicDependency(c) => c.first().and_then(|v| seen.get(&format!("depends {v}"))).copied(),
            DeclError::UnreachableFromBase(v) => {
                seen.get(&format!("var {v}")).or_else(|| seen.get(&format!("depends {v}"))).copied()
            }
            DeclError::DuplicateDeclaration { .. } => None,
        };
        ParseError::at(src, offset.unwrap_or(0), ParseErrorKind::Decl(e), "", "")
    })
}

/// Parses a declaration file: `base q`, `var x`, `depends x t`, `function f x y`.
/// `#` starts a comment.
pub fn parse_decls(src: &str) -> Result<DependencyDecls, ParseError> {
    let mut decls = DependencyDecls::new();
    let mut seen = BTreeMap::new();
    for line in lines(src) {
        if !apply_decl(src, &line, &mut decls, &mut seen)? {
            let (w, at) = line.words[0];
            return Err(syntax_at(src, at, "`base`, `var`, `depends` or `function`", &format!("`{w}`")));
        }
    }
    validate_decls(src, &decls, &seen)?;
    Ok(decls)
}

/// Parses an expression embedded in a larger file, reporting positions in that file.
pub(crate) fn parse_embedded(
    full: &str,
    frag: &str,
    offset: usize,
    decls: &DependencyDecls,
) -> Result<Expr, ParseError> {
    parse_fragment(frag, offset, full, decls, &DiffConfig::default())
}
