//! Dependency declarations: which variables depend on which, and the argument lists of
//! declared functions.
//!
//! The hidden ultimate parameter is never a symbol in user expressions. When numeric
//! evaluation needs to name it, `base` does.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DeclError {
    #[error("cyclic dependency: {}", .0.join(" -> "))]
    CyclicDependency(Vec<String>),
    #[error("duplicate declaration of `{name}` on line {line}")]
    DuplicateDeclaration { name: String, line: usize },
    #[error("`{0}` does not reach the base variable")]
    UnreachableFromBase(String),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DependencyDecls {
    pub base: Option<String>,
    /// Variables declared with `var` or mentioned in `depends`.
    pub vars: BTreeSet<String>,
    /// `x -> [t]` means `x` is a function of `t`.
    pub depends: BTreeMap<String, Vec<String>>,
    /// Function name to its ordered argument list.
    pub functions: BTreeMap<String, Vec<String>>,
}

impl DependencyDecls {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_var(mut self, v: &str) -> Self {
        self.vars.insert(v.to_string());
        self
    }

    pub fn with_depends(mut self, v: &str, on: &[&str]) -> Self {
        self.vars.insert(v.to_string());
        for o in on {
            self.vars.insert(o.to_string());
        }
        self.depends.insert(v.to_string(), on.iter().map(|s| s.to_string()).collect());
        self
    }

    pub fn with_function(mut self, f: &str, args: &[&str]) -> Self {
        for a in args {
            self.vars.insert(a.to_string());
        }
        self.functions.insert(f.to_string(), args.iter().map(|s| s.to_string()).collect());
        self
    }

    pub fn function_args(&self, f: &str) -> Option<&[String]> {
        self.functions.get(f).map(Vec::as_slice)
    }

    pub fn parents(&self, v: &str) -> &[String] {
        self.depends.get(v).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Checks acyclicity and, when a base is declared, that every variable reaches it.
    pub fn validate(&self) -> Result<(), DeclError> {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            Visiting,
            Done,
        }
        fn visit(
            d: &DependencyDecls,
            v: &str,
            marks: &mut BTreeMap<String, Mark>,
            stack: &mut Vec<String>,
        ) -> Result<(), DeclError> {
            match marks.get(v) {
                Some(Mark::Done) => return Ok(()),
                Some(Mark::Visiting) => {
                    let start = stack.iter().position(|s| s == v).unwrap_or(0);
                    let mut cycle = stack[start..].to_vec();
                    cycle.push(v.to_string());
                    return Err(DeclError::CyclicDependency(cycle));
                }
                None => {}
            }
            marks.insert(v.to_string(), Mark::Visiting);
            stack.push(v.to_string());
            for p in d.parents(v) {
                visit(d, p, marks, stack)?;
            }
            stack.pop();
            marks.insert(v.to_string(), Mark::Done);
            Ok(())
        }
        let mut marks = BTreeMap::new();
        for v in self.depends.keys() {
            visit(self, v, &mut marks, &mut Vec::new())?;
        }
        if let Some(base) = &self.base {
            for v in &self.vars {
                if !self.reaches(v, base) {
                    return Err(DeclError::UnreachableFromBase(v.clone()));
                }
            }
        }
        Ok(())
    }

    /// True when `v` is `target` or depends on it transitively. Assumes an acyclic graph.
    pub fn reaches(&self, v: &str, target: &str) -> bool {
        v == target || self.parents(v).iter().any(|p| self.reaches(p, target))
    }

    /// Merges another set of declarations into this one.
    pub fn merge(&mut self, other: &DependencyDecls) -> Result<(), DeclError> {
        if let (Some(a), Some(b)) = (&self.base, &other.base) {
            if a != b {
                return Err(DeclError::DuplicateDeclaration { name: b.clone(), line: 0 });
            }
        }
        if self.base.is_none() {
            self.base = other.base.clone();
        }
        self.vars.extend(other.vars.iter().cloned());
        for (k, v) in &other.depends {
            if self.depends.get(k).is_some_and(|old| old != v) {
                return Err(DeclError::DuplicateDeclaration { name: k.clone(), line: 0 });
            }
            self.depends.insert(k.clone(), v.clone());
        }
        for (k, v) in &other.functions {
            if self.functions.get(k).is_some_and(|old| old != v) {
                return Err(DeclError::DuplicateDeclaration { name: k.clone(), line: 0 });
            }
            self.functions.insert(k.clone(), v.clone());
        }
        self.validate()
    }
}
