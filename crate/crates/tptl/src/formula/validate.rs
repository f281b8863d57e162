//! Static checks that gate monitoring: closedness, the independence
//! restriction on freeze binders, and alpha renaming.
//!
//! A formula is monitorable when every constraint variable is bound by an
//! enclosing freeze binder (closed) and every freeze body constrains only
//! its own binder's variable (each frozen block is self-contained). The
//! second condition still admits nested binders: in `x.F y.(y <= 1)` the
//! inner body mentions only `y`, so both blocks are self-contained.

use super::{Formula, FormulaPath};
use std::collections::{HashMap, HashSet};
use std::fmt;
use thiserror::Error;

/// One constraint occurrence whose variable has no enclosing binder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnboundOccurrence {
    pub variable: String,
    pub path: FormulaPath,
}

impl fmt::Display for UnboundOccurrence {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(out, "`{}` at {}", self.variable, self.path)
    }
}

/// The formula mentions constraint variables that no freeze binder binds.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ClosednessError {
    pub unbound: Vec<UnboundOccurrence>,
}

impl fmt::Display for ClosednessError {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        out.write_str("formula is not closed: unbound ")?;
        for (k, occurrence) in self.unbound.iter().enumerate() {
            if k > 0 {
                out.write_str(", ")?;
            }
            write!(out, "{occurrence}")?;
        }
        Ok(())
    }
}

/// A freeze body that is not self-contained, with a witness path.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EncapsulationError {
    /// A constraint inside the body of `binder` refers to a variable frozen
    /// further out.
    #[error("constraint on `{variable}` at {path} lies inside the body of `{binder}`")]
    ForeignVariable { variable: String, binder: String, path: FormulaPath },
    /// A binder reuses a name that is already frozen in scope, which would
    /// make occurrences of that name ambiguous.
    #[error("binder `{variable}` at {path} shadows an enclosing binder of the same name")]
    Shadowed { variable: String, path: FormulaPath },
}

/// Checks that every constraint variable is bound by an enclosing freeze
/// binder. Reports all unbound occurrences, not only the first.
pub fn validate_closed(formula: &Formula) -> Result<(), ClosednessError> {
    let mut unbound = Vec::new();
    let mut scope: Vec<&str> = Vec::new();
    let mut path = Vec::new();
    closed_walk(formula, &mut scope, &mut path, &mut unbound);
    if unbound.is_empty() {
        Ok(())
    } else {
        Err(ClosednessError { unbound })
    }
}

fn closed_walk<'f>(
    formula: &'f Formula,
    scope: &mut Vec<&'f str>,
    path: &mut Vec<usize>,
    unbound: &mut Vec<UnboundOccurrence>,
) {
    match formula {
        Formula::Constraint(variable, _, _) => {
            if !scope.iter().any(|bound| bound == variable) {
                unbound.push(UnboundOccurrence {
                    variable: variable.clone(),
                    path: FormulaPath(path.clone()),
                });
            }
        }
        Formula::Freeze(variable, body) => {
            scope.push(variable);
            path.push(0);
            closed_walk(body, scope, path, unbound);
            path.pop();
            scope.pop();
        }
        other => {
            for (k, child) in other.children().into_iter().enumerate() {
                path.push(k);
                closed_walk(child, scope, path, unbound);
                path.pop();
            }
        }
    }
}

/// Checks that every freeze body constrains only its own binder's variable
/// and that no binder shadows an enclosing one. Returns the first violation
/// in depth-first order together with a witness path.
///
/// Constraint variables with no enclosing binder at all are the business of
/// [`validate_closed`] and are ignored here.
pub fn check_encapsulated(formula: &Formula) -> Result<(), EncapsulationError> {
    let mut scope: Vec<&str> = Vec::new();
    let mut path = Vec::new();
    encapsulation_walk(formula, &mut scope, &mut path)
}

fn encapsulation_walk<'f>(
    formula: &'f Formula,
    scope: &mut Vec<&'f str>,
    path: &mut Vec<usize>,
) -> Result<(), EncapsulationError> {
    match formula {
        Formula::Constraint(variable, _, _) => {
            let innermost = scope.last().copied();
            if innermost != Some(variable.as_str()) && scope.iter().any(|bound| bound == variable) {
                return Err(EncapsulationError::ForeignVariable {
                    variable: variable.clone(),
                    binder: innermost.expect("outer binder implies nonempty scope").to_owned(),
                    path: FormulaPath(path.clone()),
                });
            }
            Ok(())
        }
        Formula::Freeze(variable, body) => {
            if scope.iter().any(|bound| bound == variable) {
                return Err(EncapsulationError::Shadowed {
                    variable: variable.clone(),
                    path: FormulaPath(path.clone()),
                });
            }
            scope.push(variable);
            path.push(0);
            let result = encapsulation_walk(body, scope, path);
            path.pop();
            scope.pop();
            result
        }
        other => {
            for (k, child) in other.children().into_iter().enumerate() {
                path.push(k);
                encapsulation_walk(child, scope, path)?;
                path.pop();
            }
            Ok(())
        }
    }
}

/// Rewrites every freeze binder to a globally unique name, the original base
/// followed by a per-base counter (`x` becomes `x1`, a second `x` becomes
/// `x2`, `y` becomes `y1`). Bound constraint variables follow their binder;
/// unbound ones are left untouched. The result is logically equivalent to
/// the input.
pub fn alpha_rename(formula: &Formula) -> Formula {
    let mut used = HashSet::new();
    collect_variable_names(formula, &mut used);
    let mut renamer = Renamer { used, counters: HashMap::new(), scope: HashMap::new() };
    renamer.rename(formula)
}

fn collect_variable_names(formula: &Formula, names: &mut HashSet<String>) {
    match formula {
        Formula::Freeze(variable, body) => {
            names.insert(variable.clone());
            collect_variable_names(body, names);
        }
        Formula::Constraint(variable, _, _) => {
            names.insert(variable.clone());
        }
        other => {
            for child in other.children() {
                collect_variable_names(child, names);
            }
        }
    }
}

struct Renamer {
    /// Every name that exists in the input or has been assigned, so a fresh
    /// name never collides with either.
    used: HashSet<String>,
    counters: HashMap<String, u32>,
    /// Original name to the stack of names assigned to its live binders.
    scope: HashMap<String, Vec<String>>,
}

impl Renamer {
    fn fresh(&mut self, base: &str) -> String {
        let counter = self.counters.entry(base.to_owned()).or_insert(0);
        loop {
            *counter += 1;
            let candidate = format!("{base}{counter}");
            if self.used.insert(candidate.clone()) {
                return candidate;
            }
        }
    }

    fn rename(&mut self, formula: &Formula) -> Formula {
        match formula {
            Formula::True => Formula::True,
            Formula::Prop(name) => Formula::Prop(name.clone()),
            Formula::Not(f) => Formula::not(self.rename(f)),
            Formula::And(l, r) => Formula::and(self.rename(l), self.rename(r)),
            Formula::Or(l, r) => Formula::or(self.rename(l), self.rename(r)),
            Formula::Implies(l, r) => Formula::implies(self.rename(l), self.rename(r)),
            Formula::Next(f) => Formula::next(self.rename(f)),
            Formula::Until(l, r) => Formula::until(self.rename(l), self.rename(r)),
            Formula::Release(l, r) => Formula::release(self.rename(l), self.rename(r)),
            Formula::Eventually(f) => Formula::eventually(self.rename(f)),
            Formula::Always(f) => Formula::always(self.rename(f)),
            Formula::Freeze(variable, body) => {
                let assigned = self.fresh(variable);
                self.scope.entry(variable.clone()).or_default().push(assigned.clone());
                let body = self.rename(body);
                self.scope.get_mut(variable).expect("pushed above").pop();
                Formula::Freeze(assigned, Box::new(body))
            }
            Formula::Constraint(variable, relation, bound) => {
                let name = self
                    .scope
                    .get(variable)
                    .and_then(|stack| stack.last())
                    .cloned()
                    .unwrap_or_else(|| variable.clone());
                Formula::Constraint(name, *relation, *bound)
            }
        }
    }
}
