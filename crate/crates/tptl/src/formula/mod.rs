//! Formula representation and the static pipeline that prepares a formula
//! for monitoring.
//!
//! A specification moves through this module in stages: [`parse`] builds a
//! [`Formula`] from text, [`validate_closed`] checks that every time
//! constraint sits under a matching freeze binder, [`check_encapsulated`]
//! checks that the formula stays inside the independent-variable fragment,
//! [`alpha_rename`] gives every binder a unique name, and
//! [`index_subformulas`] flattens the tree into the row table the monitor
//! works on. [`prepare`] runs the whole pipeline in that order.
//!
//! Timed specifications written with interval operators live in
//! [`MtlFormula`]; [`translate_mtl`] embeds them into [`Formula`] using one
//! fresh frozen variable per bounded temporal operator.

mod index;
mod mtl;
mod parser;
mod validate;

pub use index::{index_subformulas, FrozenSubtree, IndexedFormula, NodeKind};
pub use mtl::{translate_mtl, Interval, MtlFormula};
pub use parser::{parse, parse_mtl, ParseError};
pub use validate::{
    alpha_rename, check_encapsulated, validate_closed, ClosednessError, EncapsulationError,
    UnboundOccurrence,
};

use std::fmt;
use thiserror::Error;

/// Comparison operator of a time constraint `x ~ r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Le,
    Lt,
    Eq,
    Gt,
    Ge,
}

impl Relation {
    /// Evaluates `lhs ~ rhs` with exact floating-point comparison.
    pub fn holds(self, lhs: f64, rhs: f64) -> bool {
        match self {
            Relation::Le => lhs <= rhs,
            Relation::Lt => lhs < rhs,
            Relation::Eq => lhs == rhs,
            Relation::Gt => lhs > rhs,
            Relation::Ge => lhs >= rhs,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Lt => "<",
            Relation::Eq => "=",
            Relation::Gt => ">",
            Relation::Ge => ">=",
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// A temporal logic formula over propositions and frozen time variables.
///
/// `Freeze(x, body)` records the current sample's timestamp in `x`;
/// `Constraint(x, ~, r)` later compares the elapsed time against `r`, so
/// `x ~ r` holds at a sample with timestamp `t` when `t - frozen(x) ~ r`.
/// There is no dedicated falsum node: `false` parses to `Not(True)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Formula {
    True,
    Prop(String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Next(Box<Formula>),
    Until(Box<Formula>, Box<Formula>),
    Release(Box<Formula>, Box<Formula>),
    Eventually(Box<Formula>),
    Always(Box<Formula>),
    Freeze(String, Box<Formula>),
    Constraint(String, Relation, f64),
}

impl Formula {
    pub fn tru() -> Formula {
        Formula::True
    }

    pub fn fals() -> Formula {
        Formula::Not(Box::new(Formula::True))
    }

    pub fn prop(name: impl Into<String>) -> Formula {
        Formula::Prop(name.into())
    }

    // A constructor like its siblings, not an operator impl.
    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(lhs: Formula, rhs: Formula) -> Formula {
        Formula::And(Box::new(lhs), Box::new(rhs))
    }

    pub fn or(lhs: Formula, rhs: Formula) -> Formula {
        Formula::Or(Box::new(lhs), Box::new(rhs))
    }

    pub fn implies(lhs: Formula, rhs: Formula) -> Formula {
        Formula::Implies(Box::new(lhs), Box::new(rhs))
    }

    pub fn next(f: Formula) -> Formula {
        Formula::Next(Box::new(f))
    }

    pub fn until(lhs: Formula, rhs: Formula) -> Formula {
        Formula::Until(Box::new(lhs), Box::new(rhs))
    }

    pub fn release(lhs: Formula, rhs: Formula) -> Formula {
        Formula::Release(Box::new(lhs), Box::new(rhs))
    }

    pub fn eventually(f: Formula) -> Formula {
        Formula::Eventually(Box::new(f))
    }

    pub fn always(f: Formula) -> Formula {
        Formula::Always(Box::new(f))
    }

    pub fn freeze(variable: impl Into<String>, body: Formula) -> Formula {
        Formula::Freeze(variable.into(), Box::new(body))
    }

    pub fn constraint(variable: impl Into<String>, relation: Relation, bound: f64) -> Formula {
        Formula::Constraint(variable.into(), relation, bound)
    }

    /// Number of nodes in the syntax tree.
    pub fn size(&self) -> usize {
        let mut count = 0;
        let mut stack = vec![self];
        while let Some(f) = stack.pop() {
            count += 1;
            match f {
                Formula::True | Formula::Prop(_) | Formula::Constraint(..) => {}
                Formula::Not(c)
                | Formula::Next(c)
                | Formula::Eventually(c)
                | Formula::Always(c)
                | Formula::Freeze(_, c) => stack.push(c),
                Formula::And(l, r)
                | Formula::Or(l, r)
                | Formula::Implies(l, r)
                | Formula::Until(l, r)
                | Formula::Release(l, r) => {
                    stack.push(l);
                    stack.push(r);
                }
            }
        }
        count
    }

    /// Children in left-to-right order.
    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::True | Formula::Prop(_) | Formula::Constraint(..) => vec![],
            Formula::Not(c)
            | Formula::Next(c)
            | Formula::Eventually(c)
            | Formula::Always(c)
            | Formula::Freeze(_, c) => vec![c],
            Formula::And(l, r)
            | Formula::Or(l, r)
            | Formula::Implies(l, r)
            | Formula::Until(l, r)
            | Formula::Release(l, r) => vec![l, r],
        }
    }

    fn prints_as_atom(&self) -> bool {
        match self {
            Formula::True | Formula::Prop(_) | Formula::Constraint(..) => true,
            Formula::Not(c) => matches!(**c, Formula::True),
            _ => false,
        }
    }

    fn prints_with_parens(&self) -> bool {
        matches!(
            self,
            Formula::And(..)
                | Formula::Or(..)
                | Formula::Implies(..)
                | Formula::Until(..)
                | Formula::Release(..)
        ) && !self.prints_as_atom()
    }
}

/// Writes a unary operand: atoms stay bare, binary nodes bring their own
/// parentheses, everything else is wrapped so the rendering re-parses to the
/// same tree.
fn write_operand(f: &Formula, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    if f.prints_as_atom() || f.prints_with_parens() {
        write!(out, "{f}")
    } else {
        write!(out, "({f})")
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => out.write_str("true"),
            Formula::Not(c) if matches!(**c, Formula::True) => out.write_str("false"),
            Formula::Prop(name) => out.write_str(name),
            Formula::Constraint(var, rel, bound) => write!(out, "{var} {rel} {bound}"),
            Formula::Not(c) => {
                out.write_str("! ")?;
                write_operand(c, out)
            }
            Formula::Next(c) => {
                out.write_str("X ")?;
                write_operand(c, out)
            }
            Formula::Eventually(c) => {
                out.write_str("F ")?;
                write_operand(c, out)
            }
            Formula::Always(c) => {
                out.write_str("G ")?;
                write_operand(c, out)
            }
            Formula::Freeze(var, c) => {
                write!(out, "{var}.")?;
                if c.prints_as_atom() {
                    write!(out, "{c}")
                } else {
                    write!(out, "({c})")
                }
            }
            Formula::And(l, r) => write!(out, "({l} /\\ {r})"),
            Formula::Or(l, r) => write!(out, "({l} \\/ {r})"),
            Formula::Implies(l, r) => write!(out, "({l} -> {r})"),
            Formula::Until(l, r) => write!(out, "({l} U {r})"),
            Formula::Release(l, r) => write!(out, "({l} R {r})"),
        }
    }
}

/// Position of a node in a formula tree: child offsets from the root,
/// zero-based.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FormulaPath(pub Vec<usize>);

impl fmt::Display for FormulaPath {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        out.write_str("root")?;
        for step in &self.0 {
            write!(out, ".{step}")?;
        }
        Ok(())
    }
}

/// Failure of the static pipeline in [`prepare`].
#[derive(Debug, Error)]
pub enum PrepareError {
    #[error(transparent)]
    NotClosed(#[from] ClosednessError),
    #[error(transparent)]
    NotEncapsulated(#[from] EncapsulationError),
}

/// Validates, renames, and indexes a formula so it is ready to monitor.
pub fn prepare(f: &Formula) -> Result<IndexedFormula, PrepareError> {
    validate_closed(f)?;
    check_encapsulated(f)?;
    Ok(index_subformulas(&alpha_rename(f)))
}
