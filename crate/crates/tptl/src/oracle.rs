//! Reference evaluator: a direct recursive transcription of the defining
//! semantics, kept deliberately naive so it shares no machinery with the
//! table-based monitor. Exponential in the worst case; use it on desk-scale
//! inputs to cross-check monitor verdicts.

use crate::formula::{Formula, MtlFormula};
use crate::trace::TimedStateSequence;
use std::collections::HashMap;
use thiserror::Error;

/// Frozen-variable environment. The empty environment is the starting point
/// for closed formulas; looking up a variable it does not bind is an error
/// rather than a default, so an unbound variable cannot hide behind a
/// plausible verdict.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Environment {
    bindings: HashMap<String, f64>,
}

impl Environment {
    pub fn new() -> Self {
        Environment::default()
    }

    /// Returns a copy of the environment with `variable` (re)bound.
    pub fn bind(&self, variable: &str, value: f64) -> Environment {
        let mut bindings = self.bindings.clone();
        bindings.insert(variable.to_owned(), value);
        Environment { bindings }
    }

    pub fn lookup(&self, variable: &str) -> Option<f64> {
        self.bindings.get(variable).copied()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("variable `{variable}` is not bound at position {position}")]
    UnboundVariable { variable: String, position: usize },
}

/// Evaluates `formula` at position `i` of `trace` under `env`, by the
/// defining clauses. Propositions outside the trace universe are false.
/// Derived operators are evaluated through their defining expansions.
pub fn eval_semantics(
    formula: &Formula,
    trace: &TimedStateSequence,
    i: usize,
    env: &Environment,
) -> Result<bool, EvalError> {
    assert!(i < trace.len(), "position {i} outside the trace");
    match formula {
        Formula::True => Ok(true),
        Formula::Prop(name) => Ok(trace.prop_index(name).is_some_and(|p| trace.value(i, p))),
        Formula::Not(f) => Ok(!eval_semantics(f, trace, i, env)?),
        Formula::And(l, r) => {
            let l = eval_semantics(l, trace, i, env)?;
            let r = eval_semantics(r, trace, i, env)?;
            Ok(l && r)
        }
        Formula::Or(l, r) => {
            let l = eval_semantics(l, trace, i, env)?;
            let r = eval_semantics(r, trace, i, env)?;
            Ok(l || r)
        }
        Formula::Implies(l, r) => {
            let expansion = Formula::or(Formula::not((**l).clone()), (**r).clone());
            eval_semantics(&expansion, trace, i, env)
        }
        Formula::Next(f) => {
            if i + 1 == trace.len() {
                Ok(false)
            } else {
                eval_semantics(f, trace, i + 1, env)
            }
        }
        Formula::Until(l, r) => {
            // Left-to-right witness scan: reaching position j means the left
            // side held on [i, j); once it fails, no later witness exists.
            for j in i..trace.len() {
                if eval_semantics(r, trace, j, env)? {
                    return Ok(true);
                }
                if !eval_semantics(l, trace, j, env)? {
                    return Ok(false);
                }
            }
            Ok(false)
        }
        Formula::Release(l, r) => {
            let expansion = Formula::not(Formula::until(
                Formula::not((**l).clone()),
                Formula::not((**r).clone()),
            ));
            eval_semantics(&expansion, trace, i, env)
        }
        Formula::Eventually(f) => {
            let expansion = Formula::until(Formula::True, (**f).clone());
            eval_semantics(&expansion, trace, i, env)
        }
        Formula::Always(f) => {
            let expansion = Formula::not(Formula::eventually(Formula::not((**f).clone())));
            eval_semantics(&expansion, trace, i, env)
        }
        Formula::Freeze(variable, body) => {
            let inner = env.bind(variable, trace.time(i));
            eval_semantics(body, trace, i, &inner)
        }
        Formula::Constraint(variable, relation, bound) => {
            let frozen = env.lookup(variable).ok_or_else(|| EvalError::UnboundVariable {
                variable: variable.clone(),
                position: i,
            })?;
            Ok(relation.holds(trace.time(i) - frozen, *bound))
        }
    }
}

/// Evaluates an interval-decorated formula at position `i` by the pointwise
/// timed semantics, independently of the freeze translation.
pub fn eval_mtl(formula: &MtlFormula, trace: &TimedStateSequence, i: usize) -> bool {
    assert!(i < trace.len(), "position {i} outside the trace");
    let elapsed = |j: usize| trace.time(j) - trace.time(i);
    match formula {
        MtlFormula::True => true,
        MtlFormula::Prop(name) => trace.prop_index(name).is_some_and(|p| trace.value(i, p)),
        MtlFormula::Not(f) => !eval_mtl(f, trace, i),
        MtlFormula::And(l, r) => eval_mtl(l, trace, i) && eval_mtl(r, trace, i),
        MtlFormula::Or(l, r) => eval_mtl(l, trace, i) || eval_mtl(r, trace, i),
        MtlFormula::Implies(l, r) => !eval_mtl(l, trace, i) || eval_mtl(r, trace, i),
        MtlFormula::Next(f) => i + 1 < trace.len() && eval_mtl(f, trace, i + 1),
        MtlFormula::Until(l, r, interval) => (i..trace.len()).any(|j| {
            interval.contains(elapsed(j))
                && eval_mtl(r, trace, j)
                && (i..j).all(|k| eval_mtl(l, trace, k))
        }),
        MtlFormula::Release(l, r, interval) => (i..trace.len()).all(|j| {
            !interval.contains(elapsed(j))
                || eval_mtl(r, trace, j)
                || (i..j).any(|k| eval_mtl(l, trace, k))
        }),
        MtlFormula::Eventually(f, interval) => {
            (i..trace.len()).any(|j| interval.contains(elapsed(j)) && eval_mtl(f, trace, j))
        }
        MtlFormula::Always(f, interval) => {
            (i..trace.len()).all(|j| !interval.contains(elapsed(j)) || eval_mtl(f, trace, j))
        }
    }
}
