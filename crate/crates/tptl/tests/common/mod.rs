//! Seeded generators shared by the integration suites.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::{Mutex, MutexGuard};
use tptl::formula::{Formula, Interval, MtlFormula, Relation};
use tptl::trace::TimedStateSequence;

pub const TRACE_PROPS: [&str; 3] = ["a", "b", "c"];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

static SERIAL: Mutex<()> = Mutex::new(());

/// Serializes timing-sensitive tests; a panicked holder must not wedge the
/// rest of the suite.
pub fn serial() -> MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|poisoned| poisoned.into_inner())
}

/// Random trace over `a, b, c` with up to `max_len` samples. Steps stay
/// small and occasionally repeat a timestamp.
pub fn random_trace(rng: &mut ChaCha8Rng, max_len: usize) -> TimedStateSequence {
    let len = rng.gen_range(1..=max_len);
    let mut samples = Vec::with_capacity(len);
    let mut time = 0.0;
    for i in 0..len {
        if i > 0 && !rng.gen_ratio(1, 8) {
            time += rng.gen_range(1..=40) as f64 / 100.0;
        }
        let state = (0..TRACE_PROPS.len()).map(|_| rng.gen()).collect();
        samples.push((time, state));
    }
    let props = TRACE_PROPS.iter().map(|p| p.to_string()).collect();
    TimedStateSequence::from_parts(props, samples, false).unwrap()
}

fn relation(rng: &mut ChaCha8Rng) -> Relation {
    [Relation::Le, Relation::Lt, Relation::Eq, Relation::Gt, Relation::Ge][rng.gen_range(0..5)]
}

fn bound(rng: &mut ChaCha8Rng) -> f64 {
    rng.gen_range(0..=30) as f64 / 10.0
}

/// Closed formula whose constraints target only the innermost enclosing
/// binder, so it stays in the monitorable fragment. At most three variables
/// and temporal depth five.
pub fn random_encapsulated(rng: &mut ChaCha8Rng) -> Formula {
    let mut budget = rng.gen_range(4..=24);
    let mut vars = 0;
    node(rng, &mut budget, 5, &mut Vec::new(), &mut vars, true)
}

/// Closed formula whose constraints may target any enclosing binder, for
/// exercising the parts of the pipeline that do not require the
/// self-contained fragment.
pub fn random_closed(rng: &mut ChaCha8Rng) -> Formula {
    let mut budget = rng.gen_range(4..=24);
    let mut vars = 0;
    node(rng, &mut budget, 5, &mut Vec::new(), &mut vars, false)
}

fn node(
    rng: &mut ChaCha8Rng,
    budget: &mut i32,
    depth: usize,
    scope: &mut Vec<String>,
    vars: &mut usize,
    innermost_only: bool,
) -> Formula {
    *budget -= 1;
    let mut pool: Vec<u8> = vec![0, 0, 0, 1];
    if !scope.is_empty() {
        pool.extend([2, 2]);
    }
    if *budget > 0 {
        pool.extend([3, 3, 4, 4, 5, 5, 6]);
        if depth > 0 {
            pool.extend([7, 8, 8, 9, 10, 10, 11, 11]);
        }
        if *vars < 3 {
            pool.extend([12, 12]);
        }
    }
    match pool[rng.gen_range(0..pool.len())] {
        0 => Formula::prop(TRACE_PROPS[rng.gen_range(0..TRACE_PROPS.len())]),
        1 => Formula::True,
        2 => {
            let var = if innermost_only {
                scope.last().unwrap().clone()
            } else {
                scope[rng.gen_range(0..scope.len())].clone()
            };
            Formula::constraint(&var, relation(rng), bound(rng))
        }
        3 => Formula::not(node(rng, budget, depth, scope, vars, innermost_only)),
        4 => Formula::and(
            node(rng, budget, depth, scope, vars, innermost_only),
            node(rng, budget, depth, scope, vars, innermost_only),
        ),
        5 => Formula::or(
            node(rng, budget, depth, scope, vars, innermost_only),
            node(rng, budget, depth, scope, vars, innermost_only),
        ),
        6 => Formula::implies(
            node(rng, budget, depth, scope, vars, innermost_only),
            node(rng, budget, depth, scope, vars, innermost_only),
        ),
        7 => Formula::next(node(rng, budget, depth - 1, scope, vars, innermost_only)),
        8 => Formula::until(
            node(rng, budget, depth - 1, scope, vars, innermost_only),
            node(rng, budget, depth - 1, scope, vars, innermost_only),
        ),
        9 => Formula::release(
            node(rng, budget, depth - 1, scope, vars, innermost_only),
            node(rng, budget, depth - 1, scope, vars, innermost_only),
        ),
        10 => Formula::eventually(node(rng, budget, depth - 1, scope, vars, innermost_only)),
        11 => Formula::always(node(rng, budget, depth - 1, scope, vars, innermost_only)),
        12 => {
            *vars += 1;
            let name = format!("v{vars}");
            scope.push(name.clone());
            let body = node(rng, budget, depth, scope, vars, innermost_only);
            scope.pop();
            Formula::freeze(&name, body)
        }
        _ => unreachable!(),
    }
}

fn bounded_interval(rng: &mut ChaCha8Rng) -> Interval {
    let lower = rng.gen_range(0..=10) as f64 / 10.0;
    let upper = lower + rng.gen_range(0..=15) as f64 / 10.0;
    Interval { lower, upper }
}

/// Random formula with bounded operator intervals, temporal depth at most
/// four.
pub fn random_mtl(rng: &mut ChaCha8Rng) -> MtlFormula {
    let depth = rng.gen_range(1..=4);
    mtl_node(rng, depth)
}

fn mtl_node(rng: &mut ChaCha8Rng, depth: usize) -> MtlFormula {
    let leaf = |rng: &mut ChaCha8Rng| {
        if rng.gen_ratio(1, 6) {
            MtlFormula::True
        } else {
            MtlFormula::prop(TRACE_PROPS[rng.gen_range(0..TRACE_PROPS.len())])
        }
    };
    if depth == 0 {
        return leaf(rng);
    }
    match rng.gen_range(0..10u8) {
        0 => leaf(rng),
        1 => MtlFormula::not(mtl_node(rng, depth - 1)),
        2 => MtlFormula::and(mtl_node(rng, depth - 1), mtl_node(rng, depth - 1)),
        3 => MtlFormula::or(mtl_node(rng, depth - 1), mtl_node(rng, depth - 1)),
        4 => MtlFormula::implies(mtl_node(rng, depth - 1), mtl_node(rng, depth - 1)),
        5 => MtlFormula::next(mtl_node(rng, depth - 1)),
        6 => MtlFormula::until(
            mtl_node(rng, depth - 1),
            mtl_node(rng, depth - 1),
            bounded_interval(rng),
        ),
        7 => MtlFormula::release(
            mtl_node(rng, depth - 1),
            mtl_node(rng, depth - 1),
            bounded_interval(rng),
        ),
        8 => MtlFormula::eventually(mtl_node(rng, depth - 1), bounded_interval(rng)),
        _ => MtlFormula::always(mtl_node(rng, depth - 1), bounded_interval(rng)),
    }
}
