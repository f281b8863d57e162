//! Scaling experiments: parametric formula patterns, timed monitor runs,
//! and a tabular report.
//!
//! Patterns come in two operator groups and are sized by the number of
//! temporal operators in the core (`ops`, the wrapper excluded) and the
//! number of frozen variables (`vars`). A pattern with `2L` operators nests
//! `L` levels; each level contributes one eventually/always pair (`EA`) or
//! one until/release pair (`UR`). With `vars <= L` the outermost `vars`
//! levels each freeze one variable whose deadline constraint guards the
//! level's target proposition; with `vars == ops` every level freezes two,
//! one per operator of the pair. The whole pattern is wrapped in
//! `G (a1 -> ...)` over the four propositions `a1..a4`.

use crate::formula::{prepare, Formula, IndexedFormula, Relation};
use crate::monitor::monitor;
use crate::trace::{gen_random, TimedStateSequence};
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};
use thiserror::Error;

/// Mean timestamp step of generated benchmark traces.
pub const BENCH_MEAN_STEP: f64 = 0.1;

/// Proposition universe of the benchmark patterns.
pub const BENCH_PROPS: [&str; 4] = ["a1", "a2", "a3", "a4"];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BenchError {
    #[error("ops must be 2, 4, or 8, not {ops}")]
    InvalidOps { ops: usize },
    #[error("vars must be a power of two between 1 and ops, not {vars}")]
    InvalidVars { vars: usize },
    #[error("unknown pattern group `{text}`; expected EA or UR")]
    UnknownGroup { text: String },
}

/// Which operator pair the pattern nests.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PatternGroup {
    /// Eventually/always levels.
    Ea,
    /// Until/release levels.
    Ur,
}

impl fmt::Display for PatternGroup {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        out.write_str(match self {
            PatternGroup::Ea => "EA",
            PatternGroup::Ur => "UR",
        })
    }
}

impl FromStr for PatternGroup {
    type Err = BenchError;

    fn from_str(text: &str) -> Result<Self, BenchError> {
        match text.to_ascii_uppercase().as_str() {
            "EA" => Ok(PatternGroup::Ea),
            "UR" => Ok(PatternGroup::Ur),
            _ => Err(BenchError::UnknownGroup { text: text.to_owned() }),
        }
    }
}

/// One benchmark configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PatternSpec {
    pub group: PatternGroup,
    pub ops: usize,
    pub vars: usize,
}

impl PatternSpec {
    pub fn new(group: PatternGroup, ops: usize, vars: usize) -> Result<Self, BenchError> {
        if !matches!(ops, 2 | 4 | 8) {
            return Err(BenchError::InvalidOps { ops });
        }
        if !vars.is_power_of_two() || vars > ops {
            return Err(BenchError::InvalidVars { vars });
        }
        Ok(PatternSpec { group, ops, vars })
    }

    /// All 18 configurations: both groups, ops in {2, 4, 8}, vars over the
    /// powers of two up to ops.
    pub fn all() -> Vec<PatternSpec> {
        let mut specs = Vec::new();
        for group in [PatternGroup::Ea, PatternGroup::Ur] {
            for ops in [2, 4, 8] {
                for vars in [1, 2, 4, 8] {
                    if vars <= ops {
                        specs.push(PatternSpec { group, ops, vars });
                    }
                }
            }
        }
        specs
    }
}

/// Default deadline bound for pattern constraints, scaled so a deadline
/// spans roughly ten mean steps per core operator.
pub fn default_constraint_bound(ops: usize, mean_step: f64) -> f64 {
    10.0 * mean_step * ops as f64
}

fn prop(name: &str) -> Formula {
    Formula::prop(name)
}

fn deadline(variable: &str, bound: f64) -> Formula {
    Formula::constraint(variable, Relation::Le, bound)
}

/// `a4`, guarded by a deadline when the level is frozen, conjoined with the
/// next level when one exists.
fn target_slot(guard: Option<Formula>, inner: Option<Formula>) -> Formula {
    let base = match guard {
        Some(constraint) => Formula::and(prop("a4"), constraint),
        None => prop("a4"),
    };
    match inner {
        Some(next_level) => Formula::and(base, next_level),
        None => base,
    }
}

fn build_level(spec: &PatternSpec, level: usize, levels: usize, bound: f64) -> Formula {
    let inner = (level < levels).then(|| build_level(spec, level + 1, levels, bound));
    let double = spec.vars == spec.ops;
    let single = !double && level <= spec.vars;
    let x = format!("x{level}");
    let y = format!("y{level}");
    match spec.group {
        PatternGroup::Ea => {
            if double {
                Formula::freeze(
                    &x,
                    Formula::eventually(Formula::and(
                        Formula::and(prop("a2"), deadline(&x, bound)),
                        Formula::freeze(
                            &y,
                            Formula::always(Formula::or(
                                prop("a3"),
                                target_slot(Some(deadline(&y, bound)), inner),
                            )),
                        ),
                    )),
                )
            } else {
                let body = Formula::eventually(Formula::and(
                    prop("a2"),
                    Formula::always(Formula::or(
                        prop("a3"),
                        target_slot(single.then(|| deadline(&x, bound)), inner),
                    )),
                ));
                if single {
                    Formula::freeze(&x, body)
                } else {
                    body
                }
            }
        }
        PatternGroup::Ur => {
            if double {
                Formula::freeze(
                    &x,
                    Formula::and(
                        Formula::and(Formula::until(prop("a2"), prop("a4")), deadline(&x, bound)),
                        Formula::freeze(
                            &y,
                            Formula::release(
                                prop("a3"),
                                target_slot(Some(deadline(&y, bound)), inner),
                            ),
                        ),
                    ),
                )
            } else {
                let body = Formula::until(
                    prop("a2"),
                    Formula::release(
                        prop("a3"),
                        target_slot(single.then(|| deadline(&x, bound)), inner),
                    ),
                );
                if single {
                    Formula::freeze(&x, body)
                } else {
                    body
                }
            }
        }
    }
}

/// Builds the pattern formula of a configuration with the given deadline
/// bound.
pub fn gen_pattern(spec: &PatternSpec, constraint_bound: f64) -> Formula {
    let levels = spec.ops / 2;
    let core = build_level(spec, 1, levels, constraint_bound);
    Formula::always(Formula::implies(prop("a1"), core))
}

fn prepared(spec: &PatternSpec, constraint_bound: Option<f64>) -> IndexedFormula {
    let bound =
        constraint_bound.unwrap_or_else(|| default_constraint_bound(spec.ops, BENCH_MEAN_STEP));
    prepare(&gen_pattern(spec, bound)).expect("patterns are closed and self-contained")
}

/// Times `runs` monitor runs of one configuration over one generated trace.
/// Formula preparation and trace generation happen once, outside the timed
/// region.
pub fn time_config(
    spec: &PatternSpec,
    len: usize,
    runs: usize,
    seed: u64,
    constraint_bound: Option<f64>,
) -> Vec<Duration> {
    let indexed = prepared(spec, constraint_bound);
    let trace = gen_random(len, &BENCH_PROPS, BENCH_MEAN_STEP, seed);
    time_prepared(&indexed, &trace, runs)
}

fn time_prepared(
    indexed: &IndexedFormula,
    trace: &TimedStateSequence,
    runs: usize,
) -> Vec<Duration> {
    // One untimed run first: the initial run pays for cold caches, branch
    // training and lazy page mapping, which would otherwise skew the
    // shortest configurations the most.
    monitor(indexed, trace, false).expect("validated pattern");
    (0..runs)
        .map(|_| {
            let started = Instant::now();
            monitor(indexed, trace, false).expect("validated pattern");
            started.elapsed()
        })
        .collect()
}

/// One row of a timing report.
#[derive(Debug, Clone, PartialEq)]
pub struct TimingEntry {
    pub group: PatternGroup,
    pub ops: usize,
    pub vars: usize,
    pub trace_len: usize,
    pub runs: usize,
    pub mean_s: f64,
    pub var_s: f64,
}

/// Timing rows plus derived scaling ratios.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TimingReport {
    pub entries: Vec<TimingEntry>,
}

impl TimingReport {
    /// Mean seconds of one configuration at one trace length.
    pub fn mean(
        &self,
        group: PatternGroup,
        ops: usize,
        vars: usize,
        trace_len: usize,
    ) -> Option<f64> {
        self.entries
            .iter()
            .find(|entry| {
                entry.group == group
                    && entry.ops == ops
                    && entry.vars == vars
                    && entry.trace_len == trace_len
            })
            .map(|entry| entry.mean_s)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("group,ops,vars,trace_len,runs,mean_s,var_s\n");
        for entry in &self.entries {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                entry.group,
                entry.ops,
                entry.vars,
                entry.trace_len,
                entry.runs,
                entry.mean_s,
                entry.var_s
            ));
        }
        out
    }

    /// Human-readable scaling summaries: per configuration across trace
    /// lengths (against the shortest), and per group/ops/length across
    /// variable counts (against one variable).
    pub fn ratio_lines(&self) -> Vec<String> {
        let mut lines = Vec::new();
        let mut lens: Vec<usize> = self.entries.iter().map(|entry| entry.trace_len).collect();
        lens.sort_unstable();
        lens.dedup();
        if let Some(&base_len) = lens.first() {
            for entry in &self.entries {
                if entry.trace_len == base_len {
                    continue;
                }
                if let Some(base) = self.mean(entry.group, entry.ops, entry.vars, base_len) {
                    lines.push(format!(
                        "{} ops={} vars={}: T({})/T({}) = {:.2}",
                        entry.group,
                        entry.ops,
                        entry.vars,
                        entry.trace_len,
                        base_len,
                        entry.mean_s / base
                    ));
                }
            }
        }
        for entry in &self.entries {
            if entry.vars == 1 {
                continue;
            }
            if let Some(base) = self.mean(entry.group, entry.ops, 1, entry.trace_len) {
                lines.push(format!(
                    "{} ops={} len={}: T(vars={})/T(vars=1) = {:.2}",
                    entry.group,
                    entry.ops,
                    entry.trace_len,
                    entry.vars,
                    entry.mean_s / base
                ));
            }
        }
        lines
    }
}

fn mean_and_variance(durations: &[Duration]) -> (f64, f64) {
    let seconds: Vec<f64> = durations.iter().map(Duration::as_secs_f64).collect();
    let mean = seconds.iter().sum::<f64>() / seconds.len() as f64;
    let variance = if seconds.len() > 1 {
        seconds.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (seconds.len() - 1) as f64
    } else {
        0.0
    };
    (mean, variance)
}

/// Times every configuration at every trace length. The same seed produces
/// the same trace for every configuration at a given length.
pub fn run_benchmark(
    specs: &[PatternSpec],
    lens: &[usize],
    runs: usize,
    seed: u64,
    constraint_bound: Option<f64>,
) -> TimingReport {
    let mut entries = Vec::new();
    for &len in lens {
        let trace = gen_random(len, &BENCH_PROPS, BENCH_MEAN_STEP, seed);
        for spec in specs {
            let indexed = prepared(spec, constraint_bound);
            let durations = time_prepared(&indexed, &trace, runs);
            let (mean_s, var_s) = mean_and_variance(&durations);
            entries.push(TimingEntry {
                group: spec.group,
                ops: spec.ops,
                vars: spec.vars,
                trace_len: len,
                runs,
                mean_s,
                var_s,
            });
        }
    }
    TimingReport { entries }
}
