//! Offline monitoring for timed propositional temporal logic over finite
//! timed traces.
//!
//! Formulas extend LTL with freeze quantifiers: `x.f` binds `x` to the
//! timestamp at which it is evaluated, and constraints such as `x <= 5`
//! compare the time elapsed since the binding against a bound. The monitor
//! accepts the self-contained fragment, where every freeze body constrains
//! no variable but its own, and fills one dynamic-programming table column
//! by column instead of re-evaluating subformulas per position.
//!
//! ```
//! use tptl::formula::{parse, prepare};
//! use tptl::monitor::monitor;
//! use tptl::trace::{load_trace, TraceFormat};
//!
//! let formula = parse("G x.(req -> F (ack /\\ x <= 2))").unwrap();
//! let indexed = prepare(&formula).unwrap();
//! let csv = "time,req,ack\n0,1,0\n1.5,0,1\n3.0,0,0\n";
//! let trace = load_trace(csv.as_bytes(), TraceFormat::Csv, false).unwrap();
//! let verdict = monitor(&indexed, &trace, false).unwrap();
//! assert!(verdict.satisfied);
//! ```
//!
//! [`formula`] parses, validates, and indexes formulas and translates
//! metric temporal logic into the frozen fragment. [`trace`] loads, maps,
//! and generates timed traces. [`monitor`] is the table-filling algorithm;
//! [`oracle`] is an independent reference evaluator used to cross-check it.
//! [`bench`] times the monitor on parametric formula patterns.

pub mod bench;
pub mod formula;
pub mod monitor;
pub mod oracle;
pub mod trace;

pub use formula::{parse, parse_mtl, prepare, translate_mtl, Formula, IndexedFormula};
pub use monitor::{monitor, Verdict};
pub use oracle::{eval_mtl, eval_semantics, Environment};
pub use trace::{load_trace, TimedStateSequence, TraceFormat};
