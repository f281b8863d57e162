//! Table-based offline monitor.
//!
//! The monitor fills one boolean table: a row per subformula (in the row
//! order of [`IndexedFormula`]), a column per trace position. Proposition
//! and `true` rows come straight from the trace. Each frozen block is then
//! processed innermost-first: for every instantiation position `t`, the
//! block's constraint rows are resolved against the timestamp frozen at
//! `t`, the block's operator rows are recomputed right-to-left and
//! bottom-up, and the block root's value at `t` is copied to the binder's
//! own row. After the last block, the binder-free outer rows are evaluated
//! once, and the verdict is the top row at the first position.
//!
//! Cells are tri-state underneath (`unset` until written) so that any read
//! of a cell the schedule has not produced yet fails loudly instead of
//! returning a default.

use crate::formula::{FrozenSubtree, IndexedFormula, NodeKind};
use crate::trace::TimedStateSequence;
use serde::Serialize;
use std::time::{Duration, Instant};
use thiserror::Error;

/// Row-per-subformula, column-per-position working table. Rows are
/// 1-based, columns 0-based. Reading an unset cell panics; writes are
/// counted.
///
/// One bit per cell, row-major: every row is a contiguous bit run over the
/// positions, so the recompute passes stream a handful of short per-row
/// segments and the whole table stays within the innermost cache level
/// even for traces of several thousand samples. Written-ness is tracked
/// per cell for the column-wise writers that go through
/// [`MonitoringTable::set`], and per row once a pass has covered every
/// position of a row.
#[derive(Debug, Clone)]
pub struct MonitoringTable {
    rows: usize,
    cols: usize,
    /// Words per row; row `r` occupies `values[(r - 1) * stride..]`.
    stride: usize,
    values: Vec<u64>,
    /// Same layout as `values`: per-cell written flags, kept by `set`.
    written: Vec<u64>,
    /// Rows marked fully written, indexed by `row - 1`.
    full: Vec<bool>,
    writes: u64,
}

impl MonitoringTable {
    pub fn new(rows: usize, cols: usize) -> Self {
        let stride = cols.div_ceil(64);
        MonitoringTable {
            rows,
            cols,
            stride,
            values: vec![0; rows * stride],
            written: vec![0; rows * stride],
            full: vec![false; rows],
            writes: 0,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Word index and bit shift of a cell.
    fn place(&self, row: usize, col: usize) -> (usize, u32) {
        debug_assert!(1 <= row && row <= self.rows && col < self.cols);
        ((row - 1) * self.stride + (col >> 6), (col & 63) as u32)
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        let (word, shift) = self.place(row, col);
        assert!(
            self.full[row - 1] || (self.written[word] >> shift) & 1 != 0,
            "read of unset cell (row {row}, position {col})"
        );
        (self.values[word] >> shift) & 1 != 0
    }

    pub fn is_set(&self, row: usize, col: usize) -> bool {
        let (word, shift) = self.place(row, col);
        self.full[row - 1] || (self.written[word] >> shift) & 1 != 0
    }

    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        let (word, shift) = self.place(row, col);
        self.values[word] = (self.values[word] & !(1 << shift)) | ((value as u64) << shift);
        self.written[word] |= 1 << shift;
        self.writes += 1;
    }

    /// Number of cell writes so far.
    pub fn writes(&self) -> u64 {
        self.writes
    }

    /// First word of a row's bit run; the recompute passes hoist these
    /// offsets out of their loops and address cells relative to them.
    #[inline]
    fn row_offset(&self, row: usize) -> usize {
        (row - 1) * self.stride
    }

    /// Pass-internal read: the schedule guarantees operand cells are
    /// written before they are read, so only the word bounds are checked
    /// here; [`MonitoringTable::get`] keeps the loud unset-cell assert for
    /// everything outside the passes.
    #[inline]
    fn bit(&self, offset: usize, word: usize, shift: u32) -> bool {
        (self.values[offset + word] >> shift) & 1 != 0
    }

    /// Pass-internal write; the pass marks its rows fully written once it
    /// has covered every position, via [`MonitoringTable::fill_rows`].
    #[inline]
    fn put(&mut self, offset: usize, word: usize, shift: u32, value: bool) {
        let cell = &mut self.values[offset + word];
        *cell = (*cell & !(1 << shift)) | ((value as u64) << shift);
        self.writes += 1;
    }

    /// Marks rows whose every position has been written by a pass.
    fn fill_rows(&mut self, rows: std::ops::RangeInclusive<usize>) {
        for row in rows {
            self.full[row - 1] = true;
        }
    }
}

/// The table is only defined for formulas where every constraint row sits
/// in the block of its own binder, each binder exactly once.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MonitorError {
    #[error("unvalidated formula: row {row} constrains `{variable}`, which no binder freezes")]
    UnboundConstraint { row: usize, variable: String },
    #[error(
        "unvalidated formula: row {row} constrains `{variable}` inside the block of `{binder}`"
    )]
    ForeignConstraint { row: usize, variable: String, binder: String },
    #[error("unvalidated formula: two binders freeze `{variable}`; alpha-rename first")]
    DuplicateVariable { variable: String },
}

/// Run counters and sizes of one monitoring run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonitorStats {
    pub wall_time: Duration,
    pub formula_size: usize,
    pub trace_len: usize,
    pub variable_count: usize,
    pub cell_writes: u64,
}

/// Final table contents, kept on request for inspection and dumps.
#[derive(Debug, Clone, PartialEq)]
pub struct TableSnapshot {
    pub formula: String,
    pub labels: Vec<String>,
    pub timestamps: Vec<f64>,
    /// `table[row - 1][position]`.
    pub table: Vec<Vec<bool>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    /// Truth of the formula at the first trace position.
    pub satisfied: bool,
    pub table: Option<TableSnapshot>,
    pub stats: MonitorStats,
}

fn validate_for_monitoring(indexed: &IndexedFormula) -> Result<(), MonitorError> {
    let subtrees = indexed.subtrees();
    for (k, subtree) in subtrees.iter().enumerate() {
        if subtrees[..k].iter().any(|other| other.variable == subtree.variable) {
            return Err(MonitorError::DuplicateVariable { variable: subtree.variable.clone() });
        }
    }
    for row in 1..=indexed.len() {
        if let NodeKind::Constraint(variable, _, _) = indexed.node(row) {
            match subtrees.iter().find(|subtree| subtree.min <= row && row <= subtree.max) {
                None => {
                    return Err(MonitorError::UnboundConstraint {
                        row,
                        variable: variable.clone(),
                    });
                }
                Some(subtree) if &subtree.variable != variable => {
                    return Err(MonitorError::ForeignConstraint {
                        row,
                        variable: variable.clone(),
                        binder: subtree.variable.clone(),
                    });
                }
                Some(_) => {}
            }
        }
    }
    Ok(())
}

/// Overwrites the constraint rows of `subtree`'s variable at the position
/// with cell coordinates `(word, shift)`, comparing elapsed time since the
/// frozen position against the bound.
///
/// The row scan deliberately covers the whole table: with unique binder
/// names only this variable's rows match, and keeping the scan inside the
/// per-position work is what the per-variable cost of the algorithm is
/// stated against.
fn resolve_constraints(
    table: &mut MonitoringTable,
    indexed: &IndexedFormula,
    subtree: &FrozenSubtree,
    word: usize,
    shift: u32,
    elapsed: f64,
) {
    for row in 1..=indexed.len() {
        if let NodeKind::Constraint(variable, relation, bound) = indexed.node(row) {
            if *variable == subtree.variable {
                let offset = table.row_offset(row);
                table.put(offset, word, shift, relation.holds(elapsed, *bound));
            }
        }
    }
}

/// Operator rows lowered to plain operand row offsets. The recompute loops
/// run once per cell, so they dispatch on this compact copy instead of
/// re-reading the node payloads; leaves (atoms and binders) keep their
/// stored value.
#[derive(Debug, Clone, Copy)]
enum Op {
    Leaf,
    Not(usize),
    And(usize, usize),
    Or(usize, usize),
    Implies(usize, usize),
    Next(usize),
    Until(usize, usize),
    Release(usize, usize),
    Eventually(usize),
    Always(usize),
}

fn lower(indexed: &IndexedFormula, table: &MonitoringTable) -> Vec<Op> {
    let off = |row: &usize| table.row_offset(*row);
    // Row 0 is padding so rows index `ops` directly.
    let mut ops = vec![Op::Leaf];
    ops.extend((1..=indexed.len()).map(|row| match indexed.node(row) {
        NodeKind::True | NodeKind::Prop(_) | NodeKind::Constraint(..) | NodeKind::Freeze(..) => {
            Op::Leaf
        }
        NodeKind::Not(m) => Op::Not(off(m)),
        NodeKind::And(m, n) => Op::And(off(m), off(n)),
        NodeKind::Or(m, n) => Op::Or(off(m), off(n)),
        NodeKind::Implies(m, n) => Op::Implies(off(m), off(n)),
        NodeKind::Next(m) => Op::Next(off(m)),
        NodeKind::Until(m, n) => Op::Until(off(m), off(n)),
        NodeKind::Release(m, n) => Op::Release(off(m), off(n)),
        NodeKind::Eventually(m) => Op::Eventually(off(m)),
        NodeKind::Always(m) => Op::Always(off(m)),
    }));
    ops
}

/// One-step evaluation of an operator row with its own row offset `own`,
/// reading operand cells at the current position `(word, shift)` and the
/// row's own cell one position ahead at `(word1, shift1)`; `last` marks the
/// final position, where no position ahead exists (never read then, thanks
/// to short-circuiting).
#[allow(clippy::too_many_arguments)]
fn compute_ltl(
    table: &MonitoringTable,
    op: Op,
    own: usize,
    word: usize,
    shift: u32,
    word1: usize,
    shift1: u32,
    last: bool,
) -> bool {
    match op {
        Op::Leaf => table.bit(own, word, shift),
        Op::Not(m) => !table.bit(m, word, shift),
        Op::And(m, n) => table.bit(m, word, shift) && table.bit(n, word, shift),
        Op::Or(m, n) => table.bit(m, word, shift) || table.bit(n, word, shift),
        Op::Implies(m, n) => !table.bit(m, word, shift) || table.bit(n, word, shift),
        Op::Next(m) => !last && table.bit(m, word1, shift1),
        Op::Until(m, n) => {
            table.bit(n, word, shift)
                || (!last && table.bit(m, word, shift) && table.bit(own, word1, shift1))
        }
        Op::Release(m, n) => {
            table.bit(n, word, shift)
                && (last || table.bit(m, word, shift) || table.bit(own, word1, shift1))
        }
        Op::Eventually(m) => table.bit(m, word, shift) || (!last && table.bit(own, word1, shift1)),
        Op::Always(m) => table.bit(m, word, shift) && (last || table.bit(own, word1, shift1)),
    }
}

/// The operator rows of one table region as `(row offset, op)`, innermost
/// (largest index) first, leaves dropped: the sweep recomputes exactly
/// these rows per position.
fn operator_rows(ops: &[Op], table: &MonitoringTable, min: usize, max: usize) -> Vec<(usize, Op)> {
    (min..=max)
        .rev()
        .map(|row| (table.row_offset(row), ops[row]))
        .filter(|(_, op)| !matches!(op, Op::Leaf))
        .collect()
}

/// Monitors the indexed formula over the trace. With `keep_table` the
/// verdict carries the final table for inspection.
pub fn monitor(
    indexed: &IndexedFormula,
    trace: &TimedStateSequence,
    keep_table: bool,
) -> Result<Verdict, MonitorError> {
    validate_for_monitoring(indexed)?;
    let started = Instant::now();
    let n = trace.len();
    let mut table = MonitoringTable::new(indexed.len(), n);

    for row in 1..=indexed.len() {
        match indexed.node(row) {
            NodeKind::True => {
                for u in 0..n {
                    table.set(row, u, true);
                }
            }
            NodeKind::Prop(name) => {
                let p = trace.prop_index(name);
                for u in 0..n {
                    table.set(row, u, p.is_some_and(|p| trace.value(u, p)));
                }
            }
            _ => {}
        }
    }

    let ops = lower(indexed, &table);
    for subtree in indexed.subtrees() {
        let block = operator_rows(&ops, &table, subtree.min, subtree.max);
        for t in 0..n {
            let frozen = trace.time(t);
            // One right-to-left pass per instantiation position: each
            // position's constraint rows are resolved just before its
            // operator rows. Interleaving the two keeps the timestamp and
            // table streams together, which measurably steadies the
            // quadratic growth on narrow caches; the values and write
            // counts are exactly those of separated resolve/recompute
            // phases, since constraint cells only depend on timestamps.
            for u in (t..n).rev() {
                let (word, shift) = (u >> 6, (u & 63) as u32);
                let (word1, shift1) = ((u + 1) >> 6, ((u + 1) & 63) as u32);
                resolve_constraints(
                    &mut table,
                    indexed,
                    subtree,
                    word,
                    shift,
                    trace.time(u) - frozen,
                );
                let last = u + 1 == n;
                for &(own, op) in &block {
                    let value = compute_ltl(&table, op, own, word, shift, word1, shift1, last);
                    table.put(own, word, shift, value);
                }
            }
            if t == 0 {
                // The first pass covers every position of the block's rows;
                // inner blocks and atoms inside the range are full already.
                table.fill_rows(subtree.min..=subtree.max);
            }
            let frozen_value = table.get(subtree.root, t);
            table.set(subtree.parent, t, frozen_value);
        }
    }

    let outer = operator_rows(&ops, &table, 1, indexed.outer_max());
    for u in (0..n).rev() {
        let (word, shift) = (u >> 6, (u & 63) as u32);
        let (word1, shift1) = ((u + 1) >> 6, ((u + 1) & 63) as u32);
        let last = u + 1 == n;
        for &(own, op) in &outer {
            let value = compute_ltl(&table, op, own, word, shift, word1, shift1, last);
            table.put(own, word, shift, value);
        }
    }
    table.fill_rows(1..=indexed.outer_max());

    let satisfied = table.get(1, 0);
    let stats = MonitorStats {
        wall_time: started.elapsed(),
        formula_size: indexed.len(),
        trace_len: n,
        variable_count: indexed.variable_count(),
        cell_writes: table.writes(),
    };
    let snapshot = keep_table.then(|| TableSnapshot {
        formula: indexed.subformula(1).to_string(),
        labels: indexed.labels().to_vec(),
        timestamps: trace.times().to_vec(),
        table: (1..=indexed.len()).map(|row| (0..n).map(|u| table.get(row, u)).collect()).collect(),
    });
    Ok(Verdict { satisfied, table: snapshot, stats })
}

#[derive(Serialize)]
struct ExplainRow<'a> {
    index: usize,
    label: &'a str,
    cells: Vec<u8>,
}

#[derive(Serialize)]
struct ExplainDoc<'a> {
    formula: &'a str,
    rows: Vec<ExplainRow<'a>>,
    timestamps: &'a [f64],
    verdict: bool,
}

/// Renders a kept table as JSON: the formula text, one row object per
/// table row with 0/1 cells, the timestamps, and the verdict. `None` if the
/// verdict was produced without `keep_table`.
pub fn explain(verdict: &Verdict) -> Option<String> {
    let snapshot = verdict.table.as_ref()?;
    let doc = ExplainDoc {
        formula: &snapshot.formula,
        rows: snapshot
            .table
            .iter()
            .enumerate()
            .map(|(k, cells)| ExplainRow {
                index: k + 1,
                label: &snapshot.labels[k],
                cells: cells.iter().map(|&value| value as u8).collect(),
            })
            .collect(),
        timestamps: &snapshot.timestamps,
        verdict: verdict.satisfied,
    };
    Some(serde_json::to_string_pretty(&doc).expect("table serializes"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{index_subformulas, parse, prepare};
    use crate::oracle::{eval_semantics, Environment};
    use crate::trace::{load_trace, TraceFormat};

    fn trace(csv: &str) -> TimedStateSequence {
        load_trace(csv.as_bytes(), TraceFormat::Csv, false).unwrap()
    }

    fn verdict_of(text: &str, trace: &TimedStateSequence) -> Verdict {
        monitor(&prepare(&parse(text).unwrap()).unwrap(), trace, true).unwrap()
    }

    #[test]
    fn freeze_row_holds_the_per_position_frozen_value() {
        let t = trace("time,a\n0,0\n0.6,0\n1.4,1\n");
        let verdict = verdict_of("x.(F (a /\\ x <= 1))", &t);
        let snapshot = verdict.table.unwrap();
        // Row 1 is the binder: a arrives 1.4 after position 0 but only 0.8
        // after position 1.
        assert_eq!(snapshot.table[0], [false, true, true]);
        assert!(!verdict.satisfied);
    }

    #[test]
    fn final_constraint_cells_compare_zero_elapsed_time() {
        let t = trace("time,a\n0,1\n1,1\n2,1\n");
        let le = verdict_of("x.(F (a /\\ x <= 1))", &t).table.unwrap();
        // Rows: x.(1) F(2) /\(3) a(4) x<=1(5). The last resolution freezes
        // at each position itself, so the surviving cells hold 0 <= 1.
        assert_eq!(le.labels[4], "x1 <= 1", "prepare alpha-renames the binder");
        assert_eq!(le.table[4], [true, true, true]);
        let gt = verdict_of("x.(F (a /\\ x > 1))", &t).table.unwrap();
        assert_eq!(gt.table[4], [false, false, false]);
    }

    #[test]
    fn verdicts_match_the_reference_evaluator() {
        let traces = [
            trace("time,a,b\n0,1,0\n0.5,1,1\n1.1,0,1\n2.0,0,0\n3.5,1,0\n"),
            trace("time,a,b\n0,0,0\n"),
            trace("time,a,b\n0,1,1\n0.2,1,0\n"),
        ];
        let formulas = [
            "a U b",
            "a R b",
            "b R (a \\/ b)",
            "X (a /\\ b)",
            "F (a /\\ b)",
            "G (a \\/ b)",
            "!a \\/ !b",
            "(a -> X b) U (b /\\ !a)",
            "x.(F (b /\\ x <= 1))",
            "G x.(F (b /\\ x <= 1))",
            "x.((a \\/ b) U (x > 0.4 /\\ b))",
            "x.(F (a /\\ x >= 2 /\\ y.(F (b /\\ y <= 1))))",
            "true U (x.(X x <= 0.5))",
        ];
        for t in &traces {
            for text in formulas {
                let f = parse(text).unwrap();
                let expected = eval_semantics(&f, t, 0, &Environment::new()).unwrap();
                let verdict = monitor(&prepare(&f).unwrap(), t, false).unwrap();
                assert_eq!(
                    verdict.satisfied,
                    expected,
                    "monitor disagrees on {text} over {:?}",
                    t.times()
                );
            }
        }
    }

    #[test]
    fn every_final_cell_matches_the_frozen_evaluation() {
        // Final block cells come from the instantiation at their own
        // position: cell (j, u) equals the row's subformula at u with the
        // block variable frozen to the timestamp of u.
        let t = trace("time,a,b\n0,0,0\n0.3,1,1\n0.9,1,0\n1.2,0,1\n");
        let text = "G x.(F ((x <= 1 -> a) /\\ y.(F (y <= 1 -> !b))))";
        let indexed = prepare(&parse(text).unwrap()).unwrap();
        let verdict = monitor(&indexed, &t, true).unwrap();
        let snapshot = verdict.table.unwrap();
        for row in 1..=indexed.len() {
            let sub = indexed.subformula(row);
            let owner =
                indexed.subtrees().iter().find(|subtree| subtree.min <= row && row <= subtree.max);
            for u in 0..t.len() {
                let env = match owner {
                    Some(subtree) => Environment::new().bind(&subtree.variable, t.time(u)),
                    None => Environment::new(),
                };
                let expected = eval_semantics(&sub, &t, u, &env).unwrap();
                assert_eq!(
                    snapshot.table[row - 1][u],
                    expected,
                    "row {row} ({}) at position {u}",
                    indexed.label(row)
                );
            }
        }
    }

    #[test]
    fn unbound_constraint_is_rejected() {
        let indexed = index_subformulas(&parse("F x <= 1").unwrap());
        let t = trace("time,a\n0,1\n");
        let err = monitor(&indexed, &t, false).unwrap_err();
        assert_eq!(err, MonitorError::UnboundConstraint { row: 2, variable: "x".into() });
    }

    #[test]
    fn foreign_constraint_is_rejected() {
        let indexed = index_subformulas(&parse("x.(F y.(x <= 1 /\\ y <= 1))").unwrap());
        let t = trace("time,a\n0,1\n");
        let err = monitor(&indexed, &t, false).unwrap_err();
        assert_eq!(
            err,
            MonitorError::ForeignConstraint { row: 5, variable: "x".into(), binder: "y".into() }
        );
    }

    #[test]
    fn duplicate_binder_names_are_rejected() {
        let indexed = index_subformulas(&parse("x.(F x <= 1) /\\ x.(G x > 0)").unwrap());
        let t = trace("time,a\n0,1\n");
        let err = monitor(&indexed, &t, false).unwrap_err();
        assert_eq!(err, MonitorError::DuplicateVariable { variable: "x".into() });
    }

    #[test]
    #[should_panic(expected = "unset cell")]
    fn reading_an_unset_cell_panics() {
        let table = MonitoringTable::new(2, 2);
        table.get(1, 0);
    }

    #[test]
    fn table_tracks_writes() {
        let mut table = MonitoringTable::new(2, 2);
        assert_eq!(table.writes(), 0);
        table.set(1, 0, true);
        table.set(1, 0, false);
        assert_eq!(table.writes(), 2);
        assert!(!table.get(1, 0));
        assert!(table.is_set(1, 0));
        assert!(!table.is_set(2, 1));
    }

    #[test]
    fn stats_report_sizes_and_writes() {
        let t = trace("time,a\n0,1\n1,0\n2,1\n");
        let verdict = verdict_of("G x.(F (a /\\ x <= 2))", &t);
        let stats = &verdict.stats;
        assert_eq!(stats.formula_size, 6);
        assert_eq!(stats.trace_len, 3);
        assert_eq!(stats.variable_count, 1);
        assert!(stats.cell_writes > 0);
    }

    #[test]
    fn explain_needs_a_kept_table() {
        let t = trace("time,a\n0,1\n0.5,0\n");
        let plain = monitor(&prepare(&parse("X a").unwrap()).unwrap(), &t, false).unwrap();
        assert!(explain(&plain).is_none());
        let kept = verdict_of("X a", &t);
        let json: serde_json::Value = serde_json::from_str(&explain(&kept).unwrap()).unwrap();
        assert_eq!(json["formula"], "X a");
        assert_eq!(json["verdict"], false);
        assert_eq!(json["timestamps"], serde_json::json!([0.0, 0.5]));
        assert_eq!(json["rows"][0]["index"], 1);
        assert_eq!(json["rows"][0]["label"], "X");
        assert_eq!(json["rows"][0]["cells"], serde_json::json!([0, 0]));
        assert_eq!(json["rows"][1]["label"], "a");
        assert_eq!(json["rows"][1]["cells"], serde_json::json!([1, 0]));
    }
}
