//! Finite timed traces: loading, predicate abstraction, generation.
//!
//! A [`TimedStateSequence`] is the object the monitor consumes: a finite
//! sequence of samples, each a timestamp plus one boolean per proposition.
//! Timestamps are weakly monotone and start at zero; loaders can shift a
//! trace that starts later (`normalize`). Numeric recordings enter as a
//! [`SignalTrace`] and become boolean through a [`PredicateMap`], one named
//! threshold comparison per proposition.

use crate::formula::Relation;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("trace has no samples")]
    Empty,
    #[error("sample {row}: expected {expected} values, found {found}")]
    WidthMismatch { row: usize, expected: usize, found: usize },
    #[error("sample {row}: timestamp {found} is before {previous}")]
    NonMonotoneTime { row: usize, previous: f64, found: f64 },
    #[error("sample {row}: timestamp is not finite")]
    NonFiniteTime { row: usize },
    #[error("trace starts at {start}, not 0; load with normalize to shift it")]
    NonzeroStart { start: f64 },
    #[error("duplicate proposition `{name}`")]
    DuplicateProp { name: String },
    #[error("first column of the header must be `time`")]
    MissingTimeHeader,
    #[error("sample {row}, column `{column}`: cannot read `{value}`")]
    BadCell { row: usize, column: String, value: String },
    #[error("rows carry numeric `signals`; load this file as signals and apply a predicate map")]
    SignalsNotStates,
    #[error("sample {row}: signal columns differ from the first sample")]
    InconsistentColumns { row: usize },
    #[error("predicate map references unknown signal column `{name}`")]
    MissingColumn { name: String },
    #[error("predicate map line {line}: cannot parse `{text}`")]
    BadPredicate { line: usize, text: String },
    #[error("duplicate predicate `{name}`")]
    DuplicatePredicate { name: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// On-disk encoding of traces and signal recordings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceFormat {
    Csv,
    Json,
}

/// Finite boolean trace over a fixed proposition universe.
#[derive(Debug, Clone, PartialEq)]
pub struct TimedStateSequence {
    props: Vec<String>,
    times: Vec<f64>,
    states: Vec<Vec<bool>>,
}

impl TimedStateSequence {
    /// Builds a trace from samples, checking that it is non-empty, every
    /// sample is as wide as the universe, timestamps are finite and weakly
    /// monotone, and the first timestamp is zero (or `normalize` shifts the
    /// whole trace so it is).
    pub fn from_parts(
        props: Vec<String>,
        samples: Vec<(f64, Vec<bool>)>,
        normalize: bool,
    ) -> Result<Self, TraceError> {
        if samples.is_empty() {
            return Err(TraceError::Empty);
        }
        let mut seen = BTreeSet::new();
        for name in &props {
            if !seen.insert(name) {
                return Err(TraceError::DuplicateProp { name: name.clone() });
            }
        }
        let mut times = Vec::with_capacity(samples.len());
        let mut states = Vec::with_capacity(samples.len());
        for (row, (time, state)) in samples.into_iter().enumerate() {
            if !time.is_finite() {
                return Err(TraceError::NonFiniteTime { row: row + 1 });
            }
            if state.len() != props.len() {
                return Err(TraceError::WidthMismatch {
                    row: row + 1,
                    expected: props.len(),
                    found: state.len(),
                });
            }
            if let Some(&previous) = times.last() {
                if time < previous {
                    return Err(TraceError::NonMonotoneTime {
                        row: row + 1,
                        previous,
                        found: time,
                    });
                }
            }
            times.push(time);
            states.push(state);
        }
        let start = times[0];
        if start != 0.0 {
            if !normalize {
                return Err(TraceError::NonzeroStart { start });
            }
            for time in &mut times {
                *time -= start;
            }
        }
        Ok(TimedStateSequence { props, times, states })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn props(&self) -> &[String] {
        &self.props
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn time(&self, i: usize) -> f64 {
        self.times[i]
    }

    pub fn prop_index(&self, name: &str) -> Option<usize> {
        self.props.iter().position(|p| p == name)
    }

    /// Truth of proposition `p` (by universe index) at sample `i`.
    pub fn value(&self, i: usize, p: usize) -> bool {
        self.states[i][p]
    }

    pub fn state(&self, i: usize) -> &[bool] {
        &self.states[i]
    }
}

#[derive(Deserialize)]
struct JsonSample {
    time: f64,
    state: Vec<String>,
}

#[derive(Deserialize)]
struct JsonSignalRow {
    time: f64,
    signals: BTreeMap<String, f64>,
}

/// Reads a boolean trace.
///
/// CSV: a header starting with `time`, one column per proposition, cells
/// `0`/`1`/`false`/`true`. JSON: an array of `{"time": t, "state": [names
/// true at t]}`; the universe is the sorted union of the names.
pub fn load_trace(
    reader: impl Read,
    format: TraceFormat,
    normalize: bool,
) -> Result<TimedStateSequence, TraceError> {
    match format {
        TraceFormat::Csv => load_trace_csv(reader, normalize),
        TraceFormat::Json => load_trace_json(reader, normalize),
    }
}

fn load_trace_csv(reader: impl Read, normalize: bool) -> Result<TimedStateSequence, TraceError> {
    let mut reader =
        csv::ReaderBuilder::new().flexible(true).trim(csv::Trim::All).from_reader(reader);
    let headers = reader.headers()?.clone();
    if headers.get(0) != Some("time") {
        return Err(TraceError::MissingTimeHeader);
    }
    let props: Vec<String> = headers.iter().skip(1).map(str::to_owned).collect();
    let mut samples = Vec::new();
    for (index, record) in reader.records().enumerate() {
        let record = record?;
        let row = index + 1;
        if record.len() != props.len() + 1 {
            return Err(TraceError::WidthMismatch {
                row,
                expected: props.len() + 1,
                found: record.len(),
            });
        }
        let time = parse_time(&record[0], row)?;
        let state = record
            .iter()
            .skip(1)
            .zip(&props)
            .map(|(cell, prop)| parse_bool_cell(cell, row, prop))
            .collect::<Result<Vec<bool>, TraceError>>()?;
        samples.push((time, state));
    }
    TimedStateSequence::from_parts(props, samples, normalize)
}

fn parse_time(cell: &str, row: usize) -> Result<f64, TraceError> {
    cell.parse().map_err(|_| TraceError::BadCell {
        row,
        column: "time".into(),
        value: cell.to_owned(),
    })
}

fn parse_bool_cell(cell: &str, row: usize, column: &str) -> Result<bool, TraceError> {
    match cell {
        "0" | "false" => Ok(false),
        "1" | "true" => Ok(true),
        other => {
            Err(TraceError::BadCell { row, column: column.to_owned(), value: other.to_owned() })
        }
    }
}

fn load_trace_json(reader: impl Read, normalize: bool) -> Result<TimedStateSequence, TraceError> {
    let value: serde_json::Value = serde_json::from_reader(reader)?;
    let rows: Vec<JsonSample> = match serde_json::from_value(value.clone()) {
        Ok(rows) => rows,
        Err(err) => {
            if serde_json::from_value::<Vec<JsonSignalRow>>(value).is_ok() {
                return Err(TraceError::SignalsNotStates);
            }
            return Err(err.into());
        }
    };
    let universe: BTreeSet<&str> =
        rows.iter().flat_map(|row| row.state.iter().map(String::as_str)).collect();
    let props: Vec<String> = universe.iter().map(|&name| name.to_owned()).collect();
    let samples = rows
        .iter()
        .map(|row| {
            let state =
                props.iter().map(|prop| row.state.iter().any(|name| name == prop)).collect();
            (row.time, state)
        })
        .collect();
    TimedStateSequence::from_parts(props, samples, normalize)
}

/// Numeric recording: one f64 per named column per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalTrace {
    columns: Vec<String>,
    times: Vec<f64>,
    rows: Vec<Vec<f64>>,
}

impl SignalTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn value(&self, i: usize, column: usize) -> f64 {
        self.rows[i][column]
    }
}

/// Reads a numeric recording.
///
/// CSV: a header starting with `time`, numeric cells. JSON: an array of
/// `{"time": t, "signals": {column: number}}` with the same columns in every
/// row. Timestamps are not normalized here; that happens when a predicate
/// map turns the recording into a trace.
pub fn load_signals(reader: impl Read, format: TraceFormat) -> Result<SignalTrace, TraceError> {
    match format {
        TraceFormat::Csv => load_signals_csv(reader),
        TraceFormat::Json => load_signals_json(reader),
    }
}

fn load_signals_csv(reader: impl Read) -> Result<SignalTrace, TraceError> {
    let mut reader =
        csv::ReaderBuilder::new().flexible(true).trim(csv::Trim::All).from_reader(reader);
    let headers = reader.headers()?.clone();
    if headers.get(0) != Some("time") {
        return Err(TraceError::MissingTimeHeader);
    }
    let columns: Vec<String> = headers.iter().skip(1).map(str::to_owned).collect();
    let mut times = Vec::new();
    let mut rows = Vec::new();
    for (index, record) in reader.records().enumerate() {
        let record = record?;
        let row = index + 1;
        if record.len() != columns.len() + 1 {
            return Err(TraceError::WidthMismatch {
                row,
                expected: columns.len() + 1,
                found: record.len(),
            });
        }
        times.push(parse_time(&record[0], row)?);
        let values = record
            .iter()
            .skip(1)
            .zip(&columns)
            .map(|(cell, column)| {
                cell.parse().map_err(|_| TraceError::BadCell {
                    row,
                    column: column.clone(),
                    value: cell.to_owned(),
                })
            })
            .collect::<Result<Vec<f64>, TraceError>>()?;
        rows.push(values);
    }
    if times.is_empty() {
        return Err(TraceError::Empty);
    }
    Ok(SignalTrace { columns, times, rows })
}

fn load_signals_json(reader: impl Read) -> Result<SignalTrace, TraceError> {
    let parsed: Vec<JsonSignalRow> = serde_json::from_reader(reader)?;
    if parsed.is_empty() {
        return Err(TraceError::Empty);
    }
    let columns: Vec<String> = parsed[0].signals.keys().cloned().collect();
    let mut times = Vec::with_capacity(parsed.len());
    let mut rows = Vec::with_capacity(parsed.len());
    for (index, row) in parsed.iter().enumerate() {
        if row.signals.len() != columns.len()
            || !columns.iter().all(|c| row.signals.contains_key(c))
        {
            return Err(TraceError::InconsistentColumns { row: index + 1 });
        }
        times.push(row.time);
        rows.push(columns.iter().map(|c| row.signals[c]).collect());
    }
    Ok(SignalTrace { columns, times, rows })
}

/// One threshold predicate: the proposition `name` holds at a sample iff
/// `column <relation> threshold` does.
#[derive(Debug, Clone, PartialEq)]
pub struct PredicateDef {
    pub name: String,
    pub column: String,
    pub relation: Relation,
    pub threshold: f64,
}

/// Ordered list of threshold predicates; the order fixes the proposition
/// universe of the abstracted trace.
#[derive(Debug, Clone, PartialEq)]
pub struct PredicateMap {
    entries: Vec<PredicateDef>,
}

impl PredicateMap {
    /// Parses one predicate per line, `name := column <op> number`, with
    /// `<op>` one of `<=`, `<`, `=`, `>`, `>=`. Thresholds may be negative.
    /// Blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self, TraceError> {
        let mut entries: Vec<PredicateDef> = Vec::new();
        for (index, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let entry = parse_predicate_line(line).ok_or_else(|| TraceError::BadPredicate {
                line: index + 1,
                text: line.to_owned(),
            })?;
            if entries.iter().any(|existing| existing.name == entry.name) {
                return Err(TraceError::DuplicatePredicate { name: entry.name });
            }
            entries.push(entry);
        }
        Ok(PredicateMap { entries })
    }

    pub fn entries(&self) -> &[PredicateDef] {
        &self.entries
    }
}

fn parse_predicate_line(line: &str) -> Option<PredicateDef> {
    let (name, rest) = line.split_once(":=")?;
    let name = name.trim();
    let rest = rest.trim();
    // Two-character relations first so `<=` does not tokenize as `<`.
    let (symbol, relation) = [
        ("<=", Relation::Le),
        (">=", Relation::Ge),
        ("<", Relation::Lt),
        (">", Relation::Gt),
        ("=", Relation::Eq),
    ]
    .into_iter()
    .find(|(symbol, _)| rest.contains(symbol))?;
    let (column, threshold) = rest.split_once(symbol)?;
    let column = column.trim();
    let threshold: f64 = threshold.trim().parse().ok()?;
    if name.is_empty() || column.is_empty() {
        return None;
    }
    Some(PredicateDef { name: name.to_owned(), column: column.to_owned(), relation, threshold })
}

/// Abstracts a numeric recording into a boolean trace: one proposition per
/// predicate, in map order.
pub fn apply_predicate_map(
    signals: &SignalTrace,
    map: &PredicateMap,
    normalize: bool,
) -> Result<TimedStateSequence, TraceError> {
    let columns = map
        .entries()
        .iter()
        .map(|entry| {
            signals
                .column_index(&entry.column)
                .ok_or_else(|| TraceError::MissingColumn { name: entry.column.clone() })
        })
        .collect::<Result<Vec<usize>, TraceError>>()?;
    let props = map.entries().iter().map(|entry| entry.name.clone()).collect();
    let samples = (0..signals.len())
        .map(|i| {
            let state = map
                .entries()
                .iter()
                .zip(&columns)
                .map(|(entry, &column)| {
                    entry.relation.holds(signals.value(i, column), entry.threshold)
                })
                .collect();
            (signals.times()[i], state)
        })
        .collect();
    TimedStateSequence::from_parts(props, samples, normalize)
}

/// Writes the CSV form read by [`load_trace`]: `time` plus one `0`/`1`
/// column per proposition.
pub fn write_csv(trace: &TimedStateSequence, writer: impl Write) -> Result<(), TraceError> {
    let mut writer = csv::Writer::from_writer(writer);
    let mut header = vec!["time".to_owned()];
    header.extend(trace.props().iter().cloned());
    writer.write_record(&header)?;
    for i in 0..trace.len() {
        let mut record = vec![trace.time(i).to_string()];
        record.extend(trace.state(i).iter().map(|&value| {
            if value {
                "1".to_owned()
            } else {
                "0".to_owned()
            }
        }));
        writer.write_record(&record)?;
    }
    writer.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Generates a reproducible random trace: timestamps start at 0 and advance
/// by steps drawn uniformly from `(0, 2 * mean_step]`, and every
/// proposition is true at every sample with probability one half.
pub fn gen_random(
    len: usize,
    props: &[impl AsRef<str>],
    mean_step: f64,
    seed: u64,
) -> TimedStateSequence {
    assert!(len > 0, "trace length must be positive");
    assert!(mean_step > 0.0, "mean step must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let props: Vec<String> = props.iter().map(|p| p.as_ref().to_owned()).collect();
    let mut time = 0.0;
    let mut samples = Vec::with_capacity(len);
    for i in 0..len {
        if i > 0 {
            // 1 - u keeps the step strictly positive.
            time += (1.0 - rng.gen::<f64>()) * 2.0 * mean_step;
        }
        let state = (0..props.len()).map(|_| rng.gen::<bool>()).collect();
        samples.push((time, state));
    }
    TimedStateSequence::from_parts(props, samples, false).expect("generated trace is valid")
}
