//! Command-line frontend: monitor specifications against recorded traces,
//! translate interval-bounded specifications into freeze-quantifier form,
//! time the monitor over generated workloads, and produce random traces.
//!
//! Exit codes: 0 the property holds, 1 it is falsified, 2 any error.
//! Verdicts never exit 2 and errors never exit 0 or 1. Standard output
//! carries the machine-readable report, ending in `RESULT: SAT|UNSAT` for
//! `check`; diagnostics go to standard error.

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::collections::BTreeSet;
use std::fs::{self, File};
use std::path::PathBuf;
use std::process::ExitCode;
use tptl::bench::{run_benchmark, PatternGroup, PatternSpec, BENCH_MEAN_STEP};
use tptl::formula::{parse, parse_mtl, prepare, translate_mtl};
use tptl::monitor::{explain, monitor};
use tptl::oracle::{eval_semantics, Environment};
use tptl::trace::{
    apply_predicate_map, gen_random, load_signals, load_trace, write_csv, PredicateMap,
    TimedStateSequence, TraceFormat,
};

/// Offline monitoring of timed temporal properties.
#[derive(Parser)]
#[command(name = "tptl", version, disable_help_subcommand = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monitor a specification against a recorded trace.
    Check(CheckArgs),
    /// Print the freeze-quantifier form of an interval-bounded formula.
    TranslateMtl(TranslateArgs),
    /// Time the monitor over generated pattern and trace configurations.
    Bench(BenchArgs),
    /// Write a reproducible random trace as CSV.
    GenTrace(GenTraceArgs),
}

#[derive(Args)]
#[command(group(clap::ArgGroup::new("source").required(true)))]
struct CheckArgs {
    /// Specification text.
    #[arg(long, group = "source", value_name = "TEXT")]
    spec: Option<String>,
    /// File holding the specification text.
    #[arg(long, group = "source", value_name = "PATH")]
    spec_file: Option<PathBuf>,
    /// Trace file to monitor.
    #[arg(long, value_name = "PATH")]
    trace: PathBuf,
    /// Trace file format.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Predicate map file turning numeric columns into propositions, one
    /// `name := column <op> threshold` per line.
    #[arg(long, value_name = "PATH")]
    map: Option<PathBuf>,
    /// Shift timestamps so the trace starts at time zero.
    #[arg(long)]
    normalize: bool,
    /// Write the final monitoring table to this path as JSON.
    #[arg(long, value_name = "PATH")]
    table: Option<PathBuf>,
    /// Cross-check the verdict against the direct semantics; a mismatch is
    /// an error, not a verdict.
    #[arg(long)]
    oracle: bool,
}

/// Trace encodings accepted on the command line. Mirrors
/// [`TraceFormat`], which cannot carry the clap derive itself.
#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for TraceFormat {
    fn from(format: Format) -> Self {
        match format {
            Format::Csv => TraceFormat::Csv,
            Format::Json => TraceFormat::Json,
        }
    }
}

#[derive(Args)]
struct TranslateArgs {
    /// Interval-bounded specification text.
    #[arg(long, value_name = "TEXT")]
    spec: String,
}

#[derive(Args)]
struct BenchArgs {
    /// Pattern group to time, `ea` or `ur`; omitted, every built-in
    /// configuration runs.
    #[arg(long, requires = "ops")]
    group: Option<String>,
    /// Temporal operator count of the pattern.
    #[arg(long, requires = "vars")]
    ops: Option<usize>,
    /// Frozen variable count of the pattern.
    #[arg(long, requires = "group")]
    vars: Option<usize>,
    /// Trace length to time; repeat for several lengths.
    #[arg(long, default_values_t = [1000usize])]
    len: Vec<usize>,
    /// Timed runs per configuration.
    #[arg(long, default_value_t = 5)]
    runs: usize,
    /// Trace generator seed.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Bound used in the patterns' time constraints; defaults to a span
    /// covering a fixed share of the mean step per operator.
    #[arg(long, value_name = "SECONDS")]
    constraint_bound: Option<f64>,
    /// Write the timing CSV here instead of standard output.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenTraceArgs {
    /// Number of samples.
    #[arg(long)]
    len: usize,
    /// Comma-separated proposition names.
    #[arg(long, value_name = "NAMES")]
    aps: String,
    /// Generator seed.
    #[arg(long)]
    seed: u64,
    /// Output CSV path.
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
    /// Mean time step between consecutive samples.
    #[arg(long, default_value_t = BENCH_MEAN_STEP)]
    mean_step: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Result<ExitCode> {
    match &cli.command {
        Command::Check(args) => check(args),
        Command::TranslateMtl(args) => translate(args).map(|()| ExitCode::SUCCESS),
        Command::Bench(args) => bench(args).map(|()| ExitCode::SUCCESS),
        Command::GenTrace(args) => gen_trace(args).map(|()| ExitCode::SUCCESS),
    }
}

fn check(args: &CheckArgs) -> Result<ExitCode> {
    let text = match (&args.spec, &args.spec_file) {
        (Some(text), None) => text.clone(),
        (None, Some(path)) => {
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?
        }
        _ => unreachable!("clap requires exactly one specification source"),
    };
    let formula = parse(text.trim()).context("parsing the specification")?;
    let indexed = prepare(&formula).context("validating the specification")?;
    let trace = load_check_trace(args)?;

    let verdict = monitor(&indexed, &trace, args.table.is_some()).context("monitoring")?;

    if args.oracle {
        let expected = eval_semantics(&formula, &trace, 0, &Environment::new())
            .context("evaluating the reference semantics")?;
        if expected != verdict.satisfied {
            bail!(
                "oracle disagreement: monitor reports {}, direct semantics reports {}",
                label(verdict.satisfied),
                label(expected)
            );
        }
    }

    if let Some(path) = &args.table {
        let dump = explain(&verdict).expect("table kept when a dump is requested");
        fs::write(path, dump).with_context(|| format!("writing {}", path.display()))?;
    }

    let stats = &verdict.stats;
    println!("formula size: {}", stats.formula_size);
    println!("trace length: {}", stats.trace_len);
    println!("variables: {}", stats.variable_count);
    println!("cell writes: {}", stats.cell_writes);
    println!("wall time: {:?}", stats.wall_time);
    println!("RESULT: {}", label(verdict.satisfied));
    Ok(if verdict.satisfied { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn label(satisfied: bool) -> &'static str {
    if satisfied {
        "SAT"
    } else {
        "UNSAT"
    }
}

fn load_check_trace(args: &CheckArgs) -> Result<TimedStateSequence> {
    let file =
        File::open(&args.trace).with_context(|| format!("opening {}", args.trace.display()))?;
    let format = TraceFormat::from(args.format);
    if let Some(map_path) = &args.map {
        let text = fs::read_to_string(map_path)
            .with_context(|| format!("reading {}", map_path.display()))?;
        let map = PredicateMap::parse(&text).context("parsing the predicate map")?;
        let signals = load_signals(file, format).context("loading the signal trace")?;
        apply_predicate_map(&signals, &map, args.normalize).context("applying the predicate map")
    } else {
        load_trace(file, format, args.normalize).context("loading the trace")
    }
}

fn translate(args: &TranslateArgs) -> Result<()> {
    let mtl = parse_mtl(args.spec.trim()).context("parsing the specification")?;
    println!("{}", translate_mtl(&mtl));
    Ok(())
}

fn bench(args: &BenchArgs) -> Result<()> {
    let specs = match (&args.group, args.ops, args.vars) {
        (Some(group), Some(ops), Some(vars)) => {
            vec![PatternSpec::new(group.parse::<PatternGroup>()?, ops, vars)?]
        }
        (None, None, None) => PatternSpec::all(),
        _ => unreachable!("clap ties the three pattern flags together"),
    };
    ensure!(args.runs > 0, "runs must be positive");
    ensure!(args.len.iter().all(|&len| len > 0), "trace lengths must be positive");

    let report = run_benchmark(&specs, &args.len, args.runs, args.seed, args.constraint_bound);
    let csv = report.to_csv();
    match &args.out {
        Some(path) => {
            fs::write(path, &csv).with_context(|| format!("writing {}", path.display()))?;
        }
        None => print!("{csv}"),
    }
    for line in report.ratio_lines() {
        println!("# {line}");
    }
    Ok(())
}

fn gen_trace(args: &GenTraceArgs) -> Result<()> {
    let props: Vec<&str> =
        args.aps.split(',').map(str::trim).filter(|name| !name.is_empty()).collect();
    ensure!(!props.is_empty(), "at least one proposition name is required");
    let unique: BTreeSet<&str> = props.iter().copied().collect();
    ensure!(unique.len() == props.len(), "proposition names must be distinct");
    ensure!(args.len > 0, "trace length must be positive");
    ensure!(args.mean_step > 0.0, "mean step must be positive");

    let trace = gen_random(args.len, &props, args.mean_step, args.seed);
    let file =
        File::create(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    write_csv(&trace, file).with_context(|| format!("writing {}", args.out.display()))
}
