//! Command-line front end.
//!
//! Exit codes: 0 consistent, 1 inconsistent, 2 usage, parse or model error,
//! 3 resource limit. Reports go to stdout as `key: value` lines; errors and
//! warnings go to stderr.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{OracleError, SolveError};
use crate::history::{parse_history, EventId, History};
use crate::models::{derive, DerivedModel, ModelSpec};
use crate::oracle::{oracle_store, oracle_total};
use crate::reduction::{parse_dimacs, sat_to_history_relaxed, sat_to_history_sc};
use crate::simgen::{mutate, simulate, RandomProgram, SimModel};
use crate::solver::{solve_with, Diagnostics, Outcome, SolverConfig, DEFAULT_MAX_K};

pub const EXIT_CONSISTENT: i32 = 0;
pub const EXIT_INCONSISTENT: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "mmcheck",
    version,
    about = "Consistency checking for shared-memory histories"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide consistency with the subset solver.
    Check(CheckArgs),
    /// Decide consistency by brute-force enumeration.
    Oracle {
        #[command(flatten)]
        check: CheckArgs,
        #[arg(long, value_enum, default_value_t = OracleMode::Total)]
        oracle_mode: OracleMode,
    },
    /// Generate histories.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Rewire one read of a trace to a different writer.
    Mutate {
        #[arg(long)]
        seed: u64,
        trace: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// History in `.mmh` format.
    pub trace: PathBuf,
    /// sc, tso, pso or rmo (case-insensitive).
    #[arg(long)]
    pub model: String,
    /// Print the write order, or the failure cycle.
    #[arg(long)]
    pub witness: bool,
    /// Refuse histories with more writes than this (exit 3).
    #[arg(long, default_value_t = DEFAULT_MAX_K)]
    pub max_k: usize,
    /// Print search statistics.
    #[arg(long)]
    pub stats: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OracleMode {
    Total,
    Store,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SatVariant {
    /// Two reads guard each literal write; for sequential consistency.
    Sc,
    /// Split literal threads; for the relaxed models.
    Relaxed,
}

#[derive(Debug, Subcommand)]
pub enum GenCommand {
    /// Translate a 3-CNF formula into a history.
    Sat {
        #[arg(long, value_enum)]
        variant: SatVariant,
        cnf: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run a random program on an operational machine.
    Random {
        #[arg(long)]
        model: String,
        #[arg(long)]
        threads: usize,
        #[arg(long)]
        events: usize,
        #[arg(long)]
        vars: usize,
        #[arg(long)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

/// A failure that ends the command with a nonzero exit code.
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl ToString) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.to_string(),
        }
    }

    fn resource(message: impl ToString) -> Self {
        Self {
            code: EXIT_RESOURCE,
            message: message.to_string(),
        }
    }
}

impl From<SolveError> for Failure {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::KTooLarge { .. } => Failure::resource(e),
            _ => Failure::usage(e),
        }
    }
}

impl From<OracleError> for Failure {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::KTooLargeForOracle { .. } | OracleError::SearchSpaceTooLarge { .. } => {
                Failure::resource(e)
            }
            OracleError::Solve(e) => e.into(),
        }
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{text}");
            } else {
                let _ = write!(out, "{text}");
            }
            return e.exit_code();
        }
    };
    match execute(&cli.command, out, err) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn execute(cmd: &Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    match cmd {
        Command::Check(args) => cmd_check(args, out, err),
        Command::Oracle { check, oracle_mode } => cmd_oracle(check, *oracle_mode, out, err),
        Command::Gen(GenCommand::Sat {
            variant,
            cnf,
            output,
        }) => {
            let phi = parse_dimacs(&read_file(cnf)?).map_err(Failure::usage)?;
            let h = match variant {
                SatVariant::Sc => sat_to_history_sc(&phi),
                SatVariant::Relaxed => sat_to_history_relaxed(&phi),
            };
            emit(&h, output.as_deref(), out)
        }
        Command::Gen(GenCommand::Random {
            model,
            threads,
            events,
            vars,
            seed,
            output,
        }) => {
            let model: SimModel = model.parse().map_err(Failure::usage)?;
            if *vars == 0 {
                return Err(Failure::usage("--vars must be at least 1"));
            }
            let prog = RandomProgram::generate(*threads, *events, *vars, *seed);
            emit(&simulate(&prog, model, *seed), output.as_deref(), out)
        }
        Command::Mutate {
            seed,
            trace,
            output,
        } => {
            let h = load_history(trace)?;
            let m = mutate(&h, *seed).map_err(Failure::usage)?;
            emit(&m, output.as_deref(), out)
        }
    }
}

fn read_file(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn load_history(path: &Path) -> Result<History, Failure> {
    parse_history(&read_file(path)?).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn prepare(args: &CheckArgs, err: &mut dyn Write) -> Result<(History, DerivedModel), Failure> {
    let spec: ModelSpec = args.model.parse().map_err(Failure::usage)?;
    let h = load_history(&args.trace)?;
    let m = derive(&h, &spec).map_err(Failure::usage)?;
    for w in &m.warnings {
        let _ = writeln!(err, "warning: {w}");
    }
    Ok((h, m))
}

fn emit(h: &History, output: Option<&Path>, out: &mut dyn Write) -> Result<i32, Failure> {
    let text = h.to_trace();
    match output {
        Some(path) => {
            fs::write(path, text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?
        }
        None => out
            .write_all(text.as_bytes())
            .map_err(|e| Failure::usage(format!("stdout: {e}")))?,
    }
    Ok(EXIT_CONSISTENT)
}

fn exit_code(outcome: Outcome) -> i32 {
    match outcome {
        Outcome::Consistent => EXIT_CONSISTENT,
        Outcome::Inconsistent => EXIT_INCONSISTENT,
    }
}

fn join_refs(h: &History, events: &[EventId], sep: &str) -> String {
    events
        .iter()
        .map(|&e| h.event_ref(e).to_string())
        .collect::<Vec<_>>()
        .join(sep)
}

/// `a -> b -> ... -> a`
fn cycle_line(h: &History, cycle: &[EventId]) -> String {
    let mut line = join_refs(h, cycle, " -> ");
    if let Some(&first) = cycle.first() {
        line.push_str(&format!(" -> {}", h.event_ref(first)));
    }
    line
}

fn header(out: &mut dyn Write, outcome: Outcome, m: &DerivedModel, h: &History) {
    let _ = writeln!(out, "verdict: {outcome}");
    let _ = writeln!(out, "model: {}", m.spec);
    let _ = writeln!(out, "k: {}", h.k());
    let _ = writeln!(out, "n: {}", h.n());
}

fn cmd_check(args: &CheckArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let (h, m) = prepare(args, err)?;
    let start = Instant::now();
    let v = solve_with(&h, &m, &SolverConfig { max_k: args.max_k })?;
    let elapsed = start.elapsed();

    header(out, v.outcome, &m, &h);
    if args.witness {
        if let Some(tw) = &v.witness {
            let _ = writeln!(out, "tw: {}", join_refs(&h, tw, " < "));
        }
        match &v.diagnostics {
            Some(Diagnostics::BaseCycle { graph, cycle }) => {
                let _ = writeln!(out, "diagnostics: base {graph} graph is cyclic");
                let _ = writeln!(out, "cycle: {}", cycle_line(&h, cycle));
            }
            Some(Diagnostics::OutOfThinAir { cycle }) => {
                let _ = writeln!(out, "diagnostics: dp and rf form a cycle");
                let _ = writeln!(out, "cycle: {}", cycle_line(&h, cycle));
            }
            Some(Diagnostics::NoWriteOrder) => {
                let _ = writeln!(out, "diagnostics: no write order keeps both graphs acyclic");
            }
            None => {}
        }
    }
    if args.stats {
        let _ = writeln!(out, "subsets: {}", v.stats.subsets_evaluated);
        let _ = writeln!(out, "graphs: {}", v.stats.graphs_built);
        let _ = writeln!(out, "kahn: {}", v.stats.kahn_runs);
        let _ = writeln!(out, "elapsed_ms: {:.3}", elapsed.as_secs_f64() * 1e3);
    }
    Ok(exit_code(v.outcome))
}

fn cmd_oracle(
    args: &CheckArgs,
    mode: OracleMode,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32, Failure> {
    let (h, m) = prepare(args, err)?;
    if h.k() > args.max_k {
        return Err(SolveError::KTooLarge {
            k: h.k(),
            cap: args.max_k,
        }
        .into());
    }
    let start = Instant::now();
    let v = match mode {
        OracleMode::Total => oracle_total(&h, &m)?,
        OracleMode::Store => oracle_store(&h, &m)?,
    };
    let elapsed = start.elapsed();

    header(out, v.outcome, &m, &h);
    if args.witness {
        if let Some(tw) = &v.witness {
            let _ = writeln!(out, "tw: {}", join_refs(&h, tw, " < "));
        }
        if let Some(order) = &v.store_order {
            let per_var: Vec<String> = order
                .per_var
                .iter()
                .enumerate()
                .map(|(x, ws)| format!("{}: {}", h.vars()[x], join_refs(&h, ws, " < ")))
                .collect();
            let _ = writeln!(out, "ww: {}", per_var.join("; "));
        }
    }
    if args.stats {
        let _ = writeln!(out, "explored: {}", v.explored);
        let _ = writeln!(out, "elapsed_ms: {:.3}", elapsed.as_secs_f64() * 1e3);
    }
    Ok(exit_code(v.outcome))
}
