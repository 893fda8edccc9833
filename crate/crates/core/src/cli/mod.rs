//! Command-line surface: `run`, `check`, `solve` and `aggregate`.
//!
//! Exit codes:
//!
//! | command     | 0       | 1     | 2            | 3                | 4      |
//! |-------------|---------|-------|--------------|------------------|--------|
//! | `run`       | halted  | error | non-halting  | budget exhausted |        |
//! | `check`     | passed  | error |              |                  | failed |
//! | `solve`     | optimal | error | infeasible   | unknown (budget) |        |
//! | `aggregate` | written | error |              |                  |        |
//!
//! Malformed command lines also exit with 1.

pub mod aggregate;
pub mod format;
pub mod pgm;
pub mod program;

use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use thiserror::Error;

use crate::engine::{
    run_all_schedulers, run_parallel, run_traced, Policy, RunOptions, RunOutcome, TraceMode, TraceRecord,
};
use crate::error::Error;
use crate::network::{LetterId, Network};
use crate::optimize::{solve_monotone, solve_toppling_ip, Infeasibility, Solution, TopplingSolution};
use crate::verify::{check_abelian, check_monotone, Divergence};

pub use aggregate::{rotor_aggregate, AggregateOptions, RotorOrder};
pub use format::{load_network, parse_network, NetworkBundle, NetworkDocument};
pub use program::{load_program, Program, ProgramFile};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("vertex `{vertex}`: unknown processor family `{family}` (known: {})", crate::processors::ProcessorSpec::FAMILIES.join(", "))]
    UnknownFamily { vertex: String, family: String },

    #[error(transparent)]
    Network(#[from] Error),

    #[error("{0}")]
    Invalid(String),
}

pub(crate) fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[derive(Debug, Parser)]
#[command(name = "abelnet", version, about = "Run, check and solve with abelian networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a network file to completion.
    Run(RunArgs),
    /// Check every processor for abelianness and compare all schedulers.
    Check(CheckArgs),
    /// Solve a monotone or toppling integer program.
    Solve(SolveArgs),
    /// Rotor aggregation on the square grid, written as a PGM image.
    Aggregate(AggregateArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    pub file: PathBuf,
    /// fifo, lifo, rr, greedy or random:SEED
    #[arg(long, default_value = "fifo")]
    pub scheduler: Policy,
    #[arg(long, default_value_t = 1_000_000)]
    pub budget: u64,
    /// Write one JSON record per step to this file.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Include the full counts vector in every trace record.
    #[arg(long)]
    pub trace_full: bool,
    /// Run with this many worker threads.
    #[arg(long)]
    pub parallel: Option<usize>,
    /// Seed for the parallel vertex partition.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    pub file: PathBuf,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 100_000)]
    pub budget: u64,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    pub file: PathBuf,
    #[arg(long, default_value_t = 1_000_000)]
    pub budget: u64,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct AggregateArgs {
    /// Number of chips started at the origin.
    #[arg(long, short = 'n')]
    pub chips: u64,
    /// Grid radius; chosen from the chip count when omitted.
    #[arg(long)]
    pub radius: Option<u32>,
    /// Rotor service order, a permutation of NESW.
    #[arg(long, default_value = "NESW")]
    pub order: RotorOrder,
    #[arg(long, default_value = "fifo")]
    pub scheduler: Policy,
    #[arg(long, short = 'o')]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

fn letter_name(net: &Network, a: LetterId) -> String {
    format!("{}:{}", net.topology().vertex_name(a.vertex), a.symbol)
}

fn letters(net: &Network) -> impl Iterator<Item = (usize, String)> + '_ {
    (0..net.alphabet().len()).map(move |i| (i, letter_name(net, net.alphabet().letter(i))))
}

fn trace_line(net: &Network, r: &TraceRecord) -> String {
    let mut rec = json!({
        "step": r.step,
        "vertex": net.topology().vertex_name(r.letter.vertex),
        "symbol": r.letter.symbol,
        "digest": format!("{:016x}", r.digest),
    });
    if let Some(c) = &r.counts {
        rec["counts"] = json!(c);
    }
    rec.to_string()
}

fn run_report(net: &Network, outcome: &RunOutcome, json_out: bool) -> String {
    let names = net.topology().vertex_names();
    if json_out {
        let mut v = json!({ "status": outcome.kind() });
        match outcome {
            RunOutcome::Halted(h) => {
                v["steps"] = json!(h.steps);
                v["odometer"] = letters(net).map(|(i, n)| (n, json!(h.odometer.0[i]))).collect();
                v["states"] = names
                    .iter()
                    .zip(&h.states)
                    .map(|(n, s)| (n.clone(), json!(s.to_string())))
                    .collect();
            }
            RunOutcome::NonHalting(c) => {
                v["certificate"] = json!({
                    "first_step": c.first_step,
                    "repeat_step": c.repeat_step,
                    "counts": c.config.counts,
                    "states": c.config.states.iter().map(|s| s.to_string()).collect::<Vec<_>>(),
                    "word": c.word.iter().map(|&a| letter_name(net, a)).collect::<Vec<_>>(),
                });
            }
            RunOutcome::BudgetExhausted(e) => {
                v["steps"] = json!(e.steps);
                v["odometer"] = letters(net).map(|(i, n)| (n, json!(e.odometer.0[i]))).collect();
            }
        }
        return serde_json::to_string_pretty(&v).unwrap() + "\n";
    }
    let mut out = String::new();
    let _ = writeln!(out, "status: {}", outcome.kind());
    match outcome {
        RunOutcome::Halted(h) => {
            let _ = writeln!(out, "steps: {}", h.steps);
            let _ = writeln!(out, "odometer:");
            for (i, n) in letters(net) {
                let _ = writeln!(out, "  {n} {}", h.odometer.0[i]);
            }
            let _ = writeln!(out, "final states:");
            for (n, s) in names.iter().zip(&h.states) {
                let _ = writeln!(out, "  {n} {s}");
            }
        }
        RunOutcome::NonHalting(c) => {
            let word: Vec<String> = c.word.iter().map(|&a| letter_name(net, a)).collect();
            let _ = writeln!(
                out,
                "configuration after step {} recurs after step {}",
                c.first_step, c.repeat_step
            );
            let _ = writeln!(out, "repeating word: {}", word.join(" "));
            let _ = writeln!(out, "counts: {:?}", c.config.counts);
            let states: Vec<String> = c.config.states.iter().map(|s| s.to_string()).collect();
            let _ = writeln!(out, "states: {}", states.join(" "));
        }
        RunOutcome::BudgetExhausted(e) => {
            let _ = writeln!(out, "steps: {} (halting status unknown)", e.steps);
            let _ = writeln!(out, "partial odometer:");
            for (i, n) in letters(net) {
                let _ = writeln!(out, "  {n} {}", e.odometer.0[i]);
            }
        }
    }
    out
}

fn cmd_run(args: &RunArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let bundle = load_network(&args.file)?;
    let net = &bundle.network;
    let outcome = match args.parallel {
        Some(workers) => {
            if args.trace.is_some() {
                return Err(CliError::Invalid("--trace needs a sequential run; drop --parallel".into()));
            }
            if args.scheduler != Policy::Fifo {
                return Err(CliError::Invalid(
                    "--parallel reproduces the fifo run; --scheduler must be fifo".into(),
                ));
            }
            run_parallel(net, &bundle.input, &bundle.states, workers, args.seed, args.budget)?
        }
        None => {
            let trace = match (&args.trace, args.trace_full) {
                (None, _) => TraceMode::Off,
                (Some(_), false) => TraceMode::Digest,
                (Some(_), true) => TraceMode::Full,
            };
            let opts = RunOptions {
                trace,
                ..RunOptions::new(args.scheduler, args.budget)
            };
            let (outcome, records) = run_traced(net, &bundle.input, &bundle.states, &opts)?;
            if let Some(path) = &args.trace {
                let mut text = String::new();
                for r in &records {
                    text.push_str(&trace_line(net, r));
                    text.push('\n');
                }
                write_file(path, &text)?;
            }
            outcome
        }
    };
    emit(out, &run_report(net, &outcome, args.json))?;
    Ok(match outcome {
        RunOutcome::Halted(_) => 0,
        RunOutcome::NonHalting(_) => 2,
        RunOutcome::BudgetExhausted(_) => 3,
    })
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes()).map_err(|source| CliError::Io {
        path: "<stdout>".into(),
        source,
    })
}

fn divergence_text(d: &Divergence) -> String {
    match d {
        Divergence::State { left, right } => format!("final states {left} vs {right}"),
        Divergence::Output {
            edge,
            symbol,
            left,
            right,
        } => format!("edge {edge} symbol {symbol}: {left} vs {right} letters"),
        Divergence::Error(m) => format!("error: {m}"),
    }
}

fn cmd_check(args: &CheckArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let bundle = load_network(&args.file)?;
    let net = &bundle.network;
    let mut ok = true;
    let mut lines = String::new();
    let mut vertices = Vec::new();
    for v in 0..net.vertex_count() {
        let p = net.processor(v);
        let name = net.topology().vertex_name(v);
        let ab = check_abelian(p.as_ref(), args.trials, crate::verify::DEFAULT_MAX_LEN, args.seed);
        let mono = check_monotone(p.as_ref(), args.trials, args.seed);
        ok &= ab.passed() && mono.passed();
        let _ = write!(
            lines,
            "vertex {name} ({}): abelian {} ({} trials, {} pairs, {} states), monotone {}",
            p.family(),
            if ab.passed() { "ok" } else { "FAILED" },
            ab.trials,
            ab.pairs_checked,
            ab.states_sampled,
            if mono.passed() { "ok" } else { "FAILED" },
        );
        lines.push('\n');
        if let Some(f) = ab.failures.first() {
            let _ = writeln!(
                lines,
                "  witness from state {}: {:?} vs {:?}: {}",
                f.state,
                f.word,
                f.permuted,
                divergence_text(&f.divergence)
            );
        }
        vertices.push(json!({
            "vertex": name,
            "family": p.family(),
            "abelian": ab,
            "monotone": mono,
        }));
    }
    let cmp = run_all_schedulers(net, &bundle.input, &bundle.states, args.budget)?;
    ok &= cmp.agree;
    let statuses: Vec<String> = cmp
        .outcomes
        .iter()
        .map(|(p, o)| format!("{p}={}", o.kind()))
        .collect();
    let _ = writeln!(
        lines,
        "schedulers: {} ({})",
        if cmp.agree { "agree" } else { "DISAGREE" },
        statuses.join(", ")
    );
    if let Some(d) = &cmp.disagreement {
        let _ = writeln!(lines, "  {} vs {}: {}", d.first, d.second, d.reason);
    }
    let _ = writeln!(lines, "result: {}", if ok { "pass" } else { "fail" });
    if args.json {
        let v = json!({
            "passed": ok,
            "vertices": vertices,
            "schedulers": {
                "agree": cmp.agree,
                "outcomes": statuses,
                "disagreement": cmp.disagreement,
            },
        });
        emit(out, &(serde_json::to_string_pretty(&v).unwrap() + "\n"))?;
    } else {
        emit(out, &lines)?;
    }
    Ok(if ok { 0 } else { 4 })
}

fn cmd_solve(args: &SolveArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let program = load_program(&args.file)?;
    let (code, human, machine): (i32, String, Value) = match program {
        Program::Monotone(prog) => {
            let s = solve_monotone(&prog, args.budget)?;
            let mut h = format!("status: {}\nsteps: {}\n", s.status(), s.steps());
            match &s {
                Solution::Feasible {
                    minimizer,
                    image,
                    objective,
                    ..
                } => {
                    let _ = writeln!(h, "minimizer: {minimizer:?}");
                    let _ = writeln!(h, "F(minimizer): {image:?}");
                    let feasible = image.iter().zip(minimizer).all(|(a, b)| a <= b);
                    let _ = writeln!(h, "check F(u) <= u: {}", if feasible { "ok" } else { "FAILED" });
                    let _ = writeln!(h, "objective: {objective}");
                }
                Solution::Infeasible { certificate, .. } => match certificate {
                    Infeasibility::BoxEscape { point } => {
                        let _ = writeln!(
                            h,
                            "certificate: a legal run reached {point:?}, outside the table's box"
                        );
                    }
                    Infeasibility::Recurrence(c) => {
                        let _ = writeln!(
                            h,
                            "certificate: configuration recurs between steps {} and {}",
                            c.first_step, c.repeat_step
                        );
                    }
                },
                Solution::Unknown { .. } => {
                    let _ = writeln!(h, "budget exhausted; feasibility unknown");
                }
            }
            let code = match s {
                Solution::Feasible { .. } => 0,
                Solution::Infeasible { .. } => 2,
                Solution::Unknown { .. } => 3,
            };
            (code, h, serde_json::to_value(&s).unwrap())
        }
        Program::Toppling(sys) => {
            let s = solve_toppling_ip(&sys, args.budget)?;
            let mut h = format!("status: {}\n", s.status());
            match &s {
                TopplingSolution::Feasible {
                    v,
                    odometer,
                    laplacian_v,
                    b,
                    verified,
                    steps,
                } => {
                    let _ = writeln!(h, "steps: {steps}");
                    let _ = writeln!(h, "topplings v: {v:?}");
                    let _ = writeln!(h, "odometer u: {odometer:?}");
                    let _ = writeln!(h, "Lv: {laplacian_v:?}");
                    let _ = writeln!(h, "b: {b:?}");
                    let _ = writeln!(h, "check Lv >= b: {}", if *verified { "ok" } else { "FAILED" });
                }
                TopplingSolution::Infeasible { certificate } => {
                    let _ = writeln!(
                        h,
                        "certificate: configuration recurs between steps {} and {}",
                        certificate.first_step, certificate.repeat_step
                    );
                }
                TopplingSolution::Unknown { steps } => {
                    let _ = writeln!(h, "steps: {steps}\nbudget exhausted; feasibility unknown");
                }
            }
            let code = match s {
                TopplingSolution::Feasible { verified: true, .. } => 0,
                TopplingSolution::Feasible { .. } => 1,
                TopplingSolution::Infeasible { .. } => 2,
                TopplingSolution::Unknown { .. } => 3,
            };
            (code, h, serde_json::to_value(&s).unwrap())
        }
    };
    if args.json {
        emit(out, &(serde_json::to_string_pretty(&machine).unwrap() + "\n"))?;
    } else {
        emit(out, &human)?;
    }
    Ok(code)
}

fn cmd_aggregate(args: &AggregateArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let agg = rotor_aggregate(&AggregateOptions {
        chips: args.chips,
        radius: args.radius,
        order: args.order,
        policy: args.scheduler,
        budget: u64::MAX,
    })?;
    if let Some(path) = &args.output {
        write_file(path, &agg.to_pgm().encode())?;
    }
    let ratio = agg.ratio();
    if args.json {
        let v = json!({
            "chips": agg.chips,
            "visited": agg.visited,
            "radius": agg.radius,
            "order": agg.order.to_string(),
            "inradius": agg.inradius,
            "outradius": agg.outradius,
            "ratio": ratio,
            "steps": agg.steps,
        });
        emit(out, &(serde_json::to_string_pretty(&v).unwrap() + "\n"))?;
    } else {
        let mut h = String::new();
        let _ = writeln!(h, "visited: {}", agg.visited);
        let _ = writeln!(h, "inradius: {:.4}", agg.inradius);
        let _ = writeln!(h, "outradius: {:.4}", agg.outradius);
        if let Some(r) = ratio {
            let _ = writeln!(h, "ratio: {r:.4}");
        }
        let _ = writeln!(h, "grid radius: {}, rotor order: {}", agg.radius, agg.order);
        emit(out, &h)?;
    }
    Ok(0)
}

/// Runs a parsed command, writing its report to `out`.
pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<i32, CliError> {
    match &cli.command {
        Command::Run(a) => cmd_run(a, out),
        Command::Check(a) => cmd_check(a, out),
        Command::Solve(a) => cmd_solve(a, out),
        Command::Aggregate(a) => cmd_aggregate(a, out),
    }
}

/// Entry point for the binary; returns the process exit code. Usage errors
/// exit with 1 like every other error, keeping 2 and 3 for run outcomes.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let stdout = io::stdout();
    let mut lock = stdout.lock();
    match execute(&cli, &mut lock) {
        Ok(code) => code,
        Err(e) => {
            let _ = lock.flush();
            eprintln!("error: {e}");
            1
        }
    }
}
