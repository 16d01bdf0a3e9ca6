use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use aspnav::engine::{
    enumerate, solve, ForgetPolicy, Heuristic, HeuristicPolicy, RestartForgetPolicy, SolveConfig, Stats, Strategy,
    Verdict,
};
use aspnav::trace::{self, Conformance, Mode, VerifyOptions};
use aspnav::{oracle, Atom, Error, Program};

const EXIT_ANSWER_SET: u8 = 10;
const EXIT_UNSAT: u8 = 20;
const EXIT_INVALID: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(name = "aspnav", version, about = "Answer set solving as navigation of a transition system")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print one answer set or UNSATISFIABLE.
    Solve {
        #[command(flatten)]
        solver: SolverArgs,
        /// Also write the trace to this file.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Print statistics to stderr.
        #[arg(long)]
        stats: bool,
        /// Program file; stdin when omitted or `-`.
        input: Option<PathBuf>,
    },
    /// Print every answer set, one per line, found by repeated solving.
    Enum {
        #[command(flatten)]
        solver: SolverArgs,
        /// Cross-check against the brute-force oracle.
        #[arg(long)]
        check: bool,
        input: Option<PathBuf>,
    },
    /// Solve and write the trace (to stdout unless --trace is given).
    Trace {
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        trace: Option<PathBuf>,
        input: Option<PathBuf>,
    },
    /// Check a trace for edge legality and, with --strategy, conformance.
    Verify {
        /// Strategy to check conformance against.
        #[arg(long)]
        strategy: Option<String>,
        #[arg(long, value_enum, default_value_t = ModeArg::Syntactic)]
        mode: ModeArg,
        /// Accept a trace that stops before a terminal marker.
        #[arg(long)]
        prefix_ok: bool,
        program: PathBuf,
        trace: PathBuf,
    },
    /// Print atom and rule counts, tightness and the positive SCCs.
    Info { input: Option<PathBuf> },
}

#[derive(Args)]
struct SolverArgs {
    /// smodelscc, sup or custom:<tiers>, e.g. custom:bj+fail,up+arc+bt+bf,d,unf
    #[arg(long, default_value = "smodelscc")]
    strategy: String,
    #[arg(long, value_enum, default_value_t = HeuristicArg::Static)]
    heuristic: HeuristicArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// off or luby:<unit>
    #[arg(long, default_value = "off")]
    restarts: String,
    /// off, cap:<k>, or scaled (four clauses per rule)
    #[arg(long, default_value = "scaled")]
    forget: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum HeuristicArg {
    Static,
    Activity,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Syntactic,
    Semantic,
}

struct Usage(String);

impl From<Error> for Usage {
    fn from(e: Error) -> Self {
        Usage(e.to_string())
    }
}

impl From<io::Error> for Usage {
    fn from(e: io::Error) -> Self {
        Usage(e.to_string())
    }
}

fn knob<T>(value: &str, prefix: &str, make: impl Fn(u64) -> T) -> Result<Option<T>, Usage> {
    if value == "off" {
        return Ok(None);
    }
    value
        .strip_prefix(prefix)
        .and_then(|n| n.parse().ok())
        .map(|n| Some(make(n)))
        .ok_or_else(|| Usage(format!("expected `off` or `{prefix}<n>`, got `{value}`")))
}

impl SolverArgs {
    fn config(&self, digests: bool) -> Result<SolveConfig, Usage> {
        let strategy = Strategy::parse(&self.strategy)?;
        let policy = match self.heuristic {
            HeuristicArg::Static => HeuristicPolicy::Static,
            HeuristicArg::Activity => HeuristicPolicy::Activity,
        };
        let luby_unit = knob(&self.restarts, "luby:", |n| n)?;
        if luby_unit == Some(0) {
            return Err(Usage("the Luby unit must be positive".into()));
        }
        let forget = match self.forget.as_str() {
            "scaled" => ForgetPolicy::Scaled,
            other => knob(other, "cap:", |k| ForgetPolicy::Cap(k as usize))?.unwrap_or(ForgetPolicy::Off),
        };
        Ok(SolveConfig {
            strategy: Some(strategy),
            heuristic: Heuristic { policy, seed: self.seed },
            policy: RestartForgetPolicy { luby_unit, forget },
            digests,
        })
    }
}

fn read_program(input: Option<&PathBuf>) -> Result<Program, Usage> {
    let text = match input {
        Some(path) if path.as_os_str() != "-" => {
            fs::read_to_string(path).map_err(|e| Usage(format!("{}: {e}", path.display())))?
        }
        _ => {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s)?;
            s
        }
    };
    Program::parse(&text).map_err(|e| Usage(e.to_string()))
}

fn names(p: &Program, atoms: &[Atom]) -> String {
    atoms.iter().map(|&a| p.name(a)).collect::<Vec<_>>().join(" ")
}

fn print_stats(s: &Stats) {
    eprintln!(
        "steps {} decisions {} propagations {} conflicts {} learned {} restarts {} forgets {}",
        s.steps, s.decisions, s.propagations, s.conflicts, s.learned, s.restarts, s.forgets
    );
}

fn write_trace_to(t: &aspnav::Trace, path: Option<&PathBuf>) -> Result<(), Usage> {
    match path {
        Some(path) => {
            let mut f = io::BufWriter::new(fs::File::create(path).map_err(|e| Usage(format!("{}: {e}", path.display())))?);
            trace::write_trace(t, &mut f)?;
            f.flush()?;
        }
        None => trace::write_trace(t, &mut io::stdout().lock())?,
    }
    Ok(())
}

fn verdict_code(v: &Verdict) -> u8 {
    match v {
        Verdict::AnswerSet(_) => EXIT_ANSWER_SET,
        Verdict::Unsatisfiable => EXIT_UNSAT,
    }
}

fn run(cli: Cli) -> Result<u8, Usage> {
    match cli.command {
        Command::Solve { solver, trace, stats, input } => {
            let p = read_program(input.as_ref())?;
            let r = solve(&p, &solver.config(true)?);
            match &r.verdict {
                Verdict::AnswerSet(atoms) => println!("{}", names(&p, atoms)),
                Verdict::Unsatisfiable => println!("UNSATISFIABLE"),
            }
            if let Some(path) = trace.as_ref() {
                write_trace_to(&r.trace, Some(path))?;
            }
            if stats {
                print_stats(&r.stats);
            }
            Ok(verdict_code(&r.verdict))
        }
        Command::Enum { solver, check, input } => {
            let p = read_program(input.as_ref())?;
            let expected = if check { Some(oracle::answer_sets(&p)?) } else { None };
            let e = enumerate(&p, &solver.config(false)?);
            let mut found = e.answer_sets.clone();
            for atoms in &found {
                println!("{}", names(&p, atoms));
            }
            if found.is_empty() {
                println!("UNSATISFIABLE");
            }
            if let Some(expected) = expected {
                found.sort();
                if found != expected {
                    eprintln!("oracle mismatch: the oracle finds {} answer set(s)", expected.len());
                    return Ok(EXIT_INVALID);
                }
                eprintln!("oracle agrees on {} answer set(s)", expected.len());
            }
            Ok(if found.is_empty() { EXIT_UNSAT } else { EXIT_ANSWER_SET })
        }
        Command::Trace { solver, trace, input } => {
            let p = read_program(input.as_ref())?;
            let r = solve(&p, &solver.config(true)?);
            write_trace_to(&r.trace, trace.as_ref())?;
            Ok(verdict_code(&r.verdict))
        }
        Command::Verify { strategy, mode, prefix_ok, program, trace } => {
            let p = read_program(Some(&program))?;
            let strategy = strategy.as_deref().map(Strategy::parse).transpose()?;
            let file = fs::File::open(&trace).map_err(|e| Usage(format!("{}: {e}", trace.display())))?;
            let t = trace::read_trace(io::BufReader::new(file))?;
            let mode = match mode {
                ModeArg::Syntactic => Mode::Syntactic,
                ModeArg::Semantic => Mode::Semantic,
            };
            match trace::verify_trace(&p, &t, VerifyOptions { mode, prefix_ok })? {
                trace::Verdict::Invalid { step, reason } => {
                    println!("invalid at step {step}: {reason}");
                    return Ok(EXIT_INVALID);
                }
                trace::Verdict::Valid { warnings } => {
                    for w in warnings {
                        eprintln!("warning: {w}");
                    }
                }
            }
            match strategy.map(|s| trace::check_strategy_conformance(&p, &t, &s)) {
                Some(Conformance::NonConformant { step, reason }) => {
                    println!("non-conformant at step {step}: {reason}");
                    Ok(EXIT_INVALID)
                }
                Some(Conformance::Conformant) => {
                    println!("valid, conformant");
                    Ok(0)
                }
                None => {
                    println!("valid");
                    Ok(0)
                }
            }
        }
        Command::Info { input } => {
            let p = read_program(input.as_ref())?;
            println!("atoms: {}", p.num_atoms());
            println!("rules: {}", p.rules().len());
            println!("tight: {}", if p.is_tight() { "yes" } else { "no" });
            for c in p.positive_sccs() {
                let mark = if c.cyclic { " (cyclic)" } else { "" };
                println!("scc: {}{mark}", names(&p, &c.atoms));
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Usage(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
