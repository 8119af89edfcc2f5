mod io;
mod logic;
mod models;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;
use verinet::exec::Exec;
use verinet::seq::Relation;

use report::{Answer, Inputs, RunReport};

#[derive(Parser)]
#[command(name = "verinet", version, about = "Exact verification of neural networks and sequence models")]
struct Cli {
    /// Print a JSON run report instead of plain text.
    #[arg(long, global = true)]
    json: bool,
    /// Add the wall time to the JSON report (which makes it vary between runs).
    #[arg(long, global = true)]
    timing: bool,
    /// Worker threads for solver-internal parallelism; 1 runs sequentially.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
pub struct Formula {
    /// Formula file, or `-` for stdin.
    pub file: String,
    /// Network binding `NAME=path.json`; repeat for several networks.
    #[arg(long = "model", value_name = "NAME=PATH")]
    pub models: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Decide a specification sentence against bound networks.
    Check {
        #[command(flatten)]
        formula: Formula,
        #[arg(long, value_enum, default_value_t = Engine::Both)]
        engine: Engine,
        #[arg(long, default_value = "nnl")]
        dialect: String,
    },
    /// Satisfiability of an existential sentence.
    Solve {
        #[command(flatten)]
        formula: Formula,
        #[arg(long, default_value = "exists-nnl")]
        dialect: String,
        /// Print a satisfying assignment.
        #[arg(long)]
        witness: bool,
    },
    /// Reductions into network reachability.
    #[command(subcommand)]
    Reduce(Reduce),
    /// Büchi automata of formulas and automaton files.
    #[command(subcommand)]
    Automaton(AutomatonCmd),
    /// Recurrent networks.
    #[command(subcommand)]
    Rnn(RnnCmd),
    /// Probabilistic finite automata.
    #[command(subcommand)]
    Pfa(PfaCmd),
    /// Transformers.
    #[command(subcommand)]
    Tf(TfCmd),
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Engine {
    Automata,
    Exists,
    Both,
}

#[derive(Subcommand)]
pub enum Reduce {
    /// Reachability instance of a 3-CNF in DIMACS format.
    #[command(name = "3sat")]
    ThreeSat {
        cnf: String,
        /// Solve the instance instead of printing it.
        #[arg(long)]
        solve: bool,
        /// With --solve, print the satisfying assignment.
        #[arg(long)]
        witness: bool,
    },
}

#[derive(Subcommand)]
pub enum AutomatonCmd {
    /// Automaton of the solutions of a formula, in dump format.
    Build {
        #[command(flatten)]
        formula: Formula,
        #[arg(long, default_value = "nnl")]
        dialect: String,
        /// Track order as a comma list; defaults to the free variables in sorted order.
        #[arg(long)]
        vars: Option<String>,
        /// Write the dump to this file instead of stdout.
        #[arg(long, value_name = "FILE")]
        emit_automaton: Option<PathBuf>,
    },
    /// Truth value of a sentence by the automata engine.
    Decide {
        #[command(flatten)]
        formula: Formula,
        #[arg(long, default_value = "nnl")]
        dialect: String,
    },
    /// Rational values of the free and leading existential variables.
    Witness {
        #[command(flatten)]
        formula: Formula,
        #[arg(long, default_value = "nnl")]
        dialect: String,
    },
    /// Parse an automaton dump, optionally trim it, and print it back.
    Dump {
        file: String,
        #[arg(long)]
        trim: bool,
    },
}

#[derive(Subcommand)]
pub enum RnnCmd {
    /// Output after reading the whole sequence.
    Eval {
        model: String,
        input: String,
        /// Comma list of letters; the input is then a word under one-hot encoding.
        #[arg(long)]
        alphabet: Option<String>,
        /// Evaluate in floating point.
        #[arg(long)]
        float: bool,
    },
    /// Whether the score stands in the relation to the threshold.
    Classify {
        model: String,
        input: String,
        #[arg(long)]
        alphabet: Option<String>,
        #[arg(long, value_parser = relation, default_value = ">=")]
        rel: Relation,
        #[arg(long, default_value = "1/2")]
        theta: String,
    },
    /// Emptiness of the language of a Heaviside network; prints a shortest member otherwise.
    EmptyHeaviside {
        model: String,
        #[arg(long)]
        alphabet: Option<String>,
        #[arg(long, value_parser = relation, default_value = ">=")]
        rel: Relation,
        #[arg(long, default_value = "1/2")]
        theta: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
pub enum ClosureOp {
    Complement,
    Convex,
    Product,
}

#[derive(Subcommand)]
pub enum PfaCmd {
    /// Acceptance probability of a word.
    Eval { file: String, word: String },
    /// Closure constructions.
    Closure {
        #[arg(value_enum)]
        op: ClosureOp,
        files: Vec<String>,
        /// Weight of the first automaton for `convex`.
        #[arg(long)]
        p: Option<String>,
    },
    /// Letter-unique automaton with the same values.
    Letterize {
        file: String,
        /// Drop unreachable states afterwards.
        #[arg(long)]
        prune: bool,
    },
    /// Recurrent network recognising the cut-point language.
    ToRnn {
        file: String,
        #[arg(long, default_value = "1/2")]
        theta: String,
    },
    /// Automaton encoding a correspondence-problem instance.
    Pcp {
        /// Images of the letters under the first morphism, as comma-separated bit strings.
        #[arg(long)]
        f1: String,
        #[arg(long)]
        f2: String,
        #[arg(long, default_value = "a,b")]
        alphabet: String,
        /// Apply the squaring construction.
        #[arg(long)]
        square: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Example {
    Argmax,
    Sorted,
    Dyck,
}

#[derive(Subcommand)]
pub enum TfCmd {
    /// Output sequence (encoder-only) or greedy translation (encoder-decoder).
    Run {
        file: String,
        input: String,
        #[arg(long)]
        alphabet: Option<String>,
        #[arg(long)]
        float: bool,
        /// Decoding budget for encoder-decoder models.
        #[arg(long, default_value_t = 64)]
        max_steps: usize,
    },
    /// Value at the last position; with --theta, membership in the cut-point language.
    Classify {
        file: String,
        input: String,
        #[arg(long)]
        alphabet: Option<String>,
        #[arg(long)]
        float: bool,
        #[arg(long, value_parser = relation, default_value = ">=")]
        rel: Relation,
        #[arg(long)]
        theta: Option<String>,
    },
    /// Print one of the built-in constructions.
    BuildExample {
        #[arg(value_enum)]
        kind: Example,
    },
}

fn relation(s: &str) -> Result<Relation, String> {
    Relation::parse(s).ok_or_else(|| format!("unknown relation {s:?}; use >=, > or ="))
}

/// State shared by a single command run.
pub struct Run {
    pub exec: Exec,
    pub inputs: Inputs,
    pub witness: Option<Value>,
}

fn dispatch(cmd: Command, run: &mut Run) -> Result<(String, Answer)> {
    Ok(match cmd {
        Command::Check { formula, engine, dialect } => ("check".into(), logic::check(run, &formula, engine, &dialect)?),
        Command::Solve { formula, dialect, witness } => ("solve".into(), logic::solve(run, &formula, &dialect, witness)?),
        Command::Reduce(r) => ("reduce 3sat".into(), logic::reduce(run, r)?),
        Command::Automaton(a) => logic::automaton(run, a)?,
        Command::Rnn(r) => models::rnn(run, r)?,
        Command::Pfa(p) => models::pfa(run, p)?,
        Command::Tf(t) => models::tf(run, t)?,
    })
}

fn execute(cli: Cli) -> Result<i32> {
    let start = Instant::now();
    let exec = if cli.jobs == Some(1) { Exec::Sequential } else { Exec::default() };
    let mut run = Run { exec, inputs: Inputs::default(), witness: None };
    let (json, timing) = (cli.json, cli.timing);
    let (command, answer) = with_jobs(cli.jobs, || dispatch(cli.command, &mut run))??;
    let code = answer.exit_code();
    if json {
        let wall = timing.then(|| start.elapsed().as_secs_f64() * 1000.0);
        let report = RunReport::new(command, run.inputs, &answer, run.witness, wall);
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        println!("{}", report::human(&answer, run.witness.as_ref()));
    }
    Ok(code)
}

#[cfg(feature = "parallel")]
fn with_jobs<R: Send>(jobs: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R> {
    match jobs {
        Some(n) if n > 1 => Ok(rayon::ThreadPoolBuilder::new().num_threads(n).build()?.install(f)),
        _ => Ok(f()),
    }
}

#[cfg(not(feature = "parallel"))]
fn with_jobs<R>(_jobs: Option<usize>, f: impl FnOnce() -> R) -> Result<R> {
    Ok(f())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return ExitCode::from(if usage { 2 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
