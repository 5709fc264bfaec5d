use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use earley_datalog::automaton::{
    build_automaton_with, emit_rewritten_program, run_automaton, DEFAULT_STATE_CAP,
};
use earley_datalog::bench::{bench, BenchOptions};
use earley_datalog::check::{check, CheckOptions};
use earley_datalog::grammar::{recognizer, Grammar};
use earley_datalog::{
    earley, ensure_valid, load_facts, parse_program, seminaive, AnswerSet, Error, FactStore, Program, Symbol,
};

#[derive(Parser)]
#[command(
    name = "edl",
    version,
    about = "Datalog workbench: bottom-up, Earley deduction and compiled automata"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Fact file (`.csv` named after its predicate, or `.dl` facts); repeatable.
    #[arg(long, global = true, value_name = "PATH")]
    facts: Vec<PathBuf>,

    /// Maximum number of automaton states.
    #[arg(long, global = true, default_value_t = DEFAULT_STATE_CAP)]
    state_cap: usize,

    /// Print tables as CSV.
    #[arg(long, global = true)]
    csv: bool,

    /// Write a derivation trace to stderr (earley engine).
    #[arg(long, global = true)]
    trace: bool,

    /// Replace the query's constants, in argument order; repeatable.
    #[arg(long = "const", global = true, value_name = "C")]
    consts: Vec<String>,

    /// Drop one answer from this engine's result in `check`.
    #[arg(long, global = true, hide = true)]
    sabotage: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Answer the program's query.
    Eval {
        program: PathBuf,
        #[arg(long, value_enum, default_value_t = Engine::Seminaive)]
        engine: Engine,
    },
    /// Print the compiled automaton or the rewritten program.
    Compile {
        program: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Dump)]
        format: Format,
    },
    /// Run every engine and compare the answers.
    Check {
        program: PathBuf,
        /// Further fact files, as with --facts.
        extra_facts: Vec<PathBuf>,
    },
    /// Time every engine on one workload.
    Bench {
        program: PathBuf,
        /// Further fact files, as with --facts.
        extra_facts: Vec<PathBuf>,
        #[arg(short = 'r', long, default_value_t = 5)]
        repetitions: usize,
        /// Give up on the bottom-up engine after deriving this many tuples.
        #[arg(long)]
        max_tuples: Option<u64>,
    },
    /// Turn a grammar and an input string into a recognizer program and facts.
    FromGrammar {
        grammar: PathBuf,
        input: String,
        /// Write program.dl and facts.dl here instead of printing them.
        #[arg(short = 'o', long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Engine {
    Seminaive,
    Earley,
    Automaton,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Dump,
    Rewritten,
}

enum Failure {
    Input(String),
    Limit(String),
    Disagreement,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_limit() {
            Failure::Limit(e.to_string())
        } else {
            Failure::Input(e.to_string())
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Disagreement) => ExitCode::from(2),
        Err(Failure::Limit(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_program(cli: &Cli, path: &Path) -> Result<Program, Failure> {
    let text = read(path)?;
    let p = parse_program(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    ensure_valid(&p)?;
    if cli.consts.is_empty() {
        return Ok(p);
    }
    let consts: Vec<Symbol> = cli.consts.iter().map(|c| Symbol::intern(c)).collect();
    p.with_query_constants(&consts).ok_or_else(|| {
        Error::QueryArity {
            expected: p.query_constants().len(),
            found: consts.len(),
        }
        .into()
    })
}

fn load_store(cli: &Cli, p: &Program, extra: &[PathBuf]) -> Result<FactStore, Failure> {
    let paths: Vec<&PathBuf> = cli.facts.iter().chain(extra).collect();
    Ok(load_facts(&paths, &p.edb).map_err(Error::from)?)
}

fn run(cli: &Cli) -> Outcome {
    let mut out = io::stdout().lock();
    match &cli.command {
        Command::Eval { program, engine } => {
            let p = load_program(cli, program)?;
            let store = load_store(cli, &p, &[])?;
            let answers: AnswerSet = match engine {
                Engine::Seminaive => seminaive::answer_query(&p, &store)?,
                Engine::Earley => {
                    let mut err = io::stderr().lock();
                    let trace = cli.trace.then_some(&mut err as &mut dyn Write);
                    earley::run(&p, &store, &earley::Options::default(), trace)?.0
                }
                Engine::Automaton => {
                    let a = build_automaton_with(&p, cli.state_cap)?;
                    run_automaton(&a, &store, &p.query_constants())?
                }
            };
            write!(out, "{answers}")?;
        }
        Command::Compile { program, format } => {
            let p = load_program(cli, program)?;
            let a = build_automaton_with(&p, cli.state_cap)?;
            match format {
                Format::Dump => write!(out, "{}", a.dump())?,
                Format::Rewritten => write!(out, "{}", emit_rewritten_program(&a))?,
            }
        }
        Command::Check { program, extra_facts } => {
            let p = load_program(cli, program)?;
            let store = load_store(cli, &p, extra_facts)?;
            let opts = CheckOptions {
                state_cap: cli.state_cap,
                sabotage: cli.sabotage.clone(),
            };
            let report = check(&p, &store, &opts)?;
            write!(out, "{report}")?;
            if !report.agree() {
                return Err(Failure::Disagreement);
            }
        }
        Command::Bench {
            program,
            extra_facts,
            repetitions,
            max_tuples,
        } => {
            let p = load_program(cli, program)?;
            let store = load_store(cli, &p, extra_facts)?;
            let opts = BenchOptions {
                repetitions: *repetitions,
                state_cap: cli.state_cap,
                seminaive_max_tuples: *max_tuples,
                ..Default::default()
            };
            let table = bench(&p, &store, &opts)?;
            if cli.csv {
                write!(out, "{}", table.to_csv())?;
            } else {
                write!(out, "{table}")?;
            }
        }
        Command::FromGrammar {
            grammar,
            input,
            out: dir,
        } => {
            let text = read(grammar)?;
            let g =
                Grammar::parse(&text).map_err(|e| Failure::Input(format!("{}: {e}", grammar.display())))?;
            let r = recognizer(&g, input).map_err(|e| Failure::Input(e.to_string()))?;
            match dir {
                Some(dir) => {
                    fs::create_dir_all(dir)?;
                    fs::write(dir.join("program.dl"), r.program.to_string())?;
                    fs::write(dir.join("facts.dl"), r.facts_text())?;
                }
                None => write!(out, "{}% facts\n{}", r.program, r.facts_text())?,
            }
        }
    }
    Ok(())
}
