use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use limid::arch::Arch;
use limid::compile::{check_soluble, compile, reduce};
use limid::format::{parse_limid, serialize_limid};
use limid::generate::{generate, GenParams};
use limid::oracle::{brute_optimal, DEFAULT_CELL_CAP, DEFAULT_STRATEGY_CAP};
use limid::report::{oracle_text, solve_csv, solve_text, CompareReport};
use limid::spu::{solve_soluble, spu_general, SolveResult};
use limid::{Error, Limid};

const AGREEMENT_TOLERANCE: f64 = 1e-9;

#[derive(Parser)]
#[command(
    name = "limid",
    version,
    about = "Solve limited memory influence diagrams by single policy updating"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ArchFlag {
    Ss,
    Hugin,
    Lp,
}

impl From<ArchFlag> for Arch {
    fn from(a: ArchFlag) -> Arch {
        match a {
            ArchFlag::Ss => Arch::ShaferShenoy,
            ArchFlag::Hugin => Arch::Hugin,
            ArchFlag::Lp => Arch::Lazy,
        }
    }
}

#[derive(Clone, Copy, Default, ValueEnum)]
enum ReportFlag {
    #[default]
    Text,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Reduce and compile a diagram into a junction tree.
    Compile {
        input: PathBuf,
        /// Print cliques, separators and assignments.
        #[arg(long)]
        dump_jt: bool,
    },
    /// Solve with one architecture.
    Solve {
        input: PathBuf,
        #[arg(long, value_enum)]
        arch: ArchFlag,
        /// Iterate policy updates until no policy changes.
        #[arg(long)]
        general: bool,
        #[arg(long, value_enum, default_value = "text")]
        report: ReportFlag,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Solve with every applicable architecture and compare operation counts.
    Compare {
        input: PathBuf,
        #[arg(long)]
        general: bool,
        #[arg(long, value_enum, default_value = "csv")]
        report: ReportFlag,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Write a random diagram.
    Gen {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        chance: usize,
        #[arg(long, default_value_t = 2)]
        decisions: usize,
        #[arg(long, default_value_t = 2)]
        values: usize,
        #[arg(long, default_value_t = 2)]
        cardinality: usize,
        #[arg(long, default_value_t = 2)]
        max_parents: usize,
        /// Produce a diagram that passes the solubility test.
        #[arg(long)]
        soluble: bool,
        #[arg(long, default_value_t = 1 << 14)]
        max_strategies: u128,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Find an optimal strategy by enumeration.
    Oracle {
        input: PathBuf,
        /// Most cells in the joint table.
        #[arg(long, default_value_t = DEFAULT_CELL_CAP)]
        cap: u128,
    },
}

enum Failure {
    Input(Error),
    Solver(Error),
    Disagreement(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Syntax { .. } | Error::Semantic(_) | Error::Io(_) | Error::Infeasible(_) => {
                Failure::Input(e)
            }
            _ => Failure::Solver(e),
        }
    }
}

fn load(path: &Path) -> Result<Limid, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Input(Error::Io(e)))?;
    Ok(parse_limid(&text)?)
}

fn emit(text: &str, output: Option<&Path>) -> Result<(), Failure> {
    match output {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Input(Error::Io(e))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run_solve(limid: &Limid, arch: Arch, general: bool) -> Result<SolveResult, Failure> {
    let res = if general {
        spu_general(limid, arch)
    } else {
        solve_soluble(limid, arch)
    };
    Ok(res?)
}

fn agree(a: &SolveResult, b: &SolveResult) -> bool {
    let scale = a
        .expected_utility
        .abs()
        .max(b.expected_utility.abs())
        .max(1.0);
    a.strategy == b.strategy
        && (a.expected_utility - b.expected_utility).abs() <= AGREEMENT_TOLERANCE * scale
}

fn compare(limid: &Limid, general: bool) -> Result<CompareReport, Failure> {
    let archs: Vec<Arch> = Arch::ALL
        .into_iter()
        .filter(|a| !general || a.can_retract())
        .collect();
    let results: Vec<Result<SolveResult, Failure>> = std::thread::scope(|s| {
        let handles: Vec<_> = archs
            .iter()
            .map(|&a| s.spawn(move || run_solve(limid, a, general)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("solver thread panicked"))
            .collect()
    });
    let results = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    for r in &results[1..] {
        if !agree(&results[0], r) {
            return Err(Failure::Disagreement(format!(
                "{} and {} disagree (EU {} vs {})",
                results[0].arch, r.arch, results[0].expected_utility, r.expected_utility
            )));
        }
    }
    Ok(CompareReport::from_results(&results))
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Compile { input, dump_jt } => {
            let limid = load(&input)?;
            check_soluble(&limid)
                .map(|_| ())
                .unwrap_or_else(|e| eprintln!("note: {e}"));
            let reduced = reduce(&limid);
            let jt = compile(&reduced)?;
            if dump_jt {
                print!("{}", jt.dump(&reduced));
            } else {
                println!(
                    "cliques: {} edges: {} total size: {}",
                    jt.len(),
                    jt.edges.len(),
                    jt.total_size()
                );
            }
        }
        Command::Solve {
            input,
            arch,
            general,
            report,
            output,
        } => {
            let limid = load(&input)?;
            let res = run_solve(&limid, arch.into(), general)?;
            let text = match report {
                ReportFlag::Text => solve_text(&limid, &res),
                ReportFlag::Csv => solve_csv(&limid, &res),
            };
            emit(&text, output.as_deref())?;
        }
        Command::Compare {
            input,
            general,
            report,
            output,
        } => {
            let limid = load(&input)?;
            let cmp = compare(&limid, general)?;
            let text = match report {
                ReportFlag::Text => cmp.to_text(),
                ReportFlag::Csv => cmp.to_csv(),
            };
            emit(&text, output.as_deref())?;
        }
        Command::Gen {
            seed,
            chance,
            decisions,
            values,
            cardinality,
            max_parents,
            soluble,
            max_strategies,
            output,
        } => {
            let params = GenParams {
                chance,
                decisions,
                values,
                cardinality,
                max_parents,
                soluble,
                max_strategies,
            };
            let limid = generate(&params, seed)?;
            emit(&serialize_limid(&limid), output.as_deref())?;
        }
        Command::Oracle { input, cap } => {
            let limid = load(&input)?;
            let (strategy, eu) = brute_optimal(&limid, cap, DEFAULT_STRATEGY_CAP)?;
            print!("{}", oracle_text(&limid, &strategy, eu));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Solver(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
        Err(Failure::Disagreement(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(4)
        }
    }
}
