//! `spg`: solve, reduce, verify, cross-check and simulate games with
//! combined sure, almost-sure and limit-sure parity objectives.

mod report;
mod run;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use report::Report;
use run::{Failure, Model, OracleMode, PipelineKind, SolveMode, EXIT_USAGE};

#[derive(Parser)]
#[command(name = "spg", version, about = "Stochastic parity games under combined qualitative objectives")]
struct Cli {
    /// Append wall-clock time to the report (makes it non-reproducible).
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute winning regions and strategies.
    Solve {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        mode: SolveMode,
        #[arg(long, value_enum, default_value = "auto")]
        model: Model,
        /// Tolerance for sls mode, as <num>/<den>.
        #[arg(long)]
        epsilon: Option<String>,
        /// Directory for strategy files.
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Write every stage of a reduction as game and map files.
    Reduce {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, alias = "to", value_enum)]
        pipeline: PipelineKind,
        #[arg(long)]
        emit: PathBuf,
    },
    /// Check a strategy file against every opponent.
    Verify {
        #[arg(long)]
        game: PathBuf,
        #[arg(long)]
        strategy: PathBuf,
        /// Objective to check; defaults to sas with two columns, parity with one.
        #[arg(long, value_enum)]
        mode: Option<SolveMode>,
        #[arg(long)]
        epsilon: Option<String>,
        /// Start configuration (id or label), repeatable; defaults to the game's init.
        #[arg(long)]
        from: Vec<String>,
    },
    /// Exhaustive reference solver.
    Oracle {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "sas")]
        mode: OracleMode,
        /// Memory states allowed to Player 0 in sas mode.
        #[arg(long, default_value_t = 2)]
        mem_bound: usize,
        /// Search budget in explored nodes.
        #[arg(long, default_value_t = run::ORACLE_CAP)]
        cap: u64,
    },
    /// Sample plays of the chain induced by a strategy.
    Simulate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        strategy: PathBuf,
        /// Memoryless Player-1 strategy; defaults to the first successor.
        #[arg(long)]
        opponent: Option<PathBuf>,
        #[arg(long)]
        from: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        steps: usize,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
    },
}

fn dispatch(command: &Command, report: &mut Report) -> run::Outcome {
    match command {
        Command::Solve { input, mode, model, epsilon, emit } => run::solve(
            run::SolveArgs { input, mode: *mode, model: *model, epsilon: epsilon.as_deref(), emit: emit.as_deref() },
            report,
        ),
        Command::Reduce { input, pipeline, emit } => run::reduce(input, *pipeline, emit, report),
        Command::Verify { game, strategy, mode, epsilon, from } => run::verify(
            run::VerifyArgs { game, strategy, mode: *mode, epsilon: epsilon.as_deref(), from },
            report,
        ),
        Command::Oracle { input, mode, mem_bound, cap } => run::oracle(input, *mode, *mem_bound, *cap, report),
        Command::Simulate { input, strategy, opponent, from, seed, steps, trials } => run::simulate_cmd(
            run::SimulateArgs {
                input,
                strategy,
                opponent: opponent.as_deref(),
                from: from.as_deref(),
                seed: *seed,
                steps: *steps,
                trials: *trials,
            },
            report,
        ),
    }
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let start = Instant::now();
    let mut report = Report::default();
    report.kv("command", args[1..].join(" "));
    let result = dispatch(&cli.command, &mut report);
    if cli.timing {
        report.kv("time_ms", start.elapsed().as_millis());
    }
    let code = match result {
        Ok(code) => code,
        Err(Failure { code, msg }) => {
            report.kv("error", &msg);
            eprintln!("error: {msg}");
            code
        }
    };
    let _ = std::io::stdout().write_all(report.render().as_bytes());
    ExitCode::from(code)
}
