use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qlie::cli::{cmd_analyze, cmd_demo, cmd_simulate, AnalyzeArgs, CliError, DemoArgs, SimulateArgs};

#[derive(Parser)]
#[command(
    name = "qlie",
    version,
    about = "Controllability analysis for quantum control systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide density-matrix and wavefunction controllability of a system file.
    Analyze {
        path: PathBuf,
        /// Rank/closure tolerance (overrides QLIE_TOL).
        #[arg(long, env = "QLIE_TOL")]
        tol: Option<f64>,
        /// Write a JSON report here.
        #[arg(long)]
        json: Option<PathBuf>,
        #[arg(long)]
        max_rounds: Option<usize>,
    },
    /// Propagate a state, density matrix or propagator under a piecewise-constant control.
    Simulate {
        path: PathBuf,
        /// File holding a JSON list of {"duration", "value"} segments; empty control if omitted.
        #[arg(long)]
        control: Option<PathBuf>,
        /// Initial state as comma-separated complex amplitudes, e.g. "1,0" or "0.6,0.8i".
        #[arg(long, conflicts_with = "density")]
        state: Option<String>,
        /// File holding the initial density matrix as a JSON {"re", "im"} object.
        #[arg(long)]
        density: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Analyze a built-in model: oscillator, random, diagonal, bracket-table.
    Demo {
        name: String,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long = "l", default_value_t = 1)]
        l: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let mut stdout = std::io::stdout().lock();
    let result: Result<(), CliError> = match cli.command {
        Command::Analyze {
            path,
            tol,
            json,
            max_rounds,
        } => cmd_analyze(
            &AnalyzeArgs {
                path,
                tol,
                json,
                max_rounds,
            },
            &mut stdout,
        )
        .map(drop),
        Command::Simulate {
            path,
            control,
            state,
            density,
            json,
        } => cmd_simulate(
            &SimulateArgs {
                path,
                control,
                state,
                density,
                json,
            },
            &mut stdout,
        )
        .map(drop),
        Command::Demo {
            name,
            n,
            l,
            seed,
            json,
        } => cmd_demo(
            &DemoArgs {
                name,
                n,
                l,
                seed,
                json,
            },
            &mut stdout,
        )
        .map(drop),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit() as u8)
        }
    }
}
