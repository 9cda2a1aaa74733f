use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use metriplex_cli::{cmd_demo, cmd_simulate, cmd_verify, Options, EXIT_OK, EXIT_USAGE};

/// Verify and simulate metriplectic 4-bracket systems.
#[derive(Parser)]
#[command(name = "metriplex", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output directory (default: the config's output.dir, then METRIPLEX_OUT, then ./out)
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Seed for sampled states and random initial data
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,

    /// Worker threads for parameter sweeps
    #[arg(long, global = true, value_name = "K")]
    jobs: Option<usize>,

    /// Only report errors
    #[arg(long, short, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run the verification suites; exit 1 if any check fails
    Verify { config: PathBuf },
    /// Integrate the system; exit 1 on divergence or a violated law
    Simulate { config: PathBuf },
    /// Run a canned example: rigid_body, kida, viscous1d, kdv, ott_sudan or euler2d
    Demo { name: String },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            return ExitCode::from(code as u8);
        }
    };
    if cli.jobs == Some(0) {
        eprintln!("error: --jobs must be at least 1");
        return ExitCode::from(EXIT_USAGE as u8);
    }
    let opts = Options {
        out: cli.out,
        env_out: std::env::var_os("METRIPLEX_OUT").filter(|v| !v.is_empty()).map(PathBuf::from),
        seed: cli.seed,
        jobs: cli.jobs,
        quiet: cli.quiet,
    };
    let code = match &cli.command {
        Command::Verify { config } => cmd_verify(config, &opts),
        Command::Simulate { config } => cmd_simulate(config, &opts),
        Command::Demo { name } => cmd_demo(name, &opts),
    };
    ExitCode::from(code as u8)
}
