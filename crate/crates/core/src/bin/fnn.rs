use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use fnn_workbench::cli::{run_command, Command, OutputFormat, RunOptions, EXIT_CONFIG};

#[derive(Parser)]
#[command(name = "fnn", version, about = "Full network nonlocality workbench")]
struct Cli {
    /// JSON configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the statistics and optimization seeds.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for data files and the run report.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: Format,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Cmd {
    /// Witness values at the configured scenario.
    Theory,
    /// Witness values along the alpha1 grid.
    Sweep,
    /// Simulated finite-statistics run with bootstrap errors.
    Sample,
    /// Search hybrid models for values above the bound.
    VerifyBound,
    /// Check the inflation identities on random hybrid models.
    InflateCheck,
    /// Space-like separation audit.
    Spacetime,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            return ExitCode::from(code as u8);
        }
    };
    let command = match cli.command {
        Cmd::Theory => Command::Theory,
        Cmd::Sweep => Command::Sweep,
        Cmd::Sample => Command::Sample,
        Cmd::VerifyBound => Command::VerifyBound,
        Cmd::InflateCheck => Command::InflateCheck,
        Cmd::Spacetime => Command::Spacetime,
    };
    let opts = RunOptions {
        out_dir: cli.out,
        format: match cli.format {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        },
    };
    let code = run_command(
        command,
        cli.config.as_deref(),
        cli.seed,
        &opts,
        &mut std::io::stdout(),
        &mut std::io::stderr(),
    );
    ExitCode::from(code as u8)
}
