use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dp::cli::{error_json, run, CliOptions};
use dp::config::parse_config;

/// Finite-element solver and verification harness for the Dirichlet
/// double-phase problem with gradient-dependent right-hand side.
#[derive(Parser)]
#[command(name = "dp", version, about)]
struct Cli {
    /// Path to the TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Omit the timestamp from reports (byte-reproducible output).
    #[arg(long, global = true)]
    no_timestamp: bool,

    /// Override solver.seed from the config.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Override solver.threads from the config.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Override output.dir from the config.
    #[arg(long, global = true)]
    out_dir: Option<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Picard-iterate the full problem and write the solution field.
    Solve,
    /// Compute the first r-Laplacian eigenvalue.
    Eig,
    /// Audit the declared certificates and the existence and uniqueness
    /// conditions; exits 2 when any check fails.
    Check,
    /// Print Musielak-Orlicz norms of a nodal field file.
    Norms,
    /// Manufactured-solutions convergence study.
    Mms,
    /// Repeat the solve from random initial guesses and compare limits.
    Contraction,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let subcommand = match cli.command {
        Command::Solve => "solve",
        Command::Eig => "eig",
        Command::Check => "check",
        Command::Norms => "norms",
        Command::Mms => "mms",
        Command::Contraction => "contraction",
    };
    let config_path = match &cli.config {
        Some(p) => p,
        None => {
            let err = dp::Error::Config("missing required flag --config".into());
            eprintln!("{}", error_json(&err));
            return ExitCode::from(1);
        }
    };
    let cfg = match parse_config(config_path) {
        Ok(cfg) => cfg,
        Err(err) => {
            eprintln!("{}", error_json(&err));
            return ExitCode::from(err.exit_code() as u8);
        }
    };
    let opts = CliOptions {
        no_timestamp: cli.no_timestamp,
        seed: cli.seed,
        threads: cli.threads,
        out_dir: cli.out_dir,
    };
    let mut stdout = std::io::stdout();
    match run(subcommand, &cfg, &opts, &mut stdout) {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("{}", error_json(&err));
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
