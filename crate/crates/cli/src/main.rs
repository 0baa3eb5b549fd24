use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use catlab_cli::{run_experiment, ExperimentConfig, RunError};

/// Cat-code error-correction experiments: teleportation circuit, loss sweeps,
/// Wigner grids and cavity scans.
#[derive(Parser)]
#[command(name = "catlab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a flat TOML config file.
    Run {
        /// Path to the config file.
        config: PathBuf,
        /// Output directory for the CSV files (default: current directory).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads for the sweep pool (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
        /// Override the Fock-space cutoff.
        #[arg(long)]
        cutoff: Option<usize>,
    },
}

fn run(cli: Cli) -> Result<(), u8> {
    match cli.command {
        Command::Run {
            config,
            out,
            threads,
            cutoff,
        } => {
            if let Some(k) = threads {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(k)
                    .build_global()
                    .map_err(|e| {
                        eprintln!("error: thread pool: {e}");
                        1u8
                    })?;
            }
            let text = std::fs::read_to_string(&config).map_err(|e| {
                eprintln!("error: cannot read {}: {e}", config.display());
                1u8
            })?;
            let mut cfg = ExperimentConfig::parse(&text).map_err(|e| {
                eprintln!("error: {e}");
                2u8
            })?;
            if let Some(d) = cutoff {
                cfg.cutoff = Some(d);
            }
            let artifacts = run_experiment(&cfg).map_err(|e| {
                eprintln!("error: {e}");
                match e {
                    RunError::Config(_) => 2u8,
                    RunError::Numeric(_) => 3u8,
                }
            })?;
            let dir = out.unwrap_or_else(|| PathBuf::from("."));
            std::fs::create_dir_all(&dir).map_err(|e| {
                eprintln!("error: cannot create {}: {e}", dir.display());
                1u8
            })?;
            for (name, contents) in &artifacts.files {
                let path = dir.join(name);
                std::fs::write(&path, contents).map_err(|e| {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    1u8
                })?;
                println!("wrote {}", path.display());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(code) => ExitCode::from(code),
    }
}
