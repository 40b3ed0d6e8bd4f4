use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hamsys::run::{load_config, run, Command};
use hamsys::Error;

/// Exit status for malformed command lines, kept apart from the run codes.
const EXIT_USAGE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;
const EXIT_IO: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "hamsys", version, about = "Hamiltonian field system with a Schrödinger slow sector")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Evolve the configured initial state and record observables
    Simulate(Args),
    /// Lowest eigenpairs of the slow-sector Hamiltonian
    Spectrum(Args),
    /// Adiabatic convergence study over experiment.m_list
    Sweep(Args),
    /// Map dimensional config values to natural units and back
    ConvertUnits(Args),
    /// Parse and validate a config without running anything
    ValidateConfig(Args),
}

#[derive(clap::Args, Debug)]
struct Args {
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Overrides output.directory from the config
    #[arg(long, value_name = "DIR")]
    output: Option<PathBuf>,
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
    /// Reserved; every algorithm is deterministic
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, short)]
    verbose: bool,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) => EXIT_CONFIG,
        Error::Io { .. } | Error::Snapshot(_) => EXIT_IO,
        _ => EXIT_RUNTIME,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (command, args) = match cli.command {
        Cmd::Simulate(a) => (Command::Simulate, a),
        Cmd::Spectrum(a) => (Command::Spectrum, a),
        Cmd::Sweep(a) => (Command::Sweep, a),
        Cmd::ConvertUnits(a) => (Command::ConvertUnits, a),
        Cmd::ValidateConfig(a) => (Command::ValidateConfig, a),
    };

    let level = if args.verbose { "debug" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    if let Some(n) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("could not size the thread pool: {e}");
        }
    }
    if args.seed.is_some() {
        log::debug!("--seed has no effect: all algorithms are deterministic");
    }

    let result = load_config(&args.config).and_then(|cfg| {
        let out = args.output.clone().unwrap_or_else(|| PathBuf::from(&cfg.output.directory));
        run(command, &cfg, &out)
    });
    match result {
        Ok(files) => {
            if command == Command::ValidateConfig {
                println!("{}: ok", args.config.display());
            }
            for f in files {
                log::info!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("hamsys {}: {e}", command.name());
            ExitCode::from(exit_code(&e))
        }
    }
}
