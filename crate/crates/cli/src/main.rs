//! Batch driver for the Floquet circuit simulator.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thiserror::Error;

use config::RunConfig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Numerical(#[from] cfsm::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use cfsm::Error as E;
        match self {
            CliError::Input(_) => 2,
            CliError::Numerical(e) => match root(e) {
                E::Parse { .. }
                | E::InvalidParameter { .. }
                | E::InvalidDuty(_)
                | E::InvalidDelay { .. }
                | E::InvalidNetlist(_)
                | E::UnconnectedPort(_)
                | E::UnsupportedTopology(_)
                | E::NonPositiveModulation(_)
                | E::InvalidOrder(_)
                | E::NonCommensurate { .. } => 2,
                _ => 3,
            },
        }
    }
}

fn root(e: &cfsm::Error) -> &cfsm::Error {
    match e {
        cfsm::Error::AtFrequency { source, .. } => root(source),
        other => other,
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "cfsm",
    version,
    about = "Floquet scattering analysis of switched-capacitor circulators"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Netlist file; without one the circulator described by --config is built.
    #[arg(long, global = true)]
    netlist: Option<PathBuf>,
    /// Run configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[arg(long, global = true)]
    freq_start: Option<f64>,
    #[arg(long, global = true)]
    freq_stop: Option<f64>,
    #[arg(long, global = true)]
    points: Option<usize>,
    /// Truncation order N of the harmonic grid.
    #[arg(long, global = true)]
    order: Option<usize>,
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for randomly drawn oracle frequencies.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fundamental S-parameters over a frequency range, plus metrics.
    Sweep,
    /// Isolation-dip metrics over a grid of design parameters.
    Sensitivity,
    /// Every port and sideband for a drive at the TX port.
    Spectrum {
        /// Drive frequency in hertz.
        #[arg(long)]
        freq: Option<f64>,
    },
    /// Compare against the time-domain steady-state solver.
    OracleCheck,
    /// Rotating-mode eigenvalues of the fundamental admittance.
    Eigen,
}

fn run(cli: Cli) -> Result<bool, CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Input(format!("thread pool: {e}")))?;
    }
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
            RunConfig::parse(&text)
                .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?
        }
        None => RunConfig::default(),
    };
    if let Some(v) = cli.freq_start {
        cfg.freq_start = v;
    }
    if let Some(v) = cli.freq_stop {
        cfg.freq_stop = v;
    }
    if let Some(v) = cli.points {
        cfg.points = v;
    }
    if let Some(v) = cli.order {
        cfg.order = v;
    }
    let net = match &cli.netlist {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
            cfsm::network::parse_netlist(&text)
                .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?
        }
        None => commands::design_netlist(&cfg.design)?,
    };
    std::fs::create_dir_all(&cli.out)
        .map_err(|e| CliError::Input(format!("cannot create {}: {e}", cli.out.display())))?;
    let out = cli.out.as_path();
    match cli.command {
        Command::Sweep => commands::sweep(&net, &cfg, out),
        Command::Sensitivity => {
            if cli.netlist.is_some() {
                return Err(CliError::Input(
                    "sensitivity varies design parameters; use --config".into(),
                ));
            }
            commands::sensitivity(&cfg, out)
        }
        Command::Spectrum { freq } => {
            commands::spectrum(&net, &cfg, freq.unwrap_or(cfg.spectrum_freq), out)
        }
        Command::OracleCheck => commands::oracle_check(&net, &cfg, cli.seed, out),
        Command::Eigen => commands::eigen(&net, &cfg, out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("gate failed; see the report in the output directory");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
