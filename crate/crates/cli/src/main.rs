//! `mmop`: factorizations, Geronimus perturbations, τ scans and
//! Markov–Stieltjes checks from a JSON configuration.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use mixed_mops::{BigFloat, BigRational, Scalar};

use commands::{Command, Outcome, Settings};
use config::{Mode, RunConfig};
use error::CliError;

#[derive(Parser, Debug)]
#[command(name = "mmop", version, about = "Mixed multiple orthogonal polynomials and Geronimus perturbations")]
struct Cli {
    /// Pipeline to run; defaults to the config's `command` field.
    #[arg(value_enum)]
    command: Option<Command>,
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    /// Float precision in bits: 53, 64, 128, 256, 512 or 1024.
    #[arg(long)]
    precision: Option<u32>,
    #[arg(long)]
    nmax: Option<usize>,
    /// Extra indices factorized beyond `nmax`.
    #[arg(long)]
    slack: Option<usize>,
}

fn dispatch<F: Scalar>(cmd: Command, cfg: &RunConfig, s: &Settings) -> Result<Outcome, CliError> {
    match cmd {
        Command::Factorize => commands::factorize::<F>(cfg, s),
        Command::Perturb => commands::perturb::<F>(cfg, s),
        Command::TauScan => commands::tau_scan::<F>(cfg, s),
        Command::Stieltjes => commands::stieltjes::<F>(cfg, s),
    }
}

fn command_from(name: &str) -> Result<Command, CliError> {
    match name {
        "factorize" => Ok(Command::Factorize),
        "perturb" => Ok(Command::Perturb),
        "tau-scan" | "tau_scan" => Ok(Command::TauScan),
        "stieltjes" => Ok(Command::Stieltjes),
        other => Err(CliError::Config(format!("command: unknown command {other:?}"))),
    }
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    let cfg = config::load(&cli.config)?;
    let cmd = match (cli.command, cfg.command.as_deref()) {
        (Some(c), _) => c,
        (None, Some(name)) => command_from(name)?,
        (None, None) => return Err(CliError::Config("command: none given on the command line or in the config".into())),
    };
    let mode = cli.mode.or(cfg.mode).unwrap_or_default();
    let precision = cli.precision.or(cfg.precision).unwrap_or(256);
    std::fs::create_dir_all(&cli.out)?;
    let settings = Settings {
        n_max: cli.nmax.or(cfg.n_max).unwrap_or(8),
        slack: cli.slack.or(cfg.slack).unwrap_or(4),
        out: cli.out,
        mode_label: match mode {
            Mode::Rational => "rational".into(),
            Mode::Float => format!("float{precision}"),
        },
    };
    match mode {
        Mode::Rational => dispatch::<BigRational>(cmd, &cfg, &settings),
        Mode::Float => match precision {
            53 => dispatch::<f64>(cmd, &cfg, &settings),
            64 => dispatch::<BigFloat<64>>(cmd, &cfg, &settings),
            128 => dispatch::<BigFloat<128>>(cmd, &cfg, &settings),
            256 => dispatch::<BigFloat<256>>(cmd, &cfg, &settings),
            512 => dispatch::<BigFloat<512>>(cmd, &cfg, &settings),
            1024 => dispatch::<BigFloat<1024>>(cmd, &cfg, &settings),
            p => Err(CliError::Config(format!("precision: unsupported value {p}"))),
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(o) => {
            println!("{}", o.message);
            ExitCode::from(o.code as u8)
        }
        Err(e) => {
            eprintln!("mmop: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
