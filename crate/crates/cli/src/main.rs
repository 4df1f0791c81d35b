//! `kinktrap`: batch front end for the scattering simulator.
//!
//! Every command writes CSV (or `-` for stdout) headed by `#` metadata that
//! includes a command line regenerating the file byte for byte.
//!
//! Exit codes: 0 success, 1 configuration error, 2 runtime failure.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::config::{read_config_file, RawConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

impl From<kinktrap::Error> for CliError {
    fn from(e: kinktrap::Error) -> Self {
        match e {
            kinktrap::Error::InvalidParams(msg) => CliError::Config(msg),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "kinktrap",
    version,
    about = "Bound pair scattering off a Gaussian well"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// One scattering run; writes the trajectory.
    Simulate(Overrides),
    /// Outcome of every point on a velocity grid.
    Sweep(Overrides),
    /// A sweep plus recursive refinement of outcome boundaries.
    Zoom(Overrides),
    /// Measured in-well frequencies against the small-oscillation model.
    LinearCompare(Overrides),
    /// Divergence of two launches differing by seed_delta in speed.
    Sensitivity(Overrides),
}

/// Flags mirror the config-file keys and override them.
#[derive(Args, Debug, Default)]
#[command(allow_negative_numbers = true)]
struct Overrides {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "k")]
    k: Option<String>,
    #[arg(long = "alpha")]
    alpha: Option<String>,
    #[arg(long = "n")]
    n: Option<String>,
    #[arg(long = "A")]
    a: Option<String>,
    #[arg(long = "beta")]
    beta: Option<String>,
    #[arg(long = "v0")]
    v0: Option<String>,
    #[arg(long = "launch_offset")]
    launch_offset: Option<String>,
    #[arg(long = "separation")]
    separation: Option<String>,
    #[arg(long = "t_max")]
    t_max: Option<String>,
    #[arg(long = "exit_radius")]
    exit_radius: Option<String>,
    #[arg(long = "dt")]
    dt: Option<String>,
    /// verlet or rk4
    #[arg(long = "scheme")]
    scheme: Option<String>,
    #[arg(long = "max_steps")]
    max_steps: Option<String>,
    #[arg(long = "v_min")]
    v_min: Option<String>,
    #[arg(long = "v_max")]
    v_max: Option<String>,
    #[arg(long = "dv")]
    dv: Option<String>,
    /// Window center for zoom (with --halfwidth, replaces v_min/v_max).
    #[arg(long = "center")]
    center: Option<String>,
    #[arg(long = "halfwidth")]
    halfwidth: Option<String>,
    /// Zoom refinement factor.
    #[arg(long = "factor")]
    factor: Option<String>,
    /// Zoom recursion depth.
    #[arg(long = "depth")]
    depth: Option<String>,
    #[arg(long = "seed_delta")]
    seed_delta: Option<String>,
    /// Time between written samples (simulate, sensitivity).
    #[arg(long = "sample_interval")]
    sample_interval: Option<String>,
    /// Worker threads; 0 uses every core. Never changes the output.
    #[arg(long = "workers")]
    workers: Option<String>,
    /// Output path, `-` for stdout.
    #[arg(long = "out")]
    out: Option<String>,
}

impl Overrides {
    fn pairs(&self) -> [(&'static str, &Option<String>); 23] {
        [
            ("k", &self.k),
            ("alpha", &self.alpha),
            ("n", &self.n),
            ("A", &self.a),
            ("beta", &self.beta),
            ("v0", &self.v0),
            ("launch_offset", &self.launch_offset),
            ("separation", &self.separation),
            ("t_max", &self.t_max),
            ("exit_radius", &self.exit_radius),
            ("dt", &self.dt),
            ("scheme", &self.scheme),
            ("max_steps", &self.max_steps),
            ("v_min", &self.v_min),
            ("v_max", &self.v_max),
            ("dv", &self.dv),
            ("center", &self.center),
            ("halfwidth", &self.halfwidth),
            ("factor", &self.factor),
            ("depth", &self.depth),
            ("seed_delta", &self.seed_delta),
            ("sample_interval", &self.sample_interval),
            ("workers", &self.workers),
        ]
    }

    /// Config file (if any) overlaid with flags.
    fn merged(&self) -> Result<RawConfig, CliError> {
        let mut raw = match &self.config {
            Some(path) => read_config_file(path)?,
            None => RawConfig::new(),
        };
        // a window given on the command line replaces one from the file
        if self.center.is_some() || self.halfwidth.is_some() {
            raw.remove("v_min");
            raw.remove("v_max");
        }
        if self.v_min.is_some() || self.v_max.is_some() {
            raw.remove("center");
            raw.remove("halfwidth");
        }
        for (key, value) in self.pairs() {
            if let Some(v) = value {
                raw.insert(key.to_string(), v.clone());
            }
        }
        if let Some(out) = &self.out {
            raw.insert("out".to_string(), out.clone());
        }
        Ok(raw)
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (name, overrides) = match &cli.command {
        Command::Simulate(o) => ("simulate", o),
        Command::Sweep(o) => ("sweep", o),
        Command::Zoom(o) => ("zoom", o),
        Command::LinearCompare(o) => ("linear-compare", o),
        Command::Sensitivity(o) => ("sensitivity", o),
    };
    let cfg = config::RunConfig::resolve(&overrides.merged()?)?;
    let text = match cli.command {
        Command::Simulate(_) => commands::simulate(&cfg)?,
        Command::Sweep(_) => commands::sweep(&cfg)?,
        Command::Zoom(_) => commands::zoom(&cfg)?,
        Command::LinearCompare(_) => commands::linear_compare(&cfg)?,
        Command::Sensitivity(_) => commands::sensitivity(&cfg)?,
    };
    commands::write_output(&cfg.out, &text)
        .map_err(|e| CliError::Runtime(format!("{name}: cannot write {}: {e}", cfg.out)))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("kinktrap: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
