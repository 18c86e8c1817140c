//! Command-line front end: config parsing, CSV output and the subcommands.

pub mod commands;
pub mod config;
pub mod csv;
pub mod error;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::commands::Report;
use crate::config::Settings;
use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "magnify", version, about = "Quantum state magnification sweeps and checks")]
pub struct Cli {
    /// Flat `key = value` config file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// RNG seed (overrides the config).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory for CSV files.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Trials per sweep point (overrides the config).
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    /// Per-key override, `key=value`; repeatable, applied after the config.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Gain against pulse area and detuning, and normalized SNR against M.
    Magnify,
    /// Noise re-focusing sweep and histograms around M = 1/theta.
    Refocus,
    /// Resolution limits against atom number.
    Limits,
    /// Linear Kerr model against the Fock-basis oracle.
    Kerr,
    /// Gaussian model against exact Dicke evolution.
    OracleCheck,
}

impl Cli {
    /// Defaults for the command, then the config file, overrides and flags.
    pub fn settings(&self) -> CliResult<Settings> {
        let mut s = match self.command {
            Command::Magnify => Settings::magnify_defaults(),
            _ => Settings::refocus_defaults(),
        };
        if let Some(path) = &self.config {
            s.apply_file(path)?;
        }
        for kv in &self.overrides {
            s.apply_override(kv)?;
        }
        if let Some(seed) = self.seed {
            s.experiment.seed = seed;
        }
        if let Some(n) = self.trials {
            s.experiment.n_trials = n;
        }
        Ok(s)
    }

    pub fn run(&self) -> CliResult<Report> {
        let s = self.settings()?;
        std::fs::create_dir_all(&self.out)?;
        match self.command {
            Command::Magnify => commands::magnify(&s, &self.out),
            Command::Refocus => commands::refocus(&s, &self.out),
            Command::Limits => commands::limits(&s, &self.out),
            Command::Kerr => commands::kerr(&s, &self.out),
            Command::OracleCheck => commands::oracle_check(&s, &self.out),
        }
    }
}

/// Parses `args` and runs; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match cli.run() {
        Ok(report) => {
            print!("{}", report.summary);
            match report.failure {
                Some(f) => {
                    let e = CliError::Check(f);
                    eprintln!("error: {e}");
                    e.exit_code()
                }
                None => 0,
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
