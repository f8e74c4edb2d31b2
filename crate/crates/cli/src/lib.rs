//! Command-line front end: critical values, branch sweeps, density profiles
//! and the verification suite.

pub mod critical;
pub mod format;
pub mod profile;
pub mod sweep;
pub mod verify;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use fdsphere::{Settings, SphereModel};

use crate::profile::ProfileBranch;
use crate::verify::{Fault, VerifyOptions};

#[derive(Debug, Parser)]
#[command(name = "fdsphere", version, about = "Equilibria and phase transitions of fast diffusion with dipolar attraction on the sphere")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print kappa1, kappa2, kappa3, alpha_bar and kappa_c as JSON
    Critical(ModelArgs),
    /// Tabulate every equilibrium branch over a kappa grid
    Sweep(SweepArgs),
    /// Sample a branch density over the polar angle
    Profile(ProfileArgs),
    /// Run the property suite on the reference parameters
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Sphere dimension
    #[arg(long)]
    pub d: u32,
    /// Diffusion exponent in (0, 1)
    #[arg(long)]
    pub m: f64,
    /// Relative tolerance of the angle quadratures
    #[arg(long, default_value_t = fdsphere::quadrature::DEFAULT_REL_TOL)]
    pub rel_tol: f64,
    /// Residual tolerance of the root solves
    #[arg(long, default_value_t = fdsphere::equilibria::DEFAULT_ROOT_TOL)]
    pub root_tol: f64,
}

impl ModelArgs {
    pub fn model(&self) -> fdsphere::Result<SphereModel> {
        SphereModel::with_settings(self.d, self.m, Settings::new(self.rel_tol, self.root_tol)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub kappa_min: f64,
    #[arg(long)]
    pub kappa_max: f64,
    /// Number of kappa samples
    #[arg(long, default_value_t = 200)]
    pub steps: usize,
    /// Space the samples geometrically instead of linearly
    #[arg(long)]
    pub log_grid: bool,
    /// Output file (standard output when omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
}

#[derive(Debug, Args)]
pub struct ProfileArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Interaction strength (required for the fully_supported branch)
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Number of equally spaced angles in [0, pi]
    #[arg(long, default_value_t = 181)]
    pub points: usize,
    #[arg(long, value_enum, default_value_t = ProfileBranch::FullySupported)]
    pub branch: ProfileBranch,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Loosen value thresholds to at least this
    #[arg(long)]
    pub rel_tol: Option<f64>,
    /// Loosen root-residual thresholds to at least this
    #[arg(long)]
    pub root_tol: Option<f64>,
    #[arg(long, value_enum, hide = true)]
    pub inject_fault: Option<Fault>,
}

/// How a command ended, mapped to the process exit status by `main`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    VerificationFailed,
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

pub fn run(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Critical(args) => {
            let report = critical::critical_report(&args.model()?)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
        Command::Sweep(args) => {
            let model = args.model.model()?;
            let grid = sweep::kappa_grid(args.kappa_min, args.kappa_max, args.steps, args.log_grid)?;
            let rows = sweep::sweep(&model, &grid);
            let mut out = output(&args.out)?;
            match args.format {
                OutputFormat::Csv => sweep::write_csv(&mut out, &rows)?,
                OutputFormat::Json => {
                    serde_json::to_writer_pretty(&mut out, &rows)?;
                    writeln!(out)?;
                }
            }
            out.flush()?;
            let failures = rows.iter().filter(|r| r.is_failure()).count();
            if failures > 0 {
                eprintln!("warning: {failures} sample(s) failed to solve and were written as nan");
            }
        }
        Command::Profile(args) => {
            let model = args.model.model()?;
            let points = profile::profile(&model, args.branch, args.kappa, args.points)?;
            let mut out = output(&args.out)?;
            match args.format {
                OutputFormat::Csv => profile::write_csv(&mut out, &points)?,
                OutputFormat::Json => {
                    // JSON has no infinity; the pole value of rho_bar becomes null.
                    serde_json::to_writer_pretty(&mut out, &points)?;
                    writeln!(out)?;
                }
            }
            out.flush()?;
        }
        Command::Verify(args) => {
            let report = verify::run_verify(&VerifyOptions {
                rel_tol: args.rel_tol,
                root_tol: args.root_tol,
                fault: args.inject_fault,
            })?;
            for check in &report.checks {
                println!("{check}");
            }
            for note in &report.notes {
                println!("NOTE {note}");
            }
            println!(
                "{} checks, {} failed",
                report.checks.len(),
                report.failures()
            );
            if !report.passed() {
                return Ok(Outcome::VerificationFailed);
            }
        }
    }
    Ok(Outcome::Success)
}
