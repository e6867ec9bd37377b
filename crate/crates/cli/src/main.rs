mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use crate::config::{Format, Overrides, RunConfig};
use crate::error::CliError;

/// Curvature, isoperimetric quotients and spectral estimates for
/// rotationally symmetric manifolds.
#[derive(Debug, Parser)]
#[command(name = "warped", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Ball radius (ball) or base radius (graph).
    #[arg(long, global = true, allow_negative_numbers = true)]
    r: Option<f64>,
    /// Outer radius of the grid and of the spectral domain.
    #[arg(long, global = true, allow_negative_numbers = true)]
    rmax: Option<f64>,
    /// Manifold dimension.
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Cells of the radial eigenvalue discretization.
    #[arg(long, global = true)]
    cells: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Radial and tangential curvature, Ricci, scalar and mean curvature.
    Curvature,
    /// Isoperimetric quotients Q, I, J and the Bishop ratio.
    Quotients,
    /// Bottom of the spectrum: radial eigenvalues, potential limit, discreteness.
    Spectrum,
    /// Volume, perimeter and first Dirichlet eigenvalue of a centered ball.
    Ball,
    /// Compare a radial graph set with the centered ball of the same volume.
    Graph,
    /// Run every claim against a family of manifolds.
    Verify {
        /// TOML file of [[manifold]] entries; the built-in family otherwise.
        #[arg(long)]
        family: Option<PathBuf>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Curvature => "curvature",
            Command::Quotients => "quotients",
            Command::Spectrum => "spectrum",
            Command::Ball => "ball",
            Command::Graph => "graph",
            Command::Verify { .. } => "verify",
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    let start = Instant::now();
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    cfg.apply(&Overrides {
        r: cli.r,
        rmax: cli.rmax,
        n: cli.n,
        cells: cli.cells,
        format: cli.format,
        out: cli.out.clone(),
        family: match &cli.command {
            Command::Verify { family } => family.clone(),
            _ => None,
        },
    });
    cfg.validate()?;
    let mut code = ExitCode::SUCCESS;
    let report = match &cli.command {
        Command::Curvature => commands::curvature(&cfg)?,
        Command::Quotients => commands::quotients(&cfg)?,
        Command::Spectrum => commands::spectrum(&cfg)?,
        Command::Ball => commands::ball(&cfg)?,
        Command::Graph => commands::graph(&cfg)?,
        Command::Verify { .. } => {
            let (report, ledger) = commands::verify(&cfg)?;
            if cfg.output.path.is_some() {
                print!("{}", ledger.to_table());
            }
            let failures = ledger.failures().count();
            if failures > 0 {
                eprintln!("{failures} claim(s) failed");
                code = ExitCode::from(1);
            }
            report
        }
    };
    output::emit(
        &report,
        cfg.format(),
        cfg.output.path.as_deref(),
        cli.command.name(),
        &cfg,
        cli.config.as_deref(),
        start.elapsed().as_secs_f64(),
    )?;
    Ok(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
