//! `oscavity` — command-line driver for the oscillating-cavity radiation
//! library: samples energy densities, reports closed-form energy budgets,
//! runs the self-verification suite, and sweeps parameters into CSV tables.

mod commands;
mod errors;
mod input;
mod output;

use clap::{Parser, Subcommand};
use std::path::PathBuf;

use errors::CliError;

#[derive(Parser)]
#[command(
    name = "oscavity",
    version,
    about = "Radiation of a cavity oscillating in a thermal or vacuum field",
    long_about = "Computes the time-resolved energy density, pulse structure, and photon \
                  budget of the radiation leaving a high-finesse cavity whose boundary \
                  oscillates at a mechanical resonance. Configurations come from a key=value \
                  file (--config) or a named preset (--preset)."
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Path to a key=value configuration file (# starts a comment).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Named parameter preset; see `--preset list`.
    #[arg(long, global = true, value_name = "NAME")]
    preset: Option<String>,

    /// Samples per mechanical period for density grids.
    #[arg(long, global = true, default_value_t = 2048)]
    samples: usize,

    /// Relative tail tolerance of the bounce-series truncation.
    #[arg(long, global = true, default_value_t = 1e-12)]
    tol: f64,

    /// Relative tolerance of the adaptive period quadrature.
    #[arg(long = "quad-tol", global = true, default_value_t = 1e-6)]
    quad_tol: f64,

    /// Output file (CSV for density/sweep, JSON for energy/verify);
    /// stdout when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Worker threads for sampling and sweeps (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    workers: Option<usize>,

    /// Treat frequencies as SI rad/s and add SI conversions to reports.
    #[arg(long = "si-units", global = true)]
    si_units: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Sample the outgoing energy density over one mechanical period.
    Density,
    /// Report the closed-form period energy and photon budgets.
    Energy,
    /// Run the numerical self-checks against the closed forms.
    Verify,
    /// Evaluate a parameter sweep into a CSV table.
    Sweep {
        /// Parameter to sweep: alpha_eff, theta, r, or k.
        #[arg(long, value_name = "NAME")]
        param: String,
        /// Comma-separated parameter values (may be empty).
        #[arg(
            long,
            value_name = "LIST",
            default_value = "",
            allow_hyphen_values = true
        )]
        values: String,
    },
}

fn main() {
    let cli = Cli::parse();
    configure_workers(cli.workers);
    match run(&cli) {
        Ok(()) => {}
        Err(err) => {
            eprintln!("error: {err}");
            std::process::exit(err.exit_code());
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let source = input::resolve_source(cli)?;
    match &cli.command {
        Command::Density => commands::density(cli, &source),
        Command::Energy => commands::energy(cli, &source),
        Command::Verify => commands::verify(cli, &source),
        Command::Sweep { param, values } => commands::sweep(cli, &source, param, values),
    }
}

#[cfg(feature = "parallel")]
fn configure_workers(workers: Option<usize>) {
    if let Some(n) = workers {
        // A second invocation in-process would fail; the first pool wins.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global();
    }
}

#[cfg(not(feature = "parallel"))]
fn configure_workers(_workers: Option<usize>) {}
