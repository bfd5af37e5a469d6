mod commands;
mod config;
mod error;
mod output;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::Context;
use crate::config::{CurvatureKind, RunConfig};
use crate::error::CliError;
use crate::output::{Format, Output};

/// Two bodies on a sphere or a hyperbolic plane: Kepler orbits, reduced
/// dynamics, secular averaging and periodic orbits.
#[derive(Parser, Debug)]
#[command(name = "curved2body", version)]
struct Cli {
    /// TOML configuration file. Missing keys take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Integrator tolerance, overriding the configuration.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Also write SVG figures.
    #[arg(long, global = true)]
    svg: bool,
    /// Omit the generation time so repeated runs are byte-identical.
    #[arg(long, global = true)]
    no_timestamp: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample one curved Kepler orbit.
    Kepler {
        /// Replace the space by a sphere of radius 1e6.
        #[arg(long)]
        flat_limit: bool,
    },
    /// Integrate the reduced system.
    Simulate,
    /// Secular averages, their series and the phase portrait.
    Secular,
    /// Find a periodic orbit of the averaged system and lift it.
    Periodic {
        #[arg(long)]
        m: Option<u32>,
        #[arg(long)]
        n: Option<u32>,
    },
    /// Averaged perturbation against its series.
    Average,
    /// Lift a reduced orbit back to two bodies.
    Lift,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Kepler { .. } => "kepler",
            Command::Simulate => "simulate",
            Command::Secular => "secular",
            Command::Periodic { .. } => "periodic",
            Command::Average => "average",
            Command::Lift => "lift",
        }
    }
}

fn run(cli: Cli) -> Result<Vec<PathBuf>, CliError> {
    let mut cfg = RunConfig::load(cli.config.as_deref())?;
    if let Some(tol) = cli.tol {
        cfg.tol = tol;
    }
    match &cli.command {
        Command::Kepler { flat_limit: true } => {
            cfg.space.curvature = CurvatureKind::Sphere;
            cfg.space.rho = 1e6;
        }
        Command::Periodic { m, n } => {
            if let Some(m) = m {
                cfg.periodic.m = *m;
            }
            if let Some(n) = n {
                cfg.periodic.n = *n;
            }
        }
        _ => {}
    }
    cfg.validate_common()?;
    let name = cli.command.name();
    let digest = cfg.digest(name);
    let mut out = Output::new(&cli.out, cli.format, !cli.no_timestamp, name, digest)?;
    out.text(&format!("{name}_config.toml"), &cfg.to_toml())?;
    let mut ctx = Context { cfg, out, svg: cli.svg };
    let result = match cli.command {
        Command::Kepler { .. } => commands::kepler(&mut ctx),
        Command::Simulate => commands::simulate(&mut ctx),
        Command::Secular => commands::secular(&mut ctx),
        Command::Periodic { .. } => commands::periodic(&mut ctx),
        Command::Average => commands::average(&mut ctx),
        Command::Lift => commands::lift(&mut ctx),
    };
    for p in &ctx.out.written {
        println!("{}", p.display());
    }
    result.map(|_| ctx.out.written)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("curved2body: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
