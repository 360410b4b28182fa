//! Command-line front end for `freenormal-core`.

pub mod commands;
pub mod numfmt;
pub mod svg;
pub mod verify;

use clap::{Parser, Subcommand, ValueEnum};
use commands::{Artifact, EvalFn, Grid, Regime};
use freenormal_core::curve::BoundingBox;
use std::io::Write;
use std::path::{Path, PathBuf};
use thiserror::Error;
pub use verify::Profile;

pub const PROFILE_ENV: &str = "FREENORMAL_PROFILE";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Domain(String),
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        2
    }
}

macro_rules! domain_from {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Domain(e.to_string())
            }
        }
    )*};
}

domain_from!(
    freenormal_core::transforms::TransformError,
    freenormal_core::curve::CurveError,
    freenormal_core::levy::LevyError,
    freenormal_core::series::SeriesError,
    freenormal_core::ode_oracle::OdeError
);

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Parser)]
#[command(name = "freenormal", version, about = "Analytic continuation of the Gaussian Cauchy transform and its free Levy measure")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, clap::Args)]
pub struct GridArgs {
    #[arg(long, default_value_t = 0.01)]
    pub xmin: f64,
    #[arg(long, default_value_t = 10.0)]
    pub xmax: f64,
    #[arg(long, default_value_t = 400)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl GridArgs {
    fn grid(&self) -> Grid {
        Grid { xmin: self.xmin, xmax: self.xmax, n: self.n }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate G, G', F, F' at a complex point or rho at a real one.
    Eval {
        #[arg(long = "fn", value_enum, ignore_case = true)]
        function: EvalFn,
        /// Complex number written a+bi.
        #[arg(long, allow_hyphen_values = true)]
        z: String,
    },
    /// Boundary curve samples x, g, h, residual.
    Curve(GridArgs),
    /// Levy measure density and x times density.
    Density(GridArgs),
    /// Level sets Im F = t, one file per t (svg: one combined figure).
    Levelsets {
        #[arg(long, default_value = "0,0.1,0.4,0.7,1,1.3")]
        t: String,
        /// re_min,re_max,im_min,im_max
        #[arg(long, default_value = "-4,4,-4,3", allow_hyphen_values = true)]
        bbox: String,
        #[arg(long, default_value_t = 0.05)]
        step: f64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Moment, Boolean and free cumulant tables up to a given moment order.
    Cumulants {
        #[arg(long, default_value_t = 8)]
        order: usize,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solver values against the small-x or large-x expansions.
    Asymptotics {
        #[arg(long, value_enum)]
        regime: Regime,
        /// Comma-separated abscissas; a regime-specific default when omitted.
        #[arg(long)]
        xs: Option<String>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every verification criterion and emit a JSON report.
    Verify {
        /// Defaults to $FREENORMAL_PROFILE, then fast.
        #[arg(long, value_enum)]
        profile: Option<Profile>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_bbox(text: &str) -> Result<BoundingBox, CliError> {
    let v = numfmt::parse_list(text).map_err(CliError::Usage)?;
    let [re_min, re_max, im_min, im_max] = v[..] else {
        return Err(CliError::Usage(format!("bbox needs four values re_min,re_max,im_min,im_max, got {text:?}")));
    };
    Ok(BoundingBox { re_min, re_max, im_min, im_max })
}

/// Explicit choice, else the environment, else `fast`.
pub fn resolve_profile(flag: Option<Profile>) -> Result<Profile, CliError> {
    if let Some(p) = flag {
        return Ok(p);
    }
    match std::env::var(PROFILE_ENV) {
        Ok(v) => Profile::from_str(&v, true).map_err(|_| CliError::Usage(format!("{PROFILE_ENV}={v:?} is not one of fast, full"))),
        Err(_) => Ok(Profile::Fast),
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.display().to_string(), source })?;
    }
    std::fs::write(path, contents).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

fn emit(out: Option<&Path>, contents: &str) -> Result<(), CliError> {
    match out {
        Some(path) => write_file(path, contents),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(contents.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| CliError::Io { path: "<stdout>".into(), source })
        }
    }
}

/// Executes one command; returns the process exit code (0, or 1 for a failed
/// verification).
pub fn run(cli: &Cli, command_line: &str) -> Result<u8, CliError> {
    match &cli.command {
        Command::Eval { function, z } => {
            let z = numfmt::parse_complex(z).map_err(CliError::Usage)?;
            emit(None, &format!("{}\n", commands::eval(*function, z)?))?;
        }
        Command::Curve(args) => emit(args.out.as_deref(), &commands::curve(args.grid(), args.format, command_line)?)?,
        Command::Density(args) => emit(args.out.as_deref(), &commands::density(args.grid(), args.format, command_line)?)?,
        Command::Levelsets { t, bbox, step, format, out } => {
            let ts = numfmt::parse_list(t).map_err(CliError::Usage)?;
            let artifacts: Vec<Artifact> = commands::levelsets(&ts, parse_bbox(bbox)?, *step, *format, command_line)?;
            for a in &artifacts {
                write_file(&out.join(&a.name), &a.contents)?;
            }
        }
        Command::Cumulants { order, format, out } => emit(out.as_deref(), &commands::cumulants(*order, *format)?)?,
        Command::Asymptotics { regime, xs, format, out } => {
            let xs = match xs {
                Some(s) => numfmt::parse_list(s).map_err(CliError::Usage)?,
                None => regime.default_points(),
            };
            emit(out.as_deref(), &commands::asymptotics(*regime, &xs, *format)?)?;
        }
        Command::Verify { profile, out } => {
            let profile = resolve_profile(*profile)?;
            let report = verify::run_all(profile);
            for c in &report.criteria {
                eprintln!("{}", c.summary_line());
            }
            emit(out.as_deref(), &commands::to_json_text(&report.to_json()))?;
            return Ok(if report.passed { 0 } else { 1 });
        }
    }
    Ok(0)
}
