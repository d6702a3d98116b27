//! Command-line front end: argument parsing, config overlays, run manifests
//! and exit codes.
//!
//! Every run writes `manifest.toml` to its output directory. Passing that
//! file back through `--config` repeats the run.

mod args;
mod commands;

use std::ffi::OsString;
use std::path::Path;

use clap::{ArgAction, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;

pub use args::{
    Axis, CommonArgs, FitArgs, GlobalFitArgs, MapArgs, P1FormArg, RelationArg, SimModel, SimulateArgs, SynthGridArgs,
    TargetArg,
};
pub use commands::{FitConfig, GlobalFitConfig, MapConfig, SimulateConfig, SynthGridConfig, MANIFEST_FILE};

use crate::error::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "odmr",
    version,
    about = "Simulate and fit ODMR spectra of NV-centre ensembles"
)]
pub struct Cli {
    /// More log output (repeatable).
    #[arg(short, long, action = ArgAction::Count, global = true)]
    pub verbose: u8,
    /// Only errors.
    #[arg(short, long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write steady-state or surrogate-model spectra for a (P, f_R) grid.
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        args: SimulateArgs,
    },
    /// Fit the hyperfine triplet to one spectrum or a directory of spectra.
    Fit {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        args: FitArgs,
    },
    /// Global width, contrast and a(P) fits of a measurement grid.
    GlobalFit {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        args: GlobalFitArgs,
    },
    /// Shot-noise sensitivity over a (P, f_R) grid.
    SensitivityMap {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        args: MapArgs,
    },
    /// Synthetic width/amplitude grid from the surrogate models.
    SynthGrid {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        args: SynthGridArgs,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate { .. } => "simulate",
            Command::Fit { .. } => "fit",
            Command::GlobalFit { .. } => "global-fit",
            Command::SensitivityMap { .. } => "sensitivity-map",
            Command::SynthGrid { .. } => "synth-grid",
        }
    }
}

/// Exit status for an error: 3 for numerical failures, 2 for everything else.
pub fn exit_code(err: &Error) -> i32 {
    if err.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_CONFIG
    }
}

pub fn error_kind(err: &Error) -> &'static str {
    match err {
        Error::InvalidParameter { .. } => "InvalidParameter",
        Error::DegenerateSystem(_) => "DegenerateSystem",
        Error::GridTooCoarse(_) => "GridTooCoarse",
        Error::InsufficientData(_) => "InsufficientData",
        Error::NoConvergence { .. } => "NoConvergence",
        Error::SingularJacobian { .. } => "SingularJacobian",
        Error::UnidentifiableParameter { .. } => "UnidentifiableParameter",
        Error::Parse { .. } => "ParseError",
        Error::Schema(_) => "SchemaError",
        Error::Config(_) => "ConfigError",
        Error::Io(_) => "IoError",
    }
}

/// One-line `error: kind=... exit=... message="..."` record for stderr.
pub fn error_line(err: &Error) -> String {
    format!(
        "error: kind={} exit={} message={:?}",
        error_kind(err),
        exit_code(err),
        err.to_string()
    )
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let level = match (cli.quiet, cli.verbose) {
        (true, _) => log::LevelFilter::Error,
        (false, 0) => log::LevelFilter::Warn,
        (false, 1) => log::LevelFilter::Info,
        (false, 2) => log::LevelFilter::Debug,
        _ => log::LevelFilter::Trace,
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .try_init();
    match run(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("{}", error_line(&e));
            exit_code(&e)
        }
    }
}

pub fn run(command: Command) -> Result<()> {
    let name = command.name();
    match command {
        Command::Simulate { common, args } => {
            let cfg = commands::SimulateConfig::resolve(overlay_config(name, &common, args, SimulateArgs::overlay)?)?;
            commands::simulate(&cfg, &common.out)?;
            write_manifest(name, &common.out, &cfg)
        }
        Command::Fit { common, args } => {
            let cfg = commands::FitConfig::resolve(overlay_config(name, &common, args, FitArgs::overlay)?)?;
            // The manifest goes first so that a partially failed batch still
            // records how it was run.
            write_manifest(name, &common.out, &cfg)?;
            commands::fit(&cfg, &common.out)
        }
        Command::GlobalFit { common, args } => {
            let cfg = commands::GlobalFitConfig::resolve(overlay_config(name, &common, args, GlobalFitArgs::overlay)?)?;
            write_manifest(name, &common.out, &cfg)?;
            commands::global_fit(&cfg, &common.out)
        }
        Command::SensitivityMap { common, args } => {
            let cfg = commands::MapConfig::resolve(overlay_config(name, &common, args, MapArgs::overlay)?)?;
            commands::sensitivity_map(&cfg, &common.out)?;
            write_manifest(name, &common.out, &cfg)
        }
        Command::SynthGrid { common, args } => {
            let cfg = commands::SynthGridConfig::resolve(overlay_config(name, &common, args, SynthGridArgs::overlay)?)?;
            commands::synth_grid(&cfg, &common.out)?;
            write_manifest(name, &common.out, &cfg)
        }
    }
}

/// Applies the `--config` file (if any) on top of the flags. The file may be
/// a bare table of options or a manifest with a `[config]` table.
fn overlay_config<A: DeserializeOwned>(
    command: &str,
    common: &CommonArgs,
    flags: A,
    overlay: fn(A, A) -> A,
) -> Result<A> {
    let Some(path) = &common.config else {
        return Ok(flags);
    };
    let text = std::fs::read_to_string(path)?;
    let mut table: toml::Table = text
        .parse()
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    if let Some(toml::Value::Table(inner)) = table.remove("config") {
        if let Some(c) = table.get("command").and_then(|v| v.as_str()) {
            if c != command {
                return Err(Error::Config(format!(
                    "{} is a manifest for `{c}`, not `{command}`",
                    path.display()
                )));
            }
        }
        table = inner;
    }
    let file: A = toml::Value::Table(table)
        .try_into()
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    Ok(overlay(flags, file))
}

#[derive(Serialize)]
struct Manifest<'a, C> {
    command: &'a str,
    odmr_version: &'a str,
    /// Where the run wrote its files; informational only.
    out: String,
    config: &'a C,
}

fn write_manifest<C: Serialize>(command: &str, out: &Path, config: &C) -> Result<()> {
    std::fs::create_dir_all(out)?;
    let m = Manifest {
        command,
        odmr_version: env!("CARGO_PKG_VERSION"),
        out: out.display().to_string(),
        config,
    };
    let text = toml::to_string(&m).map_err(|e| Error::Config(format!("manifest: {e}")))?;
    std::fs::write(out.join(MANIFEST_FILE), text)?;
    Ok(())
}
