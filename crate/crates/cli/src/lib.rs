//! Command-line runner for the coherent-state laboratory.
//!
//! Each subcommand reads a JSON experiment config, runs it through
//! `cohatlas-core` and writes a versioned JSON report or a CSV table.

pub mod config;
pub mod formats;
pub mod report;
pub mod run;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::Kind;
use crate::report::Format;

#[derive(Debug, Parser)]
#[command(name = "cohatlas", version, about = "Coherent states, polynomial phase-space maps and chart atlases")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Experiment config (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Output file; defaults to the config's `output`, then stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// ∂̄ classification and canonicity of polynomial maps.
    ClassifyMap(RunArgs),
    /// Vacuum residual and primed vacuum of quantized maps.
    VacuumTest(RunArgs),
    /// Transport of coherent states through quantized maps.
    CoherenceTest(RunArgs),
    /// Quadrature resolution of unity for coherent and transported families.
    ResolveUnity(RunArgs),
    /// Holomorphic-atlas and global-coherence verdicts for atlas files.
    AtlasCheck(RunArgs),
    /// Canonicity partition and closure of duality candidates.
    DualityFilter(RunArgs),
}

impl Command {
    pub fn split(&self) -> (Kind, &RunArgs) {
        match self {
            Command::ClassifyMap(a) => (Kind::ClassifyMap, a),
            Command::VacuumTest(a) => (Kind::VacuumTest, a),
            Command::CoherenceTest(a) => (Kind::CoherenceTest, a),
            Command::ResolveUnity(a) => (Kind::ResolveUnity, a),
            Command::AtlasCheck(a) => (Kind::AtlasCheck, a),
            Command::DualityFilter(a) => (Kind::DualityFilter, a),
        }
    }
}

/// Parses `args` and runs; returns the process exit status.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { run::EXIT_VALIDATION } else { run::EXIT_OK };
        }
    };
    let (kind, a) = cli.command.split();
    run::run_and_emit(kind, &a.config, a.out.as_deref(), a.format)
}
