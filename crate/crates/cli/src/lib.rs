//! Batch front end for `gremlab`: configuration, experiment drivers and the
//! `gremlab` command line.

pub mod commands;
pub mod config;
pub mod experiments;
pub mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::{run, Outcome};
pub use config::RunConfig;

/// A configuration or argument problem; maps to exit code 2.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{0}")]
pub struct Invalid(pub String);

impl From<gremlab::Error> for Invalid {
    fn from(e: gremlab::Error) -> Self {
        Invalid(e.to_string())
    }
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_FAILED: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "gremlab", version, about = "GREM with an external field: limits, simulation and fluctuations")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub zero_disorder: bool,
    /// Number of largest energies kept per replica.
    #[arg(long, global = true)]
    pub top_k: Option<usize>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Optimal magnetization and REM ground-state constant on a field grid.
    Tstar {
        /// Comma-separated, strictly increasing fields.
        #[arg(long, value_delimiter = ',')]
        h_grid: Option<Vec<f64>>,
    },
    /// Coarse-grained blocks of the order parameter at field h.
    CoarseGrain,
    /// Limiting free energy on a beta grid.
    FreeEnergy,
    /// Exact enumeration of finite-N replicas.
    Simulate,
    /// Extremal statistics of simulated replicas against the limit laws.
    Fluctuations,
    /// Cascade samples, partition integrals and their tail index.
    Cascade,
    /// Check a configuration without running anything.
    Validate,
}
