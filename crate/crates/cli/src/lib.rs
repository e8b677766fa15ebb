//! Command-line front end: `compute`, `bench` and `eval`.
//!
//! Exit status is 0 on success, 1 for usage errors (bad flags, bad config),
//! 2 when the pipeline fails, and 3 when a benchmark or evaluation check fails.

pub mod args;
pub mod bench;
pub mod compute;
pub mod eval;
pub mod report;

use std::ffi::OsString;
use std::fmt;

use clap::error::ErrorKind;
use clap::Parser;
use spiking_saliency::PipelineConfig;

use crate::args::{Cli, Command, CommonArgs};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_PIPELINE: i32 = 2;
pub const EXIT_ASSERTION: i32 = 3;

/// Why a command stopped.
#[derive(Debug)]
pub enum Failure {
    Usage(anyhow::Error),
    Pipeline(anyhow::Error),
    /// A benchmark or evaluation check did not hold; the report was still written.
    Assertion(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Pipeline(_) => EXIT_PIPELINE,
            Failure::Assertion(_) => EXIT_ASSERTION,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(e) => write!(f, "usage error: {e:#}"),
            Failure::Pipeline(e) => write!(f, "error: {e:#}"),
            Failure::Assertion(msg) => write!(f, "check failed: {msg}"),
        }
    }
}

impl From<spiking_saliency::Error> for Failure {
    fn from(e: spiking_saliency::Error) -> Self {
        Failure::Pipeline(e.into())
    }
}

pub type CmdResult<T = ()> = std::result::Result<T, Failure>;

/// Defaults, then the config file, then explicit flags.
pub fn effective_config(common: &CommonArgs) -> CmdResult<PipelineConfig> {
    let mut config = match &common.config {
        Some(path) => PipelineConfig::from_file(path).map_err(|e| Failure::Usage(e.into()))?,
        None => PipelineConfig::default(),
    };
    if let Some(r) = common.resolution {
        config.width = r.0.width;
        config.height = r.0.height;
    }
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    if let Some(passes) = common.smooth_passes {
        config.smooth_passes = passes;
    }
    if let Some(fraction) = common.drop_bottom_fraction {
        config.drop_bottom_fraction = fraction;
    }
    config.validate().map_err(|e| Failure::Usage(e.into()))?;
    Ok(config)
}

pub(crate) fn thread_pool(jobs: usize) -> CmdResult<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Failure::Pipeline(e.into()))
}

/// Parses `args` and runs the command, returning the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    let outcome = effective_config(&cli.common).and_then(|config| match &cli.command {
        Command::Compute(a) => compute::run(&cli.common, a, config),
        Command::Bench(a) => bench::run(&cli.common, a, config),
        Command::Eval(a) => eval::run(&cli.common, a, config),
    });
    match outcome {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("{f}");
            f.exit_code()
        }
    }
}
