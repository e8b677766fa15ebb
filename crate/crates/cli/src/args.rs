//! Command-line grammar.

use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use spiking_saliency::{Dims, Pathway};

#[derive(Debug, Parser)]
#[command(
    name = "spiking-saliency",
    version,
    about = "Saliency maps from simulated V1/V4/MT spiking populations"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

/// Flags shared by every subcommand. Flags override the config file, which
/// overrides the built-in defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Flat `key = value` file with pipeline parameters.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Working resolution, `N` or `WIDTHxHEIGHT`.
    #[arg(long, global = true, value_name = "WxH")]
    pub resolution: Option<Resolution>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for multi-image commands (0 uses every core).
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,
    #[arg(long, global = true, value_parser = ["color", "orientation", "both"], default_value = "both")]
    pub pathway: String,
    /// Emit JSON instead of aligned text.
    #[arg(long, global = true)]
    pub json: bool,
    #[arg(long, global = true)]
    pub smooth_passes: Option<usize>,
    /// Zero the lowest fraction of the final map, e.g. 0.1.
    #[arg(long, global = true)]
    pub drop_bottom_fraction: Option<f64>,
}

impl CommonArgs {
    pub fn pathway(&self) -> Pathway {
        self.pathway.parse().expect("clap restricts the values")
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute color, orientation and final maps for images.
    Compute(ComputeArgs),
    /// Check the colormix and oriented-bars benchmarks.
    Bench(BenchArgs),
    /// Score a fixation dataset.
    Eval(EvalArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ComputeArgs {
    /// PNG or JPEG inputs.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long, short, default_value = ".")]
    pub out_dir: PathBuf,
    /// Also write the final map as a text matrix, `<stem>_final.txt`.
    #[arg(long)]
    pub raw: bool,
    /// Resize written maps back to the input size.
    #[arg(long)]
    pub upscale: bool,
    /// Dump every V4/MT spike to `<stem>_spikes.txt`.
    #[arg(long)]
    pub raster: bool,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// Set every synaptic weight to zero (the assertions should then fail).
    #[arg(long)]
    pub zero_weights: bool,
    /// Canvas for the oriented-bars display.
    #[arg(long, default_value = "128x32")]
    pub bars_resolution: Resolution,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    /// Dataset root containing `stimuli/`, `fixations/` and optionally `density/`.
    pub root: PathBuf,
    /// Score maps from this directory (matched by stem) instead of running the model.
    #[arg(long, value_name = "DIR")]
    pub predictions_dir: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Leave wall-clock times out so reports are reproducible byte for byte.
    #[arg(long)]
    pub no_timing: bool,
    /// Exit with status 3 unless mean NSS and mean IG over chance are positive.
    #[arg(long)]
    pub require_positive: bool,
}

/// `N` (square) or `WIDTHxHEIGHT`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Resolution(pub Dims);

impl FromStr for Resolution {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parse = |v: &str| {
            v.trim()
                .parse::<usize>()
                .ok()
                .filter(|&n| n > 0)
                .ok_or_else(|| format!("`{s}` is not N or WIDTHxHEIGHT with positive sizes"))
        };
        let dims = match s.split_once(['x', 'X']) {
            Some((w, h)) => Dims::new(parse(w)?, parse(h)?),
            None => {
                let n = parse(s)?;
                Dims::new(n, n)
            }
        };
        Ok(Resolution(dims))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resolution_forms() {
        assert_eq!("64".parse::<Resolution>().unwrap().0, Dims::new(64, 64));
        assert_eq!(
            "128x32".parse::<Resolution>().unwrap().0,
            Dims::new(128, 32)
        );
        assert!("0x4".parse::<Resolution>().is_err());
        assert!("wide".parse::<Resolution>().is_err());
    }
}
