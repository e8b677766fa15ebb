//! `bench`: the colormix and oriented-bars tuning benchmarks.

use std::time::Instant;

use serde::Serialize;
use spiking_saliency::datasets::{stripe_bounds, synth_colormix, synth_oriented_bars};
use spiking_saliency::filters::NUM_ORIENTATIONS;
use spiking_saliency::snn::SpikeCountPlane;
use spiking_saliency::{Dims, Hue, Pipeline, PipelineConfig, RgbPlanes};

use crate::args::{BenchArgs, CommonArgs};
use crate::report::{emit, to_json, Table};
use crate::{CmdResult, Failure};

/// Outcome of one region of a benchmark display.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub benchmark: &'static str,
    pub region: String,
    pub expected: String,
    /// Group with the strictly largest region count, if there is one.
    pub winner: Option<String>,
    /// Region-summed spike counts per group, in group order.
    pub counts: Vec<u64>,
    pub pass: bool,
}

#[derive(Debug, Serialize)]
struct BenchReport {
    config: PipelineConfig,
    bars_resolution: [usize; 2],
    verdicts: Vec<Verdict>,
    passed: usize,
    failed: usize,
    wall_ms: f64,
}

fn strict_argmax(values: &[u64]) -> Option<usize> {
    let max = *values.iter().max()?;
    let mut at_max = values.iter().enumerate().filter(|(_, &v)| v == max);
    let (k, _) = at_max.next()?;
    at_max.next().is_none().then_some(k)
}

fn verdicts_for(
    benchmark: &'static str,
    counts: &[SpikeCountPlane],
    dims: Dims,
    regions: &[String],
) -> Vec<Verdict> {
    regions
        .iter()
        .enumerate()
        .map(|(k, region)| {
            let (x0, x1) = stripe_bounds(dims.width, regions.len(), k);
            let totals: Vec<u64> = counts
                .iter()
                .map(|c| c.region_total(x0, x1, 0, dims.height))
                .collect();
            let winner = strict_argmax(&totals);
            Verdict {
                benchmark,
                region: region.clone(),
                expected: counts[k].group.clone(),
                winner: winner.map(|w| counts[w].group.clone()),
                counts: totals,
                pass: winner == Some(k),
            }
        })
        .collect()
}

/// Six colormix verdicts at the config resolution.
pub fn colormix_verdicts(config: &PipelineConfig) -> spiking_saliency::Result<Vec<Verdict>> {
    let pipeline = Pipeline::new(config.clone())?;
    let counts = pipeline.v4_counts(&synth_colormix(config.dims())?)?;
    let regions: Vec<String> = Hue::ALL.iter().map(|h| h.name().to_owned()).collect();
    Ok(verdicts_for("colormix", &counts, config.dims(), &regions))
}

/// Eight oriented-bars verdicts, rendered and simulated at `dims`.
pub fn bars_verdicts(
    config: &PipelineConfig,
    dims: Dims,
) -> spiking_saliency::Result<Vec<Verdict>> {
    let config = PipelineConfig {
        width: dims.width,
        height: dims.height,
        ..config.clone()
    };
    let pipeline = Pipeline::new(config)?;
    let bars = RgbPlanes::from_gray(&synth_oriented_bars(dims)?);
    let counts = pipeline.mt_counts(&bars)?;
    let regions: Vec<String> = (0..NUM_ORIENTATIONS).map(|k| format!("{k}pi/8")).collect();
    Ok(verdicts_for("bars", &counts, dims, &regions))
}

pub fn run(common: &CommonArgs, args: &BenchArgs, mut config: PipelineConfig) -> CmdResult {
    if args.zero_weights {
        config.w_v4_primary = 0.0;
        config.w_v4_secondary = 0.0;
        config.w_v4_inhibit = 0.0;
        config.w_mt = 0.0;
    }
    let bars = args.bars_resolution.0;
    let start = Instant::now();
    let mut verdicts = colormix_verdicts(&config)?;
    verdicts.extend(bars_verdicts(&config, bars)?);
    let failed = verdicts.iter().filter(|v| !v.pass).count();
    let report = BenchReport {
        config,
        bars_resolution: [bars.width, bars.height],
        passed: verdicts.len() - failed,
        failed,
        verdicts,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    };

    let text = if common.json {
        to_json(&report)?
    } else {
        let mut table = Table::new([
            "result",
            "benchmark",
            "region",
            "expected",
            "winner",
            "counts",
        ]);
        for v in &report.verdicts {
            let counts: Vec<String> = v.counts.iter().map(u64::to_string).collect();
            table.push([
                if v.pass { "PASS" } else { "FAIL" }.to_owned(),
                v.benchmark.to_owned(),
                v.region.clone(),
                v.expected.clone(),
                v.winner.clone().unwrap_or_else(|| "(tie)".into()),
                counts.join(","),
            ]);
        }
        let mut text = table.render();
        text.push_str(&format!(
            "{} passed, {} failed in {:.0} ms\n",
            report.passed, report.failed, report.wall_ms
        ));
        text
    };
    emit(&text, None)?;
    if failed > 0 {
        return Err(Failure::Assertion(format!(
            "{failed} benchmark assertion(s) failed"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ties_have_no_winner() {
        assert_eq!(strict_argmax(&[1, 3, 2]), Some(1));
        assert_eq!(strict_argmax(&[3, 3, 2]), None);
        assert_eq!(strict_argmax(&[0, 0]), None);
    }
}
