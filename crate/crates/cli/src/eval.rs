//! `eval`: score model (or externally supplied) maps against a fixation dataset.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::anyhow;
use rayon::prelude::*;
use serde::Serialize;
use spiking_saliency::datasets::{load_fixations, scan_dataset, DatasetEntry};
use spiking_saliency::metrics::{center_prior_baseline, chance_baseline, evaluate, MetricReport};
use spiking_saliency::stimulus::{load_image, resize_plane};
use spiking_saliency::{Pathway, Pipeline, PipelineConfig, Plane};

use crate::args::{CommonArgs, EvalArgs};
use crate::report::{emit, score, to_json, Table};
use crate::{thread_pool, CmdResult, Failure};

/// Scores for one dataset entry, or why it could not be scored.
#[derive(Debug, Clone, Serialize)]
pub struct ImageRecord {
    pub id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scores: Option<MetricReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub root: PathBuf,
    pub seed: u64,
    pub pathway: String,
    /// `model` or the predictions directory.
    pub source: String,
    /// How ground truth and predictions were brought to a common grid.
    pub scoring_grid: String,
    pub config: PipelineConfig,
    pub images: Vec<ImageRecord>,
    /// Mean over successfully scored images; `None` when none succeeded.
    pub mean: Option<MetricReport>,
    pub scored: usize,
    pub failures: usize,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<f64>,
}

/// Where predictions come from.
#[derive(Debug, Clone)]
pub enum PredictionSource {
    Model(Pathway),
    /// Grayscale maps named `<id>.png|jpg|jpeg`.
    Directory(PathBuf),
}

fn find_prediction(dir: &Path, id: &str) -> spiking_saliency::Result<PathBuf> {
    ["png", "jpg", "jpeg"]
        .iter()
        .map(|ext| dir.join(format!("{id}.{ext}")))
        .find(|p| p.is_file())
        .ok_or_else(|| spiking_saliency::Error::UnreadableFile {
            path: dir.join(format!("{id}.png")),
            reason: "no prediction with this stem".into(),
        })
}

fn predict(
    entry: &DatasetEntry,
    source: &PredictionSource,
    pipeline: &Pipeline,
) -> spiking_saliency::Result<Plane> {
    let dims = pipeline.config().dims();
    match source {
        PredictionSource::Model(pathway) => Ok(pipeline
            .run(&load_image(&entry.stimulus)?, *pathway)?
            .fused
            .into_plane()),
        PredictionSource::Directory(dir) => {
            // Luma of an RGB map; 8-bit values divided by 255.
            let rgb = load_image(find_prediction(dir, &entry.id)?)?;
            resize_plane(rgb.grayscale()?.plane(), dims)
        }
    }
}

fn score_entry(
    index: usize,
    entry: &DatasetEntry,
    source: &PredictionSource,
    pipeline: &Pipeline,
    center: &Plane,
) -> spiking_saliency::Result<MetricReport> {
    let config = pipeline.config();
    let prediction = predict(entry, source, pipeline)?;
    let fixations = load_fixations(&entry.fixations, entry.density.as_deref(), config.dims())?;
    let density = fixations.density_or_blurred(config.density_sigma)?;
    let chance = chance_baseline(config.dims(), config.seed.wrapping_add(index as u64))?;
    evaluate(&prediction, &fixations, &density, center, &chance)
}

fn mean_of(scores: &[MetricReport]) -> Option<MetricReport> {
    if scores.is_empty() {
        return None;
    }
    let n = scores.len() as f64;
    let avg = |f: fn(&MetricReport) -> f64| scores.iter().map(f).sum::<f64>() / n;
    Some(MetricReport {
        sim: avg(|m| m.sim),
        nss: avg(|m| m.nss),
        cc: avg(|m| m.cc),
        kl: avg(|m| m.kl),
        ig_center: avg(|m| m.ig_center),
        ig_chance: avg(|m| m.ig_chance),
    })
}

/// Scores every entry under `root`. Per-image failures are recorded and
/// left out of the mean; an empty dataset is an error.
pub fn evaluate_dataset(
    root: &Path,
    source: &PredictionSource,
    config: &PipelineConfig,
    jobs: usize,
    timing: bool,
) -> CmdResult<RunReport> {
    let start = Instant::now();
    let scan = scan_dataset(root)?;
    if scan.entries.is_empty() {
        return Err(Failure::Pipeline(anyhow!(
            "dataset {} has no scorable entries",
            root.display()
        )));
    }
    let pipeline = Pipeline::new(config.clone()).map_err(|e| Failure::Usage(e.into()))?;
    let center =
        center_prior_baseline(config.dims(), config.center_prior_sigma_fraction)?.into_plane();

    let pool = thread_pool(jobs)?;
    let images: Vec<ImageRecord> = pool.install(|| {
        scan.entries
            .par_iter()
            .enumerate()
            .map(|(i, entry)| {
                let t = Instant::now();
                let result = score_entry(i, entry, source, &pipeline, &center);
                if let Err(e) = &result {
                    log::warn!("{}: {e}", entry.id);
                }
                ImageRecord {
                    id: entry.id.clone(),
                    error: result.as_ref().err().map(ToString::to_string),
                    scores: result.ok(),
                    wall_ms: timing.then(|| t.elapsed().as_secs_f64() * 1e3),
                }
            })
            .collect()
    });

    let scores: Vec<MetricReport> = images.iter().filter_map(|r| r.scores).collect();
    let (pathway, source_name) = match source {
        PredictionSource::Model(p) => (p.to_string(), "model".to_owned()),
        PredictionSource::Directory(d) => ("external".to_owned(), d.display().to_string()),
    };
    Ok(RunReport {
        root: root.to_path_buf(),
        seed: config.seed,
        pathway,
        source: source_name,
        scoring_grid: format!(
            "ground truth resized to {}x{}; fixations moved to the nearest pixel, density bilinear",
            config.width, config.height
        ),
        config: config.clone(),
        mean: mean_of(&scores),
        scored: scores.len(),
        failures: images.len() - scores.len(),
        images,
        warnings: scan.warnings,
        wall_ms: timing.then(|| start.elapsed().as_secs_f64() * 1e3),
    })
}

fn score_cells(m: &MetricReport) -> [String; 6] {
    [m.sim, m.nss, m.cc, m.kl, m.ig_center, m.ig_chance].map(score)
}

/// Aligned-column rendering: header comments, one row per image, the mean row,
/// then the effective config.
pub fn render_text(report: &RunReport) -> String {
    let mut out = format!(
        "# dataset {}\n# source {}\n# pathway {}\n# seed {}\n# {}\n",
        report.root.display(),
        report.source,
        report.pathway,
        report.seed,
        report.scoring_grid
    );
    for w in &report.warnings {
        out.push_str(&format!("# warning: {w}\n"));
    }
    let mut table = Table::new([
        "id",
        "sim",
        "nss",
        "cc",
        "kl",
        "ig_center",
        "ig_chance",
        "wall_ms",
        "status",
    ]);
    let ms = |v: Option<f64>| v.map_or_else(|| "-".to_owned(), |v| format!("{v:.0}"));
    for r in &report.images {
        let mut row = vec![r.id.clone()];
        match (&r.scores, &r.error) {
            (Some(m), _) => {
                row.extend(score_cells(m));
                row.push(ms(r.wall_ms));
                row.push("ok".into());
            }
            (None, err) => {
                row.extend(std::iter::repeat_n("-".to_owned(), 6));
                row.push(ms(r.wall_ms));
                row.push(format!("failed: {}", err.as_deref().unwrap_or("unknown")));
            }
        }
        table.push(row);
    }
    let mut mean_row = vec!["mean".to_owned()];
    match &report.mean {
        Some(m) => mean_row.extend(score_cells(m)),
        None => mean_row.extend(std::iter::repeat_n("-".to_owned(), 6)),
    }
    mean_row.push(ms(report.wall_ms));
    mean_row.push(format!(
        "{} scored, {} failed",
        report.scored, report.failures
    ));
    table.push(mean_row);
    out.push_str(&table.render());
    out.push_str("# config\n");
    for line in report.config.to_text().lines() {
        out.push_str(&format!("#   {line}\n"));
    }
    out
}

pub fn run(common: &CommonArgs, args: &EvalArgs, config: PipelineConfig) -> CmdResult {
    let source = match &args.predictions_dir {
        Some(dir) => PredictionSource::Directory(dir.clone()),
        None => PredictionSource::Model(common.pathway()),
    };
    let report = evaluate_dataset(&args.root, &source, &config, common.jobs, !args.no_timing)?;
    let text = if common.json {
        to_json(&report)?
    } else {
        render_text(&report)
    };
    emit(&text, args.output.as_deref())?;

    if report.mean.is_none() {
        return Err(Failure::Pipeline(anyhow!("every image failed to score")));
    }
    if args.require_positive {
        let m = report.mean.expect("checked above");
        if !(m.nss > 0.0 && m.ig_chance > 0.0) {
            return Err(Failure::Assertion(format!(
                "mean NSS {:.4} and mean IG over chance {:.4} must both be positive",
                m.nss, m.ig_chance
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(sim: f64, nss: f64) -> MetricReport {
        MetricReport {
            sim,
            nss,
            cc: 0.0,
            kl: 1.0,
            ig_center: 0.5,
            ig_chance: -1.0,
        }
    }

    #[test]
    fn mean_is_the_arithmetic_mean() {
        let m = mean_of(&[report(0.2, 1.0), report(0.6, 2.0)]).unwrap();
        assert!((m.sim - 0.4).abs() < 1e-15);
        assert_eq!(m.nss, 1.5);
        assert_eq!(m.ig_chance, -1.0);
        assert!(mean_of(&[]).is_none());
    }
}
