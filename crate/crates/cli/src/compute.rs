//! `compute`: saliency maps for individual images.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, Context};
use rayon::prelude::*;
use serde::Serialize;
use spiking_saliency::snn::RasterWriter;
use spiking_saliency::stimulus::{load_image, resize_plane};
use spiking_saliency::{Dims, Pipeline, PipelineConfig, Plane};

use crate::args::{CommonArgs, ComputeArgs};
use crate::report::{emit, to_json, Table};
use crate::{thread_pool, CmdResult, Failure};

#[derive(Debug, Serialize)]
struct ComputeRecord {
    input: PathBuf,
    outputs: Vec<PathBuf>,
    wall_ms: f64,
}

#[derive(Debug, Serialize)]
struct ComputeReport {
    pathway: String,
    config: PipelineConfig,
    images: Vec<ComputeRecord>,
}

/// 8-bit grayscale with value `round(255·v)`.
pub fn encode_map(map: &Plane) -> image::GrayImage {
    let Dims { width, height } = map.dims();
    image::GrayImage::from_fn(width as u32, height as u32, |x, y| {
        image::Luma([(255.0 * map.get(x as usize, y as usize))
            .round()
            .clamp(0.0, 255.0) as u8])
    })
}

/// One row per line, values separated by single spaces, shortest round-trip form.
pub fn map_to_text(map: &Plane) -> String {
    let mut out = String::new();
    for y in 0..map.height() {
        let row: Vec<String> = (0..map.width())
            .map(|x| map.get(x, y).to_string())
            .collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

fn stem_of(path: &Path) -> CmdResult<String> {
    path.file_stem()
        .and_then(|s| s.to_str())
        .map(str::to_owned)
        .ok_or_else(|| Failure::Usage(anyhow!("input {} has no file name", path.display())))
}

fn write_png(map: &Plane, path: &Path) -> CmdResult {
    encode_map(map)
        .save_with_format(path, image::ImageFormat::Png)
        .with_context(|| format!("writing {}", path.display()))
        .map_err(Failure::Pipeline)
}

fn compute_one(
    pipeline: &Pipeline,
    common: &CommonArgs,
    args: &ComputeArgs,
    input: &Path,
) -> CmdResult<ComputeRecord> {
    let start = Instant::now();
    let stem = stem_of(input)?;
    let rgb = load_image(input)?;
    let pathway = common.pathway();

    let output = if args.raster {
        let path = args.out_dir.join(format!("{stem}_spikes.txt"));
        let file = File::create(&path)
            .with_context(|| format!("creating {}", path.display()))
            .map_err(Failure::Pipeline)?;
        let mut raster = RasterWriter::new(BufWriter::new(file));
        let output = pipeline.run_with(&rgb, pathway, &mut raster)?;
        raster.finish()?;
        output
    } else {
        pipeline.run(&rgb, pathway)?
    };

    let target = rgb.dims();
    let render = |map: &Plane| -> CmdResult<Plane> {
        if args.upscale {
            Ok(resize_plane(map, target)?)
        } else {
            Ok(map.clone())
        }
    };
    let mut outputs = Vec::new();
    if args.raster {
        outputs.push(args.out_dir.join(format!("{stem}_spikes.txt")));
    }
    let maps = [
        ("color", output.color.as_deref()),
        ("orient", output.orientation.as_deref()),
        ("final", Some(&*output.fused)),
    ];
    for (suffix, map) in maps {
        if let Some(map) = map {
            let path = args.out_dir.join(format!("{stem}_{suffix}.png"));
            write_png(&render(map)?, &path)?;
            outputs.push(path);
        }
    }
    if args.raw {
        let path = args.out_dir.join(format!("{stem}_final.txt"));
        let mut file = BufWriter::new(
            File::create(&path)
                .with_context(|| format!("creating {}", path.display()))
                .map_err(Failure::Pipeline)?,
        );
        file.write_all(map_to_text(&output.fused).as_bytes())
            .and_then(|_| file.flush())
            .map_err(|e| Failure::Pipeline(e.into()))?;
        outputs.push(path);
    }
    Ok(ComputeRecord {
        input: input.to_path_buf(),
        outputs,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

pub fn run(common: &CommonArgs, args: &ComputeArgs, config: PipelineConfig) -> CmdResult {
    std::fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("creating {}", args.out_dir.display()))
        .map_err(Failure::Pipeline)?;
    let pipeline = Pipeline::new(config.clone()).map_err(|e| Failure::Usage(e.into()))?;
    let pool = thread_pool(common.jobs)?;
    let images = pool.install(|| {
        args.inputs
            .par_iter()
            .map(|input| compute_one(&pipeline, common, args, input))
            .collect::<CmdResult<Vec<_>>>()
    })?;

    let report = ComputeReport {
        pathway: common.pathway().to_string(),
        config,
        images,
    };
    let text = if common.json {
        to_json(&report)?
    } else {
        let mut table = Table::new(["input", "wall_ms", "outputs"]);
        for r in &report.images {
            let outputs: Vec<String> = r.outputs.iter().map(|p| p.display().to_string()).collect();
            table.push([
                r.input.display().to_string(),
                format!("{:.0}", r.wall_ms),
                outputs.join(" "),
            ]);
        }
        table.render()
    };
    emit(&text, None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn encoding_rounds_to_nearest_level() {
        let map = Plane::from_rows(&[vec![0.0, 0.5, 1.0, 0.002]]).unwrap();
        let img = encode_map(&map);
        let values: Vec<u8> = img.pixels().map(|p| p.0[0]).collect();
        assert_eq!(values, [0, 128, 255, 1]);
    }

    #[test]
    fn text_matrix_round_trips() {
        let map = Plane::from_rows(&[vec![0.1, 1.0 / 3.0], vec![0.0, 1.0]]).unwrap();
        let text = map_to_text(&map);
        let parsed: Vec<f64> = text
            .split_whitespace()
            .map(|v| v.parse().unwrap())
            .collect();
        assert_eq!(parsed, map.data());
        assert_eq!(text.lines().count(), 2);
    }
}
