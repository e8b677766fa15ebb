//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spiking_saliency::datasets::{dilate, synth_colormix, synth_popout, FixationData, PopoutKind};
use spiking_saliency::filters::{convolve2d, Kernel, ResponsePlane, ResponseTag, NUM_ORIENTATIONS};
use spiking_saliency::metrics::{cc_score, ig_score, kl_score, nss_score, sim_score, EPSILON};
use spiking_saliency::saliency::{
    color_saliency, orientation_distinctiveness, orientation_saliency,
};
use spiking_saliency::{
    Dims, Hue, Pathway, Pipeline, PipelineConfig, Plane, RgbPlanes, SaliencyMap,
};
use spiking_saliency_cli::bench::{bars_verdicts, colormix_verdicts, Verdict};
use spiking_saliency_cli::eval::{evaluate_dataset, PredictionSource};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn random_plane(rng: &mut ChaCha8Rng, dims: Dims, low: f64, high: f64) -> Plane {
    Plane::from_fn(dims, |_, _| rng.gen_range(low..high))
}

fn benchmark(verdicts: spiking_saliency::Result<Vec<Verdict>>, elapsed: Duration) -> Outcome {
    let verdicts = verdicts.map_err(|e| e.to_string())?;
    let failed: Vec<&str> = verdicts
        .iter()
        .filter(|v| !v.pass)
        .map(|v| v.region.as_str())
        .collect();
    let detail = format!(
        "{}/{} regions won by their own group in {:.2} s",
        verdicts.len() - failed.len(),
        verdicts.len(),
        elapsed.as_secs_f64()
    );
    check(
        failed.is_empty() && elapsed < Duration::from_secs(10),
        format!("{detail}; failing: {failed:?}"),
    )
}

fn colormix_benchmark() -> Outcome {
    let start = Instant::now();
    let verdicts = colormix_verdicts(&PipelineConfig::default());
    benchmark(verdicts, start.elapsed())
}

fn bars_benchmark() -> Outcome {
    let start = Instant::now();
    let verdicts = bars_verdicts(&PipelineConfig::default(), Dims::new(128, 32));
    benchmark(verdicts, start.elapsed())
}

fn popout(kind: PopoutKind) -> Outcome {
    let mut hits = 0;
    let mut misses = Vec::new();
    for seed in 0..20u64 {
        let config = PipelineConfig {
            seed,
            ..PipelineConfig::default()
        };
        let dims = config.dims();
        let display = synth_popout(kind, dims, seed).map_err(|e| e.to_string())?;
        let pipeline = Pipeline::new(config).map_err(|e| e.to_string())?;
        let out = pipeline
            .run(&display.image, Pathway::Both)
            .map_err(|e| e.to_string())?;
        let zone = dilate(&display.target, dims, 2);
        let (x, y) = out.fused.argmax();
        if zone[y * dims.width + x] {
            hits += 1;
        } else {
            misses.push(seed);
        }
    }
    check(
        hits >= 18,
        format!("{hits}/20 final maxima on the singleton; missed seeds {misses:?}"),
    )
}

fn metric_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let dims = Dims::new(16, 16);
    let p = random_plane(&mut rng, dims, 0.01, 1.0);
    let all = FixationData::new(dims, vec![true; dims.len()], None).map_err(|e| e.to_string())?;
    let some =
        FixationData::from_points(dims, &[(1, 2), (7, 7), (15, 0)]).map_err(|e| e.to_string())?;
    let sim = sim_score(&p, &p).map_err(|e| e.to_string())?;
    let cc = cc_score(&p, &p).map_err(|e| e.to_string())?;
    let kl = kl_score(&p, &p, EPSILON).map_err(|e| e.to_string())?;
    let ig = ig_score(&p, &p, &some, EPSILON).map_err(|e| e.to_string())?;
    let nss = nss_score(&p, &all).map_err(|e| e.to_string())?;
    let ok = (sim - 1.0).abs() <= 1e-12
        && (cc - 1.0).abs() <= 1e-12
        && kl.abs() <= 1e-9
        && ig.abs() <= 1e-12
        && nss.abs() <= 1e-12;
    check(
        ok,
        format!("SIM {sim} CC {cc} KL {kl:e} IG {ig:e} NSS {nss:e}"),
    )
}

/// Textbook evaluations of each metric, written independently of the library.
mod oracle {
    pub fn normalized(v: &[f64]) -> Vec<f64> {
        let s: f64 = v.iter().sum();
        v.iter().map(|x| x / s).collect()
    }

    pub fn sim(p: &[f64], q: &[f64]) -> f64 {
        let (p, q) = (normalized(p), normalized(q));
        let mut total = 0.0;
        for i in 0..p.len() {
            total += if p[i] < q[i] { p[i] } else { q[i] };
        }
        total
    }

    pub fn nss(p: &[f64], fix: &[bool]) -> f64 {
        let n = p.len() as f64;
        let mean = p.iter().sum::<f64>() / n;
        let var = p.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        let z: Vec<f64> = p.iter().map(|x| (x - mean) / var.sqrt()).collect();
        let picked: Vec<f64> = (0..p.len()).filter(|&i| fix[i]).map(|i| z[i]).collect();
        picked.iter().sum::<f64>() / picked.len() as f64
    }

    pub fn cc(p: &[f64], q: &[f64]) -> f64 {
        let n = p.len() as f64;
        let (mp, mq) = (p.iter().sum::<f64>() / n, q.iter().sum::<f64>() / n);
        let (mut num, mut dp, mut dq) = (0.0, 0.0, 0.0);
        for i in 0..p.len() {
            num += (p[i] - mp) * (q[i] - mq);
            dp += (p[i] - mp).powi(2);
            dq += (q[i] - mq).powi(2);
        }
        num / (dp * dq).sqrt()
    }

    pub fn kl(p: &[f64], q: &[f64], eps: f64) -> f64 {
        let (p, q) = (normalized(p), normalized(q));
        (0..p.len())
            .map(|i| q[i] * (eps + q[i] / (eps + p[i])).ln())
            .sum()
    }

    pub fn ig(p: &[f64], b: &[f64], fix: &[bool], eps: f64) -> f64 {
        let (p, b) = (normalized(p), normalized(b));
        let gains: Vec<f64> = (0..p.len())
            .filter(|&i| fix[i])
            .map(|i| (eps + p[i]).log2() - (eps + b[i]).log2())
            .collect();
        gains.iter().sum::<f64>() / gains.len() as f64
    }
}

fn metric_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let dims = Dims::new(8, 8);
    let mut worst = 0.0f64;
    for case in 0..100 {
        let p = random_plane(&mut rng, dims, 0.0, 1.0);
        let q = random_plane(&mut rng, dims, 0.0, 1.0);
        let b = random_plane(&mut rng, dims, 0.0, 1.0);
        let mut mask: Vec<bool> = (0..dims.len()).map(|_| rng.gen_bool(0.2)).collect();
        mask[rng.gen_range(0..dims.len())] = true;
        let fix = FixationData::new(dims, mask.clone(), None).map_err(|e| e.to_string())?;
        let pairs = [
            (sim_score(&p, &q), oracle::sim(p.data(), q.data())),
            (nss_score(&p, &fix), oracle::nss(p.data(), &mask)),
            (cc_score(&p, &q), oracle::cc(p.data(), q.data())),
            (
                kl_score(&p, &q, EPSILON),
                oracle::kl(p.data(), q.data(), EPSILON),
            ),
            (
                ig_score(&p, &b, &fix, EPSILON),
                oracle::ig(p.data(), b.data(), &mask, EPSILON),
            ),
        ];
        for (name, (got, want)) in ["SIM", "NSS", "CC", "KL", "IG"].iter().zip(pairs) {
            let got = got.map_err(|e| format!("case {case} {name}: {e}"))?;
            let diff = (got - want).abs();
            worst = worst.max(diff);
            if diff > 1e-9 {
                return Err(format!("case {case} {name}: {got} vs oracle {want}"));
            }
        }
    }
    Ok(format!("100 pairs, 5 metrics, worst deviation {worst:e}"))
}

/// Replicate-pads the input, flips the kernel and correlates.
fn padded_convolution(input: &Plane, kernel: &Kernel) -> Vec<f64> {
    let (w, h, r) = (input.width(), input.height(), kernel.radius());
    let (pw, ph) = (w + 2 * r, h + 2 * r);
    let padded: Vec<f64> = (0..ph)
        .flat_map(|py| {
            (0..pw).map(move |px| {
                let x = (px as isize - r as isize).clamp(0, w as isize - 1) as usize;
                let y = (py as isize - r as isize).clamp(0, h as isize - 1) as usize;
                (x, y)
            })
        })
        .map(|(x, y)| input.get(x, y))
        .collect();
    let size = kernel.size();
    let flipped: Vec<f64> = kernel.values().iter().rev().copied().collect();
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for j in 0..size {
                for i in 0..size {
                    acc += flipped[j * size + i] * padded[(y + j) * pw + (x + i)];
                }
            }
            out[y * w + x] = acc;
        }
    }
    out
}

fn convolution_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for case in 0..50 {
        let dims = Dims::new(rng.gen_range(3..20), rng.gen_range(3..20));
        let max_size = dims.width.min(dims.height);
        let size = 2 * rng.gen_range(0..=(max_size - 1) / 2) + 1;
        let kernel = Kernel::new(
            size,
            (0..size * size).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        )
        .map_err(|e| e.to_string())?;
        let input = random_plane(&mut rng, dims, -2.0, 2.0);
        let got = convolve2d(&input, &kernel).map_err(|e| e.to_string())?;
        for (a, b) in got.data().iter().zip(padded_convolution(&input, &kernel)) {
            worst = worst.max((a - b).abs());
        }
        if worst > 1e-10 {
            return Err(format!("case {case}: deviation {worst:e}"));
        }
    }
    Ok(format!("50 random cases, worst deviation {worst:e}"))
}

fn peak_set(map: &SaliencyMap) -> Vec<usize> {
    let max = map.max();
    map.data()
        .iter()
        .enumerate()
        .filter(|(_, &v)| max > 0.0 && v >= max * (1.0 - 1e-9))
        .map(|(i, _)| i)
        .collect()
}

fn tagged(planes: &[Plane], factor: f64, tag: impl Fn(usize) -> ResponseTag) -> Vec<ResponsePlane> {
    planes
        .iter()
        .enumerate()
        .map(|(k, p)| ResponsePlane::new(tag(k), p.map(|v| v * factor)))
        .collect()
}

fn algorithm_invariants() -> Outcome {
    let config = PipelineConfig::default();
    let dims = Dims::new(24, 24);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let hue = |k: usize| ResponseTag::Hue(Hue::ALL[k]);
    let orient = ResponseTag::Orientation;
    for trial in 0..20 {
        let color_planes: Vec<Plane> = (0..6)
            .map(|_| random_plane(&mut rng, dims, 0.0, 25.0))
            .collect();
        let orient_planes: Vec<Plane> = (0..NUM_ORIENTATIONS)
            .map(|_| random_plane(&mut rng, dims, 0.0, 25.0))
            .collect();
        let run_c =
            |f| color_saliency(&tagged(&color_planes, f, hue), &config).map_err(|e| e.to_string());
        let run_o = |f| {
            orientation_saliency(&tagged(&orient_planes, f, orient), &config)
                .map_err(|e| e.to_string())
        };
        let (base_c, base_o) = (peak_set(&run_c(1.0)?), peak_set(&run_o(1.0)?));
        for factor in [0.5, 3.0] {
            if peak_set(&run_c(factor)?) != base_c || peak_set(&run_o(factor)?) != base_o {
                return Err(format!(
                    "trial {trial}: argmax set moved under gain {factor}"
                ));
            }
        }

        let shift = 1 + trial % (NUM_ORIENTATIONS - 1);
        let rotated: Vec<Plane> = (0..NUM_ORIENTATIONS)
            .map(|k| orient_planes[(k + NUM_ORIENTATIONS - shift) % NUM_ORIENTATIONS].clone())
            .collect();
        let before = orientation_distinctiveness(&tagged(&orient_planes, 1.0, orient), &config)
            .map_err(|e| e.to_string())?;
        let after = orientation_distinctiveness(&tagged(&rotated, 1.0, orient), &config)
            .map_err(|e| e.to_string())?;
        for k in 0..NUM_ORIENTATIONS {
            let source = &before[(k + NUM_ORIENTATIONS - shift) % NUM_ORIENTATIONS];
            let off = after[k]
                .data()
                .iter()
                .zip(source.data())
                .any(|(a, b)| (a - b).abs() > 1e-12 * (1.0 + b.abs()));
            if off {
                return Err(format!("trial {trial}: shift {shift} broke channel {k}"));
            }
        }
    }
    Ok("20 trials: peaks fixed under gains 0.5 and 3, channel rotation commutes".into())
}

fn save_rgb(rgb: &RgbPlanes, path: &Path) {
    let Dims { width, height } = rgb.dims();
    let q = |v: f64| (255.0 * v).round() as u8;
    image::RgbImage::from_fn(width as u32, height as u32, |x, y| {
        let (x, y) = (x as usize, y as usize);
        image::Rgb([
            q(rgb.red.get(x, y)),
            q(rgb.green.get(x, y)),
            q(rgb.blue.get(x, y)),
        ])
    })
    .save(path)
    .unwrap();
}

fn synthetic_surrogate() -> Outcome {
    let root = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = PipelineConfig::default();
    let dims = config.dims();
    for sub in ["stimuli", "fixations"] {
        std::fs::create_dir(root.path().join(sub)).map_err(|e| e.to_string())?;
    }
    for i in 0..10u64 {
        let kind = if i % 2 == 0 {
            PopoutKind::Color
        } else {
            PopoutKind::Orientation
        };
        let display = synth_popout(kind, dims, 100 + i).map_err(|e| e.to_string())?;
        save_rgb(
            &display.image,
            &root.path().join(format!("stimuli/img{i:02}.png")),
        );
        let fixations = image::GrayImage::from_fn(dims.width as u32, dims.height as u32, |x, y| {
            image::Luma([if display.target[y as usize * dims.width + x as usize] {
                255
            } else {
                0
            }])
        });
        fixations
            .save(root.path().join(format!("fixations/img{i:02}.png")))
            .map_err(|e| e.to_string())?;
    }
    let report = evaluate_dataset(
        root.path(),
        &PredictionSource::Model(Pathway::Both),
        &config,
        0,
        false,
    )
    .map_err(|e| e.to_string())?;
    let mean = report.mean.ok_or("no image scored")?;
    check(
        report.failures == 0 && mean.ig_chance > 0.0 && mean.nss > 0.0,
        format!(
            "{} images, mean IG(chance) {:.3} bits, mean NSS {:.3}, {} failures",
            report.scored, mean.ig_chance, mean.nss, report.failures
        ),
    )
}

fn compute_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let input = dir.path().join("colormix.png");
    save_rgb(
        &synth_colormix(Dims::new(96, 64)).map_err(|e| e.to_string())?,
        &input,
    );
    let run = |out: &str| {
        let status = Command::new(env!("CARGO_BIN_EXE_spiking-saliency"))
            .args(["compute", "--seed", "7", "--raw", "--out-dir"])
            .arg(dir.path().join(out))
            .arg(&input)
            .output()
            .map_err(|e| e.to_string())?;
        check(
            status.status.success(),
            String::from_utf8_lossy(&status.stderr).into_owned(),
        )
    };
    run("first")?;
    run("second")?;
    let names = [
        "colormix_color.png",
        "colormix_orient.png",
        "colormix_final.png",
        "colormix_final.txt",
    ];
    for name in names {
        let a = std::fs::read(dir.path().join("first").join(name))
            .map_err(|e| format!("{name}: {e}"))?;
        let b = std::fs::read(dir.path().join("second").join(name))
            .map_err(|e| format!("{name}: {e}"))?;
        if a != b {
            return Err(format!("{name} differs between runs"));
        }
    }
    Ok(format!(
        "{} files bit-identical across two runs",
        names.len()
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("colormix benchmark", colormix_benchmark),
        ("oriented-bars benchmark", bars_benchmark),
        ("color pop-out", || popout(PopoutKind::Color)),
        ("orientation pop-out", || popout(PopoutKind::Orientation)),
        ("metric identities", metric_identities),
        ("metric oracle equivalence", metric_oracles),
        ("convolution oracle", convolution_oracle),
        ("algorithm invariants", algorithm_invariants),
        ("synthetic fixation surrogate", synthetic_surrogate),
        ("compute determinism", compute_determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
