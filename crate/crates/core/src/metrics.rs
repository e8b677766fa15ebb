//! Fixation-prediction scores: SIM, NSS, CC, KL and information gain, plus
//! the center-prior and chance baselines used for IG.
//!
//! Conventions: KL uses the natural log, IG uses log2, NSS z-scores with the
//! population standard deviation, and both KL and IG regularize with machine
//! epsilon.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::datasets::FixationData;
use crate::error::{Error, Result};
use crate::plane::{Dims, Plane};
use crate::saliency::{normalize_map, SaliencyMap};

/// Regularizer for KL and IG.
pub const EPSILON: f64 = f64::EPSILON;

/// All scores for one prediction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub sim: f64,
    pub nss: f64,
    pub cc: f64,
    pub kl: f64,
    pub ig_center: f64,
    pub ig_chance: f64,
}

fn sum_normalized(p: &Plane) -> Result<Plane> {
    let total = p.sum();
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::ZeroSumMap);
    }
    Ok(p.map(|v| v / total))
}

fn require_mask_dims(p: &Plane, fixations: &FixationData) -> Result<()> {
    if p.dims() != fixations.dims() {
        let d = fixations.dims();
        return Err(Error::DimensionMismatch {
            expected: (p.width(), p.height()),
            found: (d.width, d.height),
        });
    }
    Ok(())
}

/// Histogram intersection of the two maps after scaling each to sum 1.
pub fn sim_score(pred: &Plane, gt_density: &Plane) -> Result<f64> {
    pred.require_same_dims(gt_density)?;
    let p = sum_normalized(pred)?;
    let q = sum_normalized(gt_density)?;
    Ok(p.data().iter().zip(q.data()).map(|(a, b)| a.min(*b)).sum())
}

fn mean_std(p: &Plane) -> (f64, f64) {
    let n = p.data().len() as f64;
    let mean = p.sum() / n;
    let var = p
        .data()
        .iter()
        .map(|v| (v - mean) * (v - mean))
        .sum::<f64>()
        / n;
    (mean, var.sqrt())
}

/// Mean of the z-scored prediction over fixated pixels.
pub fn nss_score(pred: &Plane, fixations: &FixationData) -> Result<f64> {
    require_mask_dims(pred, fixations)?;
    let (mean, std) = mean_std(pred);
    if !(std > 0.0) {
        return Err(Error::DegenerateMap);
    }
    let (mut total, mut n) = (0.0, 0usize);
    for (v, &m) in pred.data().iter().zip(fixations.mask()) {
        if m {
            total += (v - mean) / std;
            n += 1;
        }
    }
    if n == 0 {
        return Err(Error::NoFixations);
    }
    Ok(total / n as f64)
}

/// Pearson correlation over all pixels.
pub fn cc_score(pred: &Plane, gt_density: &Plane) -> Result<f64> {
    pred.require_same_dims(gt_density)?;
    let (mp, sp) = mean_std(pred);
    let (mq, sq) = mean_std(gt_density);
    if !(sp > 0.0 && sq > 0.0) {
        return Err(Error::DegenerateMap);
    }
    let n = pred.data().len() as f64;
    let cov = pred
        .data()
        .iter()
        .zip(gt_density.data())
        .map(|(a, b)| (a - mp) * (b - mq))
        .sum::<f64>()
        / n;
    Ok((cov / (sp * sq)).clamp(-1.0, 1.0))
}

/// `Σ Q · ln(ε + Q / (ε + P))` with both maps scaled to sum 1; `P` is the
/// prediction, `Q` the ground truth.
pub fn kl_score(pred: &Plane, gt_density: &Plane, epsilon: f64) -> Result<f64> {
    pred.require_same_dims(gt_density)?;
    let p = sum_normalized(pred)?;
    let q = sum_normalized(gt_density)?;
    Ok(p.data()
        .iter()
        .zip(q.data())
        .map(|(&pi, &qi)| qi * (epsilon + qi / (epsilon + pi)).ln())
        .sum())
}

/// Mean over fixated pixels of `log2(ε + P) − log2(ε + B)`, with prediction
/// `P` and baseline `B` each scaled to sum 1. Bits per fixation.
pub fn ig_score(
    pred: &Plane,
    baseline: &Plane,
    fixations: &FixationData,
    epsilon: f64,
) -> Result<f64> {
    pred.require_same_dims(baseline)?;
    require_mask_dims(pred, fixations)?;
    let p = sum_normalized(pred)?;
    let b = sum_normalized(baseline)?;
    let (mut total, mut n) = (0.0, 0usize);
    for ((&pi, &bi), &m) in p.data().iter().zip(b.data()).zip(fixations.mask()) {
        if m {
            total += (epsilon + pi).log2() - (epsilon + bi).log2();
            n += 1;
        }
    }
    if n == 0 {
        return Err(Error::NoFixations);
    }
    Ok(total / n as f64)
}

/// Isotropic Gaussian centered on the image, `σ = sigma_fraction · min(H, W)`,
/// scaled to a peak of 1.
pub fn center_prior_baseline(dims: Dims, sigma_fraction: f64) -> Result<SaliencyMap> {
    dims.require_nonzero()?;
    if !(sigma_fraction > 0.0) {
        return Err(Error::InvalidParameter {
            name: "sigma_fraction",
            reason: format!("{sigma_fraction} is not positive"),
        });
    }
    let sigma = sigma_fraction * dims.width.min(dims.height) as f64;
    let cx = (dims.width as f64 - 1.0) / 2.0;
    let cy = (dims.height as f64 - 1.0) / 2.0;
    let g = Plane::from_fn(dims, |x, y| {
        let (dx, dy) = (x as f64 - cx, y as f64 - cy);
        (-(dx * dx + dy * dy) / (2.0 * sigma * sigma)).exp()
    });
    normalize_map(&g)
}

/// Independent uniform values, reproducible from `seed`, scaled to a peak of 1.
pub fn chance_baseline(dims: Dims, seed: u64) -> Result<SaliencyMap> {
    dims.require_nonzero()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = Plane::from_fn(dims, |_, _| rng.gen::<f64>());
    normalize_map(&p)
}

/// Scores `pred` against fixations and density with both IG baselines.
pub fn evaluate(
    pred: &Plane,
    fixations: &FixationData,
    density: &Plane,
    center: &Plane,
    chance: &Plane,
) -> Result<MetricReport> {
    Ok(MetricReport {
        sim: sim_score(pred, density)?,
        nss: nss_score(pred, fixations)?,
        cc: cc_score(pred, density)?,
        kl: kl_score(pred, density, EPSILON)?,
        ig_center: ig_score(pred, center, fixations, EPSILON)?,
        ig_chance: ig_score(pred, chance, fixations, EPSILON)?,
    })
}
