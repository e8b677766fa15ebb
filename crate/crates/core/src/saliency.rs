//! Rarity-based post-processing of V4 and MT spike counts into saliency maps.
//!
//! Color: each hue's counts have the weighted mean of the other five hues
//! subtracted, are cut to their top values, smoothed, and weighted by
//! `1 / (1 + N_c)` where `N_c` is the size of the supra-threshold region.
//! Orientation: each channel is smoothed and weighted by `1 / N_θ²`, then the
//! other channels are subtracted with half of the two adjacent orientations
//! added back. Both maps end smoothed and scaled to a maximum of 1.

use std::ops::Deref;

use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::filters::{smooth, Kernel, ResponsePlane, ResponseTag, NUM_ORIENTATIONS};
use crate::plane::Plane;
use crate::snn::Hue;

/// A map with values in `[0, 1]` whose maximum is 1 unless it is all zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SaliencyMap(Plane);

impl SaliencyMap {
    pub fn plane(&self) -> &Plane {
        &self.0
    }

    pub fn into_plane(self) -> Plane {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.data().iter().all(|&v| v == 0.0)
    }
}

impl Deref for SaliencyMap {
    type Target = Plane;

    fn deref(&self) -> &Plane {
        &self.0
    }
}

impl AsRef<Plane> for SaliencyMap {
    fn as_ref(&self) -> &Plane {
        &self.0
    }
}

/// Divides by the maximum. Negative values are clamped to 0 first; an
/// all-zero map is returned unchanged.
pub fn normalize_map(map: &Plane) -> Result<SaliencyMap> {
    if let Some(i) = map.first_non_finite() {
        return Err(Error::NonFinite(i));
    }
    let mut out = map.map(|v| v.max(0.0));
    let max = out.max();
    if max > 0.0 {
        out = out.map(|v| v / max);
    }
    Ok(SaliencyMap(out))
}

/// One hue's smoothed, thresholded residue and its supra-threshold pixel count.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSaliency {
    pub smoothed: Plane,
    pub count: usize,
}

impl ChannelSaliency {
    /// `smoothed / (1 + count)`.
    pub fn weighted(&self) -> Plane {
        let mut p = self.smoothed.clone();
        p.scale(1.0 / (1.0 + self.count as f64));
        p
    }
}

fn collect_by_tag<'a, K: Copy + PartialEq + std::fmt::Debug>(
    responses: &'a [ResponsePlane],
    keys: &[K],
    key_of: impl Fn(ResponseTag) -> Option<K>,
) -> Result<Vec<&'a Plane>> {
    let wrong_set = || Error::WrongChannelSet {
        expected: format!("{keys:?}"),
        found: format!("{:?}", responses.iter().map(|r| r.tag).collect::<Vec<_>>()),
    };
    if responses.len() != keys.len() {
        return Err(wrong_set());
    }
    let mut planes = Vec::with_capacity(keys.len());
    for &key in keys {
        let mut matching = responses.iter().filter(|r| key_of(r.tag) == Some(key));
        match (matching.next(), matching.next()) {
            (Some(r), None) => planes.push(&r.values),
            _ => return Err(wrong_set()),
        }
    }
    for p in &planes[1..] {
        planes[0].require_same_dims(p)?;
    }
    Ok(planes)
}

/// Residue of one hue after thresholding at `keep_fraction · max`, smoothed,
/// with its count of pixels above `count_threshold · max`.
///
/// A residue with no positive value yields an all-zero channel and count 0.
pub fn color_channel_saliency(residue: &Plane, config: &PipelineConfig) -> Result<ChannelSaliency> {
    let max = residue.max();
    if !(max > 0.0) {
        return Ok(ChannelSaliency {
            smoothed: Plane::zeros(residue.dims()),
            count: 0,
        });
    }
    let cut = config.keep_fraction_color * max;
    let kept = residue.map(|v| if v < cut { 0.0 } else { v });
    let smoothed = smooth(&kept, &config.smoothing_kernel(), config.smooth_passes)?;
    let peak = smoothed.max();
    let threshold = config.count_threshold_color * peak;
    let count = smoothed.data().iter().filter(|&&v| v > threshold).count();
    Ok(ChannelSaliency { smoothed, count })
}

/// Per-hue stages of the color map, in [`Hue::ALL`] order.
pub fn color_channels(
    responses: &[ResponsePlane],
    config: &PipelineConfig,
) -> Result<Vec<ChannelSaliency>> {
    let planes = collect_by_tag(responses, &Hue::ALL, |t| match t {
        ResponseTag::Hue(h) => Some(h),
        _ => None,
    })?;
    let others = (Hue::ALL.len() - 1) as f64;
    Hue::ALL
        .iter()
        .enumerate()
        .map(|(i, &hue)| {
            let mut rest = Plane::zeros(planes[i].dims());
            for (j, p) in planes.iter().enumerate() {
                if j != i {
                    rest.add_scaled(p, 1.0)?;
                }
            }
            let mut residue = planes[i].clone();
            residue.add_scaled(&rest, -config.alpha(hue) / others)?;
            color_channel_saliency(&residue, config)
        })
        .collect()
}

/// Color saliency from the six V4 hue responses (tags [`ResponseTag::Hue`]).
pub fn color_saliency(responses: &[ResponsePlane], config: &PipelineConfig) -> Result<SaliencyMap> {
    let channels = color_channels(responses, config)?;
    let mut combined = Plane::zeros(channels[0].smoothed.dims());
    for ch in &channels {
        combined.add_scaled(&ch.smoothed, 1.0 / (1.0 + ch.count as f64))?;
    }
    let combined = smooth(&combined, &config.smoothing_kernel(), config.smooth_passes)?;
    normalize_map(&combined)
}

/// Index of the orientation channel `offset` steps of π/8 away from `k`,
/// wrapping modulo π.
pub fn orientation_neighbor(k: usize, offset: isize) -> usize {
    let n = NUM_ORIENTATIONS as isize;
    (k as isize + offset).rem_euclid(n) as usize
}

/// Smoothed orientation channel divided by the square of its
/// supra-threshold count. An all-zero channel stays zero.
pub fn orientation_channel_saliency(
    response: &Plane,
    config: &PipelineConfig,
) -> Result<ChannelSaliency> {
    let mut smoothed = smooth(response, &config.smoothing_kernel(), config.smooth_passes)?;
    let max = smoothed.max();
    if !(max > 0.0) {
        return Ok(ChannelSaliency {
            smoothed: Plane::zeros(response.dims()),
            count: 0,
        });
    }
    let threshold = config.count_threshold_orient * max;
    let count = smoothed.data().iter().filter(|&&v| v >= threshold).count();
    if count == 0 {
        smoothed = Plane::zeros(response.dims());
    } else {
        smoothed.scale(1.0 / (count as f64 * count as f64));
    }
    Ok(ChannelSaliency { smoothed, count })
}

/// Per-orientation distinctiveness maps `S_θ`, clamped at zero, in channel order.
pub fn orientation_distinctiveness(
    responses: &[ResponsePlane],
    config: &PipelineConfig,
) -> Result<Vec<Plane>> {
    let keys: Vec<usize> = (0..NUM_ORIENTATIONS).collect();
    let planes = collect_by_tag(responses, &keys, |t| match t {
        ResponseTag::Orientation(k) => Some(k),
        _ => None,
    })?;
    let weighted: Vec<Plane> = planes
        .iter()
        .map(|p| orientation_channel_saliency(p, config).map(|c| c.smoothed))
        .collect::<Result<_>>()?;

    (0..NUM_ORIENTATIONS)
        .map(|k| {
            let mut s = weighted[k].clone();
            for (j, other) in weighted.iter().enumerate() {
                if j != k {
                    s.add_scaled(other, -1.0)?;
                }
            }
            s.add_scaled(&weighted[orientation_neighbor(k, 1)], 0.5)?;
            s.add_scaled(&weighted[orientation_neighbor(k, -1)], 0.5)?;
            Ok(s.map(|v| v.max(0.0)))
        })
        .collect()
}

/// Orientation saliency from the eight MT responses (tags [`ResponseTag::Orientation`]).
pub fn orientation_saliency(
    responses: &[ResponsePlane],
    config: &PipelineConfig,
) -> Result<SaliencyMap> {
    let per_channel = orientation_distinctiveness(responses, config)?;
    let mut total = Plane::zeros(per_channel[0].dims());
    for s in &per_channel {
        total.add_scaled(s, 1.0)?;
    }
    let total = smooth(&total, &config.smoothing_kernel(), config.smooth_passes)?;
    normalize_map(&total)
}

/// Average of the color and orientation maps, smoothed `passes` times with
/// `kernel` and rescaled to a maximum of 1.
pub fn fuse_maps(
    color: &SaliencyMap,
    orient: &SaliencyMap,
    kernel: &Kernel,
    passes: usize,
) -> Result<SaliencyMap> {
    let mean = color.zip_map(orient, |c, o| (c + o) / 2.0)?;
    normalize_map(&smooth(&mean, kernel, passes)?)
}

/// Zeros every value below the `fraction` quantile, then renormalizes.
pub fn drop_bottom(map: &SaliencyMap, fraction: f64) -> Result<SaliencyMap> {
    if !(0.0..1.0).contains(&fraction) {
        return Err(Error::InvalidParameter {
            name: "drop_bottom_fraction",
            reason: format!("{fraction} not in [0, 1)"),
        });
    }
    if fraction == 0.0 {
        return Ok(map.clone());
    }
    let mut sorted = map.data().to_vec();
    sorted.sort_by(f64::total_cmp);
    let cutoff = sorted[((sorted.len() as f64 * fraction).floor() as usize).min(sorted.len() - 1)];
    normalize_map(&map.map(|v| if v < cutoff { 0.0 } else { v }))
}
