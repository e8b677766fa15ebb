//! V1 models: double-opponent color cells and an oriented filter bank.
//!
//! Color cells are center-surround differences of Gaussians over the
//! [`ColorChannelSet`]. Orientation cells convolve the gray image with
//! third-derivative-of-Gaussian kernels at eight orientations spaced by π/8,
//! then apply half-square rectification and divisive normalization over the
//! ON and OFF cells of every orientation.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::plane::{ChannelPlane, Dims, Plane};
use crate::snn::Hue;
use crate::stimulus::ColorChannelSet;

/// Number of orientation channels.
pub const NUM_ORIENTATIONS: usize = 8;

/// Angle in radians of orientation channel `k`.
pub fn orientation_angle(k: usize) -> f64 {
    k as f64 * PI / NUM_ORIENTATIONS as f64
}

/// Square convolution kernel of odd size, anchored at its center.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    size: usize,
    values: Vec<f64>,
}

impl Kernel {
    /// `values` are row-major, `size × size`, with `size` odd.
    pub fn new(size: usize, values: Vec<f64>) -> Result<Self> {
        if size % 2 == 0 {
            return Err(Error::InvalidParameter {
                name: "kernel size",
                reason: format!("{size} is not odd"),
            });
        }
        if values.len() != size * size {
            return Err(Error::InvalidParameter {
                name: "kernel values",
                reason: format!("expected {} values, got {}", size * size, values.len()),
            });
        }
        Ok(Self { size, values })
    }

    /// The 1×1 kernel `[1]`.
    pub fn identity() -> Self {
        Self {
            size: 1,
            values: vec![1.0],
        }
    }

    /// Uniform averaging kernel, each weight `1 / size²`.
    pub fn average(size: usize) -> Result<Self> {
        let n = (size * size) as f64;
        Self::new(size, vec![1.0 / n; size * size])
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn radius(&self) -> usize {
        self.size / 2
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Weight at offset `(dx, dy)` from the anchor.
    pub fn at(&self, dx: isize, dy: isize) -> f64 {
        let r = self.radius() as isize;
        self.values[((dy + r) as usize) * self.size + (dx + r) as usize]
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// Sampled isotropic Gaussian on a `(2·radius+1)²` grid, normalized to sum 1.
pub fn gaussian_kernel(sigma: f64, radius: usize) -> Result<Kernel> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "sigma",
            reason: format!("{sigma} is not positive"),
        });
    }
    if radius < 1 {
        return Err(Error::InvalidParameter {
            name: "radius",
            reason: "must be at least 1".into(),
        });
    }
    let size = 2 * radius + 1;
    let r = radius as isize;
    let mut values = Vec::with_capacity(size * size);
    for dy in -r..=r {
        for dx in -r..=r {
            let d2 = (dx * dx + dy * dy) as f64;
            values.push((-d2 / (2.0 * sigma * sigma)).exp());
        }
    }
    let total: f64 = values.iter().sum();
    values.iter_mut().for_each(|v| *v /= total);
    Kernel::new(size, values)
}

/// Gaussian radius used for the color cells: `ceil(3σ)`.
pub fn gaussian_radius(sigma: f64) -> usize {
    ((3.0 * sigma).ceil() as usize).max(1)
}

/// 2-D convolution with edge replication; output has the input's size.
pub fn convolve2d(plane: &Plane, kernel: &Kernel) -> Result<Plane> {
    let Dims { width, height } = plane.dims();
    if kernel.size() > width || kernel.size() > height {
        return Err(Error::KernelTooLarge {
            kernel: kernel.size(),
            width,
            height,
        });
    }
    let r = kernel.radius() as isize;
    let (w, h) = (width as isize, height as isize);
    let src = plane.data();
    let mut out = vec![0.0; width * height];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for dy in -r..=r {
                let sy = (y - dy).clamp(0, h - 1) as usize;
                let row = &src[sy * width..(sy + 1) * width];
                for dx in -r..=r {
                    let sx = (x - dx).clamp(0, w - 1) as usize;
                    acc += kernel.at(dx, dy) * row[sx];
                }
            }
            out[(y * w + x) as usize] = acc;
        }
    }
    Plane::new(plane.dims(), out)
}

/// Applies `kernel` `passes` times in sequence.
pub fn smooth(plane: &Plane, kernel: &Kernel, passes: usize) -> Result<Plane> {
    let mut out = plane.clone();
    for _ in 0..passes {
        out = convolve2d(&out, kernel)?;
    }
    Ok(out)
}

/// Color of a channel plane feeding a double-opponent cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelColor {
    Red,
    Green,
    Blue,
    Yellow,
}

/// The four double-opponent cell types of V1. No other center/surround
/// combination can be constructed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OpponentPair {
    RedGreen,
    GreenRed,
    YellowBlue,
    BlueYellow,
}

impl OpponentPair {
    pub const ALL: [OpponentPair; 4] = [
        OpponentPair::RedGreen,
        OpponentPair::GreenRed,
        OpponentPair::YellowBlue,
        OpponentPair::BlueYellow,
    ];

    pub fn center(self) -> ChannelColor {
        match self {
            OpponentPair::RedGreen => ChannelColor::Red,
            OpponentPair::GreenRed => ChannelColor::Green,
            OpponentPair::YellowBlue => ChannelColor::Yellow,
            OpponentPair::BlueYellow => ChannelColor::Blue,
        }
    }

    pub fn surround(self) -> ChannelColor {
        match self {
            OpponentPair::RedGreen => ChannelColor::Green,
            OpponentPair::GreenRed => ChannelColor::Red,
            OpponentPair::YellowBlue => ChannelColor::Blue,
            OpponentPair::BlueYellow => ChannelColor::Yellow,
        }
    }

    /// Looks up the pair with the given center and surround.
    pub fn from_colors(center: ChannelColor, surround: ChannelColor) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.center() == center && p.surround() == surround)
    }

    pub fn name(self) -> &'static str {
        match self {
            OpponentPair::RedGreen => "red-green",
            OpponentPair::GreenRed => "green-red",
            OpponentPair::YellowBlue => "yellow-blue",
            OpponentPair::BlueYellow => "blue-yellow",
        }
    }
}

impl fmt::Display for OpponentPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Identity of a response plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ResponseTag {
    Opponent(OpponentPair),
    /// Orientation channel index `k`, angle `k·π/8`.
    Orientation(usize),
    Hue(Hue),
    Untagged,
}

/// A plane of firing-rate drive with its channel identity.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponsePlane {
    pub tag: ResponseTag,
    pub values: Plane,
}

impl ResponsePlane {
    pub fn new(tag: ResponseTag, values: Plane) -> Self {
        Self { tag, values }
    }
}

fn channel(set: &ColorChannelSet, color: ChannelColor) -> &ChannelPlane {
    match color {
        ChannelColor::Red => &set.red,
        ChannelColor::Green => &set.green,
        ChannelColor::Blue => &set.blue,
        ChannelColor::Yellow => &set.yellow,
    }
}

/// Center-surround response `center ⋆ G(σ_cen) − surround ⋆ G(σ_sur)`,
/// clamped at zero.
pub fn dog_opponent_response(
    channels: &ColorChannelSet,
    pair: OpponentPair,
    sigma_cen: f64,
    sigma_sur: f64,
) -> Result<ResponsePlane> {
    if !(sigma_cen < sigma_sur) {
        return Err(Error::InvalidParameter {
            name: "sigma_cen",
            reason: format!("center width {sigma_cen} must be below surround width {sigma_sur}"),
        });
    }
    let center_plane = channel(channels, pair.center());
    let surround_plane = channel(channels, pair.surround());
    center_plane.require_same_dims(surround_plane)?;
    let center = convolve2d(
        center_plane,
        &gaussian_kernel(sigma_cen, gaussian_radius(sigma_cen))?,
    )?;
    let surround = convolve2d(
        surround_plane,
        &gaussian_kernel(sigma_sur, gaussian_radius(sigma_sur))?,
    )?;
    // The upper clamp only absorbs rounding: both inputs lie in [0, 1].
    let values = center.zip_map(&surround, |c, s| (c - s).clamp(0.0, 1.0))?;
    Ok(ResponsePlane::new(ResponseTag::Opponent(pair), values))
}

/// All four opponent responses in [`OpponentPair::ALL`] order.
pub fn opponent_responses(
    channels: &ColorChannelSet,
    sigma_cen: f64,
    sigma_sur: f64,
) -> Result<Vec<ResponsePlane>> {
    OpponentPair::ALL
        .iter()
        .map(|&p| dog_opponent_response(channels, p, sigma_cen, sigma_sur))
        .collect()
}

/// Eight third-derivative-of-Gaussian kernels, one per orientation.
#[derive(Debug, Clone)]
pub struct OrientedFilterBank {
    filters: Vec<Kernel>,
    scale: f64,
    sigma: f64,
}

impl OrientedFilterBank {
    pub fn orientations(&self) -> [f64; NUM_ORIENTATIONS] {
        std::array::from_fn(orientation_angle)
    }

    pub fn filters(&self) -> &[Kernel] {
        &self.filters
    }

    pub fn filter(&self, k: usize) -> &Kernel {
        &self.filters[k]
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Copy of the bank with a different output scale.
    pub fn with_scale(&self, scale: f64) -> Self {
        Self {
            scale,
            ..self.clone()
        }
    }
}

/// Builds the bank. Filter `k` differentiates three times across a bar at
/// angle `k·π/8` (angles counter-clockwise from the image x axis, y up), so a
/// bar at that angle drives it most strongly.
///
/// Each kernel is made exactly zero-mean and scaled so its positive lobes sum to 1.
pub fn oriented_filter_bank(sigma: f64, radius: usize, scale: f64) -> Result<OrientedFilterBank> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "sigma",
            reason: format!("{sigma} is not positive"),
        });
    }
    if radius < 1 {
        return Err(Error::InvalidParameter {
            name: "radius",
            reason: "must be at least 1".into(),
        });
    }
    let size = 2 * radius + 1;
    let r = radius as isize;
    let s2 = sigma * sigma;
    let filters = (0..NUM_ORIENTATIONS)
        .map(|k| {
            let theta = orientation_angle(k);
            let (sin, cos) = theta.sin_cos();
            let mut values = Vec::with_capacity(size * size);
            for dy in -r..=r {
                for dx in -r..=r {
                    let (px, py) = (dx as f64, -(dy as f64));
                    let u = -sin * px + cos * py;
                    let v = cos * px + sin * py;
                    let envelope = (-(u * u + v * v) / (2.0 * s2)).exp();
                    values.push((3.0 * u / (s2 * s2) - u * u * u / (s2 * s2 * s2)) * envelope);
                }
            }
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            values.iter_mut().for_each(|v| *v -= mean);
            let positive: f64 = values.iter().filter(|v| **v > 0.0).sum();
            values.iter_mut().for_each(|v| *v /= positive);
            Kernel::new(size, values)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(OrientedFilterBank {
        filters,
        scale,
        sigma,
    })
}

/// Linear V1 responses: the gray image convolved with each oriented filter,
/// times the bank scale.
pub fn v1_linear_response(gray: &Plane, bank: &OrientedFilterBank) -> Result<Vec<ResponsePlane>> {
    bank.filters
        .iter()
        .enumerate()
        .map(|(k, f)| {
            let mut values = convolve2d(gray, f)?;
            values.scale(bank.scale);
            Ok(ResponsePlane::new(ResponseTag::Orientation(k), values))
        })
        .collect()
}

/// Pointwise `max(v, 0)²`.
pub fn half_square_rectify(plane: &ResponsePlane) -> ResponsePlane {
    ResponsePlane::new(
        plane.tag,
        plane.values.map(|v| if v > 0.0 { v * v } else { 0.0 }),
    )
}

/// Divides each channel by `σ² + Σ_channels R` at every pixel.
pub fn divisive_normalize(
    planes: &[ResponsePlane],
    semisaturation: f64,
) -> Result<Vec<ResponsePlane>> {
    if !(semisaturation > 0.0 && semisaturation.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "semisaturation",
            reason: format!("{semisaturation} is not positive"),
        });
    }
    let Some(first) = planes.first() else {
        return Ok(Vec::new());
    };
    let mut pool = Plane::filled(first.values.dims(), semisaturation * semisaturation);
    for p in planes {
        pool.add_scaled(&p.values, 1.0)?;
    }
    planes
        .iter()
        .map(|p| {
            Ok(ResponsePlane::new(
                p.tag,
                p.values.zip_map(&pool, |v, d| v / d)?,
            ))
        })
        .collect()
}

/// Gray image → rectified, normalized orientation drive in `[0, 1)`.
///
/// The filters are odd, so θ and θ+π share a kernel up to sign and the bank
/// wraps polarity between channel 7 and channel 0. The pool therefore holds
/// both half-squares of every channel (the ON and OFF cells); pooling only the
/// ON half lets a channel whose positive lobe sits where its neighbours are
/// negative saturate unopposed.
pub fn orientation_responses(
    gray: &Plane,
    bank: &OrientedFilterBank,
    semisaturation: f64,
) -> Result<Vec<ResponsePlane>> {
    let linear = v1_linear_response(gray, bank)?;
    let mut cells: Vec<_> = linear.iter().map(half_square_rectify).collect();
    cells.extend(
        linear
            .iter()
            .map(|p| half_square_rectify(&ResponsePlane::new(p.tag, p.values.map(|v| -v)))),
    );
    let mut normalized = divisive_normalize(&cells, semisaturation)?;
    normalized.truncate(linear.len());
    Ok(normalized)
}
