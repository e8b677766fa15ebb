//! Fixation datasets on disk and the synthetic benchmark stimuli.
//!
//! A dataset root holds `stimuli/`, `fixations/` and optionally `density/`;
//! files are paired by filename stem.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use image::ImageReader;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::filters::{convolve2d, gaussian_kernel};
use crate::plane::{ChannelPlane, Dims, Plane};
use crate::snn::Hue;
use crate::stimulus::{resize_plane, RgbPlanes};

const IMAGE_EXTENSIONS: [&str; 3] = ["png", "jpg", "jpeg"];

/// One stimulus with its ground truth.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetEntry {
    pub id: String,
    pub stimulus: PathBuf,
    pub fixations: PathBuf,
    pub density: Option<PathBuf>,
}

/// Result of scanning a dataset root.
#[derive(Debug, Clone, Default)]
pub struct DatasetScan {
    /// Paired entries in lexicographic order of their stems.
    pub entries: Vec<DatasetEntry>,
    /// One message per stimulus skipped for lack of a fixation map.
    pub warnings: Vec<String>,
}

fn images_by_stem(dir: &Path) -> Result<BTreeMap<String, PathBuf>> {
    let mut out = BTreeMap::new();
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        if !path.is_file() {
            continue;
        }
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase);
        if !ext.is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.as_str())) {
            continue;
        }
        if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
            // Ties between extensions resolve to the lexicographically first path.
            let keep = out
                .get(stem)
                .is_none_or(|existing: &PathBuf| path < *existing);
            if keep {
                out.insert(stem.to_string(), path);
            }
        }
    }
    Ok(out)
}

pub fn scan_dataset(root: impl AsRef<Path>) -> Result<DatasetScan> {
    let root = root.as_ref();
    let stimuli_dir = root.join("stimuli");
    let fixations_dir = root.join("fixations");
    for dir in [&stimuli_dir, &fixations_dir] {
        if !dir.is_dir() {
            return Err(Error::MissingSubdirectory(dir.clone()));
        }
    }
    let stimuli = images_by_stem(&stimuli_dir)?;
    let fixations = images_by_stem(&fixations_dir)?;
    let density_dir = root.join("density");
    let density = if density_dir.is_dir() {
        images_by_stem(&density_dir)?
    } else {
        BTreeMap::new()
    };

    let mut scan = DatasetScan::default();
    for (stem, stimulus) in stimuli {
        match fixations.get(&stem) {
            Some(fix) => scan.entries.push(DatasetEntry {
                id: stem.clone(),
                stimulus,
                fixations: fix.clone(),
                density: density.get(&stem).cloned(),
            }),
            None => {
                let msg = format!(
                    "stimulus {} has no fixation map; skipped",
                    stimulus.display()
                );
                log::warn!("{msg}");
                scan.warnings.push(msg);
            }
        }
    }
    Ok(scan)
}

/// Binary fixation locations with an optional fixation density.
#[derive(Debug, Clone, PartialEq)]
pub struct FixationData {
    dims: Dims,
    mask: Vec<bool>,
    pub density: Option<Plane>,
}

impl FixationData {
    /// Requires at least one fixated pixel.
    pub fn new(dims: Dims, mask: Vec<bool>, density: Option<Plane>) -> Result<Self> {
        if mask.len() != dims.len() {
            return Err(Error::InvalidParameter {
                name: "mask",
                reason: format!("{} entries for {}x{}", mask.len(), dims.width, dims.height),
            });
        }
        if !mask.iter().any(|&m| m) {
            return Err(Error::NoFixations);
        }
        if let Some(d) = &density {
            if d.dims() != dims {
                return Err(Error::DimensionMismatch {
                    expected: (dims.width, dims.height),
                    found: (d.width(), d.height()),
                });
            }
            if !(d.sum() > 0.0) {
                return Err(Error::ZeroSumMap);
            }
        }
        Ok(Self {
            dims,
            mask,
            density,
        })
    }

    /// Fixations at the given `(x, y)` pixels.
    pub fn from_points(dims: Dims, points: &[(usize, usize)]) -> Result<Self> {
        let mut mask = vec![false; dims.len()];
        for &(x, y) in points {
            mask[y * dims.width + x] = true;
        }
        Self::new(dims, mask, None)
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    /// Fixated pixels as `(x, y)`, row by row.
    pub fn points(&self) -> Vec<(usize, usize)> {
        self.mask
            .iter()
            .enumerate()
            .filter(|(_, &m)| m)
            .map(|(i, _)| (i % self.dims.width, i / self.dims.width))
            .collect()
    }

    /// The stored density, or the fixation mask blurred by a Gaussian of
    /// width `sigma` pixels.
    pub fn density_or_blurred(&self, sigma: f64) -> Result<Plane> {
        if let Some(d) = &self.density {
            return Ok(d.clone());
        }
        let points = Plane::new(
            self.dims,
            self.mask
                .iter()
                .map(|&m| if m { 1.0 } else { 0.0 })
                .collect(),
        )?;
        let max_radius = (self.dims.width.min(self.dims.height).saturating_sub(1)) / 2;
        let radius = ((3.0 * sigma).ceil() as usize).min(max_radius);
        if radius == 0 {
            return Ok(points);
        }
        convolve2d(&points, &gaussian_kernel(sigma, radius)?)
    }
}

fn read_luma(path: &Path) -> Result<image::GrayImage> {
    let unreadable = |reason: String| Error::UnreadableFile {
        path: path.to_path_buf(),
        reason,
    };
    let img = ImageReader::open(path)
        .map_err(|e| unreadable(e.to_string()))?
        .with_guessed_format()
        .map_err(|e| unreadable(e.to_string()))?
        .decode()
        .map_err(|e| unreadable(e.to_string()))?;
    if img.width() == 0 || img.height() == 0 {
        return Err(Error::ZeroSizedImage);
    }
    Ok(img.to_luma8())
}

/// Loads a fixation map, binarized at `> 0`, with each fixated pixel moved to
/// its nearest pixel at `dims`. A density map, when given, is resized
/// bilinearly and scaled to `[0, 1]`.
pub fn load_fixations(
    path: impl AsRef<Path>,
    density: Option<&Path>,
    dims: Dims,
) -> Result<FixationData> {
    let path = path.as_ref();
    dims.require_nonzero()?;
    let img = read_luma(path)?;
    let (sw, sh) = (img.width() as usize, img.height() as usize);
    let mut mask = vec![false; dims.len()];
    for (x, y, px) in img.enumerate_pixels() {
        if px.0[0] > 0 {
            let tx = ((x as usize * 2 + 1) * dims.width / (2 * sw)).min(dims.width - 1);
            let ty = ((y as usize * 2 + 1) * dims.height / (2 * sh)).min(dims.height - 1);
            mask[ty * dims.width + tx] = true;
        }
    }
    if !mask.iter().any(|&m| m) {
        return Err(Error::ZeroFixations(path.to_path_buf()));
    }
    let density = match density {
        Some(p) => Some(load_density(p, dims)?),
        None => None,
    };
    FixationData::new(dims, mask, density)
}

/// Loads a single-channel density map at `dims`, values in `[0, 1]`.
pub fn load_density(path: &Path, dims: Dims) -> Result<Plane> {
    let img = read_luma(path)?;
    let src = Plane::from_fn(
        Dims::new(img.width() as usize, img.height() as usize),
        |x, y| f64::from(img.get_pixel(x as u32, y as u32).0[0]) / 255.0,
    );
    resize_plane(&src, dims)
}

fn uniform(dims: Dims, v: f64) -> Plane {
    Plane::filled(dims, v)
}

fn rgb_from(r: Plane, g: Plane, b: Plane) -> RgbPlanes {
    RgbPlanes {
        red: ChannelPlane::clamped(r),
        green: ChannelPlane::clamped(g),
        blue: ChannelPlane::clamped(b),
    }
}

/// Columns `[x0, x1)` of stripe `k` of `n` equal stripes across `width`.
pub fn stripe_bounds(width: usize, n: usize, k: usize) -> (usize, usize) {
    (k * width / n, (k + 1) * width / n)
}

/// Six vertical stripes of saturated red, green, blue, yellow, cyan and
/// magenta, left to right, in [`Hue::ALL`] order.
pub fn synth_colormix(dims: Dims) -> Result<RgbPlanes> {
    if dims.width < Hue::ALL.len() || dims.height == 0 {
        return Err(Error::InvalidParameter {
            name: "dims",
            reason: "colormix needs at least 6 columns".into(),
        });
    }
    let n = Hue::ALL.len();
    let hue_at = |x: usize| {
        let k = (0..n)
            .find(|&k| x < stripe_bounds(dims.width, n, k).1)
            .unwrap_or(n - 1);
        Hue::ALL[k]
    };
    let channel = |c: usize| Plane::from_fn(dims, |x, _| hue_at(x).rgb()[c]);
    Ok(rgb_from(channel(0), channel(1), channel(2)))
}

/// A bar of length `length` and width 2 centered at `(cx, cy)` (continuous
/// pixel coordinates, y down) at `angle` radians counter-clockwise from the
/// x axis. Pixels whose centers fall inside are set.
fn bar_mask(dims: Dims, cx: f64, cy: f64, length: f64, angle: f64) -> Vec<bool> {
    let (sin, cos) = angle.sin_cos();
    let mut mask = vec![false; dims.len()];
    for y in 0..dims.height {
        for x in 0..dims.width {
            let dx = x as f64 + 0.5 - cx;
            let dy = -(y as f64 + 0.5 - cy);
            let along = dx * cos + dy * sin;
            let across = -dx * sin + dy * cos;
            if along.abs() <= length / 2.0 && across.abs() < 1.0 {
                mask[y * dims.width + x] = true;
            }
        }
    }
    mask
}

/// Eight cells left to right, cell `k` holding a white bar at angle `k·π/8`
/// on black. Bars are 2 px wide and about 3/4 of the cell's smaller side long.
pub fn synth_oriented_bars(dims: Dims) -> Result<ChannelPlane> {
    if dims.width < 8 || dims.height == 0 {
        return Err(Error::InvalidParameter {
            name: "dims",
            reason: "oriented bars need at least 8 columns".into(),
        });
    }
    let mut img = Plane::zeros(dims);
    for k in 0..8 {
        let (x0, x1) = stripe_bounds(dims.width, 8, k);
        let side = (x1 - x0).min(dims.height) as f64;
        let cx = (x0 + x1) as f64 / 2.0;
        let cy = dims.height as f64 / 2.0;
        let mask = bar_mask(dims, cx, cy, 0.75 * side, k as f64 * PI / 8.0);
        for (v, m) in img.data_mut().iter_mut().zip(mask) {
            if m {
                *v = 1.0;
            }
        }
    }
    ChannelPlane::new(img)
}

/// Kind of singleton in a pop-out display.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PopoutKind {
    /// One red disc among green discs on mid-gray.
    Color,
    /// One vertical bar among horizontal bars, white on black.
    Orientation,
}

/// A pop-out display and the pixels of its singleton.
#[derive(Debug, Clone)]
pub struct Popout {
    pub image: RgbPlanes,
    pub target: Vec<bool>,
    /// Grid cell `(column, row)` holding the singleton.
    pub target_cell: (usize, usize),
}

/// Grid and item geometry of the pop-out displays.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PopoutGeometry {
    pub color_grid: usize,
    /// Disc radius as a fraction of the cell side.
    pub disc_radius: f64,
    pub orientation_grid: usize,
    /// Bar length as a fraction of the cell side.
    pub bar_length: f64,
    /// Maximum jitter of item centers, in pixels.
    pub jitter: f64,
}

impl Default for PopoutGeometry {
    fn default() -> Self {
        Self {
            color_grid: 4,
            disc_radius: 0.25,
            orientation_grid: 5,
            bar_length: 0.7,
            jitter: 1.5,
        }
    }
}

/// [`synth_popout_with`] using the default geometry.
pub fn synth_popout(kind: PopoutKind, dims: Dims, seed: u64) -> Result<Popout> {
    synth_popout_with(kind, dims, seed, &PopoutGeometry::default())
}

pub fn synth_popout_with(
    kind: PopoutKind,
    dims: Dims,
    seed: u64,
    geometry: &PopoutGeometry,
) -> Result<Popout> {
    let grid = match kind {
        PopoutKind::Color => geometry.color_grid,
        PopoutKind::Orientation => geometry.orientation_grid,
    };
    if grid == 0 || dims.width < 4 * grid || dims.height < 4 * grid {
        return Err(Error::InvalidParameter {
            name: "dims",
            reason: format!(
                "{}x{} too small for a {grid}x{grid} display",
                dims.width, dims.height
            ),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let target_cell = (rng.gen_range(0..grid), rng.gen_range(0..grid));
    let cell_w = dims.width as f64 / grid as f64;
    let cell_h = dims.height as f64 / grid as f64;
    let side = cell_w.min(cell_h);

    let background = match kind {
        PopoutKind::Color => 0.5,
        PopoutKind::Orientation => 0.0,
    };
    let (mut r, mut g, mut b) = (
        uniform(dims, background),
        uniform(dims, background),
        uniform(dims, background),
    );
    let mut target = vec![false; dims.len()];

    for row in 0..grid {
        for col in 0..grid {
            let cx =
                (col as f64 + 0.5) * cell_w + rng.gen_range(-geometry.jitter..=geometry.jitter);
            let cy =
                (row as f64 + 0.5) * cell_h + rng.gen_range(-geometry.jitter..=geometry.jitter);
            let is_target = (col, row) == target_cell;
            let (mask, color) = match kind {
                PopoutKind::Color => {
                    let radius = geometry.disc_radius * side;
                    let mask = (0..dims.len())
                        .map(|i| {
                            let dx = (i % dims.width) as f64 + 0.5 - cx;
                            let dy = (i / dims.width) as f64 + 0.5 - cy;
                            dx * dx + dy * dy <= radius * radius
                        })
                        .collect::<Vec<_>>();
                    let hue = if is_target { Hue::Red } else { Hue::Green };
                    (mask, hue.rgb())
                }
                PopoutKind::Orientation => {
                    let angle = if is_target { PI / 2.0 } else { 0.0 };
                    (
                        bar_mask(dims, cx, cy, geometry.bar_length * side, angle),
                        [1.0; 3],
                    )
                }
            };
            for (i, m) in mask.into_iter().enumerate() {
                if m {
                    r.data_mut()[i] = color[0];
                    g.data_mut()[i] = color[1];
                    b.data_mut()[i] = color[2];
                    if is_target {
                        target[i] = true;
                    }
                }
            }
        }
    }
    Ok(Popout {
        image: rgb_from(r, g, b),
        target,
        target_cell,
    })
}

/// Grows a mask by `radius` pixels (Chebyshev distance).
pub fn dilate(mask: &[bool], dims: Dims, radius: usize) -> Vec<bool> {
    let mut out = vec![false; mask.len()];
    for y in 0..dims.height {
        for x in 0..dims.width {
            if !mask[y * dims.width + x] {
                continue;
            }
            for ny in y.saturating_sub(radius)..=(y + radius).min(dims.height - 1) {
                for nx in x.saturating_sub(radius)..=(x + radius).min(dims.width - 1) {
                    out[ny * dims.width + nx] = true;
                }
            }
        }
    }
    out
}
