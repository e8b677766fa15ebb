//! Image loading and decomposition into the channel planes consumed by V1.

use std::path::Path;

use image::{ImageFormat, ImageReader};

use crate::error::{Error, Result};
use crate::plane::{ChannelPlane, Dims, Plane};

/// Three `[0, 1]` planes of an RGB image.
#[derive(Debug, Clone, PartialEq)]
pub struct RgbPlanes {
    pub red: ChannelPlane,
    pub green: ChannelPlane,
    pub blue: ChannelPlane,
}

impl RgbPlanes {
    pub fn new(red: ChannelPlane, green: ChannelPlane, blue: ChannelPlane) -> Result<Self> {
        red.require_same_dims(&green)?;
        red.require_same_dims(&blue)?;
        Ok(Self { red, green, blue })
    }

    /// Replicates one gray plane into all three channels.
    pub fn from_gray(gray: &ChannelPlane) -> Self {
        Self {
            red: gray.clone(),
            green: gray.clone(),
            blue: gray.clone(),
        }
    }

    pub fn dims(&self) -> Dims {
        self.red.dims()
    }

    /// Resizes all three channels.
    pub fn resized(&self, target: Dims) -> Result<Self> {
        Ok(Self {
            red: resize(&self.red, target)?,
            green: resize(&self.green, target)?,
            blue: resize(&self.blue, target)?,
        })
    }

    /// Red, green, blue and the derived yellow plane.
    pub fn color_channels(&self) -> Result<ColorChannelSet> {
        ColorChannelSet::from_rgb(self)
    }

    pub fn grayscale(&self) -> Result<ChannelPlane> {
        grayscale(&self.red, &self.green, &self.blue)
    }
}

/// The four color planes feeding the double-opponent cells.
#[derive(Debug, Clone, PartialEq)]
pub struct ColorChannelSet {
    pub red: ChannelPlane,
    pub green: ChannelPlane,
    pub blue: ChannelPlane,
    pub yellow: ChannelPlane,
}

impl ColorChannelSet {
    pub fn from_rgb(rgb: &RgbPlanes) -> Result<Self> {
        Ok(Self {
            yellow: yellow_channel(&rgb.red, &rgb.green, &rgb.blue)?,
            red: rgb.red.clone(),
            green: rgb.green.clone(),
            blue: rgb.blue.clone(),
        })
    }

    pub fn dims(&self) -> Dims {
        self.red.dims()
    }
}

/// Decodes a PNG or JPEG file into `[0, 1]` RGB planes (8-bit values divided by 255).
pub fn load_image(path: impl AsRef<Path>) -> Result<RgbPlanes> {
    let path = path.as_ref();
    let unreadable = |reason: String| Error::UnreadableFile {
        path: path.to_path_buf(),
        reason,
    };
    let reader = ImageReader::open(path)
        .map_err(|e| unreadable(e.to_string()))?
        .with_guessed_format()
        .map_err(|e| unreadable(e.to_string()))?;
    match reader.format() {
        Some(ImageFormat::Png | ImageFormat::Jpeg) => {}
        Some(other) => return Err(Error::UnsupportedFormat(format!("{other:?}"))),
        None => return Err(Error::UnsupportedFormat(path.display().to_string())),
    }
    let img = reader.decode().map_err(|e| unreadable(e.to_string()))?;
    if img.width() == 0 || img.height() == 0 {
        return Err(Error::ZeroSizedImage);
    }
    Ok(rgb_from_image(&img.to_rgb8()))
}

/// Converts an 8-bit RGB buffer into planes.
pub fn rgb_from_image(img: &image::RgbImage) -> RgbPlanes {
    let dims = Dims::new(img.width() as usize, img.height() as usize);
    let channel = |c: usize| {
        ChannelPlane::clamped(Plane::from_fn(dims, |x, y| {
            f64::from(img.get_pixel(x as u32, y as u32).0[c]) / 255.0
        }))
    };
    RgbPlanes {
        red: channel(0),
        green: channel(1),
        blue: channel(2),
    }
}

/// Bilinear resampling to exactly `target`, using pixel-center alignment and
/// edge clamping. Same-size input is returned unchanged.
pub fn resize(plane: &ChannelPlane, target: Dims) -> Result<ChannelPlane> {
    target.require_nonzero()?;
    Ok(ChannelPlane::clamped(resize_plane(plane, target)?))
}

/// Bilinear resampling of an arbitrary real plane.
pub fn resize_plane(plane: &Plane, target: Dims) -> Result<Plane> {
    target.require_nonzero()?;
    let src = plane.dims().require_nonzero()?;
    if src == target {
        return Ok(plane.clone());
    }
    let sx = src.width as f64 / target.width as f64;
    let sy = src.height as f64 / target.height as f64;
    let sample = |coord: f64, len: usize| -> (usize, usize, f64) {
        let c = coord.clamp(0.0, (len - 1) as f64);
        let lo = c.floor() as usize;
        let hi = (lo + 1).min(len - 1);
        (lo, hi, c - lo as f64)
    };
    Ok(Plane::from_fn(target, |x, y| {
        let (x0, x1, fx) = sample((x as f64 + 0.5) * sx - 0.5, src.width);
        let (y0, y1, fy) = sample((y as f64 + 0.5) * sy - 0.5, src.height);
        let top = plane.get(x0, y0) * (1.0 - fx) + plane.get(x1, y0) * fx;
        let bottom = plane.get(x0, y1) * (1.0 - fx) + plane.get(x1, y1) * fx;
        top * (1.0 - fy) + bottom * fy
    }))
}

/// Yellow as the red/green minimum less blue, with negatives zeroed.
pub fn yellow_channel(
    red: &ChannelPlane,
    green: &ChannelPlane,
    blue: &ChannelPlane,
) -> Result<ChannelPlane> {
    let rg = red.zip_map(green, |r, g| (r + g) / 2.0 - (r - g).abs() / 2.0)?;
    let y = rg.zip_map(blue, |m, b| (m - b).max(0.0))?;
    Ok(ChannelPlane::clamped(y))
}

/// Luma with weights 0.299, 0.587, 0.114.
pub fn grayscale(
    red: &ChannelPlane,
    green: &ChannelPlane,
    blue: &ChannelPlane,
) -> Result<ChannelPlane> {
    let rg = red.zip_map(green, |r, g| 0.299 * r + 0.587 * g)?;
    let luma = rg.zip_map(blue, |v, b| v + 0.114 * b)?;
    Ok(ChannelPlane::clamped(luma))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn px(v: f64) -> ChannelPlane {
        ChannelPlane::filled(Dims::new(1, 1), v).unwrap()
    }

    fn yellow_of(r: f64, g: f64, b: f64) -> f64 {
        yellow_channel(&px(r), &px(g), &px(b)).unwrap().get(0, 0)
    }

    #[test]
    fn yellow_examples() {
        assert_eq!(yellow_of(1.0, 1.0, 0.0), 1.0);
        assert_eq!(yellow_of(1.0, 0.0, 0.0), 0.0);
        assert_eq!(yellow_of(1.0, 1.0, 1.0), 0.0);
        assert_eq!(yellow_of(0.0, 0.0, 1.0), 0.0);
    }

    #[test]
    fn grayscale_examples() {
        let g = |r, gr, b| grayscale(&px(r), &px(gr), &px(b)).unwrap().get(0, 0);
        assert!((g(1.0, 1.0, 1.0) - 1.0).abs() < 1e-12);
        assert_eq!(g(0.0, 0.0, 0.0), 0.0);
        assert!((g(1.0, 0.0, 0.0) - 0.299).abs() < 1e-15);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let a = ChannelPlane::filled(Dims::new(2, 2), 0.5).unwrap();
        let b = ChannelPlane::filled(Dims::new(3, 2), 0.5).unwrap();
        assert!(matches!(
            yellow_channel(&a, &a, &b),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(grayscale(&a, &b, &a).is_err());
    }

    #[test]
    fn identity_resize_is_bit_identical() {
        let p = ChannelPlane::clamped(Plane::from_fn(Dims::new(64, 64), |x, y| {
            ((x * 7 + y * 13) % 17) as f64 / 17.0
        }));
        assert_eq!(resize(&p, Dims::new(64, 64)).unwrap(), p);
    }

    #[test]
    fn constant_resize_stays_constant() {
        let p = ChannelPlane::filled(Dims::new(5, 9), 0.4).unwrap();
        for target in [Dims::new(1, 1), Dims::new(13, 4), Dims::new(64, 64)] {
            let r = resize(&p, target).unwrap();
            assert_eq!(r.dims(), target);
            assert!(r.data().iter().all(|&v| (v - 0.4).abs() < 1e-15));
        }
    }

    #[test]
    fn two_by_two_gradient_upsamples_monotonically() {
        // Hand-evaluated bilinear weights: source x = (dx + 0.5) / 2 - 0.5
        // gives -0.25, 0.25, 0.75, 1.25, clamped to 0, 0.25, 0.75, 1.
        let p = ChannelPlane::new(Plane::from_rows(&[vec![0.0, 1.0], vec![0.0, 1.0]]).unwrap())
            .unwrap();
        let r = resize(&p, Dims::new(4, 4)).unwrap();
        for y in 0..4 {
            let row: Vec<f64> = (0..4).map(|x| r.get(x, y)).collect();
            assert_eq!(row, vec![0.0, 0.25, 0.75, 1.0]);
        }
    }

    #[test]
    fn zero_target_rejected() {
        let p = ChannelPlane::filled(Dims::new(2, 2), 0.1).unwrap();
        assert!(matches!(
            resize(&p, Dims::new(0, 4)),
            Err(Error::ZeroDimension { .. })
        ));
    }

    #[test]
    fn missing_file_is_unreadable() {
        let err = load_image("/nonexistent/definitely/missing.png").unwrap_err();
        assert!(err.to_string().starts_with("unreadable file"));
    }

    proptest! {
        #[test]
        fn yellow_bounded_by_red_green_max(r in 0.0..=1.0f64, g in 0.0..=1.0f64, b in 0.0..=1.0f64) {
            let y = yellow_of(r, g, b);
            prop_assert!(y >= 0.0);
            prop_assert!(y <= r.max(g) + 1e-15);
        }

        #[test]
        fn gray_pixels_keep_their_value(v in 0.0..=1.0f64) {
            let g = grayscale(&px(v), &px(v), &px(v)).unwrap().get(0, 0);
            prop_assert!((g - v).abs() < 1e-12);
        }

        #[test]
        fn resize_output_in_unit_range(
            w in 1usize..12, h in 1usize..12, tw in 1usize..20, th in 1usize..20, seed in 0u64..1000
        ) {
            let p = ChannelPlane::clamped(Plane::from_fn(Dims::new(w, h), |x, y| {
                (((x as u64 * 31 + y as u64 * 17 + seed) % 101) as f64) / 100.0
            }));
            let r = resize(&p, Dims::new(tw, th)).unwrap();
            prop_assert!(r.data().iter().all(|v| v.is_finite() && (0.0..=1.0).contains(v)));
            let again = resize(&r, Dims::new(tw, th)).unwrap();
            prop_assert_eq!(again, r);
        }
    }
}
