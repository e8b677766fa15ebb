//! Dense row-major real-valued planes shared by every stage of the pipeline.

use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Width and height of a plane, in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Dims {
    pub width: usize,
    pub height: usize,
}

impl Dims {
    pub const fn new(width: usize, height: usize) -> Self {
        Self { width, height }
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub(crate) fn require_nonzero(self) -> Result<Self> {
        if self.is_empty() {
            Err(Error::ZeroDimension {
                width: self.width,
                height: self.height,
            })
        } else {
            Ok(self)
        }
    }
}

/// An H×W matrix of `f64` values stored row by row.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    dims: Dims,
    data: Vec<f64>,
}

impl Plane {
    pub fn new(dims: Dims, data: Vec<f64>) -> Result<Self> {
        if data.len() != dims.len() {
            return Err(Error::InvalidParameter {
                name: "data",
                reason: format!(
                    "{} values for a {}x{} plane",
                    data.len(),
                    dims.width,
                    dims.height
                ),
            });
        }
        Ok(Self { dims, data })
    }

    pub fn filled(dims: Dims, value: f64) -> Self {
        Self {
            dims,
            data: vec![value; dims.len()],
        }
    }

    pub fn zeros(dims: Dims) -> Self {
        Self::filled(dims, 0.0)
    }

    /// Builds a plane by evaluating `f(x, y)` at every pixel.
    pub fn from_fn(dims: Dims, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(dims.len());
        for y in 0..dims.height {
            for x in 0..dims.width {
                data.push(f(x, y));
            }
        }
        Self { dims, data }
    }

    /// Builds a plane from nested rows; every row must have the same length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let height = rows.len();
        let width = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != width) {
            return Err(Error::InvalidParameter {
                name: "rows",
                reason: "ragged rows".into(),
            });
        }
        Self::new(Dims::new(width, height), rows.concat())
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn width(&self) -> usize {
        self.dims.width
    }

    pub fn height(&self) -> usize {
        self.dims.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize) -> usize {
        y * self.dims.width + x
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[self.index(x, y)]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: f64) {
        let i = self.index(x, y);
        self.data[i] = value;
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            dims: self.dims,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise combination of two planes of equal size.
    pub fn zip_map(&self, other: &Plane, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.require_same_dims(other)?;
        Ok(Self {
            dims: self.dims,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn require_same_dims(&self, other: &Plane) -> Result<()> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch {
                expected: (self.dims.width, self.dims.height),
                found: (other.dims.width, other.dims.height),
            });
        }
        Ok(())
    }

    /// Largest value, or `f64::NEG_INFINITY` for an empty plane.
    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.sum() / self.data.len() as f64
    }

    /// Position `(x, y)` of the first maximal value.
    pub fn argmax(&self) -> (usize, usize) {
        let mut best = 0;
        for (i, &v) in self.data.iter().enumerate() {
            if v > self.data[best] {
                best = i;
            }
        }
        (best % self.dims.width, best / self.dims.width)
    }

    /// Index of the first non-finite value, if any.
    pub fn first_non_finite(&self) -> Option<usize> {
        self.data.iter().position(|v| !v.is_finite())
    }

    /// Scales every value in place.
    pub fn scale(&mut self, factor: f64) {
        self.data.iter_mut().for_each(|v| *v *= factor);
    }

    /// Adds `other * factor` in place.
    pub fn add_scaled(&mut self, other: &Plane, factor: f64) -> Result<()> {
        self.require_same_dims(other)?;
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += factor * b;
        }
        Ok(())
    }

    /// Sum of values over an axis-aligned rectangle `[x0, x1) × [y0, y1)`.
    pub fn region_sum(&self, x0: usize, x1: usize, y0: usize, y1: usize) -> f64 {
        let mut total = 0.0;
        for y in y0..y1.min(self.height()) {
            for x in x0..x1.min(self.width()) {
                total += self.get(x, y);
            }
        }
        total
    }
}

/// A plane holding image intensities, every value finite and within `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelPlane(Plane);

impl ChannelPlane {
    /// Wraps a plane after checking the `[0, 1]` range.
    pub fn new(plane: Plane) -> Result<Self> {
        if let Some(i) = plane.first_non_finite() {
            return Err(Error::NonFinite(i));
        }
        if let Some((index, &value)) = plane
            .data()
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return Err(Error::ValueOutOfRange { value, index });
        }
        Ok(Self(plane))
    }

    /// Wraps a plane, clamping every value into `[0, 1]`.
    pub fn clamped(plane: Plane) -> Self {
        Self(plane.map(|v| if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) }))
    }

    pub fn filled(dims: Dims, value: f64) -> Result<Self> {
        Self::new(Plane::filled(dims, value))
    }

    pub fn plane(&self) -> &Plane {
        &self.0
    }

    pub fn into_plane(self) -> Plane {
        self.0
    }
}

impl Deref for ChannelPlane {
    type Target = Plane;

    fn deref(&self) -> &Plane {
        &self.0
    }
}

impl AsRef<Plane> for ChannelPlane {
    fn as_ref(&self) -> &Plane {
        &self.0
    }
}

impl AsRef<Plane> for Plane {
    fn as_ref(&self) -> &Plane {
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn channel_plane_rejects_out_of_range() {
        let p = Plane::from_rows(&[vec![0.0, 1.5]]).unwrap();
        assert!(matches!(
            ChannelPlane::new(p),
            Err(Error::ValueOutOfRange { index: 1, .. })
        ));
        let p = Plane::from_rows(&[vec![f64::NAN]]).unwrap();
        assert!(matches!(ChannelPlane::new(p), Err(Error::NonFinite(0))));
    }

    #[test]
    fn argmax_returns_first_maximum() {
        let p = Plane::from_rows(&[vec![0.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert_eq!(p.argmax(), (1, 0));
    }

    #[test]
    fn ragged_rows_rejected() {
        assert!(Plane::from_rows(&[vec![0.0, 1.0], vec![1.0]]).is_err());
    }
}
