//! Row-major image-plane containers: real-valued grids, probability masks and
//! binary masks.
//!
//! Pixel `(row, col)` is a unit square centred on `(x = col, y = row)`.

use crate::error::{Error, Result};
use crate::geometry::{AABox, RotBox};

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarGrid {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl ScalarGrid {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidGrid(format!(
                "dimensions must be positive, got {width}x{height}"
            )));
        }
        if values.len() != width * height {
            return Err(Error::InvalidGrid(format!(
                "expected {} values for {width}x{height}, got {}",
                width * height,
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid(format!("non-finite value at index {i}")));
        }
        Ok(Self {
            width,
            height,
            values,
        })
    }

    /// Panics if either dimension is zero.
    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        assert!(width > 0 && height > 0, "grid dimensions must be positive");
        assert!(value.is_finite());
        Self {
            width,
            height,
            values: vec![value; width * height],
        }
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self::filled(width, height, 0.0)
    }

    /// Panics on zero dimensions or a non-finite value from `f`.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(width > 0 && height > 0, "grid dimensions must be positive");
        let mut values = Vec::with_capacity(width * height);
        for row in 0..height {
            for col in 0..width {
                let v = f(row, col);
                assert!(v.is_finite(), "non-finite value at ({row}, {col})");
                values.push(v);
            }
        }
        Self {
            width,
            height,
            values,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// `(width, height)`.
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(value.is_finite());
        self.values[row * self.width + col] = value;
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.values[row * self.width..(row + 1) * self.width]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> Self {
        Self::from_fn(self.width, self.height, |r, c| f(self.get(r, c)))
    }

    pub fn max_abs_diff(&self, other: &ScalarGrid) -> Result<f64> {
        check_dims(self.dims(), other.dims())?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

pub(crate) fn check_dims(expected: (usize, usize), got: (usize, usize)) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

/// Foreground probability per pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbMask(ScalarGrid);

impl ProbMask {
    pub fn new(grid: ScalarGrid) -> Result<Self> {
        if let Some(i) = grid.values.iter().position(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidGrid(format!(
                "probability {} at index {i} outside [0, 1]",
                grid.values[i]
            )));
        }
        Ok(Self(grid))
    }

    /// Clamps every value into `[0, 1]`.
    pub fn clamped(grid: ScalarGrid) -> Self {
        Self(grid.map(|v| v.clamp(0.0, 1.0)))
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        Self::clamped(ScalarGrid::filled(width, height, value))
    }

    pub fn grid(&self) -> &ScalarGrid {
        &self.0
    }

    pub fn into_grid(self) -> ScalarGrid {
        self.0
    }

    pub fn width(&self) -> usize {
        self.0.width
    }

    pub fn height(&self) -> usize {
        self.0.height
    }

    pub fn dims(&self) -> (usize, usize) {
        self.0.dims()
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.0.get(row, col)
    }

    /// Pixels with probability strictly above `t` become foreground.
    pub fn threshold(&self, t: f64) -> BinaryMask {
        BinaryMask {
            width: self.0.width,
            height: self.0.height,
            bits: self.0.values.iter().map(|&v| v > t).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn empty(width: usize, height: usize) -> Self {
        assert!(width > 0 && height > 0, "mask dimensions must be positive");
        Self {
            width,
            height,
            bits: vec![false; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut mask = Self::empty(width, height);
        for row in 0..height {
            for col in 0..width {
                mask.bits[row * width + col] = f(row, col);
            }
        }
        mask
    }

    /// Pixels whose centres lie inside `bbox`.
    pub fn from_aabox(width: usize, height: usize, bbox: &AABox) -> Self {
        Self::from_fn(width, height, |r, c| bbox.contains(c as f64, r as f64))
    }

    /// Pixels whose centres lie inside or on the boundary of `rbox`.
    pub fn from_rotbox(width: usize, height: usize, rbox: &RotBox) -> Self {
        Self::from_fn(width, height, |r, c| rbox.contains(c as f64, r as f64))
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> bool {
        self.bits[row * self.width + col]
    }

    pub fn set(&mut self, row: usize, col: usize, on: bool) {
        self.bits[row * self.width + col] = on;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    /// Foreground pixels as `(row, col)` in row-major order.
    pub fn foreground(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let w = self.width;
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| (i / w, i % w))
    }

    pub fn to_prob(&self) -> ProbMask {
        ProbMask(ScalarGrid {
            width: self.width,
            height: self.height,
            values: self
                .bits
                .iter()
                .map(|&b| if b { 1.0 } else { 0.0 })
                .collect(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_shapes() {
        assert!(ScalarGrid::new(0, 3, vec![]).is_err());
        assert!(ScalarGrid::new(2, 2, vec![0.0; 3]).is_err());
        assert!(ScalarGrid::new(1, 1, vec![f64::NAN]).is_err());
        assert!(ScalarGrid::new(2, 1, vec![1.0, 2.0]).is_ok());
    }

    #[test]
    fn prob_mask_range() {
        assert!(ProbMask::new(ScalarGrid::filled(2, 2, 1.5)).is_err());
        assert!(ProbMask::new(ScalarGrid::filled(2, 2, 0.5)).is_ok());
        assert_eq!(
            ProbMask::clamped(ScalarGrid::filled(1, 1, -0.2)).get(0, 0),
            0.0
        );
    }

    #[test]
    fn threshold_is_strict() {
        let g = ScalarGrid::new(3, 1, vec![0.3, 0.30001, 0.9]).unwrap();
        let m = ProbMask::new(g).unwrap().threshold(0.3);
        assert_eq!(m.foreground().collect::<Vec<_>>(), vec![(0, 1), (0, 2)]);
    }

    #[test]
    fn row_major_layout() {
        let g = ScalarGrid::from_fn(3, 2, |r, c| (r * 10 + c) as f64);
        assert_eq!(g.row(1), &[10.0, 11.0, 12.0]);
        assert_eq!(g.get(1, 2), 12.0);
    }
}
