//! Dense row-major 2-D real arrays.

use crate::error::{CscError, Result};

/// A 2-D real-valued array stored in row-major order.
///
/// Used for images, coefficient maps, filters and masks alike.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalGrid {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl SignalGrid {
    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        check_dims(rows, cols)?;
        Ok(Self {
            rows,
            cols,
            values: vec![0.0; rows * cols],
        })
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Result<Self> {
        let mut g = Self::zeros(rows, cols)?;
        g.values.fill(value);
        Ok(g)
    }

    pub fn from_vec(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        check_dims(rows, cols)?;
        if values.len() != rows * cols {
            return Err(CscError::invalid(format!(
                "expected {} values for a {rows}x{cols} grid, got {}",
                rows * cols,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(CscError::invalid("grid values must be finite"));
        }
        Ok(Self { rows, cols, values })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        check_dims(rows, cols)?;
        let mut values = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                values.push(f(r, c));
            }
        }
        Self::from_vec(rows, cols, values)
    }

    /// A grid of zeros with a single one at `(row, col)`.
    pub fn impulse(rows: usize, cols: usize, row: usize, col: usize) -> Result<Self> {
        let mut g = Self::zeros(rows, cols)?;
        if row >= rows || col >= cols {
            return Err(CscError::invalid(format!(
                "impulse position ({row}, {col}) outside {rows}x{cols} grid"
            )));
        }
        g.values[row * cols + col] = 1.0;
        Ok(g)
    }

    pub(crate) fn from_raw(rows: usize, cols: usize, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), rows * cols);
        Self { rows, cols, values }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.values[row * self.cols + col] = value;
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.values[row * self.cols..(row + 1) * self.cols]
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, col)).collect()
    }

    pub fn transpose(&self) -> SignalGrid {
        let mut out = vec![0.0; self.values.len()];
        for r in 0..self.rows {
            for c in 0..self.cols {
                out[c * self.rows + r] = self.values[r * self.cols + c];
            }
        }
        SignalGrid::from_raw(self.cols, self.rows, out)
    }

    /// Copy of the `rows x cols` window whose top-left corner is `(row0, col0)`.
    pub fn crop(&self, row0: usize, col0: usize, rows: usize, cols: usize) -> Result<SignalGrid> {
        check_dims(rows, cols)?;
        if row0 + rows > self.rows || col0 + cols > self.cols {
            return Err(CscError::invalid(format!(
                "crop window {rows}x{cols} at ({row0}, {col0}) exceeds {}x{} grid",
                self.rows, self.cols
            )));
        }
        let mut out = Vec::with_capacity(rows * cols);
        for r in row0..row0 + rows {
            out.extend_from_slice(&self.row(r)[col0..col0 + cols]);
        }
        Ok(SignalGrid::from_raw(rows, cols, out))
    }

    /// Circular shift: output `(r, c)` takes input `(r - dr, c - dc)` modulo the grid.
    pub fn roll(&self, dr: usize, dc: usize) -> SignalGrid {
        let mut out = vec![0.0; self.values.len()];
        for r in 0..self.rows {
            let rr = (r + dr) % self.rows;
            for c in 0..self.cols {
                let cc = (c + dc) % self.cols;
                out[rr * self.cols + cc] = self.values[r * self.cols + c];
            }
        }
        SignalGrid::from_raw(self.rows, self.cols, out)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> SignalGrid {
        SignalGrid::from_raw(self.rows, self.cols, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn same_dims(&self, other: &SignalGrid) -> bool {
        self.dims() == other.dims()
    }

    pub(crate) fn ensure_dims(&self, rows: usize, cols: usize, what: &str) -> Result<()> {
        if self.dims() != (rows, cols) {
            return Err(CscError::invalid(format!(
                "{what} is {}x{}, expected {rows}x{cols}",
                self.rows, self.cols
            )));
        }
        Ok(())
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn dot(&self, other: &SignalGrid) -> f64 {
        debug_assert!(self.same_dims(other));
        self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum()
    }

    /// `self += alpha * other`
    pub fn axpy(&mut self, alpha: f64, other: &SignalGrid) {
        debug_assert!(self.same_dims(other));
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += alpha * b;
        }
    }

    pub fn scale(&mut self, alpha: f64) {
        self.values.iter_mut().for_each(|v| *v *= alpha);
    }

    /// Elementwise `self - other`.
    pub fn sub(&self, other: &SignalGrid) -> SignalGrid {
        debug_assert!(self.same_dims(other));
        SignalGrid::from_raw(
            self.rows,
            self.cols,
            self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
        )
    }

    /// Elementwise `self + other`.
    pub fn add(&self, other: &SignalGrid) -> SignalGrid {
        debug_assert!(self.same_dims(other));
        SignalGrid::from_raw(
            self.rows,
            self.cols,
            self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        )
    }

    pub fn max_abs_diff(&self, other: &SignalGrid) -> f64 {
        debug_assert!(self.same_dims(other));
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

pub(crate) fn check_dims(rows: usize, cols: usize) -> Result<()> {
    if rows == 0 || cols == 0 {
        return Err(CscError::invalid(format!("grid dimensions must be positive, got {rows}x{cols}")));
    }
    rows.checked_mul(cols)
        .ok_or_else(|| CscError::invalid(format!("grid dimensions {rows}x{cols} overflow")))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_dimension_rejected() {
        assert!(SignalGrid::zeros(0, 3).is_err());
        assert!(SignalGrid::zeros(3, 0).is_err());
    }

    #[test]
    fn from_vec_checks_length_and_finiteness() {
        assert!(SignalGrid::from_vec(2, 2, vec![1.0; 3]).is_err());
        assert!(SignalGrid::from_vec(1, 2, vec![1.0, f64::NAN]).is_err());
        assert!(SignalGrid::from_vec(1, 2, vec![1.0, 2.0]).is_ok());
    }

    #[test]
    fn roll_wraps() {
        let g = SignalGrid::from_vec(2, 3, vec![1., 2., 3., 4., 5., 6.]).unwrap();
        let r = g.roll(1, 1);
        assert_eq!(r.as_slice(), &[6., 4., 5., 3., 1., 2.]);
    }

    #[test]
    fn crop_and_transpose() {
        let g = SignalGrid::from_fn(3, 4, |r, c| (r * 4 + c) as f64).unwrap();
        let c = g.crop(1, 1, 2, 2).unwrap();
        assert_eq!(c.as_slice(), &[5., 6., 9., 10.]);
        assert!(g.crop(2, 2, 2, 2).is_err());
        let t = g.transpose();
        assert_eq!(t.dims(), (4, 3));
        assert_eq!(t.get(3, 2), g.get(2, 3));
    }
}
