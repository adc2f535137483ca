//! DFT-domain convolution and the frequency-domain coefficient solve.
//!
//! Filters are zero-embedded at the top-left corner of the working grid, so
//! every convolution here is exactly circular. Forward transforms are
//! unnormalized and inverse transforms carry the `1 / (rows * cols)` factor.
//!
//! Internally the real-input symmetry is exploited: a grid of `rows x cols`
//! is represented by its `rows x (cols / 2 + 1)` half spectrum, stored
//! column-major (one contiguous run of `rows` bins per retained column
//! frequency) so the column transforms run over contiguous memory.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use rustfft::{Fft, FftPlanner};

use crate::error::{CscError, Result};
use crate::grid::{check_dims, SignalGrid};

/// Tolerance on the imaginary residue discarded by [`idft2`], relative to the
/// magnitude of the real part.
const IMAG_RESIDUE_TOL: f64 = 1e-10;

/// A full complex 2-D array, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexGrid {
    rows: usize,
    cols: usize,
    values: Vec<Complex64>,
}

impl ComplexGrid {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.values[row * self.cols + col]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.values
    }

    pub fn from_vec(rows: usize, cols: usize, values: Vec<Complex64>) -> Result<Self> {
        check_dims(rows, cols)?;
        if values.len() != rows * cols {
            return Err(CscError::invalid(format!(
                "expected {} spectrum bins, got {}",
                rows * cols,
                values.len()
            )));
        }
        Ok(Self { rows, cols, values })
    }
}

/// Cached transform plans for one grid size.
pub struct Fft2 {
    rows: usize,
    cols: usize,
    half: usize,
    r2c: Arc<dyn RealToComplex<f64>>,
    c2r: Arc<dyn ComplexToReal<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
    row_fwd: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Fft2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Fft2")
            .field("rows", &self.rows)
            .field("cols", &self.cols)
            .finish()
    }
}

impl Fft2 {
    pub fn new(rows: usize, cols: usize) -> Result<Self> {
        check_dims(rows, cols)?;
        let mut real = RealFftPlanner::<f64>::new();
        let mut cplx = FftPlanner::<f64>::new();
        Ok(Self {
            rows,
            cols,
            half: cols / 2 + 1,
            r2c: real.plan_fft_forward(cols),
            c2r: real.plan_fft_inverse(cols),
            col_fwd: cplx.plan_fft_forward(rows),
            col_inv: cplx.plan_fft_inverse(rows),
            row_fwd: cplx.plan_fft_forward(cols),
            row_inv: cplx.plan_fft_inverse(cols),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Number of bins in a half spectrum.
    pub fn spectrum_len(&self) -> usize {
        self.rows * self.half
    }

    /// Position of frequency `(row_freq, col_freq)` in a half spectrum, for
    /// `col_freq <= cols / 2`.
    pub fn bin_index(&self, row_freq: usize, col_freq: usize) -> usize {
        debug_assert!(col_freq < self.half && row_freq < self.rows);
        col_freq * self.rows + row_freq
    }

    pub fn zero_spectrum(&self) -> Vec<Complex64> {
        vec![Complex64::new(0.0, 0.0); self.spectrum_len()]
    }

    /// Half-spectrum forward transform of a real row-major grid.
    pub fn forward_into(&self, input: &[f64], out: &mut [Complex64]) {
        debug_assert_eq!(input.len(), self.rows * self.cols);
        debug_assert_eq!(out.len(), self.spectrum_len());
        let mut row_in = self.r2c.make_input_vec();
        let mut row_out = self.r2c.make_output_vec();
        let mut scratch = self.r2c.make_scratch_vec();
        for r in 0..self.rows {
            row_in.copy_from_slice(&input[r * self.cols..(r + 1) * self.cols]);
            self.r2c
                .process_with_scratch(&mut row_in, &mut row_out, &mut scratch)
                .expect("real forward transform buffer sizes are fixed by the plan");
            for (k, v) in row_out.iter().enumerate() {
                out[k * self.rows + r] = *v;
            }
        }
        self.col_fwd.process(out);
    }

    pub fn forward(&self, input: &SignalGrid) -> Vec<Complex64> {
        let mut out = self.zero_spectrum();
        self.forward_into(input.as_slice(), &mut out);
        out
    }

    /// Inverse of [`Fft2::forward_into`]. The spectrum buffer is used as
    /// workspace and left in an unspecified state.
    pub fn inverse_into(&self, spectrum: &mut [Complex64], out: &mut [f64]) {
        debug_assert_eq!(spectrum.len(), self.spectrum_len());
        debug_assert_eq!(out.len(), self.rows * self.cols);
        self.col_inv.process(spectrum);
        let mut row_in = self.c2r.make_input_vec();
        let mut row_out = self.c2r.make_output_vec();
        let mut scratch = self.c2r.make_scratch_vec();
        let scale = 1.0 / (self.rows * self.cols) as f64;
        for r in 0..self.rows {
            for (k, v) in row_in.iter_mut().enumerate() {
                *v = spectrum[k * self.rows + r];
            }
            // DC and Nyquist bins of a real row are real; drop round-off.
            row_in[0].im = 0.0;
            if self.cols.is_multiple_of(2) {
                row_in[self.half - 1].im = 0.0;
            }
            self.c2r
                .process_with_scratch(&mut row_in, &mut row_out, &mut scratch)
                .expect("real inverse transform buffer sizes are fixed by the plan");
            for (o, v) in out[r * self.cols..(r + 1) * self.cols].iter_mut().zip(&row_out) {
                *o = v * scale;
            }
        }
    }

    pub fn inverse(&self, spectrum: &[Complex64]) -> SignalGrid {
        let mut work = spectrum.to_vec();
        let mut out = vec![0.0; self.rows * self.cols];
        self.inverse_into(&mut work, &mut out);
        SignalGrid::from_raw(self.rows, self.cols, out)
    }

    /// Full complex forward transform of a complex row-major array.
    fn full_forward(&self, data: &mut [Complex64]) {
        self.row_fwd.process(data);
        let mut t = transpose(data, self.rows, self.cols);
        self.col_fwd.process(&mut t);
        data.copy_from_slice(&transpose(&t, self.cols, self.rows));
    }

    fn full_inverse(&self, data: &mut [Complex64]) {
        self.row_inv.process(data);
        let mut t = transpose(data, self.rows, self.cols);
        self.col_inv.process(&mut t);
        data.copy_from_slice(&transpose(&t, self.cols, self.rows));
        let scale = 1.0 / (self.rows * self.cols) as f64;
        data.iter_mut().for_each(|v| *v *= scale);
    }
}

fn transpose(data: &[Complex64], rows: usize, cols: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); data.len()];
    for r in 0..rows {
        for c in 0..cols {
            out[c * rows + r] = data[r * cols + c];
        }
    }
    out
}

/// Unnormalized 2-D DFT of a real grid.
pub fn dft2(g: &SignalGrid) -> Result<ComplexGrid> {
    let plan = Fft2::new(g.rows(), g.cols())?;
    let mut data: Vec<Complex64> = g.as_slice().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    plan.full_forward(&mut data);
    ComplexGrid::from_vec(g.rows(), g.cols(), data)
}

/// Normalized inverse 2-D DFT. The input must be the spectrum of a real
/// grid; an imaginary residue above round-off level is rejected.
pub fn idft2(spectrum: &ComplexGrid) -> Result<SignalGrid> {
    let plan = Fft2::new(spectrum.rows, spectrum.cols)?;
    let mut data = spectrum.values.clone();
    plan.full_inverse(&mut data);
    let scale = data.iter().fold(1.0_f64, |m, v| m.max(v.re.abs()));
    let residue = data.iter().fold(0.0_f64, |m, v| m.max(v.im.abs()));
    if residue > IMAG_RESIDUE_TOL * scale {
        return Err(CscError::invalid(format!(
            "inverse transform has imaginary residue {residue:e}; input is not conjugate symmetric"
        )));
    }
    SignalGrid::from_vec(spectrum.rows, spectrum.cols, data.into_iter().map(|v| v.re).collect())
}

/// An unbound set of dictionary filters with their per-filter l1 weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Dictionary {
    filters: Vec<SignalGrid>,
    weights: Vec<f64>,
}

impl Dictionary {
    pub fn new(filters: Vec<SignalGrid>, weights: Vec<f64>) -> Result<Self> {
        if filters.is_empty() {
            return Err(CscError::invalid("dictionary must contain at least one filter"));
        }
        if filters.len() != weights.len() {
            return Err(CscError::invalid(format!(
                "{} filters but {} weights",
                filters.len(),
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(CscError::invalid(format!("filter weight {w} must be finite and nonnegative")));
        }
        Ok(Self { filters, weights })
    }

    pub fn len(&self) -> usize {
        self.filters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.filters.is_empty()
    }

    pub fn filters(&self) -> &[SignalGrid] {
        &self.filters
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Largest filter extent, as `(rows, cols)`.
    pub fn max_support(&self) -> (usize, usize) {
        self.filters
            .iter()
            .fold((0, 0), |(r, c), f| (r.max(f.rows()), c.max(f.cols())))
    }
}

/// A dictionary bound to a working grid, with cached filter spectra.
#[derive(Debug, Clone)]
pub struct FilterBank {
    dictionary: Dictionary,
    fft: Arc<Fft2>,
    spectra: Vec<Vec<Complex64>>,
    /// Per-bin `1 + sum_m |d_m|^2`.
    gram: Vec<f64>,
}

impl FilterBank {
    pub fn new(dictionary: Dictionary, rows: usize, cols: usize) -> Result<Self> {
        let fft = Arc::new(Fft2::new(rows, cols)?);
        let mut spectra = Vec::with_capacity(dictionary.len());
        let mut gram = vec![1.0; fft.spectrum_len()];
        for (m, f) in dictionary.filters.iter().enumerate() {
            if f.rows() > rows || f.cols() > cols {
                return Err(CscError::invalid(format!(
                    "filter {m} ({}x{}) does not fit the {rows}x{cols} working grid",
                    f.rows(),
                    f.cols()
                )));
            }
            let embedded = embed_top_left(f, rows, cols);
            let spec = fft.forward(&embedded);
            for (g, v) in gram.iter_mut().zip(&spec) {
                *g += v.norm_sqr();
            }
            spectra.push(spec);
        }
        Ok(Self {
            dictionary,
            fft,
            spectra,
            gram,
        })
    }

    pub fn from_filters(filters: Vec<SignalGrid>, weights: Vec<f64>, rows: usize, cols: usize) -> Result<Self> {
        Self::new(Dictionary::new(filters, weights)?, rows, cols)
    }

    pub fn len(&self) -> usize {
        self.dictionary.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dictionary.is_empty()
    }

    pub fn rows(&self) -> usize {
        self.fft.rows()
    }

    pub fn cols(&self) -> usize {
        self.fft.cols()
    }

    pub fn dictionary(&self) -> &Dictionary {
        &self.dictionary
    }

    pub fn filter(&self, m: usize) -> &SignalGrid {
        &self.dictionary.filters[m]
    }

    pub fn weights(&self) -> &[f64] {
        &self.dictionary.weights
    }

    pub fn fft(&self) -> &Fft2 {
        &self.fft
    }

    /// Half spectrum of filter `m` zero-embedded into the working grid.
    pub fn spectrum(&self, m: usize) -> &[Complex64] {
        &self.spectra[m]
    }

    /// Filter `m` zero-embedded at the top-left corner of the working grid.
    pub fn embedded_filter(&self, m: usize) -> SignalGrid {
        embed_top_left(self.filter(m), self.rows(), self.cols())
    }

    pub(crate) fn check_grid(&self, g: &SignalGrid, what: &str) -> Result<()> {
        g.ensure_dims(self.rows(), self.cols(), what)
    }

    pub(crate) fn check_set(&self, x: &CoefficientSet, what: &str) -> Result<()> {
        if x.len() != self.len() {
            return Err(CscError::invalid(format!(
                "{what} has {} maps, filter bank has {}",
                x.len(),
                self.len()
            )));
        }
        x.maps[0].ensure_dims(self.rows(), self.cols(), what)
    }

    /// Transforms every map of a coefficient set.
    pub(crate) fn forward_set(&self, x: &CoefficientSet) -> Vec<Vec<Complex64>> {
        x.maps.iter().map(|g| self.fft.forward(g)).collect()
    }

    /// `sum_{m in filters} d_m * x_m` in the frequency domain.
    pub(crate) fn synthesize_spectrum<I>(&self, x_hat: &[Vec<Complex64>], filters: I) -> Vec<Complex64>
    where
        I: IntoIterator<Item = usize>,
    {
        let mut acc = self.fft.zero_spectrum();
        for m in filters {
            for ((a, d), v) in acc.iter_mut().zip(&self.spectra[m]).zip(&x_hat[m]) {
                *a += d * v;
            }
        }
        acc
    }

    /// Replaces `b_hat` by the solution of `(D^T D + I) x = b` bin by bin.
    ///
    /// Each bin holds a rank-one-plus-identity system `(I + a a^H) x = b`
    /// with `a = conj(d)`, solved via Sherman-Morrison:
    /// `x = b - conj(d) (d^T b) / (1 + |d|^2)`.
    pub(crate) fn solve_spectrum_in_place(&self, b_hat: &mut [Vec<Complex64>]) {
        // bins are processed in blocks so each filter's slice stays in cache
        const BLOCK: usize = 512;
        let n = self.fft.spectrum_len();
        let mut proj = [Complex64::new(0.0, 0.0); BLOCK];
        for lo in (0..n).step_by(BLOCK) {
            let hi = (lo + BLOCK).min(n);
            let proj = &mut proj[..hi - lo];
            proj.fill(Complex64::new(0.0, 0.0));
            for (d, b) in self.spectra.iter().zip(b_hat.iter()) {
                for ((p, d), b) in proj.iter_mut().zip(&d[lo..hi]).zip(&b[lo..hi]) {
                    *p += d * b;
                }
            }
            for (p, g) in proj.iter_mut().zip(&self.gram[lo..hi]) {
                *p /= g;
            }
            for (d, b) in self.spectra.iter().zip(b_hat.iter_mut()) {
                for ((b, d), p) in b[lo..hi].iter_mut().zip(&d[lo..hi]).zip(proj.iter()) {
                    *b -= d.conj() * p;
                }
            }
        }
    }

    pub(crate) fn inverse_grid(&self, spectrum: &mut [Complex64]) -> SignalGrid {
        let mut out = vec![0.0; self.rows() * self.cols()];
        self.fft.inverse_into(spectrum, &mut out);
        SignalGrid::from_raw(self.rows(), self.cols(), out)
    }
}

/// Zero-embeds `f` at the top-left corner of a `rows x cols` grid.
pub fn embed_top_left(f: &SignalGrid, rows: usize, cols: usize) -> SignalGrid {
    let mut out = vec![0.0; rows * cols];
    for r in 0..f.rows() {
        out[r * cols..r * cols + f.cols()].copy_from_slice(f.row(r));
    }
    SignalGrid::from_raw(rows, cols, out)
}

/// The stack of coefficient maps `x_m`, one per filter.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSet {
    maps: Vec<SignalGrid>,
}

impl CoefficientSet {
    pub fn new(maps: Vec<SignalGrid>) -> Result<Self> {
        let first = maps
            .first()
            .ok_or_else(|| CscError::invalid("coefficient set must contain at least one map"))?;
        if maps.iter().any(|g| !g.same_dims(first)) {
            return Err(CscError::invalid("coefficient maps must share the same dimensions"));
        }
        Ok(Self { maps })
    }

    pub fn zeros(count: usize, rows: usize, cols: usize) -> Result<Self> {
        if count == 0 {
            return Err(CscError::invalid("coefficient set must contain at least one map"));
        }
        let zero = SignalGrid::zeros(rows, cols)?;
        Ok(Self {
            maps: vec![zero; count],
        })
    }

    pub(crate) fn from_raw(maps: Vec<SignalGrid>) -> Self {
        Self { maps }
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.maps[0].dims()
    }

    pub fn maps(&self) -> &[SignalGrid] {
        &self.maps
    }

    pub fn maps_mut(&mut self) -> &mut [SignalGrid] {
        &mut self.maps
    }

    pub fn map(&self, m: usize) -> &SignalGrid {
        &self.maps[m]
    }

    pub fn into_maps(self) -> Vec<SignalGrid> {
        self.maps
    }

    pub fn norm_sq(&self) -> f64 {
        self.maps.iter().map(SignalGrid::norm_sq).sum()
    }

    pub fn dot(&self, other: &CoefficientSet) -> f64 {
        self.maps.iter().zip(&other.maps).map(|(a, b)| a.dot(b)).sum()
    }

    /// `self += alpha * other`
    pub fn axpy(&mut self, alpha: f64, other: &CoefficientSet) {
        for (a, b) in self.maps.iter_mut().zip(&other.maps) {
            a.axpy(alpha, b);
        }
    }

    pub fn sub(&self, other: &CoefficientSet) -> CoefficientSet {
        Self::from_raw(self.maps.iter().zip(&other.maps).map(|(a, b)| a.sub(b)).collect())
    }

    pub fn max_abs_diff(&self, other: &CoefficientSet) -> f64 {
        self.maps
            .iter()
            .zip(&other.maps)
            .fold(0.0, |m, (a, b)| m.max(a.max_abs_diff(b)))
    }

    /// `sum_m weights[m] * ||x_m||_1`
    pub fn weighted_l1(&self, weights: &[f64]) -> f64 {
        self.maps.iter().zip(weights).map(|(g, w)| w * g.l1_norm()).sum()
    }
}

/// Circular convolution `d_m * x` on the bank's working grid.
pub fn circ_convolve(bank: &FilterBank, m: usize, x: &SignalGrid) -> Result<SignalGrid> {
    if m >= bank.len() {
        return Err(CscError::invalid(format!("filter index {m} out of range for {} filters", bank.len())));
    }
    bank.check_grid(x, "convolution input")?;
    let mut spec = bank.fft.forward(x);
    for (v, d) in spec.iter_mut().zip(&bank.spectra[m]) {
        *v *= d;
    }
    Ok(bank.inverse_grid(&mut spec))
}

/// `D x = sum_m d_m * x_m`, accumulated in filter index order.
pub fn apply_d(bank: &FilterBank, x: &CoefficientSet) -> Result<SignalGrid> {
    bank.check_set(x, "coefficient set")?;
    let x_hat = bank.forward_set(x);
    let mut acc = bank.synthesize_spectrum(&x_hat, 0..bank.len());
    Ok(bank.inverse_grid(&mut acc))
}

/// `D^T r`: map `m` is the circular correlation of `r` with `d_m`.
pub fn apply_d_adjoint(bank: &FilterBank, r: &SignalGrid) -> Result<CoefficientSet> {
    bank.check_grid(r, "adjoint input")?;
    let r_hat = bank.fft.forward(r);
    let maps = bank
        .spectra
        .iter()
        .map(|d| {
            let mut spec: Vec<Complex64> = d.iter().zip(&r_hat).map(|(d, v)| d.conj() * v).collect();
            bank.inverse_grid(&mut spec)
        })
        .collect();
    Ok(CoefficientSet::from_raw(maps))
}

/// Solves `(D^T D + I) x = rhs` in the frequency domain.
pub fn solve_x_system(bank: &FilterBank, rhs: &CoefficientSet) -> Result<CoefficientSet> {
    bank.check_set(rhs, "right-hand side")?;
    let mut b_hat = bank.forward_set(rhs);
    bank.solve_spectrum_in_place(&mut b_hat);
    let maps = b_hat.iter_mut().map(|s| bank.inverse_grid(s)).collect();
    Ok(CoefficientSet::from_raw(maps))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lcg_grid(rows: usize, cols: usize, seed: u64) -> SignalGrid {
        let mut s = seed;
        SignalGrid::from_fn(rows, cols, |_, _| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        })
        .unwrap()
    }

    #[test]
    fn constant_grid_has_only_dc() {
        let g = SignalGrid::filled(4, 6, 2.5).unwrap();
        let s = dft2(&g).unwrap();
        for r in 0..4 {
            for c in 0..6 {
                let v = s.get(r, c);
                if r == 0 && c == 0 {
                    assert!((v.re - 2.5 * 24.0).abs() < 1e-12 && v.im.abs() < 1e-12);
                } else {
                    assert!(v.norm() < 1e-12, "bin ({r},{c}) = {v}");
                }
            }
        }
    }

    #[test]
    fn impulse_has_flat_spectrum() {
        let g = SignalGrid::impulse(5, 7, 0, 0).unwrap();
        let s = dft2(&g).unwrap();
        assert!(s.as_slice().iter().all(|v| (v - Complex64::new(1.0, 0.0)).norm() < 1e-14));
    }

    #[test]
    fn zero_dims_rejected() {
        assert!(Fft2::new(0, 4).is_err());
        assert!(ComplexGrid::from_vec(0, 1, vec![]).is_err());
    }

    #[test]
    fn idft2_rejects_non_hermitian_input() {
        let mut spec = dft2(&lcg_grid(4, 4, 3)).unwrap();
        spec.values[1] += Complex64::new(0.0, 1.0);
        assert!(idft2(&spec).is_err());
    }

    #[test]
    fn half_spectrum_matches_full_transform() {
        for &(r, c) in &[(6, 8), (7, 5), (1, 9), (10, 1)] {
            let g = lcg_grid(r, c, (r * 31 + c) as u64);
            let full = dft2(&g).unwrap();
            let plan = Fft2::new(r, c).unwrap();
            let half = plan.forward(&g);
            for row in 0..r {
                for col in 0..=c / 2 {
                    let d = (half[plan.bin_index(row, col)] - full.get(row, col)).norm();
                    assert!(d < 1e-12, "({row},{col}) differs by {d}");
                }
            }
            let back = plan.inverse(&half);
            assert!(back.max_abs_diff(&idft2(&full).unwrap()) < 1e-12);
        }
    }

    #[test]
    fn convolve_impulse_returns_embedded_filter() {
        let f = lcg_grid(3, 2, 9);
        let bank = FilterBank::from_filters(vec![f.clone()], vec![1.0], 6, 5).unwrap();
        let out = circ_convolve(&bank, 0, &SignalGrid::impulse(6, 5, 0, 0).unwrap()).unwrap();
        assert!(out.max_abs_diff(&embed_top_left(&f, 6, 5)) < 1e-14);
        let zero = circ_convolve(&bank, 0, &SignalGrid::zeros(6, 5).unwrap()).unwrap();
        assert_eq!(zero.max_abs(), 0.0);
    }

    #[test]
    fn grid_mismatch_rejected() {
        let bank = FilterBank::from_filters(vec![lcg_grid(2, 2, 1)], vec![1.0], 4, 4).unwrap();
        assert!(circ_convolve(&bank, 0, &SignalGrid::zeros(4, 5).unwrap()).is_err());
        assert!(circ_convolve(&bank, 1, &SignalGrid::zeros(4, 4).unwrap()).is_err());
        assert!(apply_d(&bank, &CoefficientSet::zeros(2, 4, 4).unwrap()).is_err());
        assert!(apply_d_adjoint(&bank, &SignalGrid::zeros(3, 4).unwrap()).is_err());
        assert!(solve_x_system(&bank, &CoefficientSet::zeros(1, 4, 3).unwrap()).is_err());
    }

    #[test]
    fn oversized_filter_rejected() {
        assert!(FilterBank::from_filters(vec![lcg_grid(5, 2, 1)], vec![1.0], 4, 4).is_err());
        assert!(Dictionary::new(vec![lcg_grid(1, 1, 1)], vec![-1.0]).is_err());
        assert!(Dictionary::new(vec![lcg_grid(1, 1, 1)], vec![]).is_err());
    }

    #[test]
    fn apply_d_single_impulse_map_copies_filter() {
        let filters = vec![lcg_grid(2, 3, 1), lcg_grid(3, 3, 2), lcg_grid(1, 2, 3)];
        let bank = FilterBank::from_filters(filters, vec![1.0; 3], 5, 6).unwrap();
        let mut x = CoefficientSet::zeros(3, 5, 6).unwrap();
        assert_eq!(apply_d(&bank, &x).unwrap().max_abs(), 0.0);
        x.maps_mut()[1] = SignalGrid::impulse(5, 6, 0, 0).unwrap();
        let out = apply_d(&bank, &x).unwrap();
        assert!(out.max_abs_diff(&bank.embedded_filter(1)) < 1e-14);
    }

    #[test]
    fn adjoint_of_impulse_is_reversed_filter() {
        let f = lcg_grid(3, 3, 5);
        let bank = FilterBank::from_filters(vec![f.clone()], vec![1.0], 5, 4).unwrap();
        let zero = apply_d_adjoint(&bank, &SignalGrid::zeros(5, 4).unwrap()).unwrap();
        assert_eq!(zero.map(0).max_abs(), 0.0);
        let out = apply_d_adjoint(&bank, &SignalGrid::impulse(5, 4, 0, 0).unwrap()).unwrap();
        let emb = bank.embedded_filter(0);
        for r in 0..5 {
            for c in 0..4 {
                let expected = emb.get((5 - r) % 5, (4 - c) % 4);
                assert!((out.map(0).get(r, c) - expected).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn zero_bank_solve_is_identity() {
        let bank = FilterBank::from_filters(vec![SignalGrid::zeros(2, 2).unwrap(); 2], vec![1.0; 2], 4, 6).unwrap();
        let rhs = CoefficientSet::new(vec![lcg_grid(4, 6, 1), lcg_grid(4, 6, 2)]).unwrap();
        let x = solve_x_system(&bank, &rhs).unwrap();
        assert!(x.max_abs_diff(&rhs) < 1e-14);
    }

    #[test]
    fn unit_impulse_filter_halves_rhs() {
        let bank = FilterBank::from_filters(vec![SignalGrid::impulse(1, 1, 0, 0).unwrap()], vec![1.0], 5, 5).unwrap();
        let rhs = CoefficientSet::new(vec![lcg_grid(5, 5, 4)]).unwrap();
        let x = solve_x_system(&bank, &rhs).unwrap();
        let half = rhs.map(0).map(|v| v / 2.0);
        assert!(x.map(0).max_abs_diff(&half) < 1e-14);
    }
}
