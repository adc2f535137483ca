//! Gaussian-blur deconvolution: code the blurred, noisy, padded image with a
//! blurred dictionary under the padding mask, then reconstruct the estimate
//! from the same coefficients with the unblurred dictionary.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use super::metrics::psnr;
use crate::boundary::{build_pad_mask, make_init_y1, zero_pad, PadSpec};
use crate::error::{CscError, Result};
use crate::grid::SignalGrid;
use crate::solver::{run_md, IterRecord, MaskSpec, SolverConfig};
use crate::spectral::{apply_d, Dictionary, FilterBank};

#[derive(Debug, Clone, PartialEq)]
pub struct DeconvSpec {
    pub blur_size: usize,
    pub blur_sigma: f64,
    pub noise_sigma: f64,
    /// Seed of the ChaCha20 stream driving the standard normal noise samples,
    /// drawn in row-major order.
    pub noise_seed: u64,
    pub pad: usize,
    pub recon_gaussian_size: usize,
    pub recon_gaussian_sigma: f64,
    /// `(count, size)` groups of square atoms.
    pub multiscale: Vec<(usize, usize)>,
}

impl Default for DeconvSpec {
    fn default() -> Self {
        Self {
            blur_size: 7,
            blur_sigma: 1.0,
            noise_sigma: 0.01,
            noise_seed: 0,
            pad: 39,
            recon_gaussian_size: 64,
            recon_gaussian_sigma: 5.0,
            multiscale: vec![(16, 8), (32, 12), (48, 16)],
        }
    }
}

impl DeconvSpec {
    pub fn validate(&self) -> Result<()> {
        if self.blur_size == 0 {
            return Err(CscError::invalid("blur kernel size must be positive"));
        }
        if !(self.blur_sigma > 0.0) {
            return Err(CscError::invalid("blur width must be positive"));
        }
        if !(self.noise_sigma >= 0.0) || !self.noise_sigma.is_finite() {
            return Err(CscError::invalid("noise level must be finite and nonnegative"));
        }
        Ok(())
    }

    /// Offset of the kernel centre from its top-left corner.
    pub fn blur_centre(&self) -> usize {
        (self.blur_size - 1) / 2
    }
}

/// Sampled Gaussian `size x size` kernel, centred and normalized to unit sum.
pub fn make_blur_kernel(size: usize, sigma: f64) -> Result<SignalGrid> {
    if size == 0 || !(sigma > 0.0) {
        return Err(CscError::invalid("blur kernel size and width must be positive"));
    }
    let centre = (size as f64 - 1.0) / 2.0;
    let mut h = SignalGrid::from_fn(size, size, |r, c| {
        let (dr, dc) = (r as f64 - centre, c as f64 - centre);
        (-(dr * dr + dc * dc) / (2.0 * sigma * sigma)).exp()
    })?;
    h.scale(1.0 / h.sum());
    Ok(h)
}

/// Full linear convolution; the output has `a.rows() + b.rows() - 1` rows.
fn linear_convolve_full(a: &SignalGrid, b: &SignalGrid) -> SignalGrid {
    let rows = a.rows() + b.rows() - 1;
    let cols = a.cols() + b.cols() - 1;
    let mut out = vec![0.0; rows * cols];
    for ar in 0..a.rows() {
        for ac in 0..a.cols() {
            let av = a.get(ar, ac);
            if av == 0.0 {
                continue;
            }
            for br in 0..b.rows() {
                let base = (ar + br) * cols + ac;
                for (bc, bv) in b.row(br).iter().enumerate() {
                    out[base + bc] += av * bv;
                }
            }
        }
    }
    SignalGrid::from_raw(rows, cols, out)
}

/// Convolves every filter with `h` (full support, so no filter energy wraps)
/// and keeps the weights. Blurred filters must fit a `rows x cols` grid.
pub fn blur_dictionary(dict: &Dictionary, h: &SignalGrid, rows: usize, cols: usize) -> Result<Dictionary> {
    let (fr, fc) = dict.max_support();
    if fr + h.rows() - 1 > rows || fc + h.cols() - 1 > cols {
        return Err(CscError::invalid(format!(
            "blurred filters ({}x{}) do not fit the {rows}x{cols} grid",
            fr + h.rows() - 1,
            fc + h.cols() - 1
        )));
    }
    let filters = dict.filters().iter().map(|d| linear_convolve_full(h, d)).collect();
    Dictionary::new(filters, dict.weights().to_vec())
}

/// Centred same-size convolution with half-sample symmetric boundary
/// handling.
pub fn blur_same_symmetric(img: &SignalGrid, h: &SignalGrid) -> Result<SignalGrid> {
    let (cr, cc) = ((h.rows() - 1) / 2, (h.cols() - 1) / 2);
    let reflect = |i: isize, n: usize| -> usize {
        let n = n as isize;
        let mut i = i;
        // repeated reflection covers kernels wider than the image
        loop {
            if i < 0 {
                i = -i - 1;
            } else if i >= n {
                i = 2 * n - 1 - i;
            } else {
                return i as usize;
            }
        }
    };
    SignalGrid::from_fn(img.rows(), img.cols(), |r, c| {
        let mut acc = 0.0;
        for kr in 0..h.rows() {
            let rr = reflect(r as isize + cr as isize - kr as isize, img.rows());
            for kc in 0..h.cols() {
                let cc2 = reflect(c as isize + cc as isize - kc as isize, img.cols());
                acc += h.get(kr, kc) * img.get(rr, cc2);
            }
        }
        acc
    })
}

/// The degraded observation shared by every initialization.
#[derive(Debug, Clone)]
pub struct DeconvInput {
    pub reference: SignalGrid,
    /// Blurred and noisy inner image.
    pub blurred: SignalGrid,
    /// `blurred` zero-padded onto the working grid.
    pub padded: SignalGrid,
    pub mask: MaskSpec,
    pub pad: PadSpec,
    pub kernel: SignalGrid,
    /// PSNR of `blurred` against `reference`.
    pub test_psnr: f64,
}

pub fn prepare_deconv_input(reference: &SignalGrid, spec: &DeconvSpec) -> Result<DeconvInput> {
    spec.validate()?;
    if reference.as_slice().iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(CscError::invalid("reference pixels must lie in [0, 1]"));
    }
    let kernel = make_blur_kernel(spec.blur_size, spec.blur_sigma)?;
    let mut blurred = blur_same_symmetric(reference, &kernel)?;
    if spec.noise_sigma > 0.0 {
        let mut rng = ChaCha20Rng::seed_from_u64(spec.noise_seed);
        for v in blurred.as_mut_slice() {
            let z: f64 = StandardNormal.sample(&mut rng);
            *v += spec.noise_sigma * z;
        }
    }
    let pad = PadSpec::uniform(spec.pad);
    let full = MaskSpec::ones(reference.rows(), reference.cols())?;
    let test_psnr = psnr(reference, &blurred, &full)?;
    Ok(DeconvInput {
        reference: reference.clone(),
        padded: zero_pad(&blurred, pad),
        mask: build_pad_mask(reference.rows(), reference.cols(), pad)?,
        blurred,
        pad,
        kernel,
        test_psnr,
    })
}

#[derive(Debug, Clone)]
pub struct DeconvResult {
    /// Deblurred estimate of the inner image.
    pub estimate: SignalGrid,
    pub psnr: f64,
    pub records: Vec<IterRecord>,
}

/// Codes `input.padded` with the blurred dictionary and reconstructs with
/// `dict`. The reconstruction is shifted by the kernel centre to undo the
/// top-left anchoring of the blur inside the blurred filters.
pub fn run_deconv(input: &DeconvInput, dict: &Dictionary, cfg: &SolverConfig) -> Result<DeconvResult> {
    let (rows, cols) = input.padded.dims();
    let blurred_dict = blur_dictionary(dict, &input.kernel, rows, cols)?;
    let coding_bank = FilterBank::new(blurred_dict, rows, cols)?;
    let recon_bank = FilterBank::new(dict.clone(), rows, cols)?;
    let init = make_init_y1(cfg.init_strategy, &input.blurred, input.pad)?;
    let (x, records) = run_md(&coding_bank, &input.padded, &input.mask, cfg, init)?;
    let (cr, cc) = ((input.kernel.rows() - 1) / 2, (input.kernel.cols() - 1) / 2);
    let full = apply_d(&recon_bank, &x)?.roll(cr, cc);
    let estimate = input.pad.inner_of(&full)?;
    let region = MaskSpec::ones(estimate.rows(), estimate.cols())?;
    let psnr = psnr(&input.reference, &estimate, &region)?;
    Ok(DeconvResult { estimate, psnr, records })
}
