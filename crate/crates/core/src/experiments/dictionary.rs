//! Deconvolution dictionaries: a smooth Gaussian filter followed by a
//! multiscale bank of oriented Gabor atoms, and their file form.

use std::f64::consts::PI;
use std::path::Path;

use super::deconv::DeconvSpec;
use crate::error::{CscError, Result};
use crate::grid::SignalGrid;
use crate::io::{decode_array, encode_array};
use crate::spectral::{embed_top_left, Dictionary};

const ORIENTATIONS: usize = 8;

/// Spatial frequencies (cycles per pixel) used at a given atom size; the
/// count is `atoms / (2 * ORIENTATIONS)`, picked from a fixed ladder that
/// stays below the Nyquist rate.
fn frequency_ladder(count: usize, size: usize) -> Vec<f64> {
    let lowest = 1.5 / size as f64;
    let highest = 0.35;
    if count == 1 {
        return vec![(lowest * highest).sqrt()];
    }
    let ratio = (highest / lowest).powf(1.0 / (count - 1) as f64);
    (0..count).map(|i| lowest * ratio.powi(i as i32)).collect()
}

fn gabor(size: usize, theta: f64, freq: f64, phase: f64) -> SignalGrid {
    let centre = (size as f64 - 1.0) / 2.0;
    let sigma = size as f64 / 4.0;
    let (s, c) = theta.sin_cos();
    let mut g = SignalGrid::from_fn(size, size, |r, col| {
        let (y, x) = (r as f64 - centre, col as f64 - centre);
        let along = x * c + y * s;
        let envelope = (-(x * x + y * y) / (2.0 * sigma * sigma)).exp();
        envelope * (2.0 * PI * freq * along + phase).cos()
    })
    .expect("atom size is positive");
    let mean = g.sum() / g.len() as f64;
    g.as_mut_slice().iter_mut().for_each(|v| *v -= mean);
    let norm = g.norm();
    g.scale(1.0 / norm);
    g
}

/// Procedural stand-in for a learned multiscale dictionary.
///
/// Filter 0 is a unit-norm Gaussian with zero l1 weight. Each `(count, size)`
/// group contributes `count` Gabor atoms: eight orientations, even and odd
/// phases, and `count / 16` frequencies. Every atom is zero-mean with unit
/// l2 norm and weight one.
pub fn generate_substitute_dictionary(spec: &DeconvSpec) -> Result<Dictionary> {
    if spec.recon_gaussian_size == 0 || !(spec.recon_gaussian_sigma > 0.0) {
        return Err(CscError::invalid("smooth filter size and width must be positive"));
    }
    let k = spec.recon_gaussian_size;
    let centre = (k as f64 - 1.0) / 2.0;
    let two_var = 2.0 * spec.recon_gaussian_sigma * spec.recon_gaussian_sigma;
    let mut smooth = SignalGrid::from_fn(k, k, |r, c| {
        let (dr, dc) = (r as f64 - centre, c as f64 - centre);
        (-(dr * dr + dc * dc) / two_var).exp()
    })?;
    smooth.scale(1.0 / smooth.norm());

    let mut filters = vec![smooth];
    for &(count, size) in &spec.multiscale {
        let per_freq = 2 * ORIENTATIONS;
        if size < 2 || count == 0 || count % per_freq != 0 {
            return Err(CscError::invalid(format!(
                "atom group of {count} filters at {size}x{size} must be a positive multiple of {per_freq} with size >= 2"
            )));
        }
        for freq in frequency_ladder(count / per_freq, size) {
            for o in 0..ORIENTATIONS {
                let theta = o as f64 * PI / ORIENTATIONS as f64;
                filters.push(gabor(size, theta, freq, 0.0));
                filters.push(gabor(size, theta, freq, PI / 2.0));
            }
        }
    }
    let mut weights = vec![1.0; filters.len()];
    weights[0] = 0.0;
    Dictionary::new(filters, weights)
}

/// Removes all-zero trailing rows and columns, keeping at least one sample.
fn trim_support(g: &SignalGrid) -> SignalGrid {
    let rows = (0..g.rows()).rev().find(|&r| g.row(r).iter().any(|&v| v != 0.0)).map_or(1, |r| r + 1);
    let cols = (0..g.cols())
        .rev()
        .find(|&c| (0..g.rows()).any(|r| g.get(r, c) != 0.0))
        .map_or(1, |c| c + 1);
    g.crop(0, 0, rows, cols).expect("trimmed window lies inside the grid")
}

/// Builds a dictionary from a `CSCB1` array with one filter per plane, each
/// top-left anchored. Trailing zero rows and columns are trimmed from every
/// plane. Plane 0 is the smooth filter and receives weight zero; the rest
/// receive weight one.
pub fn decode_dictionary(bytes: &[u8]) -> Result<Dictionary> {
    let filters: Vec<SignalGrid> = decode_array(bytes)?.iter().map(trim_support).collect();
    let mut weights = vec![1.0; filters.len()];
    weights[0] = 0.0;
    Dictionary::new(filters, weights)
}

/// Encodes a dictionary in the form read by [`decode_dictionary`].
pub fn encode_dictionary(dict: &Dictionary) -> Result<Vec<u8>> {
    let (rows, cols) = dict.max_support();
    let planes: Vec<SignalGrid> = dict.filters().iter().map(|f| embed_top_left(f, rows, cols)).collect();
    encode_array(&planes)
}

pub fn load_dictionary(path: impl AsRef<Path>) -> Result<Dictionary> {
    decode_dictionary(&std::fs::read(path)?)
}

pub fn save_dictionary(path: impl AsRef<Path>, dict: &Dictionary) -> Result<()> {
    std::fs::write(path, encode_dictionary(dict)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn substitute_bank_counts_and_normalization() {
        let d = generate_substitute_dictionary(&DeconvSpec::default()).unwrap();
        assert_eq!(d.len(), 1 + 16 + 32 + 48);
        assert_eq!(d.weights()[0], 0.0);
        assert!(d.weights()[1..].iter().all(|&w| w == 1.0));
        assert_eq!(d.filters()[0].dims(), (64, 64));
        let sizes: Vec<usize> = d.filters()[1..].iter().map(|f| f.rows()).collect();
        assert_eq!(sizes.iter().filter(|&&s| s == 8).count(), 16);
        assert_eq!(sizes.iter().filter(|&&s| s == 12).count(), 32);
        assert_eq!(sizes.iter().filter(|&&s| s == 16).count(), 48);
        for f in &d.filters()[1..] {
            assert!((f.sum() / f.len() as f64).abs() < 1e-12);
            assert!((f.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn frequencies_stay_below_nyquist() {
        for (count, size) in [(1, 8), (2, 12), (3, 16)] {
            let f = frequency_ladder(count, size);
            assert_eq!(f.len(), count);
            assert!(f.iter().all(|&v| v > 0.0 && v < 0.5));
        }
    }

    #[test]
    fn bad_group_rejected() {
        let spec = DeconvSpec { multiscale: vec![(10, 8)], ..DeconvSpec::default() };
        assert!(generate_substitute_dictionary(&spec).is_err());
    }

    #[test]
    fn trim_recovers_native_support() {
        let f = SignalGrid::from_fn(3, 2, |r, c| (r + c + 1) as f64).unwrap();
        assert_eq!(trim_support(&embed_top_left(&f, 8, 8)), f);
        assert_eq!(trim_support(&SignalGrid::zeros(4, 4).unwrap()).dims(), (1, 1));
    }
}
