use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{CscError, Result};
use crate::grid::SignalGrid;

/// Seed of the bundled stand-in image.
pub const STANDIN_SEED: u64 = 0x5eed;

/// Smooth step of width about one pixel.
fn soft_edge(d: f64) -> f64 {
    0.5 * (1.0 + (d / 0.75).tanh())
}

/// Deterministic grayscale stand-in for a natural test image with values in
/// `[0.05, 0.95]`. Occluding discs with power-law radii are painted back to
/// front over a shaded background, which gives edges at every scale.
pub fn standin_image(size: usize) -> Result<SignalGrid> {
    if size < 8 {
        return Err(CscError::invalid(format!("stand-in image size {size} is below 8")));
    }
    let n = size as f64;
    let mut img = SignalGrid::from_fn(size, size, |r, c| 0.3 + 0.4 * (r + c) as f64 / (2.0 * n))?;
    let mut rng = ChaCha20Rng::seed_from_u64(STANDIN_SEED);
    let (r_min, r_max): (f64, f64) = (1.5, n / 6.0);
    let count = (size * size) / 40;
    for _ in 0..count {
        // inverse-cdf sample of a density proportional to r^-3
        let u: f64 = rng.random();
        let radius = 1.0 / (r_min.powi(-2) - u * (r_min.powi(-2) - r_max.powi(-2))).sqrt();
        let cy = rng.random::<f64>() * n;
        let cx = rng.random::<f64>() * n;
        let level = rng.random_range(0.1..0.9);
        let lo_r = (cy - radius - 2.0).floor().max(0.0) as usize;
        let hi_r = ((cy + radius + 2.0).ceil() as usize).min(size);
        let lo_c = (cx - radius - 2.0).floor().max(0.0) as usize;
        let hi_c = ((cx + radius + 2.0).ceil() as usize).min(size);
        for r in lo_r..hi_r {
            for c in lo_c..hi_c {
                let d = ((r as f64 + 0.5 - cy).powi(2) + (c as f64 + 0.5 - cx).powi(2)).sqrt();
                let a = soft_edge(radius - d);
                let v = img.get(r, c);
                img.set(r, c, v + a * (level - v));
            }
        }
    }
    Ok(img.map(|v| v.clamp(0.05, 0.95)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standin_is_in_range_and_deterministic() {
        let a = standin_image(64).unwrap();
        let b = standin_image(64).unwrap();
        assert_eq!(a, b);
        assert!(a.as_slice().iter().all(|&v| (0.05..=0.95).contains(&v)));
        let mean = a.sum() / a.len() as f64;
        let var = a.as_slice().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / a.len() as f64;
        assert!(var > 1e-3);
    }

    #[test]
    fn tiny_size_rejected() {
        assert!(standin_image(4).is_err());
    }
}
