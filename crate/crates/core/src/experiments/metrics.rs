use crate::error::{CscError, Result};
use crate::grid::SignalGrid;
use crate::solver::MaskSpec;

/// Peak signal-to-noise ratio in dB for unit-peak images, with the mean
/// squared error taken over the active pixels of `region`. Identical inputs
/// give `+inf`.
pub fn psnr(reference: &SignalGrid, estimate: &SignalGrid, region: &MaskSpec) -> Result<f64> {
    if !reference.same_dims(estimate) || reference.dims() != region.dims() {
        return Err(CscError::invalid(format!(
            "psnr inputs disagree: reference {:?}, estimate {:?}, region {:?}",
            reference.dims(),
            estimate.dims(),
            region.dims()
        )));
    }
    let (sum, count) = reference
        .as_slice()
        .iter()
        .zip(estimate.as_slice())
        .zip(region.weights().as_slice())
        .filter(|(_, &w)| w > 0.0)
        .fold((0.0, 0usize), |(s, n), ((a, b), _)| (s + (a - b) * (a - b), n + 1));
    if count == 0 {
        return Err(CscError::invalid("psnr region is empty"));
    }
    let mse = sum / count as f64;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (1.0 / mse).log10())
}
