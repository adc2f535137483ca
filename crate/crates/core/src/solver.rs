//! Mask-decoupling ADMM for convolutional sparse coding with a spatial mask
//! on the data fidelity term.
//!
//! The masked problem `min_x 1/2 ||W D x - s||^2 + lambda ||alpha . x||_1` is
//! split with the constraints `x = y0` and `D x = y1`, which moves `W` onto
//! the auxiliary variable `y1` and keeps the `x` subproblem diagonal in the
//! frequency domain. One iteration applies, in order:
//!
//! ```text
//! (D^T D + I) x  = D^T (y1 - u1) + (y0 - u0)
//! y0             = S_{lambda alpha / rho}(x + u0)
//! (W^T W + rho I) y1 = W^T s + rho (D x + u1)
//! u0            += x - y0
//! u1            += D x - y1
//! ```
//!
//! Where `W` is zero the `y1` update reduces to `y1 = D x + u1`, so the
//! masked-out frame of `y1` is never pulled towards the data and its initial
//! value leaks into the converged solution through the unpenalized maps.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{CscError, Result};
use crate::grid::SignalGrid;
use crate::spectral::{apply_d, apply_d_adjoint, CoefficientSet, FilterBank};

/// Diagonal spatial weighting `W` of the data fidelity term.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskSpec {
    weights: SignalGrid,
}

impl MaskSpec {
    pub fn new(weights: SignalGrid) -> Result<Self> {
        if weights.as_slice().iter().any(|&w| !(w >= 0.0)) {
            return Err(CscError::invalid("mask weights must be nonnegative"));
        }
        if !weights.as_slice().contains(&1.0) {
            return Err(CscError::invalid("mask has an empty active region"));
        }
        Ok(Self { weights })
    }

    /// The identity mask.
    pub fn ones(rows: usize, cols: usize) -> Result<Self> {
        Self::new(SignalGrid::filled(rows, cols, 1.0)?)
    }

    pub fn weights(&self) -> &SignalGrid {
        &self.weights
    }

    pub fn dims(&self) -> (usize, usize) {
        self.weights.dims()
    }

    /// Number of pixels with nonzero weight.
    pub fn active_count(&self) -> usize {
        self.weights.as_slice().iter().filter(|&&w| w > 0.0).count()
    }

    pub fn is_active(&self, row: usize, col: usize) -> bool {
        self.weights.get(row, col) > 0.0
    }

    /// `W g`
    pub fn apply(&self, g: &SignalGrid) -> SignalGrid {
        SignalGrid::from_raw(
            g.rows(),
            g.cols(),
            g.as_slice().iter().zip(self.weights.as_slice()).map(|(v, w)| v * w).collect(),
        )
    }
}

/// How the auxiliary signal variable `y1` is initialized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InitStrategy {
    /// All zeros.
    Zero,
    /// The zero-padded input signal.
    ZeroPad,
    /// The input signal with its frame filled by symmetric reflection.
    SymmetricExtend,
}

impl InitStrategy {
    pub const ALL: [InitStrategy; 3] = [InitStrategy::Zero, InitStrategy::ZeroPad, InitStrategy::SymmetricExtend];

    pub fn name(self) -> &'static str {
        match self {
            InitStrategy::Zero => "zero",
            InitStrategy::ZeroPad => "zeropad",
            InitStrategy::SymmetricExtend => "symext",
        }
    }
}

impl fmt::Display for InitStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for InitStrategy {
    type Err = CscError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "zero" => Ok(InitStrategy::Zero),
            "zeropad" | "zp" => Ok(InitStrategy::ZeroPad),
            "symext" | "se" => Ok(InitStrategy::SymmetricExtend),
            other => Err(CscError::invalid(format!(
                "unknown initialization '{other}' (expected zero, zeropad or symext)"
            ))),
        }
    }
}

/// Pixels at which a partial reconstruction `sum_{m in filters} d_m * x_m`
/// is sampled after every iteration.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ProbeSpec {
    pub points: Vec<(usize, usize)>,
    pub filters: Vec<usize>,
}

/// Default ADMM penalty for a given regularization weight.
pub fn default_rho(lambda: f64) -> f64 {
    10.0 * lambda + 0.1
}

pub const DEFAULT_LAMBDA: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub lambda: f64,
    pub rho: f64,
    pub max_iter: usize,
    pub init_strategy: InitStrategy,
    pub probes: Option<ProbeSpec>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            lambda: DEFAULT_LAMBDA,
            rho: default_rho(DEFAULT_LAMBDA),
            max_iter: 500,
            init_strategy: InitStrategy::ZeroPad,
            probes: None,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(CscError::invalid(format!("lambda must be finite and nonnegative, got {}", self.lambda)));
        }
        if !(self.rho > 0.0) || !self.rho.is_finite() {
            return Err(CscError::invalid(format!("rho must be finite and positive, got {}", self.rho)));
        }
        if self.max_iter == 0 {
            return Err(CscError::invalid("max_iter must be at least 1"));
        }
        Ok(())
    }
}

/// ADMM iterates. `dx` caches `D x` for the current `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct MdSolverState {
    pub x: CoefficientSet,
    pub y0: CoefficientSet,
    pub u0: CoefficientSet,
    pub y1: SignalGrid,
    pub u1: SignalGrid,
    pub dx: SignalGrid,
    pub iter: usize,
}

impl MdSolverState {
    /// All variables zero except `y1`.
    pub fn initial(num_filters: usize, init_y1: SignalGrid) -> Result<Self> {
        let (rows, cols) = init_y1.dims();
        let zeros = CoefficientSet::zeros(num_filters, rows, cols)?;
        let zero = SignalGrid::zeros(rows, cols)?;
        Ok(Self {
            x: zeros.clone(),
            y0: zeros.clone(),
            u0: zeros,
            y1: init_y1,
            u1: zero.clone(),
            dx: zero,
            iter: 0,
        })
    }
}

/// Diagnostics recorded after one iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct IterRecord {
    /// 1-based index of the completed iteration.
    pub iter: usize,
    /// Masked functional evaluated at `x`.
    pub functional_masked: f64,
    /// Masked functional evaluated at `y0`.
    pub functional_masked_y0: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub probe_values: Vec<f64>,
}

/// Elementwise `sign(u) max(0, |u| - gamma_m)` with one threshold per map.
pub fn soft_threshold(u: &CoefficientSet, gamma: &[f64]) -> Result<CoefficientSet> {
    if gamma.len() != u.len() {
        return Err(CscError::invalid(format!(
            "{} thresholds for {} coefficient maps",
            gamma.len(),
            u.len()
        )));
    }
    if let Some(g) = gamma.iter().find(|g| !(**g >= 0.0)) {
        return Err(CscError::invalid(format!("threshold {g} must be nonnegative")));
    }
    let maps = u
        .maps()
        .iter()
        .zip(gamma)
        .map(|(m, &g)| m.map(|v| shrink(v, g)))
        .collect();
    Ok(CoefficientSet::from_raw(maps))
}

#[inline]
fn shrink(v: f64, g: f64) -> f64 {
    if v > g {
        v - g
    } else if v < -g {
        v + g
    } else {
        0.0
    }
}

fn check_signal_and_mask(bank: &FilterBank, s: &SignalGrid, mask: &MaskSpec) -> Result<()> {
    bank.check_grid(s, "signal")?;
    bank.check_grid(mask.weights(), "mask")
}

/// Masked functional given a precomputed `D x`.
fn functional_with_dx(dx: &SignalGrid, x: &CoefficientSet, weights: &[f64], s: &SignalGrid, mask: &MaskSpec, lambda: f64) -> f64 {
    let data: f64 = dx
        .as_slice()
        .iter()
        .zip(s.as_slice())
        .zip(mask.weights().as_slice())
        .map(|((d, s), w)| {
            let r = w * (d - s);
            r * r
        })
        .sum();
    0.5 * data + lambda * x.weighted_l1(weights)
}

/// `1/2 ||W (D x - s)||^2 + lambda sum_m alpha_m ||x_m||_1`
pub fn functional_masked(
    x: &CoefficientSet,
    bank: &FilterBank,
    s: &SignalGrid,
    mask: &MaskSpec,
    lambda: f64,
) -> Result<f64> {
    check_signal_and_mask(bank, s, mask)?;
    let dx = apply_d(bank, x)?;
    Ok(functional_with_dx(&dx, x, bank.weights(), s, mask, lambda))
}

/// Primal and dual residual norms of the stacked constraint `(x, Dx) = (y0, y1)`:
/// `||(x - y0, Dx - y1)||` and `rho ||(y0' - y0) + D^T (y1' - y1)||`.
pub fn residuals(prev: &MdSolverState, next: &MdSolverState, bank: &FilterBank, rho: f64) -> Result<(f64, f64)> {
    bank.check_set(&next.x, "state")?;
    bank.check_set(&prev.y0, "previous state")?;
    let primal = (next.x.sub(&next.y0).norm_sq() + next.dx.sub(&next.y1).norm_sq()).sqrt();
    let mut dual = apply_d_adjoint(bank, &next.y1.sub(&prev.y1))?;
    dual.axpy(1.0, &next.y0);
    dual.axpy(-1.0, &prev.y0);
    Ok((primal, rho * dual.norm_sq().sqrt()))
}

/// Frequency-domain copies of the state variables that enter the `x`
/// update. The duals are advanced linearly in both domains, so each
/// iteration only transforms `y0`, `y1` and the inverse of `x`.
struct SpectralCache {
    y0: Vec<Vec<Complex64>>,
    u0: Vec<Vec<Complex64>>,
    y1: Vec<Complex64>,
    u1: Vec<Complex64>,
}

impl SpectralCache {
    fn from_state(bank: &FilterBank, state: &MdSolverState) -> Self {
        Self {
            y0: bank.forward_set(&state.y0),
            u0: bank.forward_set(&state.u0),
            y1: bank.fft().forward(&state.y1),
            u1: bank.fft().forward(&state.u1),
        }
    }
}

/// Drives the ADMM iteration for one problem instance.
pub struct MdSolver<'a> {
    bank: &'a FilterBank,
    s: &'a SignalGrid,
    mask: &'a MaskSpec,
    cfg: &'a SolverConfig,
    state: MdSolverState,
    spectra: SpectralCache,
    thresholds: Vec<f64>,
}

impl<'a> MdSolver<'a> {
    pub fn new(
        bank: &'a FilterBank,
        s: &'a SignalGrid,
        mask: &'a MaskSpec,
        cfg: &'a SolverConfig,
        init_y1: SignalGrid,
    ) -> Result<Self> {
        bank.check_grid(&init_y1, "initial y1")?;
        let state = MdSolverState::initial(bank.len(), init_y1)?;
        Self::from_state(bank, s, mask, cfg, state)
    }

    pub fn from_state(
        bank: &'a FilterBank,
        s: &'a SignalGrid,
        mask: &'a MaskSpec,
        cfg: &'a SolverConfig,
        state: MdSolverState,
    ) -> Result<Self> {
        cfg.validate()?;
        check_signal_and_mask(bank, s, mask)?;
        for (set, name) in [(&state.x, "x"), (&state.y0, "y0"), (&state.u0, "u0")] {
            bank.check_set(set, name)?;
        }
        for (g, name) in [(&state.y1, "y1"), (&state.u1, "u1"), (&state.dx, "dx")] {
            bank.check_grid(g, name)?;
        }
        if let Some(p) = &cfg.probes {
            if let Some(&(r, c)) = p.points.iter().find(|(r, c)| *r >= bank.rows() || *c >= bank.cols()) {
                return Err(CscError::invalid(format!("probe point ({r}, {c}) outside the working grid")));
            }
            if let Some(m) = p.filters.iter().find(|&&m| m >= bank.len()) {
                return Err(CscError::invalid(format!("probe filter {m} out of range")));
            }
        }
        let thresholds = bank.weights().iter().map(|a| cfg.lambda * a / cfg.rho).collect();
        let spectra = SpectralCache::from_state(bank, &state);
        Ok(Self {
            bank,
            s,
            mask,
            cfg,
            state,
            spectra,
            thresholds,
        })
    }

    pub fn state(&self) -> &MdSolverState {
        &self.state
    }

    pub fn into_state(self) -> MdSolverState {
        self.state
    }

    /// Applies one full ADMM iteration and returns its diagnostics.
    pub fn step(&mut self) -> IterRecord {
        let bank = self.bank;
        let fft = bank.fft();
        let rho = self.cfg.rho;
        let prev = &self.state;
        let cache = &self.spectra;

        // x update, solved per frequency bin
        let r_hat: Vec<Complex64> = cache.y1.iter().zip(&cache.u1).map(|(y, u)| y - u).collect();
        let mut x_hat: Vec<Vec<Complex64>> = (0..bank.len())
            .map(|m| {
                cache.y0[m]
                    .iter()
                    .zip(&cache.u0[m])
                    .zip(bank.spectrum(m))
                    .zip(&r_hat)
                    .map(|(((y, u), d), r)| y - u + d.conj() * r)
                    .collect()
            })
            .collect();
        bank.solve_spectrum_in_place(&mut x_hat);

        let dx_hat = bank.synthesize_spectrum(&x_hat, 0..bank.len());
        let probe_values = match &self.cfg.probes {
            Some(p) => {
                let mut spec = bank.synthesize_spectrum(&x_hat, p.filters.iter().copied());
                let partial = bank.inverse_grid(&mut spec);
                p.points.iter().map(|&(r, c)| partial.get(r, c)).collect()
            }
            None => Vec::new(),
        };
        let x = CoefficientSet::from_raw(x_hat.iter().map(|s| bank.inverse_grid(&mut s.clone())).collect());
        let dx = bank.inverse_grid(&mut dx_hat.clone());

        // y0 update
        let mut shifted = x.clone();
        shifted.axpy(1.0, &prev.u0);
        let y0 = soft_threshold(&shifted, &self.thresholds).expect("thresholds validated at construction");

        // y1 update, a diagonal solve
        let y1_vals = dx
            .as_slice()
            .iter()
            .zip(prev.u1.as_slice())
            .zip(self.s.as_slice().iter().zip(self.mask.weights().as_slice()))
            .map(|((d, u), (s, w))| (w * s + rho * (d + u)) / (w * w + rho))
            .collect();
        let y1 = SignalGrid::from_raw(dx.rows(), dx.cols(), y1_vals);

        // scaled dual updates
        let mut u0 = prev.u0.clone();
        u0.axpy(1.0, &x);
        u0.axpy(-1.0, &y0);
        let mut u1 = prev.u1.clone();
        u1.axpy(1.0, &dx);
        u1.axpy(-1.0, &y1);

        let y0_hat = bank.forward_set(&y0);
        let y1_hat = fft.forward(&y1);
        let mut u0_hat = cache.u0.clone();
        for ((u, x), y) in u0_hat.iter_mut().zip(&x_hat).zip(&y0_hat) {
            for ((u, x), y) in u.iter_mut().zip(x).zip(y) {
                *u += x - y;
            }
        }
        let u1_hat: Vec<Complex64> = cache
            .u1
            .iter()
            .zip(&dx_hat)
            .zip(&y1_hat)
            .map(|((u, d), y)| u + d - y)
            .collect();

        let primal = (x.sub(&y0).norm_sq() + dx.sub(&y1).norm_sq()).sqrt();
        let dual = rho * dual_norm_spectral(bank, &cache.y0, &y0_hat, &cache.y1, &y1_hat);

        let f_x = functional_with_dx(&dx, &x, bank.weights(), self.s, self.mask, self.cfg.lambda);
        let dy0 = bank.inverse_grid(&mut bank.synthesize_spectrum(&y0_hat, 0..bank.len()));
        let f_y0 = functional_with_dx(&dy0, &y0, bank.weights(), self.s, self.mask, self.cfg.lambda);

        let iter = prev.iter + 1;
        self.state = MdSolverState {
            x,
            y0,
            u0,
            y1,
            u1,
            dx,
            iter,
        };
        self.spectra = SpectralCache {
            y0: y0_hat,
            u0: u0_hat,
            y1: y1_hat,
            u1: u1_hat,
        };
        IterRecord {
            iter,
            functional_masked: f_x,
            functional_masked_y0: f_y0,
            primal_residual: primal,
            dual_residual: dual,
            probe_values,
        }
    }

    /// Runs `iters` iterations and collects their records.
    pub fn run(&mut self, iters: usize) -> Vec<IterRecord> {
        (0..iters).map(|_| self.step()).collect()
    }
}

/// `||(y0' - y0) + D^T (y1' - y1)||` evaluated on half spectra via
/// Parseval's identity.
fn dual_norm_spectral(
    bank: &FilterBank,
    y0_prev: &[Vec<Complex64>],
    y0_next: &[Vec<Complex64>],
    y1_prev: &[Complex64],
    y1_next: &[Complex64],
) -> f64 {
    let (rows, cols) = (bank.rows(), bank.cols());
    let dy1: Vec<Complex64> = y1_next.iter().zip(y1_prev).map(|(a, b)| a - b).collect();
    // spectrum columns other than DC and Nyquist stand for a conjugate pair
    let weight = |k: usize| if k == 0 || 2 * k == cols { 1.0 } else { 2.0 };
    let mut total = 0.0;
    for m in 0..bank.len() {
        let d = bank.spectrum(m);
        for k in 0..=cols / 2 {
            let span = k * rows..(k + 1) * rows;
            let acc: f64 = y0_next[m][span.clone()]
                .iter()
                .zip(&y0_prev[m][span.clone()])
                .zip(&d[span.clone()])
                .zip(&dy1[span])
                .map(|(((a, b), d), e)| (a - b + d.conj() * e).norm_sqr())
                .sum();
            total += weight(k) * acc;
        }
    }
    (total / (rows * cols) as f64).sqrt()
}

/// One ADMM iteration from `state`.
pub fn md_iterate(
    state: &MdSolverState,
    bank: &FilterBank,
    s: &SignalGrid,
    mask: &MaskSpec,
    cfg: &SolverConfig,
) -> Result<(MdSolverState, IterRecord)> {
    let mut solver = MdSolver::from_state(bank, s, mask, cfg, state.clone())?;
    let record = solver.step();
    Ok((solver.into_state(), record))
}

/// Runs `cfg.max_iter` iterations from zero `x`, `y0` and duals with the
/// given initial `y1`.
pub fn run_md(
    bank: &FilterBank,
    s: &SignalGrid,
    mask: &MaskSpec,
    cfg: &SolverConfig,
    init_y1: SignalGrid,
) -> Result<(CoefficientSet, Vec<IterRecord>)> {
    let mut solver = MdSolver::new(bank, s, mask, cfg, init_y1)?;
    let records = solver.run(cfg.max_iter);
    Ok((solver.into_state().x, records))
}
