//! Synthetic boundary diagnostic: a padded image made of a smooth Gaussian
//! surface crossed by two horizontal and two vertical unit-valued lines,
//! decomposed with a three-filter dictionary (one smooth Gaussian filter with
//! zero l1 weight and two line filters).

use crate::boundary::{build_pad_mask, make_init_y1, zero_pad, PadSpec};
use crate::error::{CscError, Result};
use crate::grid::SignalGrid;
use crate::io::{fmt_f64, CsvTable};
use crate::solver::{InitStrategy, IterRecord, MaskSpec, MdSolver, ProbeSpec, SolverConfig};
use crate::spectral::{circ_convolve, CoefficientSet, Dictionary, FilterBank};

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub inner_size: usize,
    pub pad: usize,
    /// Inner-image rows set to unit value.
    pub edge_rows: [usize; 2],
    /// Inner-image columns set to unit value.
    pub edge_cols: [usize; 2],
    pub gaussian_sigma: f64,
    pub filter_size: usize,
    pub dict_gaussian_sigma: f64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            inner_size: 128,
            pad: 16,
            edge_rows: [42, 85],
            edge_cols: [42, 85],
            gaussian_sigma: 32.0,
            filter_size: 16,
            dict_gaussian_sigma: 4.0,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.inner_size == 0 || self.filter_size == 0 {
            return Err(CscError::invalid("image and filter sizes must be positive"));
        }
        let inside = |i: usize| i > 0 && i + 1 < self.inner_size;
        if !self.edge_rows.iter().chain(&self.edge_cols).all(|&i| inside(i)) {
            return Err(CscError::invalid("edge lines must lie strictly inside the inner image"));
        }
        if !(self.gaussian_sigma > 0.0 && self.dict_gaussian_sigma > 0.0) {
            return Err(CscError::invalid("Gaussian widths must be positive"));
        }
        if self.filter_size > self.outer_size() {
            return Err(CscError::invalid("filters do not fit the padded grid"));
        }
        Ok(())
    }

    pub fn outer_size(&self) -> usize {
        self.inner_size + 2 * self.pad
    }

    pub fn pad_spec(&self) -> PadSpec {
        PadSpec::uniform(self.pad)
    }

    /// Padded-grid row of the reported cross-section, midway between the
    /// horizontal lines.
    pub fn cross_section_row(&self) -> usize {
        self.pad + (self.edge_rows[0] + self.edge_rows[1]) / 2
    }

    /// Cross-section column of the first active sample (the artifact
    /// location).
    pub fn artifact_col(&self) -> usize {
        self.pad
    }

    /// Cross-section column of the signal centre.
    pub fn centre_col(&self) -> usize {
        self.outer_size() / 2 - 1
    }
}

/// l1 penalty used by the synthetic experiment. At this level the line
/// filters stay sparse while the smooth filter still carries the surface up
/// to the boundary.
pub const SYNTHETIC_LAMBDA: f64 = 0.003;
/// Penalty parameter used by the synthetic experiment.
pub const SYNTHETIC_RHO: f64 = 5.0;

/// Solver settings for the synthetic experiment.
pub fn synthetic_solver_config(max_iter: usize, strategy: InitStrategy) -> SolverConfig {
    SolverConfig {
        lambda: SYNTHETIC_LAMBDA,
        rho: SYNTHETIC_RHO,
        max_iter,
        init_strategy: strategy,
        probes: None,
    }
}

/// The padded synthetic test image and its mask.
#[derive(Debug, Clone)]
pub struct SyntheticProblem {
    pub inner: SignalGrid,
    pub padded: SignalGrid,
    pub mask: MaskSpec,
    pub pad: PadSpec,
}

pub fn make_synthetic_image(spec: &SyntheticSpec) -> Result<SyntheticProblem> {
    spec.validate()?;
    let n = spec.inner_size;
    let centre = (n as f64 - 1.0) / 2.0;
    let two_var = 2.0 * spec.gaussian_sigma * spec.gaussian_sigma;
    let inner = SignalGrid::from_fn(n, n, |r, c| {
        if spec.edge_rows.contains(&r) || spec.edge_cols.contains(&c) {
            1.0
        } else {
            let (dr, dc) = (r as f64 - centre, c as f64 - centre);
            (-(dr * dr + dc * dc) / two_var).exp()
        }
    })?;
    let pad = spec.pad_spec();
    Ok(SyntheticProblem {
        padded: zero_pad(&inner, pad),
        mask: build_pad_mask(n, n, pad)?,
        inner,
        pad,
    })
}

/// Gaussian surface, horizontal line and vertical line filters with
/// weights `[0, 1, 1]`.
pub fn make_synthetic_dictionary(spec: &SyntheticSpec) -> Result<Dictionary> {
    spec.validate()?;
    let k = spec.filter_size;
    let centre = (k as f64 - 1.0) / 2.0;
    let two_var = 2.0 * spec.dict_gaussian_sigma * spec.dict_gaussian_sigma;
    let gaussian = SignalGrid::from_fn(k, k, |r, c| {
        let (dr, dc) = (r as f64 - centre, c as f64 - centre);
        (-(dr * dr + dc * dc) / two_var).exp()
    })?;
    let horizontal = SignalGrid::from_fn(k, k, |r, _| if r == k / 2 { 1.0 } else { 0.0 })?;
    let vertical = horizontal.transpose();
    Dictionary::new(vec![gaussian, horizontal, vertical], vec![0.0, 1.0, 1.0])
}

/// Per-filter reconstructions `d_m * x_m`, grouped into the smooth
/// component (filter 0) and the edge component (all other filters).
#[derive(Debug, Clone)]
pub struct ComponentDecomposition {
    pub per_filter: Vec<SignalGrid>,
    pub smooth: SignalGrid,
    pub edge: SignalGrid,
    pub reconstruction: SignalGrid,
}

pub fn decompose(bank: &FilterBank, x: &CoefficientSet) -> Result<ComponentDecomposition> {
    let per_filter = x
        .maps()
        .iter()
        .enumerate()
        .map(|(m, xm)| circ_convolve(bank, m, xm))
        .collect::<Result<Vec<_>>>()?;
    let smooth = per_filter[0].clone();
    let mut edge = SignalGrid::zeros(bank.rows(), bank.cols())?;
    for p in &per_filter[1..] {
        edge.axpy(1.0, p);
    }
    let reconstruction = smooth.add(&edge);
    Ok(ComponentDecomposition {
        per_filter,
        smooth,
        edge,
        reconstruction,
    })
}

/// One image row of the reference and the reconstructed components.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossSection {
    pub row: usize,
    pub reference: Vec<f64>,
    pub reconstruction: Vec<f64>,
    pub smooth: Vec<f64>,
    pub edge: Vec<f64>,
}

impl CrossSection {
    pub fn to_csv(&self) -> CsvTable {
        let mut t = CsvTable::new(&["index", "reference", "reconstruction", "smooth", "edge"]);
        for i in 0..self.reference.len() {
            t.push_row([
                i.to_string(),
                fmt_f64(self.reference[i]),
                fmt_f64(self.reconstruction[i]),
                fmt_f64(self.smooth[i]),
                fmt_f64(self.edge[i]),
            ]);
        }
        t
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticRun {
    pub strategy: InitStrategy,
    pub problem: SyntheticProblem,
    pub coefficients: CoefficientSet,
    pub components: ComponentDecomposition,
    pub records: Vec<IterRecord>,
    pub cross_section: CrossSection,
    /// Cross-section columns traced in `IterRecord::probe_values`:
    /// the artifact location, then the signal centre.
    pub probe_cols: [usize; 2],
}

impl SyntheticRun {
    /// Maximum absolute reconstruction error over the active region.
    pub fn reconstruction_error(&self) -> f64 {
        let w = self.problem.mask.weights().as_slice();
        self.components
            .reconstruction
            .as_slice()
            .iter()
            .zip(self.problem.padded.as_slice())
            .zip(w)
            .filter(|(_, &w)| w > 0.0)
            .fold(0.0, |m, ((a, b), _)| m.max((a - b).abs()))
    }

    /// `iter,edge_<col>,...` with one column per probe.
    pub fn probes_csv(&self) -> CsvTable {
        let names: Vec<String> = self.probe_cols.iter().map(|c| format!("edge_{c}")).collect();
        let mut header = vec!["iter"];
        header.extend(names.iter().map(String::as_str));
        let mut t = CsvTable::new(&header);
        for r in &self.records {
            let mut row = vec![r.iter.to_string()];
            row.extend(r.probe_values.iter().map(|&v| fmt_f64(v)));
            t.push_row(row);
        }
        t
    }

    /// Probe trace at cross-section column `col`.
    pub fn probe_trace(&self, col: usize) -> Option<Vec<f64>> {
        let idx = self.probe_cols.iter().position(|&c| c == col)?;
        Some(self.records.iter().map(|r| r.probe_values[idx]).collect())
    }
}

/// Solves the synthetic problem with `cfg.max_iter` iterations and the
/// given initialization; `cfg.init_strategy` and `cfg.probes` are replaced.
pub fn run_synthetic(spec: &SyntheticSpec, strategy: InitStrategy, cfg: &SolverConfig) -> Result<SyntheticRun> {
    let problem = make_synthetic_image(spec)?;
    let (rows, cols) = problem.padded.dims();
    let bank = FilterBank::new(make_synthetic_dictionary(spec)?, rows, cols)?;
    let row = spec.cross_section_row();
    let probe_cols = [spec.artifact_col(), spec.centre_col()];
    let cfg = SolverConfig {
        init_strategy: strategy,
        probes: Some(ProbeSpec {
            points: probe_cols.iter().map(|&c| (row, c)).collect(),
            filters: (1..bank.len()).collect(),
        }),
        ..cfg.clone()
    };
    let init = make_init_y1(strategy, &problem.inner, problem.pad)?;
    let mut solver = MdSolver::new(&bank, &problem.padded, &problem.mask, &cfg, init)?;
    let records = solver.run(cfg.max_iter);
    let coefficients = solver.into_state().x;
    let components = decompose(&bank, &coefficients)?;
    let cross_section = CrossSection {
        row,
        reference: problem.padded.row(row).to_vec(),
        reconstruction: components.reconstruction.row(row).to_vec(),
        smooth: components.smooth.row(row).to_vec(),
        edge: components.edge.row(row).to_vec(),
    };
    Ok(SyntheticRun {
        strategy,
        problem,
        coefficients,
        components,
        records,
        cross_section,
        probe_cols,
    })
}

/// Boundary artifact amplitude: the largest `|edge component|` on the
/// cross-section row within `half_width` samples either side of the left
/// boundary of the active region.
pub fn boundary_artifact(run: &SyntheticRun, half_width: usize) -> f64 {
    let b = run.problem.pad.left;
    let start = b.saturating_sub(half_width);
    let end = (b + half_width).min(run.cross_section.edge.len());
    run.cross_section.edge[start..end].iter().fold(0.0, |m, v| m.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_image_layout() {
        let spec = SyntheticSpec::default();
        let p = make_synthetic_image(&spec).unwrap();
        assert_eq!(p.padded.dims(), (160, 160));
        assert_eq!(p.mask.active_count(), 128 * 128);
        for r in 0..160 {
            for c in 0..160 {
                if !p.mask.is_active(r, c) {
                    assert_eq!(p.padded.get(r, c), 0.0);
                }
            }
        }
        // lines carry unit value; surface elsewhere is below it
        assert_eq!(p.inner.get(42, 10), 1.0);
        assert_eq!(p.inner.get(100, 85), 1.0);
        let centre = (127.0f64 / 2.0 - 63.0).powi(2) * 2.0;
        assert!((p.inner.get(63, 63) - (-centre / 2048.0).exp()).abs() < 1e-15);
        assert!(p.inner.get(0, 0) < 0.14);
    }

    #[test]
    fn synthetic_dictionary_shape() {
        let d = make_synthetic_dictionary(&SyntheticSpec::default()).unwrap();
        assert_eq!(d.weights(), &[0.0, 1.0, 1.0]);
        assert_eq!(d.filters()[1].transpose(), d.filters()[2]);
        let g = &d.filters()[0];
        assert!(g.as_slice().iter().all(|&v| v > 0.0));
        let peak = g.as_slice().iter().cloned().fold(f64::MIN, f64::max);
        for (r, c) in [(7, 7), (7, 8), (8, 7), (8, 8)] {
            assert_eq!(g.get(r, c), peak);
        }
        assert_eq!(d.filters()[1].sum(), 16.0);
    }

    #[test]
    fn probe_geometry() {
        let spec = SyntheticSpec::default();
        assert_eq!(spec.cross_section_row(), 79);
        assert_eq!(spec.artifact_col(), 16);
        assert_eq!(spec.centre_col(), 79);
    }

    #[test]
    fn invalid_spec_rejected() {
        let spec = SyntheticSpec { edge_rows: [0, 85], ..SyntheticSpec::default() };
        assert!(make_synthetic_image(&spec).is_err());
        let spec = SyntheticSpec { gaussian_sigma: 0.0, ..SyntheticSpec::default() };
        assert!(make_synthetic_dictionary(&spec).is_err());
    }
}
