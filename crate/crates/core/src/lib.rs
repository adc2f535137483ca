//! Convolutional sparse coding with a masked data fidelity term.
//!
//! The solver implements the mask-decoupling ADMM iteration with
//! frequency-domain coefficient updates, and lets the caller choose how the
//! masked-out frame of the auxiliary signal variable is initialized (zeros,
//! zero padding or symmetric extension). The [`experiments`] module builds
//! the synthetic boundary diagnostic and the Gaussian-blur deconvolution
//! pipeline on top of it.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod boundary;
pub mod error;
pub mod experiments;
pub mod grid;
pub mod io;
pub mod solver;
pub mod spectral;

pub use boundary::{build_pad_mask, make_init_y1, symmetric_extend, zero_pad, PadSpec};
pub use error::{CscError, Result};
pub use grid::SignalGrid;
pub use solver::{
    functional_masked, md_iterate, residuals, run_md, soft_threshold, InitStrategy, IterRecord, MaskSpec,
    MdSolver, MdSolverState, ProbeSpec, SolverConfig,
};
pub use spectral::{
    apply_d, apply_d_adjoint, circ_convolve, dft2, idft2, solve_x_system, CoefficientSet, ComplexGrid, Dictionary,
    Fft2, FilterBank,
};
