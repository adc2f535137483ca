//! Reproducible experiment pipelines: the synthetic boundary diagnostic and
//! Gaussian-blur deconvolution with a blurred dictionary.

mod deconv;
mod dictionary;
mod metrics;
mod synthetic;
mod testimage;

pub use deconv::{
    blur_dictionary, blur_same_symmetric, make_blur_kernel, prepare_deconv_input, run_deconv, DeconvInput,
    DeconvResult, DeconvSpec,
};
pub use dictionary::{
    decode_dictionary, encode_dictionary, generate_substitute_dictionary, load_dictionary, save_dictionary,
};
pub use metrics::psnr;
pub use synthetic::{
    boundary_artifact, decompose, make_synthetic_dictionary, make_synthetic_image, run_synthetic,
    synthetic_solver_config, ComponentDecomposition, CrossSection, SyntheticProblem, SyntheticRun, SyntheticSpec,
    SYNTHETIC_LAMBDA, SYNTHETIC_RHO,
};
pub use testimage::{standin_image, STANDIN_SEED};

use crate::io::{fmt_f64, CsvTable};
use crate::solver::IterRecord;

/// `iter,functional_x,functional_y0,primal,dual`, one row per record.
pub fn convergence_csv(records: &[IterRecord]) -> CsvTable {
    let mut t = CsvTable::new(&["iter", "functional_x", "functional_y0", "primal", "dual"]);
    for r in records {
        t.push_row([
            r.iter.to_string(),
            fmt_f64(r.functional_masked),
            fmt_f64(r.functional_masked_y0),
            fmt_f64(r.primal_residual),
            fmt_f64(r.dual_residual),
        ]);
    }
    t
}
