//! Padding masks and the initial values used for the auxiliary signal
//! variable on the padded frame.

use crate::error::{CscError, Result};
use crate::grid::SignalGrid;
use crate::solver::{InitStrategy, MaskSpec};

/// Pixel counts added on each side of an inner image.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PadSpec {
    pub top: usize,
    pub bottom: usize,
    pub left: usize,
    pub right: usize,
}

impl PadSpec {
    pub fn uniform(pad: usize) -> Self {
        Self {
            top: pad,
            bottom: pad,
            left: pad,
            right: pad,
        }
    }

    pub fn outer_dims(&self, inner_rows: usize, inner_cols: usize) -> (usize, usize) {
        (
            inner_rows + self.top + self.bottom,
            inner_cols + self.left + self.right,
        )
    }

    /// Recovers the inner region of a padded grid.
    pub fn inner_of(&self, outer: &SignalGrid) -> Result<SignalGrid> {
        let rows = outer.rows().saturating_sub(self.top + self.bottom);
        let cols = outer.cols().saturating_sub(self.left + self.right);
        if rows == 0 || cols == 0 {
            return Err(CscError::invalid(format!(
                "padding {self:?} leaves no inner region in a {}x{} grid",
                outer.rows(),
                outer.cols()
            )));
        }
        outer.crop(self.top, self.left, rows, cols)
    }
}

/// Binary mask that is one on the inner rectangle and zero on the frame.
pub fn build_pad_mask(inner_rows: usize, inner_cols: usize, pad: PadSpec) -> Result<MaskSpec> {
    let ones = SignalGrid::filled(inner_rows, inner_cols, 1.0)?;
    MaskSpec::new(zero_pad(&ones, pad))
}

/// Copies `inner` into the active rectangle of a zero frame.
pub fn zero_pad(inner: &SignalGrid, pad: PadSpec) -> SignalGrid {
    let (rows, cols) = pad.outer_dims(inner.rows(), inner.cols());
    let mut out = vec![0.0; rows * cols];
    for r in 0..inner.rows() {
        let start = (r + pad.top) * cols + pad.left;
        out[start..start + inner.cols()].copy_from_slice(inner.row(r));
    }
    SignalGrid::from_raw(rows, cols, out)
}

/// Half-sample symmetric reflection of an outer index onto `0..n`.
///
/// The sample `k` steps outside a boundary equals the inner sample `k - 1`
/// steps inside it, so the edge value appears twice across the boundary.
fn reflect(i: isize, n: usize) -> usize {
    let n = n as isize;
    let j = if i < 0 {
        -i - 1
    } else if i >= n {
        2 * n - 1 - i
    } else {
        i
    };
    debug_assert!((0..n).contains(&j));
    j as usize
}

fn extend_cols(g: &SignalGrid, left: usize, right: usize) -> SignalGrid {
    let cols = g.cols() + left + right;
    SignalGrid::from_fn(g.rows(), cols, |r, c| {
        g.get(r, reflect(c as isize - left as isize, g.cols()))
    })
    .expect("extension keeps dimensions positive")
}

fn extend_rows(g: &SignalGrid, top: usize, bottom: usize) -> SignalGrid {
    let rows = g.rows() + top + bottom;
    SignalGrid::from_fn(rows, g.cols(), |r, c| {
        g.get(reflect(r as isize - top as isize, g.rows()), c)
    })
    .expect("extension keeps dimensions positive")
}

fn check_single_reflection(inner: &SignalGrid, pad: PadSpec) -> Result<()> {
    if pad.top.max(pad.bottom) > inner.rows() || pad.left.max(pad.right) > inner.cols() {
        return Err(CscError::invalid(format!(
            "padding {pad:?} exceeds the {}x{} inner grid; a single reflection cannot fill it",
            inner.rows(),
            inner.cols()
        )));
    }
    Ok(())
}

/// Fills the frame by mirror reflection of `inner` about each boundary.
/// Columns are reflected first, then rows; the corners receive both.
pub fn symmetric_extend(inner: &SignalGrid, pad: PadSpec) -> Result<SignalGrid> {
    check_single_reflection(inner, pad)?;
    let horizontal = extend_cols(inner, pad.left, pad.right);
    Ok(extend_rows(&horizontal, pad.top, pad.bottom))
}

/// Initial value of the auxiliary signal variable for a given strategy.
pub fn make_init_y1(strategy: InitStrategy, inner: &SignalGrid, pad: PadSpec) -> Result<SignalGrid> {
    match strategy {
        InitStrategy::Zero => {
            let (rows, cols) = pad.outer_dims(inner.rows(), inner.cols());
            SignalGrid::zeros(rows, cols)
        }
        InitStrategy::ZeroPad => Ok(zero_pad(inner, pad)),
        InitStrategy::SymmetricExtend => symmetric_extend(inner, pad),
    }
}
