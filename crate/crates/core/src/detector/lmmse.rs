//! Full-size linear MMSE detector used as the baseline.

use num_complex::Complex64;

use crate::channel::DdChannel;
use crate::constellation::Constellation;
use crate::error::{Error, Result};
use crate::frame::{FrameVector, Layout};
use crate::linalg::{solve_hpd, CMatrix};

/// `x̂ = H^H (H H^H + N0 I)^{-1} y`, assuming a unit-energy prior.
pub fn lmmse_estimate(h: &CMatrix, y: &[Complex64], n0: f64) -> Result<Vec<Complex64>> {
    if y.len() != h.rows() {
        return Err(Error::LengthMismatch {
            expected: h.rows(),
            got: y.len(),
        });
    }
    let mut a = h.gram_adjoint();
    for i in 0..a.rows() {
        a[(i, i)] += n0;
    }
    let z = solve_hpd(a, y).map_err(|e| Error::Numerical(format!("full L-MMSE: {e}")))?;
    Ok(h.adjoint_mul_vec(&z))
}

/// L-MMSE estimate followed by nearest-point slicing, in whatever coordinates
/// `h` and `y` share.
pub fn lmmse_slice(h: &CMatrix, y: &[Complex64], n0: f64, constellation: &Constellation) -> Result<Vec<usize>> {
    Ok(lmmse_estimate(h, y, n0)?
        .into_iter()
        .map(|z| constellation.nearest(z))
        .collect())
}

/// Baseline detector on the unprecoded DD channel. Returns constellation
/// indices in original DD order.
pub fn full_lmmse_detect(
    y: &FrameVector,
    channel: &DdChannel,
    n0: f64,
    constellation: &Constellation,
) -> Result<Vec<usize>> {
    y.expect_layout(Layout::DdOriginal)?;
    lmmse_slice(channel.matrix(), y.entries(), n0, constellation)
}
