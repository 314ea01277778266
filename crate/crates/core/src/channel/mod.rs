//! Effective delay-Doppler channel matrices.
//!
//! Both transceivers produce `y_DD = H_DD x_DD + n_DD` with
//! `H_DD = (F_N ⊗ I_M) H_T (F_N^H ⊗ I_M)`; they differ in the time-domain
//! channel `H_T`. The ISFFT/SFFT model uses a rectangular pulse and a cyclic
//! shift per path ([`isfft`]); the IZT/ZT model uses a sinc pulse, a reduced
//! cyclic prefix and the pulse ambiguity function ([`izt`]).

mod isfft;
mod izt;

pub use isfft::{dd_channel_isfft, time_channel_isfft};
pub use izt::{dd_channel_izt, path_time_matrix_izt, pulse_ambiguity, time_channel_izt, PulseSpec};

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{FrameVector, Layout};
use crate::grid::OtfsGrid;
use crate::linalg::CMatrix;
use crate::paths::{NoiseSpec, PathSet};
use crate::rng::complex_normal;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelSource {
    Isfft,
    Izt,
}

#[derive(Debug, Clone)]
pub struct DdChannel {
    matrix: CMatrix,
    source: ChannelSource,
    grid: OtfsGrid,
    paths: PathSet,
}

impl DdChannel {
    pub fn new(matrix: CMatrix, source: ChannelSource, grid: OtfsGrid, paths: PathSet) -> Result<Self> {
        if matrix.rows() != grid.len() || matrix.cols() != grid.len() {
            return Err(Error::DimensionMismatch(format!(
                "channel is {}x{}, grid needs {n}x{n}",
                matrix.rows(),
                matrix.cols(),
                n = grid.len()
            )));
        }
        Ok(Self {
            matrix,
            source,
            grid,
            paths,
        })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn source(&self) -> ChannelSource {
        self.source
    }

    pub fn grid(&self) -> &OtfsGrid {
        &self.grid
    }

    pub fn paths(&self) -> &PathSet {
        &self.paths
    }
}

/// Unitary `N`-point DFT matrix entries `F[k][n] = e^{-j2πkn/N} / √N`.
fn dft_table(n: usize, inverse: bool) -> Vec<Complex64> {
    let scale = 1.0 / (n as f64).sqrt();
    let sign = if inverse { 1.0 } else { -1.0 };
    let mut t = Vec::with_capacity(n * n);
    for k in 0..n {
        for i in 0..n {
            let ang = sign * 2.0 * std::f64::consts::PI * ((k * i) % n) as f64 / n as f64;
            t.push(Complex64::from_polar(scale, ang));
        }
    }
    t
}

/// Left-multiply every column by `F_N ⊗ I_M` (or `F_N^H ⊗ I_M` when `inverse`).
fn doppler_dft_columns(mat: &mut CMatrix, m: usize, n: usize, inverse: bool) {
    debug_assert_eq!(mat.rows(), m * n);
    let table = dft_table(n, inverse);
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..mat.cols() {
        let col = mat.col_mut(j);
        for delay in 0..m {
            for (k, out) in buf.iter_mut().enumerate() {
                let row = &table[k * n..(k + 1) * n];
                *out = row.iter().enumerate().map(|(t, &w)| w * col[t * m + delay]).sum();
            }
            for (k, &v) in buf.iter().enumerate() {
                col[k * m + delay] = v;
            }
        }
    }
}

/// `(F_N ⊗ I_M) H_T (F_N^H ⊗ I_M)`.
pub(crate) fn dd_from_time(h_t: &CMatrix, grid: &OtfsGrid) -> CMatrix {
    let (m, n) = (grid.m(), grid.n());
    let mut left = h_t.clone();
    doppler_dft_columns(&mut left, m, n, false);
    // H U^H = (U H^H)^H
    let mut t = left.adjoint();
    doppler_dft_columns(&mut t, m, n, false);
    t.adjoint()
}

/// Apply `(F_N ⊗ I_M)` to a single vector; used to map time-domain noise.
pub fn doppler_dft_vector(v: &[Complex64], grid: &OtfsGrid) -> Vec<Complex64> {
    let mut mat = CMatrix::from_col_major(v.len(), 1, v.to_vec()).expect("length");
    doppler_dft_columns(&mut mat, grid.m(), grid.n(), false);
    mat.as_slice().to_vec()
}

/// `y = H x + n`. Passing `None` for the noise gives the noiseless output.
pub fn apply_channel<R: Rng + ?Sized>(
    channel: &DdChannel,
    x: &FrameVector,
    noise: Option<&NoiseSpec>,
    rng: &mut R,
) -> Result<FrameVector> {
    x.expect_layout(Layout::DdOriginal)?;
    if x.len() != channel.grid.len() {
        return Err(Error::LengthMismatch {
            expected: channel.grid.len(),
            got: x.len(),
        });
    }
    let mut y = channel.matrix.mul_vec(x.entries());
    if let Some(noise) = noise {
        for v in &mut y {
            *v += complex_normal(rng, noise.n0());
        }
    }
    Ok(FrameVector::new(y, Layout::DdOriginal))
}
