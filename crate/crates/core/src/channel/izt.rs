use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{dd_from_time, ChannelSource, DdChannel};
use crate::error::{Error, Result};
use crate::grid::OtfsGrid;
use crate::linalg::CMatrix;
use crate::paths::{Path, PathSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PulseKind {
    Sinc,
}

/// Transmit pulse and reduced cyclic prefix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseSpec {
    pub kind: PulseKind,
    pub sample_interval: f64,
    pub cp_len: usize,
}

impl PulseSpec {
    pub fn sinc(grid: &OtfsGrid, cp_len: usize) -> Result<Self> {
        if cp_len >= grid.len() {
            return Err(Error::CyclicPrefix(format!(
                "prefix length {cp_len} must be below the frame length {}",
                grid.len()
            )));
        }
        Ok(Self {
            kind: PulseKind::Sinc,
            sample_interval: grid.sample_interval(),
            cp_len,
        })
    }

    /// Prefix covering `max_delay` samples plus four samples of guard for the sinc tails.
    pub fn default_cp_len(max_delay: usize) -> usize {
        max_delay + 4
    }

    pub fn check_paths(&self, paths: &PathSet) -> Result<()> {
        let need = paths.max_delay().ceil() as usize;
        if self.cp_len < need {
            return Err(Error::CyclicPrefix(format!(
                "prefix length {} does not cover the maximum delay of {need} samples",
                self.cp_len
            )));
        }
        Ok(())
    }
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        let px = PI * x;
        px.sin() / px
    }
}

/// Ambiguity function of the unit-energy sinc pulse `p(t) = sinc(t/Ts)/√Ts`,
///
/// `A(τ, ν) = ∫ p(t) p*(t-τ) e^{-j2πν(t-τ)} dt`.
///
/// Both spectra are rectangles of width `1/Ts`; their overlap gives
/// `(1 - |ν|Ts) e^{jπντ} sinc(τ(1/Ts - |ν|))` for `|ν| < 1/Ts` and zero beyond.
pub fn pulse_ambiguity(tau: f64, nu: f64, ts: f64) -> Complex64 {
    normalized_ambiguity(tau / ts, nu * ts)
}

/// Ambiguity with delay in samples and Doppler in cycles per sample.
fn normalized_ambiguity(x: f64, a: f64) -> Complex64 {
    let w = 1.0 - a.abs();
    if w <= 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    Complex64::from_polar(w * sinc(x * w), PI * a * x)
}

/// Per-path coefficient `G[m, n] = h e^{j2π n ν Ts} A*((n-m)Ts + τ, ν)` over
/// signed time indices `m, n ∈ [-L_cp, MN)`. Array position `p` holds time
/// index `p - L_cp`.
pub fn path_time_matrix_izt(grid: &OtfsGrid, path: &Path, cp_len: usize) -> Result<CMatrix> {
    PulseSpec::sinc(grid, cp_len)?;
    let mn = grid.len();
    let a = path.doppler / mn as f64;
    let size = mn + cp_len;
    let off = cp_len as f64;
    Ok(CMatrix::from_fn(size, size, |r, c| {
        let m = r as f64 - off;
        let n = c as f64 - off;
        path.gain * Complex64::from_polar(1.0, 2.0 * PI * n * a) * normalized_ambiguity(n - m + path.delay, a).conj()
    }))
}

/// `R_cp (Σ G_i) A_cp`, evaluated without forming the extended matrices.
pub fn time_channel_izt(grid: &OtfsGrid, paths: &PathSet, cp_len: usize) -> Result<CMatrix> {
    let pulse = PulseSpec::sinc(grid, cp_len)?;
    pulse.check_paths(paths)?;
    let mn = grid.len();
    let lcp = cp_len as isize;
    let mut h = CMatrix::zeros(mn, mn);
    // offsets n - m range over [-(MN-1) - L_cp, MN-1]
    let lo = -(mn as isize - 1) - lcp;
    let width = 2 * mn - 1 + cp_len;
    let mut amb = vec![Complex64::new(0.0, 0.0); width];
    for p in paths.paths() {
        let a = p.doppler / mn as f64;
        for (i, v) in amb.iter_mut().enumerate() {
            let d = (lo + i as isize) as f64;
            *v = normalized_ambiguity(d + p.delay, a).conj();
        }
        for n in -lcp..mn as isize {
            let j = n.rem_euclid(mn as isize) as usize;
            let c = p.gain * Complex64::from_polar(1.0, 2.0 * PI * n as f64 * a);
            let col = h.col_mut(j);
            // amb index of offset (n - m) is n - m - lo
            let base = n - lo;
            for (m, out) in col.iter_mut().enumerate() {
                *out += c * amb[(base - m as isize) as usize];
            }
        }
    }
    Ok(h)
}

/// `(F_N ⊗ I_M) R_cp (Σ G_i) A_cp (F_N^H ⊗ I_M)` for the IZT/ZT transceiver.
pub fn dd_channel_izt(grid: &OtfsGrid, paths: &PathSet, cp_len: usize) -> Result<DdChannel> {
    let h_t = time_channel_izt(grid, paths, cp_len)?;
    DdChannel::new(dd_from_time(&h_t, grid), ChannelSource::Izt, *grid, paths.clone())
}
