use std::f64::consts::PI;

use num_complex::Complex64;

use super::{dd_from_time, ChannelSource, DdChannel};
use crate::error::{Error, Result};
use crate::grid::OtfsGrid;
use crate::linalg::CMatrix;
use crate::paths::PathSet;

/// Time-domain channel of the ISFFT/SFFT transceiver with a reduced CP:
///
/// `H_T = Σ_i h_i e^{-j2π ν_i l_i / MN} Δ^{ν_i} Π^{l_i}`
///
/// where `Π` is the forward cyclic shift, `Δ = diag(α^0, …, α^{MN-1})`,
/// `α = e^{j2π/MN}` and `ν_i` is the (possibly fractional) Doppler index. The
/// real power of `Δ` is taken elementwise, `Δ^ν[r, r] = e^{j2π ν r / MN}`.
pub fn time_channel_isfft(grid: &OtfsGrid, paths: &PathSet) -> Result<CMatrix> {
    let mn = grid.len();
    for (i, p) in paths.paths().iter().enumerate() {
        if !p.has_integer_delay() {
            return Err(Error::FractionalDelay {
                path: i,
                delay: p.delay,
            });
        }
        if p.delay as usize >= mn {
            return Err(Error::InvalidChannel(format!(
                "path {i} delay {} exceeds the frame length {mn}",
                p.delay
            )));
        }
    }
    let mut h = CMatrix::zeros(mn, mn);
    let w = 2.0 * PI / mn as f64;
    for p in paths.paths() {
        let l = p.delay as usize;
        let base = p.gain * Complex64::from_polar(1.0, -w * p.doppler * l as f64);
        for r in 0..mn {
            let c = (r + mn - l) % mn;
            h[(r, c)] += base * Complex64::from_polar(1.0, w * p.doppler * r as f64);
        }
    }
    Ok(h)
}

/// `H_DD = (F_N ⊗ I_M) H_T (F_N^H ⊗ I_M)` for the ISFFT/SFFT transceiver.
pub fn dd_channel_isfft(grid: &OtfsGrid, paths: &PathSet) -> Result<DdChannel> {
    let h_t = time_channel_isfft(grid, paths)?;
    DdChannel::new(dd_from_time(&h_t, grid), ChannelSource::Isfft, *grid, paths.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paths::Path;

    fn single(delay: f64, doppler: f64) -> PathSet {
        PathSet::new(vec![Path::new(Complex64::new(1.0, 0.0), delay, doppler)]).unwrap()
    }

    #[test]
    fn trivial_path_is_identity() {
        let g = OtfsGrid::new(4, 3, 1.0).unwrap();
        let h = time_channel_isfft(&g, &single(0.0, 0.0)).unwrap();
        assert!(h.max_abs_diff(&CMatrix::identity(12)) < 1e-15);
        let hdd = dd_channel_isfft(&g, &single(0.0, 0.0)).unwrap();
        assert!(hdd.matrix().max_abs_diff(&CMatrix::identity(12)) < 1e-12);
    }

    #[test]
    fn unit_delay_is_cyclic_down_shift() {
        let g = OtfsGrid::new(4, 3, 1.0).unwrap();
        let h = time_channel_isfft(&g, &single(1.0, 0.0)).unwrap();
        let pi = CMatrix::from_fn(12, 12, |r, c| {
            if r == (c + 1) % 12 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        assert!(h.max_abs_diff(&pi) < 1e-15);
    }

    #[test]
    fn unit_doppler_is_delta() {
        let g = OtfsGrid::new(4, 3, 1.0).unwrap();
        let h = time_channel_isfft(&g, &single(0.0, 1.0)).unwrap();
        let delta = CMatrix::from_fn(12, 12, |r, c| {
            if r == c {
                Complex64::from_polar(1.0, 2.0 * PI * r as f64 / 12.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        assert!(h.max_abs_diff(&delta) < 1e-14);
    }

    #[test]
    fn fractional_delay_is_rejected() {
        let g = OtfsGrid::new(4, 3, 1.0).unwrap();
        let err = time_channel_isfft(&g, &single(1.5, 0.0)).unwrap_err();
        assert!(matches!(err, Error::FractionalDelay { path: 0, .. }));
        assert!(err.to_string().contains("IZT"));
    }

    #[test]
    fn one_entry_per_row_for_single_path() {
        let g = OtfsGrid::new(8, 4, 1.0).unwrap();
        let h = time_channel_isfft(&g, &single(3.0, -1.7)).unwrap();
        for r in 0..32 {
            let nz = (0..32).filter(|&c| h[(r, c)].norm() > 0.0).count();
            assert_eq!(nz, 1);
        }
    }

    #[test]
    fn integer_doppler_dd_blocks_follow_shift() {
        // delay 2, Doppler 3: DD block (i, j) of size M x M is nonzero only
        // when (i - j) mod N equals the Doppler shift
        let g = OtfsGrid::new(4, 6, 1.0).unwrap();
        let (m, n) = (4, 6);
        let hdd = dd_channel_isfft(&g, &single(2.0, 3.0)).unwrap();
        for bi in 0..n {
            for bj in 0..n {
                let blk = hdd.matrix().submatrix(bi * m, bj * m, m, m);
                let active = blk.frobenius_norm() > 1e-9;
                assert_eq!(active, (bi + n - bj) % n == 3, "block ({bi},{bj})");
            }
        }
    }
}
