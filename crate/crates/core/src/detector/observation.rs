//! Observation-block side: per-block L-MMSE estimation with interference
//! cancellation, followed by symbol-wise extrinsic extraction.

use num_complex::Complex64;

use super::messages::GaussianMessage;
use super::DetectorConfig;
use crate::ddcp::BlockSystem;
use crate::error::{Error, Result};
use crate::linalg::{cholesky_in_place, inverse_hpd, solve_lower_in_place, CMatrix};

/// Output of one observation-to-variable update.
#[derive(Debug, Clone, PartialEq)]
pub struct ObUpdate {
    /// Diagonal of the local L-MMSE posterior.
    pub posterior: GaussianMessage,
    /// Posterior with the prior divided out, clamped.
    pub extrinsic: GaussianMessage,
}

/// Remove the prior from a diagonal posterior:
/// `1/v_e = 1/v_p - 1/v_a`, `m_e = v_e (m_p/v_p - m_a/v_a)`.
///
/// The variance is clamped to `[floor, cap]`. When no information is left
/// (non-positive precision or the cap is hit) the mean is zeroed.
pub fn extrinsic_from_posterior(
    prior: &GaussianMessage,
    post_mean: &[Complex64],
    post_var: &[f64],
    floor: f64,
    cap: f64,
) -> GaussianMessage {
    let n = prior.len();
    let mut mean = Vec::with_capacity(n);
    let mut var = Vec::with_capacity(n);
    for i in 0..n {
        let (ma, va) = (prior.mean[i], prior.var[i]);
        let (mp, vp) = (post_mean[i], post_var[i]);
        let prec = 1.0 / vp - 1.0 / va;
        let ve = 1.0 / prec;
        if !(prec > 0.0) || !(ve < cap) {
            mean.push(Complex64::new(0.0, 0.0));
            var.push(cap);
            continue;
        }
        let me = (mp / vp - ma / va) * ve;
        if ve < floor {
            mean.push(me);
            var.push(floor);
        } else {
            mean.push(me);
            var.push(ve);
        }
    }
    GaussianMessage { mean, var }
}

fn check_edge(
    system: &BlockSystem,
    d: usize,
    c: usize,
    y_d: &[Complex64],
    incoming: &[GaussianMessage],
) -> Result<usize> {
    let n = system.n();
    if y_d.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: y_d.len(),
        });
    }
    if incoming.len() != system.l() {
        return Err(Error::LengthMismatch {
            expected: system.l(),
            got: incoming.len(),
        });
    }
    if let Some(bad) = incoming.iter().find(|msg| msg.len() != n) {
        return Err(Error::LengthMismatch {
            expected: n,
            got: bad.len(),
        });
    }
    system
        .col_set(d)
        .iter()
        .position(|&f| f == c)
        .ok_or_else(|| Error::InvalidParameter(format!("block ({d}, {c}) is not active")))
}

/// `H diag(v) H^H`.
fn weighted_gram(h: &CMatrix, v: &[f64]) -> CMatrix {
    let mut t = h.clone();
    for (j, &vj) in v.iter().enumerate() {
        let s = vj.sqrt();
        t.col_mut(j).iter_mut().for_each(|z| *z *= s);
    }
    t.gram_adjoint()
}

/// Message from observation block `d` to variable block `c`, evaluated
/// literally: cancel the other blocks' means, lump their covariance into the
/// noise, apply the L-MMSE matrix `C^a H^H (H C^a H^H + C_z)^{-1}`.
///
/// `incoming[k]` is the message from variable block `system.col_set(d)[k]`.
pub fn ob_update(
    system: &BlockSystem,
    d: usize,
    c: usize,
    y_d: &[Complex64],
    incoming: &[GaussianMessage],
    config: &DetectorConfig,
) -> Result<ObUpdate> {
    let k_c = check_edge(system, d, c, y_d, incoming)?;
    let n = system.n();
    let blocks = system.row_blocks(d);
    let h = &blocks[k_c];
    let prior = &incoming[k_c];

    let mut cz = CMatrix::identity(n);
    cz.scale(Complex64::new(system.n0(), 0.0));
    let mut resid = y_d.to_vec();
    for (k, (blk, msg)) in blocks.iter().zip(incoming).enumerate() {
        if k == k_c {
            continue;
        }
        cz.add_assign(&weighted_gram(blk, &msg.var));
        for (r, v) in resid.iter_mut().zip(blk.mul_vec(&msg.mean)) {
            *r -= v;
        }
    }
    let mut a = weighted_gram(h, &prior.var);
    a.add_assign(&cz);
    let a_inv = inverse_hpd(&a).map_err(|e| Error::Numerical(format!("observation block {d} -> {c}: {e}")))?;
    // W = C^a H^H A^{-1}
    let mut w = h.adjoint().matmul(&a_inv);
    for i in 0..n {
        for j in 0..n {
            w[(i, j)] *= prior.var[i];
        }
    }
    for (r, v) in resid.iter_mut().zip(h.mul_vec(&prior.mean)) {
        *r -= v;
    }
    let corr = w.mul_vec(&resid);
    let wh = w.matmul(h);
    let mut post_mean = Vec::with_capacity(n);
    let mut post_var = Vec::with_capacity(n);
    for i in 0..n {
        post_mean.push(prior.mean[i] + corr[i]);
        let v = prior.var[i] - (wh[(i, i)] * prior.var[i]).re;
        debug_assert!(v <= prior.var[i] * (1.0 + 1e-9));
        post_var.push(v.max(0.0));
    }
    let extrinsic = extrinsic_from_posterior(prior, &post_mean, &post_var, config.variance_floor, config.variance_cap);
    Ok(ObUpdate {
        posterior: GaussianMessage {
            mean: post_mean,
            var: post_var,
        },
        extrinsic,
    })
}

/// All messages leaving observation block `d` at once.
///
/// Every edge of the block shares `S = N0 I + Σ_f H_f C^a_f H_f^H` and the
/// residual `r = y - Σ_f H_f x̂^a_f`, so one Cholesky factor `S = L L^H`
/// serves all of them: with `B = L^{-1} H_c` and `u = L^{-1} r` the posterior
/// is `x̂^a + C^a B^H u` and its diagonal covariance `v - v^2 |B|^2` summed
/// over rows. This is the same algebra as [`ob_update`].
pub(crate) fn ob_sweep_block(
    system: &BlockSystem,
    d: usize,
    y_d: &[Complex64],
    incoming: &[GaussianMessage],
    config: &DetectorConfig,
    out: &mut [GaussianMessage],
) -> Result<()> {
    let n = system.n();
    let blocks = system.row_blocks(d);
    let mut s = CMatrix::identity(n);
    s.scale(Complex64::new(system.n0(), 0.0));
    let mut resid = y_d.to_vec();
    for (blk, msg) in blocks.iter().zip(incoming) {
        s.add_assign(&weighted_gram(blk, &msg.var));
        for (r, v) in resid.iter_mut().zip(blk.mul_vec(&msg.mean)) {
            *r -= v;
        }
    }
    cholesky_in_place(s.as_mut_slice(), n).map_err(|j| {
        Error::Numerical(format!(
            "observation block {d}: covariance not positive definite at pivot {j}"
        ))
    })?;
    let l = s.as_slice();
    solve_lower_in_place(l, n, &mut resid);
    let u = resid;

    let mut post_mean = vec![Complex64::new(0.0, 0.0); n];
    let mut post_var = vec![0.0; n];
    for ((blk, prior), slot) in blocks.iter().zip(incoming).zip(out.iter_mut()) {
        let mut b = blk.clone();
        for j in 0..n {
            let col = b.col_mut(j);
            solve_lower_in_place(l, n, col);
            let mut sq = 0.0;
            let mut t = Complex64::new(0.0, 0.0);
            for (bij, ui) in col.iter().zip(&u) {
                sq += bij.norm_sqr();
                t += bij.conj() * ui;
            }
            let va = prior.var[j];
            post_mean[j] = prior.mean[j] + t * va;
            post_var[j] = (va - va * va * sq).max(0.0);
        }
        *slot = extrinsic_from_posterior(prior, &post_mean, &post_var, config.variance_floor, config.variance_cap);
    }
    Ok(())
}
