//! Variable-block side: combine Gaussian messages in the probability domain,
//! damp, and convert back to Gaussian form.

use num_complex::Complex64;

use super::messages::{BeliefMatrix, GaussianMessage};
use super::DetectorConfig;
use crate::constellation::Constellation;
use crate::error::{Error, Result};

/// Messages leaving one variable block.
#[derive(Debug, Clone, PartialEq)]
pub struct VbUpdate {
    /// Combination of every incoming message.
    pub posterior: BeliefMatrix,
    /// Damped extrinsic beliefs, one per connected observation block.
    pub beliefs: Vec<BeliefMatrix>,
    /// Gaussian projection of `beliefs`.
    pub outgoing: Vec<GaussianMessage>,
}

/// `log ξ[n][q] = -|x̂[n] - a_q|^2 / v[n]`, row-major `N x Q`.
pub fn log_likelihoods(msg: &GaussianMessage, constellation: &Constellation) -> Vec<f64> {
    let pts = constellation.points();
    let mut out = Vec::with_capacity(msg.len() * pts.len());
    for (m, v) in msg.mean.iter().zip(&msg.var) {
        for a in pts {
            out.push(-(m - a).norm_sqr() / v);
        }
    }
    out
}

/// Row-wise softmax in place.
fn normalize_log_rows(logs: &mut [f64], q: usize) {
    for row in logs.chunks_mut(q) {
        let mx = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut s = 0.0;
        for x in row.iter_mut() {
            *x = (*x - mx).exp();
            s += *x;
        }
        row.iter_mut().for_each(|x| *x /= s);
    }
}

/// Mean and variance of each row's distribution, variance floored.
pub fn beliefs_to_gaussian(b: &BeliefMatrix, constellation: &Constellation, floor: f64) -> GaussianMessage {
    let pts = constellation.points();
    let mut mean = Vec::with_capacity(b.rows());
    let mut var = Vec::with_capacity(b.rows());
    for n in 0..b.rows() {
        let row = b.row(n);
        let mu: Complex64 = row.iter().zip(pts).map(|(p, a)| a * p).sum();
        let v: f64 = row.iter().zip(pts).map(|(p, a)| p * (a - mu).norm_sqr()).sum();
        mean.push(mu);
        var.push(v.max(floor));
    }
    GaussianMessage { mean, var }
}

/// Update for one variable block.
///
/// `incoming[g]` comes from the `g`-th observation block of the column (in
/// the order of `BlockSystem::row_set`). `prev` holds last iteration's damped
/// beliefs for the same edges and is `None` on the first iteration, when no
/// damping is applied.
pub fn vb_update(
    incoming: &[GaussianMessage],
    prev: Option<&[BeliefMatrix]>,
    config: &DetectorConfig,
    constellation: &Constellation,
) -> Result<VbUpdate> {
    let l = incoming.len();
    if l == 0 {
        return Err(Error::InvalidParameter("variable block has no observations".into()));
    }
    let n = incoming[0].len();
    let q = constellation.len();
    if let Some(p) = prev {
        if p.len() != l {
            return Err(Error::LengthMismatch {
                expected: l,
                got: p.len(),
            });
        }
    }
    let logs: Vec<Vec<f64>> = incoming.iter().map(|m| log_likelihoods(m, constellation)).collect();
    if let Some(bad) = logs.iter().find(|lg| lg.len() != n * q) {
        return Err(Error::LengthMismatch {
            expected: n * q,
            got: bad.len(),
        });
    }

    // prefix[g] = Σ_{h<g}, suffix[g] = Σ_{h>g}
    let mut prefix = vec![vec![0.0; n * q]; l + 1];
    for g in 0..l {
        let (a, b) = prefix.split_at_mut(g + 1);
        for ((dst, &p), &x) in b[0].iter_mut().zip(&a[g]).zip(&logs[g]) {
            *dst = p + x;
        }
    }
    let mut suffix = vec![vec![0.0; n * q]; l + 1];
    for g in (0..l).rev() {
        let (a, b) = suffix.split_at_mut(g + 1);
        for ((dst, &s), &x) in a[g].iter_mut().zip(&b[0]).zip(&logs[g]) {
            *dst = s + x;
        }
    }

    let mut post = prefix[l].clone();
    normalize_log_rows(&mut post, q);
    let posterior = BeliefMatrix::from_weights(n, q, post)?;

    let mut beliefs = Vec::with_capacity(l);
    let mut outgoing = Vec::with_capacity(l);
    for g in 0..l {
        let mut ext: Vec<f64> = prefix[g].iter().zip(&suffix[g + 1]).map(|(a, b)| a + b).collect();
        normalize_log_rows(&mut ext, q);
        let mut b = BeliefMatrix::from_weights(n, q, ext)?;
        if let Some(p) = prev {
            let delta = config.damping;
            for (x, &old) in b.as_mut_slice().iter_mut().zip(p[g].as_slice()) {
                *x = delta * *x + (1.0 - delta) * old;
            }
        }
        outgoing.push(beliefs_to_gaussian(&b, constellation, config.variance_floor));
        beliefs.push(b);
    }
    Ok(VbUpdate {
        posterior,
        beliefs,
        outgoing,
    })
}

/// Fraction of symbols whose most likely point has probability `>= 1 - eps`.
pub fn compute_eta(posteriors: &[BeliefMatrix], eps: f64) -> f64 {
    let mut total = 0usize;
    let mut confident = 0usize;
    for b in posteriors {
        for n in 0..b.rows() {
            total += 1;
            if b.max_prob(n) >= 1.0 - eps {
                confident += 1;
            }
        }
    }
    if total == 0 {
        0.0
    } else {
        confident as f64 / total as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qpsk() -> Constellation {
        Constellation::qpsk()
    }

    #[test]
    fn single_observation_gives_uniform_extrinsic() {
        let c = qpsk();
        let msg = GaussianMessage::new(vec![c.point(2); 3], vec![0.1; 3]).unwrap();
        let up = vb_update(&[msg], None, &DetectorConfig::default(), &c).unwrap();
        for &p in up.beliefs[0].as_slice() {
            assert!((p - 0.25).abs() < 1e-15);
        }
        for (m, v) in up.outgoing[0].mean.iter().zip(&up.outgoing[0].var) {
            assert!(m.norm() < 1e-15);
            assert!((v - 1.0).abs() < 1e-15);
        }
        assert_eq!(up.posterior.argmax(), vec![2, 2, 2]);
    }

    #[test]
    fn xi_follows_squared_distances() {
        let c = qpsk();
        let msg = GaussianMessage::new(vec![c.point(0)], vec![1.0]).unwrap();
        let lg = log_likelihoods(&msg, &c);
        // points 1 and 2 are neighbours of point 0, point 3 is opposite
        let want = [0.0, -2.0, -2.0, -4.0];
        for (a, b) in lg.iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn agreeing_messages_sharpen_the_posterior() {
        let c = qpsk();
        let msg = GaussianMessage::new(vec![Complex64::new(0.3, 0.1)], vec![0.8]).unwrap();
        let one = vb_update(std::slice::from_ref(&msg), None, &DetectorConfig::default(), &c).unwrap();
        let two = vb_update(&[msg.clone(), msg], None, &DetectorConfig::default(), &c).unwrap();
        assert!(two.posterior.max_prob(0) > one.posterior.max_prob(0));
    }

    #[test]
    fn eta_counts_confident_rows() {
        let sure = BeliefMatrix::from_weights(2, 4, vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0]).unwrap();
        let unsure = BeliefMatrix::uniform(2, 4);
        assert_eq!(compute_eta(std::slice::from_ref(&sure), 0.01), 1.0);
        assert_eq!(compute_eta(std::slice::from_ref(&unsure), 0.01), 0.0);
        assert_eq!(compute_eta(&[sure, unsure], 0.01), 0.5);
    }
}
