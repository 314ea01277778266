//! Hybrid block detector.
//!
//! Each observation block (block-row of the precoded channel) runs a local
//! L-MMSE estimator for every variable block it sees, treating the other
//! connected blocks as Gaussian interference. Each variable block combines
//! the resulting Gaussian messages as discrete beliefs over the
//! constellation, removes the receiver's own contribution, damps, and sends
//! Gaussian approximations back. Both sweeps are synchronous.

mod complexity;
mod lmmse;
mod messages;
mod observation;
mod variable;

pub use complexity::{flop_estimate, full_lmmse_flops, FlopEstimate};
pub use lmmse::{full_lmmse_detect, lmmse_estimate, lmmse_slice};
pub use messages::{BeliefMatrix, GaussianMessage};
pub use observation::{extrinsic_from_posterior, ob_update, ObUpdate};
pub use variable::{beliefs_to_gaussian, compute_eta, log_likelihoods, vb_update, VbUpdate};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constellation::Constellation;
use crate::ddcp::BlockSystem;
use crate::error::{Error, Result};
use crate::frame::{FrameVector, Layout};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DetectorConfig {
    pub max_iterations: usize,
    pub damping: f64,
    pub epsilon: f64,
    pub variance_floor: f64,
    pub variance_cap: f64,
    /// Stop as soon as every symbol is confident.
    pub early_termination: bool,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            max_iterations: 20,
            damping: 0.7,
            epsilon: 0.01,
            variance_floor: 1e-12,
            variance_cap: 1e6,
            early_termination: true,
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.max_iterations == 0 {
            return bad("max_iterations must be at least 1".into());
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return bad(format!("damping {} must lie in (0, 1]", self.damping));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return bad(format!("epsilon {} must lie in (0, 1)", self.epsilon));
        }
        if !(self.variance_floor > 0.0 && self.variance_cap > self.variance_floor) {
            return bad(format!(
                "variance bounds [{}, {}] must satisfy 0 < floor < cap",
                self.variance_floor, self.variance_cap
            ));
        }
        Ok(())
    }
}

/// Per-edge MSE of the observation-to-variable means at one iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeMseSnapshot {
    pub iteration: usize,
    /// One entry per active block, block-row major.
    pub mse: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    /// Constellation indices in precoded order.
    pub decisions: Vec<usize>,
    pub iterations_used: usize,
    pub eta_history: Vec<f64>,
    /// Mean over all edges of the extrinsic-message MSE, per iteration.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message_mse_per_iter: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub edge_mse: Vec<EdgeMseSnapshot>,
    pub terminated_early: bool,
}

impl DetectionReport {
    pub fn decision_points(&self, constellation: &Constellation) -> Vec<Complex64> {
        self.decisions.iter().map(|&i| constellation.point(i)).collect()
    }
}

/// Optional instrumentation for [`detect_traced`].
#[derive(Debug, Clone, Copy, Default)]
pub struct Trace<'a> {
    /// Transmitted constellation indices in precoded order.
    pub truth: Option<&'a [usize]>,
    /// Iterations (1-based) at which per-edge MSE is recorded; needs `truth`.
    pub edge_mse_at: &'a [usize],
}

pub fn detect(
    y: &FrameVector,
    system: &BlockSystem,
    config: &DetectorConfig,
    constellation: &Constellation,
) -> Result<DetectionReport> {
    detect_traced(y, system, config, constellation, Trace::default())
}

pub fn detect_traced(
    y: &FrameVector,
    system: &BlockSystem,
    config: &DetectorConfig,
    constellation: &Constellation,
    trace: Trace<'_>,
) -> Result<DetectionReport> {
    config.validate()?;
    y.expect_layout(Layout::DdPrecoded)?;
    let (m, n, l) = (system.m(), system.n(), system.l());
    if y.len() != m * n {
        return Err(Error::LengthMismatch {
            expected: m * n,
            got: y.len(),
        });
    }
    if let Some(t) = trace.truth {
        if t.len() != m * n {
            return Err(Error::LengthMismatch {
                expected: m * n,
                got: t.len(),
            });
        }
    }
    let q = constellation.len();

    // edge e = d * L + k joins block-row d with block-column col_set(d)[k]
    let mut col_edges: Vec<Vec<usize>> = vec![Vec::with_capacity(l); m];
    for d in 0..m {
        for (k, &c) in system.col_set(d).iter().enumerate() {
            col_edges[c].push(d * l + k);
        }
    }

    let mut to_ob = vec![GaussianMessage::uninformative(n); m * l];
    let mut to_vb = vec![GaussianMessage::uninformative(n); m * l];
    let mut beliefs: Option<Vec<BeliefMatrix>> = None;
    let mut posteriors = vec![BeliefMatrix::uniform(n, q); m];
    let mut eta_history = Vec::new();
    let mut mse_history = trace.truth.map(|_| Vec::new());
    let mut edge_mse = Vec::new();
    let mut terminated_early = false;

    for iter in 1..=config.max_iterations {
        for d in 0..m {
            let y_d = &y.entries()[d * n..(d + 1) * n];
            observation::ob_sweep_block(
                system,
                d,
                y_d,
                &to_ob[d * l..(d + 1) * l],
                config,
                &mut to_vb[d * l..(d + 1) * l],
            )
            .map_err(|e| Error::Numerical(format!("iteration {iter}: {e}")))?;
        }

        let mut next = beliefs
            .clone()
            .unwrap_or_else(|| vec![BeliefMatrix::uniform(n, q); m * l]);
        for c in 0..m {
            let edges = &col_edges[c];
            let incoming: Vec<GaussianMessage> = edges.iter().map(|&e| to_vb[e].clone()).collect();
            let prev: Option<Vec<BeliefMatrix>> =
                beliefs.as_ref().map(|b| edges.iter().map(|&e| b[e].clone()).collect());
            let up = vb_update(&incoming, prev.as_deref(), config, constellation)?;
            for ((&e, b), msg) in edges.iter().zip(up.beliefs).zip(up.outgoing) {
                next[e] = b;
                to_ob[e] = msg;
            }
            posteriors[c] = up.posterior;
        }
        beliefs = Some(next);

        if let Some(truth) = trace.truth {
            let per_edge: Vec<f64> = (0..m * l)
                .map(|e| {
                    let c = system.col_set(e / l)[e % l];
                    let msg = &to_vb[e];
                    (0..n)
                        .map(|i| (msg.mean[i] - constellation.point(truth[c * n + i])).norm_sqr())
                        .sum::<f64>()
                        / n as f64
                })
                .collect();
            if let Some(h) = mse_history.as_mut() {
                h.push(per_edge.iter().sum::<f64>() / per_edge.len() as f64);
            }
            if trace.edge_mse_at.contains(&iter) {
                edge_mse.push(EdgeMseSnapshot {
                    iteration: iter,
                    mse: per_edge,
                });
            }
        }

        let eta = compute_eta(&posteriors, config.epsilon);
        eta_history.push(eta);
        if config.early_termination && eta >= 1.0 {
            terminated_early = true;
            break;
        }
    }

    let decisions = posteriors.iter().flat_map(|b| b.argmax()).collect();
    Ok(DetectionReport {
        decisions,
        iterations_used: eta_history.len(),
        eta_history,
        message_mse_per_iter: mse_history,
        edge_mse,
        terminated_early,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ddcp::block_partition;
    use crate::linalg::CMatrix;

    #[test]
    fn default_config_matches_reference_settings() {
        let c = DetectorConfig::default();
        assert_eq!(c.max_iterations, 20);
        assert_eq!(c.damping, 0.7);
        assert_eq!(c.epsilon, 0.01);
        assert!(c.validate().is_ok());
        assert!(DetectorConfig {
            damping: 0.0,
            ..c.clone()
        }
        .validate()
        .is_err());
        assert!(DetectorConfig { epsilon: 1.0, ..c }.validate().is_err());
    }

    #[test]
    fn identity_channel_noiseless() {
        let con = Constellation::qpsk();
        let sys = block_partition(&CMatrix::identity(8), 4, 1e-9, 1e-8).unwrap();
        let idx = [0, 1, 2, 3, 3, 2, 1, 0];
        let y = FrameVector::new(idx.iter().map(|&i| con.point(i)).collect(), Layout::DdPrecoded);
        let rep = detect_traced(
            &y,
            &sys,
            &DetectorConfig::default(),
            &con,
            Trace {
                truth: Some(&idx),
                edge_mse_at: &[1],
            },
        )
        .unwrap();
        assert_eq!(rep.decisions, idx);
        assert_eq!(rep.iterations_used, 1);
        assert!(rep.terminated_early);
        assert_eq!(rep.edge_mse.len(), 1);
        assert_eq!(rep.edge_mse[0].mse.len(), 2);
        assert!(rep.message_mse_per_iter.unwrap()[0] < 1e-6);
    }

    #[test]
    fn original_layout_is_rejected() {
        let con = Constellation::qpsk();
        let sys = block_partition(&CMatrix::identity(4), 2, 1e-9, 0.1).unwrap();
        let y = FrameVector::new(vec![Complex64::new(0.0, 0.0); 4], Layout::DdOriginal);
        assert!(matches!(
            detect(&y, &sys, &DetectorConfig::default(), &con),
            Err(Error::LayoutMismatch { .. })
        ));
    }
}
