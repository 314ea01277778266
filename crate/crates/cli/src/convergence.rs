//! Message-MSE distributions and iteration counts of the hybrid detector.

use otfs_core::detector::DetectorConfig;
use otfs_core::SeedStreams;
use otfs_core::Stream;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ChannelMode, ConvergenceConfig, ExperimentConfig};
use crate::error::{SimError, SimResult};
use crate::experiment::{n0_from_db, Simulator};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MseSamples {
    pub budget: usize,
    pub snr_db: f64,
    /// Edges observed before subsampling.
    pub seen: u64,
    /// Per-edge MSE of the extrinsic means, at most `max_samples` of them.
    pub samples: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationPoint {
    pub snr_db: f64,
    pub frames: u64,
    pub mean_iters: f64,
    pub max_iters: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub channel: ChannelMode,
    pub paths: usize,
    pub mse: Vec<MseSamples>,
    pub iterations: Vec<IterationPoint>,
}

/// Uniform subsample of a stream (Algorithm R).
struct Reservoir {
    cap: usize,
    seen: u64,
    items: Vec<f64>,
}

impl Reservoir {
    fn new(cap: usize) -> Self {
        Self {
            cap,
            seen: 0,
            items: Vec::new(),
        }
    }

    fn push<R: Rng>(&mut self, x: f64, rng: &mut R) {
        self.seen += 1;
        if self.items.len() < self.cap {
            self.items.push(x);
        } else {
            let j = rng.random_range(0..self.seen);
            if (j as usize) < self.cap {
                self.items[j as usize] = x;
            }
        }
    }
}

/// CDF study at `conv.cdf_snr_db` with early termination off, sampling
/// per-edge message MSE after each budgeted iteration count, followed by the
/// mean iterations to termination at every SNR of `cfg.snr_db`.
///
/// The MSE part runs each frame once with `max(budgets)` iterations; the
/// synchronous schedule makes the state after `b` iterations identical to a
/// separate run capped at `b`.
pub fn run_convergence_study(cfg: &ExperimentConfig) -> SimResult<ConvergenceReport> {
    let conv = cfg.convergence.clone().unwrap_or_default();
    let sim = Simulator::new(cfg)?;
    let mut budgets = conv.budgets.clone();
    budgets.sort_unstable();
    budgets.dedup();
    let mse = mse_study(&sim, &conv, &budgets)?;
    let iterations = iteration_study(&sim, &conv, &cfg.snr_db)?;
    Ok(ConvergenceReport {
        channel: cfg.channel,
        paths: cfg.paths,
        mse,
        iterations,
    })
}

fn mse_study(sim: &Simulator, conv: &ConvergenceConfig, budgets: &[usize]) -> SimResult<Vec<MseSamples>> {
    let max_budget = *budgets.last().ok_or_else(|| SimError::Config("no budgets".into()))?;
    let det = DetectorConfig {
        max_iterations: max_budget,
        early_termination: false,
        ..sim.config().hybrid.clone()
    };
    let n0 = n0_from_db(conv.cdf_snr_db);
    let per_frame: Vec<SimResult<Vec<Vec<f64>>>> = (0..conv.frames)
        .into_par_iter()
        .map(|frame| {
            let r = sim.realize(frame)?;
            let (rep, _) = sim.run_hybrid(&r, n0, &det, budgets)?;
            Ok(budgets
                .iter()
                .map(|b| {
                    rep.edge_mse
                        .iter()
                        .find(|s| s.iteration == *b)
                        .map(|s| s.mse.clone())
                        .unwrap_or_default()
                })
                .collect())
        })
        .collect();
    // one sampling stream per experiment, consumed in frame order
    let mut rng = SeedStreams::new(sim.config().seed).rng(u64::MAX / 4, Stream::Aux);
    let mut reservoirs: Vec<Reservoir> = budgets.iter().map(|_| Reservoir::new(conv.max_samples)).collect();
    for frame in per_frame {
        for (res, values) in reservoirs.iter_mut().zip(frame?) {
            for v in values {
                res.push(v, &mut rng);
            }
        }
    }
    Ok(budgets
        .iter()
        .zip(reservoirs)
        .map(|(&budget, res)| MseSamples {
            budget,
            snr_db: conv.cdf_snr_db,
            seen: res.seen,
            samples: res.items,
        })
        .collect())
}

fn iteration_study(sim: &Simulator, conv: &ConvergenceConfig, snr_db: &[f64]) -> SimResult<Vec<IterationPoint>> {
    let det = DetectorConfig {
        early_termination: true,
        ..sim.config().hybrid.clone()
    };
    let per_frame: Vec<SimResult<Vec<usize>>> = (0..conv.frames)
        .into_par_iter()
        .map(|frame| {
            let r = sim.realize(frame)?;
            snr_db
                .iter()
                .map(|&s| Ok(sim.run_hybrid(&r, n0_from_db(s), &det, &[])?.0.iterations_used))
                .collect()
        })
        .collect();
    let mut sums = vec![0u64; snr_db.len()];
    let mut maxes = vec![0usize; snr_db.len()];
    for frame in per_frame {
        for (i, it) in frame?.into_iter().enumerate() {
            sums[i] += it as u64;
            maxes[i] = maxes[i].max(it);
        }
    }
    Ok(snr_db
        .iter()
        .enumerate()
        .map(|(i, &s)| IterationPoint {
            snr_db: s,
            frames: conv.frames,
            mean_iters: sums[i] as f64 / conv.frames as f64,
            max_iters: maxes[i],
        })
        .collect())
}
