//! Matched filter bound sweeps.

use otfs_core::bounds::GainModel;
use otfs_core::{mfb_closed_form, mfb_monte_carlo, Constellation, MfbQuery, SeedStreams, Stream};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::SimResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum MfbMethod {
    Mc,
    Closed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MfbRow {
    pub snr_db: f64,
    pub ber: f64,
    /// Zero for the closed form.
    pub stderr: f64,
}

/// Inclusive SNR grid `start, start+step, ..` up to `stop`.
pub fn snr_grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    if !(step > 0.0) || stop < start {
        return vec![start];
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    (0..count).map(|i| start + step * i as f64).collect()
}

pub fn run_mfb_sweep(
    paths: usize,
    snr_db: &[f64],
    method: MfbMethod,
    trials: u64,
    model: GainModel,
    seed: u64,
) -> SimResult<Vec<MfbRow>> {
    let streams = SeedStreams::new(seed);
    let qpsk = Constellation::qpsk();
    snr_db
        .par_iter()
        .enumerate()
        .map(|(i, &db)| {
            let snr = 10f64.powf(db / 10.0);
            Ok(match method {
                MfbMethod::Closed => MfbRow {
                    snr_db: db,
                    ber: mfb_closed_form(paths, snr)?,
                    stderr: 0.0,
                },
                MfbMethod::Mc => {
                    let q = MfbQuery::new(paths, snr, trials)?.with_model(model);
                    let mut rng = streams.rng(i as u64, Stream::Aux);
                    let est = mfb_monte_carlo(&q, &qpsk, &mut rng)?;
                    MfbRow {
                        snr_db: db,
                        ber: est.ber,
                        stderr: est.stderr,
                    }
                }
            })
        })
        .collect()
}
