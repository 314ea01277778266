use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Geometry of a critically sampled OTFS frame.
///
/// `m` delay bins (subcarriers) by `n` Doppler bins (time slots). The slot
/// duration and the sampling interval are derived from the subcarrier spacing so
/// that `slot_duration * delta_f == 1` and `sample_interval == slot_duration / m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OtfsGrid {
    m: usize,
    n: usize,
    delta_f: f64,
    slot_duration: f64,
    sample_interval: f64,
}

impl OtfsGrid {
    pub const DEFAULT_DELTA_F: f64 = 15_000.0;

    pub fn new(m: usize, n: usize, delta_f: f64) -> Result<Self> {
        if m < 2 || n < 2 {
            return Err(Error::InvalidGrid(format!("need M >= 2 and N >= 2, got M={m}, N={n}")));
        }
        if !(delta_f.is_finite() && delta_f > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "subcarrier spacing must be positive, got {delta_f}"
            )));
        }
        let slot_duration = 1.0 / delta_f;
        Ok(Self {
            m,
            n,
            delta_f,
            slot_duration,
            sample_interval: 1.0 / (m as f64 * delta_f),
        })
    }

    /// Delay bins.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Doppler bins.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.m * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn delta_f(&self) -> f64 {
        self.delta_f
    }

    /// `T`, duration of one time slot.
    pub fn slot_duration(&self) -> f64 {
        self.slot_duration
    }

    /// `Ts = T / M`, the delay resolution.
    pub fn sample_interval(&self) -> f64 {
        self.sample_interval
    }

    /// Doppler resolution `1 / (N T)` in Hz.
    pub fn doppler_resolution(&self) -> f64 {
        1.0 / (self.n as f64 * self.slot_duration)
    }
}

pub fn make_grid(m: usize, n: usize, delta_f: f64) -> Result<OtfsGrid> {
    OtfsGrid::new(m, n, delta_f)
}
