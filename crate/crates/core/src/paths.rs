use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::OtfsGrid;
use crate::rng::complex_normal;

/// One resolvable propagation path. Delay and Doppler are in grid units:
/// `tau = delay * Ts` and `nu = doppler / (N T)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub gain: Complex64,
    pub delay: f64,
    pub doppler: f64,
}

impl Path {
    pub fn new(gain: Complex64, delay: f64, doppler: f64) -> Self {
        Self { gain, delay, doppler }
    }

    pub fn has_integer_delay(&self) -> bool {
        self.delay.fract() == 0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSet {
    paths: Vec<Path>,
}

impl PathSet {
    pub fn new(paths: Vec<Path>) -> Result<Self> {
        if paths.is_empty() {
            return Err(Error::InvalidChannel("at least one path is required".into()));
        }
        for (i, p) in paths.iter().enumerate() {
            if !(p.delay.is_finite() && p.delay >= 0.0) {
                return Err(Error::InvalidChannel(format!(
                    "path {i} has invalid delay index {}",
                    p.delay
                )));
            }
            if !p.doppler.is_finite() || !p.gain.re.is_finite() || !p.gain.im.is_finite() {
                return Err(Error::InvalidChannel(format!("path {i} is not finite")));
            }
        }
        Ok(Self { paths })
    }

    pub fn paths(&self) -> &[Path] {
        &self.paths
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn max_delay(&self) -> f64 {
        self.paths.iter().map(|p| p.delay).fold(0.0, f64::max)
    }

    pub fn all_integer_delays(&self) -> bool {
        self.paths.iter().all(Path::has_integer_delay)
    }

    /// Sorted, deduplicated integer delay indices (fractional delays are skipped).
    pub fn distinct_integer_delays(&self) -> Vec<usize> {
        let mut d: Vec<usize> = self
            .paths
            .iter()
            .filter(|p| p.has_integer_delay())
            .map(|p| p.delay as usize)
            .collect();
        d.sort_unstable();
        d.dedup();
        d
    }

    pub fn total_power(&self) -> f64 {
        self.paths.iter().map(|p| p.gain.norm_sqr()).sum()
    }
}

/// Parameters of the random channel ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelDraw {
    pub paths: usize,
    pub l_max: usize,
    pub k_max: f64,
    /// Draw delays from `[0, l_max]` instead of `{0, .., l_max}`.
    pub fractional_delay: bool,
    /// Round Doppler indices to integers. Only meant for structural tests.
    pub integer_doppler: bool,
}

impl ChannelDraw {
    pub fn new(paths: usize, l_max: usize, k_max: f64, fractional_delay: bool) -> Self {
        Self {
            paths,
            l_max,
            k_max,
            fractional_delay,
            integer_doppler: false,
        }
    }

    pub fn validate(&self, grid: &OtfsGrid) -> Result<()> {
        if self.paths == 0 {
            return Err(Error::InvalidParameter("P must be at least 1".into()));
        }
        if self.l_max >= grid.m() {
            return Err(Error::InvalidParameter(format!(
                "l_max = {} exceeds the frame (M = {})",
                self.l_max,
                grid.m()
            )));
        }
        if !(self.k_max.is_finite() && self.k_max >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "k_max must be nonnegative, got {}",
                self.k_max
            )));
        }
        Ok(())
    }
}

/// Draw a `P`-path channel: gains i.i.d. `CN(0, 1/P)`, delays uniform on
/// `{0..l_max}` (or `[0, l_max]`), Dopplers uniform on `[-k_max, k_max]`.
pub fn sample_channel<R: Rng + ?Sized>(draw: &ChannelDraw, grid: &OtfsGrid, rng: &mut R) -> Result<PathSet> {
    draw.validate(grid)?;
    let var = 1.0 / draw.paths as f64;
    let paths = (0..draw.paths)
        .map(|_| {
            let gain = complex_normal(rng, var);
            let delay = if draw.fractional_delay {
                rng.random_range(0.0..=draw.l_max as f64)
            } else {
                rng.random_range(0..=draw.l_max) as f64
            };
            let mut doppler = if draw.k_max > 0.0 {
                rng.random_range(-draw.k_max..=draw.k_max)
            } else {
                0.0
            };
            if draw.integer_doppler {
                doppler = doppler.round();
            }
            Path::new(gain, delay, doppler)
        })
        .collect();
    PathSet::new(paths)
}

/// AWGN with variance `n0` per complex sample (`n0 / 2` per real dimension).
/// With the unit-energy constellation, `Es / N0 = 1 / n0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    n0: f64,
}

impl NoiseSpec {
    pub fn new(n0: f64) -> Result<Self> {
        if !(n0.is_finite() && n0 > 0.0) {
            return Err(Error::InvalidParameter(format!("N0 must be positive, got {n0}")));
        }
        Ok(Self { n0 })
    }

    pub fn from_snr_db(snr_db: f64) -> Result<Self> {
        Self::new(10f64.powf(-snr_db / 10.0))
    }

    pub fn n0(&self) -> f64 {
        self.n0
    }

    pub fn snr_db(&self) -> f64 {
        -10.0 * self.n0.log10()
    }
}
