//! Experiment configuration (TOML).

use std::path::Path as FsPath;

use otfs_core::detector::DetectorConfig;
use otfs_core::{ChannelDraw, Constellation, OtfsGrid};
use serde::{Deserialize, Serialize};

use crate::error::{SimError, SimResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelMode {
    IsfftInteger,
    IztInteger,
    IztFractional,
}

impl ChannelMode {
    pub fn fractional_delay(self) -> bool {
        matches!(self, ChannelMode::IztFractional)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ChannelMode::IsfftInteger => "isfft-integer",
            ChannelMode::IztInteger => "izt-integer",
            ChannelMode::IztFractional => "izt-fractional",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DetectorSelection {
    Hybrid,
    FullLmmse,
    Both,
}

impl DetectorSelection {
    pub fn hybrid(self) -> bool {
        matches!(self, DetectorSelection::Hybrid | DetectorSelection::Both)
    }

    pub fn full_lmmse(self) -> bool {
        matches!(self, DetectorSelection::FullLmmse | DetectorSelection::Both)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConvergenceConfig {
    /// SNR of the message-MSE study, run with early termination off.
    pub cdf_snr_db: f64,
    /// Iteration counts at which per-edge MSE is sampled.
    pub budgets: Vec<usize>,
    pub frames: u64,
    /// Reservoir size per budget.
    pub max_samples: usize,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        Self {
            cdf_snr_db: 10.0,
            budgets: vec![2, 4, 6, 8, 10],
            frames: 200,
            max_samples: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub m: usize,
    pub n: usize,
    pub delta_f: f64,
    pub constellation: String,
    pub channel: ChannelMode,
    pub paths: usize,
    pub l_max: usize,
    pub k_max: f64,
    /// Prefix length for the IZT channels; `l_max + 4` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cp_len: Option<usize>,
    pub zero_tol: f64,
    pub snr_db: Vec<f64>,
    /// Frame cap per SNR point.
    pub frames: u64,
    /// A point stops once every selected detector has this many bit errors.
    pub min_bit_errors: u64,
    /// Frames run between stopping checks.
    pub batch: u64,
    pub detector: DetectorSelection,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    pub hybrid: DetectorConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convergence: Option<ConvergenceConfig>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            m: 32,
            n: 16,
            delta_f: 15e3,
            constellation: "qpsk".into(),
            channel: ChannelMode::IsfftInteger,
            paths: 6,
            l_max: 8,
            k_max: 8.0,
            cp_len: None,
            zero_tol: 1e-9,
            snr_db: (0..=10).map(|i| 2.0 * i as f64).collect(),
            frames: 1000,
            min_bit_errors: 100,
            batch: 16,
            detector: DetectorSelection::Both,
            seed: 1,
            output: None,
            hybrid: DetectorConfig::default(),
            convergence: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> SimResult<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| SimError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> SimResult<String> {
        toml::to_string(self).map_err(|e| SimError::Config(e.to_string()))
    }

    pub fn grid(&self) -> SimResult<OtfsGrid> {
        OtfsGrid::new(self.m, self.n, self.delta_f).map_err(|e| SimError::Config(e.to_string()))
    }

    pub fn constellation(&self) -> SimResult<Constellation> {
        Constellation::by_name(&self.constellation).map_err(|e| SimError::Config(e.to_string()))
    }

    pub fn channel_draw(&self) -> ChannelDraw {
        ChannelDraw::new(self.paths, self.l_max, self.k_max, self.channel.fractional_delay())
    }

    pub fn cp_len(&self) -> usize {
        self.cp_len.unwrap_or(self.l_max + 4)
    }

    pub fn validate(&self) -> SimResult<()> {
        let cfg_err = |field: &str, e: String| Err(SimError::Config(format!("{field}: {e}")));
        let grid = self.grid()?;
        self.constellation()?;
        if let Err(e) = self.channel_draw().validate(&grid) {
            return cfg_err("paths/l_max/k_max", e.to_string());
        }
        if self.cp_len() < self.l_max || self.cp_len() >= grid.len() {
            return cfg_err(
                "cp_len",
                format!("{} must cover l_max = {} and stay below MN", self.cp_len(), self.l_max),
            );
        }
        if !(self.zero_tol >= 0.0) {
            return cfg_err("zero_tol", format!("{} must be nonnegative", self.zero_tol));
        }
        if self.snr_db.is_empty() || self.snr_db.iter().any(|s| !s.is_finite()) {
            return cfg_err("snr_db", "needs at least one finite value".into());
        }
        if self.frames == 0 {
            return cfg_err("frames", "must be positive".into());
        }
        if self.batch == 0 {
            return cfg_err("batch", "must be positive".into());
        }
        if let Err(e) = self.hybrid.validate() {
            return cfg_err("hybrid", e.to_string());
        }
        if let Some(c) = &self.convergence {
            if c.budgets.is_empty() || c.budgets.contains(&0) {
                return cfg_err("convergence.budgets", "needs positive iteration counts".into());
            }
            if c.frames == 0 || c.max_samples == 0 {
                return cfg_err("convergence", "frames and max_samples must be positive".into());
            }
        }
        Ok(())
    }

    /// Human-readable summary of the resolved configuration.
    pub fn banner(&self) -> String {
        format!(
            "grid {}x{} df={} Hz | {} | channel {} P={} l_max={} k_max={} | frames<={} \
             min_errors={} | I_max={} damping={} eps={} | seed {}",
            self.m,
            self.n,
            self.delta_f,
            self.constellation,
            self.channel.as_str(),
            self.paths,
            self.l_max,
            self.k_max,
            self.frames,
            self.min_bit_errors,
            self.hybrid.max_iterations,
            self.hybrid.damping,
            self.hybrid.epsilon,
            self.seed
        )
    }
}

pub fn load_config(path: &FsPath) -> SimResult<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| SimError::Io {
        path: path.display().to_string(),
        source,
    })?;
    ExperimentConfig::from_toml_str(&text).map_err(|e| SimError::Config(format!("{}: {e}", path.display())))
}

pub fn save_config(cfg: &ExperimentConfig, path: &FsPath) -> SimResult<()> {
    std::fs::write(path, cfg.to_toml_string()?).map_err(|source| SimError::Io {
        path: path.display().to_string(),
        source,
    })
}
