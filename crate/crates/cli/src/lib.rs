//! Monte Carlo experiments for the hybrid OTFS detector: BER sweeps against
//! the full-size L-MMSE baseline, convergence studies, matched filter bound
//! curves and channel dumps.

// `!(x > 0.0)` style checks are used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod convergence;
pub mod error;
pub mod experiment;
pub mod mfb;
pub mod output;

pub use config::{load_config, save_config, ChannelMode, ConvergenceConfig, DetectorSelection, ExperimentConfig};
pub use convergence::{run_convergence_study, ConvergenceReport, IterationPoint, MseSamples};
pub use error::{SimError, SimResult};
pub use experiment::{run_ber_sweep, with_threads, BerCurve, BerPoint, DetectorKind, FrameRealization, Simulator};
pub use mfb::{run_mfb_sweep, snr_grid, MfbMethod, MfbRow};
pub use output::{emit_ber, emit_convergence, emit_mfb, Format};
