//! Link-level building blocks for OTFS over doubly selective channels.
//!
//! The crate covers the whole receive chain used in the experiments:
//!
//! * frame geometry, constellations and random delay-Doppler channels ([`grid`],
//!   [`constellation`], [`paths`], [`rng`]);
//! * effective DD-domain channel matrices for the ISFFT/SFFT and the IZT/ZT
//!   (sinc pulse) transceivers ([`channel`]);
//! * the delay-Doppler commutation precoder that turns the channel into a sparse
//!   pattern of dense `N x N` blocks ([`ddcp`]);
//! * the hybrid detector that runs a local L-MMSE estimator per observation block
//!   and message passing across blocks, plus the full-size L-MMSE baseline
//!   ([`detector`]);
//! * matched filter bound references ([`bounds`]).

// `!(x > 0.0)` style checks are used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod channel;
pub mod constellation;
pub mod ddcp;
pub mod detector;
pub mod error;
pub mod frame;
pub mod grid;
pub mod linalg;
pub mod paths;
pub mod rng;

pub use num_complex::Complex64;

pub use bounds::{gauss_2f1, mfb_closed_form, mfb_monte_carlo, MfbEstimate, MfbQuery};
pub use channel::{
    apply_channel, dd_channel_isfft, dd_channel_izt, pulse_ambiguity, ChannelSource, DdChannel, PulseSpec,
};
pub use constellation::Constellation;
pub use ddcp::{block_partition, block_partition_by_delays, BlockSystem, CommutationMap};
pub use detector::{detect, full_lmmse_detect, BeliefMatrix, DetectionReport, DetectorConfig, GaussianMessage};
pub use error::{Error, Result};
pub use frame::{FrameVector, Layout};
pub use grid::OtfsGrid;
pub use linalg::CMatrix;
pub use paths::{sample_channel, ChannelDraw, NoiseSpec, Path, PathSet};
pub use rng::{SeedStreams, Stream};
