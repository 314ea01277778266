//! Frame-level simulation and the BER sweep.

use otfs_core::channel::{dd_channel_isfft, dd_channel_izt};
use otfs_core::ddcp::{block_partition, block_partition_by_delays, BlockSystem, CommutationMap};
use otfs_core::detector::{detect_traced, full_lmmse_detect, DetectionReport, DetectorConfig, Trace};
use otfs_core::frame::map_bits;
use otfs_core::rng::{complex_normal, random_bits};
use otfs_core::{
    apply_channel, sample_channel, CMatrix, Complex64, Constellation, DdChannel, FrameVector, Layout, OtfsGrid,
    PathSet, SeedStreams, Stream,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ChannelMode, ExperimentConfig};
use crate::error::{SimError, SimResult};

/// One channel/payload/noise draw, shared by every SNR point and detector.
#[derive(Debug, Clone)]
pub struct FrameRealization {
    pub paths: PathSet,
    pub channel: DdChannel,
    pub system: BlockSystem,
    pub bits: Vec<u8>,
    /// Transmitted constellation indices, original DD order.
    pub symbols: Vec<usize>,
    /// `H x` without noise.
    pub clean: Vec<Complex64>,
    /// Unit-variance noise, scaled by `sqrt(N0)` per SNR point.
    pub noise: Vec<Complex64>,
}

#[derive(Debug, Clone)]
pub struct Simulator {
    cfg: ExperimentConfig,
    grid: OtfsGrid,
    constellation: Constellation,
    map: CommutationMap,
    streams: SeedStreams,
}

pub fn n0_from_db(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 10.0)
}

impl Simulator {
    pub fn new(cfg: &ExperimentConfig) -> SimResult<Self> {
        cfg.validate()?;
        let grid = cfg.grid()?;
        Ok(Self {
            cfg: cfg.clone(),
            grid,
            constellation: cfg.constellation()?,
            map: CommutationMap::new(grid.m(), grid.n())?,
            streams: SeedStreams::new(cfg.seed),
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.cfg
    }

    pub fn grid(&self) -> &OtfsGrid {
        &self.grid
    }

    pub fn constellation(&self) -> &Constellation {
        &self.constellation
    }

    pub fn map(&self) -> &CommutationMap {
        &self.map
    }

    pub fn build_channel(&self, paths: &PathSet) -> SimResult<DdChannel> {
        Ok(match self.cfg.channel {
            ChannelMode::IsfftInteger => dd_channel_isfft(&self.grid, paths)?,
            ChannelMode::IztInteger | ChannelMode::IztFractional => {
                dd_channel_izt(&self.grid, paths, self.cfg.cp_len())?
            }
        })
    }

    /// Block system the hybrid detector works on. The Zak-transform channel
    /// with integer delays keeps the delay pattern of the path set; the other
    /// modes keep every block above `zero_tol`.
    pub fn partition(&self, precoded: &CMatrix, paths: &PathSet) -> SimResult<BlockSystem> {
        let n = self.grid.n();
        Ok(match self.cfg.channel {
            ChannelMode::IztInteger => block_partition_by_delays(precoded, n, &paths.distinct_integer_delays(), 1.0)?,
            ChannelMode::IsfftInteger | ChannelMode::IztFractional => {
                block_partition(precoded, n, self.cfg.zero_tol, 1.0)?
            }
        })
    }

    pub fn sample_paths(&self, frame: u64) -> SimResult<PathSet> {
        let mut rng = self.streams.rng(frame, Stream::Channel);
        Ok(sample_channel(&self.cfg.channel_draw(), &self.grid, &mut rng)?)
    }

    pub fn realize(&self, frame: u64) -> SimResult<FrameRealization> {
        let paths = self.sample_paths(frame)?;
        let channel = self.build_channel(&paths)?;
        let precoded = self.map.precode_channel(channel.matrix())?;
        let system = self.partition(&precoded, &paths)?;

        let nbits = self.grid.len() * self.constellation.bits_per_symbol();
        let bits = random_bits(&mut self.streams.rng(frame, Stream::Bits), nbits);
        let symbols = self.constellation.bits_to_indices(&bits)?;
        let x = map_bits(&bits, &self.constellation, &self.grid)?;
        let mut unused = self.streams.rng(frame, Stream::Aux);
        let clean = apply_channel(&channel, &x, None, &mut unused)?.into_entries();
        let mut nrng = self.streams.rng(frame, Stream::Noise);
        let noise = (0..self.grid.len()).map(|_| complex_normal(&mut nrng, 1.0)).collect();
        Ok(FrameRealization {
            paths,
            channel,
            system,
            bits,
            symbols,
            clean,
            noise,
        })
    }

    /// Received frame in original DD order.
    pub fn received(&self, r: &FrameRealization, n0: f64) -> FrameVector {
        let s = n0.sqrt();
        let y = r.clean.iter().zip(&r.noise).map(|(c, z)| c + z * s).collect();
        FrameVector::new(y, Layout::DdOriginal)
    }

    fn count_bit_errors(&self, r: &FrameRealization, decided: &[usize]) -> u64 {
        r.symbols
            .iter()
            .zip(decided)
            .map(|(&a, &b)| u64::from(self.constellation.bit_distance(a, b)))
            .sum()
    }

    /// Hybrid detector on the precoded system. Decisions are returned in
    /// original order along with the report and the bit error count.
    pub fn run_hybrid(
        &self,
        r: &FrameRealization,
        n0: f64,
        config: &DetectorConfig,
        edge_mse_at: &[usize],
    ) -> SimResult<(DetectionReport, u64)> {
        let y = self.map.precode_vector(&self.received(r, n0))?;
        let mut system = r.system.clone();
        system.set_n0(n0);
        let truth = self.map.precode_slice(&r.symbols);
        let report = detect_traced(
            &y,
            &system,
            config,
            &self.constellation,
            Trace {
                truth: Some(&truth),
                edge_mse_at,
            },
        )?;
        let decided = self.map.deprecode_slice(&report.decisions);
        let errors = self.count_bit_errors(r, &decided);
        Ok((report, errors))
    }

    pub fn run_full_lmmse(&self, r: &FrameRealization, n0: f64) -> SimResult<u64> {
        let y = self.received(r, n0);
        let decided = full_lmmse_detect(&y, &r.channel, n0, &self.constellation)?;
        Ok(self.count_bit_errors(r, &decided))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DetectorKind {
    Hybrid,
    FullLmmse,
}

impl DetectorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DetectorKind::Hybrid => "hybrid",
            DetectorKind::FullLmmse => "full-lmmse",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerPoint {
    pub snr_db: f64,
    pub frames: u64,
    pub bits: u64,
    pub bit_errors: u64,
    pub ber: f64,
    /// Standard error of `ber` from the spread of per-frame error counts.
    pub stderr: f64,
    /// Mean detector iterations; zero for the one-shot L-MMSE detector.
    pub avg_iters: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerCurve {
    pub detector: DetectorKind,
    pub channel: ChannelMode,
    pub paths: usize,
    pub points: Vec<BerPoint>,
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    frames: u64,
    errors: u64,
    errors_sq: u128,
    iterations: u64,
}

impl Tally {
    fn add(&mut self, errors: u64, iterations: usize) {
        self.frames += 1;
        self.errors += errors;
        self.errors_sq += u128::from(errors) * u128::from(errors);
        self.iterations += iterations as u64;
    }

    fn point(&self, snr_db: f64, bits_per_frame: u64) -> BerPoint {
        let f = self.frames as f64;
        let bits = self.frames * bits_per_frame;
        let ber = if bits == 0 {
            0.0
        } else {
            self.errors as f64 / bits as f64
        };
        let stderr = if self.frames > 1 {
            let mean = self.errors as f64 / f;
            let var = (self.errors_sq as f64 / f - mean * mean).max(0.0) * f / (f - 1.0);
            (var / f).sqrt() / bits_per_frame as f64
        } else {
            0.0
        };
        BerPoint {
            snr_db,
            frames: self.frames,
            bits,
            bit_errors: self.errors,
            ber,
            stderr,
            avg_iters: if self.frames == 0 {
                0.0
            } else {
                self.iterations as f64 / f
            },
        }
    }
}

/// Per-frame outcome: `(point, detector, bit errors, iterations)`.
type FrameOutcome = Vec<(usize, DetectorKind, u64, usize)>;

/// BER versus SNR for the selected detectors.
///
/// Frames are processed in fixed batches; after each batch a point is retired
/// once every selected detector has `min_bit_errors` errors there. Every frame
/// uses the same channel, payload and noise draw at all SNR points, and both
/// detectors see identical realisations. Results do not depend on the size of
/// the rayon pool.
pub fn run_ber_sweep(cfg: &ExperimentConfig) -> SimResult<Vec<BerCurve>> {
    let sim = Simulator::new(cfg)?;
    let mut kinds = Vec::new();
    if cfg.detector.hybrid() {
        kinds.push(DetectorKind::Hybrid);
    }
    if cfg.detector.full_lmmse() {
        kinds.push(DetectorKind::FullLmmse);
    }
    let points = cfg.snr_db.len();
    let mut tallies = vec![vec![Tally::default(); kinds.len()]; points];
    let mut active = vec![true; points];
    let mut next = 0u64;
    while next < cfg.frames && active.iter().any(|a| *a) {
        let end = (next + cfg.batch).min(cfg.frames);
        let live: Vec<usize> = (0..points).filter(|&i| active[i]).collect();
        let outcomes: Vec<SimResult<FrameOutcome>> = (next..end)
            .into_par_iter()
            .map(|frame| {
                let r = sim.realize(frame)?;
                let mut out = Vec::with_capacity(live.len() * kinds.len());
                for &i in &live {
                    let n0 = n0_from_db(cfg.snr_db[i]);
                    for &kind in &kinds {
                        let (errors, iters) = match kind {
                            DetectorKind::Hybrid => {
                                let (rep, e) = sim.run_hybrid(&r, n0, &cfg.hybrid, &[])?;
                                (e, rep.iterations_used)
                            }
                            DetectorKind::FullLmmse => (sim.run_full_lmmse(&r, n0)?, 0),
                        };
                        out.push((i, kind, errors, iters));
                    }
                }
                Ok(out)
            })
            .collect();
        for outcome in outcomes {
            for (i, kind, errors, iters) in outcome? {
                let k = kinds.iter().position(|&x| x == kind).expect("selected detector");
                tallies[i][k].add(errors, iters);
            }
        }
        for &i in &live {
            if tallies[i].iter().all(|t| t.errors >= cfg.min_bit_errors) {
                active[i] = false;
            }
        }
        next = end;
    }
    let bits_per_frame = (sim.grid().len() * sim.constellation().bits_per_symbol()) as u64;
    Ok(kinds
        .iter()
        .enumerate()
        .map(|(k, &kind)| BerCurve {
            detector: kind,
            channel: cfg.channel,
            paths: cfg.paths,
            points: (0..points)
                .map(|i| tallies[i][k].point(cfg.snr_db[i], bits_per_frame))
                .collect(),
        })
        .collect())
}

/// Run `f` on a dedicated pool of `threads` workers (rayon's default if `None`).
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> SimResult<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        if t == 0 {
            return Err(SimError::Config("threads must be positive".into()));
        }
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| SimError::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}
