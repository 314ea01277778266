//! Shared fixtures for the benchmarks: one received frame over a random
//! channel, in both layouts.

use otfs_core::ddcp::DEFAULT_ZERO_TOL;
use otfs_core::rng::{complex_normal, random_bits};
use otfs_core::{
    block_partition, dd_channel_isfft, dd_channel_izt, sample_channel, BlockSystem, ChannelDraw, CommutationMap,
    Constellation, DdChannel, FrameVector, Layout, OtfsGrid, PathSet, PulseSpec, SeedStreams, Stream,
};

pub struct Fixture {
    pub grid: OtfsGrid,
    pub paths: PathSet,
    pub channel: DdChannel,
    pub system: BlockSystem,
    pub y: FrameVector,
    pub y_pre: FrameVector,
    pub n0: f64,
}

impl Fixture {
    /// 32x16 grid, `l_max = k_max = 8`, QPSK at `snr_db`.
    pub fn reference(paths: usize, fractional_delay: bool, snr_db: f64, seed: u64) -> Self {
        let grid = OtfsGrid::new(32, 16, 15e3).expect("valid grid");
        let streams = SeedStreams::new(seed);
        let draw = ChannelDraw::new(paths, 8, 8.0, fractional_delay);
        let paths = sample_channel(&draw, &grid, &mut streams.rng(0, Stream::Channel)).expect("valid draw");
        let channel = if fractional_delay {
            dd_channel_izt(&grid, &paths, PulseSpec::default_cp_len(8)).expect("izt channel")
        } else {
            dd_channel_isfft(&grid, &paths).expect("isfft channel")
        };
        let n0 = 10f64.powf(-snr_db / 10.0);
        let map = CommutationMap::new(grid.m(), grid.n()).expect("map");
        let hp = map.precode_channel(channel.matrix()).expect("precode");
        let system = block_partition(&hp, grid.n(), DEFAULT_ZERO_TOL, n0).expect("block structure");
        let con = Constellation::qpsk();
        let bits = random_bits(&mut streams.rng(0, Stream::Bits), 2 * grid.len());
        let x: Vec<_> = con
            .bits_to_indices(&bits)
            .expect("bits")
            .into_iter()
            .map(|i| con.point(i))
            .collect();
        let mut noise = streams.rng(0, Stream::Noise);
        let y: Vec<_> = channel
            .matrix()
            .mul_vec(&x)
            .into_iter()
            .map(|v| v + complex_normal(&mut noise, n0))
            .collect();
        let y = FrameVector::new(y, Layout::DdOriginal);
        let y_pre = map.precode_vector(&y).expect("precode");
        Self {
            grid,
            paths,
            channel,
            system,
            y,
            y_pre,
            n0,
        }
    }
}
