use std::f64::consts::PI;

use otfs_core::channel::{dd_channel_isfft, dd_channel_izt, doppler_dft_vector, time_channel_isfft, time_channel_izt};
use otfs_core::ddcp::{block_partition, DEFAULT_ZERO_TOL};
use otfs_core::rng::complex_normal;
use otfs_core::{
    apply_channel, pulse_ambiguity, CMatrix, CommutationMap, Complex64, FrameVector, Layout, NoiseSpec, OtfsGrid, Path,
    PathSet, SeedStreams, Stream,
};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn unit(delay: f64, doppler: f64) -> Path {
    Path::new(c(1.0, 0.0), delay, doppler)
}

fn two_delay_paths() -> PathSet {
    PathSet::new(vec![unit(1.0, 0.7), unit(3.0, -1.7)]).unwrap()
}

/// `F_N ⊗ I_M` written out entry by entry.
fn kron_dft(m: usize, n: usize) -> CMatrix {
    CMatrix::from_fn(m * n, m * n, |r, col| {
        if r % m != col % m {
            return c(0.0, 0.0);
        }
        let (k, t) = (r / m, col / m);
        Complex64::from_polar(1.0 / (n as f64).sqrt(), -2.0 * PI * (k * t) as f64 / n as f64)
    })
}

/// Σ h e^{-j2πνl/MN} Δ^ν Π^l from explicit matrices and dense products.
fn literal_dd_isfft(m: usize, n: usize, paths: &PathSet) -> (CMatrix, CMatrix) {
    let mn = m * n;
    let pi = CMatrix::from_fn(
        mn,
        mn,
        |r, col| if r == (col + 1) % mn { c(1.0, 0.0) } else { c(0.0, 0.0) },
    );
    let mut ht = CMatrix::zeros(mn, mn);
    for p in paths.paths() {
        let nu = p.doppler;
        let l = p.delay as usize;
        let delta = CMatrix::diagonal(
            &(0..mn)
                .map(|r| Complex64::from_polar(1.0, 2.0 * PI * nu * r as f64 / mn as f64))
                .collect::<Vec<_>>(),
        );
        let mut shift = CMatrix::identity(mn);
        for _ in 0..l {
            shift = pi.matmul(&shift);
        }
        let mut term = delta.matmul(&shift);
        term.scale(p.gain * Complex64::from_polar(1.0, -2.0 * PI * nu * l as f64 / mn as f64));
        ht.add_assign(&term);
    }
    let u = kron_dft(m, n);
    let hdd = u.matmul(&ht).matmul(&u.adjoint());
    (ht, hdd)
}

fn path_strategy(l_max: usize) -> impl Strategy<Value = Path> {
    (-1.0f64..1.0, -1.0f64..1.0, 0..=l_max, -3.0f64..3.0).prop_map(|(re, im, l, k)| Path::new(c(re, im), l as f64, k))
}

fn grid_and_paths() -> impl Strategy<Value = (usize, usize, PathSet)> {
    (2usize..=8, 2usize..=8).prop_flat_map(|(m, n)| {
        (Just(m), Just(n), prop::collection::vec(path_strategy(m - 1), 1..4))
            .prop_map(|(m, n, v)| (m, n, PathSet::new(v).unwrap()))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn isfft_matches_literal_construction((m, n, paths) in grid_and_paths()) {
        let grid = OtfsGrid::new(m, n, 15e3).unwrap();
        let (ht_ref, hdd_ref) = literal_dd_isfft(m, n, &paths);
        let ht = time_channel_isfft(&grid, &paths).unwrap();
        prop_assert!(ht.max_abs_diff(&ht_ref) < 1e-12);
        let hdd = dd_channel_isfft(&grid, &paths).unwrap();
        prop_assert!(hdd.matrix().max_abs_diff(&hdd_ref) < 1e-11);
    }

    #[test]
    fn dd_transform_preserves_frobenius_norm((m, n, paths) in grid_and_paths()) {
        let grid = OtfsGrid::new(m, n, 15e3).unwrap();
        let ht = time_channel_isfft(&grid, &paths).unwrap();
        let hdd = dd_channel_isfft(&grid, &paths).unwrap();
        prop_assert!((ht.frobenius_norm() - hdd.matrix().frobenius_norm()).abs() < 1e-10);
    }

    #[test]
    fn izt_matches_literal_composition((m, n, paths) in grid_and_paths(), extra in 0usize..3) {
        // (F ⊗ I) R_cp (Σ G_i) A_cp (F^H ⊗ I) with every factor built densely
        let grid = OtfsGrid::new(m, n, 15e3).unwrap();
        let mn = m * n;
        let lcp = (paths.max_delay() as usize + extra).min(mn - 1);
        let mut sum = CMatrix::zeros(mn + lcp, mn + lcp);
        for p in paths.paths() {
            sum.add_assign(&otfs_core::channel::path_time_matrix_izt(&grid, p, lcp).unwrap());
        }
        let a_cp = CMatrix::from_fn(mn + lcp, mn, |r, col| {
            let src = if r < lcp { mn - lcp + r } else { r - lcp };
            if src == col { c(1.0, 0.0) } else { c(0.0, 0.0) }
        });
        let r_cp = CMatrix::from_fn(mn, mn + lcp, |r, col| if col == r + lcp { c(1.0, 0.0) } else { c(0.0, 0.0) });
        let u = kron_dft(m, n);
        let want = u.matmul(&r_cp).matmul(&sum).matmul(&a_cp).matmul(&u.adjoint());
        let got = dd_channel_izt(&grid, &paths, lcp).unwrap();
        prop_assert!(got.matrix().max_abs_diff(&want) < 1e-11);
    }
}

#[test]
fn isfft_integer_doppler_blocks_match_dense_product() {
    let (m, n) = (4, 6);
    let grid = OtfsGrid::new(m, n, 15e3).unwrap();
    let paths = PathSet::new(vec![unit(2.0, 3.0)]).unwrap();
    let hdd = dd_channel_isfft(&grid, &paths).unwrap();
    let (_, reference) = literal_dd_isfft(m, n, &paths);
    assert!(hdd.matrix().max_abs_diff(&reference) < 1e-12);
    for bi in 0..n {
        for bj in 0..n {
            let active = hdd.matrix().submatrix(bi * m, bj * m, m, m).frobenius_norm() > 1e-9;
            assert_eq!(active, (bi + n - bj) % n == 3);
        }
    }
}

/// Composite Gauss-Legendre evaluation of the defining integral
/// `∫ p(t) p*(t-τ) e^{-j2πν(t-τ)} dt` for `p(t) = sinc(t/Ts)/√Ts`, with
/// `Ts = 1`, over `[-T, T]`.
fn ambiguity_quadrature(tau: f64, nu: f64) -> Complex64 {
    const NODES: [f64; 8] = [
        -0.960_289_856_497_536_3,
        -0.796_666_477_413_626_7,
        -0.525_532_409_916_329,
        -0.183_434_642_495_649_8,
        0.183_434_642_495_649_8,
        0.525_532_409_916_329,
        0.796_666_477_413_626_7,
        0.960_289_856_497_536_3,
    ];
    const WEIGHTS: [f64; 8] = [
        0.101_228_536_290_376_26,
        0.222_381_034_453_374_5,
        0.313_706_645_877_887_3,
        0.362_683_783_378_362,
        0.362_683_783_378_362,
        0.313_706_645_877_887_3,
        0.222_381_034_453_374_5,
        0.101_228_536_290_376_26,
    ];
    let sinc = |x: f64| if x == 0.0 { 1.0 } else { (PI * x).sin() / (PI * x) };
    let half_span = 20_000.0;
    let width = 0.25;
    let panels = (2.0 * half_span / width) as usize;
    let mut acc = c(0.0, 0.0);
    for k in 0..panels {
        let a = -half_span + k as f64 * width;
        let mid = a + 0.5 * width;
        let mut panel = c(0.0, 0.0);
        for (x, w) in NODES.iter().zip(WEIGHTS) {
            let t = mid + 0.5 * width * x;
            let f = sinc(t) * sinc(t - tau);
            panel += Complex64::from_polar(f * w, -2.0 * PI * nu * (t - tau));
        }
        acc += panel * (0.5 * width);
    }
    acc
}

#[test]
fn ambiguity_closed_form_matches_quadrature() {
    let ts = 1e-6;
    for &(tau, nu) in &[(0.5, 0.25), (-1.3, 0.4), (2.7, -0.1), (0.0, 0.6), (3.25, -0.75)] {
        let oracle = ambiguity_quadrature(tau, nu);
        let closed = pulse_ambiguity(tau * ts, nu / ts, ts);
        assert!(
            (oracle - closed).norm() < 1e-8,
            "tau={tau} nu={nu}: quadrature {oracle} closed {closed}"
        );
    }
}

#[test]
fn ambiguity_is_bounded_and_band_limited() {
    let ts = 2.5e-7;
    for i in -40..=40 {
        for j in -30..=30 {
            let tau = i as f64 * 0.17 * ts;
            let nu = j as f64 * 0.05 / ts;
            let a = pulse_ambiguity(tau, nu, ts);
            assert!(a.norm() <= 1.0 + 1e-15);
            if (j as f64 * 0.05).abs() >= 1.0 {
                assert_eq!(a, c(0.0, 0.0));
            }
        }
    }
}

#[test]
fn ambiguity_nyquist_zeros() {
    let grid = OtfsGrid::new(32, 16, 15e3).unwrap();
    let ts = grid.sample_interval();
    let mn = grid.len() as i64;
    for m in -mn..=mn {
        let a = pulse_ambiguity(m as f64 * ts, 0.0, ts);
        let want = if m == 0 { 1.0 } else { 0.0 };
        assert!((a - want).norm() < 1e-15, "m = {m}: {a}");
    }
}

#[test]
fn izt_identity_for_trivial_path() {
    let grid = OtfsGrid::new(6, 4, 15e3).unwrap();
    let paths = PathSet::new(vec![unit(0.0, 0.0)]).unwrap();
    for lcp in [0, 1, 5, 23] {
        let h = dd_channel_izt(&grid, &paths, lcp).unwrap();
        assert!(h.matrix().max_abs_diff(&CMatrix::identity(24)) < 1e-12);
    }
}

#[test]
fn izt_rows_have_unit_norm_for_integer_delays() {
    let grid = OtfsGrid::new(8, 4, 15e3).unwrap();
    for delay in 0..=5 {
        let paths = PathSet::new(vec![Path::new(Complex64::from_polar(1.0, 0.4), delay as f64, 0.0)]).unwrap();
        let h = time_channel_izt(&grid, &paths, 6).unwrap();
        for r in 0..32 {
            let norm: f64 = (0..32).map(|col| h[(r, col)].norm_sqr()).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-6, "delay {delay} row {r}: {norm}");
        }
    }
}

#[test]
fn izt_rows_lose_energy_for_fractional_delays() {
    // The wrapped sinc interpolator is truncated to one frame, so a
    // fractional delay leaks a little energy out of every row. The loss is
    // largest for half-sample delays and shrinks with the frame length.
    let worst = |m: usize, n: usize| {
        let grid = OtfsGrid::new(m, n, 15e3).unwrap();
        let paths = PathSet::new(vec![unit(2.5, 0.0)]).unwrap();
        let h = time_channel_izt(&grid, &paths, 6).unwrap();
        (0..m * n)
            .map(|r| {
                let e: f64 = (0..m * n).map(|col| h[(r, col)].norm_sqr()).sum();
                (e.sqrt() - 1.0).abs()
            })
            .fold(0.0, f64::max)
    };
    let small = worst(8, 4);
    let large = worst(32, 16);
    assert!(small > 1e-3 && small < 0.05, "{small}");
    assert!(large < small, "{large} vs {small}");
}

#[test]
fn izt_agrees_with_isfft_for_integer_delays_without_doppler() {
    let grid = OtfsGrid::new(8, 4, 15e3).unwrap();
    let paths = PathSet::new(vec![
        Path::new(c(0.8, -0.3), 1.0, 0.0),
        Path::new(c(-0.2, 0.5), 3.0, 0.0),
    ])
    .unwrap();
    let a = dd_channel_isfft(&grid, &paths).unwrap();
    let b = dd_channel_izt(&grid, &paths, 7).unwrap();
    assert!(a.matrix().max_abs_diff(b.matrix()) < 1e-6);
}

#[test]
fn izt_departs_from_isfft_with_doppler() {
    // The sinc pulse's ambiguity shrinks and widens with Doppler as
    // (1 - |ν|Ts) sinc(τ(1/Ts - |ν|)); the rectangular-pulse model has no such
    // factor, so the two builders differ at order |ν|Ts = k/MN.
    let grid = OtfsGrid::new(8, 4, 15e3).unwrap();
    let a = dd_channel_isfft(&grid, &two_delay_paths()).unwrap();
    let b = dd_channel_izt(&grid, &two_delay_paths(), 7).unwrap();
    let dev = a.matrix().max_abs_diff(b.matrix());
    assert!(dev > 1e-3 && dev < 0.5, "{dev}");
    let big = OtfsGrid::new(32, 16, 15e3).unwrap();
    let a = dd_channel_isfft(&big, &two_delay_paths()).unwrap();
    let b = dd_channel_izt(&big, &two_delay_paths(), 7).unwrap();
    assert!(a.matrix().max_abs_diff(b.matrix()) < dev);
}

#[test]
fn two_delay_blocks_after_precoding() {
    let grid = OtfsGrid::new(8, 4, 15e3).unwrap();
    let k = CommutationMap::new(8, 4).unwrap();
    let h = dd_channel_isfft(&grid, &two_delay_paths()).unwrap();
    let sys = block_partition(&k.precode_channel(h.matrix()).unwrap(), 4, DEFAULT_ZERO_TOL, 0.1).unwrap();
    assert_eq!(sys.l(), 2);
    for d in 0..8 {
        // delays 1 and 3 couple block-row d to block-columns d-1 and d-3
        assert_eq!(
            sys.col_set(d),
            &{
                let mut v = vec![(d + 7) % 8, (d + 5) % 8];
                v.sort();
                v
            }[..]
        );
    }
}

#[test]
fn fractional_delays_fill_every_block() {
    let grid = OtfsGrid::new(8, 4, 15e3).unwrap();
    let k = CommutationMap::new(8, 4).unwrap();
    let paths = PathSet::new(vec![unit(1.4, 0.7), unit(3.3, -1.7)]).unwrap();
    let h = dd_channel_izt(&grid, &paths, 8).unwrap();
    let sys = block_partition(&k.precode_channel(h.matrix()).unwrap(), 4, DEFAULT_ZERO_TOL, 0.1).unwrap();
    assert_eq!(sys.l(), 8);
}

#[test]
fn noiseless_identity_channel_passes_symbols() {
    let grid = OtfsGrid::new(4, 2, 15e3).unwrap();
    let paths = PathSet::new(vec![unit(0.0, 0.0)]).unwrap();
    let h = dd_channel_isfft(&grid, &paths).unwrap();
    let x = FrameVector::new((0..8).map(|i| c(i as f64, -(i as f64))).collect(), Layout::DdOriginal);
    let mut rng = SeedStreams::new(0).rng(0, Stream::Noise);
    let y = apply_channel(&h, &x, None, &mut rng).unwrap();
    let err: f64 = y
        .entries()
        .iter()
        .zip(x.entries())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    assert!(err < 1e-12);
    let bad = FrameVector::new(x.entries().to_vec(), Layout::DdPrecoded);
    assert!(apply_channel(&h, &bad, None, &mut rng).is_err());
}

#[test]
fn noise_power_matches_n0() {
    let grid = OtfsGrid::new(4, 4, 15e3).unwrap();
    let h = dd_channel_isfft(&grid, &PathSet::new(vec![unit(0.0, 0.0)]).unwrap()).unwrap();
    let x = FrameVector::new(vec![c(0.5, 0.5); 16], Layout::DdOriginal);
    let noise = NoiseSpec::new(0.1).unwrap();
    let mut rng = SeedStreams::new(11).rng(0, Stream::Noise);
    let trials = 4000;
    let mut acc = 0.0;
    for _ in 0..trials {
        let y = apply_channel(&h, &x, Some(&noise), &mut rng).unwrap();
        acc += y
            .entries()
            .iter()
            .zip(x.entries())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>();
    }
    let per_sample = acc / (trials * 16) as f64;
    // each |n|^2 is exponential with mean and std 0.1
    let se = 0.1 / ((trials * 16) as f64).sqrt();
    assert!((per_sample - 0.1).abs() < 4.0 * se, "{per_sample}");
}

#[test]
fn dd_noise_stays_white() {
    let grid = OtfsGrid::new(2, 4, 15e3).unwrap();
    let n0 = 0.3;
    let draws = 10_000;
    let len = grid.len();
    let mut rng = SeedStreams::new(5).rng(0, Stream::Noise);
    let mut cov = vec![c(0.0, 0.0); len * len];
    for _ in 0..draws {
        let t: Vec<Complex64> = (0..len).map(|_| complex_normal(&mut rng, n0)).collect();
        let v = doppler_dft_vector(&t, &grid);
        for i in 0..len {
            for j in 0..len {
                cov[i * len + j] += v[i] * v[j].conj();
            }
        }
    }
    let f = draws as f64;
    // diagonal: mean of exponential(n0), SE n0/√draws; off-diagonal: each of
    // re and im has SE n0/√(2 draws)
    let se_diag = n0 / f.sqrt();
    let se_off = n0 / (2.0 * f).sqrt();
    for i in 0..len {
        for j in 0..len {
            let s = cov[i * len + j] / f;
            if i == j {
                assert!((s.re - n0).abs() < 3.5 * se_diag, "diag {i}: {s}");
            } else {
                assert!(s.re.abs() < 4.0 * se_off && s.im.abs() < 4.0 * se_off, "({i},{j}): {s}");
            }
        }
    }
}

#[derive(serde::Serialize, serde::Deserialize)]
struct Golden {
    seed: u64,
    n0: f64,
    re: Vec<f64>,
    im: Vec<f64>,
}

fn golden_output(seed: u64, n0: f64) -> Vec<Complex64> {
    let grid = OtfsGrid::new(8, 4, 15e3).unwrap();
    let h = dd_channel_isfft(&grid, &two_delay_paths()).unwrap();
    let streams = SeedStreams::new(seed);
    let con = otfs_core::Constellation::qpsk();
    let bits = otfs_core::rng::random_bits(&mut streams.rng(0, Stream::Bits), 64);
    let x = otfs_core::frame::map_bits(&bits, &con, &grid).unwrap();
    let mut rng = streams.rng(0, Stream::Noise);
    apply_channel(&h, &x, Some(&NoiseSpec::new(n0).unwrap()), &mut rng)
        .unwrap()
        .into_entries()
}

const GOLDEN: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/two_delay_received.json");

#[test]
fn two_delay_received_frame_is_stable() {
    let text = std::fs::read_to_string(GOLDEN).expect("golden file present");
    let g: Golden = serde_json::from_str(&text).unwrap();
    let y = golden_output(g.seed, g.n0);
    assert_eq!(y.len(), g.re.len());
    for (i, v) in y.iter().enumerate() {
        assert!(
            (v.re - g.re[i]).abs() < 1e-12 && (v.im - g.im[i]).abs() < 1e-12,
            "entry {i}"
        );
    }
}

#[test]
#[ignore = "rewrites the stored regression vector"]
fn regenerate_two_delay_received_frame() {
    let (seed, n0) = (2024, 0.05);
    let y = golden_output(seed, n0);
    let g = Golden {
        seed,
        n0,
        re: y.iter().map(|v| v.re).collect(),
        im: y.iter().map(|v| v.im).collect(),
    };
    std::fs::write(GOLDEN, serde_json::to_string_pretty(&g).unwrap()).unwrap();
}
