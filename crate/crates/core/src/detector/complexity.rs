//! Leading-order operation counts of the hybrid detector.
//!
//! Per edge `(d, c)` and iteration:
//!
//! * observation side: `L N^3` to accumulate the `L` weighted Gram products
//!   into the shared covariance, `4 N^3` for the local inverse and the
//!   estimator matrix, `L N^2` for interference cancellation;
//! * variable side: `3 L N Q` for the log-likelihoods and leave-one-out sums,
//!   `2 N Q` for damping and the Gaussian projection.
//!
//! There are `M L` edges per iteration, so the total is of order
//! `L^2 M N^3 + L^2 M N Q` per iteration.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlopEstimate {
    pub module_a: f64,
    pub module_b: f64,
    pub total: f64,
}

pub fn flop_estimate(l: usize, m: usize, n: usize, q: usize, iterations: usize) -> FlopEstimate {
    let (l, m, n, q, it) = (l as f64, m as f64, n as f64, q as f64, iterations as f64);
    let edges = it * m * l;
    let a = edges * (l * n.powi(3) + 4.0 * n.powi(3) + l * n * n);
    let b = edges * (3.0 * l * n * q + 2.0 * n * q);
    FlopEstimate {
        module_a: a,
        module_b: b,
        total: a + b,
    }
}

/// Cost of inverting the whole `MN x MN` channel once.
pub fn full_lmmse_flops(m: usize, n: usize) -> f64 {
    ((m * n) as f64).powi(3)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_in_block_size() {
        let a = flop_estimate(4, 32, 64, 4, 1).module_a;
        let b = flop_estimate(4, 32, 128, 4, 1).module_a;
        assert!((b / a - 8.0).abs() < 0.1);
    }

    #[test]
    fn single_block_is_linear_in_m() {
        let a = flop_estimate(1, 16, 16, 4, 3).total;
        let b = flop_estimate(1, 32, 16, 4, 3).total;
        assert!((b / a - 2.0).abs() < 1e-12);
    }

    #[test]
    fn reference_grid_values() {
        assert_eq!(full_lmmse_flops(32, 16), 134_217_728.0);
        let e = flop_estimate(8, 32, 16, 4, 20);
        // 5120 edges x (12 * 4096 + 2048) and 5120 x (1536 + 128)
        assert_eq!(e.module_a, 5120.0 * (12.0 * 4096.0 + 2048.0));
        assert_eq!(e.module_b, 5120.0 * 1664.0);
    }
}
