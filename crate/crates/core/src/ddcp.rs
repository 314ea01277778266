//! Delay-Doppler commutation precoding.
//!
//! The DD frame is vectorised Doppler-major: original position `j*M + i`
//! holds delay `i`, Doppler `j`. Precoding reorders it delay-major
//! (`i*N + j`), which turns the DD channel into an `M x M` grid of dense
//! `N x N` blocks of which only `L` per block-row are nonzero.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::frame::{FrameVector, Layout};
use crate::linalg::CMatrix;

/// Permutation `vec(X) -> vec(X^T)` for an `M x N` array `X`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommutationMap {
    m: usize,
    n: usize,
    forward: Vec<usize>,
    inverse: Vec<usize>,
}

impl CommutationMap {
    pub fn new(m: usize, n: usize) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::InvalidGrid(format!(
                "commutation needs positive dimensions, got {m}x{n}"
            )));
        }
        let mut forward = vec![0; m * n];
        let mut inverse = vec![0; m * n];
        for j in 0..n {
            for i in 0..m {
                let o = j * m + i;
                let p = i * n + j;
                forward[o] = p;
                inverse[p] = o;
            }
        }
        Ok(Self { m, n, forward, inverse })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    /// Precoded position of original position `o`.
    pub fn forward(&self) -> &[usize] {
        &self.forward
    }

    pub fn inverse(&self) -> &[usize] {
        &self.inverse
    }

    /// The permutation as an explicit 0/1 matrix. Intended for tests.
    pub fn to_matrix(&self) -> CMatrix {
        let len = self.len();
        let mut k = CMatrix::zeros(len, len);
        for (o, &p) in self.forward.iter().enumerate() {
            k[(p, o)] = Complex64::new(1.0, 0.0);
        }
        k
    }

    fn check_len(&self, got: usize) -> Result<()> {
        if got != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                got,
            });
        }
        Ok(())
    }

    pub fn precode_slice<T: Copy>(&self, v: &[T]) -> Vec<T> {
        let mut out = v.to_vec();
        for (o, &p) in self.forward.iter().enumerate() {
            out[p] = v[o];
        }
        out
    }

    pub fn deprecode_slice<T: Copy>(&self, v: &[T]) -> Vec<T> {
        let mut out = v.to_vec();
        for (p, &o) in self.inverse.iter().enumerate() {
            out[o] = v[p];
        }
        out
    }

    pub fn precode_vector(&self, v: &FrameVector) -> Result<FrameVector> {
        v.expect_layout(Layout::DdOriginal)?;
        self.check_len(v.len())?;
        Ok(FrameVector::new(self.precode_slice(v.entries()), Layout::DdPrecoded))
    }

    pub fn deprecode_vector(&self, v: &FrameVector) -> Result<FrameVector> {
        v.expect_layout(Layout::DdPrecoded)?;
        self.check_len(v.len())?;
        Ok(FrameVector::new(self.deprecode_slice(v.entries()), Layout::DdOriginal))
    }

    /// `K H K^T`, done as a simultaneous row and column permutation.
    pub fn precode_channel(&self, h: &CMatrix) -> Result<CMatrix> {
        let len = self.len();
        if h.rows() != len || h.cols() != len {
            return Err(Error::DimensionMismatch(format!(
                "channel is {}x{}, map needs {len}x{len}",
                h.rows(),
                h.cols()
            )));
        }
        let mut out = CMatrix::zeros(len, len);
        for c in 0..len {
            let src = h.col(self.inverse[c]);
            let dst = out.col_mut(c);
            for (r, v) in dst.iter_mut().enumerate() {
                *v = src[self.inverse[r]];
            }
        }
        Ok(out)
    }

    pub fn deprecode_channel(&self, h: &CMatrix) -> Result<CMatrix> {
        let len = self.len();
        if h.rows() != len || h.cols() != len {
            return Err(Error::DimensionMismatch(format!(
                "channel is {}x{}, map needs {len}x{len}",
                h.rows(),
                h.cols()
            )));
        }
        let mut out = CMatrix::zeros(len, len);
        for c in 0..len {
            let src = h.col(self.forward[c]);
            let dst = out.col_mut(c);
            for (r, v) in dst.iter_mut().enumerate() {
                *v = src[self.forward[r]];
            }
        }
        Ok(out)
    }
}

/// Default relative threshold below which a block counts as empty.
pub const DEFAULT_ZERO_TOL: f64 = 1e-9;

/// Block-sparse view of the precoded channel.
///
/// Observation block `d` (block-row) sees variable blocks `J(d)`; variable
/// block `c` (block-column) is seen by observation blocks `I(c)`. Both sets
/// have the common size `L`.
#[derive(Debug, Clone)]
pub struct BlockSystem {
    m: usize,
    n: usize,
    l: usize,
    n0: f64,
    /// `row_blocks[d][k]` is block `(d, col_sets[d][k])`.
    row_blocks: Vec<Vec<CMatrix>>,
    row_sets: Vec<Vec<usize>>,
    col_sets: Vec<Vec<usize>>,
}

impl BlockSystem {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Active blocks per block-row and block-column.
    pub fn l(&self) -> usize {
        self.l
    }

    pub fn n0(&self) -> f64 {
        self.n0
    }

    pub fn with_n0(mut self, n0: f64) -> Self {
        self.n0 = n0;
        self
    }

    pub fn set_n0(&mut self, n0: f64) {
        self.n0 = n0;
    }

    /// `J(d)`: block-columns active in block-row `d`, ascending.
    pub fn col_set(&self, d: usize) -> &[usize] {
        &self.col_sets[d]
    }

    /// `I(c)`: block-rows active in block-column `c`, ascending.
    pub fn row_set(&self, c: usize) -> &[usize] {
        &self.row_sets[c]
    }

    /// Blocks of block-row `d` in the order of [`col_set`](Self::col_set).
    pub fn row_blocks(&self, d: usize) -> &[CMatrix] {
        &self.row_blocks[d]
    }

    pub fn block(&self, d: usize, c: usize) -> Option<&CMatrix> {
        self.col_sets[d].binary_search(&c).ok().map(|k| &self.row_blocks[d][k])
    }

    /// Active `(d, c)` pairs, block-row major.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.col_sets
            .iter()
            .enumerate()
            .flat_map(|(d, cs)| cs.iter().map(move |&c| (d, c)))
    }

    /// Dense precoded matrix rebuilt from the stored blocks.
    pub fn reassemble(&self) -> CMatrix {
        let (m, n) = (self.m, self.n);
        let mut h = CMatrix::zeros(m * n, m * n);
        for d in 0..m {
            for (k, &c) in self.col_sets[d].iter().enumerate() {
                let blk = &self.row_blocks[d][k];
                for v in 0..n {
                    for u in 0..n {
                        h[(d * n + u, c * n + v)] = blk[(u, v)];
                    }
                }
            }
        }
        h
    }
}

/// Split a precoded `MN x MN` channel into `N x N` blocks and collect the
/// index sets of the nonzero ones.
pub fn block_partition(h: &CMatrix, n: usize, zero_tol: f64, n0: f64) -> Result<BlockSystem> {
    let m = block_count(h, n)?;
    if !(zero_tol >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "zero_tol {zero_tol} must be nonnegative"
        )));
    }
    let threshold = zero_tol * h.frobenius_norm() / m as f64;
    collect_blocks(h, n, n0, |d, c| {
        h.submatrix(d * n, c * n, n, n).frobenius_norm() > threshold
    })
}

/// Keep only the blocks `(d, c)` with `d - c ≡ l (mod M)` for one of the
/// given delays, whatever the other blocks hold.
///
/// For the Zak-transform channel with integer delays but nonzero Doppler,
/// the sinc pulse leaks a little energy into every block. This keeps the
/// sparse delay pattern and leaves the leakage out of the detector's model.
pub fn block_partition_by_delays(h: &CMatrix, n: usize, delays: &[usize], n0: f64) -> Result<BlockSystem> {
    let m = block_count(h, n)?;
    if delays.is_empty() {
        return Err(Error::InvalidParameter("delay pattern is empty".into()));
    }
    let mut active = vec![false; m];
    for &l in delays {
        active[l % m] = true;
    }
    collect_blocks(h, n, n0, |d, c| active[(d + m - c) % m])
}

fn block_count(h: &CMatrix, n: usize) -> Result<usize> {
    if !h.is_square() || n == 0 || !h.rows().is_multiple_of(n) {
        return Err(Error::DimensionMismatch(format!(
            "cannot partition a {}x{} matrix into {n}x{n} blocks",
            h.rows(),
            h.cols()
        )));
    }
    Ok(h.rows() / n)
}

fn collect_blocks(h: &CMatrix, n: usize, n0: f64, keep: impl Fn(usize, usize) -> bool) -> Result<BlockSystem> {
    let m = h.rows() / n;
    let mut row_sets = vec![Vec::new(); m];
    let mut col_sets = vec![Vec::new(); m];
    let mut row_blocks: Vec<Vec<CMatrix>> = vec![Vec::new(); m];
    for d in 0..m {
        for (c, rows) in row_sets.iter_mut().enumerate() {
            if keep(d, c) {
                col_sets[d].push(c);
                rows.push(d);
                row_blocks[d].push(h.submatrix(d * n, c * n, n, n));
            }
        }
    }
    let l = row_sets[0].len();
    for (c, set) in row_sets.iter().enumerate() {
        if set.len() != l || set.is_empty() {
            return Err(Error::BlockStructure {
                column: c,
                count: set.len(),
                expected: l,
            });
        }
    }
    for (d, set) in col_sets.iter().enumerate() {
        if set.len() != l {
            return Err(Error::BlockRowStructure {
                row: d,
                count: set.len(),
                expected: l,
            });
        }
    }
    Ok(BlockSystem {
        m,
        n,
        l,
        n0,
        row_blocks,
        row_sets,
        col_sets,
    })
}
