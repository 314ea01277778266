//! Dense column-major complex matrices and the handful of kernels the channel
//! builders and detectors need.

use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_col_major(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::LengthMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn diagonal(values: &[Complex64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn col(&self, j: usize) -> &[Complex64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [Complex64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for j in 0..self.cols {
            for (i, z) in self.col(j).iter().enumerate() {
                out.data[i * self.cols + j] = z.conj();
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for j in 0..self.cols {
            for (i, &z) in self.col(j).iter().enumerate() {
                out.data[i * self.cols + j] = z;
            }
        }
        out
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    /// `self * rhs`.
    pub fn matmul(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, rhs.rows, "matmul dimension mismatch");
        let mut out = CMatrix::zeros(self.rows, rhs.cols);
        gemm_into(self, rhs, &mut out, ZERO);
        out
    }

    /// `self * self^H`.
    pub fn gram_adjoint(&self) -> CMatrix {
        let mut out = CMatrix::zeros(self.rows, self.rows);
        gemm_into(self, &self.adjoint(), &mut out, ZERO);
        out
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, x.len(), "matvec dimension mismatch");
        let mut y = vec![ZERO; self.rows];
        for (j, &xj) in x.iter().enumerate() {
            if xj == ZERO {
                continue;
            }
            for (yi, &a) in y.iter_mut().zip(self.col(j)) {
                *yi += a * xj;
            }
        }
        y
    }

    /// `self^H * x`.
    pub fn adjoint_mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.rows, x.len(), "matvec dimension mismatch");
        (0..self.cols)
            .map(|j| self.col(j).iter().zip(x).map(|(a, b)| a.conj() * b).sum())
            .collect()
    }

    pub fn scale(&mut self, s: Complex64) {
        self.data.iter_mut().for_each(|z| *z *= s);
    }

    pub fn add_assign(&mut self, other: &CMatrix) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn submatrix(&self, row0: usize, col0: usize, rows: usize, cols: usize) -> CMatrix {
        CMatrix::from_fn(rows, cols, |i, j| self[(row0 + i, col0 + j)])
    }

    pub fn count_nonzero(&self, tol: f64) -> usize {
        self.data.iter().filter(|z| z.norm() > tol).count()
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[j * self.rows + i]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[j * self.rows + i]
    }
}

/// `out = a * b + beta * out`.
fn gemm_into(a: &CMatrix, b: &CMatrix, out: &mut CMatrix, beta: Complex64) {
    assert_eq!(a.cols, b.rows);
    assert_eq!((out.rows, out.cols), (a.rows, b.cols));
    if a.rows == 0 || b.cols == 0 {
        return;
    }
    if a.cols == 0 {
        out.scale(beta);
        return;
    }
    // SAFETY: Complex64 is #[repr(C)] { re, im }, identical in layout to [f64; 2];
    // the strides describe the column-major buffers exactly, and `out` does not
    // alias `a` or `b`.
    unsafe {
        matrixmultiply::zgemm(
            matrixmultiply::CGemmOption::Standard,
            matrixmultiply::CGemmOption::Standard,
            a.rows,
            a.cols,
            b.cols,
            [1.0, 0.0],
            a.data.as_ptr() as *const [f64; 2],
            1,
            a.rows as isize,
            b.data.as_ptr() as *const [f64; 2],
            1,
            b.rows as isize,
            [beta.re, beta.im],
            out.data.as_mut_ptr() as *mut [f64; 2],
            1,
            out.rows as isize,
        );
    }
}

/// In-place Cholesky factorisation `A = L L^H` of a Hermitian positive definite
/// `n x n` column-major matrix. Only the lower triangle is read; on success it
/// holds `L` (the strict upper triangle is left untouched).
///
/// Returns the index of the first non-positive pivot on failure.
pub fn cholesky_in_place(a: &mut [Complex64], n: usize) -> std::result::Result<(), usize> {
    debug_assert_eq!(a.len(), n * n);
    for j in 0..n {
        // left-looking: column j -= sum_k L[j..n, k] * conj(L[j, k])
        let (done, rest) = a.split_at_mut(j * n);
        let col_j = &mut rest[..n];
        for k in 0..j {
            let col_k = &done[k * n..(k + 1) * n];
            let f = col_k[j].conj();
            if f == ZERO {
                continue;
            }
            for (x, &l) in col_j[j..].iter_mut().zip(&col_k[j..]) {
                *x -= l * f;
            }
        }
        let pivot = col_j[j].re;
        if !(pivot > 0.0 && pivot.is_finite()) {
            return Err(j);
        }
        let d = pivot.sqrt();
        col_j[j] = Complex64::new(d, 0.0);
        let inv = 1.0 / d;
        for x in &mut col_j[j + 1..] {
            *x *= inv;
        }
    }
    Ok(())
}

/// Solve `L x = b` in place for a lower-triangular column-major `L`.
pub fn solve_lower_in_place(l: &[Complex64], n: usize, b: &mut [Complex64]) {
    debug_assert_eq!(b.len(), n);
    for j in 0..n {
        let col = &l[j * n..(j + 1) * n];
        let xj = b[j] / col[j];
        b[j] = xj;
        if xj == ZERO {
            continue;
        }
        for (bi, &lij) in b[j + 1..].iter_mut().zip(&col[j + 1..]) {
            *bi -= lij * xj;
        }
    }
}

/// Solve `L^H x = b` in place for a lower-triangular column-major `L`.
pub fn solve_lower_adjoint_in_place(l: &[Complex64], n: usize, b: &mut [Complex64]) {
    debug_assert_eq!(b.len(), n);
    for j in (0..n).rev() {
        let col = &l[j * n..(j + 1) * n];
        let mut acc = b[j];
        for (bi, &lij) in b[j + 1..].iter().zip(&col[j + 1..]) {
            acc -= lij.conj() * bi;
        }
        b[j] = acc / col[j].conj();
    }
}

/// Solve `A x = b` for Hermitian positive definite `A`. `A` is consumed.
pub fn solve_hpd(mut a: CMatrix, b: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = a.rows;
    if !a.is_square() || b.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "solve_hpd: {}x{} system with rhs of length {}",
            a.rows,
            a.cols,
            b.len()
        )));
    }
    cholesky_in_place(&mut a.data, n)
        .map_err(|j| Error::Numerical(format!("matrix not positive definite at pivot {j}")))?;
    let mut x = b.to_vec();
    solve_lower_in_place(&a.data, n, &mut x);
    solve_lower_adjoint_in_place(&a.data, n, &mut x);
    Ok(x)
}

/// Inverse of a Hermitian positive definite matrix.
pub fn inverse_hpd(a: &CMatrix) -> Result<CMatrix> {
    let n = a.rows;
    let mut l = a.clone();
    cholesky_in_place(&mut l.data, n)
        .map_err(|j| Error::Numerical(format!("matrix not positive definite at pivot {j}")))?;
    let mut inv = CMatrix::identity(n);
    for j in 0..n {
        let col = inv.col_mut(j);
        solve_lower_in_place(&l.data, n, col);
        solve_lower_adjoint_in_place(&l.data, n, col);
    }
    Ok(inv)
}
