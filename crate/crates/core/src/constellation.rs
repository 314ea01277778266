use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Distance below which a decision is considered equal to a constellation point.
const MEMBERSHIP_TOL: f64 = 1e-9;

/// A finite unit-energy constellation with a bit labelling.
///
/// `points[q]` carries the label `q`, read MSB first: for QPSK the bit pair
/// `(b0, b1)` selects `points[2 * b0 + b1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    points: Vec<Complex64>,
    bits_per_symbol: usize,
}

impl Constellation {
    pub fn new(points: Vec<Complex64>) -> Result<Self> {
        let q = points.len();
        if q < 2 || !q.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "constellation size must be a power of two >= 2, got {q}"
            )));
        }
        for i in 0..q {
            for j in i + 1..q {
                if (points[i] - points[j]).norm() < MEMBERSHIP_TOL {
                    return Err(Error::InvalidParameter(format!(
                        "constellation points {i} and {j} coincide"
                    )));
                }
            }
        }
        let energy = points.iter().map(|p| p.norm_sqr()).sum::<f64>() / q as f64;
        if (energy - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "constellation must have unit mean energy, got {energy}"
            )));
        }
        Ok(Self {
            points,
            bits_per_symbol: q.trailing_zeros() as usize,
        })
    }

    /// Gray-labelled QPSK:
    ///
    /// | bits | point        |
    /// |------|--------------|
    /// | 00   | ( 1 + j)/√2  |
    /// | 01   | (-1 + j)/√2  |
    /// | 11   | (-1 - j)/√2  |
    /// | 10   | ( 1 - j)/√2  |
    ///
    /// The first bit picks the sign of the imaginary part, the second the sign
    /// of the real part, so neighbouring points differ in exactly one bit.
    pub fn qpsk() -> Self {
        let a = FRAC_1_SQRT_2;
        Self {
            points: vec![
                Complex64::new(a, a),
                Complex64::new(-a, a),
                Complex64::new(a, -a),
                Complex64::new(-a, -a),
            ],
            bits_per_symbol: 2,
        }
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "qpsk" => Ok(Self::qpsk()),
            other => Err(Error::InvalidParameter(format!("unknown constellation '{other}'"))),
        }
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn point(&self, index: usize) -> Complex64 {
        self.points[index]
    }

    /// Number of points `Q`.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    pub fn mean_energy(&self) -> f64 {
        self.points.iter().map(|p| p.norm_sqr()).sum::<f64>() / self.len() as f64
    }

    /// Index of the closest point; ties go to the lowest index.
    pub fn nearest(&self, z: Complex64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (q, p) in self.points.iter().enumerate() {
            let d = (z - p).norm_sqr();
            if d < best_d {
                best_d = d;
                best = q;
            }
        }
        best
    }

    /// Exact membership lookup, used to validate decisions.
    pub fn index_of(&self, z: Complex64) -> Option<usize> {
        let q = self.nearest(z);
        ((z - self.points[q]).norm() < MEMBERSHIP_TOL).then_some(q)
    }

    /// Map a bit stream to symbol indices, `bits_per_symbol` bits per symbol, MSB first.
    pub fn bits_to_indices(&self, bits: &[u8]) -> Result<Vec<usize>> {
        let k = self.bits_per_symbol;
        if !bits.len().is_multiple_of(k) {
            return Err(Error::LengthMismatch {
                expected: bits.len().div_ceil(k) * k,
                got: bits.len(),
            });
        }
        Ok(bits
            .chunks_exact(k)
            .map(|chunk| chunk.iter().fold(0usize, |acc, &b| (acc << 1) | (b & 1) as usize))
            .collect())
    }

    /// Append the label bits of every index to `out`.
    pub fn indices_to_bits(&self, indices: &[usize], out: &mut Vec<u8>) {
        let k = self.bits_per_symbol;
        out.reserve(indices.len() * k);
        for &q in indices {
            for b in (0..k).rev() {
                out.push(((q >> b) & 1) as u8);
            }
        }
    }

    /// Number of differing label bits between two symbol indices.
    pub fn bit_distance(&self, a: usize, b: usize) -> u32 {
        (a ^ b).count_ones()
    }
}
