use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Diagonal Gaussian message over one `N`-symbol block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianMessage {
    pub mean: Vec<Complex64>,
    pub var: Vec<f64>,
}

impl GaussianMessage {
    pub fn new(mean: Vec<Complex64>, var: Vec<f64>) -> Result<Self> {
        if mean.len() != var.len() {
            return Err(Error::LengthMismatch {
                expected: mean.len(),
                got: var.len(),
            });
        }
        if let Some(v) = var.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::InvalidParameter(format!("message variance {v} is not positive")));
        }
        if mean.iter().any(|m| !m.is_finite()) {
            return Err(Error::InvalidParameter("message mean is not finite".into()));
        }
        Ok(Self { mean, var })
    }

    /// Zero mean, unit variance: the message sent before anything is known.
    pub fn uninformative(n: usize) -> Self {
        Self {
            mean: vec![Complex64::new(0.0, 0.0); n],
            var: vec![1.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }
}

/// Row-stochastic `N x Q` matrix of per-symbol probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeliefMatrix {
    rows: usize,
    q: usize,
    probs: Vec<f64>,
}

impl BeliefMatrix {
    pub fn uniform(rows: usize, q: usize) -> Self {
        Self {
            rows,
            q,
            probs: vec![1.0 / q as f64; rows * q],
        }
    }

    /// Builds from row-major probabilities, normalising every row.
    pub fn from_weights(rows: usize, q: usize, mut probs: Vec<f64>) -> Result<Self> {
        if probs.len() != rows * q {
            return Err(Error::LengthMismatch {
                expected: rows * q,
                got: probs.len(),
            });
        }
        for row in probs.chunks_mut(q) {
            let s: f64 = row.iter().sum();
            if !(s > 0.0 && s.is_finite()) || row.iter().any(|p| *p < 0.0) {
                return Err(Error::InvalidParameter(
                    "belief row is not a valid weight vector".into(),
                ));
            }
            row.iter_mut().for_each(|p| *p /= s);
        }
        Ok(Self { rows, q, probs })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn row(&self, n: usize) -> &[f64] {
        &self.probs[n * self.q..(n + 1) * self.q]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.probs
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.probs
    }

    /// Largest deviation of a row sum from one.
    pub fn normalization_error(&self) -> f64 {
        self.probs
            .chunks(self.q)
            .map(|r| (r.iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Most probable index per row; ties go to the lowest index.
    pub fn argmax(&self) -> Vec<usize> {
        self.probs
            .chunks(self.q)
            .map(|r| {
                let mut best = 0;
                for (i, &p) in r.iter().enumerate().skip(1) {
                    if p > r[best] {
                        best = i;
                    }
                }
                best
            })
            .collect()
    }

    pub fn max_prob(&self, n: usize) -> f64 {
        self.row(n).iter().copied().fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argmax_prefers_lowest_on_ties() {
        let b = BeliefMatrix::from_weights(2, 4, vec![0.3, 0.3, 0.2, 0.2, 0.1, 0.2, 0.2, 0.5]).unwrap();
        assert_eq!(b.argmax(), vec![0, 3]);
    }

    #[test]
    fn weights_are_normalised() {
        let b = BeliefMatrix::from_weights(1, 4, vec![1.0, 1.0, 2.0, 4.0]).unwrap();
        assert!(b.normalization_error() < 1e-15);
        assert_eq!(b.row(0)[3], 0.5);
    }

    #[test]
    fn bad_messages_are_rejected() {
        let z = Complex64::new(0.0, 0.0);
        assert!(GaussianMessage::new(vec![z], vec![0.0]).is_err());
        assert!(GaussianMessage::new(vec![z, z], vec![1.0]).is_err());
        assert!(GaussianMessage::new(vec![Complex64::new(f64::NAN, 0.0)], vec![1.0]).is_err());
    }
}
