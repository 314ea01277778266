use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constellation::Constellation;
use crate::error::{Error, Result};
use crate::grid::OtfsGrid;

/// Ordering of the `MN` entries of a frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Layout {
    /// `vec(X_DD)`: delay index runs fastest.
    DdOriginal,
    /// `vec(X_DD^T)`: Doppler index runs fastest, after commutation precoding.
    DdPrecoded,
    /// Time-domain samples.
    Time,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameVector {
    entries: Vec<Complex64>,
    layout: Layout,
}

impl FrameVector {
    pub fn new(entries: Vec<Complex64>, layout: Layout) -> Self {
        Self { entries, layout }
    }

    pub fn for_grid(grid: &OtfsGrid, entries: Vec<Complex64>, layout: Layout) -> Result<Self> {
        if entries.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                got: entries.len(),
            });
        }
        Ok(Self::new(entries, layout))
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<Complex64> {
        self.entries
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn expect_layout(&self, expected: Layout) -> Result<()> {
        if self.layout != expected {
            return Err(Error::LayoutMismatch {
                expected,
                got: self.layout,
            });
        }
        Ok(())
    }
}

/// Map `MN * bits_per_symbol` bits onto a DD-domain frame (original order).
pub fn map_bits(bits: &[u8], constellation: &Constellation, grid: &OtfsGrid) -> Result<FrameVector> {
    let expected = grid.len() * constellation.bits_per_symbol();
    if bits.len() != expected {
        return Err(Error::LengthMismatch {
            expected,
            got: bits.len(),
        });
    }
    let symbols = constellation
        .bits_to_indices(bits)?
        .into_iter()
        .map(|q| constellation.point(q))
        .collect();
    Ok(FrameVector::new(symbols, Layout::DdOriginal))
}

/// Inverse of [`map_bits`]. Every decision must be a constellation point.
pub fn demap_symbols(decisions: &[Complex64], constellation: &Constellation) -> Result<Vec<u8>> {
    let mut indices = Vec::with_capacity(decisions.len());
    for (i, &z) in decisions.iter().enumerate() {
        let q = constellation.index_of(z).ok_or_else(|| Error::NotInConstellation {
            index: i,
            value: format!("{z}"),
        })?;
        indices.push(q);
    }
    let mut bits = Vec::new();
    constellation.indices_to_bits(&indices, &mut bits);
    Ok(bits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid() -> OtfsGrid {
        OtfsGrid::new(4, 2, 1.0).unwrap()
    }

    #[test]
    fn all_zero_bits_give_constant_frame() {
        let c = Constellation::qpsk();
        let f = map_bits(&[0; 16], &c, &grid()).unwrap();
        assert_eq!(f.layout(), Layout::DdOriginal);
        assert!(f.entries().iter().all(|&z| z == c.point(0)));
    }

    #[test]
    fn wrong_length_is_rejected() {
        let c = Constellation::qpsk();
        assert!(matches!(
            map_bits(&[0; 3], &c, &grid()),
            Err(Error::LengthMismatch { expected: 16, got: 3 })
        ));
    }

    #[test]
    fn off_constellation_decision_is_rejected() {
        let c = Constellation::qpsk();
        let err = demap_symbols(&[c.point(0), Complex64::new(0.3, 0.1)], &c).unwrap_err();
        assert!(matches!(err, Error::NotInConstellation { index: 1, .. }));
    }

    proptest! {
        #[test]
        fn demap_inverts_map(bits in proptest::collection::vec(0u8..2, 16)) {
            let c = Constellation::qpsk();
            let f = map_bits(&bits, &c, &grid()).unwrap();
            prop_assert_eq!(demap_symbols(f.entries(), &c).unwrap(), bits);
        }
    }
}
