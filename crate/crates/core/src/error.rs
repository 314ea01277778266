use thiserror::Error;

use crate::frame::Layout;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("symbol {index} ({value}) is not a constellation point")]
    NotInConstellation { index: usize, value: String },

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error(
        "path {path} has fractional delay index {delay}; the ISFFT/SFFT model only supports \
         integer delays, use the IZT/ZT builder instead"
    )]
    FractionalDelay { path: usize, delay: f64 },

    #[error("layout mismatch: expected {expected:?}, got {got:?}")]
    LayoutMismatch { expected: Layout, got: Layout },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid cyclic prefix: {0}")]
    CyclicPrefix(String),

    #[error(
        "block structure violation: block-column {column} has {count} active blocks, \
         expected {expected}"
    )]
    BlockStructure {
        column: usize,
        count: usize,
        expected: usize,
    },

    #[error(
        "block structure violation: block-row {row} has {count} active blocks, \
         expected {expected}"
    )]
    BlockRowStructure { row: usize, count: usize, expected: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
