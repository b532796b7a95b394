//! Periodic pseudo-spectral fields on `[0, L)^3`.
//!
//! Fields are real samples with a lazily cached half-spectrum. All operators are
//! Fourier multipliers and are exact on band-limited input.

mod fft;
pub mod field;
pub mod grid;
pub mod littlewood_paley;
pub mod ops;
pub mod random;

pub use field::{ScalarField, Spectrum, VectorField};
pub use grid::Grid;
pub use littlewood_paley::{lp_low, lp_project, DyadicRange};
pub use ops::{
    bessel_potential, curl, derivative, divergence, fractional_power, gradient, jacobian, laplacian,
    riesz, second_derivative, solve_neg_laplacian,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpectralError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("expected {expected} values, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("non-finite sample at index {index}")]
    NonFinite { index: usize },
    #[error("source has mean {mean:e}, exceeding tolerance {tolerance:e}; no periodic solution")]
    NonZeroMean { mean: f64, tolerance: f64 },
    #[error("negative power {alpha} applied to a field with mean {mean:e}")]
    NegativePowerOnMean { alpha: f64, mean: f64 },
    #[error("dyadic index {j} outside resolvable range [{min}, {max}]")]
    OutOfBand { j: i32, min: i32, max: i32 },
}
