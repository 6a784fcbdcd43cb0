//! Discrete tau-calculus on a periodized line.

mod dft;
pub mod cli;
pub mod conv;
pub mod error;
pub mod field;
pub mod fourier;
pub mod gabor;
pub mod grid;
pub mod io;
pub mod operator;
pub mod quantization;
pub mod schwartz;
pub mod tfa;
pub mod warp;

pub use error::{QhaError, Result};
pub use field::{KernelMatrix, PhaseSpaceFunction, Signal, SpatialField, Spectrum};
pub use grid::{make_grid, GridSpec, LatticePoint, Tau, TAU_SWEEP};
