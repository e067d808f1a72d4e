//! Numerical toolkit for frequency-uniform decompositions, modulation-space
//! norms and their scaling limits, dispersive space-time estimates, and the
//! small-data Picard iteration for generalized KdV and the fourth-order
//! derivative NLS.
//!
//! All core machinery is generic over the scalar type via the [`Scalar`]
//! trait (`f32` or `f64`); theorem-parameter calculators use exact rational
//! arithmetic. Concrete `f64` aliases live at the crate root.

pub mod error;
pub mod estimates;
pub mod families;
pub mod freqdecomp;
pub mod grid;
pub mod gridio;
pub mod modnorms;
pub mod propagators;
pub mod report;
pub mod scalar;
pub mod solver;
pub mod workspace;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Default `f64` aliases for the main carriers.
pub type GridSpec64 = grid::GridSpec<f64>;
pub type GridFunction64 = grid::GridFunction<f64>;
pub type SpaceTimeField64 = grid::SpaceTimeField<f64>;
pub type Decomposition64 = modnorms::Decomposition<f64>;
pub type CutoffProfile64 = freqdecomp::CutoffProfile<f64>;

/// `f32` aliases.
pub type GridSpec32 = grid::GridSpec<f32>;
pub type GridFunction32 = grid::GridFunction<f32>;
pub type SpaceTimeField32 = grid::SpaceTimeField<f32>;
