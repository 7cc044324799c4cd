//! Spectral analysis and simulation of the ball walk on `R^d`.

pub mod analysis;
pub mod density;
pub mod eigen;
pub mod error;
pub mod grid;
pub mod multiplier;
pub mod operator;
pub mod quadrature;
pub mod walk;

pub use density::{Density, DensityConfig, DensityKind, RadialDensity};
pub use error::{Error, Result};
pub use grid::Grid;
pub use operator::{DiscreteOperator, Form, LinearOperator, Scheme, WeightRule};
