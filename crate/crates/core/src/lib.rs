//! Finite-bandwidth bias bounds for Nadaraya–Watson kernel regression with a
//! Gaussian kernel.
//!
//! The bound and estimator math is generic over [`Scalar`] (`f32` or `f64`);
//! designs, quadrature and simulation work in `f64`. The aliases below name
//! the `f64` instantiations.

pub mod bounds;
pub mod designs;
pub mod error;
pub mod estimator;
pub mod extmath;
pub mod geometry;
pub mod oracle;
pub mod scalar;
pub mod simulation;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type ExtReal64 = extmath::ExtReal<f64>;
pub type BoxInterval64 = geometry::BoxInterval<f64>;
pub type OffsetBox64 = geometry::OffsetBox<f64>;
pub type LipschitzSpec64 = geometry::LipschitzSpec<f64>;
pub type Oscillation64 = geometry::Oscillation<f64>;
pub type Bandwidth64 = estimator::Bandwidth<f64>;
pub type Dataset64 = estimator::Dataset<f64>;
pub type BoundInput64 = bounds::BoundInput<f64>;
