//! Random points in `ℓ_p` balls, Khinchine-type moments, slab correlations
//! and Gaussian sections of `B_p^n`.

pub mod apps;
pub mod error;
pub mod moments;
pub mod specfun;

pub use error::{Error, Result};
pub use specfun::PExponent;
pub mod rng;
pub mod sampling;
pub mod sections;
pub mod slabs;
pub mod stats;

pub use rng::RngState;
pub use sampling::{BallMeasure, MeasureKind};
pub use stats::Estimate;
