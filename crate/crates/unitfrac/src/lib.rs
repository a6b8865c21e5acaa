//! Construction and verification of unit fraction representations whose
//! denominators lie in a short interval `[N, cN]`.
//!
//! The pipeline removes terms with large prime-power factors from an exact
//! harmonic interval sum, then closes the remaining gap with a subset of
//! prime-power-smooth integers just above the interval. All primary results
//! are exact rationals; floats appear only in diagnostics.

pub mod cleanup;
pub mod dickman;
pub mod error;
pub mod pipeline;
pub mod primes;
pub mod rational;
pub mod residue;
pub mod smooth;

pub use error::{Error, Result};
pub use pipeline::{Decomposition, PipelineConfig};
pub use primes::{FactorSieve, PrimePower};
pub use rational::{BigRat, HarmonicInterval};
