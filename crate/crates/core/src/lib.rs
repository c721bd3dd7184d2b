//! Communication-complexity workbench.
//!
//! Streaming sketches, two-party protocol simulation with exact bit
//! accounting, brute-force analyzers for small function matrices,
//! executable reductions, a Hamming-cube nearest-neighbor index, exact
//! linear programming for extended formulations, and property testers.
//!
//! Numeric kernels are generic over [`scalar::Scalar`]; exact rationals are
//! the default and float instantiations exist for quick sweeps.

pub mod analyzer;
pub mod ann;
pub mod bits;
pub mod error;
pub mod gf2hash;
pub mod polytopes;
pub mod protocols;
pub mod reductions;
pub mod rng;
pub mod scalar;
pub mod sketches;
pub mod testers;

pub use bits::BitVector;
pub use error::{Error, Result};

/// Arbitrary-precision rational used for every exact quantity.
pub type Rational = num_rational::BigRational;

/// Exact-rational simplex tableau.
pub type ExactSimplex = polytopes::Simplex<Rational>;
/// Double-precision simplex tableau for quick sweeps.
pub type FloatSimplex = polytopes::Simplex<f64>;
/// Exact-rational linear system.
pub type RationalLinearSystem = polytopes::LinearSystem<Rational>;
