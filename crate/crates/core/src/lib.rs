//! Exact lattice counting and volume computations for p-families of
//! monomial ideals over regular and toric monomial models.

pub mod cone;
pub mod dsl;
pub mod error;
pub mod family;
pub mod lab;
pub mod lattice;
pub mod linalg;
pub mod orthant;
pub mod pbody;
pub mod psystem;
pub mod report;
pub mod runner;
pub mod sampling;
pub mod semigroup;
pub mod store;
pub mod toric;

pub use error::{Error, NotStandardReason, Result};
pub use lattice::{a_compare, box_count, enumerate_box, LatticePoint, WeightVector};

/// Exact rational numbers used throughout.
pub type Rational = num_rational::BigRational;
