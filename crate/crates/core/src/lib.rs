//! Exact dimension computations for the functional varieties of polynomial
//! neural networks.
//!
//! A network with widths `(d_0, ..., d_h)` and activation `x -> x^r` computes
//! `d_h` homogeneous polynomials of degree `r^(h-1)` in `d_0` variables. The
//! closure of the set of all such outputs is an irreducible variety; its
//! dimension, obtained here as the generic rank of the Jacobian of the
//! weights-to-coefficients map, measures the expressivity of the architecture.

pub mod algebra;
pub mod bounds;
pub mod dimension;
pub mod error;
pub mod network;
pub mod poly;
pub mod report;
pub mod search;
pub mod seed;
pub mod tables;

pub use algebra::{ExactMatrix, Field, FieldLabel, PrimeField, Rationals};
pub use bounds::{BoundReport, ambient_dim, bound_report, naive_bound};
pub use dimension::{dimension, DimensionConfig, DimensionEstimate, FillingVerdict, Method};
pub use error::{Error, Result};
pub use network::{Architecture, IntegerWeights, WeightAssignment};
pub use poly::{HomogPoly, MonomialBasis, PolyVector};
