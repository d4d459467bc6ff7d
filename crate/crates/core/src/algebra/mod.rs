//! Exact coefficient fields and dense linear algebra over them.

pub mod bareiss;
mod field;
mod matrix;
mod prime;

pub use field::{rational_to_integer, Field, FieldLabel, PrimeField, Rationals, PRIME_LOWER, PRIME_UPPER};
pub use matrix::{rank, solve, ExactMatrix};
pub use prime::{is_prime, random_prime};
