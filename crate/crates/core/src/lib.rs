//! Exact-arithmetic toolkit for folded simple Lie algebras.
//!
//! The crate builds root systems and Chevalley-basis realizations over
//! arbitrary-precision rationals, folds simply-laced diagrams along their
//! automorphisms, constructs principal sl2 triples that survive folding,
//! decomposes branchings of the five folded pairs, and evaluates invariant
//! alternating forms on the irreducible sl2 strings — certifying the
//! nonvanishing statements either exactly or modulo word-sized primes.

pub mod branching;
pub mod chevalley;
pub mod folding;
pub mod invariants;
pub mod linalg;
pub mod report;
pub mod rootsys;
pub mod scalar;
pub mod tds;

/// Exact rational scalar used for all non-modular arithmetic.
pub type Rat = num_rational::BigRational;

pub use scalar::{Fp, Ring, Scalar};
