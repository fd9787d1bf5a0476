//! Quantum constraints on expectation values of qudit observables.
//!
//! The crate answers three related questions for a list of Hermitian
//! operators acting on a `d`-level system:
//!
//! * is a matrix a valid density operator (moment recursion test),
//! * is a vector of expectation values realizable by some state
//!   (support-function membership in the allowed region),
//! * what are the tight uncertainty and certainty bounds for a combined
//!   measure (global optimization over pure states).

pub mod cli;
pub mod constraints;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod measures;
pub mod operators;
pub mod optimizer;
pub mod states;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, EigenDecomposition, C64};
pub use operators::OperatorSet;
pub use states::{DensityState, ExpectationPoint, PureStateAngles};
