//! Computational toolkit for prime patterns in arithmetic progressions:
//! admissible tuples, multidimensional sieve weights, variational
//! optimization of the sieve functional, empirical sum verification, and a
//! scanner for prime patterns and their arithmetic progressions.

pub mod admissible;
pub mod arith;
pub mod config;
pub mod error;
pub mod report;
pub mod scanner;
pub mod sums;
pub mod variational;
pub mod weights;

pub use admissible::{check_admissible, find_admissible, find_nu0, minimal_diameter_subset};
pub use admissible::{AdmissibleTuple, Strategy, Verdict};
pub use error::{Error, Result};
