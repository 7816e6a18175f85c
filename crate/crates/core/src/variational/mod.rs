//! Variational machinery for the sieve: exact simplex integrals, the
//! Rayleigh quotient sum_j J_j(F)/I(F), and certified lower bounds on its
//! supremum M_k.

pub mod optimize;
pub mod poly;
pub mod sym;

pub use optimize::{
    combine_basis, compute_rk, optimize_mk, optimize_mk_with_basis, symmetric_basis, BasisElement,
    VariationalResult,
};
pub use poly::{simplex_monomial_integral, PolyF};
pub use sym::{integrate_first_coord, j1_bilinear, SimplexIntegrator, SymPoly};
