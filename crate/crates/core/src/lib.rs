//! Best L2 approximation of a multivariate function by sums of weighted
//! ridge functions `sum_i w_i(x) g_i(a^i . x)` with fixed directions `a^i`.
//!
//! The directions are completed to a basis, which turns the domain into a
//! product set `Y = Y_1 x ... x Y_r x Y_0` in the new coordinates. All
//! integrals are tensor Gauss–Legendre sums over `Y`:
//!
//! - [`closed_form`] solves the unweighted problem from marginals of `f*`,
//! - [`weighted`] solves the general problem by block Gauss–Seidel,
//! - [`oracle`] is a dense least-squares solver over the same quadrature,
//!   used to cross-check both.

pub mod cli;
pub mod closed_form;
pub mod config;
pub mod domain;
pub mod error;
pub mod expr;
pub mod geometry;
pub mod oracle;
pub mod problem;
pub mod quadrature;
pub mod solution;
pub mod weighted;

pub use closed_form::{characterization_defect, error_closed_form, solve_unweighted};
pub use config::ProblemConfig;
pub use domain::{combine, ridge_norm_sq, GridFunction, RSetDomain, RidgeComponent};
pub use error::Error;
pub use expr::Expr;
pub use geometry::DirectionBasis;
pub use problem::Problem;
pub use solution::{ApproxSolution, Defect, Method, SolveError};
pub use weighted::{InitMode, SolverConfig, WeightedProblem};
