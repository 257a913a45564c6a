//! Iterative ground-state solver for the N-dimensional sombrero potential
//! V = (g^2/2)(r^2 - 1)^2, with an independent shooting eigensolver, the
//! one-dimensional prototype iteration and the hyperspherical angular
//! functions.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod angular;
pub mod error;
pub mod grid;
pub mod iterate;
pub mod model;
pub mod oracle;
pub mod report;

pub use angular::{build_z, eigenvalue, ode_residual, AngularFunction};
pub use error::{Error, Result};
pub use grid::{build_grid, GridConfig, QuadratureRule, RadialGrid};
pub use iterate::{solve, BoundaryCondition, SolveConfig, SolveResult};
pub use model::{validate_params, DerivedConstants, ModelParams};
pub use oracle::{check_rate_bound, fd_ground_energy, prototype1d_solve, FDConfig};
