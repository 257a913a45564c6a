//! Reference solvers that share no iteration machinery with the main scheme:
//! a shooting eigensolver for the radial equation and the half-line
//! prototype iteration used to probe convergence rates.

pub mod prototype;
pub mod shooting;

pub use prototype::{bound_report, check_rate_bound, BoundRow, prototype1d_solve, BoundReport, PrototypeConfig, PrototypeResult};
pub use shooting::{fd_ground_energy, FDConfig};
