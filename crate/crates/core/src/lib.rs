//! Steady-state flow in pipeline networks, solved in potential form.
//!
//! The governing system couples a friction law on every pipe, a fixed
//! potential ratio on every compressor, mass balance at non-slack junctions
//! and prescribed potentials at slack junctions. Written in terms of nodal
//! potentials (rather than pressures) the system always has exactly one
//! solution for an admissible network. [`solver::homotopy_solve`] finds it by
//! deforming the friction law `phi |phi|^s` from the linear case `s = 0`,
//! which is a nonsingular linear system, to the physical case `s = 1`.
//!
//! Pressures are recovered afterwards through the equation of state
//! ([`eos`]) and [`feasibility`] decides whether the generalized solution is
//! physically meaningful.

pub mod bounds;
pub mod eos;
pub mod feasibility;
pub mod generate;
pub mod io;
pub mod linalg;
pub mod network;
pub mod reference;
pub mod residual;
pub mod solver;

pub use bounds::{compute_bounds, BoundsMode, DomainBounds};
pub use eos::{EosError, EosKind, EosParams, RecoveredPressure};
pub use feasibility::{classify, FeasibilityReport, Overall};
pub use network::{
    Boundary, Device, EdgeSpec, Junction, Network, NetworkDescription, StateLayout, Violation,
};
pub use residual::{assemble_jacobian, assemble_residual, SparseMatrix, StateVector};
pub use solver::{
    homotopy_solve, newton_solve, solve_linear_s0, uniqueness_probe, SolveResult, SolveStatus,
    SolverConfig,
};

/// Infinity norm of a slice; `0.0` for an empty slice, NaN-propagating.
pub fn inf_norm(values: &[f64]) -> f64 {
    values.iter().fold(0.0_f64, |acc, v| {
        if v.is_nan() || acc.is_nan() {
            f64::NAN
        } else {
            acc.max(v.abs())
        }
    })
}
