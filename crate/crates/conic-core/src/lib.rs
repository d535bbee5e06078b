//! Dense convex optimization substrate for desk-scale problems.
//!
//! This crate provides the numerical machinery used by the beamforming
//! library: convex quadratically constrained quadratic programs (QCQP)
//! solved by a primal-dual interior-point method, small dense semidefinite
//! programs for relaxation-based initialization, complex-to-real lifting of
//! Hermitian forms, and a driver for difference-of-convex (DC) programs via
//! the concave-convex procedure (CCCP).
//!
//! Everything here is dense `f64` linear algebra on problems with at most a
//! few hundred variables. There is no sparse path and no attempt at
//! large-scale performance; robustness and verifiable KKT residuals at small
//! scale are the design targets.

pub mod dc;
pub mod lift;
pub mod qcqp;
pub mod quad;
pub mod sdp;

pub use dc::{cccp_solve, linearize, CccpOutcome, CccpStop, ConcaveTerm, DcError, DcProgram};
pub use lift::{
    lift_hermitian, lift_hermitian_form, lift_vector, unlift_hermitian, unlift_vector,
    HermitianForm, LiftError,
};
pub use qcqp::{
    solve_qcqp, solve_qcqp_phase1, KktResiduals, Phase1Outcome, QcqpOptions, QcqpProblem,
    QcqpSolution,
};
pub use quad::{Partition, QuadForm};
pub use sdp::{solve_sdp, SdpConstraint, SdpOptions, SdpProblem, SdpSense, SdpSolution};

/// Termination status shared by the QCQP and SDP solvers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum SolveStatus {
    /// KKT residuals (or feasibility residuals and duality gap) met tolerance.
    Optimal,
    /// A certificate-level diagnostic of infeasibility was produced.
    Infeasible,
    /// Iteration cap reached; the best iterate is returned.
    MaxIter,
}

/// Errors produced at problem construction time.
#[derive(Debug, thiserror::Error)]
pub enum ConicError {
    #[error("quadratic form is not convex: block {block} has min eigenvalue {min_eig:.3e}")]
    NotConvex { block: usize, min_eig: f64 },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix is not Hermitian (max asymmetry {0:.3e})")]
    NotHermitian(f64),
}
