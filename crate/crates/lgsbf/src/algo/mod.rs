//! The three-stage layered group sparse beamforming solver, its
//! single-layer benchmarks, and the exhaustive support-search oracle.
//!
//! Stage I induces an approximately sparse beamformer by reweighted mixed
//! ℓ₁/ℓ₂-norm minimization seeded from a semidefinite relaxation. Stage II
//! orders base stations and data-assignment blocks by a priority criterion
//! and searches the two nested support layers, recording the network power
//! of every feasible (inactive-BS set, removed-block set) pair. Stage III
//! re-solves coordinated multicast beamforming on the winning supports.

mod map;
mod oracle;
mod problems;
mod reweighted;
mod run;
mod search;
mod stage1;
mod weights;

pub use map::ActiveMap;
pub use oracle::{oracle, OracleCaps, OracleReport, PatternResult, PatternStatus};
pub use problems::{
    build_constraints, build_fixed_support_phase1, build_fixed_support_power_min,
    build_generalized_problem, violation_parts, ConstraintKind, QosCut, ViolationParts,
};
pub use reweighted::{run_stage, CccpTrace, StageGoal, StageOutcome};
pub use run::{run_algorithm, run_algorithm_with, stage3_final, Algorithm, AlgoResult, SolveOutcome};
pub use search::{
    bs_priorities, da_priorities, feas_f1, feas_f2, iterative_search, FeasProbe, SearchLayers,
    SearchResult, SearchTrace, SupportDecision, TraceEntry,
};
pub use stage1::{randomize_and_scale, stage1_init, stage1_sparsify, InitOutcome};
pub use weights::Weights;

use conic_core::{CccpStop, QcqpOptions, SdpOptions};

#[derive(Debug, thiserror::Error)]
pub enum AlgoError {
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("iterate drifted infeasible by {0:.2e}, beyond the restoration range")]
    Drift(f64),
    #[error("oracle instance too large: {0}")]
    OracleCaps(String),
}

/// Tunables shared by the pipeline. Defaults follow the scale of the
/// reference setup (1 W transmit caps).
#[derive(Debug, Clone)]
pub struct AlgoOptions {
    /// Reweighting smoothing parameter τ (W).
    pub tau: f64,
    /// Gaussian randomization rounds when the relaxation is not rank-one.
    pub randomization_rounds: usize,
    /// Margin for declaring a feasibility probe strictly feasible.
    pub feas_margin: f64,
    pub qcqp: QcqpOptions,
    pub sdp: SdpOptions,
    /// Stage I reweighted minimization stop rule.
    pub stage1_stop: CccpStop,
    /// Stop rule for the per-candidate power solves inside the Stage II
    /// search (looser: the search only ranks candidates).
    pub search_stop: CccpStop,
    /// Stage III final beamforming stop rule.
    pub stage3_stop: CccpStop,
}

impl Default for AlgoOptions {
    fn default() -> Self {
        Self {
            tau: 1e-5,
            randomization_rounds: 50,
            feas_margin: 1e-9,
            qcqp: QcqpOptions {
                tol: 1e-9,
                ..QcqpOptions::default()
            },
            sdp: SdpOptions::default(),
            stage1_stop: CccpStop {
                rel_obj_tol: 1e-4,
                max_outer: 20,
            },
            search_stop: CccpStop {
                rel_obj_tol: 1e-3,
                max_outer: 15,
            },
            stage3_stop: CccpStop {
                rel_obj_tol: 1e-5,
                max_outer: 30,
            },
        }
    }
}
