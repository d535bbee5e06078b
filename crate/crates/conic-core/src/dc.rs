//! Difference-of-convex programs and the concave-convex procedure.
//!
//! A DC program minimizes `f₀(x) - h₀(x)` subject to `fᵢ(x) - hᵢ(x) ≤ 0`
//! where every `fᵢ` is a convex quadratic and every `hᵢ` is convex (supplied
//! as a value/gradient evaluator). Each CCCP outer iteration linearizes the
//! `hᵢ` at the current point and solves the resulting convex QCQP:
//!
//! ```text
//! gᵢ(x | xₜ) = fᵢ(x) - [hᵢ(xₜ) + ∇hᵢ(xₜ)ᵀ(x - xₜ)]
//! ```
//!
//! Since `hᵢ` is convex, `gᵢ ≥ fᵢ - hᵢ` pointwise, so every subproblem
//! iterate is feasible for the original DC constraints and the exact DC
//! objective is nonincreasing across outer iterations.

use nalgebra::DVector;

use crate::qcqp::{solve_qcqp, QcqpOptions, QcqpProblem};
use crate::quad::QuadForm;
use crate::SolveStatus;

/// Value and gradient evaluator for one convex `hᵢ`.
pub struct ConcaveTerm(pub Box<dyn Fn(&DVector<f64>) -> (f64, DVector<f64>) + Send + Sync>);

impl ConcaveTerm {
    pub fn eval(&self, x: &DVector<f64>) -> (f64, DVector<f64>) {
        (self.0)(x)
    }
}

impl std::fmt::Debug for ConcaveTerm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("ConcaveTerm(..)")
    }
}

/// DC program: convex parts as a QCQP, concave-negated parts as evaluators
/// aligned with the objective (`concave_obj`) and constraints (`concave_con`,
/// one optional entry per constraint).
#[derive(Debug)]
pub struct DcProgram {
    pub base: QcqpProblem,
    pub concave_obj: Option<ConcaveTerm>,
    pub concave_con: Vec<Option<ConcaveTerm>>,
}

impl DcProgram {
    /// Exact DC objective `f₀(x) - h₀(x)`.
    pub fn objective(&self, x: &DVector<f64>) -> f64 {
        let f = self.base.objective.value(&self.base.partition, x);
        match &self.concave_obj {
            Some(h) => f - h.eval(x).0,
            None => f,
        }
    }

    /// Worst exact DC constraint value `maxᵢ fᵢ(x) - hᵢ(x)` (`-∞` when there
    /// are no constraints).
    pub fn max_violation(&self, x: &DVector<f64>) -> f64 {
        let mut worst = f64::NEG_INFINITY;
        for (i, c) in self.base.constraints.iter().enumerate() {
            let mut v = c.value(&self.base.partition, x);
            if let Some(h) = &self.concave_con[i] {
                v -= h.eval(x).0;
            }
            worst = worst.max(v);
        }
        worst
    }
}

/// Replace `f - h` by its convex majorant at `x_t`: subtract the affine
/// expansion of `h` from `f`.
pub fn linearize(f: &QuadForm, h_value: f64, h_grad: &DVector<f64>, x_t: &DVector<f64>) -> QuadForm {
    let mut out = f.clone();
    out.lin -= h_grad;
    out.cst += h_grad.dot(x_t) - h_value;
    out
}

#[derive(Debug, Clone, Copy)]
pub struct CccpStop {
    /// Stop when the relative objective decrease falls below this.
    pub rel_obj_tol: f64,
    pub max_outer: usize,
}

impl Default for CccpStop {
    fn default() -> Self {
        Self {
            rel_obj_tol: 1e-4,
            max_outer: 30,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CccpOutcome {
    pub x: DVector<f64>,
    /// Exact DC objective after each outer iteration, starting with the
    /// value at `x₀`.
    pub objective_trace: Vec<f64>,
    /// Worst exact DC constraint value at each recorded point.
    pub violation_trace: Vec<f64>,
    pub outer_iterations: usize,
    pub converged: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum DcError {
    #[error("CCCP subproblem reported {status:?} at outer iteration {outer}; CCCP preserves feasibility, so this indicates numerical failure")]
    SubproblemFailed { status: SolveStatus, outer: usize },
}

/// Run CCCP from a point `x0` that is feasible for the problem convexified
/// at `x0`. Each outer step solves one convex QCQP.
pub fn cccp_solve(
    dc: &DcProgram,
    x0: &DVector<f64>,
    stop: &CccpStop,
    qcqp_opts: &QcqpOptions,
) -> Result<CccpOutcome, DcError> {
    let mut x = x0.clone();
    let mut obj = dc.objective(&x);
    let mut trace = vec![obj];
    let mut violations = vec![dc.max_violation(&x)];
    let mut converged = false;
    let mut outer = 0;

    let purely_convex =
        dc.concave_obj.is_none() && dc.concave_con.iter().all(|c| c.is_none());

    while outer < stop.max_outer {
        outer += 1;
        let objective = match &dc.concave_obj {
            Some(h) => {
                let (hv, hg) = h.eval(&x);
                linearize(&dc.base.objective, hv, &hg, &x)
            }
            None => dc.base.objective.clone(),
        };
        let constraints = dc
            .base
            .constraints
            .iter()
            .zip(&dc.concave_con)
            .map(|(f, h)| match h {
                Some(h) => {
                    let (hv, hg) = h.eval(&x);
                    linearize(f, hv, &hg, &x)
                }
                None => f.clone(),
            })
            .collect();
        let mut sub =
            QcqpProblem::new_certified(dc.base.partition.clone(), objective, constraints);
        sub.strongly_convex = dc.base.strongly_convex;
        let sol = solve_qcqp(&sub, qcqp_opts, Some(&x));
        if sol.status == SolveStatus::Infeasible {
            return Err(DcError::SubproblemFailed {
                status: sol.status,
                outer,
            });
        }

        let new_obj = dc.objective(&sol.x);
        // Monotone safeguard: the theory guarantees descent, so an increase
        // beyond solver slack means the subproblem was solved loosely; keep
        // the previous iterate and stop.
        if new_obj > obj + 1e-9 * (1.0 + obj.abs()) {
            converged = true;
            break;
        }
        let decrease = obj - new_obj;
        x = sol.x;
        obj = new_obj;
        trace.push(obj);
        violations.push(dc.max_violation(&x));

        if purely_convex {
            converged = true;
            break;
        }
        if decrease <= stop.rel_obj_tol * (1.0 + obj.abs()) {
            converged = true;
            break;
        }
    }

    Ok(CccpOutcome {
        x,
        objective_trace: trace,
        violation_trace: violations,
        outer_iterations: outer,
        converged,
    })
}
