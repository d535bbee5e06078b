//! The reweighted CCCP loop shared by all three solver stages.
//!
//! One outer iteration refreshes the weights from the current iterate,
//! linearizes the QoS signal terms there, and solves the resulting convex
//! QCQP. For the sparsity goal the recorded surrogate is the log-smoothed
//! composite the reweighting provably descends (each weighted subproblem
//! majorizes it); for power minimization it is the transmit power itself;
//! for feasibility probes it is the uniform slack. A monotone safeguard
//! keeps the previous iterate and stops if a weight refresh ever breaks the
//! descent, which the plain CCCP argument does not cover.

use conic_core::{linearize, solve_qcqp, CccpStop, QcqpProblem, SolveStatus};
use nalgebra::DVector;
use serde::Serialize;

use super::map::ActiveMap;
use super::problems::{
    backhaul_constraints, base_constraints, objective_slack, objective_sparsity,
    objective_transmit, restore_qos, violation_parts,
};
use super::weights::Weights;
use super::{AlgoError, AlgoOptions};
use crate::netgen::Scenario;
use crate::power::LayeredBeamformer;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StageGoal {
    /// Two-layer sparsity-inducing norm minimization with multipliers on the
    /// BS layer and the data-assignment layer.
    Sparsity { lambda1: f64, lambda2: f64 },
    /// `min Σ δ_j‖v_jm‖²` under the fixed support.
    TransmitPower,
    /// `min t` with QoS and backhaul relaxed by `t`; strict feasibility is
    /// declared once a self-consistently feasible point appears.
    Feasibility,
}

/// Audit record of one stage run.
#[derive(Debug, Clone, Serialize)]
pub struct CccpTrace {
    pub goal: String,
    /// Surrogate objective after each outer iteration (first entry: start).
    pub objective: Vec<f64>,
    /// Worst exact DC constraint value at each recorded iterate, measured
    /// against the weights used in that step (slack-adjusted for
    /// feasibility runs).
    pub dc_violation: Vec<f64>,
    pub safeguard_stop: bool,
    pub subproblems: usize,
}

#[derive(Debug)]
pub struct StageOutcome {
    pub v: LayeredBeamformer,
    pub trace: CccpTrace,
    /// For feasibility probes: a strictly feasible point was found.
    pub strictly_feasible: bool,
}

fn goal_name(goal: &StageGoal) -> String {
    match goal {
        StageGoal::Sparsity { lambda1, lambda2 } => format!("sparsity(l1={lambda1},l2={lambda2})"),
        StageGoal::TransmitPower => "transmit-power".into(),
        StageGoal::Feasibility => "feasibility".into(),
    }
}

fn transmit_power(scenario: &Scenario, v: &LayeredBeamformer) -> f64 {
    (0..scenario.n_bs())
        .map(|j| scenario.power[j].delta * v.bs_transmit_power(j))
        .sum()
}

/// The log-smoothed composite the reweighted surrogate majorizes:
/// `T(v) + λ₁ Σ P_D ln(‖ṽ_j‖²+τ) + λ₂ Σ β(1-c) ln(‖v_jm‖²+τ)`.
fn sparsity_metric(
    scenario: &Scenario,
    map: &ActiveMap,
    v: &LayeredBeamformer,
    l1: f64,
    l2: f64,
    tau: f64,
) -> f64 {
    let mut g = transmit_power(scenario, v);
    for j in 0..scenario.n_bs() {
        g += l1 * scenario.power[j].relative_power_w() * (v.bs_transmit_power(j) + tau).ln();
    }
    for &(j, m) in &map.blocks {
        g += l2 * scenario.beta(j, m) * scenario.uncached(j, m) * (v.block_power(j, m) + tau).ln();
    }
    g
}

pub fn run_stage(
    scenario: &Scenario,
    map: &ActiveMap,
    goal: StageGoal,
    v_start: &LayeredBeamformer,
    stop: &CccpStop,
    opts: &AlgoOptions,
) -> Result<StageOutcome, AlgoError> {
    let slacked = matches!(goal, StageGoal::Feasibility);
    let base = base_constraints(scenario, map, slacked);
    let tau = opts.tau;
    let dim = map.dim();

    // Zero anything outside the active support.
    let mut v = map.to_beamformer(&map.to_real(v_start), v_start.eps_supp);

    // A usable feasibility witness: QoS and the (self-consistent) backhaul
    // surrogate strictly inside, transmit power within tolerance. The
    // phase-I optimum legitimately rides the power caps, because extra
    // transmit power only helps the QoS slack.
    let self_consistent_ok = |vv: &LayeredBeamformer| {
        let w = Weights::from_beamformer(vv, tau);
        let parts = violation_parts(scenario, vv, Some(&w));
        parts.qos < -opts.feas_margin
            && parts.backhaul < -opts.feas_margin
            && parts.power <= opts.feas_margin
    };

    if slacked {
        if self_consistent_ok(&v) {
            let w = Weights::from_beamformer(&v, tau);
            let worst = violation_parts(scenario, &v, Some(&w)).max();
            return Ok(StageOutcome {
                trace: CccpTrace {
                    goal: goal_name(&goal),
                    objective: vec![worst],
                    dc_violation: vec![worst.min(0.0)],
                    safeguard_stop: false,
                    subproblems: 0,
                },
                v,
                strictly_feasible: true,
            });
        }
    }

    let metric = |vv: &LayeredBeamformer, t: f64| -> f64 {
        match goal {
            StageGoal::Sparsity { lambda1, lambda2 } => {
                sparsity_metric(scenario, map, vv, lambda1, lambda2, tau)
            }
            StageGoal::TransmitPower => transmit_power(scenario, vv),
            StageGoal::Feasibility => t,
        }
    };

    let mut t_cur = if slacked {
        let w0 = Weights::from_beamformer(&v, tau);
        let p = violation_parts(scenario, &v, Some(&w0));
        p.qos.max(p.backhaul).max(0.0) * 1.05 + 1e-6
    } else {
        0.0
    };

    let mut current = metric(&v, t_cur);
    let mut trace = CccpTrace {
        goal: goal_name(&goal),
        objective: vec![current],
        dc_violation: Vec::new(),
        safeguard_stop: false,
        subproblems: 0,
    };
    {
        let w = Weights::from_beamformer(&v, tau);
        let p = violation_parts(scenario, &v, Some(&w));
        let viol = if slacked {
            (p.qos - t_cur).max(p.backhaul - t_cur).max(p.power)
        } else {
            p.max()
        };
        trace.dc_violation.push(viol);
    }
    let mut strictly_feasible = false;

    for _outer in 0..stop.max_outer {
        let w = Weights::from_beamformer(&v, tau);
        let mut x = DVector::zeros(base.partition.dim());
        x.rows_mut(0, dim).copy_from(&map.to_real(&v));
        if let Some(tc) = base.slack_coord {
            x[tc] = t_cur;
        }

        // Assemble the subproblem: linearized QoS, hard power caps, the
        // weighted backhaul surrogate, and the goal objective.
        let mut forms = Vec::with_capacity(base.forms.len() + scenario.n_bs());
        for (i, f) in base.forms.iter().enumerate() {
            match &base.cuts[i] {
                Some(cut) => {
                    forms.push(linearize(f, cut.value(&x), &cut.gradient(&x), &x));
                }
                None => forms.push(f.clone()),
            }
        }
        forms.extend(
            backhaul_constraints(scenario, map, &base.partition, &w, base.slack_coord)
                .into_iter()
                .map(|(_, f)| f),
        );
        let objective = match goal {
            StageGoal::Sparsity { lambda1, lambda2 } => {
                objective_sparsity(scenario, map, &base.partition, &w, lambda1, lambda2)
            }
            StageGoal::TransmitPower => objective_transmit(scenario, map, &base.partition),
            StageGoal::Feasibility => {
                objective_slack(&base.partition, base.slack_coord.unwrap())
            }
        };
        let mut qp = QcqpProblem::new_certified(base.partition.clone(), objective, forms);
        // The transmit-power and sparsity objectives carry a uniformly
        // positive diagonal (δ_j > 0 on every coordinate); the slack
        // objective does not.
        qp.strongly_convex = !slacked;
        let sol = solve_qcqp(&qp, &opts.qcqp, Some(&x));
        trace.subproblems += 1;

        if sol.status == SolveStatus::Infeasible {
            if trace.subproblems == 1 {
                return Err(AlgoError::Solver(format!(
                    "first CCCP subproblem infeasible (goal {}): CCCP preserves feasibility, so the start was not feasible",
                    trace.goal
                )));
            }
            trace.safeguard_stop = true;
            break;
        }

        let mut v_new = map.to_beamformer(&sol.x.rows(0, dim).clone_owned(), v.eps_supp);
        let t_new = base.slack_coord.map(|tc| sol.x[tc]).unwrap_or(0.0);
        if !slacked {
            restore_qos(scenario, &mut v_new)?;
        }

        let new_metric = metric(&v_new, t_new);
        if new_metric > current + 1e-9 * (1.0 + current.abs()) {
            trace.safeguard_stop = true;
            break;
        }
        let decrease = current - new_metric;
        v = v_new;
        t_cur = t_new;
        current = new_metric;
        trace.objective.push(current);
        let p = violation_parts(scenario, &v, Some(&w));
        let viol = if slacked {
            (p.qos - t_cur).max(p.backhaul - t_cur).max(p.power)
        } else {
            p.max()
        };
        trace.dc_violation.push(viol);

        if slacked && t_cur < -opts.feas_margin && self_consistent_ok(&v) {
            strictly_feasible = true;
            break;
        }
        if decrease <= stop.rel_obj_tol * (1.0 + current.abs()) {
            break;
        }
    }

    Ok(StageOutcome {
        v,
        trace,
        strictly_feasible: strictly_feasible || !slacked,
    })
}
