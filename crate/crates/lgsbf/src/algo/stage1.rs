//! Stage I: semidefinite-relaxation initialization and the reweighted
//! sparsity-inducing minimization.
//!
//! The initializer lifts each group beamformer to `W_m = v_m v_mᴴ`, drops
//! the rank-one constraint, and solves the transmit power minimization SDP
//! under QoS, per-BS power and surrogate backhaul constraints. A rank-one
//! solution yields the starting beamformer by eigendecomposition; otherwise
//! Gaussian randomization draws candidate directions from `N(0, W_m)` and a
//! per-group power-scaling feasibility program picks the cheapest feasible
//! combination. An infeasible relaxation certifies the whole instance
//! infeasible.

use conic_core::{
    lift_hermitian, solve_qcqp, unlift_hermitian, Partition, QcqpProblem, QuadForm, SdpConstraint,
    SdpProblem, SdpSense, SdpSolution, SolveStatus,
};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::map::ActiveMap;
use super::problems::{restore_qos, violation_parts};
use super::reweighted::{run_stage, StageGoal, StageOutcome};
use super::weights::Weights;
use super::{AlgoError, AlgoOptions};
use crate::netgen::Scenario;
use crate::power::LayeredBeamformer;
use crate::seed::SeedMixer;

#[derive(Debug)]
pub enum InitOutcome {
    Feasible { v0: LayeredBeamformer },
    /// The relaxation itself is infeasible; so is the original problem.
    InfeasibleSdp,
    /// The relaxation solved but no feasible beamformer was extracted
    /// within the randomization budget.
    InfeasibleExtraction,
}

/// Lifted selector matrix for the antennas of `bs` within the active
/// stacked dimension of one group.
fn lifted_selector(map: &ActiveMap, group: usize, bs: usize, n_c: usize) -> Option<DMatrix<f64>> {
    let actives = map.active_bs_of_group(group);
    let pos = actives.iter().position(|&j| j == bs)?;
    let ants = map.ants;
    let mut m = DMatrix::zeros(2 * n_c, 2 * n_c);
    for l in 0..ants {
        let idx = pos * ants + l;
        m[(idx, idx)] = 1.0;
        m[(idx + n_c, idx + n_c)] = 1.0;
    }
    Some(m)
}

/// Stacked channel of one user restricted to a group's active BSs.
fn restricted_channel(
    scenario: &Scenario,
    map: &ActiveMap,
    user: usize,
    group: usize,
) -> DVector<Complex64> {
    let actives = map.active_bs_of_group(group);
    let ants = map.ants;
    let mut h = DVector::zeros(actives.len() * ants);
    for (p, &j) in actives.iter().enumerate() {
        let link = scenario.channels.link(user, j);
        for l in 0..ants {
            h[p * ants + l] = link[l];
        }
    }
    h
}

/// Build the relaxed transmit power minimization over lifted blocks.
///
/// With `⟨lift(A), X⟩ = 2·Tr(AW)` the complex data enters halved; QoS rows
/// are normalized by `γσ²`, power rows by `P_j`, backhaul rows by `C_j`.
pub(super) fn build_relaxation(
    scenario: &Scenario,
    map: &ActiveMap,
    backhaul_weights: Option<&Weights>,
) -> SdpProblem {
    let n_groups = scenario.n_groups();
    let sizes: Vec<usize> = (0..n_groups)
        .map(|m| 2 * map.active_bs_of_group(m).len() * map.ants)
        .collect();
    let noise = scenario.noise_w;

    let obj_mats: Vec<Option<DMatrix<f64>>> = sizes
        .iter()
        .map(|&s| Some(DMatrix::identity(s, s) * 0.5))
        .collect();

    let mut constraints = Vec::new();
    // QoS: Tr(W_m H_k) - γ Σ_{i≠m} Tr(W_i H_k) ≥ γσ².
    for m in 0..n_groups {
        let gamma = scenario.grouping.target_sinr[m];
        for &k in &scenario.grouping.members[m] {
            let mut mats: Vec<Option<DMatrix<f64>>> = vec![None; n_groups];
            for i in 0..n_groups {
                let h = restricted_channel(scenario, map, k, i);
                if h.len() == 0 {
                    continue;
                }
                let hh = &h * h.adjoint();
                let lifted = lift_hermitian(&hh).expect("hhᴴ is Hermitian");
                let scale = if i == m {
                    1.0 / (2.0 * gamma * noise)
                } else {
                    -1.0 / (2.0 * noise)
                };
                mats[i] = Some(lifted * scale);
            }
            constraints.push(SdpConstraint {
                mats,
                lin: vec![],
                sense: SdpSense::Ge,
                rhs: 1.0,
            });
        }
    }
    // Per-BS power: Σ_m Tr(W_m J_j) ≤ P_j.
    for j in 0..scenario.n_bs() {
        let mut mats: Vec<Option<DMatrix<f64>>> = vec![None; n_groups];
        let mut any = false;
        for m in 0..n_groups {
            let n_c = map.active_bs_of_group(m).len() * map.ants;
            if let Some(sel) = lifted_selector(map, m, j, n_c) {
                mats[m] = Some(sel / (2.0 * scenario.power[j].p_tx_max_w));
                any = true;
            }
        }
        if any {
            constraints.push(SdpConstraint {
                mats,
                lin: vec![],
                sense: SdpSense::Le,
                rhs: 1.0,
            });
        }
    }
    // Surrogate backhaul: Σ_m R_m(1-c)ω_jm Tr(W_m J_j) ≤ C_j.
    if let Some(w) = backhaul_weights {
        for j in 0..scenario.n_bs() {
            let mut mats: Vec<Option<DMatrix<f64>>> = vec![None; n_groups];
            let mut any = false;
            for m in 0..n_groups {
                let coeff = scenario.rates_bps[m] * scenario.uncached(j, m)
                    * w.block_weight(j, m)
                    / scenario.power[j].c_bh_bps;
                if coeff <= 0.0 {
                    continue;
                }
                let n_c = map.active_bs_of_group(m).len() * map.ants;
                if let Some(sel) = lifted_selector(map, m, j, n_c) {
                    mats[m] = Some(sel * (coeff / 2.0));
                    any = true;
                }
            }
            if any {
                constraints.push(SdpConstraint {
                    mats,
                    lin: vec![],
                    sense: SdpSense::Le,
                    rhs: 1.0,
                });
            }
        }
    }

    SdpProblem {
        block_sizes: sizes,
        n_lin: 0,
        obj_mats,
        obj_lin: vec![],
        constraints,
    }
}

fn unlift_blocks(sol: &SdpSolution) -> Vec<DMatrix<Complex64>> {
    sol.blocks.iter().map(unlift_hermitian).collect()
}

struct Eigs {
    values: Vec<f64>,
    vectors: DMatrix<Complex64>,
}

fn hermitian_eigs(w: &DMatrix<Complex64>) -> Eigs {
    let eig = w.clone().symmetric_eigen();
    let mut idx: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
    let values: Vec<f64> = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(w.nrows(), w.ncols());
    for (new, &old) in idx.iter().enumerate() {
        vectors.set_column(new, &eig.eigenvectors.column(old));
    }
    Eigs { values, vectors }
}

/// Scatter a per-group stacked complex vector back into a beamformer.
fn assemble(
    scenario: &Scenario,
    map: &ActiveMap,
    per_group: &[DVector<Complex64>],
) -> LayeredBeamformer {
    let mut v = LayeredBeamformer::zeros(
        scenario.n_bs(),
        scenario.n_groups(),
        scenario.ants(),
        scenario.eps_supp,
    );
    for (m, vec) in per_group.iter().enumerate() {
        for (p, &j) in map.active_bs_of_group(m).iter().enumerate() {
            let blk = v.block_mut(j, m);
            for l in 0..map.ants {
                blk[l] = vec[p * map.ants + l];
            }
        }
    }
    v
}

/// Recover a feasible beamformer from relaxation blocks: eigendecomposition
/// when every block is (numerically) rank one, otherwise Gaussian
/// randomization with a per-group power-scaling feasibility program.
pub fn randomize_and_scale(
    w_blocks: &[DMatrix<Complex64>],
    scenario: &Scenario,
    map: &ActiveMap,
    backhaul_weights: Option<&Weights>,
    opts: &AlgoOptions,
    rng: &mut ChaCha8Rng,
) -> Option<LayeredBeamformer> {
    let n_groups = w_blocks.len();
    let eigs: Vec<Eigs> = w_blocks.iter().map(hermitian_eigs).collect();

    let rank_one = eigs.iter().all(|e| {
        let l1 = e.values[0].max(0.0);
        let l2 = e.values.get(1).copied().unwrap_or(0.0).max(0.0);
        l1 > 0.0 && l2 / l1 <= 1e-6
    });
    if rank_one {
        let per_group: Vec<DVector<Complex64>> = eigs
            .iter()
            .map(|e| {
                let u = e.vectors.column(0).clone_owned();
                u * Complex64::new(e.values[0].max(0.0).sqrt(), 0.0)
            })
            .collect();
        let mut v = assemble(scenario, map, &per_group);
        if restore_qos(scenario, &mut v).is_ok() {
            let w = backhaul_weights
                .cloned()
                .unwrap_or_else(|| Weights::from_beamformer(&v, opts.tau));
            if violation_parts(scenario, &v, Some(&w)).max() <= 1e-6 {
                return Some(v);
            }
        }
        // Fall through to randomization when the eigen-extraction is off.
    }

    // Square-root factors for sampling N(0, W_m).
    let factors: Vec<DMatrix<Complex64>> = eigs
        .iter()
        .map(|e| {
            let n = e.vectors.nrows();
            let mut f = DMatrix::zeros(n, n);
            for c in 0..n {
                let s = e.values[c].max(0.0).sqrt();
                f.set_column(c, &(e.vectors.column(c) * Complex64::new(s, 0.0)));
            }
            f
        })
        .collect();

    let gauss = Normal::new(0.0, (0.5f64).sqrt()).unwrap();
    let mut best: Option<(f64, LayeredBeamformer)> = None;
    for round in 0..=opts.randomization_rounds {
        let dirs: Vec<DVector<Complex64>> = (0..n_groups)
            .map(|m| {
                if round == 0 {
                    eigs[m].vectors.column(0).clone_owned()
                } else {
                    let n = factors[m].nrows();
                    let z = DVector::from_fn(n, |_, _| {
                        Complex64::new(gauss.sample(rng), gauss.sample(rng))
                    });
                    &factors[m] * z
                }
            })
            .collect();
        let mut unit_dirs = Vec::with_capacity(n_groups);
        let mut degenerate = false;
        for d in dirs {
            let norm = d.norm();
            if norm < 1e-12 {
                degenerate = true;
                break;
            }
            unit_dirs.push(d / Complex64::new(norm, 0.0));
        }
        if degenerate {
            continue;
        }
        if let Some(v) = scale_directions(scenario, map, &unit_dirs, backhaul_weights, opts) {
            let cost: f64 = (0..scenario.n_bs())
                .map(|j| scenario.power[j].delta * v.bs_transmit_power(j))
                .sum();
            if best.as_ref().map_or(true, |(c, _)| cost < *c) {
                best = Some((cost, v));
            }
        }
    }
    best.map(|(_, v)| v)
}

/// Fix the per-group directions and optimize nonnegative power multipliers:
/// linear feasibility (plus a linear power objective) in the multipliers.
fn scale_directions(
    scenario: &Scenario,
    map: &ActiveMap,
    dirs: &[DVector<Complex64>],
    backhaul_weights: Option<&Weights>,
    opts: &AlgoOptions,
) -> Option<LayeredBeamformer> {
    let n_groups = dirs.len();
    let noise = scenario.noise_w;
    let part = Partition::single(n_groups);

    // Per-BS split of each direction's power.
    let mut bs_share = vec![vec![0.0; n_groups]; scenario.n_bs()];
    for m in 0..n_groups {
        for (p, &j) in map.active_bs_of_group(m).iter().enumerate() {
            let s: f64 = (0..map.ants)
                .map(|l| dirs[m][p * map.ants + l].norm_sqr())
                .sum();
            bs_share[j][m] = s;
        }
    }
    // |h_kᴴ d_i|² for every user and group.
    let gains = |k: usize, i: usize| -> f64 {
        let h = restricted_channel(scenario, map, k, i);
        let dot: Complex64 = h
            .iter()
            .zip(dirs[i].iter())
            .map(|(hc, dc)| hc.conj() * dc)
            .sum();
        dot.norm_sqr()
    };

    let mut constraints = Vec::new();
    for m in 0..n_groups {
        let gamma = scenario.grouping.target_sinr[m];
        for &k in &scenario.grouping.members[m] {
            let mut f = QuadForm::zero(&part);
            f.cst = 1.0;
            for i in 0..n_groups {
                if i == m {
                    f.lin[i] = -gains(k, i) / (gamma * noise);
                } else {
                    f.lin[i] = gains(k, i) / noise;
                }
            }
            constraints.push(f);
        }
    }
    for j in 0..scenario.n_bs() {
        if bs_share[j].iter().all(|&s| s == 0.0) {
            continue;
        }
        let mut f = QuadForm::zero(&part);
        for m in 0..n_groups {
            f.lin[m] = bs_share[j][m] / scenario.power[j].p_tx_max_w;
        }
        f.cst = -1.0;
        constraints.push(f);
    }
    if let Some(w) = backhaul_weights {
        for j in 0..scenario.n_bs() {
            let mut f = QuadForm::zero(&part);
            let mut any = false;
            for m in 0..n_groups {
                let coeff = scenario.rates_bps[m] * scenario.uncached(j, m)
                    * w.block_weight(j, m)
                    * bs_share[j][m]
                    / scenario.power[j].c_bh_bps;
                if coeff > 0.0 {
                    any = true;
                }
                f.lin[m] = coeff;
            }
            if any {
                f.cst = -1.0;
                constraints.push(f);
            }
        }
    }
    for m in 0..n_groups {
        let mut f = QuadForm::zero(&part);
        f.lin[m] = -1.0;
        constraints.push(f);
    }

    let mut objective = QuadForm::zero(&part);
    for m in 0..n_groups {
        objective.lin[m] = (0..scenario.n_bs())
            .map(|j| scenario.power[j].delta * bs_share[j][m])
            .sum();
    }

    let p = QcqpProblem::new_certified(part, objective, constraints);
    let sol = solve_qcqp(&p, &opts.qcqp, None);
    if sol.status != SolveStatus::Optimal {
        return None;
    }
    let per_group: Vec<DVector<Complex64>> = (0..n_groups)
        .map(|m| &dirs[m] * Complex64::new(sol.x[m].max(0.0).sqrt(), 0.0))
        .collect();
    let mut v = assemble(scenario, map, &per_group);
    if restore_qos(scenario, &mut v).is_err() {
        return None;
    }
    let w = backhaul_weights
        .cloned()
        .unwrap_or_else(|| Weights::from_beamformer(&v, opts.tau));
    if violation_parts(scenario, &v, Some(&w)).max() <= 1e-6 {
        Some(v)
    } else {
        None
    }
}

/// Solve the relaxation and extract a feasible starting beamformer.
pub fn stage1_init(scenario: &Scenario, opts: &AlgoOptions) -> Result<InitOutcome, AlgoError> {
    let map = ActiveMap::full(scenario);
    stage1_init_on(scenario, &map, opts)
}

pub(super) fn stage1_init_on(
    scenario: &Scenario,
    map: &ActiveMap,
    opts: &AlgoOptions,
) -> Result<InitOutcome, AlgoError> {
    if !map.unserved_groups().is_empty() {
        return Ok(InitOutcome::InfeasibleSdp);
    }
    let loose = Weights::initial_loose(scenario, opts.tau);
    let p0 = build_relaxation(scenario, map, Some(&loose));
    let sol = conic_core::solve_sdp(&p0, &opts.sdp);
    match sol.status {
        SolveStatus::Infeasible => return Ok(InitOutcome::InfeasibleSdp),
        SolveStatus::Optimal | SolveStatus::MaxIter => {}
    }
    let w_blocks = unlift_blocks(&sol);
    let mut rng = ChaCha8Rng::seed_from_u64(
        SeedMixer::new(scenario.seed).mix_u64(0xBEA3).finish(),
    );
    match randomize_and_scale(&w_blocks, scenario, map, Some(&loose), opts, &mut rng) {
        Some(v0) => Ok(InitOutcome::Feasible { v0 }),
        None => {
            if sol.status == SolveStatus::MaxIter {
                // Neither a certificate nor a feasible point: report the
                // relaxation as undecided-infeasible.
                Ok(InitOutcome::InfeasibleSdp)
            } else {
                Ok(InitOutcome::InfeasibleExtraction)
            }
        }
    }
}

/// Stage I proper: reweighted two-layer sparsity-inducing minimization from
/// the initializer's feasible point.
pub fn stage1_sparsify(
    scenario: &Scenario,
    v0: &LayeredBeamformer,
    lambda1: f64,
    lambda2: f64,
    opts: &AlgoOptions,
) -> Result<StageOutcome, AlgoError> {
    let map = ActiveMap::full(scenario);
    run_stage(
        scenario,
        &map,
        StageGoal::Sparsity { lambda1, lambda2 },
        v0,
        &opts.stage1_stop,
        opts,
    )
}
