//! Exhaustive support-pattern oracle for desk-scale validation.
//!
//! Every subset of the (BS, group) block grid is a candidate support. A
//! pattern is discarded outright when some group keeps no serving block or
//! when its exact indicator backhaul load exceeds a link capacity; the rest
//! get a fixed-support multicast power minimization from several starts
//! (the relaxation-based start plus random restarts), and the best total
//! network power over all patterns is returned. The enumeration is
//! exponential in the grid size, hence the hard caps.

use std::collections::BTreeSet;

use conic_core::{cccp_solve, CccpStop, QcqpOptions, SolveStatus};
use nalgebra::DVector;
use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use super::map::ActiveMap;
use super::problems::{build_fixed_support_phase1, build_fixed_support_power_min};
use super::stage1::{build_relaxation, randomize_and_scale};
use super::{AlgoError, AlgoOptions};
use crate::netgen::Scenario;
use crate::power::{network_power, LayeredBeamformer};
use crate::seed::SeedMixer;

#[derive(Debug, Clone, Copy)]
pub struct OracleCaps {
    pub max_bs: usize,
    pub max_groups: usize,
    /// Cap on `N_B·N_G`, the exponent of the enumeration.
    pub max_cells: usize,
}

impl Default for OracleCaps {
    fn default() -> Self {
        Self {
            max_bs: 4,
            max_groups: 3,
            max_cells: 8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PatternStatus {
    Solved,
    /// Some group kept no serving block.
    UnservedGroup,
    /// Exact indicator backhaul load exceeds a link capacity.
    BackhaulExceeded,
    /// No start produced a feasible point.
    NoFeasiblePoint,
}

#[derive(Debug, Clone, Serialize)]
pub struct PatternResult {
    pub active_blocks: Vec<(usize, usize)>,
    pub status: PatternStatus,
    pub p_w: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct OracleReport {
    /// Minimal network power `p` and its support pattern, when any pattern
    /// is feasible.
    pub best: Option<(f64, Vec<(usize, usize)>)>,
    pub best_p_tilde_w: Option<f64>,
    pub patterns: Vec<PatternResult>,
    pub n_feasible: usize,
}

fn random_start(map: &ActiveMap, scenario: &Scenario, rng: &mut ChaCha8Rng) -> LayeredBeamformer {
    let gauss = Normal::new(0.0, 1.0).unwrap();
    let mut v = LayeredBeamformer::zeros(
        scenario.n_bs(),
        scenario.n_groups(),
        scenario.ants(),
        scenario.eps_supp,
    );
    for &(j, m) in &map.blocks {
        for z in v.block_mut(j, m) {
            *z = Complex64::new(gauss.sample(rng), gauss.sample(rng));
        }
    }
    // Stay inside half the per-BS budget.
    for j in 0..scenario.n_bs() {
        let p = v.bs_transmit_power(j);
        if p > 0.0 {
            let target = 0.5 * scenario.power[j].p_tx_max_w;
            let c = (target / p).sqrt();
            for m in 0..scenario.n_groups() {
                for z in v.block_mut(j, m) {
                    *z *= c;
                }
            }
        }
    }
    v
}

/// Fixed-support power minimization from one start; random starts pass
/// through a phase-I slack minimization first.
fn solve_pattern_from(
    scenario: &Scenario,
    map: &ActiveMap,
    start: &LayeredBeamformer,
    needs_phase1: bool,
    qcqp: &QcqpOptions,
) -> Option<LayeredBeamformer> {
    let stop = CccpStop {
        rel_obj_tol: 1e-6,
        max_outer: 40,
    };
    let mut x = map.to_real(start);
    if needs_phase1 {
        let ph = build_fixed_support_phase1(scenario, map);
        let dim = map.dim();
        let mut x0 = DVector::zeros(dim + 1);
        x0.rows_mut(0, dim).copy_from(&x);
        let worst = ph
            .base
            .constraints
            .iter()
            .zip(&ph.concave_con)
            .map(|(f, h)| {
                let mut z = DVector::zeros(dim + 1);
                z.rows_mut(0, dim).copy_from(&x);
                let mut v = f.value(&ph.base.partition, &z);
                if let Some(h) = h {
                    v -= h.eval(&z).0;
                }
                v
            })
            .fold(0.0f64, f64::max);
        x0[dim] = worst * 1.05 + 1e-6;
        let out = cccp_solve(&ph, &x0, &stop, qcqp).ok()?;
        if out.x[dim] >= 0.0 {
            return None;
        }
        x = out.x.rows(0, dim).clone_owned();
    }
    let dc = build_fixed_support_power_min(scenario, map);
    let out = cccp_solve(&dc, &x, &stop, qcqp).ok()?;
    Some(map.to_beamformer(&out.x, scenario.eps_supp))
}

pub fn oracle(
    scenario: &Scenario,
    caps: &OracleCaps,
    opts: &AlgoOptions,
) -> Result<OracleReport, AlgoError> {
    let n_bs = scenario.n_bs();
    let n_groups = scenario.n_groups();
    if n_bs > caps.max_bs || n_groups > caps.max_groups || n_bs * n_groups > caps.max_cells {
        return Err(AlgoError::OracleCaps(format!(
            "N_B={n_bs}, N_G={n_groups} exceeds caps (max_bs={}, max_groups={}, max_cells={})",
            caps.max_bs, caps.max_groups, caps.max_cells
        )));
    }
    let cells = n_bs * n_groups;
    let qcqp = QcqpOptions {
        tol: 1e-9,
        ..QcqpOptions::default()
    };
    let mut rng =
        ChaCha8Rng::seed_from_u64(SeedMixer::new(scenario.seed).mix_u64(0x04AC1E).finish());

    let mut patterns = Vec::with_capacity(1 << cells);
    let mut best: Option<(f64, Vec<(usize, usize)>, f64)> = None;
    for mask in 1u32..(1u32 << cells) {
        let active: Vec<(usize, usize)> = (0..cells)
            .filter(|c| mask & (1 << c) != 0)
            .map(|c| (c % n_bs, c / n_bs))
            .collect();

        // Every group must keep a serving block.
        let served = (0..n_groups).all(|m| active.iter().any(|&(_, mm)| mm == m));
        if !served {
            patterns.push(PatternResult {
                active_blocks: active,
                status: PatternStatus::UnservedGroup,
                p_w: None,
            });
            continue;
        }
        // Exact indicator backhaul load of the pattern.
        let mut over = false;
        for j in 0..n_bs {
            let load: f64 = active
                .iter()
                .filter(|&&(jj, m)| jj == j && scenario.uncached(j, m) > 0.0)
                .map(|&(_, m)| scenario.rates_bps[m])
                .sum();
            if load > scenario.power[j].c_bh_bps {
                over = true;
                break;
            }
        }
        if over {
            patterns.push(PatternResult {
                active_blocks: active,
                status: PatternStatus::BackhaulExceeded,
                p_w: None,
            });
            continue;
        }

        let mut z_da: BTreeSet<(usize, usize)> = (0..n_bs)
            .flat_map(|j| (0..n_groups).map(move |m| (j, m)))
            .collect();
        for &b in &active {
            z_da.remove(&b);
        }
        let map = ActiveMap::new(scenario, &BTreeSet::new(), &z_da);

        // Relaxation start plus random restarts.
        let mut pattern_best: Option<(f64, f64)> = None;
        let relax = build_relaxation(scenario, &map, None);
        let sdp_sol = conic_core::solve_sdp(&relax, &opts.sdp);
        if sdp_sol.status != SolveStatus::Infeasible {
            let blocks: Vec<_> = sdp_sol
                .blocks
                .iter()
                .map(conic_core::unlift_hermitian)
                .collect();
            if let Some(v_init) =
                randomize_and_scale(&blocks, scenario, &map, None, opts, &mut rng)
            {
                if let Some(v) = solve_pattern_from(scenario, &map, &v_init, false, &qcqp) {
                    let b = network_power(&v, scenario);
                    pattern_best = Some((b.p_w, b.p_tilde_w));
                }
            }
        }
        for _ in 0..3 {
            let start = random_start(&map, scenario, &mut rng);
            if let Some(v) = solve_pattern_from(scenario, &map, &start, true, &qcqp) {
                let b = network_power(&v, scenario);
                if pattern_best.map_or(true, |(p, _)| b.p_w < p) {
                    pattern_best = Some((b.p_w, b.p_tilde_w));
                }
            }
        }

        match pattern_best {
            Some((p, pt)) => {
                if best.as_ref().map_or(true, |(bp, _, _)| p < *bp) {
                    best = Some((p, active.clone(), pt));
                }
                patterns.push(PatternResult {
                    active_blocks: active,
                    status: PatternStatus::Solved,
                    p_w: Some(p),
                });
            }
            None => patterns.push(PatternResult {
                active_blocks: active,
                status: PatternStatus::NoFeasiblePoint,
                p_w: None,
            }),
        }
    }

    let n_feasible = patterns
        .iter()
        .filter(|p| p.status == PatternStatus::Solved)
        .count();
    Ok(OracleReport {
        best: best.as_ref().map(|(p, s, _)| (*p, s.clone())),
        best_p_tilde_w: best.as_ref().map(|(_, _, pt)| *pt),
        patterns,
        n_feasible,
    })
}
