//! Stage II: priority ordering and the two-layer support search.
//!
//! Base stations are ranked once by `θ̃_j` (computed from the Stage I
//! output); switching off in ascending order, each level probes feasibility
//! and then strips data-assignment blocks in ascending `θ_jm` order until
//! the probe fails. Every feasible probe solves a transmit power
//! minimization under the fixed supports and records the resulting network
//! power, so the final argmin realizes the conservative keep-the-best
//! strategy rather than maximal switching.
//!
//! A support that leaves some group with no serving block cannot meet a
//! positive SINR target; such steps terminate the loop analytically without
//! spending a DC solve and are not recorded.

use std::collections::BTreeSet;

use serde::Serialize;

use super::map::ActiveMap;
use super::reweighted::{run_stage, CccpTrace, StageGoal};
use super::{AlgoError, AlgoOptions};
use crate::netgen::Scenario;
use crate::power::{network_power, LayeredBeamformer};

/// Inactive BS set and removed (BS, group) block set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SupportDecision {
    pub z_bs: BTreeSet<usize>,
    pub z_da: BTreeSet<(usize, usize)>,
}

impl SupportDecision {
    pub fn none() -> Self {
        Self {
            z_bs: BTreeSet::new(),
            z_da: BTreeSet::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TraceEntry {
    /// Number of BSs switched off at this level.
    pub bs_depth: usize,
    /// Number of blocks removed on top (0 = the level's feasibility probe).
    pub da_depth: usize,
    pub feasible: bool,
    /// Network power `p` of the fixed-support optimum when feasible.
    pub power_w: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SearchTrace {
    pub entries: Vec<TraceEntry>,
    pub chosen: SupportDecision,
    /// DC problems actually solved (analytic terminations excluded).
    pub dc_solves: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchLayers {
    /// Full two-layer search.
    BsAndBlocks,
    /// BS switching only (block layer untouched).
    BsOnly,
    /// Block removal only (all BSs stay on).
    BlocksOnly,
}

/// `θ̃_j`: channel gain and beamforming gain against the cost of keeping the
/// BS awake. Small values are switched off first.
pub fn bs_priorities(v: &LayeredBeamformer, scenario: &Scenario) -> Vec<f64> {
    (0..scenario.n_bs())
        .map(|j| {
            let kappa: f64 = (0..scenario.n_users())
                .map(|k| scenario.channels.link_gain(k, j))
                .sum();
            let backhaul: f64 = (0..scenario.n_groups())
                .map(|m| scenario.beta(j, m) * scenario.uncached(j, m))
                .sum();
            let denom = scenario.power[j].delta
                * (scenario.power[j].relative_power_w() + backhaul);
            (kappa / denom).sqrt() * v.bs_transmit_power(j).sqrt()
        })
        .collect()
}

/// `θ_jm`: per-block analogue of [`bs_priorities`], zero for switched-off
/// BSs (their blocks are already gone).
pub fn da_priorities(
    v: &LayeredBeamformer,
    scenario: &Scenario,
    z_bs: &BTreeSet<usize>,
) -> Vec<Vec<f64>> {
    (0..scenario.n_bs())
        .map(|j| {
            (0..scenario.n_groups())
                .map(|m| {
                    if z_bs.contains(&j) {
                        return 0.0;
                    }
                    let kappa: f64 = scenario.grouping.members[m]
                        .iter()
                        .map(|&k| scenario.channels.link_gain(k, j))
                        .sum();
                    let denom = scenario.power[j].delta
                        * (scenario.power[j].relative_power_w()
                            + scenario.beta(j, m) * scenario.uncached(j, m));
                    (kappa / denom).sqrt() * v.block_power(j, m).sqrt()
                })
                .collect()
        })
        .collect()
}

/// Outcome of one fixed-support probe.
#[derive(Debug)]
pub struct FeasProbe {
    pub feasible: bool,
    pub v: Option<LayeredBeamformer>,
    /// Network power `p` at the fixed-support transmit optimum.
    pub power_w: Option<f64>,
    pub traces: Vec<CccpTrace>,
    pub dc_solves: usize,
}

/// Feasibility of the support with `z_bs` switched off (blocks of inactive
/// BSs are forced to zero). Decided by a phase-I probe minimizing the
/// uniform constraint slack, started from `start` projected onto the
/// support.
pub fn feas_f1(
    scenario: &Scenario,
    z_bs: &BTreeSet<usize>,
    start: &LayeredBeamformer,
    opts: &AlgoOptions,
) -> Result<FeasProbe, AlgoError> {
    let map = ActiveMap::new(scenario, z_bs, &BTreeSet::new());
    if !map.unserved_groups().is_empty() {
        return Ok(FeasProbe {
            feasible: false,
            v: None,
            power_w: None,
            traces: vec![],
            dc_solves: 0,
        });
    }
    let probe = run_stage(scenario, &map, StageGoal::Feasibility, start, &opts.search_stop, opts)?;
    let solved = if probe.trace.subproblems > 0 { 1 } else { 0 };
    Ok(FeasProbe {
        feasible: probe.strictly_feasible,
        v: probe.strictly_feasible.then(|| probe.v.clone()),
        power_w: None,
        traces: vec![probe.trace],
        dc_solves: solved,
    })
}

/// Feasibility plus fixed-support power evaluation: on success the probe
/// additionally minimizes transmit power on the support and reports the
/// resulting network power, realizing the per-candidate `p★(Z_BS, Z_DA)`
/// the search compares.
pub fn feas_f2(
    scenario: &Scenario,
    z_bs: &BTreeSet<usize>,
    z_da: &BTreeSet<(usize, usize)>,
    start: &LayeredBeamformer,
    opts: &AlgoOptions,
) -> Result<FeasProbe, AlgoError> {
    let map = ActiveMap::new(scenario, z_bs, z_da);
    if !map.unserved_groups().is_empty() {
        return Ok(FeasProbe {
            feasible: false,
            v: None,
            power_w: None,
            traces: vec![],
            dc_solves: 0,
        });
    }
    let probe = run_stage(scenario, &map, StageGoal::Feasibility, start, &opts.search_stop, opts)?;
    let mut traces = vec![probe.trace.clone()];
    if !probe.strictly_feasible {
        return Ok(FeasProbe {
            feasible: false,
            v: None,
            power_w: None,
            traces,
            dc_solves: 1,
        });
    }
    let power = run_stage(
        scenario,
        &map,
        StageGoal::TransmitPower,
        &probe.v,
        &opts.search_stop,
        opts,
    )?;
    traces.push(power.trace.clone());
    let p = network_power(&power.v, scenario).p_w;
    Ok(FeasProbe {
        feasible: true,
        v: Some(power.v),
        power_w: Some(p),
        traces,
        dc_solves: 1,
    })
}

/// One feasible candidate visited by the search.
#[derive(Debug, Clone)]
pub struct Candidate {
    pub decision: SupportDecision,
    pub power_w: f64,
    pub witness: LayeredBeamformer,
    pub bs_depth: usize,
    pub da_depth: usize,
}

#[derive(Debug)]
pub struct SearchResult {
    pub trace: SearchTrace,
    /// Feasible candidates sorted best-first (power, then fewer active BSs,
    /// then fewer active blocks, then lexicographic depth).
    pub candidates: Vec<Candidate>,
    pub cccp_traces: Vec<CccpTrace>,
}

pub fn iterative_search(
    scenario: &Scenario,
    v_hat: &LayeredBeamformer,
    layers: SearchLayers,
    opts: &AlgoOptions,
) -> Result<SearchResult, AlgoError> {
    let n_bs = scenario.n_bs();
    let theta_bs = bs_priorities(v_hat, scenario);
    let mut bs_order: Vec<usize> = (0..n_bs).collect();
    bs_order.sort_by(|&a, &b| {
        theta_bs[a]
            .partial_cmp(&theta_bs[b])
            .unwrap()
            .then(a.cmp(&b))
    });

    let mut entries = Vec::new();
    let mut candidates = Vec::new();
    let mut cccp_traces = Vec::new();
    let mut dc_solves = 0usize;

    let mut z_bs: BTreeSet<usize> = BTreeSet::new();
    let mut level_start = v_hat.clone();
    let max_levels = match layers {
        SearchLayers::BlocksOnly => 1,
        _ => n_bs, // switching off all BSs is analytically infeasible
    };

    for depth in 0..max_levels {
        if depth > 0 {
            z_bs.insert(bs_order[depth - 1]);
        }
        let empty = BTreeSet::new();
        let map = ActiveMap::new(scenario, &z_bs, &empty);
        if !map.unserved_groups().is_empty() {
            break;
        }
        let probe = feas_f2(scenario, &z_bs, &empty, &level_start, opts)?;
        dc_solves += probe.dc_solves;
        cccp_traces.extend(probe.traces);
        entries.push(TraceEntry {
            bs_depth: depth,
            da_depth: 0,
            feasible: probe.feasible,
            power_w: probe.power_w,
        });
        if !probe.feasible {
            break;
        }
        let level_v = probe.v.expect("feasible probe carries a witness");
        candidates.push(Candidate {
            decision: SupportDecision {
                z_bs: z_bs.clone(),
                z_da: BTreeSet::new(),
            },
            power_w: probe.power_w.unwrap(),
            witness: level_v.clone(),
            bs_depth: depth,
            da_depth: 0,
        });
        level_start = level_v.clone();

        if matches!(layers, SearchLayers::BsAndBlocks | SearchLayers::BlocksOnly) {
            let theta = da_priorities(&level_v, scenario, &z_bs);
            let mut block_order: Vec<(usize, usize)> = (0..n_bs)
                .filter(|j| !z_bs.contains(j))
                .flat_map(|j| (0..scenario.n_groups()).map(move |m| (j, m)))
                .collect();
            block_order.sort_by(|&(ja, ma), &(jb, mb)| {
                theta[ja][ma]
                    .partial_cmp(&theta[jb][mb])
                    .unwrap()
                    .then(ja.cmp(&jb))
                    .then(ma.cmp(&mb))
            });

            let mut z_da: BTreeSet<(usize, usize)> = BTreeSet::new();
            let mut inner_start = level_v.clone();
            for (kk, &(j, m)) in block_order.iter().enumerate() {
                z_da.insert((j, m));
                let inner_map = ActiveMap::new(scenario, &z_bs, &z_da);
                if !inner_map.unserved_groups().is_empty() {
                    break;
                }
                let probe = feas_f2(scenario, &z_bs, &z_da, &inner_start, opts)?;
                dc_solves += probe.dc_solves;
                cccp_traces.extend(probe.traces);
                entries.push(TraceEntry {
                    bs_depth: depth,
                    da_depth: kk + 1,
                    feasible: probe.feasible,
                    power_w: probe.power_w,
                });
                if !probe.feasible {
                    break;
                }
                let w = probe.v.expect("feasible probe carries a witness");
                candidates.push(Candidate {
                    decision: SupportDecision {
                        z_bs: z_bs.clone(),
                        z_da: z_da.clone(),
                    },
                    power_w: probe.power_w.unwrap(),
                    witness: w.clone(),
                    bs_depth: depth,
                    da_depth: kk + 1,
                });
                inner_start = w;
            }
        }
        if matches!(layers, SearchLayers::BlocksOnly) {
            break;
        }
    }

    // Conservative selection: best recorded power, ties toward fewer active
    // BSs, then fewer active blocks, then lexicographic depth.
    let n_blocks_active = |c: &Candidate| {
        (n_bs - c.decision.z_bs.len()) * scenario.n_groups()
            - c
                .decision
                .z_da
                .iter()
                .filter(|(j, _)| !c.decision.z_bs.contains(j))
                .count()
    };
    candidates.sort_by(|a, b| {
        a.power_w
            .partial_cmp(&b.power_w)
            .unwrap()
            .then((n_bs - a.decision.z_bs.len()).cmp(&(n_bs - b.decision.z_bs.len())))
            .then(n_blocks_active(a).cmp(&n_blocks_active(b)))
            .then(a.bs_depth.cmp(&b.bs_depth))
            .then(a.da_depth.cmp(&b.da_depth))
    });

    let chosen = candidates
        .first()
        .map(|c| c.decision.clone())
        .unwrap_or_else(SupportDecision::none);
    Ok(SearchResult {
        trace: SearchTrace {
            entries,
            chosen,
            dc_solves,
        },
        candidates,
        cccp_traces,
    })
}
