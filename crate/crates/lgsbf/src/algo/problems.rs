//! Assembly of the convex subproblem data.
//!
//! All constraints are normalized to O(1): QoS by `γ_m·σ²`, transmit power
//! by `P_j^TX`, backhaul surrogates by `C_j`. The QoS constraint keeps its
//! difference-of-convex shape: the interference-plus-noise side is a convex
//! quadratic, the signal term `|h_kᴴv_m|²` is the convex part subtracted,
//! supplied as a [`QosCut`] for linearization.

use conic_core::{ConcaveTerm, DcProgram, Partition, QcqpProblem, QuadForm};
use nalgebra::DVector;

use super::map::ActiveMap;
use super::weights::Weights;
use crate::netgen::Scenario;
use crate::power::LayeredBeamformer;

/// Concave-negated part of one QoS constraint: `scale·((aᵀx)² + (bᵀx)²)`,
/// the lifted signal power of one user.
#[derive(Debug, Clone)]
pub struct QosCut {
    pub a: DVector<f64>,
    pub b: DVector<f64>,
    pub scale: f64,
}

impl QosCut {
    pub fn value(&self, x: &DVector<f64>) -> f64 {
        let pa = self.a.dot(x);
        let pb = self.b.dot(x);
        self.scale * (pa * pa + pb * pb)
    }

    pub fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        let pa = self.a.dot(x);
        let pb = self.b.dot(x);
        (&self.a * pa + &self.b * pb) * (2.0 * self.scale)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintKind {
    Qos { user: usize },
    Power { bs: usize },
    Backhaul { bs: usize },
}

/// Convex parts of the subproblem constraints plus the QoS cuts.
pub struct ConstraintSet {
    pub partition: Partition,
    pub dim: usize,
    /// Index of the slack coordinate when the set was built `slacked`.
    pub slack_coord: Option<usize>,
    pub forms: Vec<QuadForm>,
    pub cuts: Vec<Option<QosCut>>,
    pub kinds: Vec<ConstraintKind>,
}

/// Lifted direction pair of `h_kᴴ v_m` restricted to the active blocks of
/// one group, written into global coordinates.
fn qos_directions(
    scenario: &Scenario,
    map: &ActiveMap,
    user: usize,
    group: usize,
    dim: usize,
) -> (DVector<f64>, DVector<f64>) {
    let ants = map.ants;
    let mut a = DVector::zeros(dim);
    let mut b = DVector::zeros(dim);
    for (idx, &(j, m)) in map.blocks.iter().enumerate() {
        if m != group {
            continue;
        }
        let off = map.block_coords(idx).start;
        let h = scenario.channels.link(user, j);
        for l in 0..ants {
            a[off + l] = h[l].re;
            a[off + ants + l] = h[l].im;
            b[off + l] = -h[l].im;
            b[off + ants + l] = h[l].re;
        }
    }
    (a, b)
}

/// QoS and transmit-power constraints over the active blocks; the
/// weight-dependent backhaul surrogate is assembled separately by
/// [`backhaul_constraints`] so the driver can refresh it per iteration.
///
/// `slacked` appends a scalar `t` relaxing QoS (and later backhaul), for
/// feasibility probes; per-BS transmit caps stay hard.
pub fn base_constraints(scenario: &Scenario, map: &ActiveMap, slacked: bool) -> ConstraintSet {
    let partition = map.partition(if slacked { 1 } else { 0 });
    let dim = partition.dim();
    let slack_coord = if slacked { Some(map.dim()) } else { None };
    let noise = scenario.noise_w;

    let mut forms = Vec::new();
    let mut cuts = Vec::new();
    let mut kinds = Vec::new();

    // QoS, one per user: Σ_{i≠m}|h_kᴴv_i|²/σ² + 1 - |h_kᴴv_m|²/(γσ²) ≤ 0.
    for m in 0..scenario.n_groups() {
        let gamma = scenario.grouping.target_sinr[m];
        for &k in &scenario.grouping.members[m] {
            let mut f = QuadForm::zero(&partition);
            f.cst = 1.0;
            for i in 0..scenario.n_groups() {
                if i == m {
                    continue;
                }
                let (a, b) = qos_directions(scenario, map, k, i, dim);
                let r = partition.range(i);
                let al = DVector::from_iterator(r.len(), a.rows(r.start, r.len()).iter().cloned());
                let bl = DVector::from_iterator(r.len(), b.rows(r.start, r.len()).iter().cloned());
                f.add_outer(i, 1.0 / noise, &al);
                f.add_outer(i, 1.0 / noise, &bl);
            }
            if let Some(t) = slack_coord {
                f.lin[t] = -1.0;
            }
            let (a, b) = qos_directions(scenario, map, k, m, dim);
            forms.push(f);
            cuts.push(Some(QosCut {
                a,
                b,
                scale: 1.0 / (gamma * noise),
            }));
            kinds.push(ConstraintKind::Qos { user: k });
        }
    }

    // Per-BS transmit power caps over whatever blocks the BS still owns.
    for j in 0..scenario.n_bs() {
        let coords: Vec<usize> = map
            .blocks
            .iter()
            .enumerate()
            .filter(|(_, &(bj, _))| bj == j)
            .flat_map(|(idx, _)| map.block_coords(idx))
            .collect();
        if coords.is_empty() {
            continue;
        }
        let mut f = QuadForm::zero(&partition);
        let cap = scenario.power[j].p_tx_max_w;
        f.add_diag(&partition, coords.into_iter(), 1.0 / cap);
        f.cst = -1.0;
        forms.push(f);
        cuts.push(None);
        kinds.push(ConstraintKind::Power { bs: j });
    }

    ConstraintSet {
        partition,
        dim,
        slack_coord,
        forms,
        cuts,
        kinds,
    }
}

/// Reweighted backhaul capacity surrogates, one per BS that still serves
/// uncached content: `Σ_m R_m(1-c_{q_m,j})·ω_jm·‖v_jm‖² ≤ C_j`.
pub fn backhaul_constraints(
    scenario: &Scenario,
    map: &ActiveMap,
    partition: &Partition,
    weights: &Weights,
    slack_coord: Option<usize>,
) -> Vec<(usize, QuadForm)> {
    let mut out = Vec::new();
    for j in 0..scenario.n_bs() {
        let mut f = QuadForm::zero(partition);
        let mut any = false;
        for (idx, &(bj, m)) in map.blocks.iter().enumerate() {
            if bj != j {
                continue;
            }
            let coeff = scenario.rates_bps[m] * scenario.uncached(j, m)
                * weights.block_weight(j, m)
                / scenario.power[j].c_bh_bps;
            if coeff > 0.0 {
                any = true;
                f.add_diag(partition, map.block_coords(idx), coeff);
            }
        }
        if !any {
            continue;
        }
        f.cst = -1.0;
        if let Some(t) = slack_coord {
            f.lin[t] = -1.0;
        }
        out.push((j, f));
    }
    out
}

/// One-shot constraint assembly (base plus weighted backhaul), for the
/// DC-program builders and tests.
pub fn build_constraints(
    scenario: &Scenario,
    map: &ActiveMap,
    weights: Option<&Weights>,
    slacked: bool,
) -> ConstraintSet {
    let mut set = base_constraints(scenario, map, slacked);
    if let Some(w) = weights {
        for (j, f) in backhaul_constraints(scenario, map, &set.partition, w, set.slack_coord) {
            set.forms.push(f);
            set.cuts.push(None);
            set.kinds.push(ConstraintKind::Backhaul { bs: j });
        }
    }
    set
}

/// `T(v) = Σ δ_j‖v_jm‖²` over the active blocks.
pub fn objective_transmit(scenario: &Scenario, map: &ActiveMap, partition: &Partition) -> QuadForm {
    let mut f = QuadForm::zero(partition);
    for (idx, &(j, _)) in map.blocks.iter().enumerate() {
        f.add_diag(partition, map.block_coords(idx), scenario.power[j].delta);
    }
    f
}

/// The weighted two-layer sparsity surrogate
/// `T(v) + λ₁·Σ P_j^D ω̃_j‖ṽ_j‖² + λ₂·Σ β_jm(1-c)ω_jm‖v_jm‖²`.
pub fn objective_sparsity(
    scenario: &Scenario,
    map: &ActiveMap,
    partition: &Partition,
    weights: &Weights,
    lambda1: f64,
    lambda2: f64,
) -> QuadForm {
    let mut f = QuadForm::zero(partition);
    for (idx, &(j, m)) in map.blocks.iter().enumerate() {
        let mut d = scenario.power[j].delta;
        d += lambda1 * scenario.power[j].relative_power_w() * weights.bs[j];
        d += lambda2 * scenario.beta(j, m) * scenario.uncached(j, m) * w_block(weights, j, m);
        f.add_diag(partition, map.block_coords(idx), d);
    }
    f
}

fn w_block(w: &Weights, j: usize, m: usize) -> f64 {
    w.block_weight(j, m)
}

/// Feasibility objective: minimize the uniform slack.
pub fn objective_slack(partition: &Partition, slack_coord: usize) -> QuadForm {
    let mut f = QuadForm::zero(partition);
    f.lin[slack_coord] = 1.0;
    f
}

fn cuts_to_concave(cuts: &[Option<QosCut>]) -> Vec<Option<ConcaveTerm>> {
    cuts.iter()
        .map(|c| {
            c.as_ref().map(|cut| {
                let cut = cut.clone();
                ConcaveTerm(Box::new(move |x: &DVector<f64>| {
                    (cut.value(x), cut.gradient(x))
                }))
            })
        })
        .collect()
}

/// The generalized two-layer group-sparse problem at a given weight setting,
/// as a DC program: `λ₁ = λ₂ = 1` is the full layered model, `λ₁ = λ₂ = 0`
/// plain transmit-power minimization, and the single-layer benchmarks zero
/// one of the two.
pub fn build_generalized_problem(
    scenario: &Scenario,
    map: &ActiveMap,
    weights: &Weights,
    lambda1: f64,
    lambda2: f64,
) -> DcProgram {
    let set = build_constraints(scenario, map, Some(weights), false);
    let objective = objective_sparsity(scenario, map, &set.partition, weights, lambda1, lambda2);
    let mut base = QcqpProblem::new_certified(set.partition.clone(), objective, set.forms);
    base.strongly_convex = true;
    DcProgram {
        base,
        concave_obj: None,
        concave_con: cuts_to_concave(&set.cuts),
    }
}

/// Fixed-support transmit power minimization (no backhaul surrogate: the
/// support pattern already pins the exact backhaul load).
pub fn build_fixed_support_power_min(scenario: &Scenario, map: &ActiveMap) -> DcProgram {
    let set = build_constraints(scenario, map, None, false);
    let objective = objective_transmit(scenario, map, &set.partition);
    let mut base = QcqpProblem::new_certified(set.partition.clone(), objective, set.forms);
    base.strongly_convex = true;
    DcProgram {
        base,
        concave_obj: None,
        concave_con: cuts_to_concave(&set.cuts),
    }
}

/// Fixed-support feasibility probe: minimize the uniform QoS slack under
/// hard power caps.
pub fn build_fixed_support_phase1(scenario: &Scenario, map: &ActiveMap) -> DcProgram {
    let set = build_constraints(scenario, map, None, true);
    let objective = objective_slack(&set.partition, set.slack_coord.unwrap());
    DcProgram {
        base: QcqpProblem::new_certified(set.partition.clone(), objective, set.forms),
        concave_obj: None,
        concave_con: cuts_to_concave(&set.cuts),
    }
}

/// Worst normalized violation per constraint family (negative when
/// strictly feasible). QoS is evaluated in its exact DC form, power against
/// the per-BS caps, backhaul against the weighted surrogate when weights
/// are given.
#[derive(Debug, Clone, Copy)]
pub struct ViolationParts {
    pub qos: f64,
    pub power: f64,
    pub backhaul: f64,
}

impl ViolationParts {
    pub fn max(&self) -> f64 {
        self.qos.max(self.power).max(self.backhaul)
    }
}

pub fn violation_parts(
    scenario: &Scenario,
    v: &LayeredBeamformer,
    weights: Option<&Weights>,
) -> ViolationParts {
    let mut qos = f64::NEG_INFINITY;
    let noise = scenario.noise_w;
    // QoS in DC form.
    for m in 0..scenario.n_groups() {
        let gamma = scenario.grouping.target_sinr[m];
        for &k in &scenario.grouping.members[m] {
            let h = scenario.channels.stacked(k);
            let mut signal = 0.0;
            let mut interference = 0.0;
            for i in 0..scenario.n_groups() {
                let dot: num_complex::Complex64 = h
                    .iter()
                    .zip(v.group_stack(i).iter())
                    .map(|(hc, vc)| hc.conj() * vc)
                    .sum();
                if i == m {
                    signal = dot.norm_sqr();
                } else {
                    interference += dot.norm_sqr();
                }
            }
            let val = (gamma * (interference + noise) - signal) / (gamma * noise);
            qos = qos.max(val);
        }
    }
    if !qos.is_finite() {
        qos = 0.0;
    }
    let mut power = f64::NEG_INFINITY;
    for j in 0..scenario.n_bs() {
        let cap = scenario.power[j].p_tx_max_w;
        power = power.max((v.bs_transmit_power(j) - cap) / cap);
    }
    let mut backhaul = f64::NEG_INFINITY;
    if let Some(w) = weights {
        for j in 0..scenario.n_bs() {
            let mut load = 0.0;
            for m in 0..scenario.n_groups() {
                load += scenario.rates_bps[m]
                    * scenario.uncached(j, m)
                    * w.block_weight(j, m)
                    * v.block_power(j, m);
            }
            backhaul = backhaul.max(load / scenario.power[j].c_bh_bps - 1.0);
        }
    }
    if !backhaul.is_finite() {
        backhaul = f64::NEG_INFINITY;
    }
    ViolationParts {
        qos,
        power,
        backhaul,
    }
}

/// Scale the beamformer up just enough to absorb a tiny exact QoS drift
/// (raising signal faster than interference). Drift beyond the restoration
/// range is a numerical failure.
pub fn restore_qos(scenario: &Scenario, v: &mut LayeredBeamformer) -> Result<(), super::AlgoError> {
    let parts = violation_parts(scenario, v, None);
    if parts.qos <= 0.0 {
        return Ok(());
    }
    if parts.qos > 1e-8 {
        return Err(super::AlgoError::Drift(parts.qos));
    }
    let mut factor2: f64 = 1.0;
    for m in 0..scenario.n_groups() {
        let gamma = scenario.grouping.target_sinr[m];
        let gs = gamma * scenario.noise_w;
        for &k in &scenario.grouping.members[m] {
            let h = scenario.channels.stacked(k);
            let mut signal = 0.0;
            let mut interference = 0.0;
            for i in 0..scenario.n_groups() {
                let dot: num_complex::Complex64 = h
                    .iter()
                    .zip(v.group_stack(i).iter())
                    .map(|(hc, vc)| hc.conj() * vc)
                    .sum();
                if i == m {
                    signal = dot.norm_sqr();
                } else {
                    interference += dot.norm_sqr();
                }
            }
            let defect = gamma * (interference + scenario.noise_w) - signal;
            if defect > 0.0 && defect < gs {
                factor2 = factor2.max(gs / (gs - defect));
            }
        }
    }
    v.scale(factor2.sqrt() * (1.0 + 1e-12));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netgen::ScenarioConfig;
    use num_complex::Complex64;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn scenario(n_users: usize, cache: usize, seed: u64) -> Scenario {
        let cfg = ScenarioConfig {
            n_users,
            cache_size: cache,
            ..Default::default()
        };
        Scenario::generate(&cfg, seed).unwrap()
    }

    fn random_v(s: &Scenario, seed: u64) -> LayeredBeamformer {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut v = LayeredBeamformer::zeros(s.n_bs(), s.n_groups(), s.ants(), s.eps_supp);
        for m in 0..s.n_groups() {
            for j in 0..s.n_bs() {
                for z in v.block_mut(j, m) {
                    *z = Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5) * 0.15;
                }
            }
        }
        v
    }

    #[test]
    fn qos_form_matches_direct_sinr_computation() {
        let s = scenario(6, 10, 21);
        let map = ActiveMap::full(&s);
        let set = build_constraints(&s, &map, None, false);
        let v = random_v(&s, 2);
        let x = map.to_real(&v);
        let sinr = crate::power::sinr_per_user(&v, &s.channels, &s.grouping, s.noise_w);
        let mut checked = 0;
        for (i, kind) in set.kinds.iter().enumerate() {
            if let ConstraintKind::Qos { user } = kind {
                let m = s.grouping.group_of(*user);
                let gamma = s.grouping.target_sinr[m];
                let f = set.forms[i].value(&set.partition, &x);
                let h = set.cuts[i].as_ref().unwrap().value(&x);
                // f - h ≤ 0 iff SINR ≥ γ; check the exact algebra:
                // (f - h)·γσ² = γ(I+σ²) - S and SINR = S/(I+σ²).
                let dc = (f - h) * gamma * s.noise_w;
                let ratio = sinr[*user] / gamma;
                // dc ≤ 0 ⇔ ratio ≥ 1
                assert_eq!(dc <= 0.0, ratio >= 1.0, "user {user}");
                checked += 1;
            }
        }
        assert_eq!(checked, 6);
    }

    #[test]
    fn generalized_objective_lambda_combinations() {
        let s = scenario(5, 10, 22);
        let map = ActiveMap::full(&s);
        let v = random_v(&s, 3);
        let x = map.to_real(&v);
        let w = Weights::from_beamformer(&v, 1e-5);

        let transmit: f64 = (0..s.n_bs())
            .map(|j| s.power[j].delta * v.bs_transmit_power(j))
            .sum();
        let bs_term: f64 = (0..s.n_bs())
            .map(|j| s.power[j].relative_power_w() * w.bs[j] * v.bs_transmit_power(j))
            .sum();
        let block_term: f64 = (0..s.n_bs())
            .map(|j| {
                (0..s.n_groups())
                    .map(|m| {
                        s.beta(j, m) * s.uncached(j, m) * w.block_weight(j, m) * v.block_power(j, m)
                    })
                    .sum::<f64>()
            })
            .sum();

        for (l1, l2) in [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0), (0.3, 2.0)] {
            let dc = build_generalized_problem(&s, &map, &w, l1, l2);
            let got = dc.objective(&x);
            let expect = transmit + l1 * bs_term + l2 * block_term;
            assert!(
                (got - expect).abs() <= 1e-9 * (1.0 + expect.abs()),
                "λ=({l1},{l2}): {got} vs {expect}"
            );
        }
    }

    #[test]
    fn exact_violation_agrees_with_constraint_report_direction() {
        let s = scenario(4, 100, 23);
        let vz = LayeredBeamformer::zeros(s.n_bs(), s.n_groups(), s.ants(), s.eps_supp);
        // Zero beamformer violates QoS by exactly 1 in normalized units.
        assert!((violation_parts(&s, &vz, None).qos - 1.0).abs() < 1e-12);

        let mut vbig = random_v(&s, 4);
        vbig.scale(50.0);
        assert!(violation_parts(&s, &vbig, None).power > 0.0);
    }

    #[test]
    fn backhaul_surrogate_appears_only_with_uncached_content() {
        let s_full = scenario(5, 100, 24); // everything cached
        let map = ActiveMap::full(&s_full);
        let w = Weights::initial_loose(&s_full, 1e-5);
        let set = build_constraints(&s_full, &map, Some(&w), false);
        assert!(set
            .kinds
            .iter()
            .all(|k| !matches!(k, ConstraintKind::Backhaul { .. })));

        let s_none = scenario(5, 0, 24); // nothing cached
        let map = ActiveMap::full(&s_none);
        let set = build_constraints(&s_none, &map, Some(&w), false);
        let n_bh = set
            .kinds
            .iter()
            .filter(|k| matches!(k, ConstraintKind::Backhaul { .. }))
            .count();
        assert_eq!(n_bh, s_none.n_bs());
    }
}
