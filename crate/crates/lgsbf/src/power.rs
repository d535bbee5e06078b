//! Network power model: SINR, rates, backhaul assignment and load, and the
//! per-component power accounting.
//!
//! A base station is active when its stacked beamformer norm exceeds the
//! support threshold, in which case it draws `P_A + δ·P_out`; otherwise it
//! sleeps at `P_S`. A backhaul link carrying traffic draws `P_A + E·R`;
//! idle it draws `P_S`. The optimization objective `p` drops the constant
//! sleep-level terms; the reported total is `p̃ = p + Σ(P_S^BS + P_S^BH)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

use crate::netgen::{CacheMatrix, ChannelMatrix, Grouping, Scenario};

#[derive(Debug, thiserror::Error)]
pub enum PowerError {
    #[error("backhaul load {load:.3e} bps exceeds capacity {cap:.3e} bps at BS {bs}")]
    LoadExceedsCapacity { bs: usize, load: f64, cap: f64 },
}

/// Static power data for one BS and its backhaul link.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BsPowerParams {
    pub p_active_bs_w: f64,
    pub p_sleep_bs_w: f64,
    /// Slope of the load-dependent BS power draw.
    pub delta: f64,
    pub p_active_bh_w: f64,
    pub p_sleep_bh_w: f64,
    /// Backhaul transport energy, joules per bit.
    pub e_bh_j_per_bit: f64,
    /// Backhaul link capacity, bits per second.
    pub c_bh_bps: f64,
    pub p_tx_max_w: f64,
}

impl BsPowerParams {
    /// Active-minus-sleep static power of the BS plus its backhaul link:
    /// the cost of keeping this BS awake.
    pub fn relative_power_w(&self) -> f64 {
        (self.p_active_bs_w - self.p_sleep_bs_w) + (self.p_active_bh_w - self.p_sleep_bh_w)
    }
}

/// Group data rate `R_m = B₀·log₂(1+γ_m)` in bits per second.
pub fn group_rate(sinr_target_linear: f64, bandwidth_hz: f64) -> f64 {
    bandwidth_hz * (1.0 + sinr_target_linear).log2()
}

/// The aggregate beamformer with (BS, group) block structure.
///
/// Storage is group-major: block `(j, m)` holds the `ants` complex
/// coefficients BS `j` uses for multicast group `m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayeredBeamformer {
    pub n_bs: usize,
    pub n_groups: usize,
    pub ants: usize,
    /// Layout `[group][bs][antenna]`, serialized as interleaved re/im pairs.
    #[serde(with = "crate::netgen::complex_interleaved")]
    pub coeffs: Vec<Complex64>,
    /// Support threshold on block norms (amplitude scale, √W).
    pub eps_supp: f64,
}

impl LayeredBeamformer {
    pub fn zeros(n_bs: usize, n_groups: usize, ants: usize, eps_supp: f64) -> Self {
        Self {
            n_bs,
            n_groups,
            ants,
            coeffs: vec![Complex64::ZERO; n_bs * n_groups * ants],
            eps_supp,
        }
    }

    pub fn block(&self, bs: usize, group: usize) -> &[Complex64] {
        let base = (group * self.n_bs + bs) * self.ants;
        &self.coeffs[base..base + self.ants]
    }

    pub fn block_mut(&mut self, bs: usize, group: usize) -> &mut [Complex64] {
        let base = (group * self.n_bs + bs) * self.ants;
        &mut self.coeffs[base..base + self.ants]
    }

    /// `‖v_jm‖₂²`.
    pub fn block_power(&self, bs: usize, group: usize) -> f64 {
        self.block(bs, group).iter().map(|z| z.norm_sqr()).sum()
    }

    /// Transmit power of one BS: `‖ṽ_j‖₂² = Σ_m ‖v_jm‖₂²`.
    pub fn bs_transmit_power(&self, bs: usize) -> f64 {
        (0..self.n_groups).map(|m| self.block_power(bs, m)).sum()
    }

    /// Cross-BS stack `v_m` for one group (dimension `n_bs·ants`).
    pub fn group_stack(&self, group: usize) -> &[Complex64] {
        let base = group * self.n_bs * self.ants;
        &self.coeffs[base..base + self.n_bs * self.ants]
    }

    pub fn scale(&mut self, c: f64) {
        for z in self.coeffs.iter_mut() {
            *z *= c;
        }
    }
}

/// Active BSs and active (BS, group) blocks of a beamformer. Block activity
/// implies BS activity because `‖ṽ_j‖ ≥ ‖v_jm‖`.
pub fn support_sets(v: &LayeredBeamformer) -> (BTreeSet<usize>, BTreeSet<(usize, usize)>) {
    let mut bs = BTreeSet::new();
    let mut blocks = BTreeSet::new();
    for j in 0..v.n_bs {
        if v.bs_transmit_power(j).sqrt() > v.eps_supp {
            bs.insert(j);
        }
        for m in 0..v.n_groups {
            if v.block_power(j, m).sqrt() > v.eps_supp {
                blocks.insert((j, m));
            }
        }
    }
    (bs, blocks)
}

/// Per-user SINR under single-user detection (interference as noise).
pub fn sinr_per_user(
    v: &LayeredBeamformer,
    channels: &ChannelMatrix,
    grouping: &Grouping,
    noise_w: f64,
) -> Vec<f64> {
    let n_users = channels.n_users;
    let mut out = vec![0.0; n_users];
    for m in 0..grouping.n_groups() {
        for &k in &grouping.members[m] {
            let h = channels.stacked(k);
            let mut signal = 0.0;
            let mut interference = 0.0;
            for i in 0..grouping.n_groups() {
                let dot: Complex64 = h
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
            out[k] = signal / (interference + noise_w);
        }
    }
    out
}

/// Binary backhaul assignment `n_jm = (1 - c_{q_m,j}) · I(block active)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackhaulAssignment {
    pub n_bs: usize,
    pub n_groups: usize,
    /// Row-major `[bs][group]`.
    bits: Vec<bool>,
}

impl BackhaulAssignment {
    pub fn assigned(&self, bs: usize, group: usize) -> bool {
        self.bits[bs * self.n_groups + group]
    }

    /// `‖N^BA‖₀`.
    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}

pub fn backhaul_assignment(
    v: &LayeredBeamformer,
    cache: &CacheMatrix,
    grouping: &Grouping,
) -> BackhaulAssignment {
    let (_, blocks) = support_sets(v);
    let mut bits = vec![false; v.n_bs * grouping.n_groups()];
    for &(j, m) in &blocks {
        let file = grouping.requested_file[m];
        if !cache.cached(file, j) {
            bits[j * grouping.n_groups() + m] = true;
        }
    }
    BackhaulAssignment {
        n_bs: v.n_bs,
        n_groups: grouping.n_groups(),
        bits,
    }
}

/// Per-BS backhaul traffic `R_j = Σ_m R_m·n_jm` in bits per second.
pub fn backhaul_load(n: &BackhaulAssignment, rates_bps: &[f64]) -> Vec<f64> {
    (0..n.n_bs)
        .map(|j| {
            (0..n.n_groups)
                .filter(|&m| n.assigned(j, m))
                .map(|m| rates_bps[m])
                .sum()
        })
        .collect()
}

/// BS power draw: `P_A + δ·‖ṽ_j‖²` when active, `P_S` asleep.
pub fn bs_power(v: &LayeredBeamformer, bs: usize, params: &BsPowerParams) -> f64 {
    let p_out = v.bs_transmit_power(bs);
    if p_out.sqrt() > v.eps_supp {
        params.p_active_bs_w + params.delta * p_out
    } else {
        params.p_sleep_bs_w
    }
}

/// Backhaul link power draw: `P_A + E·R` when loaded, `P_S` idle. Loads
/// above capacity must be rejected before the power model applies.
pub fn backhaul_power(load_bps: f64, params: &BsPowerParams) -> Result<f64, PowerError> {
    if load_bps > params.c_bh_bps {
        return Err(PowerError::LoadExceedsCapacity {
            bs: usize::MAX,
            load: load_bps,
            cap: params.c_bh_bps,
        });
    }
    Ok(if load_bps > 0.0 {
        params.p_active_bh_w + params.e_bh_j_per_bit * load_bps
    } else {
        params.p_sleep_bh_w
    })
}

/// Power accounting for one beamformer on one scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerBreakdown {
    /// Amplifier draw `Σ_{j∈A} δ_j‖ṽ_j‖²`, W.
    pub transmit_w: f64,
    /// Traffic-dependent backhaul draw `Σ β_jm·n_jm`, W.
    pub backhaul_traffic_w: f64,
    /// Relative (awake-cost) power `Σ_{j∈A} P_j^D`, W.
    pub relative_w: f64,
    /// Constant sleep-level floor `Σ_j (P_S^BS + P_S^BH)`, W.
    pub static_sleep_w: f64,
    /// Optimization objective `p = transmit + backhaul + relative`.
    pub p_w: f64,
    /// Total network power `p̃ = p + static_sleep`.
    pub p_tilde_w: f64,
    pub n_active_bs: usize,
    pub n_assignments: usize,
}

pub fn network_power(v: &LayeredBeamformer, scenario: &Scenario) -> PowerBreakdown {
    let (active, _) = support_sets(v);
    let assignment = backhaul_assignment(v, &scenario.cache, &scenario.grouping);

    let mut transmit = 0.0;
    let mut backhaul = 0.0;
    let mut relative = 0.0;
    for &j in &active {
        let params = &scenario.power[j];
        transmit += params.delta * v.bs_transmit_power(j);
        relative += params.relative_power_w();
        for m in 0..scenario.grouping.n_groups() {
            if assignment.assigned(j, m) {
                backhaul += scenario.beta(j, m);
            }
        }
    }
    let static_sleep: f64 = scenario
        .power
        .iter()
        .map(|p| p.p_sleep_bs_w + p.p_sleep_bh_w)
        .sum();
    let p = transmit + backhaul + relative;
    PowerBreakdown {
        transmit_w: transmit,
        backhaul_traffic_w: backhaul,
        relative_w: relative,
        static_sleep_w: static_sleep,
        p_w: p,
        p_tilde_w: p + static_sleep,
        n_active_bs: active.len(),
        n_assignments: assignment.count(),
    }
}

/// Constraint tolerances used for certification of returned solutions.
pub const TOL_QOS: f64 = 1e-6;
pub const TOL_POWER: f64 = 1e-6;

/// Feasibility report with margins (dB where meaningful).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConstraintReport {
    pub qos_ok: bool,
    pub power_ok: bool,
    pub backhaul_ok: bool,
    /// `min_k SINR_k/γ` in dB; negative means QoS shortfall.
    pub worst_sinr_margin_db: f64,
    /// `min_j (P_max - ‖ṽ_j‖²)` in W.
    pub worst_power_margin_w: f64,
    /// `min_j (C_j - R_j)` in bps, under the exact indicator load.
    pub worst_backhaul_margin_bps: f64,
}

impl ConstraintReport {
    pub fn all_ok(&self) -> bool {
        self.qos_ok && self.power_ok && self.backhaul_ok
    }
}

pub fn check_constraints(v: &LayeredBeamformer, scenario: &Scenario) -> ConstraintReport {
    let sinr = sinr_per_user(v, &scenario.channels, &scenario.grouping, scenario.noise_w);
    let mut worst_ratio = f64::INFINITY;
    for m in 0..scenario.grouping.n_groups() {
        let target = scenario.grouping.target_sinr[m];
        for &k in &scenario.grouping.members[m] {
            worst_ratio = worst_ratio.min(sinr[k] / target);
        }
    }
    if !worst_ratio.is_finite() {
        worst_ratio = 1.0; // no users, QoS vacuous
    }
    let qos_ok = worst_ratio >= 1.0 - TOL_QOS;

    let mut worst_power = f64::INFINITY;
    for j in 0..v.n_bs {
        worst_power = worst_power.min(scenario.power[j].p_tx_max_w - v.bs_transmit_power(j));
    }
    let power_ok = (0..v.n_bs)
        .all(|j| v.bs_transmit_power(j) <= scenario.power[j].p_tx_max_w * (1.0 + TOL_POWER));

    let assignment = backhaul_assignment(v, &scenario.cache, &scenario.grouping);
    let loads = backhaul_load(&assignment, &scenario.rates_bps);
    let mut worst_bh = f64::INFINITY;
    for (j, &load) in loads.iter().enumerate() {
        worst_bh = worst_bh.min(scenario.power[j].c_bh_bps - load);
    }
    let backhaul_ok = worst_bh >= 0.0;

    ConstraintReport {
        qos_ok,
        power_ok,
        backhaul_ok,
        worst_sinr_margin_db: 10.0 * worst_ratio.log10(),
        worst_power_margin_w: worst_power,
        worst_backhaul_margin_bps: worst_bh,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netgen::{Scenario, ScenarioConfig};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn pico_params() -> BsPowerParams {
        ScenarioConfig::default().bs_power_params(0)
    }

    fn tiny_scenario(cache_size: usize, n_users: usize, seed: u64) -> Scenario {
        let cfg = ScenarioConfig {
            n_users,
            cache_size,
            ..Default::default()
        };
        Scenario::generate(&cfg, seed).unwrap()
    }

    fn random_beamformer(s: &Scenario, seed: u64, zero_bs: &[usize]) -> LayeredBeamformer {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut v = LayeredBeamformer::zeros(s.n_bs(), s.n_groups(), s.ants(), s.eps_supp);
        for m in 0..s.n_groups() {
            for j in 0..s.n_bs() {
                if zero_bs.contains(&j) {
                    continue;
                }
                for z in v.block_mut(j, m) {
                    *z = Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5) * 0.2;
                }
            }
        }
        v
    }

    #[test]
    fn group_rate_cases() {
        assert_eq!(group_rate(0.0, 1e7), 0.0);
        // log2(1+3) = 2 at 10 MHz.
        assert!((group_rate(3.0, 1e7) - 2e7).abs() < 1e-6);
        let g = 10f64.powf(0.5);
        assert!((group_rate(g, 1e7) - 1e7 * (1.0 + g).log2()).abs() < 1e-6);
    }

    #[test]
    fn sleep_and_active_bs_power() {
        let p = pico_params();
        let s = tiny_scenario(10, 2, 1);
        let v = LayeredBeamformer::zeros(s.n_bs(), s.n_groups(), s.ants(), s.eps_supp);
        assert_eq!(bs_power(&v, 0, &p), 4.3);

        // Active at 0.5 W output: 6.8 + 4·0.5 = 8.8 W.
        let mut v2 = v.clone();
        v2.block_mut(0, 0)[0] = Complex64::new(0.5f64.sqrt(), 0.0);
        assert!((bs_power(&v2, 0, &p) - 8.8).abs() < 1e-12);

        // Discontinuity: output just above the support threshold draws the
        // full active base.
        let mut v3 = v.clone();
        v3.block_mut(0, 0)[0] = Complex64::new(s.eps_supp * 1.01, 0.0);
        assert!((bs_power(&v3, 0, &p) - 6.8).abs() < 1e-6);
    }

    #[test]
    fn backhaul_power_reference_points() {
        let p = pico_params();
        assert_eq!(backhaul_power(0.0, &p).unwrap(), 0.75);
        // Full 500 Mbps at 1e-7 J/bit: 3.85 + 50 = 53.85 W.
        assert!((backhaul_power(500e6, &p).unwrap() - 53.85).abs() < 1e-9);
        assert!((backhaul_power(10e6, &p).unwrap() - 4.85).abs() < 1e-9);
        assert!(backhaul_power(500e6 + 1.0, &p).is_err());
        // Nondecreasing in load on the active branch.
        let mut last = 0.0;
        for load in [1e3, 1e6, 1e8, 5e8] {
            let w = backhaul_power(load, &p).unwrap();
            assert!(w >= last);
            last = w;
        }
    }

    #[test]
    fn sinr_formula_against_independent_evaluation() {
        let s = tiny_scenario(10, 6, 3);
        let v = random_beamformer(&s, 17, &[]);
        let sinr = sinr_per_user(&v, &s.channels, &s.grouping, s.noise_w);
        // Independent evaluation: accumulate per (BS, antenna) products
        // without the stacked-vector helpers.
        for m in 0..s.n_groups() {
            for &k in &s.grouping.members[m] {
                let dot = |grp: usize| -> Complex64 {
                    let mut acc = Complex64::ZERO;
                    for j in 0..s.n_bs() {
                        let h = s.channels.link(k, j);
                        let b = v.block(j, grp);
                        for l in 0..s.ants() {
                            acc += h[l].conj() * b[l];
                        }
                    }
                    acc
                };
                let sig = dot(m).norm_sqr();
                let mut interf = 0.0;
                for i in 0..s.n_groups() {
                    if i != m {
                        interf += dot(i).norm_sqr();
                    }
                }
                let expect = sig / (interf + s.noise_w);
                assert!(
                    (sinr[k] - expect).abs() <= 1e-12 * expect.abs().max(1e-300),
                    "user {k}: {} vs {}",
                    sinr[k],
                    expect
                );
            }
        }
        // Degenerate cases.
        let vz = LayeredBeamformer::zeros(s.n_bs(), s.n_groups(), s.ants(), s.eps_supp);
        assert!(sinr_per_user(&vz, &s.channels, &s.grouping, s.noise_w)
            .iter()
            .all(|&x| x == 0.0));
    }

    #[test]
    fn single_group_sinr_has_no_interference() {
        let cfg = ScenarioConfig {
            n_users: 3,
            n_files: 1,
            ..Default::default()
        };
        let s = Scenario::generate(&cfg, 4).unwrap();
        assert_eq!(s.n_groups(), 1);
        let v = random_beamformer(&s, 5, &[]);
        let sinr = sinr_per_user(&v, &s.channels, &s.grouping, s.noise_w);
        for k in 0..3 {
            let h = s.channels.stacked(k);
            let dot: Complex64 = h
                .iter()
                .zip(v.group_stack(0).iter())
                .map(|(hc, vc)| hc.conj() * vc)
                .sum();
            assert!((sinr[k] - dot.norm_sqr() / s.noise_w).abs() < 1e-12 * sinr[k].max(1e-300));
        }
    }

    #[test]
    fn support_sets_and_nesting() {
        let s = tiny_scenario(10, 4, 6);
        let vz = LayeredBeamformer::zeros(s.n_bs(), s.n_groups(), s.ants(), s.eps_supp);
        let (bs, blocks) = support_sets(&vz);
        assert!(bs.is_empty() && blocks.is_empty());

        let mut v1 = vz.clone();
        v1.block_mut(2, 0)[0] = Complex64::new(0.1, 0.0);
        let (bs, blocks) = support_sets(&v1);
        assert_eq!(bs.into_iter().collect::<Vec<_>>(), vec![2]);
        assert_eq!(blocks.into_iter().collect::<Vec<_>>(), vec![(2, 0)]);

        // Nesting holds for random beamformers with zeroed BSs.
        for seed in 0..10 {
            let v = random_beamformer(&s, seed, &[1, 4]);
            let (bs, blocks) = support_sets(&v);
            for &(j, _) in &blocks {
                assert!(bs.contains(&j), "block active but BS {j} not");
            }
        }
    }

    #[test]
    fn assignment_respects_cache_and_support() {
        let s = tiny_scenario(0, 5, 8); // empty cache: every active block assigns
        let v = random_beamformer(&s, 9, &[3]);
        let n = backhaul_assignment(&v, &s.cache, &s.grouping);
        let (_, blocks) = support_sets(&v);
        assert_eq!(n.count(), blocks.len());
        for m in 0..s.n_groups() {
            assert!(!n.assigned(3, m), "inactive BS assigned");
        }

        // Fully cached: no assignments regardless of support.
        let sf = tiny_scenario(100, 5, 8);
        let vf = random_beamformer(&sf, 9, &[]);
        let nf = backhaul_assignment(&vf, &sf.cache, &sf.grouping);
        assert_eq!(nf.count(), 0);
    }

    #[test]
    fn l0_bound_on_assignments() {
        for seed in 0..10 {
            let s = tiny_scenario(5, 8, seed);
            let v = random_beamformer(&s, seed + 100, &[0]);
            let n = backhaul_assignment(&v, &s.cache, &s.grouping);
            let (_, blocks) = support_sets(&v);
            assert!(n.count() <= blocks.len());
        }
    }

    #[test]
    fn load_sum_and_capacity_comparison() {
        let s = tiny_scenario(0, 6, 10);
        let vz = LayeredBeamformer::zeros(s.n_bs(), s.n_groups(), s.ants(), s.eps_supp);
        let nz = backhaul_assignment(&vz, &s.cache, &s.grouping);
        assert!(backhaul_load(&nz, &s.rates_bps).iter().all(|&l| l == 0.0));

        // Two 20 Mbps groups on one BS exceed a 30 Mbps cap.
        let rates = vec![20e6, 20e6];
        let n = BackhaulAssignment {
            n_bs: 1,
            n_groups: 2,
            bits: vec![true, true],
        };
        let load = backhaul_load(&n, &rates);
        assert!((load[0] - 40e6).abs() < 1e-6);
        let mut p = pico_params();
        p.c_bh_bps = 30e6;
        assert!(backhaul_power(load[0], &p).is_err());
        let single = BackhaulAssignment {
            n_bs: 1,
            n_groups: 2,
            bits: vec![true, false],
        };
        assert!((backhaul_load(&single, &rates)[0] - 20e6).abs() < 1e-6);
    }

    #[test]
    fn network_power_components_and_identity() {
        // Zero beamformer: p = 0 and p̃ is the sleep floor.
        let s = tiny_scenario(100, 4, 11);
        let vz = LayeredBeamformer::zeros(s.n_bs(), s.n_groups(), s.ants(), s.eps_supp);
        let b = network_power(&vz, &s);
        assert_eq!(b.p_w, 0.0);
        let sleep: f64 = s.power.iter().map(|p| p.p_sleep_bs_w + p.p_sleep_bh_w).sum();
        assert!((b.p_tilde_w - sleep).abs() < 1e-12);

        // One active BS at 0.5 W, everything cached: p = 4·0.5 + P_D_1.
        let mut v1 = vz.clone();
        v1.block_mut(0, 0)[0] = Complex64::new(0.5f64.sqrt(), 0.0);
        let b1 = network_power(&v1, &s);
        assert!((b1.p_w - (2.0 + 5.6)).abs() < 1e-9, "p = {}", b1.p_w);
        assert_eq!(b1.n_active_bs, 1);
        assert_eq!(b1.n_assignments, 0);

        // p̃ - p is the same constant for any beamformer.
        for seed in 0..5 {
            let v = random_beamformer(&s, seed, &[seed as usize % 7]);
            let bk = network_power(&v, &s);
            assert!((bk.p_tilde_w - bk.p_w - sleep).abs() < 1e-9);
            assert!(bk.transmit_w >= 0.0 && bk.backhaul_traffic_w >= 0.0 && bk.relative_w >= 0.0);
        }
    }

    #[test]
    fn backhaul_indicator_forms_agree() {
        // Σ β(1-c)·I(block)·I(bs) equals Σ β(1-c)·I(block): block activity
        // already implies BS activity.
        for seed in 0..10 {
            let s = tiny_scenario(5, 8, seed);
            let v = random_beamformer(&s, seed + 50, &[2]);
            let (bs, blocks) = support_sets(&v);
            let mut with_bs_factor = 0.0;
            let mut block_only = 0.0;
            for j in 0..s.n_bs() {
                for m in 0..s.n_groups() {
                    let coeff = s.beta(j, m) * s.uncached(j, m);
                    if blocks.contains(&(j, m)) {
                        block_only += coeff;
                        if bs.contains(&j) {
                            with_bs_factor += coeff;
                        }
                    }
                }
            }
            assert_eq!(with_bs_factor, block_only);
        }
    }

    #[test]
    fn cache_growth_never_increases_backhaul_power() {
        for seed in 0..5 {
            let v_seed = seed + 400;
            let small = tiny_scenario(5, 8, seed);
            let big = tiny_scenario(30, 8, seed); // same seed: identical grouping
            let v = random_beamformer(&small, v_seed, &[]);
            let b_small = network_power(&v, &small);
            let b_big = network_power(&v, &big);
            assert!(b_big.backhaul_traffic_w <= b_small.backhaul_traffic_w + 1e-12);
        }
    }

    #[test]
    fn constraint_report_flags() {
        let s = tiny_scenario(10, 4, 12);
        let vz = LayeredBeamformer::zeros(s.n_bs(), s.n_groups(), s.ants(), s.eps_supp);
        let r = check_constraints(&vz, &s);
        assert!(!r.qos_ok);
        assert!(r.power_ok && r.backhaul_ok);

        // Blow through the 1 W per-BS cap.
        let mut vbig = random_beamformer(&s, 13, &[]);
        vbig.scale(100.0);
        let r2 = check_constraints(&vbig, &s);
        assert!(!r2.power_ok);
    }
}
