//! Reweighting state for the sparsity-inducing surrogates.
//!
//! The weights are inversely proportional to the transmit power of the
//! group they watch: `ω̃_j = 1/(‖ṽ_j‖² + τ)` at the BS layer and
//! `ω_jm = 1/(‖v_jm‖² + τ)` at the data-assignment layer. `τ > 0` keeps a
//! zeroed block from being locked out of the next iterate.

use serde::Serialize;

use crate::netgen::Scenario;
use crate::power::LayeredBeamformer;

#[derive(Debug, Clone, Serialize)]
pub struct Weights {
    pub tau: f64,
    /// `ω̃_j`, per BS (1/W).
    pub bs: Vec<f64>,
    /// `ω_jm`, row-major `[bs][group]` (1/W).
    pub block: Vec<f64>,
    n_groups: usize,
}

impl Weights {
    pub fn from_beamformer(v: &LayeredBeamformer, tau: f64) -> Self {
        assert!(tau > 0.0);
        let bs = (0..v.n_bs)
            .map(|j| 1.0 / (v.bs_transmit_power(j) + tau))
            .collect();
        let mut block = Vec::with_capacity(v.n_bs * v.n_groups);
        for j in 0..v.n_bs {
            for m in 0..v.n_groups {
                block.push(1.0 / (v.block_power(j, m) + tau));
            }
        }
        Self {
            tau,
            bs,
            block,
            n_groups: v.n_groups,
        }
    }

    /// Loose initial weights for the relaxation-based initialization, chosen
    /// so that any point satisfying the exact backhaul capacity also
    /// satisfies the weighted surrogate: `ω_jm·‖v_jm‖² < 1` whenever
    /// `‖v_jm‖² ≤ P_j`.
    pub fn initial_loose(scenario: &Scenario, tau: f64) -> Self {
        let n_groups = scenario.n_groups();
        let bs: Vec<f64> = scenario
            .power
            .iter()
            .map(|p| 1.0 / (p.p_tx_max_w + tau))
            .collect();
        let mut block = Vec::with_capacity(scenario.n_bs() * n_groups);
        for j in 0..scenario.n_bs() {
            for _ in 0..n_groups {
                block.push(1.0 / (scenario.power[j].p_tx_max_w + tau));
            }
        }
        Self {
            tau,
            bs,
            block,
            n_groups,
        }
    }

    pub fn block_weight(&self, bs: usize, group: usize) -> f64 {
        self.block[bs * self.n_groups + group]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn inverse_power_rule() {
        let mut v = LayeredBeamformer::zeros(2, 2, 2, 1e-4);
        v.block_mut(0, 0)[0] = Complex64::new(0.3, 0.4); // power 0.25
        let w = Weights::from_beamformer(&v, 1e-5);
        assert!((w.block_weight(0, 0) - 1.0 / 0.25001).abs() < 1e-9);
        assert!((w.block_weight(1, 1) - 1e5).abs() < 1e-6);
        assert!((w.bs[0] - 1.0 / 0.25001).abs() < 1e-9);
        assert!(w.bs.iter().all(|&x| x > 0.0));
    }
}
