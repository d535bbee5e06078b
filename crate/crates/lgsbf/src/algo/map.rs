//! Mapping between the layered beamformer and the real solver vector.
//!
//! Only active (BS, group) blocks carry variables. The real vector is
//! group-major; each active block contributes `2·ants` coordinates laid out
//! `[Re v_jm; Im v_jm]`. Each multicast group forms one partition block, the
//! only coupling the quadratic forms ever have.

use std::collections::BTreeSet;

use conic_core::Partition;
use nalgebra::DVector;
use num_complex::Complex64;

use crate::netgen::Scenario;
use crate::power::LayeredBeamformer;

#[derive(Debug, Clone)]
pub struct ActiveMap {
    pub n_bs: usize,
    pub n_groups: usize,
    pub ants: usize,
    /// Active blocks in group-major order.
    pub blocks: Vec<(usize, usize)>,
    /// Offset of each active block in the real vector.
    offsets: Vec<usize>,
    /// Active blocks per group, for quick emptiness checks.
    per_group: Vec<Vec<usize>>,
}

impl ActiveMap {
    /// Build the map for all blocks outside `z_bs` and `z_da`.
    pub fn new(
        scenario: &Scenario,
        z_bs: &BTreeSet<usize>,
        z_da: &BTreeSet<(usize, usize)>,
    ) -> Self {
        let n_bs = scenario.n_bs();
        let n_groups = scenario.n_groups();
        let ants = scenario.ants();
        let mut blocks = Vec::new();
        let mut per_group = vec![Vec::new(); n_groups];
        for m in 0..n_groups {
            for j in 0..n_bs {
                if z_bs.contains(&j) || z_da.contains(&(j, m)) {
                    continue;
                }
                per_group[m].push(j);
                blocks.push((j, m));
            }
        }
        let offsets = (0..blocks.len()).map(|i| i * 2 * ants).collect();
        Self {
            n_bs,
            n_groups,
            ants,
            blocks,
            offsets,
            per_group,
        }
    }

    pub fn full(scenario: &Scenario) -> Self {
        Self::new(scenario, &BTreeSet::new(), &BTreeSet::new())
    }

    pub fn dim(&self) -> usize {
        self.blocks.len() * 2 * self.ants
    }

    /// One partition block per group; `extra` appends scalar blocks (the
    /// feasibility slack).
    pub fn partition(&self, extra: usize) -> Partition {
        let mut sizes: Vec<usize> = self
            .per_group
            .iter()
            .map(|g| g.len() * 2 * self.ants)
            .collect();
        for _ in 0..extra {
            sizes.push(1);
        }
        Partition::new(sizes)
    }

    /// Groups with no serving block left cannot meet a positive SINR target.
    pub fn unserved_groups(&self) -> Vec<usize> {
        (0..self.n_groups)
            .filter(|&m| self.per_group[m].is_empty())
            .collect()
    }

    pub fn active_bs_of_group(&self, m: usize) -> &[usize] {
        &self.per_group[m]
    }

    pub fn block_offset(&self, bs: usize, group: usize) -> Option<usize> {
        self.blocks
            .iter()
            .position(|&(j, m)| j == bs && m == group)
            .map(|i| self.offsets[i])
    }

    /// Global coordinate indices of one active block.
    pub fn block_coords(&self, idx: usize) -> std::ops::Range<usize> {
        self.offsets[idx]..self.offsets[idx] + 2 * self.ants
    }

    /// Extract the active coordinates of a beamformer.
    pub fn to_real(&self, v: &LayeredBeamformer) -> DVector<f64> {
        let mut x = DVector::zeros(self.dim());
        for (i, &(j, m)) in self.blocks.iter().enumerate() {
            let off = self.offsets[i];
            for (l, z) in v.block(j, m).iter().enumerate() {
                x[off + l] = z.re;
                x[off + self.ants + l] = z.im;
            }
        }
        x
    }

    /// Rebuild a full beamformer (zeros on inactive blocks).
    pub fn to_beamformer(&self, x: &DVector<f64>, eps_supp: f64) -> LayeredBeamformer {
        let mut v = LayeredBeamformer::zeros(self.n_bs, self.n_groups, self.ants, eps_supp);
        for (i, &(j, m)) in self.blocks.iter().enumerate() {
            let off = self.offsets[i];
            let blk = v.block_mut(j, m);
            for l in 0..self.ants {
                blk[l] = Complex64::new(x[off + l], x[off + self.ants + l]);
            }
        }
        v
    }
}
