//! Stable seed derivation.
//!
//! Sweeps must be reorder-invariant and resumable, so per-trial seeds are a
//! pure function of (base seed, axis point, trial index) built on a
//! splitmix64 chain. Nothing here depends on `std` hashers, whose output may
//! change between releases.

#[derive(Debug, Clone, Copy)]
pub struct SeedMixer(u64);

impl SeedMixer {
    pub fn new(base: u64) -> Self {
        Self(splitmix(base ^ 0x9e37_79b9_7f4a_7c15))
    }

    pub fn mix_u64(mut self, v: u64) -> Self {
        self.0 = splitmix(self.0 ^ splitmix(v));
        self
    }

    /// Mix a float through its bit pattern (normalizing -0.0 to 0.0).
    pub fn mix_f64(self, v: f64) -> Self {
        let v = if v == 0.0 { 0.0 } else { v };
        self.mix_u64(v.to_bits())
    }

    pub fn finish(self) -> u64 {
        splitmix(self.0)
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
