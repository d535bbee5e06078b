//! Fading channel generation.
//!
//! Each user-BS link is `h = 10^(-L(d)/20) · √(φ·s) · g`, with `L(d)` the
//! distance path loss in dB, `φ` the linear antenna power gain, `s` a
//! log-normal shadowing factor and `g` circularly-symmetric complex Gaussian
//! small-scale fading with unit variance per antenna.

use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::topology::Topology;
use super::NetgenError;
use crate::units::{attenuation_db_to_amplitude, db_to_linear, dbm_to_watts};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ChannelParams {
    pub antenna_gain_dbi: f64,
    /// Path loss at 1 km, dB.
    pub pathloss_intercept_db: f64,
    /// Path loss slope, dB per decade of distance.
    pub pathloss_slope_db_per_decade: f64,
    pub shadowing_sigma_db: f64,
    pub noise_psd_dbm_per_hz: f64,
    pub bandwidth_hz: f64,
}

impl ChannelParams {
    pub fn pathloss_db(&self, distance_m: f64) -> f64 {
        self.pathloss_intercept_db + self.pathloss_slope_db_per_decade * (distance_m / 1000.0).log10()
    }

    /// Noise power over the configured bandwidth, watts.
    pub fn noise_power_w(&self) -> f64 {
        dbm_to_watts(self.noise_psd_dbm_per_hz) * self.bandwidth_hz
    }
}

/// Complex channel gains for every (user, BS) pair, `ants` entries each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelMatrix {
    pub n_users: usize,
    pub n_bs: usize,
    pub ants: usize,
    /// Layout `[user][bs][antenna]`, serialized as interleaved re/im pairs.
    #[serde(with = "crate::netgen::complex_interleaved")]
    pub entries: Vec<Complex64>,
}

impl ChannelMatrix {
    pub fn link(&self, user: usize, bs: usize) -> &[Complex64] {
        let base = (user * self.n_bs + bs) * self.ants;
        &self.entries[base..base + self.ants]
    }

    /// Stacked channel from all BSs to one user (dimension `n_bs·ants`).
    pub fn stacked(&self, user: usize) -> Vec<Complex64> {
        let base = user * self.n_bs * self.ants;
        self.entries[base..base + self.n_bs * self.ants].to_vec()
    }

    /// `‖h_kj‖²` for one link.
    pub fn link_gain(&self, user: usize, bs: usize) -> f64 {
        self.link(user, bs).iter().map(|z| z.norm_sqr()).sum()
    }
}

pub fn gen_channels(
    topology: &Topology,
    params: &ChannelParams,
    seed: u64,
) -> Result<ChannelMatrix, NetgenError> {
    let n_users = topology.user_xy.len();
    let n_bs = topology.bs_xy.len();
    let ants = topology.antennas_per_bs;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shadow = Normal::new(0.0, params.shadowing_sigma_db)
        .map_err(|e| NetgenError::InvalidConfig(format!("shadowing sigma: {e}")))?;
    let gauss = Normal::new(0.0, (0.5f64).sqrt()).expect("unit-variance complex normal");
    let gain_lin = db_to_linear(params.antenna_gain_dbi);

    let mut entries = Vec::with_capacity(n_users * n_bs * ants);
    for k in 0..n_users {
        for j in 0..n_bs {
            let d = topology.distance_m(k, j);
            if d <= 0.0 {
                return Err(NetgenError::NonpositiveDistance { user: k, bs: j });
            }
            let amp_pl = attenuation_db_to_amplitude(params.pathloss_db(d));
            let s = db_to_linear(shadow.sample(&mut rng));
            let amp = amp_pl * (gain_lin * s).sqrt();
            for _ in 0..ants {
                let g = Complex64::new(gauss.sample(&mut rng), gauss.sample(&mut rng));
                entries.push(g * amp);
            }
        }
    }
    Ok(ChannelMatrix {
        n_users,
        n_bs,
        ants,
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> ChannelParams {
        ChannelParams {
            antenna_gain_dbi: 10.0,
            pathloss_intercept_db: 148.1,
            pathloss_slope_db_per_decade: 37.6,
            shadowing_sigma_db: 8.0,
            noise_psd_dbm_per_hz: -172.0,
            bandwidth_hz: 1e7,
        }
    }

    #[test]
    fn pathloss_amplitude_at_one_km() {
        // 10^(-148.1/20) ≈ 3.936e-8, the amplitude factor with s = 1, φ = 1.
        let p = params();
        assert!((p.pathloss_db(1000.0) - 148.1).abs() < 1e-12);
        let amp = attenuation_db_to_amplitude(p.pathloss_db(1000.0));
        assert!((amp - 3.936e-8).abs() < 1e-11, "{amp}");
    }

    #[test]
    fn noise_power_at_table_defaults() {
        // -172 dBm/Hz over 10 MHz = 10^(-13.2) W.
        let n = params().noise_power_w();
        assert!((n - 10f64.powf(-13.2)).abs() < 1e-20, "{n}");
    }

    #[test]
    fn determinism_and_dimensions() {
        let topo = Topology {
            bs_xy: vec![[0.0, 0.0], [866.0, 0.0]],
            user_xy: vec![[100.0, 50.0], [300.0, -200.0], [500.0, 400.0]],
            cell_radius_m: 500.0,
            antennas_per_bs: 2,
        };
        let a = gen_channels(&topo, &params(), 7).unwrap();
        let b = gen_channels(&topo, &params(), 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.entries.len(), 3 * 2 * 2);
        assert!(a.entries.iter().all(|z| z.re.is_finite() && z.im.is_finite()));
    }

    #[test]
    fn small_scale_fading_second_moment() {
        // E[‖g‖²] = ants over many draws; strip path loss by placing the
        // user 1 km away and dividing the known deterministic amplitude out
        // is awkward with shadowing, so instead disable shadowing and gain.
        let topo = Topology {
            bs_xy: vec![[0.0, 0.0]],
            user_xy: vec![[1000.0, 0.0]],
            cell_radius_m: 500.0,
            antennas_per_bs: 2,
        };
        let mut p = params();
        p.shadowing_sigma_db = 0.0;
        p.antenna_gain_dbi = 0.0;
        let ants = 2;
        let amp2 = attenuation_db_to_amplitude(148.1).powi(2);
        let mut acc = 0.0;
        let n_draws = 10_000;
        for seed in 0..n_draws {
            let c = gen_channels(&topo, &p, seed as u64).unwrap();
            acc += c.link_gain(0, 0) / amp2;
        }
        let mean = acc / n_draws as f64;
        assert!(
            (mean - ants as f64).abs() / (ants as f64) < 0.05,
            "E‖g‖² = {mean}, expected {ants}"
        );
    }

    #[test]
    fn zero_distance_is_an_error() {
        let topo = Topology {
            bs_xy: vec![[0.0, 0.0]],
            user_xy: vec![[0.0, 0.0]],
            cell_radius_m: 500.0,
            antennas_per_bs: 2,
        };
        assert!(matches!(
            gen_channels(&topo, &params(), 0),
            Err(NetgenError::NonpositiveDistance { .. })
        ));
    }
}
