//! Scenario assembly and serialization.
//!
//! A [`Scenario`] is the immutable bundle everything downstream works on:
//! topology, channels, catalog, grouping, cache and power parameters, plus
//! derived quantities (group rates, backhaul power coefficients, support
//! threshold). Defaults follow the standard dense-network evaluation setup:
//! 7 pico BSs with 2 antennas in 500 m hexagonal cells, 15 users, a 100-file
//! catalog with Zipf exponent 1.2, 10-file caches, 1 W transmit budget,
//! microwave backhaul at 500 Mbps and 1e-7 J/bit.

use serde::{Deserialize, Serialize};

use super::channel::{gen_channels, ChannelMatrix, ChannelParams};
use super::content::{
    cache_mpc, cache_probc, sample_requests_and_group, CacheMatrix, ContentCatalog, Grouping,
};
use super::topology::{gen_topology, Topology, TopologyConfig};
use super::NetgenError;
use crate::power::{group_rate, BsPowerParams};
use crate::seed::SeedMixer;
use crate::units::db_to_linear;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CachingStrategy {
    /// Most popular caching: every BS stores the top-Y files.
    Mpc,
    /// Probabilistic caching: popularity-weighted fill per BS.
    Probc,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub n_bs: usize,
    pub antennas_per_bs: usize,
    pub cell_radius_m: f64,
    pub exclusion_radius_m: f64,
    pub n_users: usize,

    pub antenna_gain_dbi: f64,
    pub pathloss_intercept_db: f64,
    pub pathloss_slope_db_per_decade: f64,
    pub shadowing_sigma_db: f64,
    pub noise_psd_dbm_per_hz: f64,
    pub bandwidth_hz: f64,

    pub n_files: usize,
    pub zipf_exponent: f64,
    pub cache_size: usize,
    pub caching: CachingStrategy,

    pub sinr_target_db: f64,

    pub p_tx_max_w: f64,
    pub delta: f64,
    pub bs_active_base_w: f64,
    pub bs_sleep_w: f64,
    pub bh_active_w: f64,
    pub bh_sleep_w: f64,
    pub e_bh_j_per_bit: f64,
    pub c_bh_bps: f64,
    /// Relative power grows by this step per BS index: `P_j^D = P_1^D +
    /// (j-1)·step`, realized by raising the active-mode BS power.
    pub relative_power_step_w: f64,

    /// User positions are redrawn every trial by default. Set this to pin
    /// the topology across trials while channels and requests resample.
    pub fixed_topology_seed: Option<u64>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            n_bs: 7,
            antennas_per_bs: 2,
            cell_radius_m: 500.0,
            exclusion_radius_m: 50.0,
            n_users: 15,
            antenna_gain_dbi: 10.0,
            pathloss_intercept_db: 148.1,
            pathloss_slope_db_per_decade: 37.6,
            shadowing_sigma_db: 8.0,
            noise_psd_dbm_per_hz: -172.0,
            bandwidth_hz: 1e7,
            n_files: 100,
            zipf_exponent: 1.2,
            cache_size: 10,
            caching: CachingStrategy::Mpc,
            sinr_target_db: 5.0,
            p_tx_max_w: 1.0,
            delta: 4.0,
            bs_active_base_w: 6.8,
            bs_sleep_w: 4.3,
            bh_active_w: 3.85,
            bh_sleep_w: 0.75,
            e_bh_j_per_bit: 1e-7,
            c_bh_bps: 500e6,
            relative_power_step_w: 1.0,
            fixed_topology_seed: None,
        }
    }
}

impl ScenarioConfig {
    pub fn topology_config(&self) -> TopologyConfig {
        TopologyConfig {
            n_bs: self.n_bs,
            antennas_per_bs: self.antennas_per_bs,
            cell_radius_m: self.cell_radius_m,
            exclusion_radius_m: self.exclusion_radius_m,
            n_users: self.n_users,
        }
    }

    pub fn channel_params(&self) -> ChannelParams {
        ChannelParams {
            antenna_gain_dbi: self.antenna_gain_dbi,
            pathloss_intercept_db: self.pathloss_intercept_db,
            pathloss_slope_db_per_decade: self.pathloss_slope_db_per_decade,
            shadowing_sigma_db: self.shadowing_sigma_db,
            noise_psd_dbm_per_hz: self.noise_psd_dbm_per_hz,
            bandwidth_hz: self.bandwidth_hz,
        }
    }

    pub fn bs_power_params(&self, bs: usize) -> BsPowerParams {
        BsPowerParams {
            p_active_bs_w: self.bs_active_base_w + bs as f64 * self.relative_power_step_w,
            p_sleep_bs_w: self.bs_sleep_w,
            delta: self.delta,
            p_active_bh_w: self.bh_active_w,
            p_sleep_bh_w: self.bh_sleep_w,
            e_bh_j_per_bit: self.e_bh_j_per_bit,
            c_bh_bps: self.c_bh_bps,
            p_tx_max_w: self.p_tx_max_w,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Scenario {
    pub topology: Topology,
    pub channels: ChannelMatrix,
    pub catalog: ContentCatalog,
    pub grouping: Grouping,
    pub cache: CacheMatrix,
    pub power: Vec<BsPowerParams>,
    /// Receiver noise power over the signal bandwidth, W.
    pub noise_w: f64,
    pub bandwidth_hz: f64,
    /// Group data rates `R_m`, bps.
    pub rates_bps: Vec<f64>,
    /// Backhaul power coefficients `β_jm = E_j·R_m`, row-major `[bs][group]`.
    beta_w: Vec<f64>,
    /// Support threshold on block norms.
    pub eps_supp: f64,
    pub seed: u64,
    pub config: ScenarioConfig,
}

impl Scenario {
    pub fn generate(config: &ScenarioConfig, seed: u64) -> Result<Self, NetgenError> {
        let topo_seed = config
            .fixed_topology_seed
            .unwrap_or_else(|| SeedMixer::new(seed).mix_u64(1).finish());
        let chan_seed = SeedMixer::new(seed).mix_u64(2).finish();
        let req_seed = SeedMixer::new(seed).mix_u64(3).finish();
        let cache_seed = SeedMixer::new(seed).mix_u64(4).finish();

        let topology = gen_topology(&config.topology_config(), topo_seed)?;
        let params = config.channel_params();
        let channels = gen_channels(&topology, &params, chan_seed)?;
        let catalog = ContentCatalog::new(config.n_files, config.zipf_exponent)?;
        let grouping = sample_requests_and_group(
            &catalog,
            config.n_users,
            db_to_linear(config.sinr_target_db),
            req_seed,
        )?;
        let cache = match config.caching {
            CachingStrategy::Mpc => cache_mpc(&catalog, config.n_bs, config.cache_size),
            CachingStrategy::Probc => {
                cache_probc(&catalog, config.n_bs, config.cache_size, cache_seed)
            }
        };
        let power: Vec<BsPowerParams> = (0..config.n_bs).map(|j| config.bs_power_params(j)).collect();

        let rates_bps: Vec<f64> = grouping
            .target_sinr
            .iter()
            .map(|&g| group_rate(g, config.bandwidth_hz))
            .collect();
        let mut beta_w = vec![0.0; config.n_bs * grouping.n_groups()];
        for j in 0..config.n_bs {
            for (m, &r) in rates_bps.iter().enumerate() {
                beta_w[j * grouping.n_groups() + m] = power[j].e_bh_j_per_bit * r;
            }
        }
        let eps_supp = 1e-4
            * power
                .iter()
                .map(|p| p.p_tx_max_w)
                .fold(0.0f64, f64::max)
                .sqrt();

        Ok(Self {
            noise_w: params.noise_power_w(),
            bandwidth_hz: config.bandwidth_hz,
            topology,
            channels,
            catalog,
            grouping,
            cache,
            power,
            rates_bps,
            beta_w,
            eps_supp,
            seed,
            config: config.clone(),
        })
    }

    pub fn n_bs(&self) -> usize {
        self.topology.bs_xy.len()
    }

    pub fn n_users(&self) -> usize {
        self.topology.user_xy.len()
    }

    pub fn n_groups(&self) -> usize {
        self.grouping.n_groups()
    }

    pub fn ants(&self) -> usize {
        self.topology.antennas_per_bs
    }

    /// `β_jm = E_j·R_m`, the backhaul power cost of serving group `m`
    /// from BS `j` over the backhaul link.
    pub fn beta(&self, bs: usize, group: usize) -> f64 {
        self.beta_w[bs * self.n_groups() + group]
    }

    /// `1 - c_{q_m, j}`: one when the content group `m` wants is absent
    /// from BS `j`'s cache.
    pub fn uncached(&self, bs: usize, group: usize) -> f64 {
        if self.cache.cached(self.grouping.requested_file[group], bs) {
            0.0
        } else {
            1.0
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_reference_setup() {
        let c = ScenarioConfig::default();
        assert_eq!((c.n_bs, c.antennas_per_bs, c.n_users, c.n_files), (7, 2, 15, 100));
        assert_eq!(c.cache_size, 10);
        assert!((c.zipf_exponent - 1.2).abs() < 1e-15);
        assert!((c.c_bh_bps - 500e6).abs() < 1e-3);
        // P_1^D = (6.8-4.3) + (3.85-0.75) = 5.6 W, increasing by 1 W per BS.
        for j in 0..7 {
            let p = c.bs_power_params(j).relative_power_w();
            assert!((p - (5.6 + j as f64)).abs() < 1e-12, "P_D at BS {j} is {p}");
        }
    }

    #[test]
    fn generate_and_round_trip_json() {
        let mut cfg = ScenarioConfig::default();
        cfg.n_users = 4;
        let s = Scenario::generate(&cfg, 123).unwrap();
        assert_eq!(s.channels.entries.len(), 4 * 7 * 2);
        assert!(s.n_groups() >= 1 && s.n_groups() <= 4);
        let json = s.to_json();
        let back = Scenario::from_json(&json).unwrap();
        assert_eq!(back.channels, s.channels);
        assert_eq!(back.grouping, s.grouping);
        assert_eq!(back.cache, s.cache);
        assert_eq!(back.seed, s.seed);
    }

    #[test]
    fn trials_resample_everything_unless_topology_pinned() {
        let cfg = ScenarioConfig {
            n_users: 3,
            ..Default::default()
        };
        let a = Scenario::generate(&cfg, 1).unwrap();
        let b = Scenario::generate(&cfg, 2).unwrap();
        assert_ne!(a.topology.user_xy, b.topology.user_xy);

        let pinned = ScenarioConfig {
            n_users: 3,
            fixed_topology_seed: Some(77),
            ..Default::default()
        };
        let c = Scenario::generate(&pinned, 1).unwrap();
        let d = Scenario::generate(&pinned, 2).unwrap();
        assert_eq!(c.topology.user_xy, d.topology.user_xy);
        assert_ne!(c.channels, d.channels);
    }

    #[test]
    fn beta_is_energy_times_rate() {
        let cfg = ScenarioConfig {
            n_users: 5,
            ..Default::default()
        };
        let s = Scenario::generate(&cfg, 5).unwrap();
        for j in 0..s.n_bs() {
            for m in 0..s.n_groups() {
                let expect = s.power[j].e_bh_j_per_bit * s.rates_bps[m];
                assert!((s.beta(j, m) - expect).abs() < 1e-12);
            }
        }
    }
}
