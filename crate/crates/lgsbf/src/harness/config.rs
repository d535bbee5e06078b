//! Experiment configuration.
//!
//! A config is a scenario parameter block (every field optional, defaults
//! matching the reference setup) plus sweep axes, trial count, seed and the
//! algorithm list. Exactly one sweep axis may hold more than one value
//! unless `cross` explicitly requests the full cross-product.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::algo::Algorithm;
use crate::netgen::ScenarioConfig;
use crate::seed::SeedMixer;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(String),
    #[error("runtime failure: {0}")]
    Runtime(String),
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepAxes {
    /// Target SINR points, dB. Empty: use the scenario value.
    pub sinr_db: Vec<f64>,
    pub cache_size: Vec<usize>,
    pub n_users: Vec<usize>,
    /// Backhaul energy coefficient points, J/bit.
    pub e_bh: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(flatten)]
    pub scenario: ScenarioConfig,
    pub sweep: SweepAxes,
    /// Allow more than one non-singleton axis (full cross-product).
    pub cross: bool,
    pub trials: usize,
    pub base_seed: u64,
    pub algorithms: Vec<Algorithm>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            scenario: ScenarioConfig::default(),
            sweep: SweepAxes::default(),
            cross: false,
            trials: 1,
            base_seed: 1,
            algorithms: Algorithm::ALL.to_vec(),
        }
    }
}

/// One point of the sweep, with every axis value materialized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AxisPoint {
    pub sinr_db: f64,
    pub cache_size: usize,
    pub n_users: usize,
    pub e_bh: f64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.trials < 1 {
            return Err(HarnessError::Config("trials must be at least 1".into()));
        }
        if self.algorithms.is_empty() {
            return Err(HarnessError::Config("need at least one algorithm".into()));
        }
        let non_singleton = [
            ("sweep.sinr_db", self.sweep.sinr_db.len()),
            ("sweep.cache_size", self.sweep.cache_size.len()),
            ("sweep.n_users", self.sweep.n_users.len()),
            ("sweep.e_bh", self.sweep.e_bh.len()),
        ];
        let wide: Vec<&str> = non_singleton
            .iter()
            .filter(|(_, l)| *l > 1)
            .map(|(n, _)| *n)
            .collect();
        if wide.len() > 1 && !self.cross {
            return Err(HarnessError::Config(format!(
                "multiple sweep axes ({}) need the explicit cross flag",
                wide.join(", ")
            )));
        }
        Ok(())
    }

    /// Materialize the sweep grid (cross-product over the axes; singleton
    /// axes come from the scenario block).
    pub fn axis_points(&self) -> Vec<AxisPoint> {
        let one_f = |v: &Vec<f64>, d: f64| if v.is_empty() { vec![d] } else { v.clone() };
        let one_u = |v: &Vec<usize>, d: usize| if v.is_empty() { vec![d] } else { v.clone() };
        let sinrs = one_f(&self.sweep.sinr_db, self.scenario.sinr_target_db);
        let caches = one_u(&self.sweep.cache_size, self.scenario.cache_size);
        let users = one_u(&self.sweep.n_users, self.scenario.n_users);
        let ebhs = one_f(&self.sweep.e_bh, self.scenario.e_bh_j_per_bit);
        let mut out = Vec::new();
        for &sinr_db in &sinrs {
            for &cache_size in &caches {
                for &n_users in &users {
                    for &e_bh in &ebhs {
                        out.push(AxisPoint {
                            sinr_db,
                            cache_size,
                            n_users,
                            e_bh,
                        });
                    }
                }
            }
        }
        out
    }

    /// Scenario parameters at one grid point.
    pub fn scenario_at(&self, axis: &AxisPoint) -> ScenarioConfig {
        let mut s = self.scenario.clone();
        s.sinr_target_db = axis.sinr_db;
        s.cache_size = axis.cache_size;
        s.n_users = axis.n_users;
        s.e_bh_j_per_bit = axis.e_bh;
        s
    }

    /// Stable per-trial seed: a pure function of (base seed, axis, trial),
    /// so sweeps are reorder-invariant and resumable.
    pub fn trial_seed(&self, axis: &AxisPoint, trial: usize) -> u64 {
        SeedMixer::new(self.base_seed)
            .mix_f64(axis.sinr_db)
            .mix_u64(axis.cache_size as u64)
            .mix_u64(axis.n_users as u64)
            .mix_f64(axis.e_bh)
            .mix_u64(trial as u64)
            .finish()
    }
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, HarnessError> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, HarnessError> {
    let cfg: ExperimentConfig = serde_json::from_str(text)
        .map_err(|e| HarnessError::Config(format!("schema violation: {e}")))?;
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_gives_reference_defaults() {
        let cfg = parse_config("{}").unwrap();
        assert_eq!(cfg.scenario.n_bs, 7);
        assert_eq!(cfg.scenario.n_users, 15);
        assert_eq!(cfg.scenario.n_files, 100);
        assert!((cfg.scenario.zipf_exponent - 1.2).abs() < 1e-12);
        assert!((cfg.scenario.pathloss_intercept_db - 148.1).abs() < 1e-12);
        assert!((cfg.scenario.noise_psd_dbm_per_hz + 172.0).abs() < 1e-12);
        assert!((cfg.scenario.e_bh_j_per_bit - 1e-7).abs() < 1e-20);
        assert_eq!(cfg.axis_points().len(), 1);
    }

    #[test]
    fn cache_sweep_config() {
        let cfg = parse_config(r#"{"sweep": {"cache_size": [0, 2, 4]}, "trials": 3}"#).unwrap();
        let pts = cfg.axis_points();
        assert_eq!(pts.len(), 3);
        assert_eq!(pts[1].cache_size, 2);
        assert_eq!(pts[1].n_users, 15);
    }

    #[test]
    fn two_axes_without_cross_rejected() {
        let err = parse_config(r#"{"sweep": {"cache_size": [0, 2], "sinr_db": [0.0, 5.0]}}"#)
            .unwrap_err();
        assert!(err.to_string().contains("cross"));
        // And accepted with the flag.
        let ok = parse_config(
            r#"{"sweep": {"cache_size": [0, 2], "sinr_db": [0.0, 5.0]}, "cross": true}"#,
        )
        .unwrap();
        assert_eq!(ok.axis_points().len(), 4);
    }

    #[test]
    fn unknown_keys_are_schema_errors() {
        let err = parse_config(r#"{"trails": 5}"#).unwrap_err();
        assert!(err.to_string().contains("trails"), "{err}");
    }

    #[test]
    fn trial_seed_is_reorder_invariant() {
        let cfg = parse_config(r#"{"sweep": {"sinr_db": [0.0, 5.0]}}"#).unwrap();
        let pts = cfg.axis_points();
        let s = cfg.trial_seed(&pts[1], 7);
        let cfg2 = parse_config(r#"{"sweep": {"sinr_db": [5.0, 0.0, 10.0]}}"#).unwrap();
        let pts2 = cfg2.axis_points();
        assert_eq!(s, cfg2.trial_seed(&pts2[0], 7));
    }
}
