//! Reproducible random scenario generation: topology, channels, content
//! requests, multicast groups and cache placement.

mod channel;
mod content;
mod scenario;
mod topology;

pub use channel::{gen_channels, ChannelMatrix, ChannelParams};
pub use content::{
    cache_mpc, cache_probc, group_users, sample_requests_and_group, zipf_popularity, CacheMatrix,
    ContentCatalog, Grouping,
};
pub use scenario::{CachingStrategy, Scenario, ScenarioConfig};
pub use topology::{gen_topology, Topology, TopologyConfig};

#[derive(Debug, thiserror::Error)]
pub enum NetgenError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("nonpositive distance between user {user} and BS {bs}")]
    NonpositiveDistance { user: usize, bs: usize },
}

/// Serde adapter storing complex vectors as interleaved `[re, im, ...]`
/// arrays, the on-disk representation for channels and beamformers.
pub mod complex_interleaved {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
        let mut flat = Vec::with_capacity(v.len() * 2);
        for z in v {
            flat.push(z.re);
            flat.push(z.im);
        }
        flat.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex64>, D::Error> {
        let flat = Vec::<f64>::deserialize(d)?;
        if flat.len() % 2 != 0 {
            return Err(serde::de::Error::custom(
                "interleaved complex array has odd length",
            ));
        }
        Ok(flat
            .chunks_exact(2)
            .map(|c| Complex64::new(c[0], c[1]))
            .collect())
    }
}
