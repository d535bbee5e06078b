//! Content popularity, multicast grouping and cache placement.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::NetgenError;

/// File catalog with a Zipf popularity profile. Files are indexed from 0 in
/// descending popularity order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContentCatalog {
    pub n_files: usize,
    pub zipf_exponent: f64,
    pub popularity: Vec<f64>,
}

impl ContentCatalog {
    pub fn new(n_files: usize, zipf_exponent: f64) -> Result<Self, NetgenError> {
        Ok(Self {
            n_files,
            zipf_exponent,
            popularity: zipf_popularity(n_files, zipf_exponent)?,
        })
    }
}

/// `p(f) ∝ (f+1)^(-γ)`, normalized.
pub fn zipf_popularity(n_files: usize, exponent: f64) -> Result<Vec<f64>, NetgenError> {
    if n_files < 1 {
        return Err(NetgenError::InvalidConfig("catalog needs a file".into()));
    }
    if exponent < 0.0 {
        return Err(NetgenError::InvalidConfig(
            "Zipf exponent must be nonnegative".into(),
        ));
    }
    let raw: Vec<f64> = (1..=n_files).map(|f| (f as f64).powf(-exponent)).collect();
    let total: f64 = raw.iter().sum();
    Ok(raw.into_iter().map(|v| v / total).collect())
}

/// Users partitioned by requested file. Groups are ordered by ascending file
/// index; members keep ascending user order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grouping {
    pub members: Vec<Vec<usize>>,
    pub requested_file: Vec<usize>,
    pub target_sinr: Vec<f64>,
}

impl Grouping {
    pub fn n_groups(&self) -> usize {
        self.members.len()
    }

    /// Group index of a user.
    pub fn group_of(&self, user: usize) -> usize {
        self.members
            .iter()
            .position(|g| g.contains(&user))
            .expect("user belongs to a group")
    }
}

/// Deterministic core of the grouping: users with equal requests share a
/// group, all groups get the same SINR target.
pub fn group_users(requests: &[usize], sinr_target_linear: f64) -> Grouping {
    let mut files: Vec<usize> = requests.to_vec();
    files.sort_unstable();
    files.dedup();
    let members: Vec<Vec<usize>> = files
        .iter()
        .map(|&f| {
            requests
                .iter()
                .enumerate()
                .filter(|(_, &r)| r == f)
                .map(|(u, _)| u)
                .collect()
        })
        .collect();
    let n = files.len();
    Grouping {
        members,
        requested_file: files,
        target_sinr: vec![sinr_target_linear; n],
    }
}

pub fn sample_requests_and_group(
    catalog: &ContentCatalog,
    n_users: usize,
    sinr_target_linear: f64,
    seed: u64,
) -> Result<Grouping, NetgenError> {
    if n_users < 1 {
        return Err(NetgenError::InvalidConfig("need at least one user".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let requests: Vec<usize> = (0..n_users)
        .map(|_| sample_index(&catalog.popularity, &mut rng))
        .collect();
    Ok(group_users(&requests, sinr_target_linear))
}

fn sample_index(weights: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    let mut last_positive = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            last_positive = i;
            u -= w;
            if u <= 0.0 {
                return i;
            }
        }
    }
    // Rounding pushed u past the cumulative sum; return the last candidate
    // that actually had mass.
    last_positive
}

/// Binary cache placement, `N_F × N_B`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheMatrix {
    pub n_files: usize,
    pub n_bs: usize,
    pub cache_size: usize,
    /// Row-major `[file][bs]`.
    bits: Vec<bool>,
}

impl CacheMatrix {
    fn empty(n_files: usize, n_bs: usize, cache_size: usize) -> Self {
        Self {
            n_files,
            n_bs,
            cache_size,
            bits: vec![false; n_files * n_bs],
        }
    }

    pub fn cached(&self, file: usize, bs: usize) -> bool {
        self.bits[file * self.n_bs + bs]
    }

    fn set(&mut self, file: usize, bs: usize) {
        self.bits[file * self.n_bs + bs] = true;
    }

    pub fn files_at(&self, bs: usize) -> Vec<usize> {
        (0..self.n_files).filter(|&f| self.cached(f, bs)).collect()
    }
}

/// Most popular caching: every BS stores the top `cache_size` files.
pub fn cache_mpc(catalog: &ContentCatalog, n_bs: usize, cache_size: usize) -> CacheMatrix {
    let y = cache_size.min(catalog.n_files);
    let mut c = CacheMatrix::empty(catalog.n_files, n_bs, cache_size);
    for f in 0..y {
        for j in 0..n_bs {
            c.set(f, j);
        }
    }
    c
}

/// Probabilistic caching: each BS independently fills its cache by
/// popularity-weighted sampling without replacement until `cache_size`
/// distinct files are stored.
pub fn cache_probc(
    catalog: &ContentCatalog,
    n_bs: usize,
    cache_size: usize,
    seed: u64,
) -> CacheMatrix {
    let y = cache_size.min(catalog.n_files);
    let mut c = CacheMatrix::empty(catalog.n_files, n_bs, cache_size);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for j in 0..n_bs {
        let mut weights = catalog.popularity.clone();
        for _ in 0..y {
            let total: f64 = weights.iter().sum();
            let pick = if total > 0.0 {
                sample_index(&weights, &mut rng)
            } else {
                // All remaining weight is zero; take the lowest-index
                // untaken file.
                (0..catalog.n_files)
                    .find(|&f| !c.cached(f, j))
                    .expect("cache smaller than catalog")
            };
            weights[pick] = 0.0;
            c.set(pick, j);
        }
    }
    c
}
