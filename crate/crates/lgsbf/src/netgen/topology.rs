//! Hexagonal multicell layout and user placement.
//!
//! Base stations sit at the centers of pointy-top hexagonal cells arranged
//! in a spiral: BS 1 at the origin, BSs 2-7 on a ring of radius `√3·R` at
//! angles `60°·i`, further BSs on the next rings. Users are placed uniformly
//! over the union of the cells (cells have equal area, so a uniform cell
//! pick followed by a uniform draw inside the hexagon is uniform overall),
//! rejecting positions closer than the exclusion radius to any BS.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::NetgenError;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TopologyConfig {
    pub n_bs: usize,
    pub antennas_per_bs: usize,
    pub cell_radius_m: f64,
    pub exclusion_radius_m: f64,
    pub n_users: usize,
}

impl TopologyConfig {
    pub fn validate(&self) -> Result<(), NetgenError> {
        if self.n_bs < 1 || self.antennas_per_bs < 1 {
            return Err(NetgenError::InvalidConfig(
                "need at least one BS and one antenna".into(),
            ));
        }
        if !(self.exclusion_radius_m > 0.0 && self.exclusion_radius_m < self.cell_radius_m) {
            return Err(NetgenError::InvalidConfig(
                "exclusion radius must lie in (0, cell_radius)".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Topology {
    pub bs_xy: Vec<[f64; 2]>,
    pub user_xy: Vec<[f64; 2]>,
    pub cell_radius_m: f64,
    pub antennas_per_bs: usize,
}

impl Topology {
    pub fn distance_m(&self, user: usize, bs: usize) -> f64 {
        let u = self.user_xy[user];
        let b = self.bs_xy[bs];
        ((u[0] - b[0]).powi(2) + (u[1] - b[1]).powi(2)).sqrt()
    }
}

/// Axial hex coordinates to the plane, pointy-top cells of circumradius `r`.
fn axial_to_xy(q: i64, rr: i64, r: f64) -> [f64; 2] {
    let sqrt3 = 3f64.sqrt();
    [sqrt3 * r * (q as f64 + rr as f64 / 2.0), 1.5 * r * rr as f64]
}

/// Spiral enumeration of hex cell centers: origin, then rings outward. The
/// first ring comes out at angles 0°, 60°, ..., 300°.
fn spiral_centers(n: usize, r: f64) -> Vec<[f64; 2]> {
    let mut out = vec![[0.0, 0.0]];
    let dirs: [(i64, i64); 6] = [(-1, 1), (-1, 0), (0, -1), (1, -1), (1, 0), (0, 1)];
    let mut ring = 1i64;
    while out.len() < n {
        let (mut q, mut rr) = (ring, 0i64);
        for &(dq, dr) in &dirs {
            for _ in 0..ring {
                if out.len() >= n {
                    return out;
                }
                out.push(axial_to_xy(q, rr, r));
                q += dq;
                rr += dr;
            }
        }
        ring += 1;
    }
    out
}

/// Point-in-hexagon test for a pointy-top hexagon centered at the origin.
fn in_hexagon(x: f64, y: f64, r: f64) -> bool {
    let apothem = 3f64.sqrt() / 2.0 * r;
    let half = 0.5;
    let s32 = 3f64.sqrt() / 2.0;
    x.abs() <= apothem + 1e-12
        && (half * x + s32 * y).abs() <= apothem + 1e-12
        && (-half * x + s32 * y).abs() <= apothem + 1e-12
}

const MAX_PLACEMENT_ATTEMPTS: usize = 10_000;

pub fn gen_topology(cfg: &TopologyConfig, seed: u64) -> Result<Topology, NetgenError> {
    cfg.validate()?;
    let r = cfg.cell_radius_m;
    let bs_xy = spiral_centers(cfg.n_bs, r);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let apothem = 3f64.sqrt() / 2.0 * r;

    let mut user_xy = Vec::with_capacity(cfg.n_users);
    for user in 0..cfg.n_users {
        let mut placed = false;
        for _ in 0..MAX_PLACEMENT_ATTEMPTS {
            let cell = rng.random_range(0..cfg.n_bs);
            let lx = rng.random_range(-apothem..apothem);
            let ly = rng.random_range(-r..r);
            if !in_hexagon(lx, ly, r) {
                continue;
            }
            let x = bs_xy[cell][0] + lx;
            let y = bs_xy[cell][1] + ly;
            let clear = bs_xy
                .iter()
                .all(|b| (x - b[0]).hypot(y - b[1]) >= cfg.exclusion_radius_m);
            if clear {
                user_xy.push([x, y]);
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(NetgenError::InvalidConfig(format!(
                "could not place user {user} outside the exclusion zones after {MAX_PLACEMENT_ATTEMPTS} attempts"
            )));
        }
    }

    Ok(Topology {
        bs_xy,
        user_xy,
        cell_radius_m: r,
        antennas_per_bs: cfg.antennas_per_bs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n_bs: usize, n_users: usize) -> TopologyConfig {
        TopologyConfig {
            n_bs,
            antennas_per_bs: 2,
            cell_radius_m: 500.0,
            exclusion_radius_m: 50.0,
            n_users,
        }
    }

    #[test]
    fn degenerate_single_bs_no_users() {
        let t = gen_topology(&cfg(1, 0), 0).unwrap();
        assert_eq!(t.bs_xy, vec![[0.0, 0.0]]);
        assert!(t.user_xy.is_empty());
    }

    #[test]
    fn seven_cell_ring_geometry() {
        let t = gen_topology(&cfg(7, 0), 0).unwrap();
        assert_eq!(t.bs_xy.len(), 7);
        let expect = 3f64.sqrt() * 500.0;
        for i in 1..7 {
            let d = (t.bs_xy[i][0].powi(2) + t.bs_xy[i][1].powi(2)).sqrt();
            assert!((d - expect).abs() < 1e-9, "ring BS {i} at distance {d}");
            // Adjacent ring neighbors are also √3·R apart.
            let j = if i == 6 { 1 } else { i + 1 };
            let dd = (t.bs_xy[i][0] - t.bs_xy[j][0]).hypot(t.bs_xy[i][1] - t.bs_xy[j][1]);
            assert!((dd - expect).abs() < 1e-9);
        }
    }

    #[test]
    fn users_respect_exclusion_radius() {
        for seed in 0..20 {
            let t = gen_topology(&cfg(7, 15), seed).unwrap();
            for k in 0..15 {
                for j in 0..7 {
                    assert!(t.distance_m(k, j) >= 50.0);
                }
            }
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let a = gen_topology(&cfg(7, 15), 99).unwrap();
        let b = gen_topology(&cfg(7, 15), 99).unwrap();
        assert_eq!(a.user_xy, b.user_xy);
    }

    #[test]
    fn impossible_exclusion_reports_config_error() {
        let mut c = cfg(1, 1);
        c.exclusion_radius_m = 499.9;
        // Nearly the whole cell is excluded; placement may still succeed
        // near the corners, so tighten further via a tiny cell.
        c.cell_radius_m = 500.0;
        // The hexagon corner is at distance R from the center, so an
        // exclusion radius of R leaves only the corners; R-ε makes it
        // astronomically unlikely but not impossible. Validation instead
        // rejects exclusion ≥ cell radius outright.
        c.exclusion_radius_m = 500.0;
        assert!(gen_topology(&c, 0).is_err());
    }
}
