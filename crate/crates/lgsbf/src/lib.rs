//! Layered group sparse beamforming for cache-enabled multicast networks.
//!
//! This library minimizes total network power (base-station plus backhaul)
//! in a downlink multicast network where each BS carries a content cache and
//! a capacity-limited backhaul link. Turning a BS off saves its relative
//! power; dropping a BS-to-group assignment saves backhaul traffic for
//! uncached content; both decisions live in the sparsity pattern of the
//! aggregate beamformer, at two nested layers.
//!
//! The pieces:
//!
//! - [`netgen`]: reproducible scenario generation (hexagonal topology,
//!   fading channels, Zipf requests, multicast groups, cache placement).
//! - [`power`]: SINR, backhaul load and the network power model.
//! - [`algo`]: the three-stage solver (sparsity-inducing norm minimization,
//!   two-layer support search, final coordinated beamforming), the
//!   single-layer and coordinated-beamforming benchmarks, and an exhaustive
//!   support-enumeration oracle for desk-scale validation.
//! - [`harness`]: configuration, Monte Carlo sweeps, CSV output and the
//!   oracle comparison suite.
//!
//! The convex machinery (interior-point QCQP, small dense SDPs, CCCP) lives
//! in the companion crate `conic-core`.

pub mod algo;
pub mod guide;
pub mod harness;
pub mod netgen;
pub mod power;
pub mod seed;
pub mod units;
