//! Channel modeling toolkit for massive MIMO systems with physically large
//! arrays, built around the COST 2100 cluster framework extended with
//! base-station-side visibility regions (BS-VRs) and per-path visibility
//! regions on the mobile side (MPC-VRs).
//!
//! The crate is organized as a pipeline from stochastic geometry to link-level
//! channel statistics:
//!
//! * [`bsvr`] — BS-VRs as a stationary birth-death interval process along the
//!   array axis: simulation with window censoring, exact count distributions,
//!   censored maximum-likelihood and method-of-moments estimators, and
//!   Fisher-information lower bounds.
//! * [`correlation`] — closed-form and numerical autocorrelation functions of
//!   cluster and path visibility along the array and across the service area,
//!   including the induced bound on small-scale fading correlation.
//! * [`mpc`] — per-path visibility on the mobile side: chord-length mixture
//!   models for visibility-region radii, a simplex-constrained least-squares
//!   radius solver, lifetime-law fitting, and the soft gain function used in
//!   synthesis.
//! * [`channel`] — scenario configuration, cluster placement, wideband channel
//!   tensor synthesis, and condition-number studies of the multi-user channel.
//! * [`harness`] — experiment drivers behind the `cost2100x` command-line
//!   tool: goodness-of-fit tests, estimator error sweeps, and reproducible
//!   figure-style experiment runs.
//!
//! All random generation is driven by explicit 64-bit seeds through a
//! counter-based substream scheme, so every experiment is reproducible
//! bit-for-bit and can be partitioned across processes by seed without
//! coordination.

pub mod bsvr;
pub mod channel;
pub mod correlation;
pub mod error;
pub mod harness;
pub mod lifetime;
pub mod mpc;
pub mod numerics;
pub mod rng;

pub use error::{Error, Result};
pub use lifetime::LifetimeDistribution;
