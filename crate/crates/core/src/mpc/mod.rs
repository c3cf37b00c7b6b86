//! Multipath-component visibility modeling at the MS side.
//!
//! Individual multipath components (MPCs) are visible inside circular
//! regions with lognormally distributed radii, and their contribution to
//! the channel is shaped by a Gaussian gain profile whose width equals the
//! region radius.  This module provides:
//!
//! - the chord-length law of a random line segment across a disc, and its
//!   mixture over a radius distribution ([`chord`]),
//! - recovery of a discrete radius law from an observed chord-length CDF
//!   by a simplex-constrained least-squares fit ([`qp`]),
//! - parametric fits of lifetime samples and of discrete radius laws
//!   ([`fit`]),
//! - the Gaussian gain profile and MPC count bookkeeping ([`gain`]).

pub mod chord;
pub mod fit;
pub mod gain;
pub mod qp;

pub use chord::{
    chord_cdf, default_chord_grid, default_radius_grid, mixture_chord_cdf, RadiusDistribution,
    RadiusPmf,
};
pub use fit::{
    fit_lifetimes, fit_lognormal_to_pmf, ks_distance, LifetimeFit, LifetimeFitCase,
    LognormalPmfFit,
};
pub use gain::{required_num_mpcs, sample_radius, GainFunctionParams};
pub use qp::{simplex_project, solve_radius_weights, RadiusWeightSolution};
