//! Base-station-side visibility regions as a stationary interval process.
//!
//! Cluster visibility along a physically large array is modeled as a
//! birth-death process on the array axis: births form a Poisson process with
//! rate `lambda` per meter, each birth stays visible for an independent
//! lifetime `Y`, and only the part of each visibility interval that overlaps
//! the observation window `[x1, x2]` is recorded. Intervals whose observed
//! (clipped) length falls below the resolution limit `delta0` are dropped,
//! mirroring how short regions disappear in measured data.
//!
//! [`process`] simulates and censors realizations; [`inference`] recovers
//! `(lambda, Y)` from censored observations and quantifies how well any
//! unbiased estimator can do.

pub mod inference;
pub mod process;

pub use inference::{
    estimate_with_bound, fim_crlb, log_likelihood, mle_exponential, mle_numeric, mome,
    pool_stats, sufficient_stats, EstimateWithBound, ExponentialMle, FisherInformation,
    NumericMle, SufficientStats,
};
pub use process::{
    censor, count_pmf, decompose_counts, generate_bsvrs, generate_bsvrs_with, simulate_births,
    BsVrProcessParams, CensorClass, CensorCounts, ObservedIntervalSet,
};
