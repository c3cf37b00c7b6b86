//! Wideband multi-user channel synthesis over a linear array.
//!
//! A scenario places scattering clusters in the plane, each with a
//! visibility disc on the user side and, optionally, a visibility
//! interval along the array; [`synthesize`] renders the user x antenna x
//! snapshot x frequency tensor with spherical per-antenna wavefronts, and
//! [`kappa`] reduces slices of it to condition-number statistics.

pub mod kappa;
pub mod placement;
pub mod scenario;
pub mod synth;

pub use kappa::{
    condition_number_db, run_gain_toggle_experiment, run_gap_experiment, GainToggleReport,
    GapRow, KappaSummary,
};
pub use placement::{place_clusters, PlacedCluster, PlacedClusters, SimRegion};
pub use scenario::{
    indoor_cla, outdoor_vla, twin_cluster_scenario, AntennaPattern, ArrayGeometry, BsVrParams,
    ChannelScenario, ClusterParams, LosParams, MpcVrParams, Route, UserPlacement,
};
pub use synth::{activation, synthesize, synthesize_unnormalized, ChannelTensor};
