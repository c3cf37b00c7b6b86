//! Random placement of clusters, scattering points, and visibility
//! regions for a scenario.
//!
//! Placement draws every random quantity the synthesizer needs — cluster
//! geometry, per-component complex weights, component visibility discs —
//! so that synthesis itself is a deterministic function of the placed
//! structure plus user positions.  Component-disc draws happen whether or
//! not disc shaping is enabled, which keeps random streams aligned when
//! the same seed is synthesized with the shaping toggled on and off.

use rand::Rng as _;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::bsvr::{generate_bsvrs_with, BsVrProcessParams};
use crate::channel::scenario::{ChannelScenario, C_LIGHT};
use crate::error::{Error, Result};
use crate::lifetime::LifetimeDistribution;
use crate::mpc::gain::sample_radius;
use crate::rng::{self, Rng};

/// Stream indices for the independent substreams of one synthesis seed.
pub(crate) const STREAM_BSVR: u64 = 0xB5;
pub(crate) const STREAM_CLUSTER: u64 = 0xC1;
pub(crate) const STREAM_USERS: u64 = 0x05;
pub(crate) const STREAM_LOS: u64 = 0x1F;

/// Guard against runaway configurations.
const MAX_CLUSTERS: u64 = 100_000;
const MAX_SCATTER_POINTS: u64 = 50_000_000;

/// Rectangular simulation region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimRegion {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl SimRegion {
    fn sample(&self, rng: &mut Rng) -> [f64; 2] {
        [
            rng.random_range(self.x0..self.x1),
            rng.random_range(self.y0..self.y1),
        ]
    }

    /// Region area (m^2).
    pub fn area(&self) -> f64 {
        (self.x1 - self.x0) * (self.y1 - self.y0)
    }
}

/// One placed cluster with everything synthesis needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacedCluster {
    /// Center of the terminal-side visibility disc (m).
    pub ms_vr_center: [f64; 2],
    /// Visibility interval on the array axis (absolute x, m); covers the
    /// whole array when interval gating is disabled.
    pub bs_interval: (f64, f64),
    /// Amplitude slope inside the interval (dB/m), applied around the
    /// interval midpoint.
    pub bs_slope_db_per_m: f64,
    /// Linear cluster amplitude from the excess-delay attenuation law and
    /// shadowing.
    pub amplitude: f64,
    /// Extra path length shared by all components (m), from the cluster
    /// excess delay.
    pub link_extra_m: f64,
    /// Realized azimuth spreads (deg) and intra-cluster delay spread (us).
    pub azimuth_spread_bs_deg: f64,
    pub azimuth_spread_ms_deg: f64,
    pub delay_spread_us: f64,
    /// Departure-side scattering points (m).
    pub bs_points: Vec<[f64; 2]>,
    /// Arrival-side scattering points (m).
    pub ms_points: Vec<[f64; 2]>,
    /// Per-component complex weights, standard complex normal.
    pub mpc_weight: Vec<(f64, f64)>,
    /// Per-component extra path length (m), realizing the intra-cluster
    /// delay spread.
    pub mpc_extra_m: Vec<f64>,
    /// Per-component visibility disc centers (m).
    pub mpc_vr_center: Vec<[f64; 2]>,
    /// Per-component visibility disc widths (m).
    pub mpc_vr_width: Vec<f64>,
}

/// The placed random structure of one synthesis realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacedClusters {
    pub clusters: Vec<PlacedCluster>,
    pub region: SimRegion,
    /// Center of the LOS visibility disc (the user-area center).
    pub los_center: [f64; 2],
}

fn draw_normal(rng: &mut Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Exponential draw with the given mean; always consumes one uniform so
/// streams stay aligned when the mean is zero.
fn draw_exponential(mean: f64, rng: &mut Rng) -> f64 {
    let u: f64 = rng.random();
    if mean > 0.0 {
        -mean * (-u).ln_1p()
    } else {
        0.0
    }
}

/// dB-lognormal spread draw: `median * 10^(spread_db * z / 10)`.
fn draw_db_lognormal(median: f64, spread_db: f64, rng: &mut Rng) -> f64 {
    let z = draw_normal(rng);
    median * 10f64.powf(spread_db * z / 10.0)
}

/// Places clusters, scattering points, and visibility regions for the
/// scenario under the given seed.
///
/// The far-cluster count is the number of visibility intervals the
/// array-side process leaves on the array when that process is enabled,
/// a Poisson draw with mean `N_C` otherwise, or the fixed override.
pub fn place_clusters(scenario: &ChannelScenario, seed: u64) -> Result<PlacedClusters> {
    scenario.validate()?;
    let bbox = scenario.user_bbox();
    let margin = 3.0 * scenario.clusters.r_c;
    let region = SimRegion {
        x0: bbox[0] - margin,
        y0: bbox[1] - margin,
        x1: bbox[2] + margin,
        y1: bbox[3] + margin,
    };
    if !(region.x0.is_finite()
        && region.y0.is_finite()
        && region.x1.is_finite()
        && region.y1.is_finite()
        && region.x0 < region.x1
        && region.y0 < region.y1)
    {
        return Err(Error::InvalidScenario(
            "simulation region is degenerate; users plus the visibility margin \
             must span a finite rectangle"
                .into(),
        ));
    }

    let mut rng_cluster = rng::substream(seed, STREAM_CLUSTER);

    // Cluster count and array-side visibility intervals.
    let array_len = scenario.array_length();
    let whole_array = (0.0, array_len.max(0.0));
    let mut intervals: Vec<(f64, f64)> = Vec::new();
    if let Some(fixed) = scenario.clusters.fixed_count {
        intervals.resize(fixed as usize, whole_array);
    } else if scenario.bs_vr.enabled {
        if !(array_len > 0.0) {
            return Err(Error::InvalidScenario(
                "array-side interval gating needs an array of positive length".into(),
            ));
        }
        let params = BsVrProcessParams {
            lambda: scenario.bs_vr.lambda,
            lifetime: LifetimeDistribution::Exponential {
                scale: scenario.bs_vr.l_bs,
            },
            x1: 0.0,
            x2: array_len,
            delta0: 0.0,
        };
        let mut rng_process = rng::substream(seed, STREAM_BSVR);
        let set = generate_bsvrs_with(&params, 10.0 * scenario.bs_vr.l_bs, &mut rng_process)?;
        intervals = set.intervals().to_vec();
    } else if scenario.clusters.n_c > 0.0 {
        let count = Poisson::new(scenario.clusters.n_c)
            .map_err(|e| Error::InvalidParameter(format!("cluster intensity: {e}")))?
            .sample(&mut rng_cluster) as u64;
        intervals.resize(count as usize, whole_array);
    }
    let count = intervals.len() as u64;
    if count > MAX_CLUSTERS || count * scenario.clusters.n_mpc > MAX_SCATTER_POINTS {
        return Err(Error::InvalidScenario(format!(
            "placement would create {count} clusters x {} components; \
             reduce N_C or N_MPC",
            scenario.clusters.n_mpc
        )));
    }

    let center = scenario.array_center();
    let user_center = scenario.user_area_center();
    let n_mpc = scenario.clusters.n_mpc as usize;
    let pinned = scenario.clusters.fixed_count.is_some();
    let sigma2_r = scenario.mpc_vr.sigma_r * scenario.mpc_vr.sigma_r;

    let mut clusters = Vec::with_capacity(intervals.len());
    for interval in intervals {
        let ms_vr_center = if pinned {
            user_center
        } else {
            region.sample(&mut rng_cluster)
        };
        let omega_bs = draw_db_lognormal(
            scenario.clusters.m_psi_bs,
            scenario.clusters.s_psi_bs,
            &mut rng_cluster,
        );
        let omega_ms = draw_db_lognormal(
            scenario.clusters.m_psi_ms,
            scenario.clusters.s_psi_ms,
            &mut rng_cluster,
        );
        let phi_ms: f64 = rng_cluster.random_range(0.0..std::f64::consts::TAU);
        let delay_spread_us = draw_db_lognormal(
            scenario.clusters.m_tau,
            scenario.clusters.s_tau,
            &mut rng_cluster,
        );
        let excess_us = draw_exponential(scenario.clusters.tau_b, &mut rng_cluster);
        let shadow_db = scenario.clusters.sigma_s * draw_normal(&mut rng_cluster);
        let slope = scenario.bs_vr.mu_bs + scenario.bs_vr.sigma_bs * draw_normal(&mut rng_cluster);
        let amplitude = 10f64.powf((-scenario.clusters.k_tau * excess_us + shadow_db) / 20.0);
        let link_extra_m = excess_us * 1e-6 * C_LIGHT;

        // Departure points scatter around the cluster position so that,
        // seen from the array, they subtend the drawn azimuth spread;
        // radial depth is half the tangential extent.
        let dx = ms_vr_center[0] - center[0];
        let dy = ms_vr_center[1] - center[1];
        let d_bs = (dx * dx + dy * dy).sqrt();
        let (radial, tangential) = if d_bs > 1e-9 {
            ([dx / d_bs, dy / d_bs], [-dy / d_bs, dx / d_bs])
        } else {
            ([1.0, 0.0], [0.0, 1.0])
        };
        let sigma_tan = d_bs * omega_bs.to_radians();
        let sigma_rad = 0.5 * sigma_tan;
        // Arrival points scatter around an anchor a few disc radii away
        // from the visibility disc, in a random direction, so users
        // inside the disc see them under the drawn arrival spread.
        let d_anchor = 5.0 * scenario.clusters.r_c;
        let ms_anchor = [
            ms_vr_center[0] + d_anchor * phi_ms.cos(),
            ms_vr_center[1] + d_anchor * phi_ms.sin(),
        ];
        let ms_radial = [phi_ms.cos(), phi_ms.sin()];
        let ms_tangential = [-phi_ms.sin(), phi_ms.cos()];
        let sigma_tan_ms = d_anchor * omega_ms.to_radians();
        let sigma_rad_ms = 0.5 * sigma_tan_ms;

        let mut bs_points = Vec::with_capacity(n_mpc);
        let mut ms_points = Vec::with_capacity(n_mpc);
        let mut mpc_weight = Vec::with_capacity(n_mpc);
        let mut mpc_extra_m = Vec::with_capacity(n_mpc);
        let mut mpc_vr_center = Vec::with_capacity(n_mpc);
        let mut mpc_vr_width = Vec::with_capacity(n_mpc);
        for _ in 0..n_mpc {
            let zt = draw_normal(&mut rng_cluster);
            let zr = draw_normal(&mut rng_cluster);
            bs_points.push([
                ms_vr_center[0] + tangential[0] * sigma_tan * zt + radial[0] * sigma_rad * zr,
                ms_vr_center[1] + tangential[1] * sigma_tan * zt + radial[1] * sigma_rad * zr,
            ]);
            let z1 = draw_normal(&mut rng_cluster);
            let z2 = draw_normal(&mut rng_cluster);
            ms_points.push([
                ms_anchor[0] + ms_tangential[0] * sigma_tan_ms * z1 + ms_radial[0] * sigma_rad_ms * z2,
                ms_anchor[1] + ms_tangential[1] * sigma_tan_ms * z1 + ms_radial[1] * sigma_rad_ms * z2,
            ]);
            let wr = draw_normal(&mut rng_cluster);
            let wi = draw_normal(&mut rng_cluster);
            mpc_weight.push((wr / std::f64::consts::SQRT_2, wi / std::f64::consts::SQRT_2));
            let extra_us = draw_exponential(delay_spread_us, &mut rng_cluster);
            mpc_extra_m.push(extra_us * 1e-6 * C_LIGHT);
            // Component visibility disc: center uniform in the cluster's
            // terminal-side disc, lognormal width.  Drawn even when disc
            // shaping is disabled, to keep paired toggled runs aligned.
            let u1: f64 = rng_cluster.random();
            let u2: f64 = rng_cluster.random();
            let rad = scenario.clusters.r_c * u1.sqrt();
            let ang = std::f64::consts::TAU * u2;
            mpc_vr_center.push([
                ms_vr_center[0] + rad * ang.cos(),
                ms_vr_center[1] + rad * ang.sin(),
            ]);
            // The per-MPC disc lives inside its parent terminal-side disc,
            // so its width cannot exceed that radius.  Clamping also keeps
            // the effective visible-component count consistent with the
            // count law used by `required_num_mpcs`.
            let width = sample_radius(scenario.mpc_vr.mu_r, sigma2_r, &mut rng_cluster);
            mpc_vr_width.push(width.min(scenario.clusters.r_c));
        }

        clusters.push(PlacedCluster {
            ms_vr_center,
            bs_interval: interval,
            bs_slope_db_per_m: slope,
            amplitude,
            link_extra_m,
            azimuth_spread_bs_deg: omega_bs,
            azimuth_spread_ms_deg: omega_ms,
            delay_spread_us,
            bs_points,
            ms_points,
            mpc_weight,
            mpc_extra_m,
            mpc_vr_center,
            mpc_vr_width,
        });
    }

    Ok(PlacedClusters {
        clusters,
        region,
        los_center: user_center,
    })
}
