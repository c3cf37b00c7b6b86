//! Scenario description for the channel synthesizer.
//!
//! A scenario pins down the array, the users, the cluster statistics, and
//! the visibility-region extensions (array-side interval process,
//! per-component disc process, line-of-sight region).  Scenarios serialize
//! to a declarative config whose keys mirror the standard parameter-table
//! names (`L_BS`, `mu_R_MPC`, `N_C`, `k_tau`, ...), so files double as the
//! experiment record.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mpc::gain::required_num_mpcs;

/// Speed of light (m/s).
pub const C_LIGHT: f64 = 299_792_458.0;

/// Uniform linear array along the x axis, first element at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayGeometry {
    /// Antenna count.
    #[serde(rename = "M")]
    pub num_antennas: usize,
    /// Element spacing in carrier wavelengths.
    pub spacing_wavelengths: f64,
}

/// One user trajectory: position at snapshot `t` is `start + t * step`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Route {
    /// Starting position (m).
    pub start: [f64; 2],
    /// Per-snapshot displacement (m).
    pub step: [f64; 2],
}

/// How user positions are generated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum UserPlacement {
    /// Deterministic routes, one per user.
    Routes { routes: Vec<Route> },
    /// Every (user, snapshot) position drawn uniformly in a disc.
    RedrawDisc { center: [f64; 2], radius: f64 },
}

/// Cluster-level statistics, keyed like the standard parameter table.
///
/// Delay quantities are in microseconds, attenuation slopes in dB per
/// microsecond, angular quantities in degrees, dB-spread entries in dB.
/// The elevation entries and the cross-correlation vector `rho` are
/// carried for configuration completeness; the planar synthesis uses the
/// azimuth entries only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterParams {
    /// Mean number of far clusters (Poisson) when the array-side interval
    /// process is disabled.
    #[serde(rename = "N_C")]
    pub n_c: f64,
    /// Deterministic cluster-count override; clusters are then pinned to
    /// the user-area center (single-cluster and twin setups).
    #[serde(rename = "N_C_fixed", default, skip_serializing_if = "Option::is_none")]
    pub fixed_count: Option<u64>,
    /// Terminal-side visibility disc radius (m).
    #[serde(rename = "R_C")]
    pub r_c: f64,
    /// Width of the activation transition annulus (m).
    #[serde(rename = "T_C")]
    pub t_c: f64,
    /// Multipath components per cluster.
    #[serde(rename = "N_MPC")]
    pub n_mpc: u64,
    /// Excess-delay attenuation slope (dB/us).
    pub k_tau: f64,
    /// Mean cluster excess delay (us).
    #[serde(rename = "tau_B")]
    pub tau_b: f64,
    /// Cluster shadowing standard deviation (dB).
    #[serde(rename = "sigma_S")]
    pub sigma_s: f64,
    /// Median intra-cluster delay spread (us).
    pub m_tau: f64,
    /// dB-spread of the intra-cluster delay spread.
    #[serde(rename = "S_tau")]
    pub s_tau: f64,
    /// Median azimuth spread at the array side (deg).
    #[serde(rename = "m_psi_BS")]
    pub m_psi_bs: f64,
    /// dB-spread of the array-side azimuth spread.
    #[serde(rename = "S_psi_BS")]
    pub s_psi_bs: f64,
    /// Median elevation spread at the array side (deg); unused (planar).
    #[serde(rename = "m_theta_BS")]
    pub m_theta_bs: f64,
    /// dB-spread of the array-side elevation spread; unused (planar).
    #[serde(rename = "S_theta_BS")]
    pub s_theta_bs: f64,
    /// Median azimuth spread at the user side (deg).
    #[serde(rename = "m_psi_MS")]
    pub m_psi_ms: f64,
    /// dB-spread of the user-side azimuth spread.
    #[serde(rename = "S_psi_MS")]
    pub s_psi_ms: f64,
    /// Median elevation spread at the user side (deg); unused (planar).
    #[serde(rename = "m_theta_MS")]
    pub m_theta_ms: f64,
    /// dB-spread of the user-side elevation spread; unused (planar).
    #[serde(rename = "S_theta_MS")]
    pub s_theta_ms: f64,
    /// Cross-correlations of the spread quantities; carried but not
    /// applied (spreads are drawn independently).
    pub rho: [f64; 6],
}

/// Array-side visibility interval process parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BsVrParams {
    /// Whether clusters are gated by intervals along the array.
    pub enabled: bool,
    /// Mean interval length (m); the lifetime law is exponential.
    #[serde(rename = "L_BS")]
    pub l_bs: f64,
    /// Interval birth intensity along the array (1/m).
    pub lambda: f64,
    /// Mean of the per-interval amplitude slope (dB/m).
    #[serde(rename = "mu_BS")]
    pub mu_bs: f64,
    /// Standard deviation of the per-interval amplitude slope (dB/m).
    #[serde(rename = "sigma_BS")]
    pub sigma_bs: f64,
}

/// Per-component visibility disc parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MpcVrParams {
    /// Whether component amplitudes are shaped by their visibility discs.
    pub enabled: bool,
    /// dB-domain location of the lognormal disc radius: median radius is
    /// `10^(mu_R_MPC / 10)` meters.
    #[serde(rename = "mu_R_MPC")]
    pub mu_r: f64,
    /// dB-domain standard deviation of the lognormal disc radius.
    #[serde(rename = "sigma_R_MPC")]
    pub sigma_r: f64,
    /// Expected number of components visible at a point, for reference.
    #[serde(rename = "N_MPC_eff", default, skip_serializing_if = "Option::is_none")]
    pub n_mpc_eff: Option<f64>,
}

/// Line-of-sight visibility parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LosParams {
    /// LOS visibility disc radius (m), centered on the user area.
    #[serde(rename = "R_L")]
    pub r_l: f64,
    /// Width of the LOS transition annulus (m).
    #[serde(rename = "T_L")]
    pub t_l: f64,
    /// Mean Ricean K-factor (dB).
    #[serde(rename = "mu_K_LOS")]
    pub mu_k_los: f64,
    /// K-factor standard deviation (dB).
    #[serde(rename = "sigma_K_LOS")]
    pub sigma_k_los: f64,
}

/// User antenna pattern.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AntennaPattern {
    /// Unit gain in every direction.
    Omni,
    /// Cardioid-family pattern `((1 + cos(theta - boresight)) / 2)^q`
    /// in power, with `q` chosen so the half-power width equals
    /// `beamwidth_deg`.
    Directive { boresight_deg: f64, beamwidth_deg: f64 },
}

impl AntennaPattern {
    /// Amplitude response toward direction `angle_rad` (x-axis reference).
    pub fn amplitude(&self, angle_rad: f64) -> f64 {
        match self {
            AntennaPattern::Omni => 1.0,
            AntennaPattern::Directive {
                boresight_deg,
                beamwidth_deg,
            } => {
                let delta = angle_rad - boresight_deg.to_radians();
                let base = 0.5 * (1.0 + delta.cos());
                if base <= 0.0 {
                    return 0.0;
                }
                let half = 0.5 * (1.0 + (beamwidth_deg.to_radians() * 0.5).cos());
                let q = 0.5f64.ln() / half.ln();
                base.powf(0.5 * q)
            }
        }
    }

    fn validate(&self) -> Result<()> {
        if let AntennaPattern::Directive {
            boresight_deg,
            beamwidth_deg,
        } = self
        {
            if !boresight_deg.is_finite() {
                return Err(Error::InvalidParameter(
                    "pattern boresight must be finite".into(),
                ));
            }
            if !(beamwidth_deg.is_finite() && *beamwidth_deg > 0.0 && *beamwidth_deg < 360.0) {
                return Err(Error::InvalidParameter(format!(
                    "pattern beamwidth must lie in (0, 360) degrees, got {beamwidth_deg}"
                )));
            }
        }
        Ok(())
    }
}

/// Complete synthesis scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelScenario {
    /// Human-readable label, echoed into outputs.
    pub name: String,
    /// Carrier frequency (Hz).
    pub carrier_hz: f64,
    /// Bandwidth (Hz); zero collapses all frequency bins.
    pub bandwidth_hz: f64,
    /// Frequency samples over the band.
    #[serde(rename = "B")]
    pub num_freq: usize,
    /// Route snapshots.
    #[serde(rename = "T")]
    pub num_snapshots: usize,
    /// User count.
    #[serde(rename = "K")]
    pub num_users: usize,
    /// Array geometry.
    pub array: ArrayGeometry,
    /// User position model.
    pub users: UserPlacement,
    /// Cluster statistics.
    pub clusters: ClusterParams,
    /// Array-side visibility interval process.
    pub bs_vr: BsVrParams,
    /// Per-component visibility discs.
    pub mpc_vr: MpcVrParams,
    /// Line-of-sight region, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub los: Option<LosParams>,
    /// User antenna pattern.
    pub pattern: AntennaPattern,
}

impl ChannelScenario {
    /// Carrier wavelength (m).
    pub fn wavelength(&self) -> f64 {
        C_LIGHT / self.carrier_hz
    }

    /// Element spacing (m).
    pub fn spacing_m(&self) -> f64 {
        self.array.spacing_wavelengths * self.wavelength()
    }

    /// Array length (m): first to last element.
    pub fn array_length(&self) -> f64 {
        (self.array.num_antennas.saturating_sub(1)) as f64 * self.spacing_m()
    }

    /// x coordinate of antenna `m`.
    pub fn antenna_x(&self, m: usize) -> f64 {
        m as f64 * self.spacing_m()
    }

    /// Array midpoint, the phase/delay reference.
    pub fn array_center(&self) -> [f64; 2] {
        [0.5 * self.array_length(), 0.0]
    }

    /// Center of the user area (route centroid or disc center).
    pub fn user_area_center(&self) -> [f64; 2] {
        match &self.users {
            UserPlacement::RedrawDisc { center, .. } => *center,
            UserPlacement::Routes { routes } => {
                let mut cx = 0.0;
                let mut cy = 0.0;
                let steps = self.num_snapshots.saturating_sub(1) as f64;
                for r in routes {
                    cx += r.start[0] + 0.5 * steps * r.step[0];
                    cy += r.start[1] + 0.5 * steps * r.step[1];
                }
                let n = routes.len().max(1) as f64;
                [cx / n, cy / n]
            }
        }
    }

    /// Axis-aligned bounding box `[x0, y0, x1, y1]` of every position a
    /// user can occupy.
    pub fn user_bbox(&self) -> [f64; 4] {
        match &self.users {
            UserPlacement::RedrawDisc { center, radius } => [
                center[0] - radius,
                center[1] - radius,
                center[0] + radius,
                center[1] + radius,
            ],
            UserPlacement::Routes { routes } => {
                let mut bbox = [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY];
                for r in routes {
                    for t in 0..self.num_snapshots.max(1) {
                        let x = r.start[0] + t as f64 * r.step[0];
                        let y = r.start[1] + t as f64 * r.step[1];
                        bbox[0] = bbox[0].min(x);
                        bbox[1] = bbox[1].min(y);
                        bbox[2] = bbox[2].max(x);
                        bbox[3] = bbox[3].max(y);
                    }
                }
                bbox
            }
        }
    }

    /// Frequency offset of bin `b` from the carrier (Hz).
    pub fn freq_offset(&self, b: usize) -> f64 {
        if self.num_freq <= 1 {
            0.0
        } else {
            self.bandwidth_hz * (b as f64 / (self.num_freq - 1) as f64 - 0.5)
        }
    }

    /// Checks every parameter against its documented domain.
    pub fn validate(&self) -> Result<()> {
        if self.array.num_antennas < 1
            || self.num_users < 1
            || self.num_freq < 1
            || self.num_snapshots < 1
        {
            return Err(Error::InvalidParameter(
                "M, K, B, T must all be at least 1".into(),
            ));
        }
        if !(self.carrier_hz.is_finite() && self.carrier_hz > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "carrier frequency must be positive, got {}",
                self.carrier_hz
            )));
        }
        if !(self.bandwidth_hz.is_finite() && self.bandwidth_hz >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "bandwidth must be nonnegative, got {}",
                self.bandwidth_hz
            )));
        }
        if !(self.array.spacing_wavelengths.is_finite() && self.array.spacing_wavelengths > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "antenna spacing must be positive, got {}",
                self.array.spacing_wavelengths
            )));
        }
        match &self.users {
            UserPlacement::Routes { routes } => {
                if routes.len() != self.num_users {
                    return Err(Error::InvalidParameter(format!(
                        "route count {} must equal K = {}",
                        routes.len(),
                        self.num_users
                    )));
                }
                for r in routes {
                    if !(r.start.iter().all(|v| v.is_finite())
                        && r.step.iter().all(|v| v.is_finite()))
                    {
                        return Err(Error::InvalidParameter(
                            "route coordinates must be finite".into(),
                        ));
                    }
                }
            }
            UserPlacement::RedrawDisc { center, radius } => {
                if !(center.iter().all(|v| v.is_finite())
                    && radius.is_finite()
                    && *radius >= 0.0)
                {
                    return Err(Error::InvalidParameter(
                        "user disc must have finite center and nonnegative radius".into(),
                    ));
                }
            }
        }
        let c = &self.clusters;
        for (name, v) in [
            ("N_C", c.n_c),
            ("k_tau", c.k_tau),
            ("tau_B", c.tau_b),
            ("sigma_S", c.sigma_s),
            ("m_tau", c.m_tau),
            ("S_tau", c.s_tau),
            ("m_psi_BS", c.m_psi_bs),
            ("S_psi_BS", c.s_psi_bs),
            ("m_theta_BS", c.m_theta_bs),
            ("S_theta_BS", c.s_theta_bs),
            ("m_psi_MS", c.m_psi_ms),
            ("S_psi_MS", c.s_psi_ms),
            ("m_theta_MS", c.m_theta_ms),
            ("S_theta_MS", c.s_theta_ms),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be nonnegative and finite, got {v}"
                )));
            }
        }
        if !(c.r_c.is_finite() && c.r_c > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "R_C must be positive, got {}",
                c.r_c
            )));
        }
        if !(c.t_c.is_finite() && c.t_c >= 0.0 && c.t_c <= c.r_c) {
            return Err(Error::InvalidParameter(format!(
                "T_C must lie in [0, R_C], got {}",
                c.t_c
            )));
        }
        if c.n_mpc < 1 {
            return Err(Error::InvalidParameter("N_MPC must be at least 1".into()));
        }
        if self.bs_vr.enabled {
            if !(self.bs_vr.l_bs.is_finite() && self.bs_vr.l_bs > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "L_BS must be positive when the interval process is enabled, got {}",
                    self.bs_vr.l_bs
                )));
            }
            if !(self.bs_vr.lambda.is_finite() && self.bs_vr.lambda > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "lambda must be positive when the interval process is enabled, got {}",
                    self.bs_vr.lambda
                )));
            }
        }
        if !(self.bs_vr.mu_bs.is_finite()
            && self.bs_vr.sigma_bs.is_finite()
            && self.bs_vr.sigma_bs >= 0.0)
        {
            return Err(Error::InvalidParameter(
                "interval gain slope stats must be finite with sigma_BS >= 0".into(),
            ));
        }
        if !(self.mpc_vr.mu_r.is_finite()
            && self.mpc_vr.sigma_r.is_finite()
            && self.mpc_vr.sigma_r >= 0.0)
        {
            return Err(Error::InvalidParameter(
                "component disc stats must be finite with sigma_R_MPC >= 0".into(),
            ));
        }
        if let Some(los) = &self.los {
            if !(los.r_l.is_finite() && los.r_l > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "R_L must be positive, got {}",
                    los.r_l
                )));
            }
            if !(los.t_l.is_finite() && los.t_l >= 0.0 && los.t_l <= los.r_l) {
                return Err(Error::InvalidParameter(format!(
                    "T_L must lie in [0, R_L], got {}",
                    los.t_l
                )));
            }
            if !(los.mu_k_los.is_finite()
                && los.sigma_k_los.is_finite()
                && los.sigma_k_los >= 0.0)
            {
                return Err(Error::InvalidParameter(
                    "K-factor stats must be finite with sigma >= 0".into(),
                ));
            }
        }
        self.pattern.validate()
    }
}

/// Closely-located users for the indoor scenario: a 3x3 grid of short
/// straight-line walks (0.25 m over the snapshot window), pairwise
/// separations between `pitch` and `2*sqrt(2)*pitch` meters.
fn indoor_user_grid(center: [f64; 2], pitch: f64) -> UserPlacement {
    let mut routes = Vec::with_capacity(9);
    for gy in 0..3i32 {
        for gx in 0..3i32 {
            routes.push(Route {
                start: [
                    center[0] + f64::from(gx - 1) * pitch,
                    center[1] + f64::from(gy - 1) * pitch,
                ],
                step: [0.25 / 9.0, 0.0],
            });
        }
    }
    UserPlacement::Routes { routes }
}

/// Indoor cylindrical-large-array scenario: no array-side gating, strong
/// per-component visibility shaping, LOS present.  Array reduced to
/// M = 32 for desk-scale runs.
pub fn indoor_cla() -> ChannelScenario {
    ChannelScenario {
        name: "indoor-cla".into(),
        carrier_hz: 2.6e9,
        bandwidth_hz: 50e6,
        num_freq: 257,
        num_snapshots: 10,
        num_users: 9,
        array: ArrayGeometry {
            num_antennas: 32,
            spacing_wavelengths: 0.5,
        },
        users: indoor_user_grid([0.9, 12.0], 1.2),
        clusters: ClusterParams {
            n_c: 15.0,
            fixed_count: None,
            r_c: 5.0,
            t_c: 0.5,
            n_mpc: 1000,
            k_tau: 31.0,
            tau_b: 0.25,
            sigma_s: 2.7,
            m_tau: 0.005,
            s_tau: 1.5,
            m_psi_bs: 4.6,
            s_psi_bs: 2.1,
            m_theta_bs: 3.7,
            s_theta_bs: 2.6,
            m_psi_ms: 3.6,
            s_psi_ms: 2.1,
            m_theta_ms: 0.7,
            s_theta_ms: 3.6,
            rho: [-0.45, -0.56, -0.50, 0.70, 0.34, 0.50],
        },
        bs_vr: BsVrParams {
            enabled: false,
            l_bs: 0.0,
            lambda: 0.0,
            mu_bs: 0.0,
            sigma_bs: 0.0,
        },
        mpc_vr: MpcVrParams {
            enabled: true,
            mu_r: -19.8,
            sigma_r: 10.1,
            n_mpc_eff: Some(10.0),
        },
        los: Some(LosParams {
            r_l: 30.0,
            t_l: 0.0,
            mu_k_los: -5.2,
            sigma_k_los: 2.9,
        }),
        pattern: AntennaPattern::Omni,
    }
}

/// Outdoor very-large-array scenario: clusters gated by the array-side
/// interval process, no per-component shaping, no LOS.
pub fn outdoor_vla() -> ChannelScenario {
    ChannelScenario {
        name: "outdoor-vla".into(),
        carrier_hz: 2.6e9,
        bandwidth_hz: 50e6,
        num_freq: 257,
        num_snapshots: 10,
        num_users: 9,
        array: ArrayGeometry {
            num_antennas: 128,
            spacing_wavelengths: 0.512,
        },
        users: UserPlacement::RedrawDisc {
            center: [3.75, 30.0],
            radius: 5.0,
        },
        clusters: ClusterParams {
            n_c: 31.0,
            fixed_count: None,
            r_c: 10.0,
            t_c: 2.0,
            n_mpc: 31,
            k_tau: 43.0,
            tau_b: 0.91,
            sigma_s: 7.6,
            m_tau: 0.14,
            s_tau: 2.85,
            m_psi_bs: 7.0,
            s_psi_bs: 2.4,
            m_theta_bs: 0.0,
            s_theta_bs: 0.0,
            m_psi_ms: 19.0,
            s_psi_ms: 2.0,
            m_theta_ms: 0.0,
            s_theta_ms: 0.0,
            rho: [-0.09, 0.04, 0.0, 0.42, 0.0, 0.0],
        },
        bs_vr: BsVrParams {
            enabled: true,
            l_bs: 3.2,
            lambda: 2.9,
            mu_bs: 0.0,
            sigma_bs: 0.9,
        },
        mpc_vr: MpcVrParams {
            enabled: false,
            mu_r: 0.0,
            sigma_r: 0.0,
            n_mpc_eff: None,
        },
        los: None,
        pattern: AntennaPattern::Omni,
    }
}

/// Single-cluster scenario with independently fixed departure and arrival
/// angular spreads (degrees), for separability studies.
///
/// One cluster is pinned to the user area; departure scattering points
/// subtend `omega_bs_deg` from the array, arrival points subtend
/// `omega_ms_deg` from the users (zero dB-spread, so both are exact).
/// Users are redrawn per snapshot inside a 2 m disc, the component disc
/// radius is fixed at 0.5 m, and the component count is sized so that
/// `n_mpc_eff` components are visible at a point on average.  Defaults
/// elsewhere: T = 300 snapshots, single frequency bin.
pub fn twin_cluster_scenario(
    omega_ms_deg: f64,
    omega_bs_deg: f64,
    num_users: usize,
    num_antennas: usize,
    n_mpc_eff: f64,
) -> Result<ChannelScenario> {
    for (name, v) in [("omega_MS", omega_ms_deg), ("omega_BS", omega_bs_deg)] {
        if !(v.is_finite() && v > 0.0 && v < 180.0) {
            return Err(Error::InvalidParameter(format!(
                "{name} must lie in (0, 180) degrees, got {v}"
            )));
        }
    }
    let r_c = 2.0;
    let mu_r = 10.0 * 0.5f64.log10();
    let n_mpc = required_num_mpcs(n_mpc_eff, r_c, mu_r, 0.0)?;
    let scenario = ChannelScenario {
        name: "twin-cluster".into(),
        carrier_hz: 2.6e9,
        bandwidth_hz: 0.0,
        num_freq: 1,
        num_snapshots: 300,
        num_users,
        array: ArrayGeometry {
            num_antennas,
            spacing_wavelengths: 0.5,
        },
        users: UserPlacement::RedrawDisc {
            center: [0.0, 30.0],
            radius: 2.0,
        },
        clusters: ClusterParams {
            n_c: 1.0,
            fixed_count: Some(1),
            r_c,
            t_c: 0.0,
            n_mpc,
            k_tau: 0.0,
            tau_b: 0.0,
            sigma_s: 0.0,
            m_tau: 0.0,
            s_tau: 0.0,
            m_psi_bs: omega_bs_deg,
            s_psi_bs: 0.0,
            m_theta_bs: 0.0,
            s_theta_bs: 0.0,
            m_psi_ms: omega_ms_deg,
            s_psi_ms: 0.0,
            m_theta_ms: 0.0,
            s_theta_ms: 0.0,
            rho: [0.0; 6],
        },
        bs_vr: BsVrParams {
            enabled: false,
            l_bs: 0.0,
            lambda: 0.0,
            mu_bs: 0.0,
            sigma_bs: 0.0,
        },
        mpc_vr: MpcVrParams {
            enabled: true,
            mu_r,
            sigma_r: 0.0,
            n_mpc_eff: Some(n_mpc_eff),
        },
        los: None,
        pattern: AntennaPattern::Omni,
    };
    scenario.validate()?;
    Ok(scenario)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn builtin_scenarios_validate() {
        indoor_cla().validate().unwrap();
        outdoor_vla().validate().unwrap();
    }

    #[test]
    fn outdoor_array_is_physically_large() {
        let s = outdoor_vla();
        assert_abs_diff_eq!(s.array_length(), 7.5, epsilon = 0.01);
        assert!(s.bs_vr.enabled);
    }

    #[test]
    fn twin_sizes_component_count_for_target_visibility() {
        let s = twin_cluster_scenario(30.0, 60.0, 9, 128, 100.0).unwrap();
        // ceil(100 * R_C^2 / R_MPC^2) with R_C = 2 and R_MPC = 0.5.
        assert_eq!(s.clusters.n_mpc, 1600);
        assert_eq!(s.num_users, 9);
        assert_eq!(s.array.num_antennas, 128);
        assert_eq!(s.num_snapshots, 300);
        assert_eq!(s.clusters.fixed_count, Some(1));
        assert_eq!(s.clusters.m_psi_bs, 60.0);
        assert_eq!(s.clusters.s_psi_bs, 0.0);
        assert_eq!(s.clusters.m_psi_ms, 30.0);
        // Median component disc radius is 0.5 m exactly.
        assert_abs_diff_eq!(
            10f64.powf(s.mpc_vr.mu_r / 10.0),
            0.5,
            epsilon = 1e-12
        );
        assert!(twin_cluster_scenario(0.0, 60.0, 9, 128, 100.0).is_err());
        assert!(twin_cluster_scenario(30.0, 200.0, 9, 128, 100.0).is_err());
    }

    #[test]
    fn config_round_trip_keeps_table_names() {
        let s = indoor_cla();
        let text = toml::to_string_pretty(&s).unwrap();
        for key in [
            "N_C", "R_C", "T_C", "N_MPC", "k_tau", "tau_B", "sigma_S", "m_tau", "S_tau",
            "m_psi_BS", "S_psi_BS", "m_psi_MS", "S_psi_MS", "L_BS", "mu_BS", "sigma_BS",
            "mu_R_MPC", "sigma_R_MPC", "R_L", "T_L", "mu_K_LOS", "sigma_K_LOS",
        ] {
            assert!(text.contains(key), "missing key {key} in:\n{text}");
        }
        let back: ChannelScenario = toml::from_str(&text).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn validation_rejects_bad_scenarios() {
        let mut s = indoor_cla();
        s.num_users = 0;
        assert!(s.validate().is_err());

        let mut s = indoor_cla();
        s.clusters.t_c = 99.0;
        assert!(s.validate().is_err());

        let mut s = indoor_cla();
        s.users = UserPlacement::Routes { routes: vec![] };
        assert!(s.validate().is_err());

        let mut s = outdoor_vla();
        s.bs_vr.l_bs = 0.0;
        assert!(s.validate().is_err());

        let mut s = indoor_cla();
        s.bandwidth_hz = -1.0;
        assert!(s.validate().is_err());
    }

    #[test]
    fn directive_pattern_has_half_power_at_beamwidth_edge() {
        let p = AntennaPattern::Directive {
            boresight_deg: 0.0,
            beamwidth_deg: 60.0,
        };
        assert_abs_diff_eq!(p.amplitude(0.0), 1.0, epsilon = 1e-12);
        let edge = p.amplitude(30f64.to_radians());
        assert_abs_diff_eq!(edge * edge, 0.5, epsilon = 1e-12);
        // Monotone away from boresight and symmetric.
        assert!(p.amplitude(0.2) > p.amplitude(0.8));
        assert_abs_diff_eq!(p.amplitude(0.4), p.amplitude(-0.4), epsilon = 1e-12);
        assert_eq!(AntennaPattern::Omni.amplitude(1.0), 1.0);
    }

    #[test]
    fn freq_grid_is_uniform_and_centered() {
        let s = indoor_cla();
        let df = s.freq_offset(1) - s.freq_offset(0);
        for b in 1..s.num_freq {
            assert_abs_diff_eq!(s.freq_offset(b) - s.freq_offset(b - 1), df, epsilon = 1e-6);
        }
        assert_abs_diff_eq!(
            s.freq_offset(0) + s.freq_offset(s.num_freq - 1),
            0.0,
            epsilon = 1e-6
        );
    }
}
