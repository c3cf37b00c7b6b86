//! Channel tensor synthesis.
//!
//! Each multipath component contributes a rank-one term across antennas
//! and frequency bins: a per-antenna carrier phasor from the exact
//! spherical path length to the departure scattering point (no plane-wave
//! shortcut), and a per-bin baseband phasor from the path delay referenced
//! to the array center.  Terminal-side disc activation (with its
//! squared-cosine transition ramp), array-side interval gating with the
//! per-interval dB/m slope, per-component Gaussian gain shaping, the user
//! antenna pattern, and an optional LOS term with a per-user Ricean
//! K-factor all multiply into the component amplitude.  After synthesis
//! each user's channel is scaled so its total energy is `M * T * B`.

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

use crate::channel::placement::{
    place_clusters, PlacedClusters, STREAM_LOS, STREAM_USERS,
};
use crate::channel::scenario::{ChannelScenario, UserPlacement, C_LIGHT};
use crate::error::{Error, Result};
use crate::rng;

/// Guard on the precomputed departure-phasor table.
const MAX_FIELD_ENTRIES: usize = 40_000_000;
/// Components whose disc gain falls below this amplitude are skipped.
const GAIN_SKIP: f64 = 1e-12;

/// Complex channel gains over users x antennas x snapshots x frequencies,
/// stored as separate real/imaginary arrays in `(k, t, m, b)` order.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelTensor {
    num_users: usize,
    num_antennas: usize,
    num_snapshots: usize,
    num_freq: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl ChannelTensor {
    fn zeros(k: usize, m: usize, t: usize, b: usize) -> Self {
        let len = k * m * t * b;
        ChannelTensor {
            num_users: k,
            num_antennas: m,
            num_snapshots: t,
            num_freq: b,
            re: vec![0.0; len],
            im: vec![0.0; len],
        }
    }

    /// (users, antennas, snapshots, frequencies).
    pub fn dims(&self) -> (usize, usize, usize, usize) {
        (
            self.num_users,
            self.num_antennas,
            self.num_snapshots,
            self.num_freq,
        )
    }

    #[inline]
    fn idx(&self, k: usize, m: usize, t: usize, b: usize) -> usize {
        ((k * self.num_snapshots + t) * self.num_antennas + m) * self.num_freq + b
    }

    /// Complex gain `h_{k,m}(t, b)` as `(re, im)`.
    pub fn at(&self, k: usize, m: usize, t: usize, b: usize) -> (f64, f64) {
        let i = self.idx(k, m, t, b);
        (self.re[i], self.im[i])
    }

    /// Total energy of user `k`: sum of squared magnitudes.
    pub fn user_energy(&self, k: usize) -> f64 {
        let block = self.num_snapshots * self.num_antennas * self.num_freq;
        let lo = k * block;
        let hi = lo + block;
        self.re[lo..hi]
            .iter()
            .zip(&self.im[lo..hi])
            .map(|(r, i)| r * r + i * i)
            .sum()
    }

    /// Whether every entry is finite.
    pub fn is_finite(&self) -> bool {
        self.re.iter().all(|v| v.is_finite()) && self.im.iter().all(|v| v.is_finite())
    }

    /// The `K x M` slice at snapshot `t`, frequency bin `b`, as a complex
    /// matrix (rows = users).
    pub fn slice_matrix(&self, t: usize, b: usize) -> nalgebra::DMatrix<nalgebra::Complex<f64>> {
        nalgebra::DMatrix::from_fn(self.num_users, self.num_antennas, |k, m| {
            let (re, im) = self.at(k, m, t, b);
            nalgebra::Complex::new(re, im)
        })
    }

    /// Serializes as a little-endian binary stream: four u64 dimensions
    /// `(K, M, T, B)`, then interleaved `re, im` f64 pairs in `(k, t, m, b)`
    /// order.
    pub fn write_binary<W: std::io::Write>(&self, out: &mut W) -> Result<()> {
        for dim in [
            self.num_users,
            self.num_antennas,
            self.num_snapshots,
            self.num_freq,
        ] {
            out.write_all(&(dim as u64).to_le_bytes())?;
        }
        for (r, i) in self.re.iter().zip(&self.im) {
            out.write_all(&r.to_le_bytes())?;
            out.write_all(&i.to_le_bytes())?;
        }
        Ok(())
    }

    /// Reads a tensor written by [`ChannelTensor::write_binary`].
    pub fn read_binary<R: std::io::Read>(input: &mut R) -> Result<Self> {
        let mut dims = [0usize; 4];
        let mut buf8 = [0u8; 8];
        for d in &mut dims {
            input.read_exact(&mut buf8)?;
            let v = u64::from_le_bytes(buf8);
            if v == 0 || v > 1 << 32 {
                return Err(Error::Parse(format!("implausible tensor dimension {v}")));
            }
            *d = v as usize;
        }
        let len = dims[0]
            .checked_mul(dims[1])
            .and_then(|v| v.checked_mul(dims[2]))
            .and_then(|v| v.checked_mul(dims[3]))
            .filter(|v| *v <= MAX_FIELD_ENTRIES)
            .ok_or_else(|| Error::Parse("tensor dimensions overflow".into()))?;
        let mut tensor = ChannelTensor::zeros(dims[0], dims[1], dims[2], dims[3]);
        for i in 0..len {
            input.read_exact(&mut buf8)?;
            tensor.re[i] = f64::from_le_bytes(buf8);
            input.read_exact(&mut buf8)?;
            tensor.im[i] = f64::from_le_bytes(buf8);
        }
        Ok(tensor)
    }
}

/// Activation of a visibility disc of radius `r` with transition width
/// `t`, at center distance `d`: one inside the core, a squared-cosine
/// ramp across the annulus, zero outside.
pub fn activation(d: f64, r: f64, t: f64) -> f64 {
    if d <= r - t {
        1.0
    } else if d >= r {
        0.0
    } else {
        let x = (d - (r - t)) / t;
        let c = (std::f64::consts::FRAC_PI_2 * x).cos();
        c * c
    }
}

#[inline]
fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    (dx * dx + dy * dy).sqrt()
}

/// User positions for every (user, snapshot) pair, user-major.  Disc
/// placements redraw per snapshot from the user substream; routes are
/// deterministic.
fn user_positions(scenario: &ChannelScenario, seed: u64) -> Vec<[f64; 2]> {
    let k = scenario.num_users;
    let t = scenario.num_snapshots;
    let mut out = Vec::with_capacity(k * t);
    match &scenario.users {
        UserPlacement::Routes { routes } => {
            for route in routes {
                for step in 0..t {
                    out.push([
                        route.start[0] + step as f64 * route.step[0],
                        route.start[1] + step as f64 * route.step[1],
                    ]);
                }
            }
        }
        UserPlacement::RedrawDisc { center, radius } => {
            let mut rng = rng::substream(seed, STREAM_USERS);
            for _ in 0..k {
                for _ in 0..t {
                    let u1: f64 = rng.random();
                    let u2: f64 = rng.random();
                    let rad = radius * u1.sqrt();
                    let ang = std::f64::consts::TAU * u2;
                    out.push([center[0] + rad * ang.cos(), center[1] + rad * ang.sin()]);
                }
            }
        }
    }
    out
}

/// Precomputed departure-side field of one cluster: gated per-antenna
/// carrier phasors (component-major) and array-center reference distances.
struct ClusterField {
    phasor_re: Vec<f64>,
    phasor_im: Vec<f64>,
    ref_dist: Vec<f64>,
}

fn build_cluster_fields(
    scenario: &ChannelScenario,
    placed: &PlacedClusters,
) -> Result<Vec<ClusterField>> {
    let m = scenario.array.num_antennas;
    let n_mpc = scenario.clusters.n_mpc as usize;
    let entries = placed
        .clusters
        .len()
        .checked_mul(n_mpc)
        .and_then(|v| v.checked_mul(m))
        .ok_or_else(|| Error::InvalidScenario("field table size overflows".into()))?;
    if entries > MAX_FIELD_ENTRIES {
        return Err(Error::InvalidScenario(format!(
            "field table would hold {entries} entries; reduce N_MPC, M, or the cluster count"
        )));
    }
    let k_wave = 2.0 * std::f64::consts::PI * scenario.carrier_hz / C_LIGHT;
    let center = scenario.array_center();
    let antenna_x: Vec<f64> = (0..m).map(|i| scenario.antenna_x(i)).collect();
    let mut fields = Vec::with_capacity(placed.clusters.len());
    for cluster in &placed.clusters {
        let (a, b) = cluster.bs_interval;
        let mid = 0.5 * (a + b);
        let mut phasor_re = vec![0.0; n_mpc * m];
        let mut phasor_im = vec![0.0; n_mpc * m];
        let mut ref_dist = Vec::with_capacity(n_mpc);
        for (l, point) in cluster.bs_points.iter().enumerate() {
            ref_dist.push(dist(center, *point));
            for (i, &x) in antenna_x.iter().enumerate() {
                if x < a || x > b {
                    continue;
                }
                let gate = 10f64.powf(cluster.bs_slope_db_per_m * (x - mid) / 20.0);
                let d = dist([x, 0.0], *point);
                let phase = -k_wave * d;
                phasor_re[l * m + i] = gate * phase.cos();
                phasor_im[l * m + i] = gate * phase.sin();
            }
        }
        fields.push(ClusterField {
            phasor_re,
            phasor_im,
            ref_dist,
        });
    }
    Ok(fields)
}

/// Fills `g` with baseband phasors `exp(-j 2 pi f_b tau)` over the
/// frequency grid, by phasor recurrence.
fn fill_freq_phasors(
    scenario: &ChannelScenario,
    tau: f64,
    g_re: &mut [f64],
    g_im: &mut [f64],
) {
    let b = scenario.num_freq;
    let phase0 = -std::f64::consts::TAU * scenario.freq_offset(0) * tau;
    let mut cur = (phase0.cos(), phase0.sin());
    let step = if b > 1 {
        let dphi = -std::f64::consts::TAU * (scenario.bandwidth_hz / (b - 1) as f64) * tau;
        (dphi.cos(), dphi.sin())
    } else {
        (1.0, 0.0)
    };
    for i in 0..b {
        g_re[i] = cur.0;
        g_im[i] = cur.1;
        cur = (
            cur.0 * step.0 - cur.1 * step.1,
            cur.0 * step.1 + cur.1 * step.0,
        );
    }
}

/// Synthesizes the channel tensor and normalizes each user's energy to
/// `M * T * B`.
pub fn synthesize(scenario: &ChannelScenario, seed: u64) -> Result<ChannelTensor> {
    synth_core(scenario, seed, true)
}

/// As [`synthesize`] but without the per-user energy normalization;
/// useful for inspecting raw amplitudes.
pub fn synthesize_unnormalized(scenario: &ChannelScenario, seed: u64) -> Result<ChannelTensor> {
    synth_core(scenario, seed, false)
}

fn synth_core(scenario: &ChannelScenario, seed: u64, normalize: bool) -> Result<ChannelTensor> {
    scenario.validate()?;
    let placed = place_clusters(scenario, seed)?;
    let fields = build_cluster_fields(scenario, &placed)?;
    let num_k = scenario.num_users;
    let num_m = scenario.array.num_antennas;
    let num_t = scenario.num_snapshots;
    let num_b = scenario.num_freq;
    let mut tensor = ChannelTensor::zeros(num_k, num_m, num_t, num_b);

    let positions = user_positions(scenario, seed);
    let mut rng_los = rng::substream(seed, STREAM_LOS);
    let k_factors_db: Vec<f64> = (0..num_k)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng_los);
            scenario
                .los
                .map(|l| l.mu_k_los + l.sigma_k_los * z)
                .unwrap_or(0.0)
        })
        .collect();

    let k_wave = 2.0 * std::f64::consts::PI * scenario.carrier_hz / C_LIGHT;
    let center = scenario.array_center();
    let antenna_x: Vec<f64> = (0..num_m).map(|i| scenario.antenna_x(i)).collect();
    let inv_sqrt_n = 1.0 / (scenario.clusters.n_mpc as f64).sqrt();
    let r_c = scenario.clusters.r_c;
    let t_c = scenario.clusters.t_c;
    let shaping = scenario.mpc_vr.enabled;
    let omni = matches!(scenario.pattern, crate::channel::scenario::AntennaPattern::Omni);

    let mut g_re = vec![0.0; num_b];
    let mut g_im = vec![0.0; num_b];
    let block = num_t * num_m * num_b;
    let mut los_re = vec![0.0; block];
    let mut los_im = vec![0.0; block];

    for k in 0..num_k {
        let user_base = k * block;
        if scenario.los.is_some() {
            los_re.fill(0.0);
            los_im.fill(0.0);
        }
        for t in 0..num_t {
            let u = positions[k * num_t + t];
            for (cluster, field) in placed.clusters.iter().zip(&fields) {
                let act = activation(dist(u, cluster.ms_vr_center), r_c, t_c);
                if act <= 0.0 {
                    continue;
                }
                let base_amp = cluster.amplitude * act * inv_sqrt_n;
                for l in 0..cluster.bs_points.len() {
                    let gain = if shaping {
                        let w = cluster.mpc_vr_width[l];
                        let dx = u[0] - cluster.mpc_vr_center[l][0];
                        let dy = u[1] - cluster.mpc_vr_center[l][1];
                        (-(dx * dx + dy * dy) / (2.0 * w * w)).exp()
                    } else {
                        1.0
                    };
                    if shaping && gain < GAIN_SKIP {
                        continue;
                    }
                    let s_ms = cluster.ms_points[l];
                    let pat = if omni {
                        1.0
                    } else {
                        scenario
                            .pattern
                            .amplitude((s_ms[1] - u[1]).atan2(s_ms[0] - u[0]))
                    };
                    let scale = base_amp * gain * pat;
                    if scale == 0.0 {
                        continue;
                    }
                    let d_ms = dist(u, s_ms);
                    let extra = cluster.link_extra_m + cluster.mpc_extra_m[l];
                    let tau = (field.ref_dist[l] + extra + d_ms) / C_LIGHT;
                    let phase_ms = -k_wave * (d_ms + extra);
                    let (sin_ms, cos_ms) = phase_ms.sin_cos();
                    let (wr, wi) = cluster.mpc_weight[l];
                    let c_re = scale * (wr * cos_ms - wi * sin_ms);
                    let c_im = scale * (wr * sin_ms + wi * cos_ms);
                    fill_freq_phasors(scenario, tau, &mut g_re, &mut g_im);
                    let lbase = l * num_m;
                    for m in 0..num_m {
                        let a_re = field.phasor_re[lbase + m];
                        let a_im = field.phasor_im[lbase + m];
                        if a_re == 0.0 && a_im == 0.0 {
                            continue;
                        }
                        let pr = c_re * a_re - c_im * a_im;
                        let pi = c_re * a_im + c_im * a_re;
                        let base = user_base + (t * num_m + m) * num_b;
                        for bb in 0..num_b {
                            tensor.re[base + bb] += pr * g_re[bb] - pi * g_im[bb];
                            tensor.im[base + bb] += pr * g_im[bb] + pi * g_re[bb];
                        }
                    }
                }
            }
            if let Some(los) = &scenario.los {
                let act_l = activation(dist(u, placed.los_center), los.r_l, los.t_l);
                if act_l > 0.0 {
                    let tau = dist(center, u) / C_LIGHT;
                    fill_freq_phasors(scenario, tau, &mut g_re, &mut g_im);
                    for m in 0..num_m {
                        let d = dist([antenna_x[m], 0.0], u);
                        let phase = -k_wave * d;
                        let (s, c) = phase.sin_cos();
                        let pr = act_l * c;
                        let pi = act_l * s;
                        let base = (t * num_m + m) * num_b;
                        for bb in 0..num_b {
                            los_re[base + bb] += pr * g_re[bb] - pi * g_im[bb];
                            los_im[base + bb] += pr * g_im[bb] + pi * g_re[bb];
                        }
                    }
                }
            }
        }
        if scenario.los.is_some() {
            let e_unit: f64 = los_re
                .iter()
                .zip(&los_im)
                .map(|(r, i)| r * r + i * i)
                .sum();
            if e_unit > 0.0 {
                let e_scat = tensor.user_energy(k);
                let k_lin = 10f64.powf(k_factors_db[k] / 10.0);
                let beta = if e_scat > 0.0 {
                    (k_lin * e_scat / e_unit).sqrt()
                } else {
                    1.0
                };
                for i in 0..block {
                    tensor.re[user_base + i] += beta * los_re[i];
                    tensor.im[user_base + i] += beta * los_im[i];
                }
            }
        }
        if normalize {
            let energy = tensor.user_energy(k);
            if energy > 0.0 {
                let scale = ((num_m * num_t * num_b) as f64 / energy).sqrt();
                for i in user_base..user_base + block {
                    tensor.re[i] *= scale;
                    tensor.im[i] *= scale;
                }
            }
        }
    }
    Ok(tensor)
}
