//! Condition-number statistics of synthesized channels.
//!
//! For each (snapshot, frequency) pair the `K x M` user-by-antenna slice
//! is reduced to its singular values; the dB condition number
//! `20 log10(sigma_1 / sigma_K)` measures how separable the users are.
//! Rank-deficient slices are recorded as infinite and excluded from the
//! averages, with a count.

use serde::{Deserialize, Serialize};

use crate::channel::scenario::ChannelScenario;
use crate::channel::synth::{synthesize, ChannelTensor};
use crate::error::{Error, Result};
use crate::rng;

/// Per-slice condition numbers with their summary statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KappaSummary {
    /// `kappa_dB` per (snapshot, frequency) pair, snapshot-major;
    /// rank-deficient slices appear as `inf`.
    pub kappa_db: Vec<f64>,
    /// Mean over the finite values (the dB-average condition number).
    pub mean_db: f64,
    /// Median over the finite values.
    pub median_db: f64,
    /// Number of rank-deficient slices.
    pub infinite_count: usize,
    /// Number of finite slices.
    pub finite_count: usize,
}

/// Median of a sample; infinite when the sample is empty.
pub(crate) fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return f64::INFINITY;
    }
    values.sort_by(|a, b| a.total_cmp(b));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Computes the per-slice dB condition numbers of a channel tensor.
///
/// Requires at least as many antennas as users, so every slice can have
/// full row rank.
pub fn condition_number_db(tensor: &ChannelTensor) -> Result<KappaSummary> {
    let (k, m, t, b) = tensor.dims();
    if k > m {
        return Err(Error::InvalidParameter(format!(
            "condition numbers need K <= M, got K = {k}, M = {m}"
        )));
    }
    let mut kappa_db = Vec::with_capacity(t * b);
    let mut infinite = 0usize;
    for snap in 0..t {
        for bin in 0..b {
            let slice = tensor.slice_matrix(snap, bin);
            let svd = slice.svd(false, false);
            let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
            sv.sort_by(|a, b| b.total_cmp(a));
            let s1 = sv[0];
            let sk = sv[k - 1];
            if sk > 0.0 && s1.is_finite() && (s1 / sk).is_finite() {
                kappa_db.push(20.0 * (s1 / sk).log10());
            } else {
                kappa_db.push(f64::INFINITY);
                infinite += 1;
            }
        }
    }
    let mut finite: Vec<f64> = kappa_db.iter().copied().filter(|v| v.is_finite()).collect();
    let finite_count = finite.len();
    let mean_db = if finite.is_empty() {
        f64::INFINITY
    } else {
        finite.iter().sum::<f64>() / finite.len() as f64
    };
    let median_db = median(&mut finite);
    Ok(KappaSummary {
        kappa_db,
        mean_db,
        median_db,
        infinite_count: infinite,
        finite_count,
    })
}

/// Pooled condition-number comparison of a scenario with component-disc
/// shaping on versus off, over paired seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainToggleReport {
    pub runs: usize,
    pub median_on_db: f64,
    pub median_off_db: f64,
    /// `median_off - median_on`.
    pub median_gap_db: f64,
    pub mean_on_db: f64,
    pub mean_off_db: f64,
    pub infinite_on: usize,
    pub infinite_off: usize,
    /// All finite per-slice values, pooled across runs.
    pub values_on_db: Vec<f64>,
    pub values_off_db: Vec<f64>,
}

/// Synthesizes `runs` paired realizations of the scenario with the
/// component-disc shaping enabled and disabled, pooling the per-slice
/// condition numbers.
pub fn run_gain_toggle_experiment(
    scenario: &ChannelScenario,
    runs: usize,
    seed: u64,
) -> Result<GainToggleReport> {
    if runs == 0 {
        return Err(Error::InvalidParameter("need at least one run".into()));
    }
    let mut on = scenario.clone();
    on.mpc_vr.enabled = true;
    let mut off = scenario.clone();
    off.mpc_vr.enabled = false;
    // The OFF arm is the unextended model: without per-component discs the
    // cluster carries its effective component count directly, rather than
    // the inflated pool the disc shaping thins back down.
    if let Some(n_eff) = scenario.mpc_vr.n_mpc_eff {
        off.clusters.n_mpc = (n_eff.round() as u64).max(1);
    }
    let mut values_on = Vec::new();
    let mut values_off = Vec::new();
    let mut infinite_on = 0;
    let mut infinite_off = 0;
    for r in 0..runs {
        let run_seed = rng::derive_seed(seed, r as u64);
        let summary_on = condition_number_db(&synthesize(&on, run_seed)?)?;
        let summary_off = condition_number_db(&synthesize(&off, run_seed)?)?;
        infinite_on += summary_on.infinite_count;
        infinite_off += summary_off.infinite_count;
        values_on.extend(summary_on.kappa_db.iter().copied().filter(|v| v.is_finite()));
        values_off.extend(summary_off.kappa_db.iter().copied().filter(|v| v.is_finite()));
    }
    let mean = |v: &[f64]| {
        if v.is_empty() {
            f64::INFINITY
        } else {
            v.iter().sum::<f64>() / v.len() as f64
        }
    };
    let median_on_db = median(&mut values_on.clone());
    let median_off_db = median(&mut values_off.clone());
    Ok(GainToggleReport {
        runs,
        median_on_db,
        median_off_db,
        median_gap_db: median_off_db - median_on_db,
        mean_on_db: mean(&values_on),
        mean_off_db: mean(&values_off),
        infinite_on,
        infinite_off,
        values_on_db: values_on,
        values_off_db: values_off,
    })
}

/// One row of a shaping-gap sweep over user counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapRow {
    /// User count of this row.
    pub k: usize,
    /// dB-average condition number with shaping on / off, averaged over
    /// runs.
    pub mean_on_db: f64,
    pub mean_off_db: f64,
    /// Paired mean gap `off - on` over runs.
    pub gap_db: f64,
    /// Standard error of the paired gap.
    pub gap_se_db: f64,
    /// Runs with a finite paired gap.
    pub runs_used: usize,
}

/// For each user count, synthesizes paired shaping-on/off realizations of
/// the scenario and reports the gap in the dB-average condition number.
///
/// Pairing is by seed: both arms of one run share their placement and
/// user draws exactly, so the gap estimate is differenced noise-free.
pub fn run_gap_experiment(
    base: &ChannelScenario,
    k_list: &[usize],
    runs: usize,
    seed: u64,
) -> Result<Vec<GapRow>> {
    if runs == 0 || k_list.is_empty() {
        return Err(Error::InvalidParameter(
            "need at least one run and one user count".into(),
        ));
    }
    let mut rows = Vec::with_capacity(k_list.len());
    for (ki, &k) in k_list.iter().enumerate() {
        if k == 0 {
            return Err(Error::InvalidParameter("user counts must be positive".into()));
        }
        let mut on = base.clone();
        on.num_users = k;
        on.mpc_vr.enabled = true;
        let mut off = on.clone();
        off.mpc_vr.enabled = false;
        let mut gaps = Vec::with_capacity(runs);
        let mut sum_on = 0.0;
        let mut sum_off = 0.0;
        for r in 0..runs {
            let run_seed = rng::derive_seed(seed, (ki * runs + r) as u64);
            let kappa_on = condition_number_db(&synthesize(&on, run_seed)?)?.mean_db;
            let kappa_off = condition_number_db(&synthesize(&off, run_seed)?)?.mean_db;
            if kappa_on.is_finite() && kappa_off.is_finite() {
                gaps.push(kappa_off - kappa_on);
                sum_on += kappa_on;
                sum_off += kappa_off;
            }
        }
        let n = gaps.len();
        let (gap_db, gap_se_db) = if n == 0 {
            (f64::NAN, f64::INFINITY)
        } else {
            let mean = gaps.iter().sum::<f64>() / n as f64;
            let se = if n > 1 {
                let var =
                    gaps.iter().map(|g| (g - mean) * (g - mean)).sum::<f64>() / (n - 1) as f64;
                (var / n as f64).sqrt()
            } else {
                f64::INFINITY
            };
            (mean, se)
        };
        rows.push(GapRow {
            k,
            mean_on_db: if n > 0 { sum_on / n as f64 } else { f64::NAN },
            mean_off_db: if n > 0 { sum_off / n as f64 } else { f64::NAN },
            gap_db,
            gap_se_db,
            runs_used: n,
        });
    }
    Ok(rows)
}
