//! Batch experiment driver: reproduces the validation figures as
//! deterministic CSV/JSON artifacts.
//!
//! Every output file is a pure function of the experiment configuration
//! and seed, and carries both (the configuration as an FNV-1a hash) in
//! its header, so reruns can be verified byte for byte.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::bsvr::inference::sufficient_stats;
use crate::bsvr::process::{decompose_counts, generate_bsvrs_with, BsVrProcessParams};
use crate::channel::kappa::{condition_number_db, run_gain_toggle_experiment, run_gap_experiment};
use crate::channel::scenario::{
    twin_cluster_scenario, ChannelScenario, Route, UserPlacement,
};
use crate::channel::synth::synthesize;
use crate::error::{Error, Result};
use crate::harness::io::{fnv1a, render_curve_csv, render_pmf_csv, write_json, write_text};
use crate::harness::stats::{chi_square_gof, ecdf, ecdf_eval, poisson_mle};
use crate::harness::sweep::{burn_in_for, rmse_sweep};
use crate::lifetime::LifetimeDistribution;
use crate::mpc::chord::{default_chord_grid, default_radius_grid};
use crate::mpc::fit::{fit_lifetimes, fit_lognormal_to_pmf, LifetimeFitCase};
use crate::mpc::qp::solve_radius_weights;
use crate::numerics::poisson_pmf;
use crate::rng;

/// The figure experiments the driver can reproduce.
pub const FIGURE_IDS: &[&str] = &[
    "fig2-counts",
    "fig3-rmse",
    "fig4-lifetime-fit",
    "fig6-radius-fit",
    "fig5-bsvr-kappa",
    "fig7-indoor-kappa",
    "fig8-twin-sweep",
];

/// One sweep axis: a parameter name and the values it takes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepAxis {
    pub name: String,
    pub values: Vec<f64>,
}

/// A batch experiment request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Figure identifier, one of [`FIGURE_IDS`].
    pub id: String,
    /// Optional scenario file (TOML [`ChannelScenario`]) for the channel
    /// figures.
    pub config_path: Option<PathBuf>,
    /// Trial count override; each figure has its own default.
    pub trials: Option<usize>,
    /// Master seed.
    pub seed: u64,
    /// Output directory.
    pub out_dir: PathBuf,
    /// Sweep axes overriding the figure's default grid or scalars.
    pub sweep: Vec<SweepAxis>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if !FIGURE_IDS.contains(&self.id.as_str()) {
            return Err(Error::InvalidParameter(format!(
                "unknown figure id {:?}; expected one of {FIGURE_IDS:?}",
                self.id
            )));
        }
        if self.trials == Some(0) {
            return Err(Error::InvalidParameter(
                "trials must be at least 1".into(),
            ));
        }
        for axis in &self.sweep {
            if axis.values.is_empty() {
                return Err(Error::InvalidParameter(format!(
                    "sweep axis {:?} has no values",
                    axis.name
                )));
            }
            if axis.values.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "sweep axis {:?} has non-finite values",
                    axis.name
                )));
            }
        }
        Ok(())
    }

    /// Hash of everything that determines the output bytes (the output
    /// directory itself excluded, so relocated reruns stay comparable).
    pub fn config_hash(&self) -> u64 {
        let mut desc = format!("{}|seed={}|trials={:?}", self.id, self.seed, self.trials);
        for axis in &self.sweep {
            desc.push_str(&format!("|{}={:?}", axis.name, axis.values));
        }
        if let Some(path) = &self.config_path {
            let digest = std::fs::read(path).map(|b| fnv1a(&b)).unwrap_or(0);
            desc.push_str(&format!("|config_digest={digest:016x}"));
        }
        fnv1a(desc.as_bytes())
    }

    fn axis(&self, name: &str) -> Option<&[f64]> {
        self.sweep
            .iter()
            .find(|a| a.name == name)
            .map(|a| a.values.as_slice())
    }

    fn scalar(&self, name: &str, default: f64) -> f64 {
        self.axis(name).map_or(default, |v| v[0])
    }

    fn trials_or(&self, default: usize) -> usize {
        self.trials.unwrap_or(default)
    }

    fn comments(&self) -> Vec<(&'static str, String)> {
        vec![
            ("figure", self.id.clone()),
            ("config_hash", format!("{:016x}", self.config_hash())),
            ("seed", self.seed.to_string()),
        ]
    }

    fn provenance(&self) -> serde_json::Value {
        json!({
            "figure": self.id,
            "config_hash": format!("{:016x}", self.config_hash()),
            "seed": self.seed,
        })
    }

    fn scenario_or(&self, fallback: ChannelScenario) -> Result<ChannelScenario> {
        match &self.config_path {
            None => Ok(fallback),
            Some(path) => {
                let text = std::fs::read_to_string(path)?;
                let scenario: ChannelScenario = toml::from_str(&text)
                    .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
                scenario.validate()?;
                Ok(scenario)
            }
        }
    }
}

/// Runs one figure experiment, returning the files written.
pub fn run_figure(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    match cfg.id.as_str() {
        "fig2-counts" => fig2_counts(cfg),
        "fig3-rmse" => fig3_rmse(cfg),
        "fig4-lifetime-fit" => fig4_lifetime_fit(cfg),
        "fig6-radius-fit" => fig6_radius_fit(cfg),
        "fig5-bsvr-kappa" => fig5_bsvr_kappa(cfg),
        "fig7-indoor-kappa" => fig7_indoor_kappa(cfg),
        "fig8-twin-sweep" => fig8_twin_sweep(cfg),
        _ => unreachable!("validated above"),
    }
}

fn out_path(cfg: &ExperimentConfig, name: &str) -> PathBuf {
    cfg.out_dir.join(name)
}

fn write_csv_file(path: &Path, text: &str) -> Result<PathBuf> {
    write_text(path, text)?;
    Ok(path.to_path_buf())
}

/// Interval-count validation: simulates the birth-death process, compares
/// the empirical distributions of total/new/alive counts with Poisson
/// fits, and runs the goodness-of-fit test on the totals.
fn fig2_counts(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let lambda = cfg.scalar("lambda", 2.6);
    let scale = cfg.scalar("scale", 2.9);
    let window = cfg.scalar("window", 7.5);
    let delta0 = cfg.scalar("delta0", 0.23);
    let trials = cfg.trials_or(10_000);
    let lifetime = LifetimeDistribution::Exponential { scale };
    let params = BsVrProcessParams {
        lambda,
        lifetime,
        x1: 0.0,
        x2: window,
        delta0,
    };
    params.validate()?;
    let burn_in = burn_in_for(&lifetime, lambda);
    let mut totals = Vec::with_capacity(trials);
    let mut news = Vec::with_capacity(trials);
    let mut alives = Vec::with_capacity(trials);
    for t in 0..trials {
        let mut rng = rng::substream(cfg.seed, t as u64);
        let set = generate_bsvrs_with(&params, burn_in, &mut rng)?;
        let (n_new, n_alive) = decompose_counts(&set);
        totals.push(set.len() as u64);
        news.push(n_new);
        alives.push(n_alive);
    }
    let as_f64 = |v: &[u64]| v.iter().map(|c| *c as f64).collect::<Vec<_>>();
    let steps_total = ecdf(&as_f64(&totals))?;
    let steps_new = ecdf(&as_f64(&news))?;
    let steps_alive = ecdf(&as_f64(&alives))?;
    let mean_total = poisson_mle(&totals)?;
    let mean_new = poisson_mle(&news)?;
    let mean_alive = poisson_mle(&alives)?;
    let kmax = totals.iter().copied().max().unwrap_or(0).max(2) + 2;

    let mut rows = Vec::new();
    let mut fit_cdf = [0.0f64; 3];
    for k in 0..=kmax {
        let x = k as f64;
        fit_cdf[0] += poisson_pmf(k, mean_total);
        fit_cdf[1] += poisson_pmf(k, mean_new);
        fit_cdf[2] += poisson_pmf(k, mean_alive);
        rows.push(vec![
            x,
            ecdf_eval(&steps_total, x),
            ecdf_eval(&steps_new, x),
            ecdf_eval(&steps_alive, x),
            fit_cdf[0],
            fit_cdf[1],
            fit_cdf[2],
        ]);
    }
    let csv = render_curve_csv(
        &cfg.comments(),
        &[
            "count",
            "total_ecdf",
            "new_ecdf",
            "alive_ecdf",
            "total_poisson_cdf",
            "new_poisson_cdf",
            "alive_poisson_cdf",
        ],
        &rows,
    );
    let csv_path = write_csv_file(&out_path(cfg, "fig2-counts.csv"), &csv)?;

    let gof = chi_square_gof(&totals, mean_total, 0.05, true)?;
    let mut summary = cfg.provenance();
    let obj = summary.as_object_mut().expect("object");
    obj.insert("trials".into(), json!(trials));
    obj.insert(
        "params".into(),
        json!({"lambda": lambda, "scale": scale, "window": window, "delta0": delta0}),
    );
    obj.insert(
        "fitted_means".into(),
        json!({"total": mean_total, "new": mean_new, "alive": mean_alive}),
    );
    obj.insert("gof_total".into(), serde_json::to_value(gof).unwrap());
    let json_path = out_path(cfg, "fig2-counts.json");
    write_json(&json_path, &summary)?;
    Ok(vec![csv_path, json_path])
}

/// Estimator RMSE sweep against the information bound.
fn fig3_rmse(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let default_c = [5.0, 10.0, 15.0, 20.0, 25.0];
    let default_r = [0.5, 1.0, 2.0];
    let cs = cfg.axis("lambda0_l0").unwrap_or(&default_c);
    let rs = cfg.axis("ratio").unwrap_or(&default_r);
    let trials = cfg.trials_or(10_000);
    let points = rmse_sweep(cs, rs, trials, cfg.seed)?;
    let rows: Vec<Vec<f64>> = points
        .iter()
        .map(|p| {
            vec![
                p.lambda0_l0,
                p.ratio,
                p.lambda,
                p.scale,
                p.mle_rel_rmse_lambda,
                p.mle_rel_rmse_scale,
                p.mome_rel_rmse_lambda,
                p.mome_rel_rmse_scale,
                p.crlb_rel,
                p.mean_count,
                p.class_proportions[0],
                p.class_proportions[1],
                p.class_proportions[2],
                p.class_proportions[3],
                p.mle_failures as f64,
                p.mome_failures as f64,
            ]
        })
        .collect();
    let csv = render_curve_csv(
        &cfg.comments(),
        &[
            "lambda0_l0",
            "ratio",
            "lambda",
            "scale",
            "mle_rel_rmse_lambda",
            "mle_rel_rmse_scale",
            "mome_rel_rmse_lambda",
            "mome_rel_rmse_scale",
            "crlb_rel",
            "mean_count",
            "p_interior",
            "p_right_censored",
            "p_left_censored",
            "p_doubly_censored",
            "mle_failures",
            "mome_failures",
        ],
        &rows,
    );
    let csv_path = write_csv_file(&out_path(cfg, "fig3-rmse.csv"), &csv)?;
    let mut summary = cfg.provenance();
    let obj = summary.as_object_mut().expect("object");
    obj.insert("trials".into(), json!(trials));
    obj.insert("points".into(), serde_json::to_value(&points).unwrap());
    let json_path = out_path(cfg, "fig3-rmse.json");
    write_json(&json_path, &summary)?;
    Ok(vec![csv_path, json_path])
}

/// Lifetime-law comparison on one synthetic interval dataset.
fn fig4_lifetime_fit(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let lambda = cfg.scalar("lambda", 171.6);
    let mu = cfg.scalar("mu", -16.92);
    let sigma2 = cfg.scalar("sigma2", 94.60);
    let window = cfg.scalar("window", 15.0);
    let delta0 = cfg.scalar("delta0", 0.075);
    let lifetime = LifetimeDistribution::LognormalDb { mu, sigma2 };
    let params = BsVrProcessParams {
        lambda,
        lifetime,
        x1: 0.0,
        x2: window,
        delta0,
    };
    params.validate()?;
    let mut rng = rng::substream(cfg.seed, 0);
    let set = generate_bsvrs_with(&params, burn_in_for(&lifetime, lambda), &mut rng)?;
    let stats = sufficient_stats(&set);

    let cases = [
        LifetimeFitCase::Exponential,
        LifetimeFitCase::Lognormal,
        LifetimeFitCase::TruncatedLognormal,
    ];
    let fits = cases
        .iter()
        .map(|case| fit_lifetimes(&set, *case))
        .collect::<Result<Vec<_>>>()?;

    let mut lengths: Vec<f64> = set.observed_lengths().collect();
    lengths.sort_by(f64::total_cmp);
    let steps = ecdf(&lengths)?;
    let rows: Vec<Vec<f64>> = steps
        .iter()
        .map(|(y, c)| {
            let mut row = vec![*y, *c];
            row.extend(fits.iter().map(|f| f.distribution.cdf(*y)));
            row
        })
        .collect();
    let csv = render_curve_csv(
        &cfg.comments(),
        &[
            "length",
            "ecdf",
            "exponential_cdf",
            "lognormal_cdf",
            "truncated_lognormal_cdf",
        ],
        &rows,
    );
    let csv_path = write_csv_file(&out_path(cfg, "fig4-lifetime-fit.csv"), &csv)?;

    let mut summary = cfg.provenance();
    let obj = summary.as_object_mut().expect("object");
    obj.insert(
        "params".into(),
        json!({"lambda": lambda, "mu": mu, "sigma2": sigma2, "window": window, "delta0": delta0}),
    );
    obj.insert(
        "data".into(),
        json!({"n": stats.n, "nu": stats.nu, "counts": set.counts()}),
    );
    obj.insert("fits".into(), serde_json::to_value(&fits).unwrap());
    let json_path = out_path(cfg, "fig4-lifetime-fit.json");
    write_json(&json_path, &summary)?;
    Ok(vec![csv_path, json_path])
}

/// Radius-distribution recovery from the fitted lifetime law.
fn fig6_radius_fit(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let mu = cfg.scalar("mu", -16.92);
    let sigma2 = cfg.scalar("sigma2", 94.60);
    let min_fit_radius = cfg.scalar("min_fit_radius", 0.025);
    let lifetime = LifetimeDistribution::LognormalDb { mu, sigma2 };
    lifetime.validate()?;
    let chord_grid = default_chord_grid();
    let radii = default_radius_grid();
    let target: Vec<f64> = chord_grid.iter().map(|y| lifetime.cdf(*y)).collect();
    let solution = solve_radius_weights(&chord_grid, &target, &radii)?;
    let fit = fit_lognormal_to_pmf(&solution.pmf, min_fit_radius)?;

    let pmf_csv = render_pmf_csv(&cfg.comments(), &solution.pmf);
    let pmf_path = write_csv_file(&out_path(cfg, "fig6-radius-pmf.csv"), &pmf_csv)?;

    let cumulative = solution.pmf.cumulative();
    let fitted = LifetimeDistribution::LognormalDb {
        mu: fit.mu,
        sigma2: fit.sigma2,
    };
    let rows: Vec<Vec<f64>> = solution
        .pmf
        .radii()
        .iter()
        .zip(&cumulative)
        .map(|(r, c)| vec![*r, *c, fitted.cdf(*r)])
        .collect();
    let cum_csv = render_curve_csv(
        &cfg.comments(),
        &["radius", "cumulative_weight", "fitted_lognormal_cdf"],
        &rows,
    );
    let cum_path = write_csv_file(&out_path(cfg, "fig6-radius-cumulative.csv"), &cum_csv)?;

    let mut summary = cfg.provenance();
    let obj = summary.as_object_mut().expect("object");
    obj.insert(
        "target".into(),
        json!({"mu": mu, "sigma2": sigma2, "chord_points": chord_grid.len(), "radius_points": radii.len()}),
    );
    obj.insert(
        "solution".into(),
        json!({
            "rmse": solution.rmse,
            "objective": solution.objective,
            "kkt_residual": solution.kkt_residual,
            "iterations": solution.iterations,
            "converged": solution.converged,
        }),
    );
    obj.insert(
        "lognormal_fit".into(),
        json!({"mu": fit.mu, "sigma2": fit.sigma2, "rmse": fit.rmse, "min_radius": min_fit_radius}),
    );
    let json_path = out_path(cfg, "fig6-radius-fit.json");
    write_json(&json_path, &summary)?;
    Ok(vec![pmf_path, cum_path, json_path])
}

/// Condition-number statistics of the wide-array scenario as the BS-VR
/// intensity and the user distance vary at fixed angular separation.
fn fig5_bsvr_kappa(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let default_lambda = [1.5, 6.0];
    let default_distance = [15.0, 60.0];
    let lambdas = cfg.axis("lambda").unwrap_or(&default_lambda);
    let distances = cfg.axis("distance").unwrap_or(&default_distance);
    let separation_deg = cfg.scalar("separation_deg", 10.0);
    let runs = cfg.trials_or(10);
    let base = cfg.scenario_or(crate::channel::scenario::outdoor_vla())?;

    let mut curve_rows: Vec<Vec<f64>> = Vec::new();
    let mut combos = Vec::new();
    for (li, &lambda) in lambdas.iter().enumerate() {
        for (di, &distance) in distances.iter().enumerate() {
            let mut scenario = base.clone();
            scenario.num_users = 2;
            scenario.num_snapshots = 1;
            scenario.num_freq = 17;
            scenario.array.num_antennas = 32;
            scenario.bs_vr.lambda = lambda;
            let center = scenario.array_center();
            let half = (separation_deg / 2.0).to_radians();
            let angle = std::f64::consts::FRAC_PI_2;
            scenario.users = UserPlacement::Routes {
                routes: [angle - half, angle + half]
                    .iter()
                    .map(|phi| Route {
                        start: [
                            center[0] + distance * phi.cos(),
                            center[1] + distance * phi.sin(),
                        ],
                        step: [0.0, 0.0],
                    })
                    .collect(),
            };
            scenario.validate()?;
            let combo_seed = rng::derive_seed(cfg.seed, (li * distances.len() + di) as u64);
            let mut pooled = Vec::new();
            let mut infinite = 0usize;
            for r in 0..runs {
                let tensor = synthesize(&scenario, rng::derive_seed(combo_seed, r as u64))?;
                let summary = condition_number_db(&tensor)?;
                infinite += summary.infinite_count;
                pooled.extend(summary.kappa_db.into_iter().filter(|v| v.is_finite()));
            }
            let steps = ecdf(&pooled)?;
            for (v, c) in &steps {
                curve_rows.push(vec![lambda, distance, *v, *c]);
            }
            let mean_db = pooled.iter().sum::<f64>() / pooled.len() as f64;
            let mut sorted = pooled.clone();
            let median_db = crate::channel::kappa::median(&mut sorted);
            combos.push(json!({
                "lambda": lambda,
                "distance": distance,
                "median_db": median_db,
                "mean_db": mean_db,
                "finite": pooled.len(),
                "infinite": infinite,
            }));
        }
    }
    let csv = render_curve_csv(
        &cfg.comments(),
        &["lambda", "distance", "kappa_db", "cumulative"],
        &curve_rows,
    );
    let csv_path = write_csv_file(&out_path(cfg, "fig5-bsvr-kappa.csv"), &csv)?;
    let mut summary = cfg.provenance();
    let obj = summary.as_object_mut().expect("object");
    obj.insert("runs".into(), json!(runs));
    obj.insert("separation_deg".into(), json!(separation_deg));
    obj.insert("combos".into(), json!(combos));
    let json_path = out_path(cfg, "fig5-bsvr-kappa.json");
    write_json(&json_path, &summary)?;
    Ok(vec![csv_path, json_path])
}

/// Component-disc shaping effect on the indoor scenario's condition
/// numbers.
fn fig7_indoor_kappa(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let runs = cfg.trials_or(10);
    let scenario = cfg.scenario_or(crate::channel::scenario::indoor_cla())?;
    let report = run_gain_toggle_experiment(&scenario, runs, cfg.seed)?;

    let mut rows = Vec::new();
    for (flag, values) in [(1.0, &report.values_on_db), (0.0, &report.values_off_db)] {
        let steps = ecdf(values)?;
        for (v, c) in steps {
            rows.push(vec![flag, v, c]);
        }
    }
    let csv = render_curve_csv(
        &cfg.comments(),
        &["shaping_on", "kappa_db", "cumulative"],
        &rows,
    );
    let csv_path = write_csv_file(&out_path(cfg, "fig7-indoor-kappa.csv"), &csv)?;

    let mut summary = cfg.provenance();
    let obj = summary.as_object_mut().expect("object");
    obj.insert("runs".into(), json!(report.runs));
    obj.insert(
        "kappa".into(),
        json!({
            "median_on_db": report.median_on_db,
            "median_off_db": report.median_off_db,
            "median_gap_db": report.median_gap_db,
            "mean_on_db": report.mean_on_db,
            "mean_off_db": report.mean_off_db,
            "infinite_on": report.infinite_on,
            "infinite_off": report.infinite_off,
        }),
    );
    let json_path = out_path(cfg, "fig7-indoor-kappa.json");
    write_json(&json_path, &summary)?;
    Ok(vec![csv_path, json_path])
}

/// Twin-cluster shaping gap as the user count grows.
fn fig8_twin_sweep(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let default_k = [2.0, 6.0, 10.0, 14.0, 18.0];
    let ks = cfg.axis("k").unwrap_or(&default_k);
    let omega_bs = cfg.scalar("omega_bs", 60.0);
    let omega_ms = cfg.scalar("omega_ms", 30.0);
    let antennas = cfg.scalar("m", 128.0) as usize;
    let snapshots = cfg.scalar("t", 50.0) as usize;
    let n_mpc_eff = cfg.scalar("n_mpc_eff", 100.0);
    let runs = cfg.trials_or(4);
    let k_list: Vec<usize> = ks.iter().map(|k| *k as usize).collect();
    let mut base = twin_cluster_scenario(omega_ms, omega_bs, 9, antennas, n_mpc_eff)?;
    base.num_snapshots = snapshots;
    let rows_data = run_gap_experiment(&base, &k_list, runs, cfg.seed)?;

    let rows: Vec<Vec<f64>> = rows_data
        .iter()
        .map(|r| {
            vec![
                r.k as f64,
                r.mean_on_db,
                r.mean_off_db,
                r.gap_db,
                r.gap_se_db,
                r.runs_used as f64,
            ]
        })
        .collect();
    let csv = render_curve_csv(
        &cfg.comments(),
        &[
            "k",
            "mean_on_db",
            "mean_off_db",
            "gap_db",
            "gap_se_db",
            "runs_used",
        ],
        &rows,
    );
    let csv_path = write_csv_file(&out_path(cfg, "fig8-twin-sweep.csv"), &csv)?;

    let mut summary = cfg.provenance();
    let obj = summary.as_object_mut().expect("object");
    obj.insert(
        "scenario".into(),
        json!({
            "omega_bs_deg": omega_bs,
            "omega_ms_deg": omega_ms,
            "antennas": antennas,
            "snapshots": snapshots,
            "n_mpc_eff": n_mpc_eff,
            "runs": runs,
        }),
    );
    obj.insert("rows".into(), serde_json::to_value(&rows_data).unwrap());
    let json_path = out_path(cfg, "fig8-twin-sweep.json");
    write_json(&json_path, &summary)?;
    Ok(vec![csv_path, json_path])
}
