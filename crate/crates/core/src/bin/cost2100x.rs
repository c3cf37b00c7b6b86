//! Command-line front end: simulation, estimation, fitting, correlation
//! curves, channel synthesis, and batch figure reproduction.
//!
//! Every command is a pure function of its flags and seed. On success the
//! exit code is 0 and a JSON description of the results goes to stdout;
//! on failure the exit code is nonzero and a machine-readable error
//! object `{"error":{"kind":..,"message":..}}` goes to stderr.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use cost2100x_core::bsvr::{
    estimate_with_bound, fim_crlb, generate_bsvrs_with, mome, sufficient_stats,
    BsVrProcessParams, ObservedIntervalSet,
};
use cost2100x_core::channel::{
    condition_number_db, synthesize, ChannelScenario, ChannelTensor,
};
use cost2100x_core::correlation::{acf_bs, acf_circular, acf_circular_mixture};
use cost2100x_core::error::{Error, Result};
use cost2100x_core::harness::figures::{run_figure, ExperimentConfig, SweepAxis};
use cost2100x_core::harness::io::{
    read_intervals_csv, render_curve_csv, render_pmf_csv, write_intervals_csv, write_json,
    write_text,
};
use cost2100x_core::harness::stats::ecdf;
use cost2100x_core::harness::sweep::burn_in_for;
use cost2100x_core::lifetime::LifetimeDistribution;
use cost2100x_core::mpc::chord::{default_chord_grid, default_radius_grid, RadiusDistribution};
use cost2100x_core::mpc::fit::{fit_lifetimes, fit_lognormal_to_pmf, LifetimeFitCase};
use cost2100x_core::mpc::qp::solve_radius_weights;
use cost2100x_core::rng;

#[derive(Parser)]
#[command(
    name = "cost2100x",
    version,
    about = "Visibility-region channel model tools: interval-process simulation, censored inference, radius recovery, and massive MIMO synthesis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct CommonOpts {
    /// Input file: scenario TOML for channel commands, interval CSV for
    /// estimation commands.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Master random seed.
    #[arg(long, value_name = "U64", default_value_t = 0)]
    seed: u64,
    /// Trials / runs / realizations, where the command repeats work.
    #[arg(long, value_name = "N")]
    trials: Option<usize>,
    /// Output directory.
    #[arg(long, value_name = "DIR", default_value = ".")]
    out: PathBuf,
    /// Format of the primary data artifact.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate censored visibility-interval realizations along the array.
    SimulateBsvr {
        #[command(flatten)]
        common: CommonOpts,
        /// Birth intensity per meter (ignored when --config is given).
        #[arg(long, default_value_t = 2.6)]
        lambda: f64,
        /// Mean interval length in meters (exponential lifetimes).
        #[arg(long, default_value_t = 2.9)]
        scale: f64,
        /// Observation window length in meters.
        #[arg(long, default_value_t = 7.5)]
        window: f64,
        /// Resolution limit below which observed intervals are dropped.
        #[arg(long, default_value_t = 0.0)]
        delta0: f64,
    },
    /// Fit the censored exponential model to an interval CSV and report
    /// the estimates with their information bounds.
    Estimate {
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Evaluate the Fisher information and parameter variance bounds at a
    /// given model point.
    Crlb {
        #[command(flatten)]
        common: CommonOpts,
        /// Birth intensity per meter.
        #[arg(long, default_value_t = 2.5)]
        lambda: f64,
        /// Mean interval length in meters.
        #[arg(long, default_value_t = 10.0)]
        scale: f64,
        /// Reduced window length in meters.
        #[arg(long, default_value_t = 10.0)]
        l0: f64,
        /// Resolution limit in meters.
        #[arg(long, default_value_t = 0.0)]
        delta0: f64,
        /// Independent equal windows pooled into one experiment.
        #[arg(long, default_value_t = 1)]
        windows: u64,
    },
    /// Fit exponential, lognormal, and truncated-lognormal lifetime laws
    /// to an interval CSV and compare them against the empirical CDF.
    FitLifetimes {
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Recover the disc-radius distribution whose chord mixture matches a
    /// lognormal lifetime law, then summarize it as a dB-lognormal.
    FitRadii {
        #[command(flatten)]
        common: CommonOpts,
        /// dB-domain location of the target lifetime law.
        #[arg(long, default_value_t = -16.92)]
        mu: f64,
        /// dB-domain variance of the target lifetime law.
        #[arg(long, default_value_t = 94.60)]
        sigma2: f64,
        /// Smallest radius included in the lognormal summary fit.
        #[arg(long, default_value_t = 0.025)]
        min_fit_radius: f64,
    },
    /// Emit spatial autocorrelation curves for a scenario.
    Acf {
        #[command(flatten)]
        common: CommonOpts,
        /// Largest lag in meters (default: scenario-derived).
        #[arg(long)]
        max_lag: Option<f64>,
        /// Number of lag samples.
        #[arg(long, default_value_t = 101)]
        points: usize,
    },
    /// Synthesize a channel tensor for a scenario and write it as binary.
    Synthesize {
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Condition-number statistics of a synthesized channel (scenario
    /// TOML or channel binary as input).
    ConditionNumber {
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Reproduce a validation figure as CSV + JSON artifacts.
    RunFigure {
        /// Figure identifier (fig2-counts, fig3-rmse, fig4-lifetime-fit,
        /// fig6-radius-fit, fig5-bsvr-kappa, fig7-indoor-kappa,
        /// fig8-twin-sweep).
        id: String,
        #[command(flatten)]
        common: CommonOpts,
        /// Sweep axis override, `name=v1,v2,...`; repeatable.
        #[arg(long = "axis", value_name = "NAME=V1,V2,...")]
        axes: Vec<String>,
    },
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{err}");
                    std::process::exit(0);
                }
                _ => {
                    eprintln!(
                        "{}",
                        json!({"error": {"kind": "invalid_parameter", "message": err.to_string()}})
                    );
                    std::process::exit(2);
                }
            }
        }
    };
    match run(cli) {
        Ok(()) => {}
        Err(e) => {
            eprintln!(
                "{}",
                json!({"error": {"kind": e.kind(), "message": e.to_string()}})
            );
            std::process::exit(1);
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::SimulateBsvr {
            common,
            lambda,
            scale,
            window,
            delta0,
        } => simulate_bsvr(&common, lambda, scale, window, delta0),
        Command::Estimate { common } => estimate(&common),
        Command::Crlb {
            common,
            lambda,
            scale,
            l0,
            delta0,
            windows,
        } => crlb(&common, lambda, scale, l0, delta0, windows),
        Command::FitLifetimes { common } => fit_lifetimes_cmd(&common),
        Command::FitRadii {
            common,
            mu,
            sigma2,
            min_fit_radius,
        } => fit_radii(&common, mu, sigma2, min_fit_radius),
        Command::Acf {
            common,
            max_lag,
            points,
        } => acf_cmd(&common, max_lag, points),
        Command::Synthesize { common } => synthesize_cmd(&common),
        Command::ConditionNumber { common } => condition_number_cmd(&common),
        Command::RunFigure { id, common, axes } => run_figure_cmd(&id, &common, &axes),
    }
}

fn load_scenario(config: &Option<PathBuf>) -> Result<ChannelScenario> {
    match config {
        None => Ok(cost2100x_core::channel::scenario::indoor_cla()),
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            let scenario: ChannelScenario = toml::from_str(&text)
                .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
            scenario.validate()?;
            Ok(scenario)
        }
    }
}

fn load_intervals(config: &Option<PathBuf>) -> Result<ObservedIntervalSet> {
    let path = config.as_ref().ok_or_else(|| {
        Error::InvalidParameter("this command needs --config pointing at an interval CSV".into())
    })?;
    let file = std::fs::File::open(path)?;
    read_intervals_csv(std::io::BufReader::new(file))
}

fn emit(value: &serde_json::Value) {
    println!("{value:#}");
}

fn interval_set_json(set: &ObservedIntervalSet) -> serde_json::Value {
    let classes: Vec<&str> = (0..set.len())
        .map(|i| cost2100x_core::harness::io::class_label(set.class_of(i)))
        .collect();
    json!({
        "window": {"x1": set.window().0, "x2": set.window().1, "delta0": set.delta0()},
        "intervals": set.intervals(),
        "classes": classes,
        "counts": set.counts(),
    })
}

fn simulate_bsvr(
    common: &CommonOpts,
    lambda: f64,
    scale: f64,
    window: f64,
    delta0: f64,
) -> Result<()> {
    let (lambda, scale, window, delta0) = match &common.config {
        Some(_) => {
            let scenario = load_scenario(&common.config)?;
            if !scenario.bs_vr.enabled {
                return Err(Error::InvalidScenario(
                    "scenario has BS-side visibility intervals disabled".into(),
                ));
            }
            (
                scenario.bs_vr.lambda,
                scenario.bs_vr.l_bs,
                scenario.array_length(),
                0.0,
            )
        }
        None => (lambda, scale, window, delta0),
    };
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
    let trials = common.trials.unwrap_or(1);
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let mut written = Vec::new();
    for t in 0..trials {
        let mut rng = rng::substream(common.seed, t as u64);
        let set = generate_bsvrs_with(&params, burn_in, &mut rng)?;
        let name = if trials == 1 {
            "intervals".to_string()
        } else {
            format!("intervals-{t:04}")
        };
        let path = match common.format {
            Format::Csv => {
                let mut bytes = Vec::new();
                write_intervals_csv(&mut bytes, &set)?;
                let path = common.out.join(format!("{name}.csv"));
                write_text(&path, std::str::from_utf8(&bytes).expect("ascii"))?;
                path
            }
            Format::Json => {
                let path = common.out.join(format!("{name}.json"));
                write_json(&path, &interval_set_json(&set))?;
                path
            }
        };
        written.push(path.display().to_string());
    }
    emit(&json!({
        "command": "simulate-bsvr",
        "params": {"lambda": lambda, "scale": scale, "window": window, "delta0": delta0},
        "seed": common.seed,
        "trials": trials,
        "written": written,
    }));
    Ok(())
}

fn estimate(common: &CommonOpts) -> Result<()> {
    let set = load_intervals(&common.config)?;
    let stats = sufficient_stats(&set);
    let fit = estimate_with_bound(&stats)?;
    let mome_fit = mome(&stats)
        .map(|(lambda, scale)| json!({"lambda": lambda, "scale": scale}))
        .unwrap_or(serde_json::Value::Null);
    let record = json!({
        "command": "estimate",
        "data": {
            "n": stats.n,
            "nu": stats.nu,
            "shortened_sum": stats.shortened_sum,
            "reduced_window": stats.reduced_window,
            "delta0": stats.delta0,
            "counts": set.counts(),
        },
        "mle": fit,
        "mome": mome_fit,
    });
    let path = common.out.join("estimate.json");
    write_json(&path, &record)?;
    emit(&record);
    Ok(())
}

fn crlb(
    common: &CommonOpts,
    lambda: f64,
    scale: f64,
    l0: f64,
    delta0: f64,
    windows: u64,
) -> Result<()> {
    let info = fim_crlb(lambda, scale, l0, delta0)?.with_replicates(windows);
    let record = json!({
        "command": "crlb",
        "params": {"lambda": lambda, "scale": scale, "l0": l0, "delta0": delta0, "windows": windows},
        "fisher_information": info.matrix,
        "crlb_lambda": info.crlb_lambda,
        "crlb_scale": info.crlb_scale,
        "normalized_crlb": info.normalized_crlb,
        "relative_rmse_floor": info.relative_rmse_floor(),
    });
    let path = common.out.join("crlb.json");
    write_json(&path, &record)?;
    emit(&record);
    Ok(())
}

fn fit_lifetimes_cmd(common: &CommonOpts) -> Result<()> {
    let set = load_intervals(&common.config)?;
    let cases = [
        LifetimeFitCase::Exponential,
        LifetimeFitCase::Lognormal,
        LifetimeFitCase::TruncatedLognormal,
    ];
    let fits: Vec<serde_json::Value> = cases
        .iter()
        .map(|case| match fit_lifetimes(&set, *case) {
            Ok(fit) => serde_json::to_value(&fit).expect("serializable"),
            Err(e) => json!({"case": format!("{case:?}"), "error": {"kind": e.kind(), "message": e.to_string()}}),
        })
        .collect();
    let record = json!({
        "command": "fit-lifetimes",
        "n": set.len(),
        "counts": set.counts(),
        "fits": fits,
    });
    let path = common.out.join("lifetime-fits.json");
    write_json(&path, &record)?;
    emit(&record);
    Ok(())
}

fn fit_radii(common: &CommonOpts, mu: f64, sigma2: f64, min_fit_radius: f64) -> Result<()> {
    let lifetime = LifetimeDistribution::LognormalDb { mu, sigma2 };
    lifetime.validate()?;
    let chord_grid = default_chord_grid();
    let radii = default_radius_grid();
    let target: Vec<f64> = chord_grid.iter().map(|y| lifetime.cdf(*y)).collect();
    let solution = solve_radius_weights(&chord_grid, &target, &radii)?;
    let fit = fit_lognormal_to_pmf(&solution.pmf, min_fit_radius)?;
    let comments = [
        ("command", "fit-radii".to_string()),
        ("seed", common.seed.to_string()),
    ];
    let pmf_path = match common.format {
        Format::Csv => {
            let path = common.out.join("radius-pmf.csv");
            write_text(&path, &render_pmf_csv(&comments, &solution.pmf))?;
            path
        }
        Format::Json => {
            let path = common.out.join("radius-pmf.json");
            write_json(
                &path,
                &json!({"radii": solution.pmf.radii(), "weights": solution.pmf.weights()}),
            )?;
            path
        }
    };
    let record = json!({
        "command": "fit-radii",
        "target": {"mu": mu, "sigma2": sigma2},
        "solution": {
            "rmse": solution.rmse,
            "objective": solution.objective,
            "kkt_residual": solution.kkt_residual,
            "iterations": solution.iterations,
            "converged": solution.converged,
        },
        "lognormal_fit": {
            "mu": fit.mu,
            "sigma2": fit.sigma2,
            "rmse": fit.rmse,
            "min_radius": min_fit_radius,
        },
        "written": [pmf_path.display().to_string()],
    });
    let json_path = common.out.join("radius-fit.json");
    write_json(&json_path, &record)?;
    emit(&record);
    Ok(())
}

fn acf_cmd(common: &CommonOpts, max_lag: Option<f64>, points: usize) -> Result<()> {
    if points < 2 {
        return Err(Error::InvalidParameter(
            "need at least two lag samples".into(),
        ));
    }
    let scenario = load_scenario(&common.config)?;
    let bs_lifetime = scenario.bs_vr.enabled.then(|| LifetimeDistribution::Exponential {
        scale: scenario.bs_vr.l_bs,
    });
    let mpc_dist = scenario.mpc_vr.enabled.then(|| RadiusDistribution::LognormalDb {
        mu: scenario.mpc_vr.mu_r,
        sigma2: scenario.mpc_vr.sigma_r * scenario.mpc_vr.sigma_r,
    });
    let r_c = scenario.clusters.r_c;
    let default_span = match &bs_lifetime {
        Some(LifetimeDistribution::Exponential { scale }) => (3.0 * scale).max(2.0 * r_c),
        _ => 2.0 * r_c,
    };
    let span = max_lag.unwrap_or(default_span);
    if !(span.is_finite() && span > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "max lag must be positive and finite, got {span}"
        )));
    }

    let mut columns = vec!["lag", "cluster_disc"];
    if bs_lifetime.is_some() {
        columns.push("bs_interval");
        columns.push("joint");
    }
    if mpc_dist.is_some() {
        columns.push("mpc_mixture");
    }
    let mut rows = Vec::with_capacity(points);
    for i in 0..points {
        let lag = span * i as f64 / (points - 1) as f64;
        let disc = acf_circular(lag, r_c);
        let mut row = vec![lag, disc];
        if let Some(lifetime) = &bs_lifetime {
            let bs = acf_bs(lag, lifetime)?;
            row.push(bs);
            row.push(bs * disc);
        }
        if let Some(dist) = &mpc_dist {
            row.push(acf_circular_mixture(lag, dist)?);
        }
        rows.push(row);
    }
    let comments = [
        ("command", "acf".to_string()),
        ("scenario", scenario.name.clone()),
    ];
    let csv_path = common.out.join("acf.csv");
    write_text(&csv_path, &render_curve_csv(&comments, &columns, &rows))?;
    emit(&json!({
        "command": "acf",
        "scenario": scenario.name,
        "max_lag": span,
        "points": points,
        "columns": columns,
        "written": [csv_path.display().to_string()],
    }));
    Ok(())
}

fn tensor_summary(tensor: &ChannelTensor) -> serde_json::Value {
    let (k, m, t, b) = tensor.dims();
    let energies: Vec<f64> = (0..k).map(|u| tensor.user_energy(u)).collect();
    json!({
        "users": k,
        "antennas": m,
        "snapshots": t,
        "freq_bins": b,
        "per_user_energy": energies,
        "finite": tensor.is_finite(),
    })
}

fn synthesize_cmd(common: &CommonOpts) -> Result<()> {
    let scenario = load_scenario(&common.config)?;
    let tensor = synthesize(&scenario, common.seed)?;
    let bin_path = common.out.join("channel.bin");
    if let Some(parent) = bin_path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut file = std::io::BufWriter::new(std::fs::File::create(&bin_path)?);
    tensor.write_binary(&mut file)?;
    use std::io::Write as _;
    file.flush()?;
    let record = json!({
        "command": "synthesize",
        "scenario": scenario.name,
        "seed": common.seed,
        "tensor": tensor_summary(&tensor),
        "written": [bin_path.display().to_string()],
    });
    let json_path = common.out.join("channel.json");
    write_json(&json_path, &record)?;
    emit(&record);
    Ok(())
}

fn read_tensor(path: &Path) -> Result<ChannelTensor> {
    let file = std::fs::File::open(path)?;
    ChannelTensor::read_binary(&mut std::io::BufReader::new(file))
}

fn condition_number_cmd(common: &CommonOpts) -> Result<()> {
    let is_binary = common
        .config
        .as_ref()
        .is_some_and(|p| p.extension().is_some_and(|e| e == "bin"));
    let runs = common.trials.unwrap_or(1);
    if runs == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let mut pooled = Vec::new();
    let mut infinite = 0usize;
    let source;
    if is_binary {
        let path = common.config.as_ref().expect("checked");
        let tensor = read_tensor(path)?;
        let summary = condition_number_db(&tensor)?;
        infinite += summary.infinite_count;
        pooled.extend(summary.kappa_db.into_iter().filter(|v| v.is_finite()));
        source = json!({"tensor": path.display().to_string()});
    } else {
        let scenario = load_scenario(&common.config)?;
        for r in 0..runs {
            let tensor = synthesize(&scenario, rng::derive_seed(common.seed, r as u64))?;
            let summary = condition_number_db(&tensor)?;
            infinite += summary.infinite_count;
            pooled.extend(summary.kappa_db.into_iter().filter(|v| v.is_finite()));
        }
        source = json!({"scenario": scenario.name, "runs": runs, "seed": common.seed});
    }
    if pooled.is_empty() {
        return Err(Error::Singular(
            "every slice was rank deficient; no finite condition numbers".into(),
        ));
    }
    let steps = ecdf(&pooled)?;
    let rows: Vec<Vec<f64>> = steps.iter().map(|(v, c)| vec![*v, *c]).collect();
    let comments = [
        ("command", "condition-number".to_string()),
        ("seed", common.seed.to_string()),
    ];
    let csv_path = common.out.join("kappa.csv");
    write_text(
        &csv_path,
        &render_curve_csv(&comments, &["kappa_db", "cumulative"], &rows),
    )?;
    let mean = pooled.iter().sum::<f64>() / pooled.len() as f64;
    let mut sorted = pooled.clone();
    sorted.sort_by(f64::total_cmp);
    let median = if sorted.len() % 2 == 1 {
        sorted[sorted.len() / 2]
    } else {
        0.5 * (sorted[sorted.len() / 2 - 1] + sorted[sorted.len() / 2])
    };
    let record = json!({
        "command": "condition-number",
        "source": source,
        "kappa": {
            "mean_db": mean,
            "median_db": median,
            "finite": pooled.len(),
            "infinite": infinite,
        },
        "written": [csv_path.display().to_string()],
    });
    let json_path = common.out.join("kappa.json");
    write_json(&json_path, &record)?;
    emit(&record);
    Ok(())
}

fn parse_axes(axes: &[String]) -> Result<Vec<SweepAxis>> {
    axes.iter()
        .map(|spec| {
            let (name, values) = spec.split_once('=').ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "axis {spec:?} must look like name=v1,v2,..."
                ))
            })?;
            let values = values
                .split(',')
                .map(|v| {
                    v.trim().parse::<f64>().map_err(|_| {
                        Error::InvalidParameter(format!("axis {name}: bad value {v:?}"))
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok(SweepAxis {
                name: name.trim().to_string(),
                values,
            })
        })
        .collect()
}

fn run_figure_cmd(id: &str, common: &CommonOpts, axes: &[String]) -> Result<()> {
    let cfg = ExperimentConfig {
        id: id.to_string(),
        config_path: common.config.clone(),
        trials: common.trials,
        seed: common.seed,
        out_dir: common.out.clone(),
        sweep: parse_axes(axes)?,
    };
    let files = run_figure(&cfg)?;
    emit(&json!({
        "command": "run-figure",
        "figure": id,
        "config_hash": format!("{:016x}", cfg.config_hash()),
        "seed": common.seed,
        "written": files.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
    }));
    Ok(())
}
