//! Parametric summaries: a lognormal law fitted to a discrete radius PMF,
//! and lifetime-law fits of censored interval data.
//!
//! The radius fit compresses the hundreds of weights recovered by
//! [`crate::mpc::qp::solve_radius_weights`] into the two decibel
//! parameters of a lognormal law by least-squares matching of cumulative
//! weights.  The lifetime fits cover the three estimation strategies
//! compared on measured data: a censored-likelihood exponential fit, a
//! censored-likelihood lognormal fit, and a face-value truncated-lognormal
//! fit that treats the observed (censored) lengths as the quantity being
//! modeled and minimizes the worst-case CDF distance.

use serde::{Deserialize, Serialize};

use crate::bsvr::inference::{
    log_likelihood, mle_exponential, mle_numeric, sufficient_stats, ExponentialMle,
};
use crate::bsvr::process::ObservedIntervalSet;
use crate::error::{Error, Result};
use crate::lifetime::{LifetimeDistribution, DB_TO_NAT};
use crate::mpc::chord::RadiusPmf;
use crate::numerics::{nelder_mead, norm_cdf, norm_cdf_inv};

/// Lognormal law fitted to the cumulative weights of a radius PMF.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LognormalPmfFit {
    /// Location of the dB-domain normal variable.
    pub mu: f64,
    /// Variance of the dB-domain normal variable.
    pub sigma2: f64,
    /// Root-mean-square mismatch between model CDF and cumulative
    /// weights over the fitted support.
    pub rmse: f64,
    /// Objective evaluations consumed by the simplex search.
    pub evaluations: usize,
}

/// Starts for the two-parameter cumulative-weight fit.
const PMF_FIT_STARTS: usize = 5;
/// Evaluation budget per start.
const PMF_FIT_EVALS: usize = 4_000;

/// Fits a lognormal radius law to the cumulative weights of `pmf` over
/// support points strictly above `min_radius`, minimizing the RMSE
/// between `Phi((ln r - m) / sqrt(psi))` and the cumulative weight.
///
/// Grid points at and below `min_radius` are excluded: the chord-law
/// deconvolution weighs discs by how often a line crosses them, so masses
/// assigned to near-zero radii are poorly determined and would distort
/// the fit.
pub fn fit_lognormal_to_pmf(pmf: &RadiusPmf, min_radius: f64) -> Result<LognormalPmfFit> {
    pmf.validate()?;
    if !(min_radius.is_finite() && min_radius >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "min_radius must be nonnegative, got {min_radius}"
        )));
    }
    let cumulative = pmf.cumulative();
    let points: Vec<(f64, f64)> = pmf
        .radii()
        .iter()
        .zip(&cumulative)
        .filter(|(r, _)| **r > min_radius && **r > 0.0)
        .map(|(r, c)| (*r, *c))
        .collect();
    if points.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "only {} support points above min_radius = {min_radius}; need at least 3",
            points.len()
        )));
    }

    let objective = |u: &[f64]| -> f64 {
        let m = u[0] * DB_TO_NAT;
        let psi = u[1].exp() * DB_TO_NAT * DB_TO_NAT;
        let sq_sum: f64 = points
            .iter()
            .map(|(r, c)| {
                let model = norm_cdf((r.ln() - m) / psi.sqrt());
                (model - c) * (model - c)
            })
            .sum();
        (sq_sum / points.len() as f64).sqrt()
    };

    // Two-quantile initializer: invert the model CDF at an early and a
    // late cumulative value to get slope and location in the dB domain.
    let clamp = |c: f64| c.clamp(1e-9, 1.0 - 1e-9);
    let (r1, c1) = points[0];
    let late = points
        .iter()
        .rev()
        .find(|(_, c)| *c <= 0.995)
        .copied()
        .unwrap_or(points[points.len() - 1]);
    let (r2, c2) = late;
    let z1 = norm_cdf_inv(clamp(c1));
    let z2 = norm_cdf_inv(clamp(c2));
    let (mu0, sigma20) = if (z2 - z1).abs() > 1e-6 && r2 > r1 {
        let sqrt_psi = (r2.ln() - r1.ln()) / (z2 - z1);
        let m = r1.ln() - z1 * sqrt_psi;
        (m / DB_TO_NAT, (sqrt_psi / DB_TO_NAT).powi(2).max(1.0))
    } else {
        (10.0 * pmf.mean().max(1e-12).log10(), 50.0)
    };

    let t0 = sigma20.ln();
    let starts = [
        [mu0, t0],
        [mu0 - 3.0, t0],
        [mu0 + 3.0, t0],
        [mu0, t0 + 3f64.ln()],
        [mu0, t0 - 3f64.ln()],
    ];
    let mut best: Option<crate::numerics::NelderMeadResult> = None;
    let mut evaluations = 0usize;
    for x0 in starts.iter().take(PMF_FIT_STARTS) {
        let result = nelder_mead(objective, x0, &[2.0, 0.7], 1e-11, PMF_FIT_EVALS);
        evaluations += result.evaluations;
        match &best {
            Some(b) if b.fval <= result.fval => {}
            _ => best = Some(result),
        }
    }
    let best = best.expect("at least one start ran");
    if !best.fval.is_finite() {
        return Err(Error::ConvergenceFailure(
            "cumulative-weight fit did not produce a finite objective".into(),
        ));
    }
    Ok(LognormalPmfFit {
        mu: best.x[0],
        sigma2: best.x[1].exp(),
        rmse: best.fval,
        evaluations,
    })
}

/// The three lifetime-fitting strategies compared on interval data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LifetimeFitCase {
    /// Censored-likelihood fit with exponential lifetimes (closed form).
    Exponential,
    /// Censored-likelihood fit with lognormal (dB) lifetimes.
    Lognormal,
    /// Face-value fit of a truncated lognormal to the observed lengths,
    /// minimizing the worst-case CDF distance on the observation range.
    TruncatedLognormal,
}

/// Outcome of a lifetime fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LifetimeFit {
    /// Strategy that produced the fit.
    pub case: LifetimeFitCase,
    /// Birth intensity (1/m).  For the face-value case this is the raw
    /// count per unit window length.
    pub lambda: f64,
    /// Fitted lifetime law.
    pub distribution: LifetimeDistribution,
    /// Worst-case distance between the fitted CDF and the empirical CDF
    /// of the observed lengths.
    pub sup_distance: f64,
    /// Censored log-likelihood at the fit, where defined.
    pub log_likelihood: Option<f64>,
}

/// Worst-case distance between a fitted CDF and the empirical CDF of
/// `samples` (the two-sided Kolmogorov-Smirnov statistic).
pub fn ks_distance(distribution: &LifetimeDistribution, samples: &[f64]) -> Result<f64> {
    distribution.validate()?;
    if samples.is_empty() {
        return Err(Error::InsufficientData(
            "sup distance needs at least one sample".into(),
        ));
    }
    if !samples.iter().all(|x| x.is_finite()) {
        return Err(Error::InvalidParameter(
            "samples must be finite".into(),
        ));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    Ok(ks_on_sorted(distribution, &sorted))
}

fn ks_on_sorted(distribution: &LifetimeDistribution, sorted: &[f64]) -> f64 {
    let n = sorted.len() as f64;
    let mut sup = 0.0f64;
    for (i, x) in sorted.iter().enumerate() {
        let model = distribution.cdf(*x);
        let above = (i + 1) as f64 / n;
        let below = i as f64 / n;
        sup = sup.max((model - above).abs()).max((model - below).abs());
    }
    sup
}

/// Starts for the truncated-lognormal face-value fit.
const TRUNC_FIT_STARTS: usize = 5;
/// Evaluation budget per start.
const TRUNC_FIT_EVALS: usize = 2_000;

/// Fits a lifetime law to one censored realization using the requested
/// strategy.
///
/// The exponential and lognormal cases maximize the censored likelihood
/// and estimate the true lifetime law together with the birth intensity.
/// The truncated case instead models the observed lengths directly on
/// `[delta0, window]` and reports the raw count per window length as its
/// intensity; its sup distance is the quantity minimized.
pub fn fit_lifetimes(set: &ObservedIntervalSet, case: LifetimeFitCase) -> Result<LifetimeFit> {
    let mut lengths: Vec<f64> = set.observed_lengths().collect();
    lengths.sort_unstable_by(f64::total_cmp);
    match case {
        LifetimeFitCase::Exponential => {
            let stats = sufficient_stats(set);
            match mle_exponential(&stats)? {
                ExponentialMle::InfiniteLifetime => Err(Error::UndefinedEstimate(
                    "all intervals span the window; no finite lifetime estimate exists".into(),
                )),
                ExponentialMle::Estimate { lambda, scale } => {
                    let distribution = LifetimeDistribution::Exponential { scale };
                    let ll = log_likelihood(lambda, &distribution, set)?;
                    Ok(LifetimeFit {
                        case,
                        lambda,
                        sup_distance: ks_on_sorted(&distribution, &lengths),
                        distribution,
                        log_likelihood: Some(ll),
                    })
                }
            }
        }
        LifetimeFitCase::Lognormal => {
            let fit = mle_numeric(set)?;
            let distribution = LifetimeDistribution::LognormalDb {
                mu: fit.mu,
                sigma2: fit.sigma2,
            };
            Ok(LifetimeFit {
                case,
                lambda: fit.lambda,
                sup_distance: ks_on_sorted(&distribution, &lengths),
                distribution,
                log_likelihood: Some(fit.log_likelihood),
            })
        }
        LifetimeFitCase::TruncatedLognormal => {
            if lengths.is_empty() {
                return Err(Error::InsufficientData(
                    "no observed intervals to fit".into(),
                ));
            }
            let lower = set.delta0();
            let upper = set.window_len();
            let db: Vec<f64> = lengths
                .iter()
                .filter(|u| **u > 0.0)
                .map(|u| u.ln() / DB_TO_NAT)
                .collect();
            let mu0 = db.iter().sum::<f64>() / db.len() as f64;
            let var0 = (db.iter().map(|v| (v - mu0).powi(2)).sum::<f64>() / db.len() as f64)
                .max(4.0);
            let objective = |u: &[f64]| -> f64 {
                let candidate = LifetimeDistribution::TruncatedLognormalDb {
                    mu: u[0],
                    sigma2: u[1].exp(),
                    lower,
                    upper,
                };
                if candidate.validate().is_err() {
                    return f64::INFINITY;
                }
                ks_on_sorted(&candidate, &lengths)
            };
            let t0 = var0.ln();
            let starts = [
                [mu0, t0],
                [mu0 - 6.0, t0],
                [mu0 + 3.0, t0],
                [mu0, t0 + 3f64.ln()],
                [mu0 - 3.0, t0 - 3f64.ln()],
            ];
            let mut best: Option<crate::numerics::NelderMeadResult> = None;
            for x0 in starts.iter().take(TRUNC_FIT_STARTS) {
                let result = nelder_mead(objective, x0, &[2.0, 0.7], 1e-9, TRUNC_FIT_EVALS);
                match &best {
                    Some(b) if b.fval <= result.fval => {}
                    _ => best = Some(result),
                }
            }
            let best = best.expect("at least one start ran");
            if !best.fval.is_finite() {
                return Err(Error::ConvergenceFailure(
                    "truncated-lognormal search did not produce a finite distance".into(),
                ));
            }
            let distribution = LifetimeDistribution::TruncatedLognormalDb {
                mu: best.x[0],
                sigma2: best.x[1].exp(),
                lower,
                upper,
            };
            Ok(LifetimeFit {
                case,
                lambda: set.len() as f64 / set.window_len(),
                distribution,
                sup_distance: best.fval,
                log_likelihood: None,
            })
        }
    }
}
