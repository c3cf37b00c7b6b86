//! Estimation of the interval-process parameters from censored observations.
//!
//! The observed data on a window of length `L` with resolution limit
//! `delta0` are the interval lengths `upsilon_i` together with their
//! censoring classes. Up to a constant, the log-likelihood of intensity
//! `lambda` and lifetime law `Y` is
//!
//! ```text
//! n ln(lambda) - lambda * (L + E(Y | Y > delta0) - 2 delta0) * P(Y > delta0)
//!   - ln(n!)
//!   + sum over interior intervals      of ln f_Y(upsilon_i)
//!   + sum over singly censored ones    of ln P(Y > upsilon_j)
//!   + n11 * ln E((Y - L)^+)
//! ```
//!
//! where `n11` counts intervals spanning the whole window. For exponential
//! lifetimes the maximizer is available in closed form through the sufficient
//! statistics `(n, nu, Lambda0)` with `nu = n11 - n00` and
//! `Lambda0 = sum(upsilon_i - delta0)`; the scale estimate solves
//!
//! ```text
//! (n - nu) s^2 - (nu L0 + Lambda0) s - Lambda0 L0 = 0,   L0 = L - delta0,
//! ```
//!
//! and the intensity follows as
//! `lambda = n / (L0 + s) * exp(delta0 / s)`. Other lifetime families go
//! through [`mle_numeric`], a multi-start simplex search on the same
//! likelihood. [`fim_crlb`] evaluates the Fisher information of the
//! exponential model and the resulting lower bounds on estimator variance;
//! both relative bounds collapse to the same expression,
//! `(1 + s/L0) / ((1 + 2 s/L0) * lambda0 * L0)` with
//! `lambda0 = lambda * exp(-delta0 / s)`, bracketed between `0.5` and `1`
//! times `1 / (lambda0 * L0)`.

use crate::error::{Error, Result};
use crate::lifetime::LifetimeDistribution;
use crate::numerics::{ln_factorial, nelder_mead};
use crate::bsvr::process::{CensorClass, ObservedIntervalSet};
use serde::{Deserialize, Serialize};

/// Sufficient statistics of the exponential censored-likelihood model.
///
/// `windows` counts how many equal windows were pooled into the sums (1 for
/// a single realization); the closed-form estimators remain exact under
/// pooling because the defining quadratic is scale-invariant in
/// `(n, nu, shortened_sum)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SufficientStats {
    /// Observed interval count `n` (summed over pooled windows).
    pub n: u64,
    /// `n11 - n00`: doubly censored minus interior count.
    pub nu: i64,
    /// `Lambda0 = sum(upsilon_i - delta0)` over all observed intervals.
    pub shortened_sum: f64,
    /// Reduced window length `L0 = L - delta0` of each pooled window.
    pub reduced_window: f64,
    /// Resolution limit the data were collected with.
    pub delta0: f64,
    /// Number of equal, independent windows pooled into the sums.
    pub windows: u64,
}

impl SufficientStats {
    pub fn validate(&self) -> Result<()> {
        if self.nu.unsigned_abs() > self.n {
            return Err(Error::InvalidParameter(format!(
                "|nu| = {} exceeds n = {}",
                self.nu, self.n
            )));
        }
        if !(self.shortened_sum.is_finite() && self.shortened_sum >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "shortened_sum must be nonnegative and finite, got {}",
                self.shortened_sum
            )));
        }
        if !(self.reduced_window.is_finite() && self.reduced_window > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "reduced_window must be positive, got {}",
                self.reduced_window
            )));
        }
        if !(self.delta0.is_finite() && self.delta0 >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "delta0 must be nonnegative, got {}",
                self.delta0
            )));
        }
        if self.windows == 0 {
            return Err(Error::InvalidParameter("windows must be >= 1".into()));
        }
        Ok(())
    }
}

/// Extracts the sufficient statistics from one censored realization.
pub fn sufficient_stats(set: &ObservedIntervalSet) -> SufficientStats {
    let counts = set.counts();
    let shortened_sum = set
        .observed_lengths()
        .map(|u| u - set.delta0())
        .sum::<f64>()
        .max(0.0);
    SufficientStats {
        n: set.len() as u64,
        nu: counts.n11 as i64 - counts.n00 as i64,
        shortened_sum,
        reduced_window: set.window_len() - set.delta0(),
        delta0: set.delta0(),
        windows: 1,
    }
}

/// Pools statistics from independent realizations on equal windows.
pub fn pool_stats(parts: &[SufficientStats]) -> Result<SufficientStats> {
    let first = *parts
        .first()
        .ok_or_else(|| Error::InsufficientData("no statistics to pool".into()))?;
    let mut pooled = SufficientStats {
        n: 0,
        nu: 0,
        shortened_sum: 0.0,
        windows: 0,
        ..first
    };
    for part in parts {
        part.validate()?;
        if part.reduced_window != first.reduced_window || part.delta0 != first.delta0 {
            return Err(Error::InvalidParameter(
                "pooled realizations must share window length and delta0".into(),
            ));
        }
        pooled.n += part.n;
        pooled.nu += part.nu;
        pooled.shortened_sum += part.shortened_sum;
        pooled.windows += part.windows;
    }
    Ok(pooled)
}

/// Result of the closed-form exponential fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum ExponentialMle {
    /// Joint maximizer of the censored likelihood.
    Estimate {
        /// Birth intensity (1/m).
        lambda: f64,
        /// Mean lifetime (m).
        scale: f64,
    },
    /// Every interval spans the whole window: the likelihood increases
    /// without bound in the lifetime and no finite estimate exists.
    InfiniteLifetime,
}

/// Closed-form maximum-likelihood fit of the exponential model.
///
/// Returns [`ExponentialMle::InfiniteLifetime`] when the data are all
/// doubly censored. The scale solves the stationarity quadratic through its
/// unique nonnegative root (evaluated in a cancellation-free form for either
/// sign of the linear coefficient); it degenerates to
/// `sqrt(L0 * Lambda0 / (n - nu))` when the linear coefficient vanishes.
pub fn mle_exponential(stats: &SufficientStats) -> Result<ExponentialMle> {
    stats.validate()?;
    if stats.n == 0 {
        return Err(Error::InsufficientData(
            "no observed intervals to fit".into(),
        ));
    }
    if stats.nu == stats.n as i64 {
        return Ok(ExponentialMle::InfiniteLifetime);
    }

    let l0 = stats.reduced_window;
    let a = (stats.n as i64 - stats.nu) as f64;
    let b = stats.nu as f64 * l0 + stats.shortened_sum;
    let c = l0 * stats.shortened_sum;
    let disc = (b * b + 4.0 * a * c).sqrt();
    let scale = if b >= 0.0 {
        (b + disc) / (2.0 * a)
    } else {
        // Conjugate form; avoids cancellation between b and the root.
        2.0 * c / (disc - b)
    };
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::UndefinedEstimate(format!(
            "observed lengths carry no scale information (root {scale})"
        )));
    }
    let n_per_window = stats.n as f64 / stats.windows as f64;
    let lambda = n_per_window / (l0 + scale) * (stats.delta0 / scale).exp();
    Ok(ExponentialMle::Estimate { lambda, scale })
}

/// Method-of-moments fit of the exponential model.
///
/// Matches the mean shortened length `T = Lambda0 / n` to its model value
/// `s L0 / (s + L0)`, giving `s = T / (1 - T / L0)`, and the count to its
/// mean, giving `lambda = n / (L0 + s)`. Unlike the MLE this ignores the
/// resolution thinning, so it carries a bias of order `delta0 / s`. The
/// moment equation has no admissible solution when `T >= L0`.
pub fn mome(stats: &SufficientStats) -> Result<(f64, f64)> {
    stats.validate()?;
    if stats.n == 0 {
        return Err(Error::InsufficientData(
            "no observed intervals to fit".into(),
        ));
    }
    let l0 = stats.reduced_window;
    let t = stats.shortened_sum / stats.n as f64;
    if t >= l0 {
        return Err(Error::UndefinedEstimate(format!(
            "mean shortened length {t} reaches the reduced window {l0}"
        )));
    }
    if t <= 0.0 {
        return Err(Error::UndefinedEstimate(
            "observed lengths carry no scale information".into(),
        ));
    }
    let scale = t / (1.0 - t / l0);
    let lambda = stats.n as f64 / stats.windows as f64 / (l0 + scale);
    Ok((lambda, scale))
}

/// Censored log-likelihood of `(lambda, lifetime)` for one realization.
///
/// Parameter values outside their domain yield `-inf` rather than an error,
/// so optimizers can probe freely. Truncated lifetime families are not part
/// of the censored model (truncation and window censoring are different
/// mechanisms) and are rejected.
pub fn log_likelihood(
    lambda: f64,
    lifetime: &LifetimeDistribution,
    set: &ObservedIntervalSet,
) -> Result<f64> {
    if matches!(lifetime, LifetimeDistribution::TruncatedLognormalDb { .. }) {
        return Err(Error::UnsupportedDistribution(
            "censored likelihood is defined for exponential and lognormal lifetimes".into(),
        ));
    }
    if !(lambda.is_finite() && lambda > 0.0) || lifetime.validate().is_err() {
        return Ok(f64::NEG_INFINITY);
    }

    let delta0 = set.delta0();
    let window = set.window_len();
    let n = set.len() as u64;

    let survival_at_limit = lifetime.survival(delta0);
    let exposure = (window + lifetime.conditional_mean_above(delta0) - 2.0 * delta0)
        * survival_at_limit;
    if !exposure.is_finite() {
        return Ok(f64::NEG_INFINITY);
    }

    let mut ll = n as f64 * lambda.ln() - lambda * exposure - ln_factorial(n);
    let spanning_term = if set.counts().n11 > 0 {
        let excess = lifetime.mean_excess(window);
        set.counts().n11 as f64 * excess.ln()
    } else {
        0.0
    };
    ll += spanning_term;

    for (i, upsilon) in set.observed_lengths().enumerate() {
        match set.class_of(i) {
            CensorClass::Interior => ll += lifetime.ln_pdf(upsilon),
            CensorClass::LeftCensored | CensorClass::RightCensored => {
                ll += lifetime.survival(upsilon).ln()
            }
            CensorClass::DoublyCensored => {}
        }
    }
    Ok(ll)
}

/// Numeric maximum-likelihood fit with lognormal (dB) lifetimes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NumericMle {
    /// Birth intensity (1/m).
    pub lambda: f64,
    /// Lognormal location, dB.
    pub mu: f64,
    /// Lognormal squared scale, dB^2.
    pub sigma2: f64,
    /// Log-likelihood at the fit.
    pub log_likelihood: f64,
    /// Total objective evaluations over all starts.
    pub evaluations: usize,
}

/// Simplex-search starts per call of [`mle_numeric`].
const MLE_NUMERIC_STARTS: usize = 8;
/// Objective evaluation budget per start.
const MLE_NUMERIC_EVALS: usize = 6_000;
/// Simplex convergence tolerance in `(ln lambda, mu, ln sigma2)` space.
const MLE_NUMERIC_TOL: f64 = 1e-8;

/// Maximizes the censored likelihood over `(lambda, mu, sigma2)` for
/// lognormal (dB) lifetimes.
///
/// The search runs in `(ln lambda, mu, ln sigma2)` from eight starts: the
/// moment-style initializer built from the dB-transformed observed lengths,
/// pushed progressively below it to cover heavily thinned laws whose short
/// lifetimes fall under the resolution limit (each location start pairs with
/// an intensity start compensating for the implied thinning). The best
/// converged start wins; by construction its likelihood dominates every
/// initializer.
pub fn mle_numeric(set: &ObservedIntervalSet) -> Result<NumericMle> {
    let n = set.len();
    if n == 0 {
        return Err(Error::InsufficientData(
            "no observed intervals to fit".into(),
        ));
    }
    if set.counts().n11 as usize == n {
        return Err(Error::InsufficientData(
            "all intervals are doubly censored; the lifetime law is unidentifiable".into(),
        ));
    }

    let db = crate::lifetime::DB_TO_NAT;
    let z: Vec<f64> = set
        .observed_lengths()
        .filter(|&u| u > 0.0)
        .map(|u| u.ln() / db)
        .collect();
    let mu0 = z.iter().sum::<f64>() / z.len() as f64;
    let var0 = (z.iter().map(|v| (v - mu0).powi(2)).sum::<f64>() / z.len() as f64).max(4.0);
    let window = set.window_len();

    let objective = |u: &[f64]| -> f64 {
        let lambda = u[0].exp();
        let lifetime = LifetimeDistribution::LognormalDb {
            mu: u[1],
            sigma2: u[2].exp(),
        };
        match log_likelihood(lambda, &lifetime, set) {
            Ok(ll) if ll.is_finite() => -ll,
            _ => f64::INFINITY,
        }
    };

    let mut best: Option<crate::numerics::NelderMeadResult> = None;
    let mut evaluations = 0usize;
    let mut any_converged = false;
    for k in 0..MLE_NUMERIC_STARTS {
        let mu_start = mu0 - 6.0 * (k % 4) as f64;
        let sigma2_start = var0 * if k < 4 { 1.0 } else { 3.0 };
        // Lower locations imply more mass under the resolution limit, hence
        // a larger true intensity for the same observed count.
        let trial = LifetimeDistribution::LognormalDb {
            mu: mu_start,
            sigma2: sigma2_start,
        };
        let thinning = trial.survival(set.delta0()).max(1e-4);
        let lambda_start = n as f64 / (window * thinning);

        let x0 = [lambda_start.ln(), mu_start, sigma2_start.ln()];
        let result = nelder_mead(objective, &x0, &[0.7, 3.0, 0.7], MLE_NUMERIC_TOL,
            MLE_NUMERIC_EVALS);
        evaluations += result.evaluations;
        any_converged |= result.converged && result.fval.is_finite();
        match &best {
            Some(b) if b.fval <= result.fval => {}
            _ => best = Some(result),
        }
    }
    let best = best.expect("at least one start ran");
    if !any_converged || !best.fval.is_finite() {
        return Err(Error::ConvergenceFailure(format!(
            "lognormal likelihood search did not converge; best iterate lambda={:.6e} mu={:.4} sigma2={:.4} with -ll={:.6e}",
            best.x[0].exp(),
            best.x[1],
            best.x[2].exp(),
            best.fval
        )));
    }
    Ok(NumericMle {
        lambda: best.x[0].exp(),
        mu: best.x[1],
        sigma2: best.x[2].exp(),
        log_likelihood: -best.fval,
        evaluations,
    })
}

/// Fisher information of the exponential model and the variance bounds it
/// implies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FisherInformation {
    /// Information matrix in `(lambda, scale)` order.
    pub matrix: [[f64; 2]; 2],
    /// Lower bound on the variance of unbiased intensity estimators.
    pub crlb_lambda: f64,
    /// Lower bound on the variance of unbiased scale estimators.
    pub crlb_scale: f64,
    /// Shared relative bound `crlb / parameter^2`; identical for both
    /// parameters.
    pub normalized_crlb: f64,
}

impl FisherInformation {
    /// Relative root-mean-square error floor `sqrt(normalized_crlb)`.
    pub fn relative_rmse_floor(&self) -> f64 {
        self.normalized_crlb.sqrt()
    }

    /// Bounds after pooling `replicates` independent equal windows.
    pub fn with_replicates(&self, replicates: u64) -> FisherInformation {
        let r = replicates.max(1) as f64;
        FisherInformation {
            matrix: [
                [self.matrix[0][0] * r, self.matrix[0][1] * r],
                [self.matrix[1][0] * r, self.matrix[1][1] * r],
            ],
            crlb_lambda: self.crlb_lambda / r,
            crlb_scale: self.crlb_scale / r,
            normalized_crlb: self.normalized_crlb / r,
        }
    }
}

/// Fisher information of the exponential model at `(lambda, scale)` on a
/// reduced window `l0 = L - delta0`.
///
/// With `lambda0 = lambda * exp(-delta0 / scale)` and `S = scale + l0`:
///
/// ```text
/// I = lambda0 * [ S / lambda^2      1 / lambda        ]
///               [ 1 / lambda        S / scale^2       ]
/// ```
///
/// Inverting the 2x2 matrix gives both Cramer-Rao bounds; their relative
/// versions coincide at `(1 + r) / ((1 + 2r) * lambda0 * l0)` with
/// `r = scale / l0`, which lies between `0.5 / (lambda0 * l0)` (small `r`)
/// and `1 / (lambda0 * l0)` (large `r`).
pub fn fim_crlb(lambda: f64, scale: f64, l0: f64, delta0: f64) -> Result<FisherInformation> {
    for (name, v) in [("lambda", lambda), ("scale", scale), ("l0", l0)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "{name} must be positive and finite, got {v}"
            )));
        }
    }
    if !(delta0.is_finite() && delta0 >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "delta0 must be nonnegative, got {delta0}"
        )));
    }
    let lambda0 = lambda * (-delta0 / scale).exp();
    let s = scale + l0;
    let matrix = [
        [lambda0 * s / (lambda * lambda), lambda0 / lambda],
        [lambda0 / lambda, lambda0 * s / (scale * scale)],
    ];
    let det = matrix[0][0] * matrix[1][1] - matrix[0][1] * matrix[1][0];
    if !(det.is_finite() && det > 0.0) {
        return Err(Error::Singular(format!(
            "information matrix is not positive definite (det {det})"
        )));
    }
    let crlb_lambda = matrix[1][1] / det;
    let crlb_scale = matrix[0][0] / det;
    Ok(FisherInformation {
        matrix,
        crlb_lambda,
        crlb_scale,
        normalized_crlb: crlb_lambda / (lambda * lambda),
    })
}

/// A point estimate bundled with its information bound, as reported by the
/// command-line `estimate` output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateWithBound {
    /// Estimated birth intensity (1/m).
    pub lambda: f64,
    /// Estimated lifetime law.
    pub lifetime: LifetimeDistribution,
    /// Cramer-Rao bound on intensity variance, at the estimate.
    pub crlb_lambda: f64,
    /// Cramer-Rao bound on scale variance, at the estimate.
    pub crlb_scale: f64,
    /// Relative RMSE floor shared by both parameters.
    pub relative_rmse_floor: f64,
}

/// Runs the closed-form exponential fit and evaluates the bounds at it.
pub fn estimate_with_bound(stats: &SufficientStats) -> Result<EstimateWithBound> {
    match mle_exponential(stats)? {
        ExponentialMle::InfiniteLifetime => Err(Error::UndefinedEstimate(
            "all intervals span the window; no finite lifetime estimate exists".into(),
        )),
        ExponentialMle::Estimate { lambda, scale } => {
            let info = fim_crlb(lambda, scale, stats.reduced_window, stats.delta0)?
                .with_replicates(stats.windows);
            Ok(EstimateWithBound {
                lambda,
                lifetime: LifetimeDistribution::Exponential { scale },
                crlb_lambda: info.crlb_lambda,
                crlb_scale: info.crlb_scale,
                relative_rmse_floor: info.relative_rmse_floor(),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bsvr::process::{generate_bsvrs, BsVrProcessParams};
    use crate::numerics::nelder_mead;

    fn stats(n: u64, nu: i64, shortened_sum: f64, l0: f64, delta0: f64) -> SufficientStats {
        SufficientStats {
            n,
            nu,
            shortened_sum,
            reduced_window: l0,
            delta0,
            windows: 1,
        }
    }

    #[test]
    fn closed_form_matches_hand_solved_quadratic() {
        // n = 10, nu = 0, Lambda0 = 20, L0 = 10: the positive root is
        // 1 + sqrt(21).
        let fit = mle_exponential(&stats(10, 0, 20.0, 10.0, 0.0)).unwrap();
        let ExponentialMle::Estimate { lambda, scale } = fit else {
            panic!("expected finite estimate");
        };
        let expected = 1.0 + 21.0_f64.sqrt();
        assert!((scale - expected).abs() < 1e-12);
        assert!((lambda - 10.0 / (10.0 + expected)).abs() < 1e-12);
    }

    #[test]
    fn vanishing_linear_coefficient_reduces_to_square_root() {
        // nu L0 + Lambda0 = 0 with L0 = 2, Lambda0 = 4, nu = -2 (n00 exceeds
        // n11 by exactly Lambda0 / L0): the root collapses to
        // sqrt(L0 Lambda0 / (n - nu)) = 1.
        let fit = mle_exponential(&stats(6, -2, 4.0, 2.0, 0.0)).unwrap();
        let ExponentialMle::Estimate { scale, .. } = fit else {
            panic!("expected finite estimate");
        };
        assert!((scale - 1.0).abs() < 1e-13);
    }

    #[test]
    fn all_doubly_censored_signals_infinite_lifetime() {
        let fit = mle_exponential(&stats(3, 3, 21.0, 7.0, 0.0)).unwrap();
        assert!(matches!(fit, ExponentialMle::InfiniteLifetime));
        assert!(matches!(
            mle_exponential(&stats(0, 0, 0.0, 7.0, 0.0)),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn closed_form_maximizes_the_likelihood() {
        // The closed form must agree with a direct numerical maximization of
        // the censored likelihood to four decimals.
        let params = BsVrProcessParams {
            lambda: 2.6,
            lifetime: LifetimeDistribution::Exponential { scale: 2.9 },
            x1: 0.0,
            x2: 7.5,
            delta0: 0.23,
        };
        for seed in [3u64, 17, 91] {
            let set = generate_bsvrs(&params, 60.0, seed).unwrap();
            let fit = mle_exponential(&sufficient_stats(&set)).unwrap();
            let ExponentialMle::Estimate { lambda, scale } = fit else {
                continue;
            };

            let objective = |u: &[f64]| {
                let cand_lambda = u[0].exp();
                let lifetime = LifetimeDistribution::Exponential { scale: u[1].exp() };
                match log_likelihood(cand_lambda, &lifetime, &set) {
                    Ok(ll) if ll.is_finite() => -ll,
                    _ => f64::INFINITY,
                }
            };
            let start = [(lambda * 1.4).ln(), (scale * 0.6).ln()];
            let numeric = nelder_mead(objective, &start, &[0.4, 0.4], 1e-11, 40_000);
            assert!(numeric.converged);
            assert!(
                (numeric.x[0].exp() - lambda).abs() < 1e-4,
                "lambda {} vs {}",
                numeric.x[0].exp(),
                lambda
            );
            assert!(
                (numeric.x[1].exp() - scale).abs() < 1e-4,
                "scale {} vs {}",
                numeric.x[1].exp(),
                scale
            );
        }
    }

    #[test]
    fn resolution_shift_leaves_the_likelihood_invariant() {
        // Shorten every interval by delta0, shrink the window to L0, thin the
        // intensity to lambda0 = lambda exp(-delta0/s): the censored
        // likelihood value is unchanged.
        let params = BsVrProcessParams {
            lambda: 2.6,
            lifetime: LifetimeDistribution::Exponential { scale: 2.9 },
            x1: 0.0,
            x2: 7.5,
            delta0: 0.23,
        };
        for seed in 0..40u64 {
            let set = generate_bsvrs(&params, 60.0, seed).unwrap();
            if set.is_empty() {
                continue;
            }
            let (x1, x2) = set.window();
            let d = set.delta0();
            let shifted: Vec<(f64, f64)> =
                set.intervals().iter().map(|&(a, b)| (a, b - d)).collect();
            let reduced =
                ObservedIntervalSet::new(shifted, (x1, x2 - d), 0.0).unwrap();
            assert_eq!(reduced.counts(), set.counts());

            for (lambda, scale) in [(2.6, 2.9), (1.2, 0.8), (4.0, 6.0)] {
                let lifetime = LifetimeDistribution::Exponential { scale };
                let full = log_likelihood(lambda, &lifetime, &set).unwrap();
                let lambda0 = lambda * (-d / scale).exp();
                let reduced_ll =
                    log_likelihood(lambda0, &lifetime, &reduced).unwrap();
                assert!(
                    (full - reduced_ll).abs() <= 1e-12 * full.abs().max(1.0),
                    "seed {seed}: {full} vs {reduced_ll}"
                );
            }
        }
    }

    #[test]
    fn likelihood_rejects_truncated_families_and_bad_domains() {
        let set = ObservedIntervalSet::new(vec![(0.5, 1.0)], (0.0, 2.0), 0.0).unwrap();
        let trunc = LifetimeDistribution::TruncatedLognormalDb {
            mu: 0.0,
            sigma2: 1.0,
            lower: 0.0,
            upper: 1.0,
        };
        assert!(matches!(
            log_likelihood(1.0, &trunc, &set),
            Err(Error::UnsupportedDistribution(_))
        ));
        let exp = LifetimeDistribution::Exponential { scale: 1.0 };
        assert_eq!(
            log_likelihood(-1.0, &exp, &set).unwrap(),
            f64::NEG_INFINITY
        );
        let bad = LifetimeDistribution::Exponential { scale: -1.0 };
        assert_eq!(log_likelihood(1.0, &bad, &set).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn mome_solves_the_moment_equation() {
        // Mean shortened length at half the window maps to scale = L0.
        let (lambda, scale) = mome(&stats(10, 0, 50.0, 10.0, 0.0)).unwrap();
        assert!((scale - 10.0).abs() < 1e-12);
        assert!((lambda - 0.5).abs() < 1e-12);

        assert!(matches!(
            mome(&stats(10, 0, 100.0, 10.0, 0.0)),
            Err(Error::UndefinedEstimate(_))
        ));
    }

    #[test]
    fn pooling_preserves_the_closed_form() {
        // Two identical realizations pooled must reproduce the single-window
        // estimates exactly.
        let single = stats(10, 0, 20.0, 10.0, 0.0);
        let pooled = pool_stats(&[single, single]).unwrap();
        assert_eq!(pooled.n, 20);
        assert_eq!(pooled.windows, 2);
        let (f1, f2) = (
            mle_exponential(&single).unwrap(),
            mle_exponential(&pooled).unwrap(),
        );
        let (ExponentialMle::Estimate { lambda: l1, scale: s1 },
             ExponentialMle::Estimate { lambda: l2, scale: s2 }) = (f1, f2)
        else {
            panic!("expected finite estimates");
        };
        assert!((l1 - l2).abs() < 1e-14);
        assert!((s1 - s2).abs() < 1e-14);
    }

    #[test]
    fn information_bounds_match_analytic_inverse_and_limits() {
        let info = fim_crlb(2.0, 3.0, 6.0, 0.0).unwrap();
        // Direct 2x2 inversion.
        let m = info.matrix;
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        assert!((info.crlb_lambda - m[1][1] / det).abs() < 1e-15);
        assert!((info.crlb_scale - m[0][0] / det).abs() < 1e-15);

        // Both relative bounds coincide.
        let rel_scale = info.crlb_scale / 9.0;
        assert!((info.normalized_crlb - rel_scale).abs() < 1e-15 * rel_scale);

        // Closed form (1 + r) / ((1 + 2r) lambda0 L0) with r = s / L0.
        let r: f64 = 0.5;
        let expected = (1.0 + r) / ((1.0 + 2.0 * r) * 2.0 * 6.0);
        assert!((info.normalized_crlb - expected).abs() < 1e-14);

        // Ratio limits: 1 / (lambda0 L0) as r -> 0, 0.5 / (lambda0 L0) as
        // r -> inf, monotone decreasing in between.
        let lambda0_l0 = 2.0 * 6.0;
        let tiny = fim_crlb(2.0, 1e-6, 6.0, 0.0).unwrap().normalized_crlb;
        assert!((tiny * lambda0_l0 - 1.0).abs() < 1e-4);
        let huge = fim_crlb(2.0, 1e7, 6.0, 0.0).unwrap().normalized_crlb;
        assert!((huge * lambda0_l0 - 0.5).abs() < 1e-4);
        let mut last = tiny;
        for ratio in [0.1, 0.3, 1.0, 3.0, 10.0] {
            let v = fim_crlb(2.0, 6.0 * ratio, 6.0, 0.0).unwrap().normalized_crlb;
            assert!(v < last);
            last = v;
        }
    }

    #[test]
    fn resolution_limit_thins_the_information() {
        let base = fim_crlb(2.0, 3.0, 6.0, 0.0).unwrap();
        let thinned = fim_crlb(2.0, 3.0, 6.0, 0.6).unwrap();
        let factor = (-0.6_f64 / 3.0).exp();
        assert!(
            (thinned.normalized_crlb - base.normalized_crlb / factor).abs()
                < 1e-12 * thinned.normalized_crlb
        );
    }

    #[test]
    fn replicates_scale_the_bounds() {
        let info = fim_crlb(2.0, 3.0, 6.0, 0.0).unwrap();
        let pooled = info.with_replicates(4);
        assert!((pooled.crlb_lambda - info.crlb_lambda / 4.0).abs() < 1e-15);
        assert!(
            (pooled.relative_rmse_floor() - info.relative_rmse_floor() / 2.0).abs() < 1e-15
        );
    }

    #[test]
    fn numeric_mle_recovers_a_lognormal_law() {
        // Resample from the heavy-tailed lognormal law and refit; the fit
        // must reproduce the generating parameters within sampling error.
        let truth = LifetimeDistribution::LognormalDb {
            mu: -16.92,
            sigma2: 94.60,
        };
        let params = BsVrProcessParams {
            lambda: 171.60,
            lifetime: truth,
            x1: 0.0,
            x2: 15.0,
            delta0: 0.075,
        };
        let set = generate_bsvrs(&params, 20.0, 11).unwrap();
        assert!(set.len() > 500, "n = {}", set.len());
        let fit = mle_numeric(&set).unwrap();
        assert!(
            (fit.lambda - 171.60).abs() / 171.60 < 0.15,
            "lambda {}",
            fit.lambda
        );
        assert!((fit.mu - -16.92).abs() / 16.92 < 0.15, "mu {}", fit.mu);
        assert!(
            (fit.sigma2 - 94.60).abs() / 94.60 < 0.15,
            "sigma2 {}",
            fit.sigma2
        );

        // The fit's likelihood dominates the truth's (it is the maximizer).
        let at_truth = log_likelihood(171.60, &truth, &set).unwrap();
        assert!(fit.log_likelihood >= at_truth - 1e-6);
    }

    #[test]
    fn estimate_with_bound_reports_the_shared_floor() {
        let params = BsVrProcessParams {
            lambda: 2.6,
            lifetime: LifetimeDistribution::Exponential { scale: 2.9 },
            x1: 0.0,
            x2: 7.5,
            delta0: 0.23,
        };
        let set = generate_bsvrs(&params, 60.0, 5).unwrap();
        let est = estimate_with_bound(&sufficient_stats(&set)).unwrap();
        assert!(est.lambda > 0.0);
        assert!(est.relative_rmse_floor > 0.0 && est.relative_rmse_floor < 1.0);
    }
}
