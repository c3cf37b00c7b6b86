//! Lifetime laws for visibility intervals.
//!
//! A visibility region born at position `x` on the array axis stays visible
//! for a random length `Y >= 0` drawn from one of the families below. The
//! censored likelihood and the correlation formulas need more than the
//! density: survival functions, partial first moments, and mean-excess
//! integrals all appear in closed form, so each family implements them
//! analytically (tests cross-check every closed form against quadrature).
//!
//! The `*Db` families parameterize a lognormal through its decibel
//! representation: `Y = 10^(X/10)` with `X ~ N(mu, sigma2)`, `mu` in dB and
//! `sigma2` in dB^2. Equivalently `ln Y ~ N(m, psi)` with
//! `m = mu * ln(10) / 10` and `psi = sigma2 * (ln(10) / 10)^2`.

use crate::error::{Error, Result};
use crate::numerics::{norm_cdf, norm_cdf_inv, norm_pdf, norm_sf};
use crate::rng::Rng;
use rand::Rng as _;
use rand_distr::{Distribution, Exp, StandardNormal};
use serde::{Deserialize, Serialize};

/// Scale factor between dB parameters and natural-log parameters.
pub const DB_TO_NAT: f64 = core::f64::consts::LN_10 / 10.0;

/// Lifetime law of a visibility interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum LifetimeDistribution {
    /// Exponential with mean `scale` (meters).
    Exponential { scale: f64 },
    /// Lognormal specified in dB: `10 log10(Y) ~ N(mu, sigma2)`.
    LognormalDb { mu: f64, sigma2: f64 },
    /// Lognormal in dB restricted to `[lower, upper]` and renormalized.
    TruncatedLognormalDb {
        mu: f64,
        sigma2: f64,
        lower: f64,
        upper: f64,
    },
}

impl LifetimeDistribution {
    /// Checks parameter domains; every other method assumes this passed.
    pub fn validate(&self) -> Result<()> {
        match *self {
            LifetimeDistribution::Exponential { scale } => {
                if !(scale.is_finite() && scale > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "exponential scale must be positive and finite, got {scale}"
                    )));
                }
            }
            LifetimeDistribution::LognormalDb { mu, sigma2 } => {
                if !mu.is_finite() || !(sigma2.is_finite() && sigma2 > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "lognormal dB parameters must be finite with sigma2 > 0, got mu={mu} sigma2={sigma2}"
                    )));
                }
            }
            LifetimeDistribution::TruncatedLognormalDb {
                mu,
                sigma2,
                lower,
                upper,
            } => {
                if !mu.is_finite() || !(sigma2.is_finite() && sigma2 > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "lognormal dB parameters must be finite with sigma2 > 0, got mu={mu} sigma2={sigma2}"
                    )));
                }
                if !(lower.is_finite() && upper.is_finite() && 0.0 <= lower && lower < upper) {
                    return Err(Error::InvalidParameter(format!(
                        "truncation must satisfy 0 <= lower < upper < inf, got [{lower}, {upper}]"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Natural-log location and squared scale `(m, psi)` of the lognormal
    /// body, where defined.
    fn log_params(&self) -> Option<(f64, f64)> {
        match *self {
            LifetimeDistribution::LognormalDb { mu, sigma2 }
            | LifetimeDistribution::TruncatedLognormalDb { mu, sigma2, .. } => {
                Some((mu * DB_TO_NAT, sigma2 * DB_TO_NAT * DB_TO_NAT))
            }
            LifetimeDistribution::Exponential { .. } => None,
        }
    }

    /// Mass the untruncated lognormal puts on the truncation interval.
    fn truncation_mass(&self) -> f64 {
        match *self {
            LifetimeDistribution::TruncatedLognormalDb { lower, upper, .. } => {
                let (m, psi) = self.log_params().unwrap();
                let s = psi.sqrt();
                let hi = norm_cdf((upper.ln() - m) / s);
                let lo = if lower == 0.0 {
                    0.0
                } else {
                    norm_cdf((lower.ln() - m) / s)
                };
                hi - lo
            }
            _ => 1.0,
        }
    }

    /// Mean lifetime `E(Y)`.
    pub fn mean(&self) -> f64 {
        match *self {
            LifetimeDistribution::Exponential { scale } => scale,
            LifetimeDistribution::LognormalDb { .. } => {
                let (m, psi) = self.log_params().unwrap();
                (m + 0.5 * psi).exp()
            }
            LifetimeDistribution::TruncatedLognormalDb { lower, upper, .. } => {
                let (m, psi) = self.log_params().unwrap();
                let s = psi.sqrt();
                let shifted = |t: f64| {
                    if t == 0.0 {
                        0.0
                    } else {
                        norm_cdf((t.ln() - m - psi) / s)
                    }
                };
                (m + 0.5 * psi).exp() * (shifted(upper) - shifted(lower)) / self.truncation_mass()
            }
        }
    }

    /// Density `f_Y(y)`.
    pub fn pdf(&self, y: f64) -> f64 {
        match *self {
            LifetimeDistribution::Exponential { scale } => {
                if y < 0.0 {
                    0.0
                } else {
                    (-y / scale).exp() / scale
                }
            }
            LifetimeDistribution::LognormalDb { .. } => {
                if y <= 0.0 {
                    return 0.0;
                }
                let (m, psi) = self.log_params().unwrap();
                let s = psi.sqrt();
                norm_pdf((y.ln() - m) / s) / (y * s)
            }
            LifetimeDistribution::TruncatedLognormalDb {
                mu,
                sigma2,
                lower,
                upper,
            } => {
                if y < lower || y > upper {
                    return 0.0;
                }
                LifetimeDistribution::LognormalDb { mu, sigma2 }.pdf(y) / self.truncation_mass()
            }
        }
    }

    /// Log-density, `-inf` outside the support.
    pub fn ln_pdf(&self, y: f64) -> f64 {
        match *self {
            LifetimeDistribution::Exponential { scale } => {
                if y < 0.0 {
                    f64::NEG_INFINITY
                } else {
                    -scale.ln() - y / scale
                }
            }
            LifetimeDistribution::LognormalDb { .. } => {
                if y <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                let (m, psi) = self.log_params().unwrap();
                let z = y.ln() - m;
                -y.ln() - 0.5 * (2.0 * std::f64::consts::PI * psi).ln() - z * z / (2.0 * psi)
            }
            LifetimeDistribution::TruncatedLognormalDb {
                mu,
                sigma2,
                lower,
                upper,
            } => {
                if y < lower || y > upper {
                    return f64::NEG_INFINITY;
                }
                LifetimeDistribution::LognormalDb { mu, sigma2 }.ln_pdf(y)
                    - self.truncation_mass().ln()
            }
        }
    }

    /// CDF `P(Y <= y)`.
    pub fn cdf(&self, y: f64) -> f64 {
        match *self {
            LifetimeDistribution::Exponential { scale } => {
                if y < 0.0 {
                    0.0
                } else {
                    -(-y / scale).exp_m1()
                }
            }
            LifetimeDistribution::LognormalDb { .. } => {
                if y <= 0.0 {
                    return 0.0;
                }
                let (m, psi) = self.log_params().unwrap();
                norm_cdf((y.ln() - m) / psi.sqrt())
            }
            LifetimeDistribution::TruncatedLognormalDb {
                mu,
                sigma2,
                lower,
                upper,
            } => {
                if y < lower {
                    return 0.0;
                }
                if y >= upper {
                    return 1.0;
                }
                let base = LifetimeDistribution::LognormalDb { mu, sigma2 };
                (base.cdf(y) - base.cdf(lower)) / self.truncation_mass()
            }
        }
    }

    /// Survival function `P(Y > y)`, computed without cancellation in the
    /// upper tail.
    pub fn survival(&self, y: f64) -> f64 {
        match *self {
            LifetimeDistribution::Exponential { scale } => {
                if y < 0.0 {
                    1.0
                } else {
                    (-y / scale).exp()
                }
            }
            LifetimeDistribution::LognormalDb { .. } => {
                if y <= 0.0 {
                    return 1.0;
                }
                let (m, psi) = self.log_params().unwrap();
                norm_sf((y.ln() - m) / psi.sqrt())
            }
            LifetimeDistribution::TruncatedLognormalDb { .. } => 1.0 - self.cdf(y),
        }
    }

    /// Partial first moment `E(Y 1{Y > t})`.
    pub fn upper_partial_mean(&self, t: f64) -> f64 {
        match *self {
            LifetimeDistribution::Exponential { scale } => {
                if t <= 0.0 {
                    scale
                } else {
                    (t + scale) * (-t / scale).exp()
                }
            }
            LifetimeDistribution::LognormalDb { .. } => {
                if t <= 0.0 {
                    return self.mean();
                }
                let (m, psi) = self.log_params().unwrap();
                (m + 0.5 * psi).exp() * norm_cdf((m + psi - t.ln()) / psi.sqrt())
            }
            LifetimeDistribution::TruncatedLognormalDb { lower, upper, .. } => {
                let t = t.max(lower);
                if t >= upper {
                    return 0.0;
                }
                let (m, psi) = self.log_params().unwrap();
                let s = psi.sqrt();
                let shifted = |v: f64| {
                    if v == 0.0 {
                        0.0
                    } else {
                        norm_cdf((v.ln() - m - psi) / s)
                    }
                };
                (m + 0.5 * psi).exp() * (shifted(upper) - shifted(t)) / self.truncation_mass()
            }
        }
    }

    /// Conditional mean `E(Y | Y > t)`; `+inf` when `P(Y > t) = 0`.
    pub fn conditional_mean_above(&self, t: f64) -> f64 {
        match *self {
            // Memorylessness gives the exact form directly.
            LifetimeDistribution::Exponential { scale } => t.max(0.0) + scale,
            _ => {
                let s = self.survival(t);
                if s <= 0.0 {
                    f64::INFINITY
                } else {
                    self.upper_partial_mean(t) / s
                }
            }
        }
    }

    /// Mean excess integral `int_t^inf (y - t) f_Y(y) dy = E((Y - t)^+)`.
    pub fn mean_excess(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return self.mean() - t;
        }
        match *self {
            LifetimeDistribution::Exponential { scale } => scale * (-t / scale).exp(),
            _ => (self.upper_partial_mean(t) - t * self.survival(t)).max(0.0),
        }
    }

    /// Draws one lifetime.
    pub fn sample(&self, rng: &mut Rng) -> f64 {
        match *self {
            LifetimeDistribution::Exponential { scale } => {
                Exp::new(1.0 / scale).expect("validated scale").sample(rng)
            }
            LifetimeDistribution::LognormalDb { .. } => {
                let (m, psi) = self.log_params().unwrap();
                let z: f64 = StandardNormal.sample(rng);
                (m + psi.sqrt() * z).exp()
            }
            LifetimeDistribution::TruncatedLognormalDb { lower, .. } => {
                let (m, psi) = self.log_params().unwrap();
                let s = psi.sqrt();
                let mass = self.truncation_mass();
                let lo = if lower == 0.0 {
                    0.0
                } else {
                    norm_cdf((lower.ln() - m) / s)
                };
                let u: f64 = rng.random();
                (m + s * norm_cdf_inv(lo + u * mass)).exp()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::integrate;
    use crate::rng;

    fn families() -> Vec<LifetimeDistribution> {
        vec![
            LifetimeDistribution::Exponential { scale: 2.9 },
            LifetimeDistribution::LognormalDb {
                mu: -16.92,
                sigma2: 94.60,
            },
            LifetimeDistribution::TruncatedLognormalDb {
                mu: -11.09,
                sigma2: 89.91,
                lower: 0.075,
                upper: 15.0,
            },
        ]
    }

    /// Upper integration cutoff that carries all but ~1e-13 of the mass.
    fn tail_cutoff(dist: &LifetimeDistribution) -> f64 {
        match *dist {
            LifetimeDistribution::Exponential { scale } => 40.0 * scale,
            LifetimeDistribution::LognormalDb { mu, sigma2 } => {
                (mu * DB_TO_NAT + 8.0 * (sigma2 * DB_TO_NAT * DB_TO_NAT).sqrt()).exp()
            }
            LifetimeDistribution::TruncatedLognormalDb { upper, .. } => upper,
        }
    }

    #[test]
    fn densities_normalize() {
        for dist in families() {
            dist.validate().unwrap();
            let total = integrate(|y| dist.pdf(y), 0.0, tail_cutoff(&dist), 1e-11);
            assert!((total - 1.0).abs() < 1e-8, "{dist:?}: mass {total}");
        }
    }

    #[test]
    fn closed_form_moments_match_quadrature() {
        for dist in families() {
            let hi = tail_cutoff(&dist);
            let mean_quad = integrate(|y| y * dist.pdf(y), 0.0, hi, 1e-12);
            assert!(
                (dist.mean() - mean_quad).abs() < 1e-7 * (1.0 + mean_quad),
                "{dist:?}: mean {} vs {mean_quad}",
                dist.mean()
            );

            for t in [0.0, 0.05, 0.075, 0.3, 1.0, 4.0] {
                let partial_quad = integrate(|y| y * dist.pdf(y), t, hi.max(t), 1e-12);
                assert!(
                    (dist.upper_partial_mean(t) - partial_quad).abs()
                        < 1e-7 * (1.0 + partial_quad),
                    "{dist:?}: partial mean at {t}: {} vs {partial_quad}",
                    dist.upper_partial_mean(t)
                );

                let excess_quad = integrate(|y| (y - t) * dist.pdf(y), t, hi.max(t), 1e-12);
                assert!(
                    (dist.mean_excess(t) - excess_quad).abs() < 1e-7 * (1.0 + excess_quad),
                    "{dist:?}: mean excess at {t}: {} vs {excess_quad}",
                    dist.mean_excess(t)
                );

                let surv_quad = integrate(|y| dist.pdf(y), t, hi.max(t), 1e-12);
                assert!(
                    (dist.survival(t) - surv_quad).abs() < 1e-8,
                    "{dist:?}: survival at {t}: {} vs {surv_quad}",
                    dist.survival(t)
                );
            }
        }
    }

    #[test]
    fn conditional_mean_is_partial_over_survival() {
        for dist in families() {
            for t in [0.0, 0.075, 0.5, 2.0] {
                let expected = dist.upper_partial_mean(t) / dist.survival(t);
                let got = dist.conditional_mean_above(t);
                assert!(
                    (got - expected).abs() < 1e-10 * (1.0 + expected),
                    "{dist:?} at {t}: {got} vs {expected}"
                );
            }
        }
    }

    #[test]
    fn db_parameterization_recovers_published_scale() {
        // mu = -16.92 dB, sigma2 = 94.60 dB^2 corresponds to a quarter-meter
        // mean lifetime.
        let dist = LifetimeDistribution::LognormalDb {
            mu: -16.92,
            sigma2: 94.60,
        };
        assert!((dist.mean() - 0.25).abs() < 2e-3);
    }

    #[test]
    fn sampling_matches_distribution() {
        let mut rng = rng::master(42);
        let exp = LifetimeDistribution::Exponential { scale: 2.9 };
        let n = 200_000;
        let mean: f64 = (0..n).map(|_| exp.sample(&mut rng)).sum::<f64>() / n as f64;
        assert!((mean - 2.9).abs() < 0.03);

        // Lognormal tails are heavy; check the median instead of the mean.
        let logn = LifetimeDistribution::LognormalDb {
            mu: -16.92,
            sigma2: 94.60,
        };
        let mut draws: Vec<f64> = (0..n).map(|_| logn.sample(&mut rng)).collect();
        draws.sort_by(f64::total_cmp);
        let median = draws[n / 2];
        let expected_median = (-16.92 * DB_TO_NAT).exp();
        assert!(
            (median - expected_median).abs() < 0.02 * expected_median,
            "median {median} vs {expected_median}"
        );

        let trunc = LifetimeDistribution::TruncatedLognormalDb {
            mu: -11.09,
            sigma2: 89.91,
            lower: 0.075,
            upper: 15.0,
        };
        let mut below = 0usize;
        for _ in 0..50_000 {
            let y = trunc.sample(&mut rng);
            assert!((0.075..=15.0).contains(&y));
            if y <= 1.0 {
                below += 1;
            }
        }
        let expected = trunc.cdf(1.0);
        let got = below as f64 / 50_000.0;
        assert!((got - expected).abs() < 0.01, "{got} vs {expected}");
    }

    #[test]
    fn validation_rejects_bad_parameters() {
        assert!(LifetimeDistribution::Exponential { scale: 0.0 }
            .validate()
            .is_err());
        assert!(LifetimeDistribution::LognormalDb {
            mu: f64::NAN,
            sigma2: 1.0
        }
        .validate()
        .is_err());
        assert!(LifetimeDistribution::LognormalDb {
            mu: 0.0,
            sigma2: -1.0
        }
        .validate()
        .is_err());
        assert!(LifetimeDistribution::TruncatedLognormalDb {
            mu: 0.0,
            sigma2: 1.0,
            lower: 2.0,
            upper: 1.0
        }
        .validate()
        .is_err());
    }
}
