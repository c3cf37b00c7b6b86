//! Chord-length law of straight-line crossings through circular
//! visibility regions.
//!
//! A terminal moving on a straight line through a plane sprinkled with
//! discs observes each disc for the length of the chord it cuts.  For a
//! disc of radius `R` crossed by a uniformly offset line, the chord length
//! `Y` has CDF
//!
//! ```text
//! F(y; R) = 1 - sqrt(1 - (y / 2R)^2),          0 <= y < 2R,
//! ```
//!
//! with `F = 0` below and `F = 1` above that range.  When the disc radius
//! is itself random with density `f`, a line hits a disc with probability
//! proportional to its radius, so the observed chord law is the
//! radius-weighted mixture
//!
//! ```text
//! F(y) = (1 / E(R)) * integral r * F(y; r) * f(r) dr .
//! ```
//!
//! Both forms are provided here, together with the discrete radius law
//! ([`RadiusPmf`]) used by the deconvolution solver in [`crate::mpc::qp`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lifetime::DB_TO_NAT;
use crate::numerics::integrate;

/// CDF of the chord length cut from a disc of radius `radius` by a line
/// with uniformly distributed perpendicular offset.
///
/// A zero radius is the degenerate disc: every crossing has length zero,
/// so the CDF is a unit step at the origin.
pub fn chord_cdf(y: f64, radius: f64) -> f64 {
    if y < 0.0 {
        return 0.0;
    }
    if radius <= 0.0 {
        return 1.0;
    }
    let u = y / (2.0 * radius);
    if u >= 1.0 {
        1.0
    } else {
        1.0 - (1.0 - u * u).sqrt()
    }
}

/// Discrete radius law on a strictly increasing support grid.
///
/// Weights are validated to be nonnegative and to sum to one within
/// `1e-9`; the support may include zero (a degenerate disc).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusPmf {
    radii: Vec<f64>,
    weights: Vec<f64>,
}

impl RadiusPmf {
    /// Builds a validated PMF from matching radius/weight vectors.
    pub fn new(radii: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        let pmf = Self { radii, weights };
        pmf.validate()?;
        Ok(pmf)
    }

    /// Checks support ordering, weight positivity, and normalization.
    pub fn validate(&self) -> Result<()> {
        if self.radii.is_empty() {
            return Err(Error::InvalidParameter(
                "radius PMF must have at least one support point".into(),
            ));
        }
        if self.radii.len() != self.weights.len() {
            return Err(Error::InvalidParameter(format!(
                "radius PMF has {} radii but {} weights",
                self.radii.len(),
                self.weights.len()
            )));
        }
        for pair in self.radii.windows(2) {
            if !(pair[1] > pair[0]) {
                return Err(Error::InvalidParameter(
                    "radius PMF support must be strictly increasing".into(),
                ));
            }
        }
        if !self.radii.iter().all(|r| r.is_finite() && *r >= 0.0) {
            return Err(Error::InvalidParameter(
                "radius PMF support must be finite and nonnegative".into(),
            ));
        }
        if !self.weights.iter().all(|w| w.is_finite() && *w >= 0.0) {
            return Err(Error::InvalidParameter(
                "radius PMF weights must be finite and nonnegative".into(),
            ));
        }
        let total: f64 = self.weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "radius PMF weights sum to {total}, expected 1"
            )));
        }
        Ok(())
    }

    /// Support points.
    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    /// Probability masses, aligned with [`Self::radii`].
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Number of support points.
    pub fn len(&self) -> usize {
        self.radii.len()
    }

    /// True when the PMF has no support points (never after validation).
    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    /// Mean radius `E(R)`.
    pub fn mean(&self) -> f64 {
        self.radii
            .iter()
            .zip(&self.weights)
            .map(|(r, w)| r * w)
            .sum()
    }

    /// Second moment `E(R^2)`.
    pub fn second_moment(&self) -> f64 {
        self.radii
            .iter()
            .zip(&self.weights)
            .map(|(r, w)| r * r * w)
            .sum()
    }

    /// Running sums of the weights; the last entry is the total mass.
    pub fn cumulative(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect()
    }

    /// Step CDF evaluated at `r` (mass at support points `<= r`).
    pub fn cdf(&self, r: f64) -> f64 {
        self.radii
            .iter()
            .zip(&self.weights)
            .take_while(|(support, _)| **support <= r)
            .map(|(_, w)| w)
            .sum()
    }
}

/// Radius law of the circular visibility regions: either a discrete PMF
/// or a lognormal expressed through its decibel parameters, where the
/// radius is `10^(X/10)` with `X ~ Normal(mu, sigma2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum RadiusDistribution {
    /// Discrete radius law.
    Pmf(RadiusPmf),
    /// Lognormal radius law in decibel parametrization.
    LognormalDb {
        /// Mean of the dB-domain normal variable.
        mu: f64,
        /// Variance of the dB-domain normal variable.
        sigma2: f64,
    },
}

impl RadiusDistribution {
    /// Validates the parametrization.
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Pmf(pmf) => pmf.validate(),
            Self::LognormalDb { mu, sigma2 } => {
                if !mu.is_finite() || !sigma2.is_finite() || *sigma2 <= 0.0 {
                    Err(Error::InvalidParameter(format!(
                        "lognormal radius law requires finite mu and sigma2 > 0, got ({mu}, {sigma2})"
                    )))
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Natural-log parameters `(m, psi)` of the radius `R = 10^(X/10)`.
    ///
    /// Only defined for the lognormal branch.
    pub fn log_params(&self) -> Option<(f64, f64)> {
        match self {
            Self::Pmf(_) => None,
            Self::LognormalDb { mu, sigma2 } => {
                Some((mu * DB_TO_NAT, sigma2 * DB_TO_NAT * DB_TO_NAT))
            }
        }
    }

    /// Mean radius `E(R)`.
    pub fn mean_radius(&self) -> f64 {
        match self {
            Self::Pmf(pmf) => pmf.mean(),
            Self::LognormalDb { .. } => {
                let (m, psi) = self.log_params().expect("lognormal branch");
                (m + 0.5 * psi).exp()
            }
        }
    }

    /// Second moment `E(R^2)`.
    pub fn second_moment(&self) -> f64 {
        match self {
            Self::Pmf(pmf) => pmf.second_moment(),
            Self::LognormalDb { .. } => {
                let (m, psi) = self.log_params().expect("lognormal branch");
                (2.0 * m + 2.0 * psi).exp()
            }
        }
    }

    /// Density of the lognormal branch at radius `r` (`None` for a PMF).
    pub fn density(&self, r: f64) -> Option<f64> {
        let (m, psi) = self.log_params()?;
        if r <= 0.0 || !r.is_finite() {
            return Some(0.0);
        }
        let z = r.ln() - m;
        Some((-z * z / (2.0 * psi)).exp() / (r * (2.0 * std::f64::consts::PI * psi).sqrt()))
    }
}

/// Radius-weighted mixture chord CDF
/// `F(y) = (1 / E(R)) * sum_i r_i * F(y; r_i) * w_i` (or the corresponding
/// integral for a continuous radius law).
///
/// Errors with [`Error::UnsupportedDistribution`] when the mean radius is
/// zero, since no line ever crosses a degenerate disc.
pub fn mixture_chord_cdf(y: f64, dist: &RadiusDistribution) -> Result<f64> {
    dist.validate()?;
    if y < 0.0 {
        return Ok(0.0);
    }
    match dist {
        RadiusDistribution::Pmf(pmf) => {
            let mean = pmf.mean();
            if mean <= 0.0 {
                return Err(Error::UnsupportedDistribution(
                    "mixture chord law requires a positive mean radius".into(),
                ));
            }
            let weighted: f64 = pmf
                .radii()
                .iter()
                .zip(pmf.weights())
                .map(|(r, w)| r * w * chord_cdf(y, *r))
                .sum();
            Ok((weighted / mean).clamp(0.0, 1.0))
        }
        RadiusDistribution::LognormalDb { .. } => {
            if y == 0.0 {
                return Ok(0.0);
            }
            let (m, psi) = dist.log_params().expect("lognormal branch");
            let mean = dist.mean_radius();
            // Survival mass of the radius-weighted mixture:
            //   integral_{y/2}^inf r * sqrt(1 - (y / 2r)^2) * f(r) dr,
            // mapped onto u = (y/2) / r in (0, 1], which turns the
            // unbounded radius integral into
            //   (y/2)^2 * integral_0^1 u^-3 * sqrt(1 - u^2) * f((y/2)/u) du.
            let half = 0.5 * y;
            let integrand = |u: f64| -> f64 {
                if u <= 0.0 || u >= 1.0 {
                    return 0.0;
                }
                let r = half / u;
                if !r.is_finite() {
                    return 0.0;
                }
                let z = r.ln() - m;
                let density =
                    (-z * z / (2.0 * psi)).exp() / (r * (2.0 * std::f64::consts::PI * psi).sqrt());
                (1.0 - u * u).sqrt() * density / (u * u * u)
            };
            let tail = integrate(&integrand, 0.0, 1.0, 1e-12);
            Ok((1.0 - half * half * tail / mean).clamp(0.0, 1.0))
        }
    }
}

/// Chord-length sampling grid `{0.0025, 0.0525, ..., 14.9525}` (300
/// points, 0.05 m apart).
pub fn default_chord_grid() -> Vec<f64> {
    (0..300).map(|k| (k as f64).mul_add(0.05, 0.0025)).collect()
}

/// Radius sampling grid `{0.000, 0.025, ..., 23.000}` (921 points,
/// 0.025 m apart).
pub fn default_radius_grid() -> Vec<f64> {
    (0..921).map(|k| k as f64 * 0.025).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lifetime::LifetimeDistribution;
    use crate::numerics::norm_cdf;
    use crate::rng;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::Rng as _;
    use rand_distr::Distribution as _;

    #[test]
    fn chord_cdf_reference_values() {
        let r = 3.0;
        assert_eq!(chord_cdf(-1.0, r), 0.0);
        assert_eq!(chord_cdf(0.0, r), 0.0);
        // At y = R the chord CDF equals 1 - sqrt(3)/2.
        assert_abs_diff_eq!(chord_cdf(r, r), 1.0 - 3f64.sqrt() / 2.0, epsilon = 1e-15);
        assert_eq!(chord_cdf(2.0 * r, r), 1.0);
        assert_eq!(chord_cdf(100.0, r), 1.0);
        assert!(chord_cdf(2.0 * r - 1e-9, r) < 1.0);
    }

    #[test]
    fn chord_cdf_degenerate_radius_is_unit_step() {
        assert_eq!(chord_cdf(-1e-12, 0.0), 0.0);
        assert_eq!(chord_cdf(0.0, 0.0), 1.0);
        assert_eq!(chord_cdf(5.0, 0.0), 1.0);
    }

    #[test]
    fn chord_cdf_matches_uniform_offset_sampling() {
        // Oracle: a line at uniform perpendicular offset h in (0, R) cuts a
        // chord of length 2 sqrt(R^2 - h^2).
        let radius = 2.5;
        let mut rng = rng::master(0x4348_4f52);
        let n = 400_000;
        for y in [1.0, 2.5, 4.0, 4.9] {
            let mut hits = 0u64;
            for _ in 0..n {
                let h: f64 = rng.random_range(0.0..radius);
                let chord = 2.0 * (radius * radius - h * h).sqrt();
                if chord <= y {
                    hits += 1;
                }
            }
            let empirical = hits as f64 / n as f64;
            let expected = chord_cdf(y, radius);
            let se = (expected * (1.0 - expected) / n as f64).sqrt();
            assert!(
                (empirical - expected).abs() < 4.0 * se + 1e-4,
                "y={y}: empirical {empirical} vs {expected}"
            );
        }
    }

    #[test]
    fn chord_cdf_is_convex_where_lifetime_lognormal_is_concave() {
        // Single-disc chord CDFs curve upward on (0, 2R) while the fitted
        // lognormal lifetime law curves downward over the sampling grid, so
        // no single radius can reproduce it; a radius mixture is required.
        let grid = default_chord_grid();
        let radius = 7.5;
        let chord: Vec<f64> = grid.iter().map(|y| chord_cdf(*y, radius)).collect();
        let lifetime = LifetimeDistribution::LognormalDb {
            mu: -16.92,
            sigma2: 94.60,
        };
        let target: Vec<f64> = grid.iter().map(|y| lifetime.cdf(*y)).collect();
        for i in 1..grid.len() - 1 {
            if grid[i + 1] < 2.0 * radius {
                let second = chord[i + 1] - 2.0 * chord[i] + chord[i - 1];
                assert!(second > -1e-12, "chord CDF not convex at {}", grid[i]);
            }
            let second = target[i + 1] - 2.0 * target[i] + target[i - 1];
            assert!(second < 1e-12, "lognormal target not concave at {}", grid[i]);
        }
    }

    #[test]
    fn point_mass_mixture_reduces_to_single_disc() {
        let pmf = RadiusPmf::new(vec![2.0], vec![1.0]).unwrap();
        let dist = RadiusDistribution::Pmf(pmf);
        for y in [0.0, 0.5, 2.0, 3.9, 4.0, 10.0] {
            assert_abs_diff_eq!(
                mixture_chord_cdf(y, &dist).unwrap(),
                chord_cdf(y, 2.0),
                epsilon = 1e-15
            );
        }
    }

    #[test]
    fn discrete_mixture_weights_by_radius() {
        let pmf = RadiusPmf::new(vec![1.0, 3.0], vec![0.5, 0.5]).unwrap();
        let dist = RadiusDistribution::Pmf(pmf);
        let y = 1.5;
        let expected = (1.0 * 0.5 * chord_cdf(y, 1.0) + 3.0 * 0.5 * chord_cdf(y, 3.0)) / 2.0;
        assert_abs_diff_eq!(mixture_chord_cdf(y, &dist).unwrap(), expected, epsilon = 1e-15);
        // Beyond every diameter the mixture saturates at one.
        assert_abs_diff_eq!(mixture_chord_cdf(6.0, &dist).unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn zero_mean_radius_is_rejected() {
        let pmf = RadiusPmf::new(vec![0.0], vec![1.0]).unwrap();
        let err = mixture_chord_cdf(1.0, &RadiusDistribution::Pmf(pmf)).unwrap_err();
        assert_eq!(err.kind(), "unsupported_distribution");
    }

    #[test]
    fn lognormal_mixture_matches_log_domain_quadrature() {
        // Independent oracle: integrate the survival mass in the Gaussian
        // z-domain, r = exp(m + sqrt(psi) z), instead of the u-substitution
        // used by the implementation.
        let dist = RadiusDistribution::LognormalDb {
            mu: -19.8,
            sigma2: 101.3,
        };
        let (m, psi) = dist.log_params().unwrap();
        let mean = dist.mean_radius();
        for y in [0.01f64, 0.1, 1.0, 5.0, 14.0] {
            let half = 0.5 * y;
            let z0 = (half.ln() - m) / psi.sqrt();
            let integrand = |z: f64| -> f64 {
                let r = (m + psi.sqrt() * z).exp();
                let u = half / r;
                let phi = (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
                r * (1.0 - u * u).max(0.0).sqrt() * phi
            };
            let hi = z0.max(psi.sqrt()) + 40.0;
            let tail = integrate(&integrand, z0, hi, 1e-13);
            let oracle = 1.0 - tail / mean;
            let value = mixture_chord_cdf(y, &dist).unwrap();
            assert_abs_diff_eq!(value, oracle, epsilon = 1e-9);
        }
    }

    #[test]
    fn lognormal_mixture_matches_length_biased_sampling() {
        // A line hits a disc with probability proportional to its radius, so
        // the radius of a crossed disc is the length-biased draw
        // lognormal(m + psi, psi); the chord given the radius uses the
        // uniform-offset construction.
        let dist = RadiusDistribution::LognormalDb {
            mu: -19.8,
            sigma2: 101.3,
        };
        let (m, psi) = dist.log_params().unwrap();
        let mut rng = rng::master(0x4c42_4d43);
        let n = 300_000;
        let ys = [0.05, 0.5, 2.0];
        let mut hits = [0u64; 3];
        for _ in 0..n {
            let z: f64 = rand_distr::StandardNormal.sample(&mut rng);
            let radius = (m + psi + psi.sqrt() * z).exp();
            let h: f64 = rng.random_range(0.0..1.0) * radius;
            let chord = 2.0 * (radius * radius - h * h).sqrt();
            for (k, y) in ys.iter().enumerate() {
                if chord <= *y {
                    hits[k] += 1;
                }
            }
        }
        for (k, y) in ys.iter().enumerate() {
            let empirical = hits[k] as f64 / n as f64;
            let expected = mixture_chord_cdf(*y, &dist).unwrap();
            let se = (expected * (1.0 - expected) / n as f64).sqrt();
            assert!(
                (empirical - expected).abs() < 4.0 * se + 2e-4,
                "y={y}: empirical {empirical} vs {expected}"
            );
        }
    }

    #[test]
    fn lognormal_mixture_is_monotone_cdf() {
        let dist = RadiusDistribution::LognormalDb {
            mu: -19.8,
            sigma2: 101.3,
        };
        let mut last = 0.0;
        for k in 0..30 {
            let y = 0.0025 + 0.5 * k as f64;
            let value = mixture_chord_cdf(y, &dist).unwrap();
            assert!((0.0..=1.0).contains(&value));
            assert!(value >= last - 1e-12, "not monotone at y = {y}");
            last = value;
        }
    }

    #[test]
    fn lognormal_moments_match_db_mapping() {
        let dist = RadiusDistribution::LognormalDb {
            mu: -19.8,
            sigma2: 102.01,
        };
        let c = std::f64::consts::LN_10 / 10.0;
        let m = -19.8 * c;
        let psi = 102.01 * c * c;
        assert_relative_eq!(dist.mean_radius(), (m + psi / 2.0).exp(), epsilon = 1e-12);
        assert_relative_eq!(
            dist.second_moment(),
            (2.0 * m + 2.0 * psi).exp(),
            epsilon = 1e-12
        );
        // Median radius is 10^(mu/10).
        let median = 10f64.powf(-19.8 / 10.0);
        let cdf_at_median = mixture_chord_cdf(0.0, &dist).unwrap();
        assert_eq!(cdf_at_median, 0.0);
        assert_abs_diff_eq!(norm_cdf((median.ln() - m) / psi.sqrt()), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn pmf_validation_rejects_malformed_input() {
        assert!(RadiusPmf::new(vec![], vec![]).is_err());
        assert!(RadiusPmf::new(vec![1.0, 1.0], vec![0.5, 0.5]).is_err());
        assert!(RadiusPmf::new(vec![2.0, 1.0], vec![0.5, 0.5]).is_err());
        assert!(RadiusPmf::new(vec![1.0], vec![0.9]).is_err());
        assert!(RadiusPmf::new(vec![1.0, 2.0], vec![1.5, -0.5]).is_err());
        assert!(RadiusPmf::new(vec![1.0], vec![1.0]).is_ok());
        assert!(RadiusDistribution::LognormalDb { mu: 0.0, sigma2: 0.0 }
            .validate()
            .is_err());
    }

    #[test]
    fn pmf_summaries_are_consistent() {
        let pmf = RadiusPmf::new(vec![0.0, 1.0, 2.0], vec![0.2, 0.3, 0.5]).unwrap();
        assert_relative_eq!(pmf.mean(), 1.3, epsilon = 1e-15);
        assert_relative_eq!(pmf.second_moment(), 2.3, epsilon = 1e-15);
        assert_eq!(pmf.cumulative(), vec![0.2, 0.5, 1.0]);
        assert_relative_eq!(pmf.cdf(0.5), 0.2, epsilon = 1e-15);
        assert_relative_eq!(pmf.cdf(1.0), 0.5, epsilon = 1e-15);
        assert_relative_eq!(pmf.cdf(5.0), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn default_grids_match_documented_shapes() {
        let chords = default_chord_grid();
        assert_eq!(chords.len(), 300);
        assert_abs_diff_eq!(chords[0], 0.0025, epsilon = 1e-12);
        assert_abs_diff_eq!(chords[299], 14.9525, epsilon = 1e-12);
        let radii = default_radius_grid();
        assert_eq!(radii.len(), 921);
        assert_eq!(radii[0], 0.0);
        assert_abs_diff_eq!(radii[920], 23.0, epsilon = 1e-9);
        assert_abs_diff_eq!(radii[1], 0.025, epsilon = 1e-12);
    }

    #[test]
    fn radius_distribution_serde_round_trip() {
        let pmf = RadiusPmf::new(vec![0.5, 1.5], vec![0.25, 0.75]).unwrap();
        for dist in [
            RadiusDistribution::Pmf(pmf),
            RadiusDistribution::LognormalDb {
                mu: -19.8,
                sigma2: 101.3,
            },
        ] {
            let text = serde_json::to_string(&dist).unwrap();
            let back: RadiusDistribution = serde_json::from_str(&text).unwrap();
            assert_eq!(back, dist);
        }
    }
}
