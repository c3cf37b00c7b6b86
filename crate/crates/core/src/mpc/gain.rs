//! Gaussian gain profile of MPC visibility regions and component-count
//! sizing.
//!
//! Each multipath component is visible inside a disc whose radius is
//! drawn from a lognormal law specified in decibels
//! (`R = 10^(X/10)`, `X ~ Normal(mu, sigma2)`).  Its contribution to the
//! channel is shaped by a Gaussian amplitude profile centered in the disc
//! whose width equals the disc radius, so the amplitude has dropped by
//! about 4.3 dB one width away from the center.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lifetime::DB_TO_NAT;
use crate::numerics::{norm_cdf, norm_sf};
use crate::rng::Rng;

/// Gaussian amplitude profile of one MPC visibility region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainFunctionParams {
    /// Profile center in the horizontal plane (meters).
    pub center: [f64; 2],
    /// Profile width (meters); identical to the region radius.
    pub width: f64,
}

impl GainFunctionParams {
    /// Checks that the profile is well formed.
    pub fn validate(&self) -> Result<()> {
        if !(self.center[0].is_finite() && self.center[1].is_finite()) {
            return Err(Error::InvalidParameter(
                "gain profile center must be finite".into(),
            ));
        }
        if !(self.width.is_finite() && self.width > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "gain profile width must be positive, got {}",
                self.width
            )));
        }
        Ok(())
    }

    /// Amplitude factor `exp(-d^2 / (2 width^2))` at horizontal distance
    /// `d` from the center; always in `(0, 1]`.
    pub fn gain(&self, point: [f64; 2]) -> f64 {
        let dx = point[0] - self.center[0];
        let dy = point[1] - self.center[1];
        let d2 = dx * dx + dy * dy;
        (-d2 / (2.0 * self.width * self.width)).exp()
    }
}

/// Draws one visibility-region radius `10^(X/10)` with
/// `X ~ Normal(mu, sigma2)` (decibel parameters).
///
/// A zero variance yields the deterministic radius `10^(mu/10)`; the
/// normal draw is still consumed so random streams stay aligned across
/// configurations that differ only in this variance.
pub fn sample_radius(mu: f64, sigma2: f64, rng: &mut Rng) -> f64 {
    let z: f64 = StandardNormal.sample(rng);
    let x = mu + sigma2.sqrt() * z;
    10f64.powf(x / 10.0)
}

/// Largest component count the sizing formula will return.
const MAX_MPC_COUNT: f64 = 1e9;

/// Number of components a region must carry so that a user inside it
/// sees `n_eff` of them on average.
///
/// Component visibility-disc centers are uniform in the region of radius
/// `r_c`, so a user near the region center is covered by one disc with
/// probability `E(R^2) / r_c^2`, giving
///
/// ```text
/// N = ceil( n_eff * r_c^2 / E(min(R, r_c)^2) ),
/// ```
///
/// where `R` is dB-lognormal with `m' = mu_r * ln(10)/10` and
/// `psi' = sigma2_r * (ln(10)/10)^2`.  Because each component disc lives
/// inside its parent region, radii are clamped at `r_c`; the clamped
/// second moment is
///
/// ```text
/// E(min(R, c)^2) = exp(2m' + 2psi') * Phi((ln c - m' - 2psi')/sqrt(psi'))
///                + c^2 * (1 - Phi((ln c - m')/sqrt(psi'))).
/// ```
///
/// The sentinel `mu_r = +inf` means visibility discs cover everything
/// (the gain feature is disabled), so every component is always seen and
/// `N = ceil(n_eff)`.
pub fn required_num_mpcs(n_eff: f64, r_c: f64, mu_r: f64, sigma2_r: f64) -> Result<u64> {
    if !(n_eff.is_finite() && n_eff > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "effective component count must be positive and finite, got {n_eff}"
        )));
    }
    if !(r_c.is_finite() && r_c > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "region radius must be positive and finite, got {r_c}"
        )));
    }
    if mu_r == f64::INFINITY {
        return Ok(n_eff.ceil() as u64);
    }
    if !mu_r.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "radius location must be finite (or +inf to disable), got {mu_r}"
        )));
    }
    if !(sigma2_r.is_finite() && sigma2_r >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "radius variance must be nonnegative and finite, got {sigma2_r}"
        )));
    }
    let m = mu_r * DB_TO_NAT;
    let psi = sigma2_r * DB_TO_NAT * DB_TO_NAT;
    let second_moment = if psi == 0.0 {
        m.exp().min(r_c).powi(2)
    } else {
        let std = psi.sqrt();
        let ln_c = r_c.ln();
        let below = (2.0 * m + 2.0 * psi).exp() * norm_cdf((ln_c - m - 2.0 * psi) / std);
        let above = r_c * r_c * norm_sf((ln_c - m) / std);
        below + above
    };
    let raw = n_eff * r_c * r_c / second_moment;
    // Snap to the nearest integer before rounding up so roundoff in the
    // moment evaluation cannot inflate an exact ratio by one component.
    let nearest = raw.round();
    let count = if (raw - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest
    } else {
        raw.ceil()
    };
    if !(count.is_finite() && count >= 1.0 && count <= MAX_MPC_COUNT) {
        return Err(Error::InvalidParameter(format!(
            "component count {count} is outside the supported range 1..={MAX_MPC_COUNT}"
        )));
    }
    Ok(count as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn gain_profile_reference_points() {
        let profile = GainFunctionParams {
            center: [1.0, -2.0],
            width: 0.5,
        };
        profile.validate().unwrap();
        assert_eq!(profile.gain([1.0, -2.0]), 1.0);
        // One width from the center the amplitude is exp(-1/2),
        // a drop of about 4.3 dB.
        let one_width = profile.gain([1.5, -2.0]);
        assert_abs_diff_eq!(one_width, (-0.5f64).exp(), epsilon = 1e-15);
        let drop_db = -20.0 * one_width.log10();
        assert!((4.3..4.4).contains(&drop_db), "drop = {drop_db} dB");
        // Radially symmetric and decreasing.
        assert_abs_diff_eq!(
            profile.gain([1.0, -1.5]),
            one_width,
            epsilon = 1e-15
        );
        assert!(profile.gain([2.0, -2.0]) < one_width);
    }

    #[test]
    fn gain_profile_validation() {
        assert!(GainFunctionParams { center: [0.0, 0.0], width: 0.0 }
            .validate()
            .is_err());
        assert!(GainFunctionParams { center: [f64::NAN, 0.0], width: 1.0 }
            .validate()
            .is_err());
        assert!(GainFunctionParams { center: [0.0, 0.0], width: f64::INFINITY }
            .validate()
            .is_err());
    }

    #[test]
    fn degenerate_variance_gives_deterministic_radius() {
        let mu = 10.0 * 0.5f64.log10();
        let mut rng = rng::master(3);
        for _ in 0..5 {
            assert_relative_eq!(sample_radius(mu, 0.0, &mut rng), 0.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn identical_seeds_give_identical_radius_sequences() {
        let mut a = rng::substream(9, 4);
        let mut b = rng::substream(9, 4);
        for _ in 0..5 {
            let ra = sample_radius(-19.8, 101.3, &mut a);
            let rb = sample_radius(-19.8, 101.3, &mut b);
            assert_eq!(ra.to_bits(), rb.to_bits());
        }
    }

    #[test]
    fn sampled_mean_matches_lognormal_moment() {
        let (mu, sigma2) = (-19.8, 101.3);
        let m = mu * DB_TO_NAT;
        let psi = sigma2 * DB_TO_NAT * DB_TO_NAT;
        let expected = (m + 0.5 * psi).exp();
        let mut rng = rng::master(0x52414449);
        let n = 10_000_000;
        let mut sum = 0.0;
        for _ in 0..n {
            sum += sample_radius(mu, sigma2, &mut rng);
        }
        let mean = sum / n as f64;
        assert!(
            (mean / expected - 1.0).abs() < 0.01,
            "sample mean {mean} vs {expected}"
        );
    }

    #[test]
    fn sampled_median_matches_db_location() {
        let (mu, sigma2) = (-19.8, 101.3);
        let expected = 10f64.powf(mu / 10.0);
        let mut rng = rng::master(0x4d454449);
        let n = 1_000_000;
        let mut draws: Vec<f64> = (0..n).map(|_| sample_radius(mu, sigma2, &mut rng)).collect();
        draws.sort_unstable_by(f64::total_cmp);
        let median = 0.5 * (draws[n / 2 - 1] + draws[n / 2]);
        assert!(
            (median / expected - 1.0).abs() < 0.01,
            "sample median {median} vs {expected}"
        );
    }

    #[test]
    fn component_count_reference_values() {
        // Production indoor parametrization; the published table rounds
        // this to 1000 components per cluster.
        assert_eq!(required_num_mpcs(10.0, 5.0, -19.8, 102.01).unwrap(), 1113);
        // Fixed half-meter radius: E(R^2) = 0.25.
        let mu_half = 10.0 * 0.5f64.log10();
        assert_eq!(required_num_mpcs(100.0, 2.0, mu_half, 0.0).unwrap(), 1600);
        // Infinite-radius sentinel disables the visibility discs.
        assert_eq!(required_num_mpcs(10.0, 5.0, f64::INFINITY, 102.01).unwrap(), 10);
        assert_eq!(required_num_mpcs(9.5, 5.0, f64::INFINITY, 0.0).unwrap(), 10);
    }

    #[test]
    fn component_count_validation() {
        assert!(required_num_mpcs(0.0, 5.0, -19.8, 102.01).is_err());
        assert!(required_num_mpcs(10.0, 0.0, -19.8, 102.01).is_err());
        assert!(required_num_mpcs(10.0, 5.0, f64::NEG_INFINITY, 102.01).is_err());
        assert!(required_num_mpcs(10.0, 5.0, -19.8, -1.0).is_err());
        // Vanishing radii blow the count past any practical bound.
        assert!(required_num_mpcs(10.0, 5.0, -200.0, 0.0).is_err());
    }
}
