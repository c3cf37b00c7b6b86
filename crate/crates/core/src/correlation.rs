//! Closed-form autocorrelation functions of cluster and component
//! visibility.
//!
//! Three correlation mechanisms are covered:
//!
//! - **Array side** ([`acf_bs`]): the number of visibility intervals
//!   covering two array positions a displacement apart.  For lifetime law
//!   `Y` the count ACF is `E((Y - d)+) / E(Y)`, which specializes to
//!   `exp(-d / scale)` for exponential lifetimes.
//! - **Terminal side** ([`acf_circular`], [`acf_circular_mixture`]): the
//!   number of discs covering two planar positions, proportional to the
//!   lens-shaped intersection area of two equal discs; mixtures over a
//!   radius law weight each radius by its disc area.
//! - **Joint and small-scale-fading forms** ([`acf_joint`],
//!   [`acf_ssf_bound`]): the array- and terminal-side factors multiply,
//!   and the small-scale-fading ACF with per-component visibility applied
//!   is the product of the plain fading ACF and the component-count ACF,
//!   so its magnitude never exceeds the latter.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lifetime::LifetimeDistribution;
use crate::mpc::chord::RadiusDistribution;
use crate::numerics::integrate;

/// Count ACF along the array for visibility intervals with the given
/// lifetime law: `E((Y - |d|)+) / E(Y)`.  Symmetric in the displacement;
/// exponential lifetimes give exactly `exp(-|d| / scale)`.
pub fn acf_bs(delta_x: f64, lifetime: &LifetimeDistribution) -> Result<f64> {
    lifetime.validate()?;
    if !delta_x.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "displacement must be finite, got {delta_x}"
        )));
    }
    let d = delta_x.abs();
    if d == 0.0 {
        return Ok(1.0);
    }
    if let LifetimeDistribution::Exponential { scale } = lifetime {
        return Ok((-d / scale).exp());
    }
    let mean = lifetime.mean();
    if !(mean.is_finite() && mean > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "lifetime law must have a positive finite mean, got {mean}"
        )));
    }
    Ok((lifetime.mean_excess(d) / mean).clamp(0.0, 1.0))
}

/// Circular correlation kernel at coverage ratio `u = d / (2R)`:
/// `(2 acos(u) - sin(2 acos(u))) / pi`, the lens intersection area of two
/// equal discs divided by the disc area.
fn circular_kernel(u: f64) -> f64 {
    if u <= 0.0 {
        return 1.0;
    }
    if u >= 1.0 {
        return 0.0;
    }
    let chi = u.acos();
    ((2.0 * chi - (2.0 * chi).sin()) / std::f64::consts::PI).clamp(0.0, 1.0)
}

/// Coverage correlation of a disc of radius `radius` between two planar
/// positions `d` apart (the normalized lens-intersection area).
///
/// Nonincreasing in `d`, equal to one at `d = 0` (including the
/// point-region convention at zero radius) and zero beyond the diameter.
pub fn acf_circular(d: f64, radius: f64) -> f64 {
    let d = d.abs();
    if d == 0.0 {
        return 1.0;
    }
    if radius <= 0.0 {
        return 0.0;
    }
    circular_kernel(d / (2.0 * radius))
}

/// Coverage correlation when the disc radius is random: the ratio of the
/// area-weighted kernel to the mean disc area,
/// `E(R^2 K(d / 2R)) / E(R^2)`.
///
/// A point mass reduces to [`acf_circular`]; a law with zero second
/// moment has no coverage at all and is rejected.
pub fn acf_circular_mixture(d: f64, dist: &RadiusDistribution) -> Result<f64> {
    dist.validate()?;
    let second = dist.second_moment();
    if !(second.is_finite() && second > 0.0) {
        return Err(Error::UnsupportedDistribution(
            "coverage mixture requires a radius law with positive second moment".into(),
        ));
    }
    let d = d.abs();
    if d == 0.0 {
        return Ok(1.0);
    }
    match dist {
        RadiusDistribution::Pmf(pmf) => {
            let weighted: f64 = pmf
                .radii()
                .iter()
                .zip(pmf.weights())
                .map(|(r, w)| r * r * w * acf_circular(d, *r))
                .sum();
            Ok((weighted / second).clamp(0.0, 1.0))
        }
        RadiusDistribution::LognormalDb { .. } => {
            let (m, psi) = dist.log_params().expect("lognormal branch");
            // Only radii above d/2 contribute; substituting u = (d/2)/r
            // maps the tail integral onto (0, 1]:
            //   E(R^2 K) = (d/2)^3 * integral_0^1 u^-4 K(u) f((d/2)/u) du.
            let half = 0.5 * d;
            let integrand = |u: f64| -> f64 {
                if u <= 0.0 || u >= 1.0 {
                    return 0.0;
                }
                let r = half / u;
                if !r.is_finite() {
                    return 0.0;
                }
                let z = r.ln() - m;
                let density = (-z * z / (2.0 * psi)).exp()
                    / (r * (2.0 * std::f64::consts::PI * psi).sqrt());
                circular_kernel(u) * density / (u * u * u * u)
            };
            let cube = half * half * half;
            // Tolerance chosen so the normalized ratio is resolved to
            // ~1e-10 regardless of the raw integrand scale.
            let tol = (1e-10 * second / cube).clamp(1e-300, 1e30);
            let weighted = cube * integrate(&integrand, 0.0, 1.0, tol);
            Ok((weighted / second).clamp(0.0, 1.0))
        }
    }
}

/// Displacement pair and environment for a joint correlation query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcfQuery {
    /// Displacement along the array (meters).
    pub delta_x: f64,
    /// Planar displacement magnitude at the terminal side (meters).
    pub delta_r: f64,
    /// Lifetime law of the array-side visibility intervals.
    pub lifetime: LifetimeDistribution,
    /// Terminal-side visibility disc radius (meters).
    pub r_c: f64,
    /// Optional radius law of per-component visibility discs; not used
    /// by the joint cluster-count correlation but carried for
    /// component-level queries.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius_dist: Option<RadiusDistribution>,
}

impl AcfQuery {
    /// Checks displacements, radius, and the carried laws.
    pub fn validate(&self) -> Result<()> {
        if !(self.delta_x.is_finite() && self.delta_r.is_finite()) {
            return Err(Error::InvalidParameter(
                "displacements must be finite".into(),
            ));
        }
        if !(self.r_c.is_finite() && self.r_c >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "visibility radius must be nonnegative, got {}",
                self.r_c
            )));
        }
        self.lifetime.validate()?;
        if let Some(dist) = &self.radius_dist {
            dist.validate()?;
        }
        Ok(())
    }
}

/// Joint correlation value with its decorrelation verdict.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointAcf {
    /// Product of the array-side and terminal-side correlations.
    pub value: f64,
    /// True when the value has fallen to `1/e` or below, the working
    /// definition of uncorrelated placements.
    pub decorrelated: bool,
}

/// Joint cluster-count correlation across an array displacement and a
/// terminal displacement: the two factors multiply.
pub fn acf_joint(query: &AcfQuery) -> Result<JointAcf> {
    query.validate()?;
    let value = acf_bs(query.delta_x, &query.lifetime)? * acf_circular(query.delta_r, query.r_c);
    Ok(JointAcf {
        value,
        decorrelated: value <= (-1.0f64).exp(),
    })
}

/// Small-scale-fading ACF factorization: plain fading factor times the
/// component-count factor, with the containment check on magnitudes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SsfBound {
    /// Product `R_H * R_Y`.
    pub product: f64,
    /// Whether `|product| <= |R_Y|` (always true for valid inputs).
    pub within_bound: bool,
}

/// Combines a plain fading correlation `r_h` with the component-count
/// correlation `r_y` and reports whether the product respects the
/// count-correlation envelope.  Both inputs must be correlation values in
/// `[-1, 1]`.
pub fn acf_ssf_bound(r_y: f64, r_h: f64) -> Result<SsfBound> {
    for (name, v) in [("count correlation", r_y), ("fading correlation", r_h)] {
        if !(v.is_finite() && v.abs() <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "{name} must lie in [-1, 1], got {v}"
            )));
        }
    }
    let product = r_h * r_y;
    Ok(SsfBound {
        product,
        within_bound: product.abs() <= r_y.abs(),
    })
}
