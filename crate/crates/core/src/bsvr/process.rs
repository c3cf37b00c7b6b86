//! Simulation and censoring of the visibility interval process.
//!
//! A realization is built in two steps that are deliberately kept separate:
//! [`simulate_births`] draws the underlying (uncensored) birth positions and
//! lifetimes on a range that extends `burn_in` meters to the left of the
//! window so the process is stationary at `x1`, and [`censor`] clips each
//! true interval to the window, applies the resolution limit, and classifies
//! every surviving interval by which endpoints were cut. Tests exploit the
//! split to compare censorings of the *same* underlying realization under
//! different windows.

use crate::error::{Error, Result};
use crate::lifetime::LifetimeDistribution;
use crate::numerics::poisson_pmf;
use crate::rng::{self, Rng};
use rand::Rng as _;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

/// Parameters of the stationary visibility interval process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BsVrProcessParams {
    /// Birth intensity along the array axis (1/m).
    pub lambda: f64,
    /// Lifetime law of a visibility interval.
    pub lifetime: LifetimeDistribution,
    /// Left edge of the observation window (m).
    pub x1: f64,
    /// Right edge of the observation window (m).
    pub x2: f64,
    /// Minimum observable interval length (m); shorter intervals are dropped.
    pub delta0: f64,
}

impl BsVrProcessParams {
    pub fn validate(&self) -> Result<()> {
        self.lifetime.validate()?;
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "lambda must be positive and finite, got {}",
                self.lambda
            )));
        }
        if !(self.x1.is_finite() && self.x2.is_finite() && self.x1 < self.x2) {
            return Err(Error::InvalidParameter(format!(
                "window must satisfy x1 < x2, got [{}, {}]",
                self.x1, self.x2
            )));
        }
        if !(self.delta0.is_finite() && self.delta0 >= 0.0 && self.delta0 < self.window_len()) {
            return Err(Error::InvalidParameter(format!(
                "delta0 must lie in [0, x2 - x1), got {}",
                self.delta0
            )));
        }
        Ok(())
    }

    /// Window length `L = x2 - x1`.
    pub fn window_len(&self) -> f64 {
        self.x2 - self.x1
    }

    /// Resolution-reduced window length `L0 = L - delta0`.
    pub fn reduced_window_len(&self) -> f64 {
        self.window_len() - self.delta0
    }

    /// Effective birth intensity of intervals that survive the resolution
    /// limit, `lambda * P(Y > delta0)`.
    pub fn effective_lambda(&self) -> f64 {
        self.lambda * self.lifetime.survival(self.delta0)
    }
}

/// Which endpoints of an observed interval were clipped by the window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CensorClass {
    /// Fully interior: both endpoints observed.
    Interior,
    /// Alive at `x1`, dies inside the window.
    LeftCensored,
    /// Born inside, still alive at `x2`.
    RightCensored,
    /// Spans the whole window.
    DoublyCensored,
}

/// Interval counts by censoring class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensorCounts {
    /// Interior intervals.
    pub n00: u64,
    /// Right-censored intervals (observed start, clipped end).
    pub n01: u64,
    /// Left-censored intervals (clipped start, observed end).
    pub n10: u64,
    /// Doubly censored intervals.
    pub n11: u64,
}

impl CensorCounts {
    /// Total observed interval count.
    pub fn total(&self) -> u64 {
        self.n00 + self.n01 + self.n10 + self.n11
    }
}

/// A censored realization of the interval process on a window.
///
/// Intervals are sorted by left endpoint; an interval touching `x1` (resp.
/// `x2`) exactly is left- (resp. right-) censored. Construction validates
/// containment and the resolution limit, and computes the class counts, so a
/// set in hand is always internally consistent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservedIntervalSet {
    intervals: Vec<(f64, f64)>,
    window: (f64, f64),
    delta0: f64,
    counts: CensorCounts,
}

impl ObservedIntervalSet {
    /// Builds a set from raw `(a, b)` pairs, sorting and classifying them.
    pub fn new(mut intervals: Vec<(f64, f64)>, window: (f64, f64), delta0: f64) -> Result<Self> {
        let (x1, x2) = window;
        if !(x1.is_finite() && x2.is_finite() && x1 < x2) {
            return Err(Error::InvalidParameter(format!(
                "window must satisfy x1 < x2, got [{x1}, {x2}]"
            )));
        }
        if !(delta0.is_finite() && delta0 >= 0.0 && delta0 < x2 - x1) {
            return Err(Error::InvalidParameter(format!(
                "delta0 must lie in [0, x2 - x1), got {delta0}"
            )));
        }
        for &(a, b) in &intervals {
            if !(a.is_finite() && b.is_finite() && a <= b) {
                return Err(Error::InvalidParameter(format!(
                    "interval ({a}, {b}) is not ordered"
                )));
            }
            if a < x1 || b > x2 {
                return Err(Error::InvalidParameter(format!(
                    "interval ({a}, {b}) leaves the window [{x1}, {x2}]"
                )));
            }
            if b - a < delta0 {
                return Err(Error::InvalidParameter(format!(
                    "interval ({a}, {b}) is shorter than delta0 = {delta0}"
                )));
            }
        }
        intervals.sort_by(|u, v| u.0.total_cmp(&v.0).then(u.1.total_cmp(&v.1)));

        let mut counts = CensorCounts::default();
        for &(a, b) in &intervals {
            match (a == x1, b == x2) {
                (false, false) => counts.n00 += 1,
                (false, true) => counts.n01 += 1,
                (true, false) => counts.n10 += 1,
                (true, true) => counts.n11 += 1,
            }
        }
        Ok(Self {
            intervals,
            window,
            delta0,
            counts,
        })
    }

    /// Observed intervals, sorted by left endpoint.
    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    /// Observation window `(x1, x2)`.
    pub fn window(&self) -> (f64, f64) {
        self.window
    }

    /// Resolution limit the set was built with.
    pub fn delta0(&self) -> f64 {
        self.delta0
    }

    /// Counts by censoring class.
    pub fn counts(&self) -> CensorCounts {
        self.counts
    }

    /// Number of observed intervals.
    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Censoring class of interval `i`.
    pub fn class_of(&self, i: usize) -> CensorClass {
        let (a, b) = self.intervals[i];
        match (a == self.window.0, b == self.window.1) {
            (false, false) => CensorClass::Interior,
            (false, true) => CensorClass::RightCensored,
            (true, false) => CensorClass::LeftCensored,
            (true, true) => CensorClass::DoublyCensored,
        }
    }

    /// Observed lengths `upsilon_i = b_i - a_i`, in left-endpoint order.
    pub fn observed_lengths(&self) -> impl Iterator<Item = f64> + '_ {
        self.intervals.iter().map(|&(a, b)| b - a)
    }

    /// Window length.
    pub fn window_len(&self) -> f64 {
        self.window.1 - self.window.0
    }
}

/// Draws the underlying uncensored process on `[start, end]`: Poisson birth
/// positions with intensity `lambda` paired with iid lifetimes.
///
/// Returned as `(birth, lifetime)` pairs sorted by birth position.
pub fn simulate_births(
    lambda: f64,
    lifetime: &LifetimeDistribution,
    start: f64,
    end: f64,
    rng: &mut Rng,
) -> Vec<(f64, f64)> {
    let mean = lambda * (end - start);
    let count = if mean > 0.0 {
        Poisson::new(mean).expect("positive mean").sample(rng) as u64
    } else {
        0
    };
    let mut births: Vec<(f64, f64)> = (0..count)
        .map(|_| {
            let u: f64 = rng.random_range(start..end);
            (u, 0.0)
        })
        .collect();
    births.sort_by(|a, b| a.0.total_cmp(&b.0));
    for entry in &mut births {
        entry.1 = lifetime.sample(rng);
    }
    births
}

/// Clips each true interval `[birth, birth + lifetime]` to the window,
/// drops overlaps shorter than `delta0`, and classifies the survivors.
pub fn censor(
    births: &[(f64, f64)],
    window: (f64, f64),
    delta0: f64,
) -> Result<ObservedIntervalSet> {
    let (x1, x2) = window;
    let mut observed = Vec::new();
    for &(birth, lifetime) in births {
        let a = birth.max(x1);
        let b = (birth + lifetime).min(x2);
        if b - a >= delta0 && b >= a {
            observed.push((a, b));
        }
    }
    ObservedIntervalSet::new(observed, window, delta0)
}

/// Simulates one censored realization of the process.
///
/// The underlying process is generated on `[x1 - burn_in, x2]`; `burn_in`
/// should be large enough that intervals born before it contribute
/// negligibly (several lifetime means). Seeds map to realizations
/// deterministically.
pub fn generate_bsvrs(
    params: &BsVrProcessParams,
    burn_in: f64,
    seed: u64,
) -> Result<ObservedIntervalSet> {
    params.validate()?;
    if !(burn_in.is_finite() && burn_in >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "burn_in must be nonnegative and finite, got {burn_in}"
        )));
    }
    let mut rng = rng::master(seed);
    generate_bsvrs_with(params, burn_in, &mut rng)
}

/// As [`generate_bsvrs`], drawing from a caller-managed generator (used by
/// experiment drivers that derive per-trial substreams).
pub fn generate_bsvrs_with(
    params: &BsVrProcessParams,
    burn_in: f64,
    rng: &mut Rng,
) -> Result<ObservedIntervalSet> {
    let births = simulate_births(
        params.lambda,
        &params.lifetime,
        params.x1 - burn_in,
        params.x2,
        rng,
    );
    censor(&births, (params.x1, params.x2), params.delta0)
}

/// Probability of observing exactly `n` intervals on the window when
/// `delta0 = 0`: the count is Poisson with mean `lambda * (L + E(Y))`,
/// the window-length term counting fresh births and the mean-lifetime term
/// counting intervals already alive at `x1`.
pub fn count_pmf(params: &BsVrProcessParams, n: u64) -> Result<f64> {
    params.validate()?;
    let mean_lifetime = params.lifetime.mean();
    if !mean_lifetime.is_finite() {
        return Err(Error::UnsupportedDistribution(format!(
            "count law needs a finite mean lifetime, got {mean_lifetime}"
        )));
    }
    Ok(poisson_pmf(
        n,
        params.lambda * (params.window_len() + mean_lifetime),
    ))
}

/// Splits a realization's count into `(n_new, n_alive)`: intervals born
/// inside the window versus intervals already alive at `x1` (those whose
/// observed left endpoint sits exactly on the window edge).
pub fn decompose_counts(set: &ObservedIntervalSet) -> (u64, u64) {
    let alive = set.counts().n10 + set.counts().n11;
    (set.len() as u64 - alive, alive)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use proptest::prelude::*;

    fn exp_params() -> BsVrProcessParams {
        BsVrProcessParams {
            lambda: 2.6,
            lifetime: LifetimeDistribution::Exponential { scale: 2.9 },
            x1: 0.0,
            x2: 7.5,
            delta0: 0.23,
        }
    }

    #[test]
    fn counts_always_partition_the_set() {
        for seed in 0..200 {
            let set = generate_bsvrs(&exp_params(), 60.0, seed).unwrap();
            let c = set.counts();
            assert_eq!(c.total(), set.len() as u64);
            let by_class = (0..set.len()).fold([0u64; 4], |mut acc, i| {
                match set.class_of(i) {
                    CensorClass::Interior => acc[0] += 1,
                    CensorClass::RightCensored => acc[1] += 1,
                    CensorClass::LeftCensored => acc[2] += 1,
                    CensorClass::DoublyCensored => acc[3] += 1,
                }
                acc
            });
            assert_eq!(by_class, [c.n00, c.n01, c.n10, c.n11]);
        }
    }

    #[test]
    fn intervals_stay_inside_window_and_above_resolution() {
        let params = exp_params();
        for seed in 0..100 {
            let set = generate_bsvrs(&params, 60.0, seed).unwrap();
            let mut last_a = f64::NEG_INFINITY;
            for &(a, b) in set.intervals() {
                assert!(a >= params.x1 && b <= params.x2);
                assert!(b - a >= params.delta0);
                assert!(a >= last_a, "sorted by left endpoint");
                last_a = a;
            }
        }
    }

    #[test]
    fn vanishing_intensity_gives_empty_sets() {
        let params = BsVrProcessParams {
            lambda: 1e-9,
            ..exp_params()
        };
        for seed in 0..20 {
            assert!(generate_bsvrs(&params, 60.0, seed).unwrap().is_empty());
        }
    }

    #[test]
    fn observed_mean_count_matches_thinned_closed_form() {
        // For exponential lifetimes the resolution limit thins the count to
        // mean lambda * exp(-delta0/scale) * (L - delta0 + scale).
        let params = exp_params();
        let trials = 20_000u64;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for seed in 0..trials {
            let n = generate_bsvrs(&params, 60.0, seed).unwrap().len() as f64;
            sum += n;
            sumsq += n * n;
        }
        let mean = sum / trials as f64;
        let var = (sumsq / trials as f64 - mean * mean).max(0.0);
        let se = (var / trials as f64).sqrt();
        let expected = params.effective_lambda() * (params.reduced_window_len() + 2.9);
        assert!(
            (mean - expected).abs() <= 3.0 * se,
            "mean {mean} vs {expected} (se {se})"
        );
    }

    #[test]
    fn count_pmf_is_a_distribution_with_the_stated_mean() {
        let params = BsVrProcessParams {
            lambda: 2.0,
            lifetime: LifetimeDistribution::Exponential { scale: 0.5 },
            x1: 1.0,
            x2: 4.0,
            delta0: 0.0,
        };
        let mass: f64 = (0..200).map(|n| count_pmf(&params, n).unwrap()).sum();
        assert!((mass - 1.0).abs() < 1e-12);
        let mean: f64 = (0..200)
            .map(|n| n as f64 * count_pmf(&params, n).unwrap())
            .sum();
        assert!((mean - 2.0 * 3.5).abs() < 1e-9);

        assert!((count_pmf(&params, 0).unwrap() - (-7.0_f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn count_pmf_collapses_to_alive_mean_for_vanishing_window() {
        let params = BsVrProcessParams {
            lambda: 3.0,
            lifetime: LifetimeDistribution::Exponential { scale: 2.0 },
            x1: 0.0,
            x2: 1e-9,
            delta0: 0.0,
        };
        // Mean reduces to lambda * E(Y) = 6 as the window closes.
        let mean: f64 = (0..300)
            .map(|n| n as f64 * count_pmf(&params, n).unwrap())
            .sum();
        assert!((mean - 6.0).abs() < 1e-6);
    }

    #[test]
    fn count_pmf_rejects_overflowing_mean_lifetime() {
        let params = BsVrProcessParams {
            lambda: 1.0,
            lifetime: LifetimeDistribution::LognormalDb {
                mu: 1e6,
                sigma2: 1.0,
            },
            x1: 0.0,
            x2: 1.0,
            delta0: 0.0,
        };
        assert!(matches!(
            count_pmf(&params, 0),
            Err(crate::Error::UnsupportedDistribution(_))
        ));
    }

    #[test]
    fn decomposition_counts_alive_intervals() {
        // lambda = 3, E(Y) = 2: on average six intervals are alive at x1.
        let params = BsVrProcessParams {
            lambda: 3.0,
            lifetime: LifetimeDistribution::Exponential { scale: 2.0 },
            x1: 0.0,
            x2: 5.0,
            delta0: 0.0,
        };
        let trials = 10_000u64;
        let mut alive_sum = 0.0;
        let mut alive_sumsq = 0.0;
        for seed in 0..trials {
            let set = generate_bsvrs(&params, 80.0, seed).unwrap();
            let (n_new, n_alive) = decompose_counts(&set);
            assert_eq!(n_new + n_alive, set.len() as u64);
            alive_sum += n_alive as f64;
            alive_sumsq += (n_alive as f64).powi(2);
        }
        let mean = alive_sum / trials as f64;
        let var = (alive_sumsq / trials as f64 - mean * mean).max(0.0);
        let se = (var / trials as f64).sqrt();
        assert!(
            (mean - 6.0).abs() <= 2.0 * se,
            "alive mean {mean} vs 6 (se {se})"
        );
    }

    #[test]
    fn validation_rejects_bad_windows() {
        let mut p = exp_params();
        p.x2 = p.x1;
        assert!(p.validate().is_err());
        let mut p = exp_params();
        p.delta0 = 10.0;
        assert!(p.validate().is_err());
        assert!(generate_bsvrs(&exp_params(), -1.0, 0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        /// Class counts always partition the total, whatever the parameters.
        #[test]
        fn conservation_holds_for_random_parameters(
            lambda in 0.2f64..8.0,
            scale in 0.2f64..6.0,
            len in 0.5f64..12.0,
            delta0_frac in 0.0f64..0.4,
            seed in 0u64..u64::MAX,
        ) {
            let params = BsVrProcessParams {
                lambda,
                lifetime: LifetimeDistribution::Exponential { scale },
                x1: -1.0,
                x2: -1.0 + len,
                delta0: delta0_frac * len * 0.5,
            };
            let set = generate_bsvrs(&params, 10.0 * scale, seed).unwrap();
            prop_assert_eq!(set.counts().total(), set.len() as u64);
            let (n_new, n_alive) = decompose_counts(&set);
            prop_assert_eq!(n_new + n_alive, set.len() as u64);
        }

        /// Growing the window never shrinks any true interval's observed
        /// overlap (censoring is monotone in the window).
        #[test]
        fn censoring_is_monotone_in_the_window(
            seed in 0u64..u64::MAX,
            grow_left in 0.0f64..3.0,
            grow_right in 0.0f64..3.0,
        ) {
            let lifetime = LifetimeDistribution::Exponential { scale: 1.5 };
            let mut rng = rng::master(seed);
            let births = simulate_births(2.0, &lifetime, -10.0, 10.0, &mut rng);
            let small = (0.0, 5.0);
            let large = (0.0 - grow_left, 5.0 + grow_right);
            for &(birth, life) in &births {
                let overlap = |w: (f64, f64)| ((birth + life).min(w.1) - birth.max(w.0)).max(0.0);
                prop_assert!(overlap(large) >= overlap(small) - 1e-12);
            }
            // And the censored sets themselves are valid on both windows.
            prop_assert!(censor(&births, small, 0.0).is_ok());
            prop_assert!(censor(&births, large, 0.0).is_ok());
        }
    }
}
