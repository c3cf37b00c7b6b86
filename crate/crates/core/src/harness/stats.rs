//! Statistics utilities for the experiment harness: empirical CDFs and a
//! chi-square goodness-of-fit test for Poisson counts.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::numerics::poisson_pmf;

/// Empirical CDF of a sample, as sorted `(value, cumulative)` pairs.
///
/// The result is right-continuous, deduplicates repeated values, and ends
/// at cumulative probability 1.
pub fn ecdf(samples: &[f64]) -> Result<Vec<(f64, f64)>> {
    if samples.is_empty() {
        return Err(Error::InsufficientData(
            "empirical CDF of an empty sample".into(),
        ));
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(
            "samples must be finite".into(),
        ));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut steps: Vec<(f64, f64)> = Vec::new();
    for (i, v) in sorted.iter().enumerate() {
        let cumulative = (i + 1) as f64 / n;
        match steps.last_mut() {
            Some(last) if last.0 == *v => last.1 = cumulative,
            _ => steps.push((*v, cumulative)),
        }
    }
    Ok(steps)
}

/// Evaluates an [`ecdf`] step function at `x`.
pub fn ecdf_eval(steps: &[(f64, f64)], x: f64) -> f64 {
    match steps.partition_point(|(v, _)| *v <= x) {
        0 => 0.0,
        i => steps[i - 1].1,
    }
}

/// Sample mean, the maximum-likelihood Poisson intensity for count data.
pub fn poisson_mle(counts: &[u64]) -> Result<f64> {
    if counts.is_empty() {
        return Err(Error::InsufficientData(
            "Poisson fit of an empty sample".into(),
        ));
    }
    Ok(counts.iter().map(|c| *c as f64).sum::<f64>() / counts.len() as f64)
}

/// Result of a chi-square goodness-of-fit test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GofReport {
    /// Chi-square statistic over the pooled bins.
    pub statistic: f64,
    /// Degrees of freedom after pooling and parameter-estimation
    /// correction.
    pub dof: usize,
    /// Upper-tail p-value.
    pub p_value: f64,
    /// Significance level the pass flag refers to.
    pub alpha: f64,
    /// True when the Poisson hypothesis is not rejected at `alpha`.
    pub pass: bool,
    /// Number of bins after pooling.
    pub bins: usize,
}

/// Chi-square goodness-of-fit test of integer count data against a
/// Poisson law with the given mean.
///
/// Count values are binned, and bins are pooled left to right until every
/// pooled bin has expected count at least 5 (the conventional threshold);
/// the open upper tail's probability mass is folded into the last bin.
/// Set `mean_estimated` when the mean was fitted from the same data, which
/// costs one degree of freedom.
pub fn chi_square_gof(
    counts: &[u64],
    poisson_mean: f64,
    alpha: f64,
    mean_estimated: bool,
) -> Result<GofReport> {
    if counts.is_empty() {
        return Err(Error::InsufficientData(
            "goodness-of-fit test on an empty sample".into(),
        ));
    }
    if !(poisson_mean.is_finite() && poisson_mean > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "Poisson mean must be positive and finite, got {poisson_mean}"
        )));
    }
    if !(alpha.is_finite() && alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "significance level must lie in (0, 1), got {alpha}"
        )));
    }
    let n = counts.len() as f64;
    let kmax = *counts.iter().max().expect("nonempty") as usize;
    let mut observed = vec![0.0f64; kmax + 1];
    for &c in counts {
        observed[c as usize] += 1.0;
    }
    let mut expected: Vec<f64> = (0..=kmax as u64)
        .map(|k| n * poisson_pmf(k, poisson_mean))
        .collect();
    // Fold the open upper tail's mass into the last cell so the expected
    // counts sum to n exactly.
    let tail = (n - expected.iter().sum::<f64>()).max(0.0);
    expected[kmax] += tail;

    // Pool cells left to right until each pooled bin expects at least 5;
    // for a unimodal law this merges only the tails. A trailing remainder
    // is merged into the previous bin.
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let mut acc = (0.0, 0.0);
    for (o, e) in observed.iter().zip(expected.iter()) {
        acc.0 += o;
        acc.1 += e;
        if acc.1 >= 5.0 {
            bins.push(acc);
            acc = (0.0, 0.0);
        }
    }
    if acc.1 > 0.0 || acc.0 > 0.0 {
        if let Some(last) = bins.last_mut() {
            last.0 += acc.0;
            last.1 += acc.1;
        } else {
            bins.push(acc);
        }
    }
    let correction = usize::from(mean_estimated);
    if bins.len() < 2 || bins.len() < 2 + correction {
        return Err(Error::InsufficientData(format!(
            "only {} usable bin(s) after pooling; need at least {}",
            bins.len(),
            2 + correction
        )));
    }
    let statistic: f64 = bins.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
    let dof = bins.len() - 1 - correction;
    let dist = ChiSquared::new(dof as f64).map_err(|e| {
        Error::InvalidParameter(format!("chi-square with {dof} dof: {e}"))
    })?;
    let p_value = dist.sf(statistic).clamp(0.0, 1.0);
    Ok(GofReport {
        statistic,
        dof,
        p_value,
        alpha,
        pass: p_value > alpha,
        bins: bins.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use approx::assert_abs_diff_eq;
    use rand::Rng as _;
    use rand_distr::{Distribution as _, Poisson};

    #[test]
    fn ecdf_matches_hand_examples() {
        assert_eq!(ecdf(&[1.0]).unwrap(), vec![(1.0, 1.0)]);
        let steps = ecdf(&[1.0, 1.0, 2.0]).unwrap();
        assert_eq!(steps.len(), 2);
        assert_eq!(steps[0].0, 1.0);
        assert_abs_diff_eq!(steps[0].1, 2.0 / 3.0, epsilon = 1e-15);
        assert_eq!(steps[1], (2.0, 1.0));
        assert!(ecdf(&[]).is_err());
    }

    #[test]
    fn ecdf_is_right_continuous_and_reaches_one() {
        let steps = ecdf(&[3.0, 1.0, 2.0, 2.0]).unwrap();
        assert_eq!(steps.last().unwrap().1, 1.0);
        // Right continuity: evaluating exactly at a step value returns the
        // post-jump level.
        assert_abs_diff_eq!(ecdf_eval(&steps, 2.0), 0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(ecdf_eval(&steps, 1.999), 0.25, epsilon = 1e-15);
        assert_eq!(ecdf_eval(&steps, 0.0), 0.0);
        assert_eq!(ecdf_eval(&steps, 99.0), 1.0);
    }

    #[test]
    fn ecdf_converges_to_the_generating_cdf() {
        // Uniform sample: the sup-distance to the identity CDF shrinks
        // with n (Glivenko-Cantelli spot check at the DKW scale).
        let mut rng = rng::master(40);
        let samples: Vec<f64> = (0..20_000).map(|_| rng.random::<f64>()).collect();
        let steps = ecdf(&samples).unwrap();
        let sup = steps
            .iter()
            .map(|(v, c)| (c - v).abs())
            .fold(0.0f64, f64::max);
        assert!(sup < 0.02, "sup-distance {sup} too large for n = 20000");
    }

    #[test]
    fn gof_type_one_error_is_calibrated() {
        // Data truly from the hypothesized law: the rejection rate over
        // many batches should sit near alpha.
        let mean = 20.0;
        let alpha = 0.05;
        let mut rejections = 0;
        let batches = 1000;
        for b in 0..batches {
            let mut rng = rng::substream(777, b);
            let pois = Poisson::new(mean).unwrap();
            let counts: Vec<u64> = (0..100).map(|_| pois.sample(&mut rng) as u64).collect();
            let report = chi_square_gof(&counts, mean, alpha, false).unwrap();
            if !report.pass {
                rejections += 1;
            }
        }
        let rate = rejections as f64 / batches as f64;
        assert!(
            (rate - alpha).abs() <= 0.02,
            "empirical type-I error {rate} vs alpha {alpha}"
        );
    }

    #[test]
    fn gof_rejects_gross_mismatch() {
        let mut rng = rng::master(5);
        let pois = Poisson::new(5.0).unwrap();
        let counts: Vec<u64> = (0..200).map(|_| pois.sample(&mut rng) as u64).collect();
        let report = chi_square_gof(&counts, 9.0, 0.05, false).unwrap();
        assert!(!report.pass);
        assert!(report.p_value < 1e-6);
    }

    #[test]
    fn gof_total_mismatch_leaves_no_usable_bins() {
        // When the hypothesized mean is nowhere near the data, pooling
        // collapses everything into one cell and no test is possible.
        let mut rng = rng::master(5);
        let pois = Poisson::new(5.0).unwrap();
        let counts: Vec<u64> = (0..200).map(|_| pois.sample(&mut rng) as u64).collect();
        let err = chi_square_gof(&counts, 50.0, 0.05, false).unwrap_err();
        assert_eq!(err.kind(), "insufficient_data");
    }

    #[test]
    fn gof_handles_small_batches() {
        // Twenty samples force heavy pooling but must still produce a
        // valid test.
        let mut rng = rng::master(6);
        let pois = Poisson::new(27.0).unwrap();
        let counts: Vec<u64> = (0..20).map(|_| pois.sample(&mut rng) as u64).collect();
        let report = chi_square_gof(&counts, 27.0, 0.05, false).unwrap();
        assert!(report.bins >= 2);
        assert!(report.statistic >= 0.0);
        assert!((0.0..=1.0).contains(&report.p_value));
    }

    #[test]
    fn gof_insufficient_bins_is_an_error() {
        // Three identical tiny counts cannot fill two bins with expected
        // mass >= 5 each.
        let err = chi_square_gof(&[0, 0, 0], 0.01, 0.05, false).unwrap_err();
        assert_eq!(err.kind(), "insufficient_data");
    }

    #[test]
    fn poisson_mle_is_the_sample_mean() {
        assert_abs_diff_eq!(
            poisson_mle(&[1, 2, 3, 6]).unwrap(),
            3.0,
            epsilon = 1e-15
        );
        assert!(poisson_mle(&[]).is_err());
    }
}
