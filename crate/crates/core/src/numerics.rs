//! Shared numerical kernels: standard normal CDF and quantile, adaptive
//! Gauss-Kronrod quadrature, a Nelder-Mead simplex minimizer, and small
//! probability helpers.
//!
//! Everything here is deterministic and allocation-light; the statistical
//! modules build their closed forms and fitting loops on top of these
//! primitives.

/// Standard normal CDF.
///
/// Evaluated through the complementary error function,
/// `Phi(x) = erfc(-x / sqrt(2)) / 2`, which stays accurate in both tails
/// (relative error is at the few-ulp level of the underlying `erfc`).
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * std::f64::consts::FRAC_1_SQRT_2)
}

/// Standard normal survival function `1 - Phi(x)`, accurate for large `x`.
pub fn norm_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x * std::f64::consts::FRAC_1_SQRT_2)
}

/// Standard normal density.
pub fn norm_pdf(x: f64) -> f64 {
    const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Standard normal quantile function.
///
/// Rational initial guess (Acklam's approximation) polished with one Halley
/// step against [`norm_cdf`], giving near full double precision across
/// `p in (0, 1)`. Returns infinities at the endpoints and NaN outside `[0, 1]`.
pub fn norm_cdf_inv(p: f64) -> f64 {
    if p.is_nan() || !(0.0..=1.0).contains(&p) {
        return f64::NAN;
    }
    if p == 0.0 {
        return f64::NEG_INFINITY;
    }
    if p == 1.0 {
        return f64::INFINITY;
    }

    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.02425;

    let x = if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };

    // One Halley iteration against the erfc-based CDF.
    let e = norm_cdf(x) - p;
    let u = e * (2.0 * std::f64::consts::PI).sqrt() * (0.5 * x * x).exp();
    x - u / (1.0 + 0.5 * x * u)
}

/// Natural log of `n!` via the log-gamma function.
pub fn ln_factorial(n: u64) -> f64 {
    libm::lgamma(n as f64 + 1.0)
}

/// Poisson probability mass `P(N = n)` for mean `m >= 0`.
///
/// The degenerate mean `m = 0` puts all mass on `n = 0` (the `0^0 = 1`
/// convention), which arises for vanishing observation windows.
pub fn poisson_pmf(n: u64, m: f64) -> f64 {
    if m == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    (n as f64 * m.ln() - m - ln_factorial(n)).exp()
}

// 15-point Kronrod nodes on [0, 1] side of the interval (symmetric), with the
// embedded 7-point Gauss rule on the odd-indexed nodes.
const KRONROD_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_17,
    0.207_784_955_007_898_27,
    0.0,
];
const KRONROD_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const GAUSS_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_94,
    0.417_959_183_673_469_4,
];

fn gauss_kronrod_15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut kronrod = 0.0;
    let mut gauss = 0.0;
    for (i, (&x, &wk)) in KRONROD_NODES.iter().zip(&KRONROD_WEIGHTS).enumerate() {
        let dx = half * x;
        let fsum = if x == 0.0 {
            f(mid)
        } else {
            f(mid - dx) + f(mid + dx)
        };
        kronrod += wk * fsum;
        if i % 2 == 1 {
            gauss += GAUSS_WEIGHTS[i / 2] * fsum;
        }
    }
    kronrod *= half;
    gauss *= half;
    (kronrod, (kronrod - gauss).abs())
}

/// Adaptive Gauss-Kronrod integration of `f` over the finite interval
/// `[a, b]` to absolute tolerance `tol`.
///
/// Bisects whichever subinterval fails its share of the tolerance; the
/// 15-point Kronrod value is returned once the local error estimate is met.
/// Depth is capped at 48 levels, after which the best estimate is kept
/// (integrable endpoint behavior converges well before that).
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    fn recurse<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        let (value, err) = gauss_kronrod_15(f, a, b);
        if err <= tol || depth >= 48 {
            return value;
        }
        let mid = 0.5 * (a + b);
        recurse(f, a, mid, 0.5 * tol, depth + 1) + recurse(f, mid, b, 0.5 * tol, depth + 1)
    }
    recurse(&f, a, b, tol.max(f64::MIN_POSITIVE), 0)
}

/// Outcome of a Nelder-Mead minimization.
#[derive(Debug, Clone)]
pub struct NelderMeadResult {
    /// Best point found.
    pub x: Vec<f64>,
    /// Objective value at `x`.
    pub fval: f64,
    /// Objective evaluations consumed.
    pub evaluations: usize,
    /// Whether the simplex shrank below tolerance before the budget ran out.
    pub converged: bool,
}

/// Derivative-free minimization of `f` with the Nelder-Mead simplex method.
///
/// The initial simplex puts one vertex at `x0` and offsets each coordinate by
/// the matching entry of `scale`. The objective may return `f64::INFINITY`
/// to reject points outside its domain. Convergence is declared when both
/// the simplex diameter and the spread of objective values fall below `tol`.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    scale: &[f64],
    tol: f64,
    max_evaluations: usize,
) -> NelderMeadResult {
    assert_eq!(x0.len(), scale.len());
    let n = x0.len();
    assert!(n >= 1);

    let mut evals = 0usize;
    let eval = |f: &mut F, x: &[f64], evals: &mut usize| -> f64 {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += scale[i];
        simplex.push(v);
    }
    let mut fvals: Vec<f64> = simplex
        .iter()
        .map(|v| eval(&mut f, v, &mut evals))
        .collect();

    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);

    loop {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&i, &j| fvals[i].total_cmp(&fvals[j]));
        let best = order[0];
        let worst = order[n];
        let second_worst = order[n - 1];

        let diameter = simplex
            .iter()
            .map(|v| {
                v.iter()
                    .zip(&simplex[best])
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        let fspread = fvals[worst] - fvals[best];
        let converged = diameter <= tol && (fspread.abs() <= tol || !fspread.is_finite());
        if converged || evals >= max_evaluations {
            return NelderMeadResult {
                x: simplex[best].clone(),
                fval: fvals[best],
                evaluations: evals,
                converged,
            };
        }

        let mut centroid = vec![0.0; n];
        for (i, v) in simplex.iter().enumerate() {
            if i == worst {
                continue;
            }
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / n as f64;
            }
        }

        let point = |coef: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[worst])
                .map(|(c, w)| c + coef * (c - w))
                .collect()
        };

        let reflected = point(alpha);
        let f_reflected = eval(&mut f, &reflected, &mut evals);

        if f_reflected < fvals[best] {
            let expanded = point(gamma);
            let f_expanded = eval(&mut f, &expanded, &mut evals);
            if f_expanded < f_reflected {
                simplex[worst] = expanded;
                fvals[worst] = f_expanded;
            } else {
                simplex[worst] = reflected;
                fvals[worst] = f_reflected;
            }
            continue;
        }
        if f_reflected < fvals[second_worst] {
            simplex[worst] = reflected;
            fvals[worst] = f_reflected;
            continue;
        }

        let contracted = point(-rho);
        let f_contracted = eval(&mut f, &contracted, &mut evals);
        if f_contracted < fvals[worst] {
            simplex[worst] = contracted;
            fvals[worst] = f_contracted;
            continue;
        }

        for i in 0..=n {
            if i == best {
                continue;
            }
            let shrunk: Vec<f64> = simplex[i]
                .iter()
                .zip(&simplex[best])
                .map(|(x, b)| b + sigma * (x - b))
                .collect();
            simplex[i] = shrunk;
            fvals[i] = eval(&mut f, &simplex[i], &mut evals);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::{ContinuousCDF, Normal};

    #[test]
    fn norm_cdf_matches_reference_values() {
        assert_eq!(norm_cdf(0.0), 0.5);
        assert!((norm_cdf(1.959_963_984_540_054) - 0.975).abs() < 1e-14);
        assert!((norm_cdf(-1.0) - 0.158_655_253_931_457_05).abs() < 1e-15);
        // Deep tail keeps relative accuracy.
        let tail = norm_cdf(-8.0);
        assert!((tail - 6.220_960_574_271_786e-16).abs() / tail < 1e-12);
    }

    #[test]
    fn norm_cdf_agrees_with_statrs() {
        let reference = Normal::new(0.0, 1.0).unwrap();
        for i in -60..=60 {
            let x = i as f64 * 0.1;
            let ours = norm_cdf(x);
            let theirs = reference.cdf(x);
            // Cross-library agreement only: statrs drifts to ~1e-11 relative
            // in the deep tail, so this is looser than the tail oracle above.
            assert!(
                (ours - theirs).abs() <= 1e-9 * theirs.max(1e-300),
                "x={x}: {ours} vs {theirs}"
            );
        }
    }

    #[test]
    fn quantile_round_trips() {
        for &p in &[
            1e-12, 1e-9, 1e-6, 1e-3, 0.02, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99, 1.0 - 1e-6,
            1.0 - 1e-10,
        ] {
            let x = norm_cdf_inv(p);
            let back = norm_cdf(x);
            assert!(
                (back - p).abs() <= 1e-12 * p.max(1e-300) + 1e-15,
                "p={p}: round trip {back}"
            );
        }
        assert_eq!(norm_cdf_inv(0.0), f64::NEG_INFINITY);
        assert_eq!(norm_cdf_inv(1.0), f64::INFINITY);
        assert!(norm_cdf_inv(-0.1).is_nan());
    }

    #[test]
    fn quadrature_handles_smooth_and_kinked_integrands() {
        let quad = integrate(|x| x * x, 0.0, 1.0, 1e-12);
        assert!((quad - 1.0 / 3.0).abs() < 1e-12);

        let sine = integrate(f64::sin, 0.0, std::f64::consts::PI, 1e-12);
        assert!((sine - 2.0).abs() < 1e-11);

        // |x - 0.3| has a kink; exact integral on [0, 1] is 0.29.
        let kink = integrate(|x| (x - 0.3_f64).abs(), 0.0, 1.0, 1e-10);
        assert!((kink - 0.29).abs() < 1e-9);

        // Standard normal density over [-10, 10] integrates to ~1.
        let gauss = integrate(norm_pdf, -10.0, 10.0, 1e-12);
        assert!((gauss - 1.0).abs() < 1e-10);
    }

    #[test]
    fn poisson_pmf_normalizes_and_handles_degenerate_mean() {
        assert_eq!(poisson_pmf(0, 0.0), 1.0);
        assert_eq!(poisson_pmf(3, 0.0), 0.0);
        assert!((poisson_pmf(0, 2.0) - (-2.0_f64).exp()).abs() < 1e-15);
        let total: f64 = (0..200).map(|n| poisson_pmf(n, 7.0)).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn nelder_mead_minimizes_rosenbrock() {
        let rosenbrock =
            |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let result = nelder_mead(rosenbrock, &[-1.2, 1.0], &[0.5, 0.5], 1e-10, 20_000);
        assert!(result.converged);
        assert!((result.x[0] - 1.0).abs() < 1e-5);
        assert!((result.x[1] - 1.0).abs() < 1e-5);
    }

    #[test]
    fn nelder_mead_respects_infinite_domain_walls() {
        // Minimize (ln x - 1)^2 with the wall x <= 0 -> +inf.
        let objective = |x: &[f64]| {
            if x[0] <= 0.0 {
                f64::INFINITY
            } else {
                (x[0].ln() - 1.0).powi(2)
            }
        };
        let result = nelder_mead(objective, &[0.5], &[0.4], 1e-12, 5_000);
        assert!(result.converged);
        assert!((result.x[0] - std::f64::consts::E).abs() < 1e-4);
    }
}
