//! Simplex-constrained least squares recovering a discrete radius law
//! from a target lifetime CDF.
//!
//! The observed lifetime law is matched by a probability-weighted sum of
//! single-disc chord CDFs evaluated on a radius grid:
//!
//! ```text
//! minimize   || A w - b ||^2
//! subject to w >= 0,  sum(w) = 1,
//! ```
//!
//! where `A[i][j] = chord_cdf(y_i, r_j)` and `b_i` is the target CDF at
//! `y_i`.  The weights `w` are reported as the radius PMF on the grid.
//!
//! The solver is an accelerated projected-gradient method with exact
//! Euclidean projection onto the simplex, step size `1 / ||A||_2^2`
//! (estimated by power iteration), monotone restarts, and a periodic
//! "face polish": an equality-constrained least-squares solve restricted
//! to the current support that jumps directly to the optimum of the
//! active face whenever that optimum is feasible.  Optimality is
//! certified through the KKT conditions: on the support the gradient
//! components must agree with the shared equality multiplier, off the
//! support they must not fall below it.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::mpc::chord::{chord_cdf, RadiusPmf};

/// Hard cap on accelerated projected-gradient iterations.
const MAX_ITERATIONS: usize = 100_000;
/// Early exit once the projected-gradient step norm falls below this.
const STEP_TOLERANCE: f64 = 1e-10;
/// Lipschitz-normalized KKT violation below which the iterate is
/// accepted as optimal.
const KKT_TOLERANCE: f64 = 1e-10;
/// Iterations at which the active face is polished.
const POLISH_SCHEDULE: [usize; 7] = [500, 1_500, 4_000, 10_000, 25_000, 60_000, 100_000];

/// Result of the radius-weight recovery.
#[derive(Debug, Clone)]
pub struct RadiusWeightSolution {
    /// Recovered radius law on the input grid (zero weights retained).
    pub pmf: RadiusPmf,
    /// Root-mean-square mismatch between `A w` and the target CDF.
    pub rmse: f64,
    /// Squared residual norm `||A w - b||^2`.
    pub objective: f64,
    /// Worst KKT violation divided by the Lipschitz constant
    /// `||A||_2^2` (scale-free).
    pub kkt_residual: f64,
    /// Gradient iterations consumed.
    pub iterations: usize,
    /// Whether a step-norm or KKT stopping rule fired before the
    /// iteration cap.
    pub converged: bool,
}

/// Exact Euclidean projection onto the probability simplex
/// `{w : w >= 0, sum(w) = 1}` via the sort-and-threshold rule.
pub fn simplex_project(v: &[f64]) -> Vec<f64> {
    if v.is_empty() {
        return Vec::new();
    }
    let mut sorted = v.to_vec();
    sorted.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut prefix = 0.0;
    let mut theta = sorted[0] - 1.0;
    for (j, u) in sorted.iter().enumerate() {
        prefix += u;
        let candidate = (prefix - 1.0) / (j + 1) as f64;
        if u - candidate > 0.0 {
            theta = candidate;
        }
    }
    v.iter().map(|x| (x - theta).max(0.0)).collect()
}

/// Dot product with four independent accumulators so the loop
/// vectorizes without reassociation flags.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let split = n - n % 4;
    let mut acc = [0.0f64; 4];
    for (ca, cb) in a[..split].chunks_exact(4).zip(b[..split].chunks_exact(4)) {
        acc[0] += ca[0] * cb[0];
        acc[1] += ca[1] * cb[1];
        acc[2] += ca[2] * cb[2];
        acc[3] += ca[3] * cb[3];
    }
    let tail: f64 = a[split..n].iter().zip(&b[split..n]).map(|(x, y)| x * y).sum();
    acc[0] + acc[1] + acc[2] + acc[3] + tail
}

/// Dense column-major storage of the chord design matrix.
struct LeastSquares {
    /// Column-major entries; column `j` occupies `j*p .. (j+1)*p`.
    cols: Vec<f64>,
    p: usize,
    q: usize,
    b: Vec<f64>,
}

impl LeastSquares {
    fn new(chord_grid: &[f64], target: &[f64], radii: &[f64]) -> Self {
        let p = chord_grid.len();
        let q = radii.len();
        let mut cols = vec![0.0; p * q];
        for (j, r) in radii.iter().enumerate() {
            for (i, y) in chord_grid.iter().enumerate() {
                cols[j * p + i] = chord_cdf(*y, *r);
            }
        }
        Self {
            cols,
            p,
            q,
            b: target.to_vec(),
        }
    }

    fn column(&self, j: usize) -> &[f64] {
        &self.cols[j * self.p..(j + 1) * self.p]
    }

    /// `out = A w - b`, skipping zero weights.
    fn residual(&self, w: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend(self.b.iter().map(|v| -v));
        for (j, wj) in w.iter().enumerate() {
            if *wj != 0.0 {
                for (o, c) in out.iter_mut().zip(self.column(j)) {
                    *o += wj * c;
                }
            }
        }
    }

    /// `out = A^T res`.
    fn gradient(&self, res: &[f64], out: &mut [f64]) {
        for (j, o) in out.iter_mut().enumerate() {
            *o = dot(self.column(j), res);
        }
    }

    /// Largest eigenvalue of `A^T A` by power iteration (with a small
    /// safety factor so the gradient step is never too long).
    fn lipschitz(&self) -> f64 {
        let mut v = vec![1.0 / (self.q as f64).sqrt(); self.q];
        let mut av = vec![0.0; self.p];
        let mut atav = vec![0.0; self.q];
        let mut lambda = 0.0f64;
        for _ in 0..500 {
            av.clear();
            av.resize(self.p, 0.0);
            for (j, vj) in v.iter().enumerate() {
                if *vj != 0.0 {
                    for (o, c) in av.iter_mut().zip(self.column(j)) {
                        *o += vj * c;
                    }
                }
            }
            let next: f64 = av.iter().map(|x| x * x).sum();
            self.gradient(&av, &mut atav);
            let norm = atav.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm == 0.0 {
                return 1.0;
            }
            for (vi, s) in v.iter_mut().zip(&atav) {
                *vi = s / norm;
            }
            if (next - lambda).abs() <= 1e-13 * next.max(f64::MIN_POSITIVE) {
                lambda = next;
                break;
            }
            lambda = next;
        }
        lambda.max(f64::MIN_POSITIVE) * 1.01
    }
}

fn half_square(res: &[f64]) -> f64 {
    0.5 * res.iter().map(|r| r * r).sum::<f64>()
}

/// Lipschitz-normalized worst KKT violation at `w`.
fn kkt_violation(ls: &LeastSquares, w: &[f64], lipschitz: f64) -> f64 {
    let mut res = Vec::new();
    ls.residual(w, &mut res);
    let mut g = vec![0.0; ls.q];
    ls.gradient(&res, &mut g);
    let mut support_sum = 0.0;
    let mut support_count = 0usize;
    for (wj, gj) in w.iter().zip(&g) {
        if *wj > 0.0 {
            support_sum += gj;
            support_count += 1;
        }
    }
    if support_count == 0 {
        return f64::INFINITY;
    }
    let mu = support_sum / support_count as f64;
    let mut violation = 0.0f64;
    for (wj, gj) in w.iter().zip(&g) {
        if *wj > 0.0 {
            violation = violation.max((gj - mu).abs());
        } else {
            violation = violation.max(mu - gj);
        }
    }
    violation / lipschitz
}

/// Equality-constrained least squares restricted to the support of `w`.
///
/// The affine constraint `sum(x) = 1` is eliminated by moving along
/// difference directions `e_i - e_last` from the (feasible) current
/// iterate, leaving an unconstrained least-squares problem solved through
/// a rank-revealing SVD.  An infeasible face optimum is handled by
/// stepping toward it until a coordinate hits zero, which shrinks the
/// support for the next round.
fn polish(ls: &LeastSquares, w: &[f64], f_w: f64) -> Option<(Vec<f64>, f64)> {
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut current = w.to_vec();
    let mut f_current = f_w;
    let mut res = Vec::new();
    for _ in 0..3 {
        let support: Vec<usize> = (0..ls.q).filter(|&j| current[j] > 0.0).collect();
        let s = support.len();
        if s < 2 {
            break;
        }
        let last = support[s - 1];
        let mut design = DMatrix::zeros(ls.p, s - 1);
        for (k, &j) in support[..s - 1].iter().enumerate() {
            let col = ls.column(j);
            let anchor = ls.column(last);
            for i in 0..ls.p {
                design[(i, k)] = col[i] - anchor[i];
            }
        }
        ls.residual(&current, &mut res);
        let rhs = DVector::from_fn(ls.p, |i, _| -res[i]);
        let svd = design.svd(true, true);
        let sv_max = svd.singular_values.iter().copied().fold(0.0f64, f64::max);
        if sv_max <= 0.0 {
            break;
        }
        let Ok(z) = svd.solve(&rhs, sv_max * 1e-13) else {
            break;
        };
        let mut x = current.clone();
        let mut delta_last = 0.0;
        for (k, &j) in support[..s - 1].iter().enumerate() {
            x[j] += z[k];
            delta_last -= z[k];
        }
        x[last] += delta_last;
        let min_x = support
            .iter()
            .map(|&j| x[j])
            .fold(f64::INFINITY, f64::min);
        let at_face_optimum = min_x >= -1e-12;
        let candidate = if at_face_optimum {
            for &j in &support {
                if x[j] < 0.0 {
                    x[j] = 0.0;
                }
            }
            let total: f64 = x.iter().sum();
            if !(total > 0.0) {
                break;
            }
            for v in x.iter_mut() {
                *v /= total;
            }
            x
        } else {
            let mut alpha = f64::INFINITY;
            for &j in &support {
                let d = x[j] - current[j];
                if d < 0.0 {
                    alpha = alpha.min(current[j] / -d);
                }
            }
            if !(alpha.is_finite() && alpha > 0.0) {
                break;
            }
            let alpha = alpha.min(1.0);
            let mut stepped = current.clone();
            for &j in &support {
                stepped[j] = (current[j] + alpha * (x[j] - current[j])).max(0.0);
            }
            let total: f64 = stepped.iter().sum();
            if !(total > 0.0) {
                break;
            }
            for v in stepped.iter_mut() {
                *v /= total;
            }
            stepped
        };
        ls.residual(&candidate, &mut res);
        let f_candidate = half_square(&res);
        if f_candidate <= f_current {
            f_current = f_candidate;
            current = candidate;
            best = Some((current.clone(), f_current));
            if at_face_optimum {
                break;
            }
        } else {
            break;
        }
    }
    best
}

fn validate_inputs(chord_grid: &[f64], target: &[f64], radii: &[f64]) -> Result<()> {
    if chord_grid.is_empty() {
        return Err(Error::InvalidParameter(
            "chord grid must not be empty".into(),
        ));
    }
    if target.len() != chord_grid.len() {
        return Err(Error::InvalidParameter(format!(
            "target has {} entries but the chord grid has {}",
            target.len(),
            chord_grid.len()
        )));
    }
    if radii.is_empty() {
        return Err(Error::InvalidParameter(
            "radius grid must not be empty".into(),
        ));
    }
    for pair in chord_grid.windows(2) {
        if !(pair[1] > pair[0]) {
            return Err(Error::InvalidParameter(
                "chord grid must be strictly increasing".into(),
            ));
        }
    }
    if !chord_grid.iter().all(|y| y.is_finite() && *y >= 0.0) {
        return Err(Error::InvalidParameter(
            "chord grid must be finite and nonnegative".into(),
        ));
    }
    for pair in radii.windows(2) {
        if !(pair[1] > pair[0]) {
            return Err(Error::InvalidParameter(
                "radius grid must be strictly increasing".into(),
            ));
        }
    }
    if !radii.iter().all(|r| r.is_finite() && *r >= 0.0) {
        return Err(Error::InvalidParameter(
            "radius grid must be finite and nonnegative".into(),
        ));
    }
    if !target.iter().all(|t| t.is_finite() && (0.0..=1.0).contains(t)) {
        return Err(Error::InvalidParameter(
            "target CDF values must lie in [0, 1]".into(),
        ));
    }
    for pair in target.windows(2) {
        if pair[1] < pair[0] - 1e-12 {
            return Err(Error::InvalidParameter(
                "target CDF must be nondecreasing".into(),
            ));
        }
    }
    Ok(())
}

/// Recovers a radius PMF on `radii` whose chord-CDF mixture best matches
/// `target` on `chord_grid`, in the least-squares sense over the
/// probability simplex.
pub fn solve_radius_weights(
    chord_grid: &[f64],
    target: &[f64],
    radii: &[f64],
) -> Result<RadiusWeightSolution> {
    validate_inputs(chord_grid, target, radii)?;
    let ls = LeastSquares::new(chord_grid, target, radii);
    let lipschitz = ls.lipschitz();
    let q = ls.q;

    let mut w = vec![1.0 / q as f64; q];
    let mut res = Vec::new();
    ls.residual(&w, &mut res);
    let mut f_w = half_square(&res);

    let mut w_prev = w.clone();
    let mut y = w.clone();
    let mut t = 1.0f64;
    let mut g = vec![0.0; q];
    let mut res_y = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    let mut polish_idx = 0;

    for iter in 1..=MAX_ITERATIONS {
        iterations = iter;
        ls.residual(&y, &mut res_y);
        ls.gradient(&res_y, &mut g);
        let stepped: Vec<f64> = y.iter().zip(&g).map(|(yi, gi)| yi - gi / lipschitz).collect();
        let mut w_next = simplex_project(&stepped);
        ls.residual(&w_next, &mut res);
        let mut f_next = half_square(&res);
        if f_next > f_w {
            // The accelerated point overshot; restart the momentum from
            // the best iterate, where a plain projected-gradient step is
            // guaranteed to descend.
            y.copy_from_slice(&w);
            t = 1.0;
            ls.residual(&y, &mut res_y);
            ls.gradient(&res_y, &mut g);
            let restart: Vec<f64> =
                y.iter().zip(&g).map(|(yi, gi)| yi - gi / lipschitz).collect();
            w_next = simplex_project(&restart);
            ls.residual(&w_next, &mut res);
            f_next = half_square(&res);
        }
        let step_norm = w_next
            .iter()
            .zip(&y)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        w_prev.copy_from_slice(&w);
        w.copy_from_slice(&w_next);
        f_w = f_next;

        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let beta = (t - 1.0) / t_next;
        for ((yi, wi), pi) in y.iter_mut().zip(&w).zip(&w_prev) {
            *yi = wi + beta * (wi - pi);
        }
        t = t_next;

        let stopping = step_norm <= STEP_TOLERANCE;
        let due_polish =
            polish_idx < POLISH_SCHEDULE.len() && iter == POLISH_SCHEDULE[polish_idx];
        if stopping || due_polish {
            if due_polish {
                polish_idx += 1;
            }
            if let Some((polished, f_polished)) = polish(&ls, &w, f_w) {
                w = polished;
                f_w = f_polished;
                y.copy_from_slice(&w);
                w_prev.copy_from_slice(&w);
                t = 1.0;
            }
            if stopping || kkt_violation(&ls, &w, lipschitz) <= KKT_TOLERANCE {
                converged = true;
                break;
            }
        }
    }

    ls.residual(&w, &mut res);
    let objective = res.iter().map(|r| r * r).sum::<f64>();
    let rmse = (objective / ls.p as f64).sqrt();
    let kkt_residual = kkt_violation(&ls, &w, lipschitz);
    if kkt_residual <= KKT_TOLERANCE {
        converged = true;
    }
    let total: f64 = w.iter().sum();
    if total > 0.0 {
        for v in w.iter_mut() {
            *v /= total;
        }
    }
    let pmf = RadiusPmf::new(radii.to_vec(), w)?;
    Ok(RadiusWeightSolution {
        pmf,
        rmse,
        objective,
        kkt_residual,
        iterations,
        converged,
    })
}
