//! Finite-difference gradient checks and curvature-assumption validation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{norm, Objective};
use crate::spectrum;

pub const FD_STEP: f64 = 1e-6;
pub const FD_RTOL: f64 = 1e-5;

#[derive(Debug, Clone, Serialize)]
pub struct GradCheckReport {
    pub family: String,
    pub points: usize,
    pub evaluations: usize,
    pub worst_rel_error: f64,
    pub worst_node: usize,
    pub worst_point: Vec<f64>,
    pub tolerance: f64,
    pub passed: bool,
}

/// Compares the analytic gradient of every node against centred finite
/// differences at `points` seeded random states drawn uniformly from
/// `[−radius, radius]^m`. The error is
/// `‖g − g_fd‖ / max(‖g‖, ‖g_fd‖, 1)`.
pub fn gradient_check(
    obj: &dyn Objective,
    points: usize,
    radius: f64,
    seed: u64,
    step: f64,
    rtol: f64,
) -> GradCheckReport {
    let m = obj.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = vec![0.0; m];
    let mut fd = vec![0.0; m];
    let mut probe = vec![0.0; m];
    let mut worst = 0.0f64;
    let mut worst_node = 0;
    let mut worst_point = vec![0.0; m];
    let mut evaluations = 0;
    for _ in 0..points {
        let x: Vec<f64> = (0..m).map(|_| rng.random_range(-radius..=radius)).collect();
        for node in 0..obj.nodes() {
            obj.gradient(node, &x, &mut g);
            probe.copy_from_slice(&x);
            for k in 0..m {
                probe[k] = x[k] + step;
                let up = obj.value(node, &probe);
                probe[k] = x[k] - step;
                let down = obj.value(node, &probe);
                probe[k] = x[k];
                fd[k] = (up - down) / (2.0 * step);
            }
            let diff: Vec<f64> = g.iter().zip(&fd).map(|(a, b)| a - b).collect();
            let err = norm(&diff) / norm(&g).max(norm(&fd)).max(1.0);
            evaluations += 1;
            if !(err <= worst) {
                worst = err;
                worst_node = node;
                worst_point.copy_from_slice(&x);
            }
        }
    }
    GradCheckReport {
        family: obj.family().to_string(),
        points,
        evaluations,
        worst_rel_error: worst,
        worst_node,
        worst_point,
        tolerance: rtol,
        passed: worst <= rtol,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CurvatureAssumptionReport {
    /// Largest node-Hessian eigenvalue over the grid.
    pub max_curvature: f64,
    /// `ζ − max_curvature`; negative when the bound fails.
    pub curvature_margin: f64,
    /// Smallest eigenvalue of `Σ_i ∇²f_i` over the grid.
    pub min_total_curvature: f64,
    pub bound_holds: bool,
    pub sum_positive_definite: bool,
    pub passed: bool,
}

// Dense eigen-decomposition is used up to this dimension; above it the
// extreme eigenvalues come from power iteration.
const DENSE_LIMIT: usize = 64;

/// Checks `∇²f_i(x) ⪯ ζ I` for every node and `Σ_i ∇²f_i(x) ≻ 0` at every
/// grid point (each grid point is read as a consensus state).
pub fn check_curvature_assumptions(
    obj: &dyn Objective,
    grid: &[Vec<f64>],
) -> CurvatureAssumptionReport {
    let zeta = obj.zeta();
    let mut max_curv = f64::NEG_INFINITY;
    let mut min_total = f64::INFINITY;
    for x in grid {
        let mut total = ndarray::Array2::<f64>::zeros((obj.dim(), obj.dim()));
        for node in 0..obj.nodes() {
            let h = obj.hessian(node, x);
            let (_, top) = extreme_eigenvalues(&h);
            max_curv = max_curv.max(top);
            total += &h;
        }
        let (bottom, _) = extreme_eigenvalues(&total);
        min_total = min_total.min(bottom);
    }
    let bound_holds = max_curv <= zeta;
    let sum_positive_definite = min_total > 0.0;
    CurvatureAssumptionReport {
        max_curvature: max_curv,
        curvature_margin: zeta - max_curv,
        min_total_curvature: min_total,
        bound_holds,
        sum_positive_definite,
        passed: bound_holds && sum_positive_definite,
    }
}

// (smallest, largest) eigenvalue of a symmetric matrix.
fn extreme_eigenvalues(h: &ndarray::Array2<f64>) -> (f64, f64) {
    let m = h.nrows();
    if m <= DENSE_LIMIT {
        if let Ok(r) = spectrum::eig(h) {
            let re = r.eigenvalues.iter().map(|e| e.re);
            return (
                re.clone().fold(f64::INFINITY, f64::min),
                re.fold(f64::NEG_INFINITY, f64::max),
            );
        }
    }
    let top = power_iteration(h, 0.0);
    // shift so the smallest eigenvalue becomes dominant
    let shift = top.abs();
    let bottom = power_iteration(h, shift) + shift;
    (bottom.min(top), top.max(bottom))
}

// Dominant eigenvalue of (h − shift·I), returned as a Rayleigh quotient.
fn power_iteration(h: &ndarray::Array2<f64>, shift: f64) -> f64 {
    let m = h.nrows();
    let mut v: Vec<f64> = (0..m).map(|k| 1.0 + 0.1 * (k as f64).sin()).collect();
    let mut lambda = 0.0;
    for _ in 0..1000 {
        let mut w: Vec<f64> = h.dot(&ndarray::ArrayView1::from(&v)).to_vec();
        for k in 0..m {
            w[k] -= shift * v[k];
        }
        let len = norm(&w);
        if len == 0.0 {
            return 0.0;
        }
        let next: f64 = w.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>() / norm(&v).powi(2);
        v = w.iter().map(|x| x / len).collect();
        if (next - lambda).abs() <= 1e-12 * next.abs().max(1.0) {
            return next;
        }
        lambda = next;
    }
    lambda
}
