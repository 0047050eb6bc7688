//! Spectral analysis: eigenvalues, the algebraic-connectivity proxy λ₂,
//! admissible step-size and momentum bounds, and stability of the
//! linearised closed loop.

pub mod eig;
mod system;

pub use system::{
    build_system_matrix, critical_alpha, stability_report, StabilityReport, SystemMatrix, Verdict,
};

use ndarray::Array2;
use num_complex::Complex64;
use serde::Serialize;

use crate::graph::LaplacianView;

/// Relative tolerance below which an eigenvalue counts as zero.
pub const ZERO_TOL_REL: f64 = 1e-9;
/// Width of the indeterminate band, in multiples of the zero tolerance.
pub const INDETERMINATE_FACTOR: f64 = 10.0;

#[derive(Debug, thiserror::Error)]
pub enum SpectrumError {
    #[error("matrix is {rows}x{cols}, expected a non-empty square matrix")]
    NotSquare { rows: usize, cols: usize },
    #[error("QR iteration did not converge after {iterations} iterations ({} eigenvalues found)", converged.len())]
    NoConvergence {
        converged: Vec<Complex64>,
        iterations: usize,
    },
    #[error(
        "Laplacian has {zero_multiplicity} zero eigenvalues; the graph is not strongly connected"
    )]
    Disconnected { zero_multiplicity: usize },
    #[error("Laplacian has no nonzero eigenvalue")]
    NoNonzeroEigenvalue,
    #[error("momentum must lie in [0, 1), got {0}")]
    InvalidMomentum(f64),
    #[error("{name} must be positive and finite, got {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("no admissible momentum: alpha * zeta / |Re(lambda2)| = {0} > 1")]
    EmptyRange(f64),
    #[error("dimension mismatch: {0}")]
    Shape(String),
}

pub type Result<T> = std::result::Result<T, SpectrumError>;

/// Eigenvalues of a matrix with zero/nonzero classification.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    /// Sorted by decreasing real part, then increasing imaginary part.
    pub eigenvalues: Vec<Complex64>,
    pub tol_zero: f64,
    pub zero_multiplicity: usize,
    /// Largest real part among nonzero eigenvalues.
    pub max_re_nonzero: Option<f64>,
    /// Smallest |Re| among nonzero eigenvalues.
    pub min_nonzero_abs_re: Option<f64>,
}

impl SpectrumReport {
    pub fn from_eigenvalues(mut eigenvalues: Vec<Complex64>, tol_zero: f64) -> Self {
        eigenvalues.sort_by(|a, b| {
            b.re.partial_cmp(&a.re)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.im.partial_cmp(&b.im).unwrap_or(std::cmp::Ordering::Equal))
        });
        let is_zero = |e: &Complex64| e.norm() <= tol_zero;
        let zero_multiplicity = eigenvalues.iter().filter(|e| is_zero(e)).count();
        let nonzero = eigenvalues.iter().filter(|e| !is_zero(e));
        let max_re_nonzero = nonzero.clone().map(|e| e.re).reduce(f64::max);
        let min_nonzero_abs_re = nonzero.map(|e| e.re.abs()).reduce(f64::min);
        SpectrumReport {
            eigenvalues,
            tol_zero,
            zero_multiplicity,
            max_re_nonzero,
            min_nonzero_abs_re,
        }
    }

    pub fn is_zero(&self, e: Complex64) -> bool {
        e.norm() <= self.tol_zero
    }

    /// Largest inverse-iteration residual over all reported eigenvalues.
    pub fn max_residual(&self, m: &Array2<f64>) -> f64 {
        self.eigenvalues
            .iter()
            .map(|&e| eig::inverse_iteration_residual(m, e))
            .fold(0.0, f64::max)
    }
}

/// Eigenvalues of a square matrix; the zero tolerance is
/// `1e-9 · ‖M‖∞`.
pub fn eig(m: &Array2<f64>) -> Result<SpectrumReport> {
    let (rows, cols) = m.dim();
    if rows != cols || rows == 0 {
        return Err(SpectrumError::NotSquare { rows, cols });
    }
    let tol_zero = ZERO_TOL_REL * eig::infinity_norm(m);
    match eig::eigenvalues(m) {
        Ok(values) => Ok(SpectrumReport::from_eigenvalues(values, tol_zero)),
        Err(fail) => Err(SpectrumError::NoConvergence {
            converged: fail.converged,
            iterations: fail.iterations,
        }),
    }
}

/// The nonzero Laplacian eigenvalue with the smallest |Re|. Ties (within
/// the zero tolerance) go to the smaller |Im|, then to the lexicographically
/// smaller `(Re, Im)`.
pub fn lambda2(l: &LaplacianView) -> Result<Complex64> {
    let report = eig(l.matrix())?;
    lambda2_from_report(&report)
}

pub fn lambda2_from_report(report: &SpectrumReport) -> Result<Complex64> {
    if report.zero_multiplicity > 1 {
        return Err(SpectrumError::Disconnected {
            zero_multiplicity: report.zero_multiplicity,
        });
    }
    let min_re = report
        .min_nonzero_abs_re
        .ok_or(SpectrumError::NoNonzeroEigenvalue)?;
    report
        .eigenvalues
        .iter()
        .copied()
        .filter(|&e| !report.is_zero(e) && e.re.abs() - min_re <= report.tol_zero)
        .min_by(|a, b| {
            a.im.abs()
                .partial_cmp(&b.im.abs())
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.re.partial_cmp(&b.re).unwrap_or(std::cmp::Ordering::Equal))
                .then(a.im.partial_cmp(&b.im).unwrap_or(std::cmp::Ordering::Equal))
        })
        .ok_or(SpectrumError::NoNonzeroEigenvalue)
}

/// Cheap lower bound `1 / (n d)` on |Re λ₂| for a network with `n` nodes
/// and diameter `d`.
pub fn lambda2_lower_bound(n: usize, diameter: usize) -> f64 {
    1.0 / (n as f64 * diameter as f64)
}

fn positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(SpectrumError::InvalidParameter { name, value })
    }
}

/// Largest admissible step size for momentum `beta`:
/// `|Re λ₂| (1 − β)² / ζ`.
pub fn alpha_bound(beta: f64, abs_re_lambda2: f64, zeta: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&beta) {
        return Err(SpectrumError::InvalidMomentum(beta));
    }
    positive("|Re(lambda2)|", abs_re_lambda2)?;
    positive("zeta", zeta)?;
    Ok(abs_re_lambda2 * (1.0 - beta).powi(2) / zeta)
}

/// Largest admissible momentum for step size `alpha`:
/// `1 − sqrt(α ζ / |Re λ₂|)`.
pub fn beta_bound(alpha: f64, abs_re_lambda2: f64, zeta: f64) -> Result<f64> {
    positive("alpha", alpha)?;
    positive("|Re(lambda2)|", abs_re_lambda2)?;
    positive("zeta", zeta)?;
    let ratio = alpha * zeta / abs_re_lambda2;
    if ratio > 1.0 {
        return Err(SpectrumError::EmptyRange(ratio));
    }
    Ok(1.0 - ratio.sqrt())
}

/// `(β, α_max(β))` pairs over the given momentum grid.
pub fn admissible_frontier(
    abs_re_lambda2: f64,
    zeta: f64,
    betas: &[f64],
) -> Result<Vec<(f64, f64)>> {
    betas
        .iter()
        .map(|&b| alpha_bound(b, abs_re_lambda2, zeta).map(|a| (b, a)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_cycle, build_exponential, Network};
    use approx::assert_relative_eq;
    use ndarray::array;

    #[test]
    fn two_ring_spectrum() {
        let report = eig(&array![[-1.0, 1.0], [1.0, -1.0]]).unwrap();
        assert_eq!(report.zero_multiplicity, 1);
        assert_relative_eq!(report.eigenvalues[1].re, -2.0, epsilon = 1e-14);
        let l = build_cycle(2, 1.0, false).unwrap().laplacian();
        assert_relative_eq!(lambda2(&l).unwrap().re, -2.0, epsilon = 1e-14);
    }

    #[test]
    fn directed_four_ring() {
        let l = build_cycle(4, 1.0, false).unwrap().laplacian();
        let report = eig(l.matrix()).unwrap();
        let want = [(0.0, 0.0), (-1.0, -1.0), (-1.0, 1.0), (-2.0, 0.0)];
        for (e, (re, im)) in report.eigenvalues.iter().zip(want) {
            assert!(
                (e.re - re).abs() < 1e-12 && (e.im - im).abs() < 1e-12,
                "{e}"
            );
        }
        let l2 = lambda2(&l).unwrap();
        assert_relative_eq!(l2.re, -1.0, epsilon = 1e-12);
        assert_relative_eq!(l2.im, -1.0, epsilon = 1e-12);
    }

    #[test]
    fn spectrum_examples() {
        let r = eig(&array![[-2.0, 1.0], [1.0, -2.0]]).unwrap();
        assert_relative_eq!(r.eigenvalues[0].re, -1.0, epsilon = 1e-14);
        assert_relative_eq!(r.eigenvalues[1].re, -3.0, epsilon = 1e-14);
        let l6 = build_cycle(6, 0.5, true).unwrap().laplacian();
        assert_relative_eq!(lambda2(&l6).unwrap().re.abs(), 0.5, epsilon = 1e-12);
        let k3 = crate::graph::build_er_balanced(3, 1.0, 0)
            .unwrap()
            .laplacian();
        assert_relative_eq!(lambda2(&k3).unwrap().re.abs(), 3.0, epsilon = 1e-12);
    }

    #[test]
    fn bound_round_trip() {
        assert_relative_eq!(lambda2_lower_bound(10, 3), 1.0 / 30.0);
        assert_eq!(lambda2_lower_bound(2, 1), 0.5);
        assert_relative_eq!(
            beta_bound(1.0 / 11.0, 1.0, 11.0).unwrap(),
            0.0,
            epsilon = 1e-15
        );
        assert_relative_eq!(beta_bound(0.05, 1.0, 11.0).unwrap(), 1.0 - 0.55f64.sqrt());
        for alpha in [0.001, 0.01, 0.05, 0.09] {
            let b = beta_bound(alpha, 1.0, 11.0).unwrap();
            assert_relative_eq!(
                alpha_bound(b, 1.0, 11.0).unwrap(),
                alpha,
                max_relative = 1e-12
            );
        }
        assert!(alpha_bound(1.0 - 1e-9, 1.0, 11.0).unwrap() < 1e-18);
    }

    #[test]
    fn nilpotent_has_double_zero() {
        let report = eig(&array![[0.0, 1.0], [0.0, 0.0]]).unwrap();
        assert_eq!(report.zero_multiplicity, 2);
        assert!(report.min_nonzero_abs_re.is_none());
    }

    #[test]
    fn zero_multiplicity_tracks_components() {
        let mut w = Array2::zeros((6, 6));
        for base in [0, 3] {
            for k in 0..3 {
                w[[base + (k + 1) % 3, base + k]] = 1.0;
            }
        }
        let l = Network::from_weights(w, true, "").unwrap().laplacian();
        assert!(matches!(
            lambda2(&l),
            Err(SpectrumError::Disconnected {
                zero_multiplicity: 2
            })
        ));
        for n in [3, 5, 8] {
            let r = eig(build_cycle(n, 1.0, true).unwrap().laplacian().matrix()).unwrap();
            assert_eq!(r.zero_multiplicity, 1);
        }
    }

    #[test]
    fn rejects_non_square() {
        assert!(matches!(
            eig(&Array2::zeros((2, 3))),
            Err(SpectrumError::NotSquare { .. })
        ));
    }

    #[test]
    fn bound_examples() {
        assert_relative_eq!(alpha_bound(0.0, 1.0, 11.0).unwrap(), 1.0 / 11.0);
        assert_relative_eq!(alpha_bound(0.5, 2.0, 4.0).unwrap(), 0.125);
        assert_relative_eq!(beta_bound(0.25, 1.0, 1.0).unwrap(), 0.5);
        assert!(matches!(
            alpha_bound(1.0, 1.0, 1.0),
            Err(SpectrumError::InvalidMomentum(_))
        ));
        assert!(matches!(
            beta_bound(2.0, 1.0, 1.0),
            Err(SpectrumError::EmptyRange(_))
        ));
        assert!(matches!(
            alpha_bound(0.1, 1.0, 0.0),
            Err(SpectrumError::InvalidParameter { .. })
        ));
    }

    #[test]
    fn lower_bound_is_below_true_gap() {
        for net in [
            build_cycle(6, 1.0, true).unwrap(),
            build_cycle(7, 1.0, false).unwrap(),
            build_exponential(16, 1.0).unwrap(),
        ] {
            let l2 = lambda2(&net.laplacian()).unwrap();
            let d = net.diameter().unwrap();
            assert!(lambda2_lower_bound(net.n(), d) <= l2.re.abs());
        }
    }

    #[test]
    fn frontier_is_monotone() {
        let f = admissible_frontier(0.5, 11.0, &[0.0, 0.2, 0.4, 0.6, 0.8]).unwrap();
        assert!(f.windows(2).all(|w| w[1].1 < w[0].1));
    }
}
