//! Linearised closed-loop matrix and its stability classification.

use ndarray::Array2;
use serde::Serialize;

use super::{eig, Result, SpectrumError, SpectrumReport, INDETERMINATE_FACTOR};
use crate::graph::LaplacianView;

/// Closed-loop matrix of the linearised dynamics in the stacked state
/// `[x; z]`, together with its split into the α-independent part and the
/// part scaled by `η = α / (1 − β)`.
#[derive(Debug, Clone)]
pub struct SystemMatrix {
    pub matrix: Array2<f64>,
    pub nominal: Array2<f64>,
    pub perturbation: Array2<f64>,
    pub alpha: f64,
    pub beta: f64,
    pub eta: f64,
    pub nodes: usize,
    pub dim: usize,
}

/// Assembles the `2nm × 2nm` matrix
///
/// ```text
/// [ c (W̄ξ ⊗ I)        −η I          ]
/// [ c H (W̄ξ ⊗ I)      W̄ξ ⊗ I − η H  ]
/// ```
///
/// with `c = 1/(1−β)`, `W̄ξ = W̄ diag(ξ)` and `H = blockdiag(hessians)`.
/// `xi` holds the per-node slopes of the link nonlinearity (all ones for
/// ideal links).
pub fn build_system_matrix(
    l: &LaplacianView,
    hessians: &[Array2<f64>],
    alpha: f64,
    beta: f64,
    xi: &[f64],
) -> Result<SystemMatrix> {
    let n = l.n();
    if !(0.0..1.0).contains(&beta) {
        return Err(SpectrumError::InvalidMomentum(beta));
    }
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(SpectrumError::InvalidParameter {
            name: "alpha",
            value: alpha,
        });
    }
    if hessians.len() != n || xi.len() != n {
        return Err(SpectrumError::Shape(format!(
            "{n} nodes but {} Hessians and {} slopes",
            hessians.len(),
            xi.len()
        )));
    }
    let m = hessians.first().map_or(0, |h| h.nrows());
    if m == 0 || hessians.iter().any(|h| h.dim() != (m, m)) {
        return Err(SpectrumError::Shape(
            "Hessians must share one square shape".into(),
        ));
    }
    if let Some(&bad) = xi.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
        return Err(SpectrumError::InvalidParameter {
            name: "link slope",
            value: bad,
        });
    }

    let c = 1.0 / (1.0 - beta);
    let eta = alpha / (1.0 - beta);
    let w = l.matrix();
    let wg = Array2::from_shape_fn((n, n), |(i, j)| w[[i, j]] * xi[j]);
    let nm = n * m;
    let mut nominal = Array2::zeros((2 * nm, 2 * nm));
    let mut perturbation = Array2::zeros((2 * nm, 2 * nm));

    for i in 0..n {
        for j in 0..n {
            let cw = c * wg[[i, j]];
            for a in 0..m {
                nominal[[i * m + a, j * m + a]] = cw;
                nominal[[nm + i * m + a, nm + j * m + a]] = wg[[i, j]];
                for b in 0..m {
                    nominal[[nm + i * m + a, j * m + b]] = hessians[i][[a, b]] * cw;
                }
            }
        }
        for a in 0..m {
            perturbation[[i * m + a, nm + i * m + a]] = -1.0;
            for b in 0..m {
                perturbation[[nm + i * m + a, nm + i * m + b]] = -hessians[i][[a, b]];
            }
        }
    }
    let matrix = &nominal + &(&perturbation * eta);
    Ok(SystemMatrix {
        matrix,
        nominal,
        perturbation,
        alpha,
        beta,
        eta,
        nodes: n,
        dim: m,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    /// Exactly `dim` zero eigenvalues and every other real part negative.
    Stable,
    /// Extra zero or purely imaginary eigenvalues.
    NotConverging,
    /// Some eigenvalue with positive real part.
    Unstable,
    /// A real part too close to zero to classify.
    Indeterminate,
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    pub verdict: Verdict,
    pub zero_count: usize,
    pub expected_zeros: usize,
    /// Spectral abscissa over the nonzero eigenvalues.
    pub margin: Option<f64>,
    pub spectrum: SpectrumReport,
}

pub fn stability_report(system: &SystemMatrix) -> Result<StabilityReport> {
    let spectrum = eig(&system.matrix)?;
    let tol = spectrum.tol_zero;
    let band = INDETERMINATE_FACTOR * tol;
    let mut unstable = false;
    let mut imaginary = false;
    let mut unsure = false;
    for &e in &spectrum.eigenvalues {
        if spectrum.is_zero(e) {
            continue;
        }
        if e.re > band {
            unstable = true;
        } else if e.re.abs() <= tol {
            imaginary = true;
        } else if e.re.abs() <= band {
            unsure = true;
        }
    }
    let expected_zeros = system.dim;
    let zero_count = spectrum.zero_multiplicity;
    let verdict = if unstable {
        Verdict::Unstable
    } else if imaginary || zero_count > expected_zeros {
        Verdict::NotConverging
    } else if unsure || zero_count < expected_zeros {
        Verdict::Indeterminate
    } else {
        Verdict::Stable
    };
    Ok(StabilityReport {
        verdict,
        zero_count,
        expected_zeros,
        margin: spectrum.max_re_nonzero,
        spectrum,
    })
}

/// Smallest step size in `[lo, hi]` at which the linearised system stops
/// being stable, located by bisection to relative width `rel_tol`.
/// Returns `None` when the system is still stable at `hi`.
pub fn critical_alpha(
    l: &LaplacianView,
    hessians: &[Array2<f64>],
    beta: f64,
    xi: &[f64],
    lo: f64,
    hi: f64,
    rel_tol: f64,
) -> Result<Option<f64>> {
    let stable = |alpha: f64| -> Result<bool> {
        let sys = build_system_matrix(l, hessians, alpha, beta, xi)?;
        Ok(stability_report(&sys)?.verdict == Verdict::Stable)
    };
    if stable(hi)? {
        return Ok(None);
    }
    let (mut lo, mut hi) = (lo, hi);
    while hi - lo > rel_tol * hi {
        let mid = 0.5 * (lo + hi);
        if stable(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(hi))
}
