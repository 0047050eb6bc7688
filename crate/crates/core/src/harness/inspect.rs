//! Network inspection: Laplacian spectrum and the admissible
//! (momentum, gain) frontier.

use num_complex::Complex64;
use serde::Serialize;

use super::HarnessError;
use crate::graph::{Network, BALANCE_TOL};
use crate::spectrum;

/// Momentum values at which the frontier is tabulated.
pub fn frontier_betas() -> Vec<f64> {
    (0..20).map(|k| k as f64 * 0.05).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct NetworkReport {
    pub n: usize,
    pub directed: bool,
    pub weight_balanced: bool,
    pub strongly_connected: bool,
    pub eigenvalues: Vec<Complex64>,
    pub lambda2: Complex64,
    pub abs_re_lambda2: f64,
    pub zeta: Option<f64>,
    /// `(beta, alpha_bound)` pairs; empty without `zeta`.
    pub frontier: Vec<(f64, f64)>,
}

pub fn network_report(net: &Network, zeta: Option<f64>) -> Result<NetworkReport, HarnessError> {
    let lap = net.laplacian();
    let report = spectrum::eig(lap.matrix())?;
    let lambda2 = spectrum::lambda2_from_report(&report)?;
    let frontier = match zeta {
        Some(z) => spectrum::admissible_frontier(lambda2.re.abs(), z, &frontier_betas())?,
        None => Vec::new(),
    };
    Ok(NetworkReport {
        n: net.n(),
        directed: net.directed(),
        weight_balanced: net.is_weight_balanced(BALANCE_TOL),
        strongly_connected: net.is_strongly_connected(),
        eigenvalues: report.eigenvalues,
        lambda2,
        abs_re_lambda2: lambda2.re.abs(),
        zeta,
        frontier,
    })
}

impl NetworkReport {
    pub fn eigenvalues_csv(&self) -> String {
        let mut out = String::from("re,im\n");
        for e in &self.eigenvalues {
            out.push_str(&format!("{},{}\n", e.re, e.im));
        }
        out
    }

    pub fn frontier_csv(&self) -> String {
        let mut out = String::from("beta,alpha_bound\n");
        for (b, a) in &self.frontier {
            out.push_str(&format!("{b},{a}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_cycle;

    #[test]
    fn six_ring_at_half_weight() {
        let r = network_report(&build_cycle(6, 0.5, true).unwrap(), Some(11.0)).unwrap();
        assert!((r.abs_re_lambda2 - 0.5).abs() < 1e-12);
        let (beta, alpha) = r.frontier[0];
        assert_eq!(beta, 0.0);
        assert!((alpha - 0.5 / 11.0).abs() < 1e-15);
        assert_eq!(r.frontier.len(), 20);
        assert!(r.frontier_csv().starts_with("beta,alpha_bound\n0,"));
    }
}
