//! Least-squares line fit: state `x = [β, ν]`, node cost
//! `f_i = Σ_j (β χ_j − ν − y_j)²`.

use ndarray::{array, Array2};

use super::{Objective, ObjectiveError, PartitionedDataset, Result};
use crate::spectrum;

#[derive(Debug, Clone)]
pub struct LinRegObjective {
    // per node: (χ, y)
    points: Vec<Vec<(f64, f64)>>,
    // per node sufficient statistics: Σχ², Σχ, count, Σχy, Σy
    stats: Vec<[f64; 5]>,
    zeta: f64,
}

pub fn linreg_objective(data: &PartitionedDataset) -> Result<LinRegObjective> {
    if data.nodes.is_empty() {
        return Err(ObjectiveError::InvalidDataset("no nodes".into()));
    }
    let mut points = Vec::new();
    let mut stats = Vec::new();
    let mut zeta = 0.0f64;
    for (i, node) in data.nodes.iter().enumerate() {
        if node.is_empty() {
            return Err(ObjectiveError::InvalidDataset(format!(
                "node {i} has no points"
            )));
        }
        if node.dim() != 1 {
            return Err(ObjectiveError::InvalidDataset(format!(
                "regression points must have one feature, node {i} has {}",
                node.dim()
            )));
        }
        let pts: Vec<(f64, f64)> = node
            .features()
            .iter()
            .zip(node.labels())
            .map(|(f, &y)| (f[0], y))
            .collect();
        let mut s = [0.0; 5];
        for &(chi, y) in &pts {
            s[0] += chi * chi;
            s[1] += chi;
            s[2] += 1.0;
            s[3] += chi * y;
            s[4] += y;
        }
        let h = node_hessian(&s);
        let top = spectrum::eig(&h)
            .map(|r| r.eigenvalues[0].re)
            .unwrap_or_else(|_| h.diag().sum());
        zeta = zeta.max(top);
        points.push(pts);
        stats.push(s);
    }
    Ok(LinRegObjective {
        points,
        stats,
        zeta,
    })
}

fn node_hessian(s: &[f64; 5]) -> Array2<f64> {
    array![[2.0 * s[0], -2.0 * s[1]], [-2.0 * s[1], 2.0 * s[2]]]
}

impl LinRegObjective {
    /// Pooled ordinary least squares over all node data.
    pub fn ols(&self) -> Option<[f64; 2]> {
        let mut s = [0.0; 5];
        for node in &self.stats {
            for k in 0..5 {
                s[k] += node[k];
            }
        }
        // normal equations: [Σχ², −Σχ; −Σχ, N] [β; ν] = [Σχy; −Σy]
        let det = s[0] * s[2] - s[1] * s[1];
        if det.abs() <= 1e-12 * (s[0] * s[2]).abs().max(f64::MIN_POSITIVE) {
            return None;
        }
        let beta = (s[2] * s[3] - s[1] * s[4]) / det;
        let nu = (s[1] * s[3] - s[0] * s[4]) / det;
        Some([beta, nu])
    }

    pub fn node_hessian(&self, node: usize) -> Array2<f64> {
        node_hessian(&self.stats[node])
    }
}

impl Objective for LinRegObjective {
    fn family(&self) -> &'static str {
        "linreg"
    }

    fn nodes(&self) -> usize {
        self.points.len()
    }

    fn dim(&self) -> usize {
        2
    }

    fn value(&self, node: usize, x: &[f64]) -> f64 {
        self.points[node]
            .iter()
            .map(|&(chi, y)| {
                let r = x[0] * chi - x[1] - y;
                r * r
            })
            .sum()
    }

    fn gradient(&self, node: usize, x: &[f64], out: &mut [f64]) {
        out[0] = 0.0;
        out[1] = 0.0;
        for &(chi, y) in &self.points[node] {
            let r = x[0] * chi - x[1] - y;
            out[0] += 2.0 * r * chi;
            out[1] -= 2.0 * r;
        }
    }

    fn hessian_apply(&self, node: usize, _x: &[f64], v: &[f64], out: &mut [f64]) {
        let s = &self.stats[node];
        out[0] = 2.0 * (s[0] * v[0] - s[1] * v[1]);
        out[1] = 2.0 * (-s[1] * v[0] + s[2] * v[1]);
    }

    fn zeta(&self) -> f64 {
        self.zeta
    }

    fn known_minimizer(&self) -> Option<Vec<f64>> {
        self.ols().map(|b| b.to_vec())
    }
}
