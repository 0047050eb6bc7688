//! Kernel SVM with the smooth logarithmic hinge loss.
//!
//! State `x = [ω₁, ω₂, ω₃, ν]`; node cost
//! `f_i = ωᵀω + C Σ_j (1/μ) log(1 + exp(μ y_j))` with
//! `y_j = 1 − l_j (ωᵀφ(χ_j) − ν)`.

use ndarray::Array2;

use super::{sigmoid, softplus, Dataset, Objective, ObjectiveError, PartitionedDataset, Result};
use crate::spectrum;

pub const SVM_DEFAULT_MU: f64 = 3.0;
pub const SVM_DEFAULT_C: f64 = 2.0;

/// Radial lift `(χ₁, χ₂, χ₁² + χ₂²)`.
pub fn kernel_lift(chi: [f64; 2]) -> [f64; 3] {
    [chi[0], chi[1], chi[0] * chi[0] + chi[1] * chi[1]]
}

#[derive(Debug, Clone)]
pub struct SvmObjective {
    // per node: (lifted point, label)
    points: Vec<Vec<([f64; 3], f64)>>,
    mu: f64,
    c: f64,
    zeta: f64,
}

pub fn svm_objective(data: &PartitionedDataset, mu: f64, c: f64) -> Result<SvmObjective> {
    if !(mu.is_finite() && mu > 0.0) {
        return Err(ObjectiveError::InvalidParameter {
            name: "mu",
            requirement: "positive",
            value: mu,
        });
    }
    if !(c.is_finite() && c >= 0.0) {
        return Err(ObjectiveError::InvalidParameter {
            name: "C",
            requirement: "non-negative",
            value: c,
        });
    }
    if data.nodes.is_empty() {
        return Err(ObjectiveError::InvalidDataset("no nodes".into()));
    }
    let mut points = Vec::with_capacity(data.nodes.len());
    for (i, node) in data.nodes.iter().enumerate() {
        points.push(lift_node(i, node)?);
    }
    let mut worst = 0.0f64;
    for node in &points {
        let mut s = Array2::<f64>::zeros((4, 4));
        for (phi, _) in node {
            let u = [phi[0], phi[1], phi[2], -1.0];
            for a in 0..4 {
                for b in 0..4 {
                    s[[a, b]] += u[a] * u[b];
                }
            }
        }
        let top = spectrum::eig(&s)
            .map(|r| r.eigenvalues.iter().map(|e| e.re).fold(0.0, f64::max))
            .unwrap_or_else(|_| s.diag().sum());
        worst = worst.max(top);
    }
    Ok(SvmObjective {
        points,
        mu,
        c,
        zeta: 2.0 + c * mu / 4.0 * worst,
    })
}

fn lift_node(node: usize, data: &Dataset) -> Result<Vec<([f64; 3], f64)>> {
    if data.is_empty() {
        return Err(ObjectiveError::InvalidDataset(format!(
            "node {node} has no points"
        )));
    }
    if data.dim() != 2 {
        return Err(ObjectiveError::InvalidDataset(format!(
            "SVM points must be planar, node {node} has dimension {}",
            data.dim()
        )));
    }
    data.features()
        .iter()
        .zip(data.labels())
        .enumerate()
        .map(|(row, (f, &l))| {
            if l != 1.0 && l != -1.0 {
                return Err(ObjectiveError::InvalidLabel { row, label: l });
            }
            Ok((kernel_lift([f[0], f[1]]), l))
        })
        .collect()
}

impl SvmObjective {
    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// Fraction of node points on the correct side of the hyperplane
    /// `ωᵀφ = ν`.
    pub fn accuracy(&self, x: &[f64]) -> f64 {
        let mut right = 0usize;
        let mut total = 0usize;
        for node in &self.points {
            for (phi, l) in node {
                let score = phi[0] * x[0] + phi[1] * x[1] + phi[2] * x[2] - x[3];
                right += usize::from(score * l > 0.0);
                total += 1;
            }
        }
        right as f64 / total as f64
    }

    fn margin(phi: &[f64; 3], l: f64, x: &[f64]) -> f64 {
        1.0 - l * (phi[0] * x[0] + phi[1] * x[1] + phi[2] * x[2] - x[3])
    }
}

impl Objective for SvmObjective {
    fn family(&self) -> &'static str {
        "svm"
    }

    fn nodes(&self) -> usize {
        self.points.len()
    }

    fn dim(&self) -> usize {
        4
    }

    fn value(&self, node: usize, x: &[f64]) -> f64 {
        let reg = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        let data: f64 = self.points[node]
            .iter()
            .map(|(phi, l)| softplus(self.mu * Self::margin(phi, *l, x)) / self.mu)
            .sum();
        reg + self.c * data
    }

    fn gradient(&self, node: usize, x: &[f64], out: &mut [f64]) {
        out[0] = 2.0 * x[0];
        out[1] = 2.0 * x[1];
        out[2] = 2.0 * x[2];
        out[3] = 0.0;
        for (phi, l) in &self.points[node] {
            let s = self.c * sigmoid(self.mu * Self::margin(phi, *l, x)) * l;
            out[0] -= s * phi[0];
            out[1] -= s * phi[1];
            out[2] -= s * phi[2];
            out[3] += s;
        }
    }

    fn hessian_apply(&self, node: usize, x: &[f64], v: &[f64], out: &mut [f64]) {
        out[0] = 2.0 * v[0];
        out[1] = 2.0 * v[1];
        out[2] = 2.0 * v[2];
        out[3] = 0.0;
        for (phi, l) in &self.points[node] {
            let s = sigmoid(self.mu * Self::margin(phi, *l, x));
            let w = self.c * self.mu * s * (1.0 - s);
            let u = [phi[0], phi[1], phi[2], -1.0];
            let uv = u[0] * v[0] + u[1] * v[1] + u[2] * v[2] + u[3] * v[3];
            for k in 0..4 {
                out[k] += w * uv * u[k];
            }
        }
    }

    fn zeta(&self) -> f64 {
        self.zeta
    }
}
