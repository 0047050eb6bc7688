//! Regularised logistic regression: state `x = [b; c]` with `b ∈ ℝ^d`,
//! node cost `f_i = (1/m_i) Σ_j log(1 + exp(−(bᵀX_j + c) Y_j)) + (θ/2)‖b‖²`.

use super::{sigmoid, softplus, Objective, ObjectiveError, PartitionedDataset, Result};

#[derive(Debug, Clone)]
pub struct LogRegObjective {
    // per node: row-major samples (d values each) and labels
    samples: Vec<Vec<f64>>,
    labels: Vec<Vec<f64>>,
    features: usize,
    theta: f64,
    zeta: f64,
}

pub fn logreg_objective(data: &PartitionedDataset, theta: f64) -> Result<LogRegObjective> {
    if !(theta.is_finite() && theta > 0.0) {
        return Err(ObjectiveError::InvalidParameter {
            name: "theta",
            requirement: "positive",
            value: theta,
        });
    }
    let d = data
        .nodes
        .first()
        .map(|n| n.dim())
        .ok_or_else(|| ObjectiveError::InvalidDataset("no nodes".into()))?;
    if d == 0 {
        return Err(ObjectiveError::InvalidDataset(
            "samples need at least one feature".into(),
        ));
    }
    let mut samples = Vec::new();
    let mut labels = Vec::new();
    let mut max_sq = 0.0f64;
    for (i, node) in data.nodes.iter().enumerate() {
        if node.is_empty() {
            return Err(ObjectiveError::InvalidDataset(format!(
                "node {i} has no samples"
            )));
        }
        if node.dim() != d {
            return Err(ObjectiveError::InvalidDataset(format!(
                "node {i} has dimension {}, expected {d}",
                node.dim()
            )));
        }
        for (row, &l) in node.labels().iter().enumerate() {
            if l != 1.0 && l != -1.0 {
                return Err(ObjectiveError::InvalidLabel { row, label: l });
            }
        }
        let flat: Vec<f64> = node.features().iter().flatten().copied().collect();
        for f in node.features() {
            max_sq = max_sq.max(1.0 + f.iter().map(|v| v * v).sum::<f64>());
        }
        samples.push(flat);
        labels.push(node.labels().to_vec());
    }
    Ok(LogRegObjective {
        samples,
        labels,
        features: d,
        theta,
        zeta: 0.25 * max_sq + theta,
    })
}

impl LogRegObjective {
    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn samples_per_node(&self) -> Vec<usize> {
        self.labels.iter().map(Vec::len).collect()
    }

    fn score(&self, row: &[f64], x: &[f64]) -> f64 {
        row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + x[self.features]
    }

    /// Fraction of samples classified correctly by `sign(bᵀX + c)`.
    pub fn accuracy(&self, x: &[f64]) -> f64 {
        let d = self.features;
        let mut right = 0usize;
        let mut total = 0usize;
        for (flat, labels) in self.samples.iter().zip(&self.labels) {
            for (row, &y) in flat.chunks(d.max(1)).zip(labels) {
                right += usize::from(self.score(row, x) * y > 0.0);
                total += 1;
            }
        }
        right as f64 / total as f64
    }
}

impl Objective for LogRegObjective {
    fn family(&self) -> &'static str {
        "logreg"
    }

    fn nodes(&self) -> usize {
        self.labels.len()
    }

    fn dim(&self) -> usize {
        self.features + 1
    }

    fn value(&self, node: usize, x: &[f64]) -> f64 {
        let d = self.features;
        let labels = &self.labels[node];
        let loss: f64 = self.samples[node]
            .chunks(d.max(1))
            .zip(labels)
            .map(|(row, &y)| softplus(-self.score(row, x) * y))
            .sum();
        let reg: f64 = x[..d].iter().map(|v| v * v).sum();
        loss / labels.len() as f64 + 0.5 * self.theta * reg
    }

    fn gradient(&self, node: usize, x: &[f64], out: &mut [f64]) {
        let d = self.features;
        let labels = &self.labels[node];
        let scale = 1.0 / labels.len() as f64;
        out.fill(0.0);
        for (row, &y) in self.samples[node].chunks(d.max(1)).zip(labels) {
            let w = -y * sigmoid(-self.score(row, x) * y) * scale;
            for k in 0..d {
                out[k] += w * row[k];
            }
            out[d] += w;
        }
        for k in 0..d {
            out[k] += self.theta * x[k];
        }
    }

    fn hessian_apply(&self, node: usize, x: &[f64], v: &[f64], out: &mut [f64]) {
        let d = self.features;
        let labels = &self.labels[node];
        let scale = 1.0 / labels.len() as f64;
        out.fill(0.0);
        for (row, &y) in self.samples[node].chunks(d.max(1)).zip(labels) {
            let s = sigmoid(-self.score(row, x) * y);
            let uv = row.iter().zip(v).map(|(a, b)| a * b).sum::<f64>() + v[d];
            let w = s * (1.0 - s) * uv * scale;
            for k in 0..d {
                out[k] += w * row[k];
            }
            out[d] += w;
        }
        for k in 0..d {
            out[k] += self.theta * v[k];
        }
    }

    fn zeta(&self) -> f64 {
        self.zeta
    }
}
