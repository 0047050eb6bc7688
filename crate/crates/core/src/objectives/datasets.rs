//! Labelled point sets, per-node partitions and seeded synthetic generators.

use std::io::{Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{ObjectiveError, Result};

/// Points in `ℝ^d` with one real label (class ±1 or regression target)
/// each.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    dim: usize,
    features: Vec<Vec<f64>>,
    labels: Vec<f64>,
}

impl Dataset {
    pub fn new(features: Vec<Vec<f64>>, labels: Vec<f64>) -> Result<Self> {
        if features.len() != labels.len() {
            return Err(ObjectiveError::InvalidDataset(format!(
                "{} feature rows but {} labels",
                features.len(),
                labels.len()
            )));
        }
        let dim = features.first().map_or(0, Vec::len);
        if let Some(k) = features.iter().position(|f| f.len() != dim) {
            return Err(ObjectiveError::InvalidDataset(format!(
                "row {k} has {} features, expected {dim}",
                features[k].len()
            )));
        }
        if features
            .iter()
            .flatten()
            .chain(&labels)
            .any(|v| !v.is_finite())
        {
            return Err(ObjectiveError::InvalidDataset("non-finite value".into()));
        }
        Ok(Dataset {
            dim,
            features,
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn features(&self) -> &[Vec<f64>] {
        &self.features
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    fn select(&self, idx: &[usize]) -> Dataset {
        Dataset {
            dim: self.dim,
            features: idx.iter().map(|&k| self.features[k].clone()).collect(),
            labels: idx.iter().map(|&k| self.labels[k]).collect(),
        }
    }

    /// Contiguous split into `n` blocks whose sizes differ by at most one.
    pub fn split_even(&self, n: usize) -> Result<PartitionedDataset> {
        if n == 0 || self.len() < n {
            return Err(ObjectiveError::InvalidDataset(format!(
                "cannot split {} points over {n} nodes",
                self.len()
            )));
        }
        let base = self.len() / n;
        let extra = self.len() % n;
        let mut start = 0;
        let mut nodes = Vec::with_capacity(n);
        for i in 0..n {
            let size = base + usize::from(i < extra);
            let idx: Vec<usize> = (start..start + size).collect();
            nodes.push(self.select(&idx));
            start += size;
        }
        Ok(PartitionedDataset { nodes })
    }

    /// Every node independently draws `round(fraction · len)` distinct
    /// points.
    pub fn random_subsets(&self, n: usize, fraction: f64, seed: u64) -> Result<PartitionedDataset> {
        if !(fraction > 0.0 && fraction <= 1.0) {
            return Err(ObjectiveError::InvalidParameter {
                name: "fraction",
                requirement: "in (0, 1]",
                value: fraction,
            });
        }
        let take = ((fraction * self.len() as f64).round() as usize).max(1);
        if n == 0 || self.is_empty() {
            return Err(ObjectiveError::InvalidDataset(
                "empty dataset or no nodes".into(),
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut order: Vec<usize> = (0..self.len()).collect();
        let nodes = (0..n)
            .map(|_| {
                order.shuffle(&mut rng);
                let mut idx = order[..take].to_vec();
                idx.sort_unstable();
                self.select(&idx)
            })
            .collect();
        Ok(PartitionedDataset { nodes })
    }

    /// CSV with header `x1,...,xd,label`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = (1..=self.dim).map(|k| format!("x{k}")).collect();
        header.push("label".into());
        w.write_record(&header)?;
        for (f, l) in self.features.iter().zip(&self.labels) {
            let mut row: Vec<String> = f.iter().map(|v| v.to_string()).collect();
            row.push(l.to_string());
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let header = r.headers()?.clone();
        let d = header
            .len()
            .checked_sub(1)
            .ok_or_else(|| ObjectiveError::InvalidDataset("empty CSV header".into()))?;
        for (k, name) in header.iter().enumerate() {
            let expected = if k == d {
                "label".to_string()
            } else {
                format!("x{}", k + 1)
            };
            if name.trim() != expected {
                return Err(ObjectiveError::InvalidDataset(format!(
                    "header column {} is {name:?}, expected {expected:?}",
                    k + 1
                )));
            }
        }
        let mut features = Vec::new();
        let mut labels = Vec::new();
        for (row, record) in r.records().enumerate() {
            let record = record?;
            let values: Vec<f64> = record
                .iter()
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| {
                    ObjectiveError::InvalidDataset(format!("data row {}: {e}", row + 1))
                })?;
            labels.push(values[d]);
            features.push(values[..d].to_vec());
        }
        Dataset::new(features, labels)
    }

    pub fn read_csv_file(path: &Path) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }

    pub fn write_csv_file(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

/// One dataset per node.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionedDataset {
    pub nodes: Vec<Dataset>,
}

impl PartitionedDataset {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Concatenation of all node datasets (with repetition when subsets
    /// overlap).
    pub fn pooled(&self) -> Dataset {
        let dim = self.nodes.first().map_or(0, Dataset::dim);
        Dataset {
            dim,
            features: self.nodes.iter().flat_map(|d| d.features.clone()).collect(),
            labels: self.nodes.iter().flat_map(|d| d.labels.clone()).collect(),
        }
    }
}

/// Seeded synthetic data sources.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case", deny_unknown_fields)]
pub enum Generator {
    /// Two concentric rings in the plane: label +1 on the inner ring, −1
    /// on the outer. Radii are jittered uniformly by at most `noise`.
    TwoRings {
        points: usize,
        inner_radius: f64,
        outer_radius: f64,
        noise: f64,
    },
    /// Points `(χ, slope·χ + intercept + noise·N(0,1))` with `χ` uniform on
    /// `[x_min, x_max]`.
    NoisyLine {
        points: usize,
        slope: f64,
        intercept: f64,
        noise: f64,
        x_min: f64,
        x_max: f64,
    },
    /// Two isotropic Gaussian classes in `ℝ^dim` whose means sit at
    /// `±separation/2` along the diagonal direction.
    GaussianBlobs {
        points: usize,
        dim: usize,
        separation: f64,
        spread: f64,
    },
}

impl Generator {
    pub fn generate(&self, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut features = Vec::new();
        let mut labels = Vec::new();
        match *self {
            Generator::TwoRings {
                points,
                inner_radius,
                outer_radius,
                noise,
            } => {
                for k in 0..points {
                    let inner = k % 2 == 0;
                    let base = if inner { inner_radius } else { outer_radius };
                    let r = base + noise * rng.random_range(-1.0..=1.0);
                    let theta = rng.random_range(0.0..std::f64::consts::TAU);
                    features.push(vec![r * theta.cos(), r * theta.sin()]);
                    labels.push(if inner { 1.0 } else { -1.0 });
                }
            }
            Generator::NoisyLine {
                points,
                slope,
                intercept,
                noise,
                x_min,
                x_max,
            } => {
                for _ in 0..points {
                    let chi = if x_max > x_min {
                        rng.random_range(x_min..x_max)
                    } else {
                        x_min
                    };
                    let eps: f64 = StandardNormal.sample(&mut rng);
                    features.push(vec![chi]);
                    labels.push(slope * chi + intercept + noise * eps);
                }
            }
            Generator::GaussianBlobs {
                points,
                dim,
                separation,
                spread,
            } => {
                let offset = 0.5 * separation / (dim.max(1) as f64).sqrt();
                for k in 0..points {
                    let label = if k % 2 == 0 { 1.0 } else { -1.0 };
                    let x: Vec<f64> = (0..dim)
                        .map(|_| {
                            let eps: f64 = StandardNormal.sample(&mut rng);
                            label * offset + spread * eps
                        })
                        .collect();
                    features.push(x);
                    labels.push(label);
                }
            }
        }
        Dataset::new(features, labels).expect("generators produce well-formed data")
    }
}
