//! JSON experiment configuration: schema, defaults, validation and
//! construction of the runtime pieces.
//!
//! Minimal document:
//!
//! ```json
//! {"objective": "nonconvex", "n": 10, "alpha": 1, "beta": 0.6}
//! ```
//!
//! Relative file paths are resolved against the directory holding the
//! config file.

use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde::{Deserialize, Deserializer, Serialize};

use super::mnist::load_mnist_idx;
use super::HarnessError;
use crate::dynamics::{HbgtParams, Recorder, Reference, SimState};
use crate::graph::{
    build_cycle, build_er_balanced, build_exponential, splitmix64, Network, SwitchingSchedule,
    Topology,
};
use crate::nonlinearity::SectorMap;
use crate::objectives::{
    linreg_objective, logreg_objective, nonconvex_bench, reference_minimizer, svm_objective,
    Dataset, Generator, Objective, PartitionedDataset, SVM_DEFAULT_C, SVM_DEFAULT_MU,
};

pub const DEFAULT_STEP: f64 = 1e-3;
pub const DEFAULT_T_END: f64 = 20.0;
pub const DEFAULT_THRESHOLD: f64 = 1e-3;
/// Upper bound on `t_end / step`.
pub const MAX_STEPS: f64 = 5e7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(deserialize_with = "name_or_spec")]
    pub objective: ObjectiveSpec,
    /// Number of nodes.
    pub n: usize,
    pub alpha: f64,
    pub beta: f64,
    #[serde(default = "default_step")]
    pub step: f64,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default)]
    pub nonlinearity: SectorMap,
    /// Map on the tracker channel; defaults to `nonlinearity`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z_nonlinearity: Option<SectorMap>,
    #[serde(default)]
    pub network: NetworkSpec,
    #[serde(default)]
    pub seed: u64,
    /// Initial states are drawn uniformly from `[−init_range, init_range]`.
    #[serde(default = "default_init_range")]
    pub init_range: f64,
    #[serde(default = "default_interval")]
    pub record_interval: u64,
    /// Optimality-gap level for steps-to-threshold and the verdict.
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default)]
    pub output: OutputSpec,
}

fn default_step() -> f64 {
    DEFAULT_STEP
}
fn default_t_end() -> f64 {
    DEFAULT_T_END
}
fn default_init_range() -> f64 {
    5.0
}
fn default_interval() -> u64 {
    10
}
fn default_threshold() -> f64 {
    DEFAULT_THRESHOLD
}

// Accept `"svm"` as shorthand for `{"family": "svm"}`.
fn name_or_spec<'de, D: Deserializer<'de>>(d: D) -> Result<ObjectiveSpec, D::Error> {
    let value = serde_json::Value::deserialize(d)?;
    let value = match value {
        serde_json::Value::String(family) => serde_json::json!({ "family": family }),
        other => other,
    };
    ObjectiveSpec::deserialize(value).map_err(serde::de::Error::custom)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum ObjectiveSpec {
    Nonconvex {
        #[serde(default = "default_terms")]
        terms: usize,
    },
    Svm {
        #[serde(default = "default_mu")]
        mu: f64,
        #[serde(default = "default_c")]
        c: f64,
        #[serde(default = "default_svm_data")]
        dataset: DatasetSpec,
    },
    Linreg {
        #[serde(default = "default_linreg_data")]
        dataset: DatasetSpec,
    },
    Logreg {
        #[serde(default = "default_theta")]
        theta: f64,
        #[serde(default = "default_logreg_data")]
        dataset: DatasetSpec,
    },
}

fn default_terms() -> usize {
    5
}
fn default_mu() -> f64 {
    SVM_DEFAULT_MU
}
fn default_c() -> f64 {
    SVM_DEFAULT_C
}
fn default_theta() -> f64 {
    1e-2
}

fn default_svm_data() -> DatasetSpec {
    DatasetSpec::Generated {
        model: Generator::TwoRings {
            points: 100,
            inner_radius: 1.0,
            outer_radius: 2.5,
            noise: 0.25,
        },
        partition: Partition::RandomSubsets { fraction: 0.75 },
    }
}

fn default_linreg_data() -> DatasetSpec {
    DatasetSpec::Generated {
        model: Generator::NoisyLine {
            points: 60,
            slope: 1.5,
            intercept: -0.5,
            noise: 0.3,
            x_min: -1.0,
            x_max: 1.0,
        },
        partition: Partition::Even,
    }
}

fn default_logreg_data() -> DatasetSpec {
    DatasetSpec::Generated {
        model: Generator::GaussianBlobs {
            points: 320,
            dim: 10,
            separation: 2.0,
            spread: 1.0,
        },
        partition: Partition::Even,
    }
}

impl ObjectiveSpec {
    pub fn family(&self) -> &'static str {
        match self {
            ObjectiveSpec::Nonconvex { .. } => "nonconvex",
            ObjectiveSpec::Svm { .. } => "svm",
            ObjectiveSpec::Linreg { .. } => "linreg",
            ObjectiveSpec::Logreg { .. } => "logreg",
        }
    }

    fn dataset(&self) -> Option<&DatasetSpec> {
        match self {
            ObjectiveSpec::Nonconvex { .. } => None,
            ObjectiveSpec::Svm { dataset, .. }
            | ObjectiveSpec::Linreg { dataset }
            | ObjectiveSpec::Logreg { dataset, .. } => Some(dataset),
        }
    }

    fn dataset_mut(&mut self) -> Option<&mut DatasetSpec> {
        match self {
            ObjectiveSpec::Nonconvex { .. } => None,
            ObjectiveSpec::Svm { dataset, .. }
            | ObjectiveSpec::Linreg { dataset }
            | ObjectiveSpec::Logreg { dataset, .. } => Some(dataset),
        }
    }

    /// Builds the objective over `n` nodes.
    pub fn build(&self, n: usize, seed: u64) -> Result<Box<dyn Objective>, HarnessError> {
        let obj: Box<dyn Objective> = match self {
            ObjectiveSpec::Nonconvex { terms } => Box::new(nonconvex_bench(n, *terms, seed)?),
            ObjectiveSpec::Svm { mu, c, dataset } => {
                Box::new(svm_objective(&dataset.load(n, seed)?, *mu, *c)?)
            }
            ObjectiveSpec::Linreg { dataset } => {
                Box::new(linreg_objective(&dataset.load(n, seed)?)?)
            }
            ObjectiveSpec::Logreg { theta, dataset } => {
                Box::new(logreg_objective(&dataset.load(n, seed)?, *theta)?)
            }
        };
        Ok(obj)
    }
}

/// Where node data comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetSpec {
    Generated {
        model: Generator,
        #[serde(default)]
        partition: Partition,
    },
    /// CSV with header `x1,...,xd,label`.
    Csv {
        path: PathBuf,
        #[serde(default)]
        partition: Partition,
    },
    /// Two-class subsample of an IDX image/label pair.
    Mnist {
        images: PathBuf,
        labels: PathBuf,
        #[serde(default)]
        class_a: u8,
        #[serde(default = "default_class_b")]
        class_b: u8,
        count: usize,
        #[serde(default)]
        partition: Partition,
    },
}

fn default_class_b() -> u8 {
    1
}

/// How pooled data is distributed over nodes.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "snake_case", deny_unknown_fields)]
pub enum Partition {
    /// Contiguous blocks of (almost) equal size.
    #[default]
    Even,
    /// Each node independently draws this fraction of the points.
    RandomSubsets { fraction: f64 },
}

impl DatasetSpec {
    fn partition(&self) -> Partition {
        match self {
            DatasetSpec::Generated { partition, .. }
            | DatasetSpec::Csv { partition, .. }
            | DatasetSpec::Mnist { partition, .. } => *partition,
        }
    }

    fn files(&self) -> Vec<&Path> {
        match self {
            DatasetSpec::Generated { .. } => Vec::new(),
            DatasetSpec::Csv { path, .. } => vec![path],
            DatasetSpec::Mnist { images, labels, .. } => vec![images, labels],
        }
    }

    fn files_mut(&mut self) -> Vec<&mut PathBuf> {
        match self {
            DatasetSpec::Generated { .. } => Vec::new(),
            DatasetSpec::Csv { path, .. } => vec![path],
            DatasetSpec::Mnist { images, labels, .. } => vec![images, labels],
        }
    }

    /// Pooled points before partitioning.
    pub fn pooled(&self, seed: u64) -> Result<Dataset, HarnessError> {
        Ok(match self {
            DatasetSpec::Generated { model, .. } => model.generate(seed),
            DatasetSpec::Csv { path, .. } => Dataset::read_csv_file(path)?,
            DatasetSpec::Mnist {
                images,
                labels,
                class_a,
                class_b,
                count,
                ..
            } => load_mnist_idx(images, labels, *class_a, *class_b, *count, seed)?,
        })
    }

    pub fn load(&self, n: usize, seed: u64) -> Result<PartitionedDataset, HarnessError> {
        let pooled = self.pooled(seed)?;
        Ok(match self.partition() {
            Partition::Even => pooled.split_even(n)?,
            Partition::RandomSubsets { fraction } => {
                pooled.random_subsets(n, fraction, splitmix64(seed ^ 0x5eed))?
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NetworkSpec {
    Cycle {
        #[serde(default = "default_cycle_weight")]
        weight: f64,
        #[serde(default = "default_true")]
        undirected: bool,
    },
    /// Node `i` links to `i + 2^k` for every power of two below `n`.
    Exponential {
        #[serde(default = "default_unit")]
        weight: f64,
    },
    /// Random weight-balanced digraph; redrawn every `dwell` seconds when
    /// given, fixed otherwise.
    Er {
        p: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dwell: Option<f64>,
    },
    /// Plain-text weight matrix.
    File { path: PathBuf },
}

fn default_cycle_weight() -> f64 {
    0.5
}
fn default_unit() -> f64 {
    1.0
}
fn default_true() -> bool {
    true
}

impl Default for NetworkSpec {
    fn default() -> Self {
        NetworkSpec::Cycle {
            weight: default_cycle_weight(),
            undirected: true,
        }
    }
}

impl NetworkSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            NetworkSpec::Cycle { .. } => "cycle",
            NetworkSpec::Exponential { .. } => "exponential",
            NetworkSpec::Er { .. } => "er",
            NetworkSpec::File { .. } => "file",
        }
    }

    pub fn schedule(&self, n: usize, seed: u64) -> Result<SwitchingSchedule, HarnessError> {
        let fixed = |net: Network| Ok(SwitchingSchedule::fixed(net));
        match self {
            NetworkSpec::Cycle { weight, undirected } => {
                fixed(build_cycle(n, *weight, *undirected)?)
            }
            NetworkSpec::Exponential { weight } => fixed(build_exponential(n, *weight)?),
            NetworkSpec::Er { p, dwell: None } => fixed(build_er_balanced(n, *p, seed)?),
            NetworkSpec::Er { p, dwell: Some(d) } => Ok(SwitchingSchedule::new(
                *d,
                Topology::RandomEr { n, p: *p },
                seed,
            )?),
            NetworkSpec::File { path } => {
                let net = Network::read_text_file(path)?;
                if net.n() != n {
                    return Err(HarnessError::config(
                        "network.path",
                        format!("file describes {} nodes but n = {n}", net.n()),
                    ));
                }
                fixed(net)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_trajectory")]
    pub trajectory: String,
    #[serde(default = "default_summary")]
    pub summary: String,
}

fn default_trajectory() -> String {
    "trajectory.csv".into()
}
fn default_summary() -> String {
    "summary.json".into()
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec {
            trajectory: default_trajectory(),
            summary: default_summary(),
        }
    }
}

// Independent seed streams derived from the config seed.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Stream {
    Objective = 1,
    Network = 2,
    Init = 3,
}

pub(crate) fn stream_seed(seed: u64, stream: Stream) -> u64 {
    splitmix64(seed ^ splitmix64(stream as u64))
}

/// Everything a run needs, built from a config.
pub struct Experiment {
    pub objective: Box<dyn Objective>,
    pub schedule: SwitchingSchedule,
    pub params: HbgtParams,
    pub x0: Array2<f64>,
    pub reference: Reference,
    pub recorder: Recorder,
}

impl ExperimentConfig {
    /// Config with all optional fields at their defaults.
    pub fn new(objective: ObjectiveSpec, n: usize, alpha: f64, beta: f64) -> Self {
        ExperimentConfig {
            objective,
            n,
            alpha,
            beta,
            step: DEFAULT_STEP,
            t_end: DEFAULT_T_END,
            nonlinearity: SectorMap::Identity,
            z_nonlinearity: None,
            network: NetworkSpec::default(),
            seed: 0,
            init_range: default_init_range(),
            record_interval: default_interval(),
            threshold: DEFAULT_THRESHOLD,
            output: OutputSpec::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let cfg: Self = parse_json(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn params(&self) -> Result<HbgtParams, HarnessError> {
        let p = HbgtParams::new(
            self.alpha,
            self.beta,
            self.step,
            self.t_end,
            self.nonlinearity,
        )?;
        Ok(match self.z_nonlinearity {
            Some(z) => p.with_z_map(z),
            None => p,
        })
    }

    /// Range checks; each failure names the offending field.
    pub fn validate(&self) -> Result<(), HarnessError> {
        let err = |field: &str, reason: String| Err(HarnessError::config(field, reason));
        if self.n < 2 {
            return err("n", format!("need at least 2 nodes, got {}", self.n));
        }
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return err(
                "alpha",
                format!("must be finite and non-negative, got {}", self.alpha),
            );
        }
        if !(0.0..1.0).contains(&self.beta) {
            return err(
                "beta",
                format!("must satisfy 0 <= beta < 1, got {}", self.beta),
            );
        }
        if !(self.step.is_finite() && self.step > 0.0) {
            return err("step", format!("must be positive, got {}", self.step));
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return err("t_end", format!("must be positive, got {}", self.t_end));
        }
        if self.t_end / self.step > MAX_STEPS {
            return err("t_end", format!("more than {MAX_STEPS:e} steps requested"));
        }
        if let Err(e) = self.nonlinearity.validate() {
            return err("nonlinearity.rho", e.to_string());
        }
        if let Some(Err(e)) = self.z_nonlinearity.map(|z| z.validate()) {
            return err("z_nonlinearity.rho", e.to_string());
        }
        if !(self.init_range.is_finite() && self.init_range >= 0.0) {
            return err(
                "init_range",
                format!("must be non-negative, got {}", self.init_range),
            );
        }
        if self.record_interval == 0 {
            return err("record_interval", "must be at least 1".into());
        }
        if !(self.threshold > 0.0) {
            return err(
                "threshold",
                format!("must be positive, got {}", self.threshold),
            );
        }
        match &self.network {
            NetworkSpec::Cycle { weight, .. } | NetworkSpec::Exponential { weight }
                if !(weight.is_finite() && *weight > 0.0) =>
            {
                return err("network.weight", format!("must be positive, got {weight}"));
            }
            NetworkSpec::Er { p, .. } if !(*p > 0.0 && *p <= 1.0) => {
                return err("network.p", format!("must lie in (0, 1], got {p}"));
            }
            NetworkSpec::Er { dwell: Some(d), .. } if !(d.is_finite() && *d > 0.0) => {
                return err("network.dwell", format!("must be positive, got {d}"));
            }
            NetworkSpec::File { path } if !path.is_file() => {
                return Err(HarnessError::missing_file(path));
            }
            _ => {}
        }
        match &self.objective {
            ObjectiveSpec::Nonconvex { terms: 0 } => {
                return err("objective.terms", "must be at least 1".into());
            }
            ObjectiveSpec::Svm { mu, c, .. } => {
                if !(*mu > 0.0) {
                    return err("objective.mu", format!("must be positive, got {mu}"));
                }
                if !(*c >= 0.0) {
                    return err("objective.c", format!("must be non-negative, got {c}"));
                }
            }
            ObjectiveSpec::Logreg { theta, .. } if !(*theta > 0.0) => {
                return err("objective.theta", format!("must be positive, got {theta}"));
            }
            _ => {}
        }
        if let Some(data) = self.objective.dataset() {
            if let Partition::RandomSubsets { fraction } = data.partition() {
                if !(fraction > 0.0 && fraction <= 1.0) {
                    return err(
                        "objective.dataset.partition.fraction",
                        format!("must lie in (0, 1], got {fraction}"),
                    );
                }
            }
            for path in data.files() {
                if !path.is_file() {
                    return Err(HarnessError::missing_file(path));
                }
            }
        }
        Ok(())
    }

    /// Rewrites relative paths against `base`.
    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let NetworkSpec::File { path } = &mut self.network {
            fix(path);
        }
        if let Some(data) = self.objective.dataset_mut() {
            data.files_mut().into_iter().for_each(fix);
        }
    }

    /// Builds the objective, schedule, parameters, initial state and the
    /// reference optimum.
    pub fn build(&self) -> Result<Experiment, HarnessError> {
        self.validate()?;
        let objective = self
            .objective
            .build(self.n, stream_seed(self.seed, Stream::Objective))?;
        let schedule = self
            .network
            .schedule(self.n, stream_seed(self.seed, Stream::Network))?;
        let params = self.params()?;
        let x0 = SimState::random(
            self.n,
            objective.dim(),
            self.init_range,
            stream_seed(self.seed, Stream::Init),
        )
        .x;
        let x_star = objective.known_minimizer().unwrap_or_else(|| {
            reference_minimizer(objective.as_ref(), &vec![0.0; objective.dim()], 1e-10)
        });
        let reference = Reference::from_minimizer(objective.as_ref(), x_star);
        let recorder = Recorder {
            interval: self.record_interval,
            reference: Some(reference.clone()),
            threshold: Some(self.threshold),
            snapshot_interval: None,
        };
        Ok(Experiment {
            objective,
            schedule,
            params,
            x0,
            reference,
            recorder,
        })
    }
}

/// Reads, resolves and validates a config file.
pub fn load_config(path: &Path) -> Result<ExperimentConfig, HarnessError> {
    let mut cfg: ExperimentConfig = parse_json(&read_text(path)?)?;
    if let Some(dir) = path.parent() {
        cfg.resolve_paths(dir);
    }
    cfg.validate()?;
    Ok(cfg)
}

pub(crate) fn read_text(path: &Path) -> Result<String, HarnessError> {
    std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Deserialises JSON, reporting the path of the offending field.
pub(crate) fn parse_json<T: serde::de::DeserializeOwned>(text: &str) -> Result<T, HarnessError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let field = match e.path().to_string() {
            p if p == "." => "(root)".to_string(),
            p => p,
        };
        HarnessError::config(field, e.into_inner().to_string())
    })
}

/// Objective part of a config, as used by the gradient checker; other
/// keys are ignored.
#[derive(Debug, Clone, Deserialize)]
pub struct ObjectiveConfig {
    #[serde(deserialize_with = "name_or_spec")]
    pub objective: ObjectiveSpec,
    pub n: usize,
    #[serde(default)]
    pub seed: u64,
}

impl ObjectiveConfig {
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let mut cfg: ObjectiveConfig = parse_json(&read_text(path)?)?;
        if let (Some(dir), Some(data)) = (path.parent(), cfg.objective.dataset_mut()) {
            for p in data.files_mut() {
                if p.is_relative() {
                    *p = dir.join(&*p);
                }
            }
        }
        Ok(cfg)
    }

    pub fn build(&self) -> Result<Box<dyn Objective>, HarnessError> {
        if self.n < 2 {
            return Err(HarnessError::config(
                "n",
                format!("need at least 2 nodes, got {}", self.n),
            ));
        }
        self.objective
            .build(self.n, stream_seed(self.seed, Stream::Objective))
    }
}
