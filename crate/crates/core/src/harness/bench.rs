//! Canned experiment recipes, each producing trajectory CSVs and one JSON
//! summary.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use super::config::{DatasetSpec, ExperimentConfig, NetworkSpec, ObjectiveSpec, Partition};
use super::experiment::{simulate, write_run, RunSummary};
use super::{create_dir, write_file, HarnessError};
use crate::nonlinearity::SectorMap;
use crate::objectives::Generator;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BenchId {
    /// Structured (exponential) against unstructured (random) networks
    /// under logarithmic quantisation, for two momentum values.
    Fig4,
    /// Momentum sweep at a small fixed tracking gain.
    Fig5,
    /// Linear regression over a switching random network with clipping.
    Fig7,
    /// Kernel SVM over a ring with fine logarithmic quantisation.
    Svm,
}

impl BenchId {
    pub const ALL: [BenchId; 4] = [BenchId::Fig4, BenchId::Fig5, BenchId::Fig7, BenchId::Svm];

    pub fn as_str(self) -> &'static str {
        match self {
            BenchId::Fig4 => "fig4",
            BenchId::Fig5 => "fig5",
            BenchId::Fig7 => "fig7",
            BenchId::Svm => "svm",
        }
    }

    /// Named configs making up the recipe.
    pub fn configs(self, seed: u64) -> Vec<(String, ExperimentConfig)> {
        match self {
            BenchId::Fig4 => fig4(seed),
            BenchId::Fig5 => fig5(seed),
            BenchId::Fig7 => vec![("linreg".into(), fig7(seed))],
            BenchId::Svm => vec![("svm".into(), svm(seed))],
        }
    }
}

impl fmt::Display for BenchId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BenchId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BenchId::ALL
            .into_iter()
            .find(|b| b.as_str() == s)
            .ok_or_else(|| format!("unknown bench `{s}`; expected one of fig4, fig5, fig7, svm"))
    }
}

pub const BENCH_NODES: usize = 16;

fn nonconvex_base(alpha: f64, beta: f64, seed: u64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(
        ObjectiveSpec::Nonconvex { terms: 5 },
        BENCH_NODES,
        alpha,
        beta,
    );
    cfg.nonlinearity = SectorMap::LogQuantizer { rho: 1.0 / 64.0 };
    cfg.network = NetworkSpec::Exponential { weight: 1.0 };
    cfg.seed = seed;
    cfg
}

/// Link probability giving a random network the exponential graph's
/// out-degree `log2 n`.
pub fn matched_er_probability(n: usize) -> f64 {
    (n as f64).log2() / (n as f64 - 1.0)
}

fn fig4(seed: u64) -> Vec<(String, ExperimentConfig)> {
    let mut out = Vec::new();
    for beta in [0.3, 0.6] {
        let mut structured = nonconvex_base(1.0, beta, seed);
        structured.step = 1e-3;
        structured.t_end = 10.0;
        let mut random = structured.clone();
        random.network = NetworkSpec::Er {
            p: matched_er_probability(BENCH_NODES),
            dwell: None,
        };
        out.push((format!("exponential_beta{beta}"), structured));
        out.push((format!("er_beta{beta}"), random));
    }
    out
}

fn fig5(seed: u64) -> Vec<(String, ExperimentConfig)> {
    [0.0, 0.2, 0.4, 0.6]
        .into_iter()
        .map(|beta| {
            let mut cfg = nonconvex_base(0.05, beta, seed);
            cfg.step = 1e-2;
            cfg.t_end = 40.0;
            cfg.record_interval = 100;
            (format!("beta{beta}"), cfg)
        })
        .collect()
}

fn fig7(seed: u64) -> ExperimentConfig {
    let dataset = DatasetSpec::Generated {
        model: Generator::NoisyLine {
            points: 60,
            slope: 1.5,
            intercept: -0.5,
            noise: 0.3,
            x_min: -1.0,
            x_max: 1.0,
        },
        partition: Partition::Even,
    };
    let mut cfg = ExperimentConfig::new(ObjectiveSpec::Linreg { dataset }, 15, 3.0, 0.4);
    cfg.network = NetworkSpec::Er {
        p: 0.4,
        dwell: Some(0.0015),
    };
    cfg.nonlinearity = SectorMap::Clip { rho: 10.0 };
    cfg.step = 1e-4;
    cfg.t_end = 20.0;
    cfg.record_interval = 100;
    cfg.seed = seed;
    cfg
}

fn svm(seed: u64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(
        ObjectiveSpec::Svm {
            mu: 3.0,
            c: 2.0,
            dataset: DatasetSpec::Generated {
                model: Generator::TwoRings {
                    points: 100,
                    inner_radius: 1.0,
                    outer_radius: 2.5,
                    noise: 0.25,
                },
                partition: Partition::RandomSubsets { fraction: 0.75 },
            },
        },
        6,
        6.0,
        0.5,
    );
    cfg.network = NetworkSpec::Cycle {
        weight: 0.5,
        undirected: true,
    };
    cfg.nonlinearity = SectorMap::LogQuantizer { rho: 1.0 / 128.0 };
    cfg.init_range = 1.0;
    cfg.step = 1e-4;
    cfg.t_end = 10.0;
    cfg.record_interval = 100;
    cfg.seed = seed;
    cfg
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchRun {
    pub name: String,
    pub trajectory: PathBuf,
    pub summary: RunSummary,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub bench: BenchId,
    pub seed: u64,
    pub runs: Vec<BenchRun>,
    #[serde(skip)]
    pub summary_path: PathBuf,
}

/// Runs every config of the recipe in parallel; writes
/// `<id>_<name>.csv`, `<id>_<name>.json` and `<id>_summary.json`.
pub fn run_bench(id: BenchId, seed: u64, out_dir: &Path) -> Result<BenchReport, HarnessError> {
    create_dir(out_dir)?;
    let runs = id
        .configs(seed)
        .into_par_iter()
        .map(|(name, cfg)| {
            let result = simulate(&cfg)?;
            let csv = out_dir.join(format!("{id}_{name}.csv"));
            let json = out_dir.join(format!("{id}_{name}.json"));
            write_run(&result, &csv, &json)?;
            Ok(BenchRun {
                name,
                trajectory: csv,
                summary: result.summary,
            })
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;
    let summary_path = out_dir.join(format!("{id}_summary.json"));
    let report = BenchReport {
        bench: id,
        seed,
        runs,
        summary_path: summary_path.clone(),
    };
    let text = serde_json::to_string_pretty(&report).expect("report serialises");
    write_file(&summary_path, text.as_bytes())?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_parse() {
        for id in BenchId::ALL {
            assert_eq!(id.as_str().parse::<BenchId>().unwrap(), id);
        }
        assert!("fig8".parse::<BenchId>().is_err());
    }

    #[test]
    fn recipes_are_valid_configs() {
        for id in BenchId::ALL {
            for (_, cfg) in id.configs(0) {
                cfg.validate().unwrap();
            }
        }
        assert_eq!(BenchId::Fig4.configs(0).len(), 4);
    }

    #[test]
    fn matched_degree() {
        assert!((matched_er_probability(16) * 15.0 - 4.0).abs() < 1e-12);
    }
}
