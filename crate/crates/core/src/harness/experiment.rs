//! Single runs: simulate a config and write its trajectory and summary.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::{create_dir, write_file, HarnessError, EXIT_CONVERGED, EXIT_DIVERGED};
use crate::dynamics::{
    equilibrium_check, run, Admissibility, DynamicsError, EquilibriumReport, Reference,
    StepMetrics, Trajectory,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunVerdict {
    /// Final optimality gap at or below the threshold.
    Converged,
    NotConverged,
    Diverged,
}

impl RunVerdict {
    pub fn exit_code(self) -> i32 {
        match self {
            RunVerdict::Converged => EXIT_CONVERGED,
            _ => EXIT_DIVERGED,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub verdict: RunVerdict,
    pub family: String,
    pub nodes: usize,
    pub dim: usize,
    pub alpha: f64,
    pub beta: f64,
    pub step: f64,
    /// Step actually used; differs from `step` after automatic halving.
    pub step_used: f64,
    pub step_halved: bool,
    pub t_end: f64,
    pub nonlinearity: String,
    pub z_nonlinearity: String,
    pub network: String,
    pub dwell: Option<f64>,
    pub seed: u64,
    pub zeta: f64,
    pub admissibility: Option<Admissibility>,
    pub divergence: Option<String>,
    pub threshold: f64,
    pub steps_to_threshold: Option<u64>,
    pub final_metrics: Option<StepMetrics>,
    pub final_mean: Vec<f64>,
    /// `max_i ‖x_i − x*‖` at the final state.
    pub max_node_error: f64,
    pub reference: Reference,
    pub max_gt_error: f64,
    pub equilibrium: EquilibriumReport,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub summary: RunSummary,
    pub trajectory: Trajectory,
}

/// Runs the config without touching the file system.
pub fn simulate(cfg: &ExperimentConfig) -> Result<RunResult, HarnessError> {
    let exp = cfg.build()?;
    let obj = exp.objective.as_ref();
    let (trajectory, divergence) =
        match run(&exp.schedule, obj, &exp.params, &exp.x0, &exp.recorder) {
            Ok(t) => (t, None),
            Err(DynamicsError::Diverged(d)) => {
                let reason = format!("step {} (t = {}): {}", d.step, d.t, d.reason);
                (d.trajectory, Some(reason))
            }
            Err(e) => return Err(e.into()),
        };
    let state = &trajectory.final_state;
    let final_metrics = trajectory.last_metrics().cloned();
    let scale = exp.reference.f_star.abs().max(1.0);
    let verdict = match (&divergence, &final_metrics) {
        (Some(_), _) => RunVerdict::Diverged,
        (None, Some(m))
            if m.optimality_gap
                .is_some_and(|g| g.abs() <= cfg.threshold * scale) =>
        {
            RunVerdict::Converged
        }
        _ => RunVerdict::NotConverged,
    };
    let max_node_error = state
        .x
        .outer_iter()
        .map(|row| {
            row.iter()
                .zip(&exp.reference.x_star)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
        })
        .fold(0.0, f64::max);
    let summary = RunSummary {
        verdict,
        family: obj.family().to_string(),
        nodes: obj.nodes(),
        dim: obj.dim(),
        alpha: cfg.alpha,
        beta: cfg.beta,
        step: cfg.step,
        step_used: trajectory.step_size,
        step_halved: trajectory.step_halved,
        t_end: cfg.t_end,
        nonlinearity: exp.params.x_map.describe(),
        z_nonlinearity: exp.params.z_map.describe(),
        network: exp.schedule.at(0.0).label().to_string(),
        dwell: Some(exp.schedule.dwell()).filter(|d| d.is_finite()),
        seed: cfg.seed,
        zeta: obj.zeta(),
        admissibility: trajectory.admissibility,
        divergence,
        threshold: cfg.threshold,
        steps_to_threshold: trajectory.steps_to_threshold,
        final_metrics,
        final_mean: state.mean(),
        max_node_error,
        reference: exp.reference.clone(),
        max_gt_error: trajectory.max_gt_error,
        equilibrium: equilibrium_check(state, obj, cfg.threshold),
    };
    Ok(RunResult {
        summary,
        trajectory,
    })
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub summary: RunSummary,
    pub trajectory_path: PathBuf,
    pub summary_path: PathBuf,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        self.summary.verdict.exit_code()
    }
}

/// Simulates the config and writes the trajectory CSV and JSON summary
/// into `out_dir` (partial outputs on divergence).
pub fn run_experiment(cfg: &ExperimentConfig, out_dir: &Path) -> Result<RunOutcome, HarnessError> {
    let result = simulate(cfg)?;
    create_dir(out_dir)?;
    let trajectory_path = out_dir.join(&cfg.output.trajectory);
    let summary_path = out_dir.join(&cfg.output.summary);
    write_run(&result, &trajectory_path, &summary_path)?;
    Ok(RunOutcome {
        summary: result.summary,
        trajectory_path,
        summary_path,
    })
}

pub(crate) fn write_run(result: &RunResult, csv: &Path, json: &Path) -> Result<(), HarnessError> {
    let mut buf = Vec::new();
    result
        .trajectory
        .write_csv(&mut buf)
        .expect("writing to memory");
    write_file(csv, &buf)?;
    let text = serde_json::to_string_pretty(&result.summary).expect("summary serialises");
    write_file(json, text.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::{NetworkSpec, ObjectiveSpec};
    use crate::nonlinearity::SectorMap;

    fn small() -> ExperimentConfig {
        let mut cfg = ExperimentConfig::new(ObjectiveSpec::Nonconvex { terms: 3 }, 6, 0.5, 0.3);
        cfg.t_end = 15.0;
        cfg.step = 2e-3;
        cfg.network = NetworkSpec::Cycle {
            weight: 1.0,
            undirected: true,
        };
        cfg
    }

    #[test]
    fn converging_run_writes_outputs() {
        let dir = tempfile::tempdir().unwrap();
        let out = run_experiment(&small(), dir.path()).unwrap();
        assert_eq!(
            out.summary.verdict,
            RunVerdict::Converged,
            "{:?}",
            out.summary
        );
        assert_eq!(out.exit_code(), 0);
        let csv = std::fs::read_to_string(&out.trajectory_path).unwrap();
        assert!(csv.starts_with("t,cost,consensus_residual,gt_residual,lyapunov,optimality_gap\n"));
        let json: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&out.summary_path).unwrap()).unwrap();
        assert_eq!(json["verdict"], "converged");
        assert_eq!(json["alpha"], 0.5);
    }

    #[test]
    fn identical_configs_give_identical_bytes() {
        let mut cfg = small();
        cfg.nonlinearity = SectorMap::LogQuantizer { rho: 1.0 / 64.0 };
        cfg.seed = 17;
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let oa = run_experiment(&cfg, a.path()).unwrap();
        let ob = run_experiment(&cfg, b.path()).unwrap();
        assert_eq!(
            std::fs::read(oa.trajectory_path).unwrap(),
            std::fs::read(ob.trajectory_path).unwrap()
        );
    }

    #[test]
    fn divergence_gives_partial_outputs_and_nonzero_status() {
        let mut cfg = small();
        cfg.alpha = 400.0;
        cfg.step = 0.05;
        let dir = tempfile::tempdir().unwrap();
        let out = run_experiment(&cfg, dir.path()).unwrap();
        assert_eq!(out.summary.verdict, RunVerdict::Diverged);
        assert_eq!(out.exit_code(), 1);
        assert!(out.summary.divergence.is_some());
        let csv = std::fs::read_to_string(&out.trajectory_path).unwrap();
        assert!(csv.lines().count() >= 2);
    }
}
