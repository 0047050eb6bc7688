//! Grid sweeps over a base config, one independent run per cell.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{parse_json, read_text, ExperimentConfig, NetworkSpec};
use super::experiment::{simulate, write_run, RunVerdict};
use super::{create_dir, write_file, HarnessError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub base: ExperimentConfig,
    pub grid: SweepGrid,
    #[serde(default = "default_table")]
    pub output: String,
    /// Also write each cell's trajectory and summary.
    #[serde(default)]
    pub write_cells: bool,
}

fn default_table() -> String {
    "sweep.csv".into()
}

/// Axes to vary; absent axes keep the base value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepGrid {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<Vec<f64>>,
    /// Level of the base nonlinearity (which must not be the identity).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub network: Option<Vec<NetworkSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<Vec<u64>>,
}

/// One line of the sweep table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub cell: usize,
    pub n: usize,
    pub seed: u64,
    pub network: String,
    pub nonlinearity: String,
    pub rho: Option<f64>,
    pub alpha: f64,
    pub beta: f64,
    pub alpha_bound: Option<f64>,
    pub admissible: Option<bool>,
    pub steps_to_threshold: Option<u64>,
    pub final_gap: Option<f64>,
    pub final_consensus: Option<f64>,
    /// Empty when the cell could not be built.
    pub verdict: Option<RunVerdict>,
    pub error: Option<String>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), HarnessError> {
        let g = &self.grid;
        let lens = [
            ("grid.alpha", g.alpha.as_ref().map(Vec::len)),
            ("grid.beta", g.beta.as_ref().map(Vec::len)),
            ("grid.rho", g.rho.as_ref().map(Vec::len)),
            ("grid.network", g.network.as_ref().map(Vec::len)),
            ("grid.n", g.n.as_ref().map(Vec::len)),
            ("grid.seed", g.seed.as_ref().map(Vec::len)),
        ];
        if lens.iter().all(|(_, l)| l.is_none()) {
            return Err(HarnessError::config("grid", "no axis given"));
        }
        if let Some((field, _)) = lens.iter().find(|(_, l)| *l == Some(0)) {
            return Err(HarnessError::config(*field, "axis has no values"));
        }
        if g.rho.is_some() && self.base.nonlinearity.is_identity() {
            return Err(HarnessError::config(
                "grid.rho",
                "varying the level needs a non-identity base nonlinearity",
            ));
        }
        self.base.validate()
    }

    /// Cartesian product of the axes, in row-major order with `alpha`
    /// varying slowest and `seed` fastest.
    pub fn cells(&self) -> Vec<ExperimentConfig> {
        let g = &self.grid;
        let mut cells = vec![self.base.clone()];
        fn expand<T: Clone>(
            cells: Vec<ExperimentConfig>,
            axis: &Option<Vec<T>>,
            set: impl Fn(&mut ExperimentConfig, T),
        ) -> Vec<ExperimentConfig> {
            let Some(values) = axis else { return cells };
            let mut out = Vec::with_capacity(cells.len() * values.len());
            for c in cells {
                for v in values {
                    let mut c = c.clone();
                    set(&mut c, v.clone());
                    out.push(c);
                }
            }
            out
        }
        cells = expand(cells, &g.alpha, |c, v| c.alpha = v);
        cells = expand(cells, &g.beta, |c, v| c.beta = v);
        cells = expand(cells, &g.rho, |c, v| {
            c.nonlinearity = c.nonlinearity.with_rho(v);
            c.z_nonlinearity = c.z_nonlinearity.map(|z| z.with_rho(v));
        });
        cells = expand(cells, &g.network, |c, v| c.network = v);
        cells = expand(cells, &g.n, |c, v| c.n = v);
        cells = expand(cells, &g.seed, |c, v| c.seed = v);
        cells
    }
}

pub fn load_sweep(path: &Path) -> Result<SweepSpec, HarnessError> {
    let mut spec: SweepSpec = parse_json(&read_text(path)?)?;
    if let Some(dir) = path.parent() {
        spec.base.resolve_paths(dir);
        if let Some(nets) = &mut spec.grid.network {
            for net in nets {
                if let NetworkSpec::File { path } = net {
                    if path.is_relative() {
                        *path = dir.join(&*path);
                    }
                }
            }
        }
    }
    spec.validate()?;
    Ok(spec)
}

fn run_cell(cell: usize, cfg: &ExperimentConfig, cell_dir: Option<&Path>) -> SweepRow {
    let mut row = SweepRow {
        cell,
        n: cfg.n,
        seed: cfg.seed,
        network: cfg.network.kind().to_string(),
        nonlinearity: cfg.nonlinearity.describe(),
        rho: cfg.nonlinearity.rho(),
        alpha: cfg.alpha,
        beta: cfg.beta,
        alpha_bound: None,
        admissible: None,
        steps_to_threshold: None,
        final_gap: None,
        final_consensus: None,
        verdict: None,
        error: None,
    };
    let result = simulate(cfg).and_then(|r| {
        if let Some(dir) = cell_dir {
            write_run(
                &r,
                &dir.join(format!("cell_{cell:04}.csv")),
                &dir.join(format!("cell_{cell:04}.json")),
            )?;
        }
        Ok(r)
    });
    match result {
        Ok(r) => {
            let s = r.summary;
            row.alpha_bound = s.admissibility.map(|a| a.alpha_bound);
            row.admissible = s.admissibility.map(|a| a.admissible);
            row.steps_to_threshold = s.steps_to_threshold;
            row.final_gap = s.final_metrics.as_ref().and_then(|m| m.optimality_gap);
            row.final_consensus = s.final_metrics.as_ref().map(|m| m.consensus_residual);
            row.verdict = Some(s.verdict);
            row.error = s.divergence;
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

/// Runs every cell (in parallel) and returns the rows in cell order.
pub fn sweep_rows(
    spec: &SweepSpec,
    cell_dir: Option<&Path>,
) -> Result<Vec<SweepRow>, HarnessError> {
    spec.validate()?;
    let cells = spec.cells();
    Ok(cells
        .par_iter()
        .enumerate()
        .map(|(k, cfg)| run_cell(k, cfg, cell_dir))
        .collect())
}

/// Runs the sweep and writes its table (and optionally per-cell outputs)
/// into `out_dir`. Returns the rows and the table path.
pub fn run_sweep(
    spec: &SweepSpec,
    out_dir: &Path,
) -> Result<(Vec<SweepRow>, PathBuf), HarnessError> {
    create_dir(out_dir)?;
    let cell_dir = out_dir.join("cells");
    if spec.write_cells {
        create_dir(&cell_dir)?;
    }
    let rows = sweep_rows(spec, spec.write_cells.then_some(cell_dir.as_path()))?;
    let path = out_dir.join(&spec.output);
    write_file(&path, &sweep_csv(&rows))?;
    Ok((rows, path))
}

pub fn sweep_csv(rows: &[SweepRow]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).expect("rows serialise");
    }
    w.into_inner().expect("writing to memory")
}

pub fn read_sweep_csv<R: std::io::Read>(reader: R) -> Result<Vec<SweepRow>, csv::Error> {
    csv::Reader::from_reader(reader).deserialize().collect()
}
