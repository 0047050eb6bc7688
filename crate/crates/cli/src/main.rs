//! Command-line front end. Machine-readable results (JSON or CSV) go to
//! standard output and into `--out-dir`; human summaries go to standard
//! error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hbgt::graph::Network;
use hbgt::harness::{
    load_config, load_sweep, network_report, run_bench, run_experiment, run_sweep, BenchId,
    HarnessError, ObjectiveConfig,
};
use hbgt::objectives::{gradient_check, FD_RTOL, FD_STEP};

#[derive(Debug, Parser)]
#[command(
    name = "hbgt",
    version,
    about = "Heavy-ball gradient-tracking simulator"
)]
struct Cli {
    /// Override the seed of the config (or of the bench recipe).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory receiving output files.
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one experiment config; prints its JSON summary.
    Run { config: PathBuf },
    /// Run a parameter sweep; prints the sweep table as CSV.
    Sweep { spec: PathBuf },
    /// Laplacian spectrum of a plain-text network and, with --zeta, the
    /// admissible (beta, alpha) frontier.
    Spectrum {
        network: PathBuf,
        #[arg(long)]
        zeta: Option<f64>,
    },
    /// Finite-difference gradient check of the objective in a config.
    Gradcheck {
        config: PathBuf,
        #[arg(long, default_value_t = 50)]
        points: usize,
        #[arg(long, default_value_t = 2.0)]
        radius: f64,
    },
    /// Run a canned recipe.
    Bench {
        #[arg(value_parser = parse_bench)]
        id: BenchId,
    },
}

fn parse_bench(s: &str) -> Result<BenchId, String> {
    s.parse()
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("output serialises")
}

fn dispatch(cli: &Cli) -> Result<i32, HarnessError> {
    match &cli.command {
        Command::Run { config } => {
            let mut cfg = load_config(config)?;
            if let Some(seed) = cli.seed {
                cfg.seed = seed;
            }
            let out = run_experiment(&cfg, &cli.out_dir)?;
            let s = &out.summary;
            println!("{}", json(s));
            eprintln!(
                "{}: {:?} after t = {} (gap {}, consensus {}); wrote {} and {}",
                s.family,
                s.verdict,
                s.t_end,
                fmt_opt(s.final_metrics.as_ref().and_then(|m| m.optimality_gap)),
                fmt_opt(s.final_metrics.as_ref().map(|m| m.consensus_residual)),
                out.trajectory_path.display(),
                out.summary_path.display()
            );
            Ok(out.exit_code())
        }
        Command::Sweep { spec } => {
            let mut spec = load_sweep(spec)?;
            if let Some(seed) = cli.seed {
                spec.base.seed = seed;
            }
            let (rows, path) = run_sweep(&spec, &cli.out_dir)?;
            print!("{}", read_to_string(&path)?);
            let failed = rows.iter().filter(|r| r.error.is_some()).count();
            eprintln!(
                "{} cells, {} with errors or divergence; table in {}",
                rows.len(),
                failed,
                path.display()
            );
            Ok(0)
        }
        Command::Spectrum { network, zeta } => {
            let net = Network::read_text_file(network).map_err(|e| match e {
                hbgt::graph::GraphError::Io(source) => HarnessError::Io {
                    path: network.clone(),
                    source,
                },
                other => other.into(),
            })?;
            let report = network_report(&net, *zeta)?;
            std::fs::create_dir_all(&cli.out_dir).map_err(|e| out_err(&cli.out_dir, e))?;
            write(
                &cli.out_dir.join("eigenvalues.csv"),
                &report.eigenvalues_csv(),
            )?;
            if zeta.is_some() {
                write(&cli.out_dir.join("frontier.csv"), &report.frontier_csv())?;
            }
            println!("{}", json(&report));
            eprintln!(
                "n = {}, |Re lambda2| = {}{}",
                report.n,
                report.abs_re_lambda2,
                report
                    .frontier
                    .first()
                    .map(|(_, a)| format!(", alpha bound at beta = 0: {a}"))
                    .unwrap_or_default()
            );
            Ok(0)
        }
        Command::Gradcheck {
            config,
            points,
            radius,
        } => {
            let mut cfg = ObjectiveConfig::load(config)?;
            if let Some(seed) = cli.seed {
                cfg.seed = seed;
            }
            let obj = cfg.build()?;
            let report = gradient_check(obj.as_ref(), *points, *radius, cfg.seed, FD_STEP, FD_RTOL);
            println!("{}", json(&report));
            eprintln!(
                "{}: {} (worst relative error {:.3e}, tolerance {:e})",
                report.family,
                if report.passed { "pass" } else { "FAIL" },
                report.worst_rel_error,
                report.tolerance
            );
            Ok(if report.passed { 0 } else { 1 })
        }
        Command::Bench { id } => {
            let report = run_bench(*id, cli.seed.unwrap_or(0), &cli.out_dir)?;
            println!("{}", json(&report));
            for run in &report.runs {
                eprintln!(
                    "{id}/{}: {:?}, steps to threshold {}, final gap {}",
                    run.name,
                    run.summary.verdict,
                    fmt_opt(run.summary.steps_to_threshold),
                    fmt_opt(
                        run.summary
                            .final_metrics
                            .as_ref()
                            .and_then(|m| m.optimality_gap)
                    )
                );
            }
            let worst = report
                .runs
                .iter()
                .map(|r| r.summary.verdict.exit_code())
                .max()
                .unwrap_or(0);
            Ok(worst)
        }
    }
}

fn fmt_opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map_or_else(|| "n/a".into(), |v| v.to_string())
}

fn out_err(path: &Path, source: std::io::Error) -> HarnessError {
    HarnessError::Output {
        path: path.to_path_buf(),
        source,
    }
}

fn write(path: &Path, text: &str) -> Result<(), HarnessError> {
    std::fs::write(path, text).map_err(|e| out_err(path, e))
}

fn read_to_string(path: &Path) -> Result<String, HarnessError> {
    std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}
