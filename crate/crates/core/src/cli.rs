//! Command implementations behind the `l1-active` binary.
//!
//! Each command takes already-parsed options, does its work through the
//! library, and returns a serializable result. Argument parsing and exit
//! codes live in the binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::active::{sketch_and_solve_known_y, ActiveConfig, ActiveLearner, SamplingScheme};
use crate::error::{Error, Result};
use crate::harness::{run_experiment, ExperimentReport, ExperimentSpec, InstanceSpec};
use crate::instances::make_outlier_instance;
use crate::io::{
    read_labels, read_matrix_csv, weights_to_string, write_labels, write_matrix_csv, WeightsHeader,
};
use crate::l1solve::{objective, solve_lad, LadProblem, SolveStatus};
use crate::lewis::{compute_lewis, LewisConfig, Regime};
use crate::linalg::leverage_scores;
use crate::oracle::{FileOracle, LabelOracle};
use crate::rng::RngStream;
use crate::weights::WeightKind;

/// Exit status for a library error: 3 for numerical failures, 2 otherwise.
pub fn exit_code(err: &Error) -> i32 {
    if err.is_numerical() {
        3
    } else {
        2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightsKindArg {
    Lewis,
    Leverage,
}

/// Computes weights for the matrix at `x_path` and returns the weights
/// file contents.
pub fn cmd_weights(x_path: &Path, kind: WeightsKindArg, tol: f64) -> Result<String> {
    let x = read_matrix_csv(x_path)?;
    let (header, w) = match kind {
        WeightsKindArg::Lewis => {
            let cfg = LewisConfig {
                tol,
                ..LewisConfig::default()
            };
            let fit = compute_lewis(&x, &cfg)?;
            let header = WeightsHeader {
                kind: WeightKind::Lewis,
                n: x.rows(),
                d: x.cols(),
                sum: fit.weights.total(),
                fixed_point_residual: Some(fit.residual),
                trace_defect: None,
                iterations: Some(fit.iterations),
                tol: Some(tol),
            };
            (header, fit.weights)
        }
        WeightsKindArg::Leverage => {
            let w = leverage_scores(&x)?;
            let sum = w.total();
            let header = WeightsHeader {
                kind: WeightKind::Leverage,
                n: x.rows(),
                d: x.cols(),
                sum,
                fixed_point_residual: None,
                trace_defect: Some((sum - x.cols() as f64).abs()),
                iterations: None,
                tol: None,
            };
            (header, w)
        }
    };
    weights_to_string(&header, &w)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMode {
    /// Solve on all rows with all labels.
    Full,
    /// Sample by the Lewis weights of `[X y]`, then solve on the sample.
    SketchKnownY,
    /// Sample by the Lewis weights of `X`; read only the sampled labels.
    Active,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub mode: SolveMode,
    pub eps: f64,
    pub delta: f64,
    pub regime: Regime,
    pub budget: Option<usize>,
    pub seed: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            mode: SolveMode::Full,
            eps: 0.25,
            delta: 0.1,
            regime: Regime::ConstantProb,
            budget: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOutput {
    pub mode: SolveMode,
    pub beta: Vec<f64>,
    /// Objective of the problem actually solved (the sketched one unless
    /// the mode is `full`).
    pub objective: f64,
    /// `||X beta - y||_1` over all rows, when every label was read.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub full_objective: Option<f64>,
    pub status: SolveStatus,
    pub labels_queried: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub queried_indices: Option<Vec<usize>>,
    /// Label lines read from the labels file.
    pub label_lines_read: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub timing_ms: u128,
}

/// Sketch stream used by `solve`; experiment trial 0 uses the same one.
pub fn solve_stream(seed: u64) -> RngStream {
    RngStream::new(seed).substream("sketch", 0)
}

pub fn cmd_solve(x_path: &Path, y_path: &Path, opts: &SolveOptions) -> Result<SolveOutput> {
    let start = Instant::now();
    let x = read_matrix_csv(x_path)?;
    let cfg = ActiveConfig {
        eps: opts.eps,
        delta: opts.delta,
        regime: opts.regime,
        budget_override: opts.budget,
        ..ActiveConfig::default()
    };
    let mut out = match opts.mode {
        SolveMode::Full => {
            let y = read_labels(y_path)?;
            let prob = LadProblem::new(x, y)?;
            let sol = solve_lad(&prob, cfg.solver_tol, cfg.solver_max_iters)?;
            SolveOutput {
                mode: opts.mode,
                full_objective: Some(sol.objective),
                objective: sol.objective,
                beta: sol.beta,
                status: sol.status,
                labels_queried: prob.rows(),
                queried_indices: None,
                label_lines_read: prob.rows(),
                budget: None,
                seed: None,
                timing_ms: 0,
            }
        }
        SolveMode::SketchKnownY => {
            let y = read_labels(y_path)?;
            let res = sketch_and_solve_known_y(&x, &y, &cfg, &solve_stream(opts.seed))?;
            let full = objective(&LadProblem::new(x, y.clone())?, &res.beta)?;
            SolveOutput {
                mode: opts.mode,
                beta: res.beta,
                objective: res.sketched_objective,
                full_objective: Some(full),
                status: res.status,
                labels_queried: res.labels_queried,
                queried_indices: Some(res.queried_indices),
                label_lines_read: y.len(),
                budget: Some(res.budget),
                seed: Some(opts.seed),
                timing_ms: 0,
            }
        }
        SolveMode::Active => {
            let mut oracle = FileOracle::open(y_path)?;
            let learner = ActiveLearner::new(&x, SamplingScheme::Lewis, cfg)?;
            let res = learner.run(&mut oracle, &solve_stream(opts.seed))?;
            debug_assert_eq!(oracle.query_count(), res.labels_queried);
            SolveOutput {
                mode: opts.mode,
                beta: res.beta,
                objective: res.sketched_objective,
                full_objective: None,
                status: res.status,
                labels_queried: res.labels_queried,
                queried_indices: Some(res.queried_indices),
                label_lines_read: oracle.lines_read(),
                budget: Some(res.budget),
                seed: Some(opts.seed),
                timing_ms: 0,
            }
        }
    };
    out.timing_ms = start.elapsed().as_millis();
    Ok(out)
}

/// Where an experiment writes its report and curve.
pub fn experiment_outputs(report_path: &Path) -> (PathBuf, PathBuf) {
    (report_path.to_path_buf(), report_path.with_extension("csv"))
}

/// Loads a spec, runs it, and writes the report and curve if an output
/// path is given (here or in the spec).
pub fn cmd_experiment(spec_path: &Path, out: Option<&Path>) -> Result<ExperimentReport> {
    let mut spec: ExperimentSpec = serde_json::from_str(&fs::read_to_string(spec_path)?)?;
    let base = spec_path.parent().unwrap_or(Path::new("."));
    spec.resolve_paths(base);
    if let Some(o) = out {
        spec.output = Some(o.to_path_buf());
    }
    let report = run_experiment(&spec)?;
    if let Some(path) = &spec.output {
        let (json, csv) = experiment_outputs(path);
        fs::write(json, report.to_json()?)?;
        fs::write(csv, report.curve_csv())?;
    }
    Ok(report)
}

/// Metadata written next to a generated instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratedInstance {
    pub instance: InstanceSpec,
    pub seed: u64,
    pub n: usize,
    pub d: usize,
    pub opt: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_star: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub outlier_rows: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub isolated_row: Option<usize>,
}

/// Writes `X.csv`, `y.txt` and `instance.json` into `dir`.
///
/// The instance is the one an experiment with the same spec and seed uses.
pub fn cmd_gen(spec: &InstanceSpec, seed: u64, dir: &Path) -> Result<GeneratedInstance> {
    let rng = RngStream::new(seed).substream("instance", 0);
    let (x, y, meta) = match spec {
        InstanceSpec::Outlier(cfg) => {
            let inst = make_outlier_instance(cfg, &rng)?;
            let meta = GeneratedInstance {
                instance: spec.clone(),
                seed,
                n: inst.x.rows(),
                d: inst.x.cols(),
                opt: inst.opt,
                beta_star: Some(inst.beta_star),
                outlier_rows: inst.outlier_rows,
                isolated_row: inst.isolated_row,
            };
            (inst.x, inst.y, meta)
        }
        InstanceSpec::Files { .. } => {
            return Err(Error::invalid("gen needs a generated instance family, not files"))
        }
        _ => {
            let inst = crate::harness::prepare_instance(spec, &rng)?;
            let meta = GeneratedInstance {
                instance: spec.clone(),
                seed,
                n: inst.x.rows(),
                d: inst.x.cols(),
                opt: inst.opt,
                beta_star: inst.distribution.map(|d| d.beta_star),
                outlier_rows: Vec::new(),
                isolated_row: None,
            };
            (inst.x, inst.y, meta)
        }
    };
    fs::create_dir_all(dir)?;
    write_matrix_csv(dir.join("X.csv"), &x)?;
    write_labels(dir.join("y.txt"), &y)?;
    fs::write(dir.join("instance.json"), serde_json::to_string_pretty(&meta)?)?;
    Ok(meta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_instance_full_mode() {
        let dir = tempfile::tempdir().unwrap();
        let (xp, yp) = (dir.path().join("X.csv"), dir.path().join("y.txt"));
        fs::write(&xp, "1\n1\n1\n").unwrap();
        fs::write(&yp, "-4\n1\n6\n").unwrap();
        let out = cmd_solve(&xp, &yp, &SolveOptions::default()).unwrap();
        assert_eq!(out.beta, vec![1.0]);
        assert_eq!(out.objective, 10.0);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::invalid("x")), 2);
        assert_eq!(
            exit_code(&Error::RankDeficient {
                column: 0,
                pivot: 0.0,
                tolerance: 1e-12
            }),
            3
        );
    }
}
