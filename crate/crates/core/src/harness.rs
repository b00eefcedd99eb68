//! Monte Carlo experiments.
//!
//! An [`ExperimentSpec`] names an instance, the sampling methods to compare,
//! a list of budgets and a trial count. Every `(method, budget, trial)` job
//! is run independently and scored against the full-data optimum. All
//! randomness descends from the spec's seed:
//!
//! * the instance comes from substream `("instance", 0)`, or
//!   `("instance", t)` for trial `t` when instances are resampled;
//! * the sketch for trial `t` comes from substream `("sketch", t)`, shared
//!   across methods and budgets, so arms are coupled trial by trial.
//!
//! Trials run on the rayon pool; results are collected in job order, so the
//! report does not depend on scheduling.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize};

use crate::active::{augmented_lewis_weights, importance_weights, ActiveConfig, ActiveLearner, SamplingScheme};
use crate::error::{Error, Result};
use crate::instances::{
    make_outlier_instance, reduce_to_matrix, DistributionalInstance, OutlierConfig,
    ReductionConstants,
};
use crate::io::{read_labels, read_matrix_csv};
use crate::l1solve::{objective, solve_lad, LadProblem, DEFAULT_MAX_ITERS, DEFAULT_TOL};
use crate::lewis::LewisConfig;
use crate::linalg::{norm1, DesignMatrix};
use crate::oracle::VecOracle;
use crate::rng::{RngStream, ALGORITHM};
use crate::weights::WeightVector;

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Lewis,
    Uniform,
    LeverageL2Baseline,
    /// Lewis weights of `[X y]`; uses every label to choose rows.
    KnownYAugmented,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Lewis => "lewis",
            Method::Uniform => "uniform",
            Method::LeverageL2Baseline => "leverage_l2_baseline",
            Method::KnownYAugmented => "known_y_augmented",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InstanceSpec {
    /// Gaussian design with planted outliers (and optionally an isolated row).
    Outlier(OutlierConfig),
    BiasedHypercube {
        bias: f64,
        /// Defaults to a random sign vector of length `d`.
        #[serde(default)]
        beta_star: Option<Vec<f64>>,
        #[serde(default)]
        d: Option<usize>,
        #[serde(flatten)]
        reduction: ReductionSpec,
    },
    TwoCoin {
        d: usize,
        bias: f64,
        positive: bool,
        #[serde(flatten)]
        reduction: ReductionSpec,
    },
    HiddenCoordinate {
        d: usize,
        /// Defaults to a uniformly random coordinate.
        #[serde(default)]
        hidden: Option<usize>,
        #[serde(flatten)]
        reduction: ReductionSpec,
    },
    /// Design and labels read from disk.
    Files { x: PathBuf, y: PathBuf },
}

/// How a distributional instance is turned into a matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReductionSpec {
    pub reduction_eps: f64,
    pub reduction_delta: f64,
    #[serde(default)]
    pub constants: ReductionConstants,
}

fn one_or_many<'de, D: Deserializer<'de>>(de: D) -> std::result::Result<Vec<Method>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(Method),
        Many(Vec<Method>),
    }
    Ok(match OneOrMany::deserialize(de)? {
        OneOrMany::One(m) => vec![m],
        OneOrMany::Many(v) => v,
    })
}

fn default_delta() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub instance: InstanceSpec,
    /// A single method or a list; `method` is accepted as an alias.
    #[serde(alias = "method", deserialize_with = "one_or_many")]
    pub methods: Vec<Method>,
    pub budgets: Vec<usize>,
    pub eps: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    pub trials: usize,
    pub seed: u64,
    /// Draw a fresh instance for every trial instead of one shared instance.
    #[serde(default)]
    pub resample_instance: bool,
    /// Report path; the curve goes next to it with a `.csv` extension.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::invalid("trials must be at least 1"));
        }
        if self.methods.is_empty() {
            return Err(Error::invalid("at least one method is required"));
        }
        if self.budgets.is_empty() {
            return Err(Error::invalid("at least one budget is required"));
        }
        if self.budgets.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("budgets must be strictly ascending"));
        }
        if self.budgets[0] == 0 {
            return Err(Error::invalid("budgets must be positive"));
        }
        if !(self.eps > 0.0 && self.eps < 1.0 && self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::invalid("eps and delta must lie in (0, 1)"));
        }
        if self.resample_instance && matches!(self.instance, InstanceSpec::Files { .. }) {
            return Err(Error::invalid("file instances cannot be resampled"));
        }
        Ok(())
    }

    /// Makes relative file paths relative to `base`.
    pub fn resolve_paths(&mut self, base: &Path) {
        if let InstanceSpec::Files { x, y } = &mut self.instance {
            for p in [x, y] {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        }
        if let Some(out) = &mut self.output {
            if out.is_relative() {
                *out = base.join(&*out);
            }
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ExperimentSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }
}

/// A concrete regression problem with its optimum.
#[derive(Debug, Clone)]
pub struct PreparedInstance {
    pub x: DesignMatrix,
    pub y: Vec<f64>,
    pub opt: f64,
    /// Present for distributional families.
    pub distribution: Option<DistributionalInstance>,
}

fn full_optimum(x: &DesignMatrix, y: &[f64]) -> Result<f64> {
    let prob = LadProblem::new(x.clone(), y.to_vec())?;
    Ok(solve_lad(&prob, DEFAULT_TOL, DEFAULT_MAX_ITERS)?.objective)
}

fn reduced(
    inst: DistributionalInstance,
    red: &ReductionSpec,
    rng: &RngStream,
) -> Result<PreparedInstance> {
    let m = reduce_to_matrix(
        &inst,
        red.reduction_eps,
        red.reduction_delta,
        red.constants,
        &rng.substream("samples", 0),
    )?;
    let opt = full_optimum(&m.x, &m.y)?;
    Ok(PreparedInstance {
        x: m.x,
        y: m.y,
        opt,
        distribution: Some(inst),
    })
}

pub fn prepare_instance(spec: &InstanceSpec, rng: &RngStream) -> Result<PreparedInstance> {
    use rand::Rng;
    match spec {
        InstanceSpec::Outlier(cfg) => {
            let inst = make_outlier_instance(cfg, rng)?;
            Ok(PreparedInstance {
                x: inst.x,
                y: inst.y,
                opt: inst.opt,
                distribution: None,
            })
        }
        InstanceSpec::BiasedHypercube {
            bias,
            beta_star,
            d,
            reduction,
        } => {
            let beta = match (beta_star, d) {
                (Some(b), _) => b.clone(),
                (None, Some(d)) => {
                    let mut r = rng.substream("codeword", 0).rng();
                    (0..*d)
                        .map(|_| if r.random_bool(0.5) { 1.0 } else { -1.0 })
                        .collect()
                }
                (None, None) => return Err(Error::invalid("biased_hypercube needs d or beta_star")),
            };
            reduced(DistributionalInstance::biased_hypercube(beta, *bias)?, reduction, rng)
        }
        InstanceSpec::TwoCoin {
            d,
            bias,
            positive,
            reduction,
        } => reduced(DistributionalInstance::two_coin(*d, *bias, *positive)?, reduction, rng),
        InstanceSpec::HiddenCoordinate { d, hidden, reduction } => {
            if *d == 0 {
                return Err(Error::invalid("dimension must be at least 1"));
            }
            let i = hidden.unwrap_or_else(|| rng.substream("hidden", 0).rng().random_range(0..*d));
            reduced(DistributionalInstance::hidden_coordinate(*d, i)?, reduction, rng)
        }
        InstanceSpec::Files { x, y } => {
            let x = read_matrix_csv(x)?;
            let y = read_labels(y)?;
            if y.len() != x.rows() {
                return Err(Error::DimensionMismatch {
                    expected: x.rows(),
                    got: y.len(),
                    context: "label file length",
                });
            }
            let opt = full_optimum(&x, &y)?;
            Ok(PreparedInstance {
                x,
                y,
                opt,
                distribution: None,
            })
        }
    }
}

/// Importance weights for a method on a prepared instance.
pub fn method_weights(
    inst: &PreparedInstance,
    method: Method,
    lewis: &LewisConfig,
) -> Result<WeightVector> {
    match method {
        Method::Lewis => importance_weights(&inst.x, SamplingScheme::Lewis, lewis),
        Method::Uniform => importance_weights(&inst.x, SamplingScheme::Uniform, lewis),
        Method::LeverageL2Baseline => importance_weights(&inst.x, SamplingScheme::Leverage, lewis),
        Method::KnownYAugmented => augmented_lewis_weights(&inst.x, &inst.y, lewis),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub method: Method,
    pub budget: usize,
    pub trial: usize,
    pub distinct_labels: usize,
    pub objective: Option<f64>,
    pub opt: f64,
    /// `objective / opt`; absent when `opt` is zero.
    pub ratio: Option<f64>,
    pub success: bool,
    /// `expected_loss(beta) / expected_loss(beta*)` for distributional instances.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distributional_ratio: Option<f64>,
    /// Why the trial produced no estimate (e.g. a rank-deficient sketch).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub method: Method,
    pub budget: usize,
    pub trials: usize,
    pub successes: usize,
    pub errors: usize,
    pub success_rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub mean_ratio: Option<f64>,
    pub median_ratio: Option<f64>,
    pub mean_distinct_labels: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSummary {
    pub n: usize,
    pub d: usize,
    /// Full-data optimum; absent when every trial has its own instance.
    pub opt: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub elapsed_ms: u128,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub version: String,
    pub rng: String,
    pub spec: ExperimentSpec,
    pub instance: InstanceSummary,
    pub records: Vec<TrialRecord>,
    pub aggregates: Vec<Aggregate>,
    /// Wall-clock only; everything else is a function of the spec.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

impl ExperimentReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// The report without timing, for reproducibility comparisons.
    pub fn canonical_json(&self) -> Result<String> {
        let mut r = self.clone();
        r.timing = None;
        r.to_json()
    }

    /// `method,budget,success_rate,ci_low,ci_high,mean_ratio` per aggregate.
    pub fn curve_csv(&self) -> String {
        let mut out = String::from("method,budget,success_rate,ci_low,ci_high,mean_ratio\n");
        for a in &self.aggregates {
            let ratio = a.mean_ratio.map(|r| r.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                a.method.name(),
                a.budget,
                a.success_rate,
                a.ci_low,
                a.ci_high,
                ratio
            ));
        }
        out
    }

    pub fn aggregate(&self, method: Method, budget: usize) -> Option<&Aggregate> {
        self.aggregates
            .iter()
            .find(|a| a.method == method && a.budget == budget)
    }
}

/// 95% Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: usize, trials: usize) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// `opt` below this fraction of `max(||y||_1, 1)` is treated as zero.
const ZERO_OPT: f64 = 1e-12;

fn score(
    inst: &PreparedInstance,
    full: &LadProblem,
    eps: f64,
    beta: &[f64],
) -> Result<(f64, Option<f64>, bool, Option<f64>)> {
    let obj = objective(full, beta)?;
    let floor = ZERO_OPT * norm1(&inst.y).max(1.0);
    let (ratio, success) = if inst.opt > floor {
        (Some(obj / inst.opt), obj <= (1.0 + eps) * inst.opt)
    } else {
        (None, obj <= 1e3 * floor)
    };
    let dist = match &inst.distribution {
        Some(d) => Some(d.expected_loss(beta)? / d.optimal_loss()),
        None => None,
    };
    Ok((obj, ratio, success, dist))
}

struct Arm {
    /// Weight failures are reported per trial rather than aborting the run.
    weights: std::result::Result<WeightVector, String>,
}

struct Prepared {
    inst: PreparedInstance,
    full: LadProblem,
    arms: Vec<Arm>,
}

fn prepare(spec: &ExperimentSpec, rng: &RngStream, lewis: &LewisConfig) -> Result<Prepared> {
    let inst = prepare_instance(&spec.instance, rng)?;
    let full = LadProblem::new(inst.x.clone(), inst.y.clone())?;
    let arms = spec
        .methods
        .iter()
        .map(|&m| Arm {
            weights: method_weights(&inst, m, lewis).map_err(|e| e.to_string()),
        })
        .collect();
    Ok(Prepared { inst, full, arms })
}

fn run_trial(
    p: &Prepared,
    spec: &ExperimentSpec,
    arm: usize,
    budget: usize,
    trial: usize,
    root: &RngStream,
) -> TrialRecord {
    let method = spec.methods[arm];
    let mut rec = TrialRecord {
        method,
        budget,
        trial,
        distinct_labels: 0,
        objective: None,
        opt: p.inst.opt,
        ratio: None,
        success: false,
        distributional_ratio: None,
        error: None,
    };
    let cfg = ActiveConfig {
        eps: spec.eps,
        delta: spec.delta,
        budget_override: Some(budget),
        ..ActiveConfig::default()
    };
    let outcome = (|| -> Result<()> {
        let w = p.arms[arm]
            .weights
            .as_ref()
            .map_err(|e| Error::invalid(e.clone()))?;
        let learner = ActiveLearner::with_weights(&p.inst.x, w, budget, cfg)?;
        let mut oracle = VecOracle::new(p.inst.y.clone());
        let res = learner.run(&mut oracle, &root.substream("sketch", trial as u64))?;
        rec.distinct_labels = res.labels_queried;
        let (obj, ratio, success, dist) = score(&p.inst, &p.full, spec.eps, &res.beta)?;
        rec.objective = Some(obj);
        rec.ratio = ratio;
        rec.success = success;
        rec.distributional_ratio = dist;
        Ok(())
    })();
    if let Err(e) = outcome {
        rec.error = Some(e.to_string());
    }
    rec
}

fn aggregate(method: Method, budget: usize, recs: &[&TrialRecord]) -> Aggregate {
    let trials = recs.len();
    let successes = recs.iter().filter(|r| r.success).count();
    let errors = recs.iter().filter(|r| r.error.is_some()).count();
    let mut ratios: Vec<f64> = recs.iter().filter_map(|r| r.ratio).collect();
    ratios.sort_by(f64::total_cmp);
    let mean_ratio = (!ratios.is_empty()).then(|| ratios.iter().sum::<f64>() / ratios.len() as f64);
    let median_ratio = (!ratios.is_empty()).then(|| {
        let m = ratios.len();
        if m % 2 == 1 {
            ratios[m / 2]
        } else {
            0.5 * (ratios[m / 2 - 1] + ratios[m / 2])
        }
    });
    let (ci_low, ci_high) = wilson_interval(successes, trials);
    Aggregate {
        method,
        budget,
        trials,
        successes,
        errors,
        success_rate: successes as f64 / trials as f64,
        ci_low,
        ci_high,
        mean_ratio,
        median_ratio,
        mean_distinct_labels: recs.iter().map(|r| r.distinct_labels as f64).sum::<f64>()
            / trials as f64,
    }
}

/// Runs every trial of `spec` and assembles the report.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    spec.validate()?;
    let start = Instant::now();
    let root = RngStream::new(spec.seed);
    let lewis = LewisConfig::default();
    let prepared: Vec<Prepared> = if spec.resample_instance {
        (0..spec.trials)
            .into_par_iter()
            .map(|t| prepare(spec, &root.substream("instance", t as u64), &lewis))
            .collect::<Result<_>>()?
    } else {
        vec![prepare(spec, &root.substream("instance", 0), &lewis)?]
    };
    let jobs: Vec<(usize, usize, usize)> = (0..spec.methods.len())
        .flat_map(|a| {
            spec.budgets
                .iter()
                .flat_map(move |&b| (0..spec.trials).map(move |t| (a, b, t)))
        })
        .collect();
    let records: Vec<TrialRecord> = jobs
        .par_iter()
        .map(|&(a, b, t)| {
            let p = &prepared[if spec.resample_instance { t } else { 0 }];
            run_trial(p, spec, a, b, t, &root)
        })
        .collect();
    let mut aggregates = Vec::new();
    for &m in &spec.methods {
        for &b in &spec.budgets {
            let group: Vec<&TrialRecord> = records
                .iter()
                .filter(|r| r.method == m && r.budget == b)
                .collect();
            aggregates.push(aggregate(m, b, &group));
        }
    }
    let first = &prepared[0].inst;
    Ok(ExperimentReport {
        version: env!("CARGO_PKG_VERSION").to_string(),
        rng: ALGORITHM.to_string(),
        spec: ExperimentSpec {
            output: None,
            ..spec.clone()
        },
        instance: InstanceSummary {
            n: first.x.rows(),
            d: first.x.cols(),
            opt: (!spec.resample_instance).then_some(first.opt),
        },
        records,
        aggregates,
        timing: Some(Timing {
            elapsed_ms: start.elapsed().as_millis(),
        }),
    })
}
