//! Active LAD regression.
//!
//! The learner sees the full design `X` but no labels. It draws a sketch
//! from importance weights that depend on `X` only, asks the oracle for the
//! label of each distinct sampled row exactly once, and solves the
//! reweighted LAD problem on those rows. Because the draws are fixed before
//! the first query, the query set cannot depend on any label.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::l1solve::{solve_lad, LadProblem, SolveStatus, DEFAULT_MAX_ITERS, DEFAULT_TOL};
use crate::lewis::{
    lewis_weights, recommended_budget, sampling_values, LewisConfig, Regime,
    DEFAULT_BUDGET_CONSTANT,
};
use crate::linalg::{compensated_sum, dot, leverage_scores, CompensatedSum, DesignMatrix};
use crate::oracle::LabelOracle;
use crate::rng::RngStream;
use crate::sketch::{draw_sketch, Sketch};
use crate::weights::{WeightKind, WeightVector};

/// How rows are weighted for sampling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingScheme {
    Lewis,
    Uniform,
    /// l2 leverage scores; a baseline, not an l1 embedding.
    Leverage,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActiveConfig {
    pub eps: f64,
    pub delta: f64,
    pub regime: Regime,
    pub budget_constant: f64,
    /// Use exactly this many draws instead of the formula.
    pub budget_override: Option<usize>,
    pub lewis: LewisConfig,
    pub solver_tol: f64,
    pub solver_max_iters: usize,
}

impl Default for ActiveConfig {
    fn default() -> Self {
        ActiveConfig {
            eps: 0.25,
            delta: 0.1,
            regime: Regime::ConstantProb,
            budget_constant: DEFAULT_BUDGET_CONSTANT,
            budget_override: None,
            lewis: LewisConfig::default(),
            solver_tol: DEFAULT_TOL,
            solver_max_iters: DEFAULT_MAX_ITERS,
        }
    }
}

impl ActiveConfig {
    /// Number of draws for an embedding of dimension `dim`.
    pub fn budget_for(&self, dim: usize) -> Result<usize> {
        match self.budget_override {
            Some(0) => Err(Error::invalid("budget must be at least 1")),
            Some(n) => Ok(n),
            None => recommended_budget(dim, self.eps, self.delta, self.regime, self.budget_constant),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ActiveResult {
    pub beta: Vec<f64>,
    /// Reweighted objective on the sampled rows.
    pub sketched_objective: f64,
    /// Distinct labels revealed.
    pub labels_queried: usize,
    /// Queried rows in query order.
    pub queried_indices: Vec<usize>,
    pub budget: usize,
    pub status: SolveStatus,
    pub rng: RngStream,
    #[serde(skip)]
    pub sketch: Sketch,
}

/// Importance weights for `scheme`, computed from `X` alone.
pub fn importance_weights(
    x: &DesignMatrix,
    scheme: SamplingScheme,
    lewis: &LewisConfig,
) -> Result<WeightVector> {
    match scheme {
        SamplingScheme::Lewis => lewis_weights(x, lewis),
        SamplingScheme::Leverage => leverage_scores(x),
        SamplingScheme::Uniform => Ok(WeightVector::new(
            WeightKind::Sampling,
            vec![1.0; x.rows()],
        )),
    }
}

/// Solves the LAD problem restricted to the sketch, merging repeated draws
/// of a row into one row whose weight is the sum of their scales.
pub fn solve_on_sketch(
    x: &DesignMatrix,
    sketch: &Sketch,
    label: impl Fn(usize) -> f64,
    tol: f64,
    max_iters: usize,
) -> Result<(Vec<f64>, f64, SolveStatus)> {
    if sketch.source_n() != x.rows() {
        return Err(Error::DimensionMismatch {
            expected: x.rows(),
            got: sketch.source_n(),
            context: "sketch rows",
        });
    }
    let rows = sketch.distinct_indices();
    let mut weight = vec![0.0; x.rows()];
    for d in sketch.draws() {
        weight[d.index] += d.scale;
    }
    let a = x.select_rows(&rows);
    let b = rows.iter().map(|&i| label(i)).collect();
    let w = rows.iter().map(|&i| weight[i]).collect();
    let sol = solve_lad(&LadProblem::weighted(a, b, w)?, tol, max_iters)?;
    Ok((sol.beta, sol.objective, sol.status))
}

/// Precomputed sampling distribution for one design.
///
/// Building the learner does the expensive label-free work once; each
/// [`ActiveLearner::run`] then draws a fresh sketch and queries labels.
#[derive(Debug, Clone)]
pub struct ActiveLearner<'a> {
    x: &'a DesignMatrix,
    p: WeightVector,
    budget: usize,
    cfg: ActiveConfig,
}

impl<'a> ActiveLearner<'a> {
    pub fn new(x: &'a DesignMatrix, scheme: SamplingScheme, cfg: ActiveConfig) -> Result<Self> {
        let budget = cfg.budget_for(x.cols())?;
        let w = importance_weights(x, scheme, &cfg.lewis)?;
        Self::with_weights(x, &w, budget, cfg)
    }

    /// Uses caller-supplied importance weights with an explicit budget.
    pub fn with_weights(
        x: &'a DesignMatrix,
        w: &WeightVector,
        budget: usize,
        cfg: ActiveConfig,
    ) -> Result<Self> {
        if w.len() != x.rows() {
            return Err(Error::DimensionMismatch {
                expected: x.rows(),
                got: w.len(),
                context: "importance weights",
            });
        }
        if budget < x.cols() {
            return Err(Error::invalid(format!(
                "budget {budget} is below the dimension {}",
                x.cols()
            )));
        }
        Ok(ActiveLearner {
            x,
            p: sampling_values(w, budget)?,
            budget,
            cfg,
        })
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn sampling_values(&self) -> &WeightVector {
        &self.p
    }

    /// Draws a sketch from `rng` without touching any label.
    pub fn draw(&self, rng: &RngStream) -> Result<Sketch> {
        draw_sketch(&self.p, self.budget, rng)
    }

    pub fn run<O: LabelOracle + ?Sized>(&self, oracle: &mut O, rng: &RngStream) -> Result<ActiveResult> {
        if oracle.len() != self.x.rows() {
            return Err(Error::DimensionMismatch {
                expected: self.x.rows(),
                got: oracle.len(),
                context: "oracle length",
            });
        }
        let sketch = self.draw(rng)?;
        let rows = sketch.distinct_indices();
        let mut labels = vec![0.0; self.x.rows()];
        for &i in &rows {
            labels[i] = oracle.query(i)?;
        }
        let (beta, sketched_objective, status) = solve_on_sketch(
            self.x,
            &sketch,
            |i| labels[i],
            self.cfg.solver_tol,
            self.cfg.solver_max_iters,
        )?;
        Ok(ActiveResult {
            beta,
            sketched_objective,
            labels_queried: rows.len(),
            queried_indices: rows,
            budget: self.budget,
            status,
            rng: *rng,
            sketch,
        })
    }
}

/// Lewis-weight active regression in one call.
pub fn active_solve<O: LabelOracle + ?Sized>(
    x: &DesignMatrix,
    oracle: &mut O,
    cfg: &ActiveConfig,
    rng: &RngStream,
) -> Result<ActiveResult> {
    ActiveLearner::new(x, SamplingScheme::Lewis, *cfg)?.run(oracle, rng)
}

/// Lewis weights of `[X y]`, falling back to those of `X` when `y` lies in
/// the column space of `X` (the two spaces then coincide).
pub fn augmented_lewis_weights(
    x: &DesignMatrix,
    y: &[f64],
    cfg: &LewisConfig,
) -> Result<WeightVector> {
    match lewis_weights(&x.augment(y)?, cfg) {
        Err(Error::RankDeficient { .. }) => lewis_weights(x, cfg),
        other => other,
    }
}

/// Sketch-and-solve when every label is already known.
///
/// Sampling follows the Lewis weights of `[X y]`, so the sketch embeds the
/// span of `X` and `y` together. With a `(1 +- eps)` embedding the sketched
/// minimizer is within `(1+eps)/(1-eps)` of optimal, which is at most
/// `1 + 4 eps` for `eps < 1/3`; larger `eps` is refused unless a budget
/// override takes responsibility for the guarantee.
pub fn sketch_and_solve_known_y(
    x: &DesignMatrix,
    y: &[f64],
    cfg: &ActiveConfig,
    rng: &RngStream,
) -> Result<ActiveResult> {
    if y.len() != x.rows() {
        return Err(Error::DimensionMismatch {
            expected: x.rows(),
            got: y.len(),
            context: "labels",
        });
    }
    if cfg.budget_override.is_none() && !(cfg.eps < 1.0 / 3.0) {
        return Err(Error::invalid(format!(
            "eps = {} is outside (0, 1/3) where the known-label guarantee holds",
            cfg.eps
        )));
    }
    let w = augmented_lewis_weights(x, y, &cfg.lewis)?;
    let budget = cfg.budget_for(x.cols() + 1)?;
    let learner = ActiveLearner::with_weights(x, &w, budget, *cfg)?;
    let sketch = learner.draw(rng)?;
    let rows = sketch.distinct_indices();
    let (beta, sketched_objective, status) =
        solve_on_sketch(x, &sketch, |i| y[i], cfg.solver_tol, cfg.solver_max_iters)?;
    Ok(ActiveResult {
        beta,
        sketched_objective,
        labels_queried: rows.len(),
        queried_indices: rows,
        budget,
        status,
        rng: *rng,
        sketch,
    })
}

/// The sketch's error in estimating the objective gap between `beta` and
/// `beta_star`, relative to `||X (beta_star - beta)||_1`:
///
/// `[(||S(X b* - y)|| - ||S(X b - y)||) - (||X b* - y|| - ||X b - y||)] / ||X (b* - b)||`.
///
/// Differences are formed row by row before summing, so the result stays
/// accurate even when both objectives are huge. Returns 0 when the
/// denominator vanishes.
pub fn relative_error_gap(
    x: &DesignMatrix,
    y: &[f64],
    sketch: &Sketch,
    beta_star: &[f64],
    beta: &[f64],
) -> Result<f64> {
    if y.len() != x.rows() || sketch.source_n() != x.rows() {
        return Err(Error::DimensionMismatch {
            expected: x.rows(),
            got: if y.len() != x.rows() { y.len() } else { sketch.source_n() },
            context: "error gap inputs",
        });
    }
    for v in [beta_star, beta] {
        if v.len() != x.cols() {
            return Err(Error::DimensionMismatch {
                expected: x.cols(),
                got: v.len(),
                context: "coefficients",
            });
        }
    }
    let diff: Vec<f64> = beta_star.iter().zip(beta).map(|(a, b)| a - b).collect();
    let denom = compensated_sum(x.row_iter().map(|r| dot(r, &diff).abs()));
    if denom == 0.0 {
        return Ok(0.0);
    }
    // |r*| - |r| = sign * x^T (b* - b) when the residuals share a sign; using
    // the right side avoids cancellation when y_i is huge.
    let term = |i: usize| {
        let row = x.row(i);
        let (rs, r) = (dot(row, beta_star) - y[i], dot(row, beta) - y[i]);
        if rs * r > 0.0 {
            rs.signum() * dot(row, &diff)
        } else {
            rs.abs() - r.abs()
        }
    };
    let mut acc = CompensatedSum::default();
    for d in sketch.draws() {
        acc.add(d.scale * term(d.index));
    }
    for i in 0..x.rows() {
        acc.add(-term(i));
    }
    Ok(acc.value() / denom)
}
