//! l1 Lewis weights.
//!
//! The weights are the fixed point `w_i^2 = x_i^T (X^T W^{-1} X)^{-1} x_i`.
//! We iterate `w_i <- sqrt(x_i^T (X^T W^{-1} X)^{-1} x_i)` from `w = 1`;
//! for the l1 case the map is a contraction with factor 1/2 in `log w`, so
//! every iteration roughly halves the log-error.
//!
//! Convergence is judged on the defining identity itself: the residual is
//! `max_i |w_i^2 - q_i| / w_i^2` where `q_i` is the quadratic form evaluated
//! at the current weights.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{gram_weighted, DesignMatrix, SpdFactorization};
use crate::weights::{WeightKind, WeightVector};

/// Default `C` in the budget formulas.
pub const DEFAULT_BUDGET_CONSTANT: f64 = 4.0;

/// Zero rows carry no information and are always reported with weight 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroRowPolicy {
    #[default]
    Exclude,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LewisConfig {
    pub max_iters: usize,
    /// Threshold on the fixed-point residual.
    pub tol: f64,
    pub zero_row_policy: ZeroRowPolicy,
}

impl Default for LewisConfig {
    fn default() -> Self {
        LewisConfig {
            max_iters: 200,
            tol: 1e-10,
            zero_row_policy: ZeroRowPolicy::Exclude,
        }
    }
}

impl LewisConfig {
    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::invalid("lewis tolerance must be positive"));
        }
        if self.max_iters == 0 {
            return Err(Error::invalid("max_iters must be at least 1"));
        }
        Ok(())
    }
}

/// Converged weights plus the iteration trace.
#[derive(Debug, Clone)]
pub struct LewisFit {
    pub weights: WeightVector,
    pub iterations: usize,
    pub residual: f64,
    pub residual_history: Vec<f64>,
}

impl LewisFit {
    /// Whether the residual never increased after iteration `skip`.
    pub fn residual_nonincreasing_after(&self, skip: usize) -> bool {
        self.residual_history
            .iter()
            .skip(skip)
            .zip(self.residual_history.iter().skip(skip + 1))
            .all(|(a, b)| b <= a)
    }
}

/// Evaluates `q_i = x_i^T (sum_j x_j x_j^T / w_j)^{-1} x_i` for every row.
fn quadratic_forms(x: &DesignMatrix, w: &[f64]) -> Result<Vec<f64>> {
    let f = SpdFactorization::new(&gram_weighted(x, w)?)?;
    let mut scratch = vec![0.0; x.cols()];
    Ok(x
        .row_iter()
        .map(|r| {
            if r.iter().all(|&v| v == 0.0) {
                0.0
            } else {
                f.quadratic_form_with(r, &mut scratch)
            }
        })
        .collect())
}

fn fixed_point_defect(w: &[f64], q: &[f64], zero: &[bool]) -> f64 {
    w.iter()
        .zip(q)
        .zip(zero)
        .filter(|(_, &z)| !z)
        .map(|((&wi, &qi), _)| (wi * wi - qi).abs() / (wi * wi).max(1e-30))
        .fold(0.0, f64::max)
}

/// Runs the fixed-point iteration and returns the weights with diagnostics.
pub fn compute_lewis(x: &DesignMatrix, cfg: &LewisConfig) -> Result<LewisFit> {
    cfg.validate()?;
    let zero: Vec<bool> = (0..x.rows()).map(|i| x.is_zero_row(i)).collect();
    let nonzero = zero.iter().filter(|z| !**z).count();
    if nonzero < x.cols() {
        return Err(Error::RankDeficient {
            column: nonzero,
            pivot: 0.0,
            tolerance: 0.0,
        });
    }
    let mut w: Vec<f64> = zero.iter().map(|&z| if z { 0.0 } else { 1.0 }).collect();
    let mut history = Vec::new();
    for iter in 0..cfg.max_iters {
        let q = quadratic_forms(x, &w)?;
        let defect = fixed_point_defect(&w, &q, &zero);
        history.push(defect);
        if defect <= cfg.tol {
            return Ok(LewisFit {
                weights: WeightVector::new(WeightKind::Lewis, w),
                iterations: iter,
                residual: defect,
                residual_history: history,
            });
        }
        for (wi, qi) in w.iter_mut().zip(&q) {
            *wi = qi.sqrt();
        }
    }
    Err(Error::NonConvergence {
        iterations: cfg.max_iters,
        residual: history.last().copied().unwrap_or(f64::INFINITY),
    })
}

/// l1 Lewis weights of `x`; all-zero rows get weight 0.
pub fn lewis_weights(x: &DesignMatrix, cfg: &LewisConfig) -> Result<WeightVector> {
    compute_lewis(x, cfg).map(|f| f.weights)
}

/// Largest relative defect of the defining identity at the given weights.
pub fn verify_fixed_point(x: &DesignMatrix, w: &WeightVector) -> Result<f64> {
    if w.len() != x.rows() {
        return Err(Error::DimensionMismatch {
            expected: x.rows(),
            got: w.len(),
            context: "weight vector",
        });
    }
    let zero: Vec<bool> = (0..x.rows()).map(|i| x.is_zero_row(i)).collect();
    let q = quadratic_forms(x, w.as_slice())?;
    Ok(fixed_point_defect(w.as_slice(), &q, &zero))
}

/// `k` copies of `x` stacked, each row scaled by `1/k`.
pub fn stacked_copies(x: &DesignMatrix, k: usize) -> DesignMatrix {
    let scaled = x.scaled(1.0 / k as f64);
    let mut out = scaled.clone();
    for _ in 1..k {
        out = out.vstack(&scaled).expect("same width");
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonotonicityCheck {
    pub holds: bool,
    /// Largest increase of an original row's weight (negative when all drop).
    pub max_violation: f64,
}

/// Slack allowed before an increase counts as a violation.
pub const MONOTONICITY_SLACK: f64 = 1e-7;

/// Checks that appending `extra` rows never raises the weight of an
/// original row.
pub fn check_row_addition_monotonicity(
    x: &DesignMatrix,
    extra: &DesignMatrix,
    cfg: &LewisConfig,
) -> Result<MonotonicityCheck> {
    let before = lewis_weights(x, cfg)?;
    let after = if extra.rows() == 0 {
        before.clone()
    } else {
        lewis_weights(&x.vstack(extra)?, cfg)?
    };
    let max_violation = before
        .values
        .iter()
        .zip(&after.values)
        .map(|(b, a)| a - b)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(MonotonicityCheck {
        holds: max_violation <= MONOTONICITY_SLACK,
        max_violation,
    })
}

/// Rescales weights into sampling values `p_i = N w_i / sum_j w_j`.
pub fn sampling_values(w: &WeightVector, budget: usize) -> Result<WeightVector> {
    if budget == 0 {
        return Err(Error::invalid("sampling budget must be at least 1"));
    }
    let total = w.total();
    if !(total > 0.0) {
        return Err(Error::invalid("weights must have positive total"));
    }
    let scale = budget as f64 / total;
    Ok(WeightVector::new(
        WeightKind::Sampling,
        w.values.iter().map(|&v| v * scale).collect(),
    ))
}

/// Which guarantee the budget targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// Failure probability `delta`: `C d/eps^2 log(d/(eps delta))`.
    HighProb,
    /// Constant failure probability: `C d log(max(d,2)) / eps^2`.
    ConstantProb,
}

/// Number of sketch rows suggested for dimension `d` and target `(eps, delta)`.
pub fn recommended_budget(
    d: usize,
    eps: f64,
    delta: f64,
    regime: Regime,
    constant: f64,
) -> Result<usize> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::invalid(format!("eps must lie in (0, 1), got {eps}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    if d == 0 || !(constant > 0.0) {
        return Err(Error::invalid("d and the budget constant must be positive"));
    }
    let df = d as f64;
    let raw = match regime {
        Regime::HighProb => constant * df / (eps * eps) * (df / (eps * delta)).ln(),
        Regime::ConstantProb => constant * df * df.max(2.0).ln() / (eps * eps),
    };
    Ok(raw.ceil() as usize)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn gaussian(seed: u64, n: usize, d: usize) -> DesignMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..n * d).map(|_| StandardNormal.sample(&mut rng)).collect();
        DesignMatrix::new(n, d, data).unwrap()
    }

    #[test]
    fn orthonormal_rows_have_unit_weight() {
        let w = lewis_weights(&DesignMatrix::identity(3), &LewisConfig::default()).unwrap();
        assert_eq!(w.values, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn stacked_identity_halves() {
        let x = stacked_copies(&DesignMatrix::identity(2), 2);
        assert_eq!(x.rows(), 4);
        let w = lewis_weights(&x, &LewisConfig::default()).unwrap();
        for v in w.values {
            assert!((v - 0.5).abs() < 1e-9);
        }
    }

    #[test]
    fn random_fixed_point_and_sum() {
        let x = gaussian(11, 8, 3);
        let cfg = LewisConfig::default();
        let w = lewis_weights(&x, &cfg).unwrap();
        assert!(verify_fixed_point(&x, &w).unwrap() <= 1e-8);
        assert!((w.total() - 3.0).abs() < 1e-6);
    }

    #[test]
    fn verify_examples() {
        let x = DesignMatrix::identity(2);
        let ok = WeightVector::new(WeightKind::Lewis, vec![1.0, 1.0]);
        assert!(verify_fixed_point(&x, &ok).unwrap() < 1e-12);
        // w = 1/2: w^2 = 1/4 but q = 1/2, so the defect is 1.
        let bad = WeightVector::new(WeightKind::Lewis, vec![0.5, 0.5]);
        assert!(verify_fixed_point(&x, &bad).unwrap() >= 0.9);
        let short = WeightVector::new(WeightKind::Lewis, vec![1.0]);
        assert!(matches!(
            verify_fixed_point(&x, &short),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn zero_rows_get_zero_weight() {
        let x = DesignMatrix::from_rows(&[[1.0, 0.0], [0.0, 0.0], [0.0, 1.0], [0.0, 1.0]]).unwrap();
        let w = lewis_weights(&x, &LewisConfig::default()).unwrap();
        assert_eq!(w[1], 0.0);
        assert!((w[0] - 1.0).abs() < 1e-10);
        assert!((w[2] - 0.5).abs() < 1e-10);
        assert!((w.total() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn rank_deficient_input_errors() {
        let x = DesignMatrix::from_rows(&[[1.0, 1.0], [2.0, 2.0], [0.0, 0.0]]).unwrap();
        assert!(matches!(
            lewis_weights(&x, &LewisConfig::default()),
            Err(Error::RankDeficient { .. })
        ));
    }

    #[test]
    fn non_convergence_reports_residual() {
        let cfg = LewisConfig {
            max_iters: 2,
            ..LewisConfig::default()
        };
        match lewis_weights(&gaussian(3, 50, 4), &cfg) {
            Err(Error::NonConvergence { iterations, residual }) => {
                assert_eq!(iterations, 2);
                assert!(residual > cfg.tol);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn monotonicity_examples() {
        let cfg = LewisConfig::default();
        let i2 = DesignMatrix::identity(2);
        let c = check_row_addition_monotonicity(&i2, &i2, &cfg).unwrap();
        assert!(c.holds);
        assert!((c.max_violation + 0.5).abs() < 1e-9);

        let x = gaussian(5, 5, 2);
        let empty = DesignMatrix::new(0, 2, vec![]).unwrap();
        let c = check_row_addition_monotonicity(&x, &empty, &cfg).unwrap();
        assert!(c.holds);
        assert_eq!(c.max_violation, 0.0);

        let extra = gaussian(6, 3, 2);
        assert!(check_row_addition_monotonicity(&x, &extra, &cfg).unwrap().holds);
    }

    #[test]
    fn sampling_value_examples() {
        let w = WeightVector::new(WeightKind::Lewis, vec![1.0, 1.0]);
        assert_eq!(sampling_values(&w, 10).unwrap().values, vec![5.0, 5.0]);
        let w = WeightVector::new(WeightKind::Lewis, vec![0.5; 4]);
        assert_eq!(sampling_values(&w, 8).unwrap().values, vec![2.0; 4]);
        assert!(sampling_values(&w, 0).is_err());

        let lw = lewis_weights(&gaussian(8, 40, 3), &LewisConfig::default()).unwrap();
        let p = sampling_values(&lw, 100).unwrap();
        assert_eq!(p.kind, WeightKind::Sampling);
        assert!((p.total() - 100.0).abs() < 1e-7);
    }

    #[test]
    fn budget_examples() {
        assert_eq!(
            recommended_budget(2, 0.5, 0.1, Regime::ConstantProb, 4.0).unwrap(),
            23
        );
        let expected = (4.0 * 10.0 / 0.0625 * (10.0f64 / 0.0125).ln()).ceil() as usize;
        assert_eq!(
            recommended_budget(10, 0.25, 0.05, Regime::HighProb, 4.0).unwrap(),
            expected
        );
        assert_eq!(expected, 4279);
        for regime in [Regime::HighProb, Regime::ConstantProb] {
            let mut last = usize::MAX;
            for k in 1..20 {
                let b = recommended_budget(6, k as f64 * 0.05, 0.1, regime, 4.0).unwrap();
                assert!(b <= last);
                last = b;
            }
        }
        assert!(recommended_budget(2, 0.0, 0.1, Regime::HighProb, 4.0).is_err());
        assert!(recommended_budget(2, 0.5, 1.0, Regime::HighProb, 4.0).is_err());
    }
}
