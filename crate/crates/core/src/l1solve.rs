//! Weighted least-absolute-deviation regression.
//!
//! `solve_lad` minimizes `sum_i w_i |a_i^T beta - b_i|` in two phases:
//!
//! 1. Smoothed IRLS on `sum_i w_i sqrt(r_i^2 + mu^2)` with `mu` shrinking
//!    geometrically, each step a weighted least-squares solve. This lands
//!    near the optimum cheaply.
//! 2. Vertex descent. An LAD optimum is attained where `d` independent
//!    residuals vanish. Starting from the `d` rows IRLS fits best, we test
//!    the subgradient condition on the basis, move along the edge that
//!    releases the most violated basis row, and take an exact line search
//!    over the breakpoints of the piecewise-linear objective. Each pivot
//!    strictly decreases the objective.
//!
//! The returned gap estimate comes from a dual vector `v = w * s` with
//! `|s_i| <= 1`, built by [`subgradient_certificate`].
//!
//! Minimizers need not be unique; callers should compare objectives rather
//! than coefficient vectors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    compensated_sum, dot, norm1, norm_inf, DesignMatrix, LuFactorization, SpdFactorization,
    SquareMatrix,
};

/// `min_beta sum_i w_i |a_i^T beta - b_i|`.
#[derive(Debug, Clone)]
pub struct LadProblem {
    a: DesignMatrix,
    b: Vec<f64>,
    weights: Option<Vec<f64>>,
}

impl LadProblem {
    pub fn new(a: DesignMatrix, b: Vec<f64>) -> Result<Self> {
        Self::build(a, b, None)
    }

    pub fn weighted(a: DesignMatrix, b: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        Self::build(a, b, Some(weights))
    }

    fn build(a: DesignMatrix, b: Vec<f64>, weights: Option<Vec<f64>>) -> Result<Self> {
        if a.rows() == 0 {
            return Err(Error::invalid("an LAD problem needs at least one row"));
        }
        if b.len() != a.rows() {
            return Err(Error::DimensionMismatch {
                expected: a.rows(),
                got: b.len(),
                context: "right-hand side",
            });
        }
        if let Some(i) = b.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: i, col: 0 });
        }
        if let Some(w) = &weights {
            if w.len() != a.rows() {
                return Err(Error::DimensionMismatch {
                    expected: a.rows(),
                    got: w.len(),
                    context: "row weights",
                });
            }
            if let Some(i) = w.iter().position(|v| !(*v >= 0.0) || !v.is_finite()) {
                return Err(Error::invalid(format!(
                    "row weight {} at row {i} must be finite and nonnegative",
                    w[i]
                )));
            }
        }
        Ok(LadProblem { a, b, weights })
    }

    pub fn a(&self) -> &DesignMatrix {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn rows(&self) -> usize {
        self.a.rows()
    }

    pub fn cols(&self) -> usize {
        self.a.cols()
    }

    #[inline]
    pub fn weight(&self, i: usize) -> f64 {
        self.weights.as_ref().map_or(1.0, |w| w[i])
    }

    pub fn total_weight(&self) -> f64 {
        compensated_sum((0..self.rows()).map(|i| self.weight(i)))
    }

    pub fn residuals(&self, beta: &[f64]) -> Result<Vec<f64>> {
        let ax = self.a.mul_vec(beta)?;
        Ok(ax.iter().zip(&self.b).map(|(p, y)| p - y).collect())
    }

    /// Keeps only the rows with positive weight.
    fn support(&self) -> LadProblem {
        match &self.weights {
            None => self.clone(),
            Some(w) => {
                let keep: Vec<usize> = (0..self.rows()).filter(|&i| w[i] > 0.0).collect();
                LadProblem {
                    a: self.a.select_rows(&keep),
                    b: keep.iter().map(|&i| self.b[i]).collect(),
                    weights: Some(keep.iter().map(|&i| w[i]).collect()),
                }
            }
        }
    }
}

/// `sum_i w_i |a_i^T beta - b_i|`.
pub fn objective(prob: &LadProblem, beta: &[f64]) -> Result<f64> {
    let r = prob.residuals(beta)?;
    Ok(compensated_sum(
        r.iter().enumerate().map(|(i, ri)| prob.weight(i) * ri.abs()),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    MaxIter,
    /// Stopped at a degenerate vertex where no edge descends but the basis
    /// multipliers alone do not certify optimality.
    Degenerate,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LadSolution {
    pub beta: Vec<f64>,
    pub objective: f64,
    pub optimality_gap_estimate: f64,
    pub iterations: usize,
    pub status: SolveStatus,
}

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITERS: usize = 1000;

/// Minimizes the weighted l1 residual. Rows with zero weight are dropped.
pub fn solve_lad(prob: &LadProblem, tol: f64, max_iters: usize) -> Result<LadSolution> {
    if !(tol > 0.0) {
        return Err(Error::invalid("solver tolerance must be positive"));
    }
    let sub = prob.support();
    let d = sub.cols();
    if sub.rows() < d {
        return Err(Error::RankDeficient {
            column: sub.rows(),
            pivot: 0.0,
            tolerance: 0.0,
        });
    }
    // Rank check on the weighted support.
    SpdFactorization::new(&crate::linalg::gram(&sub.a))?;

    let (irls_beta, irls_iters) = irls(&sub);
    let irls_obj = objective(&sub, &irls_beta)?;
    let mut beta = irls_beta;
    let mut obj = irls_obj;
    let mut status = SolveStatus::Optimal;
    let mut iterations = irls_iters;

    if let Some(descent) = vertex_descent(&sub, &beta, max_iters) {
        iterations += descent.pivots;
        let dobj = objective(&sub, &descent.beta)?;
        if dobj <= obj {
            beta = descent.beta;
            obj = dobj;
            status = descent.status;
        }
    }

    let cert = subgradient_certificate(&sub, &beta, 1e-9)?;
    let gap = cert.gap_estimate.max(0.0);
    if status == SolveStatus::Degenerate && gap <= tol * obj.max(f64::MIN_POSITIVE) {
        status = SolveStatus::Optimal;
    }
    // report the objective on the caller's problem (identical up to zero rows)
    let objective = objective(prob, &beta)?;
    Ok(LadSolution {
        beta,
        objective,
        optimality_gap_estimate: gap,
        iterations,
        status,
    })
}

fn solve_weighted_ls(a: &DesignMatrix, b: &[f64], c: &[f64]) -> Option<Vec<f64>> {
    let d = a.cols();
    let mut g = SquareMatrix::zeros(d);
    let mut rhs = vec![0.0; d];
    for ((row, &bi), &ci) in a.row_iter().zip(b).zip(c) {
        for p in 0..d {
            let cp = ci * row[p];
            rhs[p] += cp * bi;
            for q in p..d {
                g[(p, q)] += cp * row[q];
            }
        }
    }
    for p in 0..d {
        for q in 0..p {
            g[(p, q)] = g[(q, p)];
        }
    }
    SpdFactorization::with_tolerance(&g, 1e-14)
        .ok()?
        .solve(&rhs)
        .ok()
}

/// Smoothed IRLS warm start. Returns the best iterate seen.
fn irls(prob: &LadProblem) -> (Vec<f64>, usize) {
    let m = prob.rows();
    let w: Vec<f64> = (0..m).map(|i| prob.weight(i)).collect();
    let mut beta = match solve_weighted_ls(&prob.a, &prob.b, &w) {
        Some(b) => b,
        None => return (vec![0.0; prob.cols()], 0),
    };
    let mut r = prob.residuals(&beta).expect("dims checked");
    let mut best_obj = compensated_sum(r.iter().zip(&w).map(|(ri, wi)| wi * ri.abs()));
    let mut best = beta.clone();
    let total_w = compensated_sum(w.iter().copied());
    let scale = best_obj / total_w;
    if !(scale > 0.0) {
        return (best, 1);
    }
    let mut iters = 1;
    let mut mu = 1e-2 * scale;
    let mut c = vec![0.0; m];
    while mu >= 1e-9 * scale {
        for _ in 0..3 {
            for i in 0..m {
                c[i] = w[i] / (r[i] * r[i] + mu * mu).sqrt();
            }
            iters += 1;
            let Some(next) = solve_weighted_ls(&prob.a, &prob.b, &c) else {
                return (best, iters);
            };
            beta = next;
            r = prob.residuals(&beta).expect("dims checked");
            let o = compensated_sum(r.iter().zip(&w).map(|(ri, wi)| wi * ri.abs()));
            if o < best_obj {
                best_obj = o;
                best.clone_from(&beta);
            }
        }
        mu *= 0.1;
    }
    (best, iters)
}

/// Picks `d` linearly independent rows, preferring small `|r_i| / |a_i|`.
fn initial_basis(a: &DesignMatrix, r: &[f64]) -> Option<Vec<usize>> {
    let d = a.cols();
    let mut order: Vec<(f64, usize)> = (0..a.rows())
        .filter_map(|i| {
            let an = norm_inf(a.row(i));
            (an > 0.0).then(|| (r[i].abs() / an, i))
        })
        .collect();
    order.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(d);
    let mut basis = Vec::with_capacity(d);
    for (_, i) in order {
        let row = a.row(i);
        let rn = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut v = row.to_vec();
        for _ in 0..2 {
            for qk in &q {
                let proj = dot(qk, &v);
                for (vj, qj) in v.iter_mut().zip(qk) {
                    *vj -= proj * qj;
                }
            }
        }
        let vn = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if vn > 1e-8 * rn {
            v.iter_mut().for_each(|x| *x /= vn);
            q.push(v);
            basis.push(i);
            if basis.len() == d {
                return Some(basis);
            }
        }
    }
    None
}

fn basis_matrix(a: &DesignMatrix, basis: &[usize]) -> SquareMatrix {
    let d = a.cols();
    let data = basis.iter().flat_map(|&i| a.row(i).to_vec()).collect();
    SquareMatrix::from_row_major(d, data).expect("square")
}

struct Descent {
    beta: Vec<f64>,
    pivots: usize,
    status: SolveStatus,
}

fn vertex_descent(prob: &LadProblem, start: &[f64], max_iters: usize) -> Option<Descent> {
    let a = &prob.a;
    let m = prob.rows();
    let d = prob.cols();
    let w: Vec<f64> = (0..m).map(|i| prob.weight(i)).collect();
    let r0 = prob.residuals(start).ok()?;
    let mut basis = initial_basis(a, &r0)?;
    let mut in_basis = vec![usize::MAX; m];
    for (k, &i) in basis.iter().enumerate() {
        in_basis[i] = k;
    }
    let mut lu = LuFactorization::new(&basis_matrix(a, &basis), 1e-13).ok()?;
    let mut beta = lu.solve(&basis.iter().map(|&i| prob.b[i]).collect::<Vec<_>>());
    let mut r = prob.residuals(&beta).ok()?;
    let mut obj = compensated_sum(r.iter().zip(&w).map(|(ri, wi)| wi * ri.abs()));
    let b_scale = norm_inf(&prob.b).max(f64::MIN_POSITIVE);

    for pivot in 0..max_iters {
        let ztol = 1e-12 * b_scale.max(norm_inf(&a.mul_vec(&beta).ok()?));
        let degenerate: Vec<usize> = (0..m)
            .filter(|&i| in_basis[i] == usize::MAX && r[i].abs() <= ztol)
            .collect();
        let mut g = vec![0.0; d];
        for i in 0..m {
            if in_basis[i] != usize::MAX || r[i].abs() <= ztol {
                continue;
            }
            let s = w[i] * r[i].signum();
            for (gj, aj) in g.iter_mut().zip(a.row(i)) {
                *gj += s * aj;
            }
        }
        let neg_g: Vec<f64> = g.iter().map(|v| -v).collect();
        let u = lu.solve_transpose(&neg_g);

        let mut candidates: Vec<(f64, usize)> = basis
            .iter()
            .enumerate()
            .filter_map(|(k, &i)| {
                let ratio = u[k].abs() / w[i];
                (ratio > 1.0 + 1e-12).then_some((ratio, k))
            })
            .collect();
        if candidates.is_empty() {
            return Some(Descent {
                beta,
                pivots: pivot,
                status: SolveStatus::Optimal,
            });
        }
        candidates.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));

        let mut step = None;
        for &(_, k) in &candidates {
            let sigma = u[k].signum();
            let mut e = vec![0.0; d];
            e[k] = sigma;
            let delta = lu.solve(&e);
            let mut c = a.mul_vec(&delta).ok()?;
            for (kk, &i) in basis.iter().enumerate() {
                c[i] = if kk == k { sigma } else { 0.0 };
            }
            let leaving = basis[k];
            let mut slope = w[leaving] - u[k].abs();
            for &i in &degenerate {
                slope += w[i] * c[i].abs();
            }
            if slope < -1e-14 * w[leaving] {
                step = Some((k, delta, c, slope));
                break;
            }
        }
        let Some((k, delta, c, mut slope)) = step else {
            return Some(Descent {
                beta,
                pivots: pivot,
                status: SolveStatus::Degenerate,
            });
        };

        // Exact line search over breakpoints t_i = -r_i / c_i > 0.
        let mut breaks: Vec<(f64, usize)> = (0..m)
            .filter(|&i| in_basis[i] == usize::MAX && r[i].abs() > ztol && c[i] != 0.0)
            .filter_map(|i| {
                let t = -r[i] / c[i];
                (t > 0.0).then_some((t, i))
            })
            .collect();
        breaks.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        let mut entering = None;
        for &(t, i) in &breaks {
            slope += 2.0 * w[i] * c[i].abs();
            if slope >= 0.0 {
                entering = Some((t, i));
                break;
            }
        }
        let Some((_, enter)) = entering else {
            // Unbounded descent cannot happen for a bounded-below objective;
            // treat it as a numerical breakdown.
            return Some(Descent {
                beta,
                pivots: pivot,
                status: SolveStatus::MaxIter,
            });
        };
        let _ = delta;

        let leave = basis[k];
        let mut next_basis = basis.clone();
        next_basis[k] = enter;
        let Ok(next_lu) = LuFactorization::new(&basis_matrix(a, &next_basis), 1e-13) else {
            return Some(Descent {
                beta,
                pivots: pivot,
                status: SolveStatus::Degenerate,
            });
        };
        let next_beta = next_lu.solve(&next_basis.iter().map(|&i| prob.b[i]).collect::<Vec<_>>());
        let next_r = prob.residuals(&next_beta).ok()?;
        let next_obj = compensated_sum(next_r.iter().zip(&w).map(|(ri, wi)| wi * ri.abs()));
        if !(next_obj < obj) {
            return Some(Descent {
                beta,
                pivots: pivot,
                status: SolveStatus::Degenerate,
            });
        }
        in_basis[leave] = usize::MAX;
        in_basis[enter] = k;
        basis = next_basis;
        lu = next_lu;
        beta = next_beta;
        r = next_r;
        obj = next_obj;
    }
    Some(Descent {
        beta,
        pivots: max_iters,
        status: SolveStatus::MaxIter,
    })
}

/// Subgradient optimality evidence at `beta`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Certificate {
    /// `||A^T (w * s)||_inf` for the best `s` found.
    pub stationarity: f64,
    /// Rows treated as zero residuals (free sign choice).
    pub zero_rows: usize,
    /// `s`: `sign(r_i)` off the zero set, fitted values in `[-1, 1]` on it.
    pub signs: Vec<f64>,
    /// Estimated `objective - OPT` from the dual vector `w * s`.
    pub gap_estimate: f64,
}

impl Certificate {
    /// The acceptance threshold `tol * sum_i w_i * max|A|`.
    pub fn passes(&self, prob: &LadProblem, tol: f64) -> bool {
        self.stationarity <= tol * prob.total_weight() * prob.a.max_abs()
    }
}

/// Searches for `s` with `s_i = sign(r_i)` where the residual is nonzero and
/// `s_i` in `[-1, 1]` elsewhere, minimizing `||A^T (w * s)||`.
///
/// Residuals below `zero_tol * max(|b|_inf, |A beta|_inf)` count as zero.
/// On that zero set the free signs are fitted by box-constrained coordinate
/// descent, starting from the exact square solve when the set has exactly
/// `d` rows.
pub fn subgradient_certificate(
    prob: &LadProblem,
    beta: &[f64],
    zero_tol: f64,
) -> Result<Certificate> {
    let r = prob.residuals(beta)?;
    let m = prob.rows();
    let d = prob.cols();
    let a = &prob.a;
    let scale = norm_inf(&prob.b)
        .max(norm_inf(&a.mul_vec(beta)?))
        .max(f64::MIN_POSITIVE);
    let thresh = zero_tol * scale;
    let zero: Vec<usize> = (0..m)
        .filter(|&i| prob.weight(i) > 0.0 && r[i].abs() <= thresh)
        .collect();
    let mut s: Vec<f64> = r
        .iter()
        .map(|ri| if ri.abs() <= thresh { 0.0 } else { ri.signum() })
        .collect();
    // g = A^T (w * s) over the fixed rows
    let mut g = vec![0.0; d];
    for i in 0..m {
        if s[i] != 0.0 {
            let wi = prob.weight(i) * s[i];
            for (gj, aj) in g.iter_mut().zip(a.row(i)) {
                *gj += wi * aj;
            }
        }
    }
    // columns M_k = w_k a_k for k in the zero set
    let cols: Vec<Vec<f64>> = zero
        .iter()
        .map(|&i| a.row(i).iter().map(|v| v * prob.weight(i)).collect())
        .collect();
    let mut sz = vec![0.0; zero.len()];
    if zero.len() == d {
        let mt = SquareMatrix::from_row_major(d, cols.concat())?;
        if let Ok(lu) = LuFactorization::new(&mt, 1e-14) {
            let neg: Vec<f64> = g.iter().map(|v| -v).collect();
            sz = lu.solve_transpose(&neg).iter().map(|v| v.clamp(-1.0, 1.0)).collect();
        }
    }
    let mut resid = g.clone();
    for (col, &sk) in cols.iter().zip(&sz) {
        for (rj, cj) in resid.iter_mut().zip(col) {
            *rj += sk * cj;
        }
    }
    let norms: Vec<f64> = cols.iter().map(|c| dot(c, c)).collect();
    for _sweep in 0..500 {
        let mut moved = 0.0f64;
        for (k, col) in cols.iter().enumerate() {
            if norms[k] == 0.0 {
                continue;
            }
            let target = (sz[k] - dot(col, &resid) / norms[k]).clamp(-1.0, 1.0);
            let change = target - sz[k];
            if change != 0.0 {
                for (rj, cj) in resid.iter_mut().zip(col) {
                    *rj += change * cj;
                }
                sz[k] = target;
                moved = moved.max(change.abs());
            }
        }
        if moved < 1e-15 {
            break;
        }
    }
    for (&i, &v) in zero.iter().zip(&sz) {
        s[i] = v;
    }
    let stationarity = norm_inf(&resid);
    let primal = compensated_sum((0..m).map(|i| prob.weight(i) * r[i].abs()));
    let dual = compensated_sum((0..m).map(|i| prob.weight(i) * s[i] * r[i]));
    let gap_estimate = (primal - dual) + stationarity * norm1(beta).max(1.0);
    Ok(Certificate {
        stationarity,
        zero_rows: zero.len(),
        signs: s,
        gap_estimate,
    })
}

/// Minimizer of `sum_i w_i |v_i - beta|`; the left end of the minimizing
/// interval when it is not unique.
pub fn weighted_median_1d(values: &[f64], weights: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::invalid("weighted median of an empty set"));
    }
    if values.len() != weights.len() {
        return Err(Error::DimensionMismatch {
            expected: values.len(),
            got: weights.len(),
            context: "median weights",
        });
    }
    if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
        return Err(Error::invalid("median weights must be finite and nonnegative"));
    }
    let mut pairs: Vec<(f64, f64)> = values
        .iter()
        .zip(weights)
        .filter(|(_, &w)| w > 0.0)
        .map(|(&v, &w)| (v, w))
        .collect();
    if pairs.is_empty() {
        return Err(Error::invalid("median weights sum to zero"));
    }
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let total = compensated_sum(pairs.iter().map(|p| p.1));
    let mut acc = crate::linalg::CompensatedSum::new();
    for &(v, w) in &pairs {
        acc.add(w);
        if 2.0 * acc.value() >= total {
            return Ok(v);
        }
    }
    Ok(pairs.last().expect("nonempty").0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn col(v: &[f64]) -> DesignMatrix {
        DesignMatrix::new(v.len(), 1, v.to_vec()).unwrap()
    }

    #[test]
    fn median_of_three() {
        let p = LadProblem::new(col(&[1.0; 3]), vec![0.0, 1.0, 10.0]).unwrap();
        let s = solve_lad(&p, DEFAULT_TOL, DEFAULT_MAX_ITERS).unwrap();
        assert!((s.beta[0] - 1.0).abs() < 1e-12);
        assert!((s.objective - 10.0).abs() < 1e-12);
        assert_eq!(s.status, SolveStatus::Optimal);
    }

    #[test]
    fn exact_interpolation() {
        let p = LadProblem::new(DesignMatrix::identity(2), vec![3.0, -5.0]).unwrap();
        let s = solve_lad(&p, DEFAULT_TOL, DEFAULT_MAX_ITERS).unwrap();
        assert_eq!(s.beta, vec![3.0, -5.0]);
        assert_eq!(s.objective, 0.0);
    }

    #[test]
    fn weighted_median_wins() {
        let p = LadProblem::weighted(
            col(&[1.0; 4]),
            vec![0.0, 1.0, 2.0, 100.0],
            vec![1.0, 1.0, 1.0, 5.0],
        )
        .unwrap();
        let s = solve_lad(&p, DEFAULT_TOL, DEFAULT_MAX_ITERS).unwrap();
        assert!((s.beta[0] - 100.0).abs() < 1e-9);
        assert!((s.objective - 297.0).abs() < 1e-9);
    }

    #[test]
    fn median_examples() {
        assert_eq!(weighted_median_1d(&[0.0, 1.0, 10.0], &[1.0; 3]).unwrap(), 1.0);
        assert_eq!(weighted_median_1d(&[0.0, 2.0], &[1.0, 1.0]).unwrap(), 0.0);
        assert_eq!(
            weighted_median_1d(&[2.0, 100.0, 0.0, 1.0], &[1.0, 5.0, 1.0, 1.0]).unwrap(),
            100.0
        );
        assert!(weighted_median_1d(&[], &[]).is_err());
        assert!(weighted_median_1d(&[1.0], &[0.0]).is_err());
    }

    #[test]
    fn objective_examples() {
        let p = LadProblem::new(DesignMatrix::identity(2), vec![1.0, -1.0]).unwrap();
        assert_eq!(objective(&p, &[0.0, 0.0]).unwrap(), 2.0);
        assert_eq!(objective(&p, &[1.0, -1.0]).unwrap(), 0.0);
        assert!(objective(&p, &[0.0]).is_err());
    }

    #[test]
    fn zero_weight_rows_are_ignored() {
        let a = DesignMatrix::from_rows(&[[1.0], [1.0], [1.0], [1.0]]).unwrap();
        let p = LadProblem::weighted(a, vec![1.0, 2.0, 3.0, 1e9], vec![1.0, 1.0, 1.0, 0.0]).unwrap();
        let s = solve_lad(&p, DEFAULT_TOL, DEFAULT_MAX_ITERS).unwrap();
        assert!((s.beta[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn rank_deficient_support_is_an_error() {
        let a = DesignMatrix::from_rows(&[[1.0, 0.0], [2.0, 0.0], [0.0, 1.0]]).unwrap();
        let p = LadProblem::weighted(a, vec![1.0, 2.0, 3.0], vec![1.0, 1.0, 0.0]).unwrap();
        assert!(matches!(
            solve_lad(&p, DEFAULT_TOL, DEFAULT_MAX_ITERS),
            Err(Error::RankDeficient { .. })
        ));
    }

    #[test]
    fn problem_validation() {
        assert!(LadProblem::new(col(&[1.0]), vec![1.0, 2.0]).is_err());
        assert!(LadProblem::weighted(col(&[1.0]), vec![1.0], vec![-1.0]).is_err());
        assert!(LadProblem::new(col(&[1.0]), vec![f64::NAN]).is_err());
    }

    #[test]
    fn degenerate_duplicates_reach_optimum() {
        // Rows are standard basis vectors repeated; the optimum is a
        // per-coordinate median with many tied zero residuals.
        let mut rows = Vec::new();
        let mut b = Vec::new();
        for k in 0..30 {
            let j = k % 3;
            let mut r = [0.0; 3];
            r[j] = 1.0;
            rows.push(r);
            b.push(if k % 7 == 0 { -1.0 } else { 1.0 });
        }
        let p = LadProblem::new(DesignMatrix::from_rows(&rows).unwrap(), b.clone()).unwrap();
        let s = solve_lad(&p, DEFAULT_TOL, DEFAULT_MAX_ITERS).unwrap();
        let mut expected = 0.0;
        for j in 0..3 {
            let vals: Vec<f64> = (0..30).filter(|k| k % 3 == j).map(|k| b[k]).collect();
            let med = weighted_median_1d(&vals, &vec![1.0; vals.len()]).unwrap();
            expected += vals.iter().map(|v| (v - med).abs()).sum::<f64>();
        }
        assert!((s.objective - expected).abs() <= 1e-9 * expected);
    }
}
