//! Dense kernels for the small `d x d` systems behind leverage scores and
//! Lewis weights.
//!
//! Design matrices are tall (`n >> d`) and `d` stays small, so everything
//! here is a straightforward row-major loop. Long reductions over rows go
//! through Neumaier-compensated sums because the per-row weights can span
//! many orders of magnitude.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::weights::{WeightKind, WeightVector};

/// Relative pivot floor used by [`SpdFactorization::new`].
pub const DEFAULT_PIVOT_TOL: f64 = 1e-12;

/// Neumaier (improved Kahan) running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = CompensatedSum::new();
    for v in values {
        acc.add(v);
    }
    acc.value()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm1(v: &[f64]) -> f64 {
    compensated_sum(v.iter().map(|x| x.abs()))
}

pub fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Dense real `n x d` matrix stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DesignMatrix {
    /// Builds a matrix from row-major entries, rejecting non-finite values.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if cols == 0 {
            return Err(Error::invalid("matrix must have at least one column"));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                got: data.len(),
                context: "matrix entries",
            });
        }
        if let Some(k) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: k / cols,
                col: k % cols,
            });
        }
        Ok(DesignMatrix { rows, cols, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    got: r.len(),
                    context: "row length",
                });
            }
            data.extend_from_slice(r);
        }
        DesignMatrix::new(rows.len(), cols, data)
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        DesignMatrix {
            rows: n,
            cols: n,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.cols)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn is_zero_row(&self, i: usize) -> bool {
        self.row(i).iter().all(|&v| v == 0.0)
    }

    /// `X beta`.
    pub fn mul_vec(&self, beta: &[f64]) -> Result<Vec<f64>> {
        if beta.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                got: beta.len(),
                context: "coefficient vector",
            });
        }
        Ok(self.row_iter().map(|r| dot(r, beta)).collect())
    }

    /// Rows of `self` followed by rows of `other`.
    pub fn vstack(&self, other: &DesignMatrix) -> Result<DesignMatrix> {
        if other.cols != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                got: other.cols,
                context: "stacked column count",
            });
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(DesignMatrix {
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn scaled(&self, c: f64) -> DesignMatrix {
        DesignMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * c).collect(),
        }
    }

    pub fn select_rows(&self, idx: &[usize]) -> DesignMatrix {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        DesignMatrix {
            rows: idx.len(),
            cols: self.cols,
            data,
        }
    }

    /// Appends `column` as a new last column (`[X y]`).
    pub fn augment(&self, column: &[f64]) -> Result<DesignMatrix> {
        if column.len() != self.rows {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                got: column.len(),
                context: "augmenting column",
            });
        }
        let cols = self.cols + 1;
        let mut data = Vec::with_capacity(self.rows * cols);
        for (r, &c) in self.row_iter().zip(column) {
            data.extend_from_slice(r);
            data.push(c);
        }
        DesignMatrix::new(self.rows, cols, data)
    }

    pub fn max_abs(&self) -> f64 {
        norm_inf(&self.data)
    }
}

/// Dense square matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn zeros(dim: usize) -> Self {
        SquareMatrix {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn from_row_major(dim: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: data.len(),
                context: "square matrix entries",
            });
        }
        Ok(SquareMatrix { dim, data })
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        self.data.chunks_exact(self.dim).map(|r| dot(r, v)).collect()
    }

    pub fn max_abs(&self) -> f64 {
        norm_inf(&self.data)
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.dim).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }
}

impl std::ops::Index<(usize, usize)> for SquareMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.dim + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for SquareMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.dim + j]
    }
}

/// `sum_j (1/w_j) x_j x_j^T` over the nonzero rows of `x`.
///
/// Rows that are identically zero contribute nothing and may carry a zero
/// weight; any other row needs a strictly positive weight.
pub fn gram_weighted(x: &DesignMatrix, w: &[f64]) -> Result<SquareMatrix> {
    if w.len() != x.rows() {
        return Err(Error::DimensionMismatch {
            expected: x.rows(),
            got: w.len(),
            context: "weight vector",
        });
    }
    let d = x.cols();
    let mut acc = vec![CompensatedSum::new(); d * (d + 1) / 2];
    for (i, (row, &wi)) in x.row_iter().zip(w).enumerate() {
        if row.iter().all(|&v| v == 0.0) {
            continue;
        }
        if !(wi > 0.0) || !wi.is_finite() {
            return Err(Error::NonPositiveWeight { row: i, weight: wi });
        }
        let inv = 1.0 / wi;
        let mut k = 0;
        for a in 0..d {
            let ra = row[a] * inv;
            for b in a..d {
                acc[k].add(ra * row[b]);
                k += 1;
            }
        }
    }
    let mut g = SquareMatrix::zeros(d);
    let mut k = 0;
    for a in 0..d {
        for b in a..d {
            let v = acc[k].value();
            g[(a, b)] = v;
            g[(b, a)] = v;
            k += 1;
        }
    }
    Ok(g)
}

/// `X^T X` with compensated accumulation.
pub fn gram(x: &DesignMatrix) -> SquareMatrix {
    let ones = vec![1.0; x.rows()];
    gram_weighted(x, &ones).expect("unit weights are valid")
}

/// Symmetrically pivoted Cholesky factorization `P^T A P = L L^T`.
///
/// Refuses the matrix as soon as the largest remaining diagonal drops below
/// `tol * max(diag(A))`, which is how rank deficiency surfaces.
#[derive(Debug, Clone)]
pub struct SpdFactorization {
    dim: usize,
    /// Lower-triangular factor, row-major, in pivoted order.
    lower: Vec<f64>,
    /// `perm[k]` is the original index of pivoted position `k`.
    perm: Vec<usize>,
}

impl SpdFactorization {
    pub fn new(a: &SquareMatrix) -> Result<Self> {
        Self::with_tolerance(a, DEFAULT_PIVOT_TOL)
    }

    pub fn with_tolerance(a: &SquareMatrix, rel_tol: f64) -> Result<Self> {
        let n = a.dim();
        if n == 0 {
            return Err(Error::invalid("cannot factor an empty matrix"));
        }
        let max_diag = (0..n).fold(0.0f64, |m, i| m.max(a[(i, i)]));
        let tol = rel_tol * max_diag;
        let mut work = a.data().to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut lower = vec![0.0; n * n];

        for k in 0..n {
            let (piv, piv_val) = (k..n)
                .map(|j| (j, work[j * n + j]))
                .fold((k, f64::NEG_INFINITY), |best, c| {
                    if c.1 > best.1 {
                        c
                    } else {
                        best
                    }
                });
            if !(piv_val > tol) || !(piv_val > 0.0) {
                return Err(Error::RankDeficient {
                    column: perm[piv],
                    pivot: piv_val,
                    tolerance: tol,
                });
            }
            if piv != k {
                perm.swap(k, piv);
                for c in 0..n {
                    work.swap(k * n + c, piv * n + c);
                }
                for r in 0..n {
                    work.swap(r * n + k, r * n + piv);
                }
                for c in 0..k {
                    lower.swap(k * n + c, piv * n + c);
                }
            }
            let lkk = piv_val.sqrt();
            lower[k * n + k] = lkk;
            for i in k + 1..n {
                lower[i * n + k] = work[i * n + k] / lkk;
            }
            for i in k + 1..n {
                let lik = lower[i * n + k];
                for j in k + 1..=i {
                    let v = work[i * n + j] - lik * lower[j * n + k];
                    work[i * n + j] = v;
                    work[j * n + i] = v;
                }
            }
        }
        Ok(SpdFactorization {
            dim: n,
            lower,
            perm,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Smallest diagonal entry of the factor, squared.
    pub fn min_pivot(&self) -> f64 {
        (0..self.dim)
            .map(|k| self.lower[k * self.dim + k].powi(2))
            .fold(f64::INFINITY, f64::min)
    }

    fn check_len(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: v.len(),
                context: "vector for factored matrix",
            });
        }
        Ok(())
    }

    /// Solves `L z = P^T v` in place.
    fn forward(&self, v: &[f64], z: &mut [f64]) {
        let n = self.dim;
        for k in 0..n {
            let mut s = v[self.perm[k]];
            for c in 0..k {
                s -= self.lower[k * n + c] * z[c];
            }
            z[k] = s / self.lower[k * n + k];
        }
    }

    /// `A^{-1} b`.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        self.check_len(b)?;
        let n = self.dim;
        let mut z = vec![0.0; n];
        self.forward(b, &mut z);
        for k in (0..n).rev() {
            let mut s = z[k];
            for r in k + 1..n {
                s -= self.lower[r * n + k] * z[r];
            }
            z[k] = s / self.lower[k * n + k];
        }
        let mut out = vec![0.0; n];
        for k in 0..n {
            out[self.perm[k]] = z[k];
        }
        Ok(out)
    }

    /// `v^T A^{-1} v`, never negative.
    pub fn quadratic_form(&self, v: &[f64]) -> Result<f64> {
        self.check_len(v)?;
        let mut z = vec![0.0; self.dim];
        Ok(self.quadratic_form_with(v, &mut z))
    }

    pub(crate) fn quadratic_form_with(&self, v: &[f64], scratch: &mut [f64]) -> f64 {
        self.forward(v, scratch);
        scratch.iter().map(|z| z * z).sum::<f64>().max(0.0)
    }

    /// Rebuilds `A` from the factor.
    pub fn reconstruct(&self) -> SquareMatrix {
        let n = self.dim;
        let mut a = SquareMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let s: f64 = (0..=i.min(j))
                    .map(|c| self.lower[i * n + c] * self.lower[j * n + c])
                    .sum();
                a[(self.perm[i], self.perm[j])] = s;
            }
        }
        a
    }
}

/// `l_i = x_i^T (X^T X)^{-1} x_i`.
pub fn leverage_scores(x: &DesignMatrix) -> Result<WeightVector> {
    let f = SpdFactorization::new(&gram(x))?;
    let mut scratch = vec![0.0; x.cols()];
    let values = x
        .row_iter()
        .map(|r| f.quadratic_form_with(r, &mut scratch).min(1.0))
        .collect();
    Ok(WeightVector::new(WeightKind::Leverage, values))
}

/// LU factorization with partial pivoting for general square systems.
#[derive(Debug, Clone)]
pub struct LuFactorization {
    dim: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

impl LuFactorization {
    /// Fails when a pivot falls below `rel_tol` times the largest entry.
    pub fn new(a: &SquareMatrix, rel_tol: f64) -> Result<Self> {
        let n = a.dim();
        let mut lu = a.data().to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        let tol = rel_tol * a.max_abs();
        for k in 0..n {
            let piv = (k..n)
                .max_by(|&i, &j| lu[i * n + k].abs().total_cmp(&lu[j * n + k].abs()))
                .unwrap_or(k);
            let pv = lu[piv * n + k];
            if !(pv.abs() > tol) {
                return Err(Error::RankDeficient {
                    column: k,
                    pivot: pv.abs(),
                    tolerance: tol,
                });
            }
            if piv != k {
                perm.swap(k, piv);
                for c in 0..n {
                    lu.swap(k * n + c, piv * n + c);
                }
            }
            for i in k + 1..n {
                let f = lu[i * n + k] / pv;
                lu[i * n + k] = f;
                for c in k + 1..n {
                    lu[i * n + c] -= f * lu[k * n + c];
                }
            }
        }
        Ok(LuFactorization { dim: n, lu, perm })
    }

    /// `A^{-1} b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let mut z: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for c in 0..i {
                z[i] -= self.lu[i * n + c] * z[c];
            }
        }
        for i in (0..n).rev() {
            for c in i + 1..n {
                z[i] -= self.lu[i * n + c] * z[c];
            }
            z[i] /= self.lu[i * n + i];
        }
        z
    }

    /// `A^{-T} b`.
    pub fn solve_transpose(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim;
        // A = P^T L U, so A^T x = b  <=>  U^T L^T P x = b.
        let mut z = b.to_vec();
        for i in 0..n {
            for c in 0..i {
                z[i] -= self.lu[c * n + i] * z[c];
            }
            z[i] /= self.lu[i * n + i];
        }
        for i in (0..n).rev() {
            for c in i + 1..n {
                z[i] -= self.lu[c * n + i] * z[c];
            }
        }
        let mut out = vec![0.0; n];
        for (k, &p) in self.perm.iter().enumerate() {
            out[p] = z[k];
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut ChaCha8Rng, n: usize, d: usize) -> DesignMatrix {
        let data = (0..n * d).map(|_| rng.random_range(-1.0..1.0)).collect();
        DesignMatrix::new(n, d, data).unwrap()
    }

    fn random_spd(rng: &mut ChaCha8Rng, d: usize) -> SquareMatrix {
        let b = random_matrix(rng, d + 3, d);
        let mut g = gram(&b);
        for i in 0..d {
            g[(i, i)] += 0.1;
        }
        g
    }

    /// Gauss-Jordan inverse, independent of the Cholesky path.
    fn gauss_jordan_inverse(a: &SquareMatrix) -> SquareMatrix {
        let n = a.dim();
        let mut m: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let mut r: Vec<f64> = (0..n).map(|j| a[(i, j)]).collect();
                r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
                r
            })
            .collect();
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| m[i][k].abs().total_cmp(&m[j][k].abs()))
                .unwrap();
            m.swap(k, p);
            let pv = m[k][k];
            for c in 0..2 * n {
                m[k][c] /= pv;
            }
            for i in 0..n {
                if i != k {
                    let f = m[i][k];
                    for c in 0..2 * n {
                        m[i][c] -= f * m[k][c];
                    }
                }
            }
        }
        let data = m.iter().flat_map(|r| r[n..].to_vec()).collect();
        SquareMatrix::from_row_major(n, data).unwrap()
    }

    #[test]
    fn gram_identity_and_scaling() {
        let x = DesignMatrix::identity(2);
        assert_eq!(gram_weighted(&x, &[1.0, 1.0]).unwrap(), SquareMatrix::identity(2));
        assert_eq!(
            gram_weighted(&x, &[0.5, 0.5]).unwrap(),
            SquareMatrix::diag(&[2.0, 2.0])
        );
    }

    #[test]
    fn gram_matches_triple_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = random_matrix(&mut rng, 5, 2);
        let g = gram_weighted(&x, &[1.0; 5]).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                let mut s = 0.0;
                for i in 0..5 {
                    s += x.get(i, a) * x.get(i, b);
                }
                assert!((g[(a, b)] - s).abs() < 1e-14);
            }
        }
        assert!(g.is_symmetric());
    }

    #[test]
    fn gram_rejects_bad_weights() {
        let x = DesignMatrix::from_rows(&[[1.0, 0.0], [0.0, 0.0], [0.0, 1.0]]).unwrap();
        assert!(matches!(
            gram_weighted(&x, &[1.0, 1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            gram_weighted(&x, &[1.0, 1.0, 0.0]),
            Err(Error::NonPositiveWeight { row: 2, .. })
        ));
        // a zero weight on a zero row is fine
        assert!(gram_weighted(&x, &[1.0, 0.0, 1.0]).is_ok());
    }

    #[test]
    fn spd_solve_examples() {
        let f = SpdFactorization::new(&SquareMatrix::identity(2)).unwrap();
        assert_eq!(f.solve(&[3.0, -5.0]).unwrap(), vec![3.0, -5.0]);
        let f = SpdFactorization::new(&SquareMatrix::diag(&[2.0, 4.0])).unwrap();
        for v in f.solve(&[2.0, 4.0]).unwrap() {
            assert_abs_diff_eq!(v, 1.0, epsilon = 1e-15);
        }
        assert!(matches!(
            f.solve(&[1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn spd_solve_residual_on_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let a = random_spd(&mut rng, 4);
            let b: Vec<f64> = (0..4).map(|_| rng.random_range(-3.0..3.0)).collect();
            let z = SpdFactorization::new(&a).unwrap().solve(&b).unwrap();
            let ab = a.mul_vec(&z);
            let scale = norm_inf(&b).max(1.0);
            for (u, v) in ab.iter().zip(&b) {
                assert!((u - v).abs() <= 1e-8 * scale);
            }
        }
    }

    #[test]
    fn reconstruction_error_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for d in 1..8 {
            let a = random_spd(&mut rng, d);
            let r = SpdFactorization::new(&a).unwrap().reconstruct();
            for (u, v) in r.data().iter().zip(a.data()) {
                assert!((u - v).abs() <= 1e-10 * a.max_abs());
            }
        }
    }

    #[test]
    fn quadratic_form_examples() {
        let f = SpdFactorization::new(&SquareMatrix::identity(2)).unwrap();
        assert_eq!(f.quadratic_form(&[1.0, 0.0]).unwrap(), 1.0);
        let f = SpdFactorization::new(&SquareMatrix::diag(&[4.0, 1.0])).unwrap();
        assert_eq!(f.quadratic_form(&[2.0, 0.0]).unwrap(), 1.0);
    }

    #[test]
    fn quadratic_form_matches_explicit_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let a = random_spd(&mut rng, 5);
            let v: Vec<f64> = (0..5).map(|_| rng.random_range(-2.0..2.0)).collect();
            let inv = gauss_jordan_inverse(&a);
            let expected = dot(&v, &inv.mul_vec(&v));
            let got = SpdFactorization::new(&a).unwrap().quadratic_form(&v).unwrap();
            assert!((got - expected).abs() <= 1e-9 * expected.abs().max(1.0));
        }
    }

    #[test]
    fn rank_deficiency_is_an_error() {
        let x = DesignMatrix::from_rows(&[[1.0, 2.0], [2.0, 4.0], [-1.0, -2.0]]).unwrap();
        assert!(matches!(
            SpdFactorization::new(&gram(&x)),
            Err(Error::RankDeficient { .. })
        ));
        assert!(leverage_scores(&x).is_err());
    }

    #[test]
    fn leverage_examples() {
        let l = leverage_scores(&DesignMatrix::identity(3)).unwrap();
        assert_eq!(l.values, vec![1.0, 1.0, 1.0]);
        let x = DesignMatrix::from_rows(&[[1.0], [1.0]]).unwrap();
        for v in leverage_scores(&x).unwrap().values {
            assert_abs_diff_eq!(v, 0.5, epsilon = 1e-15);
        }
    }

    #[test]
    fn leverage_trace_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = random_matrix(&mut rng, 6, 2);
        let l = leverage_scores(&x).unwrap();
        assert!((l.total() - 2.0).abs() < 1e-6);
        assert!(l.values.iter().all(|&v| (0.0..=1.0).contains(&v)));
    }

    #[test]
    fn lu_solves_and_transposes() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let data: Vec<f64> = (0..16).map(|_| rng.random_range(-1.0..1.0)).collect();
        let a = SquareMatrix::from_row_major(4, data).unwrap();
        let lu = LuFactorization::new(&a, 1e-14).unwrap();
        let b = [1.0, -2.0, 0.5, 3.0];
        let x = lu.solve(&b);
        for (u, v) in a.mul_vec(&x).iter().zip(&b) {
            assert!((u - v).abs() < 1e-10);
        }
        let xt = lu.solve_transpose(&b);
        for j in 0..4 {
            let s: f64 = (0..4).map(|i| a[(i, j)] * xt[i]).sum();
            assert!((s - b[j]).abs() < 1e-10);
        }
    }

    #[test]
    fn compensated_sum_beats_naive() {
        let mut vals = vec![1e16];
        vals.extend(std::iter::repeat_n(1.0, 1000));
        vals.push(-1e16);
        assert_eq!(compensated_sum(vals), 1000.0);
    }

    #[test]
    fn non_finite_entries_rejected() {
        assert!(matches!(
            DesignMatrix::new(1, 2, vec![1.0, f64::NAN]),
            Err(Error::NonFinite { row: 0, col: 1 })
        ));
    }
}
