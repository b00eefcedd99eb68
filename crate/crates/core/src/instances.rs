//! Instance generators.
//!
//! Two kinds of instance live here. Matrix instances (Gaussian designs with
//! planted outliers, optionally with one row in a direction no other row
//! touches) exercise the upper bound. Distributional instances put `x`
//! uniformly on the standard basis and draw `y = Z x^T beta*` for a random
//! factor `Z`; their expected losses have closed forms, which makes them
//! exact test oracles for the lower-bound families.

use rand::seq::index::sample as sample_indices;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::l1solve::{solve_lad, LadProblem, DEFAULT_MAX_ITERS, DEFAULT_TOL};
use crate::linalg::{compensated_sum, DesignMatrix};
use crate::rng::RngStream;

/// Family tag. The label factor `Z` differs by family: `+-1` for the two
/// hypercube families, `{0, 1}` for the hidden coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    BiasedHypercube,
    TwoCoin,
    HiddenCoordinate,
}

/// Probability that `Z = 1` in the hidden-coordinate family.
pub const HIDDEN_ONE_PROB: f64 = 0.75;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionalInstance {
    pub d: usize,
    pub family: Family,
    /// `P(Z = 1) = 1/2 + bias`.
    pub bias: f64,
    pub beta_star: Vec<f64>,
}

impl DistributionalInstance {
    /// `beta_star` must be a sign vector; `bias` in `(0, 1/2]`.
    pub fn biased_hypercube(beta_star: Vec<f64>, bias: f64) -> Result<Self> {
        if beta_star.is_empty() {
            return Err(Error::invalid("dimension must be at least 1"));
        }
        if beta_star.iter().any(|&b| b != 1.0 && b != -1.0) {
            return Err(Error::invalid("hypercube coefficients must be +1 or -1"));
        }
        check_bias(bias)?;
        Ok(DistributionalInstance {
            d: beta_star.len(),
            family: Family::BiasedHypercube,
            bias,
            beta_star,
        })
    }

    /// `beta* = +1_d` if `positive`, else `-1_d`.
    pub fn two_coin(d: usize, bias: f64, positive: bool) -> Result<Self> {
        if d == 0 {
            return Err(Error::invalid("dimension must be at least 1"));
        }
        check_bias(bias)?;
        let s = if positive { 1.0 } else { -1.0 };
        Ok(DistributionalInstance {
            d,
            family: Family::TwoCoin,
            bias,
            beta_star: vec![s; d],
        })
    }

    /// `beta* = e_hidden`, `Z = 1` with probability 3/4.
    pub fn hidden_coordinate(d: usize, hidden: usize) -> Result<Self> {
        if hidden >= d {
            return Err(Error::invalid(format!(
                "hidden coordinate {hidden} out of range for d = {d}"
            )));
        }
        let mut beta_star = vec![0.0; d];
        beta_star[hidden] = 1.0;
        Ok(DistributionalInstance {
            d,
            family: Family::HiddenCoordinate,
            bias: HIDDEN_ONE_PROB - 0.5,
            beta_star,
        })
    }

    pub fn hidden_index(&self) -> Option<usize> {
        match self.family {
            Family::HiddenCoordinate => self.beta_star.iter().position(|&b| b != 0.0),
            _ => None,
        }
    }

    fn zero_alternative(&self) -> bool {
        self.family == Family::HiddenCoordinate
    }

    /// Draws `y` given `x = e_coord`.
    pub fn sample_label<R: Rng + ?Sized>(&self, coord: usize, rng: &mut R) -> f64 {
        let one = rng.random_bool(0.5 + self.bias);
        let z = match (one, self.zero_alternative()) {
            (true, _) => 1.0,
            (false, true) => 0.0,
            (false, false) => -1.0,
        };
        z * self.beta_star[coord]
    }

    /// `m` i.i.d. pairs `(coordinate of x, y)`.
    pub fn sample_pairs(&self, m: usize, rng: &RngStream) -> Result<Vec<(usize, f64)>> {
        if m == 0 {
            return Err(Error::invalid("need at least one sample"));
        }
        let mut r = rng.rng();
        Ok((0..m)
            .map(|_| {
                let i = r.random_range(0..self.d);
                (i, self.sample_label(i, &mut r))
            })
            .collect())
    }

    /// Exact `E |x^T beta - y|`.
    pub fn expected_loss(&self, beta: &[f64]) -> Result<f64> {
        if beta.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: beta.len(),
                context: "coefficients",
            });
        }
        let (hi, lo) = (0.5 + self.bias, 0.5 - self.bias);
        let per_coord = beta.iter().zip(&self.beta_star).map(|(&b, &s)| {
            let alt = if self.zero_alternative() { 0.0 } else { -s };
            hi * (b - s).abs() + lo * (b - alt).abs()
        });
        Ok(compensated_sum(per_coord) / self.d as f64)
    }

    /// The loss of `beta*`, which minimizes the expected loss.
    pub fn optimal_loss(&self) -> f64 {
        self.expected_loss(&self.beta_star)
            .expect("beta_star has dimension d")
    }
}

fn check_bias(bias: f64) -> Result<()> {
    if !(bias > 0.0 && bias <= 0.5) {
        return Err(Error::invalid(format!("bias must lie in (0, 1/2], got {bias}")));
    }
    Ok(())
}

/// Which constants to use for the reduction's sample count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReductionConstants {
    /// `(2/eps^2)(ln(2/delta) + d ln(3d/eps))`.
    Statement,
    /// `(8/eps^2)(ln(2/delta) + d ln(4d/eps))`.
    #[default]
    Proof,
}

/// Rows needed so that a `(1+eps)` solution of the sampled matrix problem is
/// a `(1+6 eps)` solution of the distributional one, with failure
/// probability `2 delta`.
pub fn reduction_rows(d: usize, eps: f64, delta: f64, constants: ReductionConstants) -> Result<usize> {
    if d == 0 {
        return Err(Error::invalid("dimension must be at least 1"));
    }
    if !(eps > 0.0 && eps < 1.0 && delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid("eps and delta must lie in (0, 1)"));
    }
    let df = d as f64;
    let (lead, inner) = match constants {
        ReductionConstants::Statement => (2.0, 3.0),
        ReductionConstants::Proof => (8.0, 4.0),
    };
    let n = lead / (eps * eps) * ((2.0 / delta).ln() + df * (inner * df / eps).ln());
    Ok(n.ceil() as usize)
}

/// A distributional instance realized as a matrix regression problem.
#[derive(Debug, Clone)]
pub struct ReducedInstance {
    pub x: DesignMatrix,
    pub y: Vec<f64>,
    pub coords: Vec<usize>,
}

pub fn reduce_to_matrix(
    inst: &DistributionalInstance,
    eps: f64,
    delta: f64,
    constants: ReductionConstants,
    rng: &RngStream,
) -> Result<ReducedInstance> {
    let n = reduction_rows(inst.d, eps, delta, constants)?;
    let pairs = inst.sample_pairs(n, rng)?;
    let mut data = vec![0.0; n * inst.d];
    for (k, &(i, _)) in pairs.iter().enumerate() {
        data[k * inst.d + i] = 1.0;
    }
    Ok(ReducedInstance {
        x: DesignMatrix::new(n, inst.d, data)?,
        y: pairs.iter().map(|p| p.1).collect(),
        coords: pairs.iter().map(|p| p.0).collect(),
    })
}

/// Sign vectors with pairwise l1 distance above `0.2 d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Codebook {
    pub d: usize,
    pub words: Vec<Vec<f64>>,
    /// `ceil(2^{0.2 d})`; small `d` may fall short.
    pub target: usize,
}

impl Codebook {
    pub fn min_distance(&self) -> f64 {
        let mut best = f64::INFINITY;
        for (a, u) in self.words.iter().enumerate() {
            for v in &self.words[a + 1..] {
                best = best.min(l1_distance(u, v));
            }
        }
        best
    }

    pub fn meets_target(&self) -> bool {
        self.words.len() >= self.target
    }
}

fn l1_distance(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| (a - b).abs()).sum()
}

/// Greedy random codebook: starts from `+-1_d` and keeps each random sign
/// vector that is far from everything kept so far.
pub fn build_codebook(d: usize, rng: &RngStream) -> Result<Codebook> {
    if d < 2 {
        return Err(Error::invalid("codebook needs d >= 2"));
    }
    let target = 2f64.powf(0.2 * d as f64).ceil() as usize;
    let min = 0.2 * d as f64;
    let mut words = vec![vec![1.0; d], vec![-1.0; d]];
    let mut r = rng.rng();
    let attempts = 1000 * target.max(1);
    for _ in 0..attempts {
        if words.len() >= target {
            break;
        }
        let w: Vec<f64> = (0..d)
            .map(|_| if r.random_bool(0.5) { 1.0 } else { -1.0 })
            .collect();
        if words.iter().all(|u| l1_distance(u, &w) > min) {
            words.push(w);
        }
    }
    Ok(Codebook { d, words, target })
}

/// Parameters of a planted-outlier regression instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutlierConfig {
    pub n: usize,
    pub d: usize,
    /// Added to `y` at each outlier row.
    pub magnitude: f64,
    #[serde(default = "one")]
    pub outliers: usize,
    /// Standard deviation of the Gaussian label noise.
    #[serde(default = "unit")]
    pub noise_scale: f64,
    /// If set, one row is `M e_d` and every other row has last coordinate 0.
    #[serde(default)]
    pub isolated_scale: Option<f64>,
}

fn one() -> usize {
    1
}

fn unit() -> f64 {
    1.0
}

impl OutlierConfig {
    pub fn new(n: usize, d: usize, magnitude: f64) -> Self {
        OutlierConfig {
            n,
            d,
            magnitude,
            outliers: 1,
            noise_scale: 1.0,
            isolated_scale: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OutlierInstance {
    pub x: DesignMatrix,
    pub y: Vec<f64>,
    pub beta_star: Vec<f64>,
    /// Full-data LAD optimum.
    pub opt: f64,
    pub opt_beta: Vec<f64>,
    pub outlier_rows: Vec<usize>,
    pub isolated_row: Option<usize>,
}

pub fn make_outlier_instance(cfg: &OutlierConfig, rng: &RngStream) -> Result<OutlierInstance> {
    let OutlierConfig { n, d, .. } = *cfg;
    if d == 0 || n < d {
        return Err(Error::invalid(format!("need n >= d >= 1, got n = {n}, d = {d}")));
    }
    if cfg.outliers > n {
        return Err(Error::invalid("more outliers than rows"));
    }
    if !cfg.magnitude.is_finite() || !(cfg.noise_scale >= 0.0) {
        return Err(Error::invalid("magnitude must be finite and noise scale nonnegative"));
    }
    let mut r = rng.rng();
    let mut data: Vec<f64> = (0..n * d).map(|_| StandardNormal.sample(&mut r)).collect();
    let isolated_row = match cfg.isolated_scale {
        None => None,
        Some(m) => {
            if d < 2 || !(m.is_finite() && m != 0.0) {
                return Err(Error::invalid("isolated direction needs d >= 2 and a nonzero scale"));
            }
            let k = r.random_range(0..n);
            for i in 0..n {
                let row = &mut data[i * d..(i + 1) * d];
                if i == k {
                    row.fill(0.0);
                    row[d - 1] = m;
                } else {
                    row[d - 1] = 0.0;
                }
            }
            Some(k)
        }
    };
    let x = DesignMatrix::new(n, d, data)?;
    let beta_star: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut r)).collect();
    let mut y = x.mul_vec(&beta_star)?;
    for v in y.iter_mut() {
        let z: f64 = StandardNormal.sample(&mut r);
        *v += cfg.noise_scale * z;
    }
    let mut outlier_rows = sample_indices(&mut r, n, cfg.outliers).into_vec();
    outlier_rows.sort_unstable();
    for &j in &outlier_rows {
        y[j] += cfg.magnitude;
    }
    let sol = solve_lad(&LadProblem::new(x.clone(), y.clone())?, DEFAULT_TOL, DEFAULT_MAX_ITERS)?;
    Ok(OutlierInstance {
        x,
        y,
        beta_star,
        opt: sol.objective,
        opt_beta: sol.beta,
        outlier_rows,
        isolated_row,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lewis::{lewis_weights, LewisConfig};

    #[test]
    fn hypercube_optimum() {
        let inst = DistributionalInstance::biased_hypercube(vec![1.0, -1.0, 1.0], 0.1).unwrap();
        assert!((inst.optimal_loss() - 0.8).abs() < 1e-12);
    }

    #[test]
    fn hypercube_two_flips() {
        let inst =
            DistributionalInstance::biased_hypercube(vec![1.0, 1.0, -1.0, -1.0], 0.1).unwrap();
        let l = inst.expected_loss(&[-1.0, 1.0, 1.0, -1.0]).unwrap();
        assert!((l - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hidden_optimum() {
        for d in [2, 5, 9] {
            let inst = DistributionalInstance::hidden_coordinate(d, d - 1).unwrap();
            assert!((inst.optimal_loss() - 0.25 / d as f64).abs() < 1e-15);
        }
    }

    #[test]
    fn hidden_labels() {
        let inst = DistributionalInstance::hidden_coordinate(4, 1).unwrap();
        let mut r = RngStream::new(3).rng();
        for _ in 0..1000 {
            assert_eq!(inst.sample_label(0, &mut r), 0.0);
            let y = inst.sample_label(1, &mut r);
            assert!(y == 0.0 || y == 1.0);
        }
    }

    #[test]
    fn hypercube_labels_are_signs() {
        let inst = DistributionalInstance::two_coin(3, 0.2, false).unwrap();
        let pairs = inst.sample_pairs(500, &RngStream::new(1)).unwrap();
        assert!(pairs.iter().all(|&(i, y)| i < 3 && (y == 1.0 || y == -1.0)));
    }

    #[test]
    fn reduction_row_counts() {
        let n = reduction_rows(2, 0.5, 0.1, ReductionConstants::Statement).unwrap();
        let exact = 8.0 * (20f64.ln() + 2.0 * 12f64.ln());
        assert_eq!(n, exact.ceil() as usize);
        assert_eq!(n, 64);
        let p = reduction_rows(2, 0.5, 0.1, ReductionConstants::Proof).unwrap();
        assert!(p > n);
        let mut last = usize::MAX;
        for delta in [0.1, 0.3, 0.6, 0.9, 0.999] {
            let m = reduction_rows(3, 0.2, delta, ReductionConstants::Proof).unwrap();
            assert!(m <= last);
            last = m;
        }
    }

    #[test]
    fn reduced_matrix_rows_are_basis_vectors() {
        let inst = DistributionalInstance::biased_hypercube(vec![1.0, -1.0], 0.2).unwrap();
        let red = reduce_to_matrix(&inst, 0.5, 0.1, ReductionConstants::Statement, &RngStream::new(2))
            .unwrap();
        assert_eq!(red.x.rows(), 64);
        for (k, &c) in red.coords.iter().enumerate() {
            let row = red.x.row(k);
            assert_eq!(row[c], 1.0);
            assert_eq!(row.iter().sum::<f64>(), 1.0);
        }
    }

    #[test]
    fn small_codebook() {
        let cb = build_codebook(2, &RngStream::new(0)).unwrap();
        assert!(cb.words.contains(&vec![1.0, 1.0]));
        assert!(cb.words.contains(&vec![-1.0, -1.0]));
        assert!(cb.min_distance() > 0.4);
    }

    #[test]
    fn codebook_d10() {
        let cb = build_codebook(10, &RngStream::new(5)).unwrap();
        assert!(cb.meets_target());
        for (a, u) in cb.words.iter().enumerate() {
            assert!(u.iter().all(|&s| s == 1.0 || s == -1.0));
            for v in &cb.words[a + 1..] {
                assert!(l1_distance(u, v) > 2.0);
            }
        }
    }

    #[test]
    fn noiseless_square_instance_fits_exactly() {
        let cfg = OutlierConfig {
            noise_scale: 0.0,
            outliers: 0,
            ..OutlierConfig::new(4, 4, 0.0)
        };
        let inst = make_outlier_instance(&cfg, &RngStream::new(8)).unwrap();
        assert!(inst.opt < 1e-9);
    }

    #[test]
    fn no_outlier_opt_near_noise_norm() {
        let cfg = OutlierConfig {
            outliers: 0,
            ..OutlierConfig::new(400, 3, 0.0)
        };
        let inst = make_outlier_instance(&cfg, &RngStream::new(9)).unwrap();
        let r = inst.x.mul_vec(&inst.beta_star).unwrap();
        let noise = compensated_sum(r.iter().zip(&inst.y).map(|(a, b)| (a - b).abs()));
        assert!(inst.opt <= noise);
        assert!(inst.opt >= 0.95 * noise);
    }

    #[test]
    fn isolated_row_has_unit_weight() {
        let cfg = OutlierConfig {
            isolated_scale: Some(3.0),
            ..OutlierConfig::new(300, 4, 1e6)
        };
        let inst = make_outlier_instance(&cfg, &RngStream::new(10)).unwrap();
        let k = inst.isolated_row.unwrap();
        let w = lewis_weights(&inst.x, &LewisConfig::default()).unwrap();
        assert!(w[k] >= 0.99);
    }
}
