//! Sampling-and-reweighting sketches.
//!
//! A sketch with budget `N` is `N` independent draws; draw `k` picks row
//! `i_k` with probability `p_{i_k} / N` and carries the scale `1 / p_{i_k}`,
//! so `E ||S v||_1 = ||v||_1` for every `v`. The budget is both the number
//! of draws and the total `sum_i p_i`.
//!
//! Sketches are stored as `(index, scale)` pairs and applied implicitly.

use rand::Rng;
use rand_distr::{weighted::WeightedAliasIndex, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{compensated_sum, dot, DesignMatrix};
use crate::rng::RngStream;
use crate::weights::WeightVector;

/// One sketch row: the standard basis vector `e_index` times `scale`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Draw {
    pub index: usize,
    pub scale: f64,
}

/// A realized draw from the sampling-and-reweighting distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct Sketch {
    source_n: usize,
    draws: Vec<Draw>,
    origin: Option<RngStream>,
}

#[derive(Serialize, Deserialize)]
struct SketchRecord {
    n: usize,
    #[serde(rename = "N")]
    budget: usize,
    seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    stream: Option<u64>,
    draws: Vec<(usize, f64)>,
}

impl Serialize for Sketch {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SketchRecord {
            n: self.source_n,
            budget: self.draws.len(),
            seed: self.origin.map(|o| o.seed),
            stream: self.origin.map(|o| o.stream),
            draws: self.draws.iter().map(|d| (d.index, d.scale)).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Sketch {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = SketchRecord::deserialize(d)?;
        if r.budget != r.draws.len() {
            return Err(D::Error::custom("N does not match the number of draws"));
        }
        let draws = r
            .draws
            .into_iter()
            .map(|(index, scale)| Draw { index, scale })
            .collect();
        let mut sk = Sketch::from_draws(r.n, draws).map_err(D::Error::custom)?;
        sk.origin = r.seed.map(|seed| RngStream {
            seed,
            stream: r.stream.unwrap_or(0),
        });
        Ok(sk)
    }
}

impl Sketch {
    /// Builds a sketch from explicit draws (tests and replays).
    pub fn from_draws(source_n: usize, draws: Vec<Draw>) -> Result<Self> {
        if draws.is_empty() {
            return Err(Error::invalid("a sketch needs at least one draw"));
        }
        for d in &draws {
            if d.index >= source_n {
                return Err(Error::invalid(format!(
                    "draw index {} out of range for {source_n} rows",
                    d.index
                )));
            }
            if !(d.scale > 0.0) || !d.scale.is_finite() {
                return Err(Error::invalid(format!("invalid draw scale {}", d.scale)));
            }
        }
        Ok(Sketch {
            source_n,
            draws,
            origin: None,
        })
    }

    /// The `n x n` identity, one unit draw per row in order.
    pub fn identity(n: usize) -> Self {
        Sketch {
            source_n: n,
            draws: (0..n).map(|index| Draw { index, scale: 1.0 }).collect(),
            origin: None,
        }
    }

    pub fn source_n(&self) -> usize {
        self.source_n
    }

    /// Number of draws `N`.
    pub fn budget(&self) -> usize {
        self.draws.len()
    }

    pub fn draws(&self) -> &[Draw] {
        &self.draws
    }

    pub fn origin(&self) -> Option<RngStream> {
        self.origin
    }

    /// Sorted distinct row indices touched by the sketch.
    pub fn distinct_indices(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = self.draws.iter().map(|d| d.index).collect();
        idx.sort_unstable();
        idx.dedup();
        idx
    }

    fn check_rows(&self, rows: usize) -> Result<()> {
        if rows != self.source_n {
            return Err(Error::DimensionMismatch {
                expected: self.source_n,
                got: rows,
                context: "rows of sketched operand",
            });
        }
        Ok(())
    }

    /// `S v`.
    pub fn apply_to_vector(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.check_rows(v.len())?;
        Ok(self.draws.iter().map(|d| d.scale * v[d.index]).collect())
    }

    /// `S M`.
    pub fn apply_to_matrix(&self, m: &DesignMatrix) -> Result<DesignMatrix> {
        self.check_rows(m.rows())?;
        let mut data = Vec::with_capacity(self.draws.len() * m.cols());
        for d in &self.draws {
            data.extend(m.row(d.index).iter().map(|v| v * d.scale));
        }
        DesignMatrix::new(self.draws.len(), m.cols(), data)
    }

    /// `||S v||_1` without materializing `S v`.
    pub fn sketched_norm1(&self, v: &[f64]) -> Result<f64> {
        self.check_rows(v.len())?;
        Ok(compensated_sum(
            self.draws.iter().map(|d| d.scale * v[d.index].abs()),
        ))
    }
}

/// Draws `budget` rows with `P(i) = p_i / budget` and scale `1 / p_i`.
///
/// `p` must be nonnegative with total equal to `budget` (relative 1e-6).
/// Rows with `p_i = 0` are never drawn. Sampling uses an alias table built
/// over the positive entries only, so each draw is O(1).
pub fn draw_sketch(p: &WeightVector, budget: usize, rng: &RngStream) -> Result<Sketch> {
    if budget == 0 {
        return Err(Error::invalid("sketch budget must be at least 1"));
    }
    if let Some(i) = p.values.iter().position(|v| !(*v >= 0.0) || !v.is_finite()) {
        return Err(Error::invalid(format!(
            "sampling value {} at row {i} is not a finite nonnegative number",
            p.values[i]
        )));
    }
    let support: Vec<usize> = (0..p.len()).filter(|&i| p[i] > 0.0).collect();
    if support.is_empty() {
        return Err(Error::invalid("all sampling values are zero"));
    }
    let total = p.total();
    let n = budget as f64;
    if (total - n).abs() > 1e-6 * n {
        return Err(Error::invalid(format!(
            "sampling values sum to {total}, expected the budget {budget}"
        )));
    }
    let table = WeightedAliasIndex::new(support.iter().map(|&i| p[i]).collect::<Vec<_>>())
        .map_err(|e| Error::invalid(format!("cannot build alias table: {e}")))?;
    let mut r = rng.rng();
    let draws = (0..budget)
        .map(|_| {
            let index = support[table.sample(&mut r)];
            Draw {
                index,
                scale: 1.0 / p[index],
            }
        })
        .collect();
    Ok(Sketch {
        source_n: p.len(),
        draws,
        origin: Some(*rng),
    })
}

/// Largest `| ||S X b||_1 / ||X b||_1 - 1 |` over `probes` Gaussian
/// directions `b`.
///
/// This only ever sees finitely many directions, so it is a lower bound on
/// the true distortion over the column space, not a certificate.
pub fn embedding_distortion(
    sketch: &Sketch,
    x: &DesignMatrix,
    probes: usize,
    rng: &RngStream,
) -> Result<f64> {
    sketch.check_rows(x.rows())?;
    if probes == 0 {
        return Err(Error::invalid("need at least one probe direction"));
    }
    let mut r = rng.rng();
    let mut worst = 0.0f64;
    let mut beta = vec![0.0; x.cols()];
    for _ in 0..probes {
        for b in beta.iter_mut() {
            *b = r.sample(StandardNormal);
        }
        let full = compensated_sum(x.row_iter().map(|row| dot(row, &beta).abs()));
        if full == 0.0 {
            continue;
        }
        let sk = compensated_sum(
            sketch
                .draws
                .iter()
                .map(|d| d.scale * dot(x.row(d.index), &beta).abs()),
        );
        worst = worst.max((sk / full - 1.0).abs());
    }
    Ok(worst)
}
