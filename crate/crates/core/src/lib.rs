//! Active least-absolute-deviation regression.
//!
//! Given a design `X` whose labels are expensive, the crate computes l1
//! Lewis weights of `X`, samples rows in proportion to them, asks a
//! [`oracle::LabelOracle`] only for the sampled labels, and solves the
//! reweighted LAD problem on the sample. With enough draws the answer is
//! within `1 + eps` of the best fit on all rows, even when `y` has outliers
//! in unknown places.
//!
//! Module map:
//!
//! * [`linalg`]: dense matrices, pivoted Cholesky, leverage scores.
//! * [`lewis`]: Lewis weights, sampling values, budget formulas.
//! * [`sketch`]: sampling-and-reweighting sketches.
//! * [`l1solve`]: exact weighted LAD solver and optimality certificate.
//! * [`active`], [`oracle`]: the label-efficient pipeline.
//! * [`instances`]: outlier designs and the distributional hard families.
//! * [`harness`], [`cli`], [`io`]: experiments, commands, file formats.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Index loops read more naturally in the matrix kernels.
#![allow(clippy::needless_range_loop)]

pub mod active;
pub mod cli;
pub mod error;
pub mod harness;
pub mod instances;
pub mod io;
pub mod l1solve;
pub mod lewis;
pub mod linalg;
pub mod oracle;
pub mod rng;
pub mod sketch;
pub mod weights;

pub use error::{Error, Result};
