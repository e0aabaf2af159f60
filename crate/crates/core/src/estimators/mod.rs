//! The estimator contract and the built-in estimators.
//!
//! An [`Estimator`] maps a block of rows to a point estimate and may also
//! report an estimated covariance of that estimate. Implementations must be
//! pure: the same block always yields the same bytes, and no state is shared
//! between calls. The `Sync` bound lets the executor hand one estimator to
//! every worker.

mod kde;
mod kendall;
mod mean;
mod ols;
mod quantreg;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::data::MatrixView;
use crate::error::{Error, Result};
use crate::linalg::Matrix;

pub use kde::{kde_at, silverman_bandwidth, Kde};
pub use kendall::{count_inversions, kendall_tau_knight, kendall_tau_naive, KendallKnight, KendallNaive};
pub use mean::{mean_estimate, Mean};
pub use ols::{ols_covariance, ols_fit, Ols};
pub use quantreg::{pinball_loss, quantile_reg_fit, QuantReg, QuantRegFit, QuantRegOptions};

/// Finite, non-empty vector of parameter estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EstimateVector(Vec<f64>);

impl EstimateVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInput("estimate vector is empty".into()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "estimate component {i} is not finite ({})",
                values[i]
            )));
        }
        Ok(EstimateVector(values))
    }

    pub fn scalar(v: f64) -> Result<Self> {
        Self::new(vec![v])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl fmt::Display for EstimateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

/// Column layout an estimator expects of its data blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Columns {
    /// Any number of columns; each is treated independently.
    Any,
    /// Exactly this many columns.
    Exactly(usize),
    /// Predictors followed by the response in the last column.
    Regression,
}

impl Columns {
    pub fn check(&self, cols: usize) -> Result<()> {
        let ok = match *self {
            Columns::Any => cols >= 1,
            Columns::Exactly(c) => cols == c,
            Columns::Regression => cols >= 2,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Dimension(format!("expected {self}, got {cols} column(s)")))
        }
    }
}

impl fmt::Display for Columns {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Columns::Any => f.write_str("one or more columns"),
            Columns::Exactly(c) => write!(f, "exactly {c} column(s)"),
            Columns::Regression => f.write_str("predictor columns followed by a response column"),
        }
    }
}

pub trait Estimator: Sync {
    fn name(&self) -> &str;

    fn columns(&self) -> Columns;

    fn fit(&self, block: MatrixView<'_>) -> Result<EstimateVector>;

    /// Estimated covariance of `fit(block)`, when the estimator has one.
    fn covariance(&self, _block: MatrixView<'_>) -> Option<Result<Matrix>> {
        None
    }

    fn has_covariance(&self) -> bool {
        false
    }
}

/// Options consumed by [`lookup`] when building a registered estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorOptions {
    pub quantile: f64,
    pub intercept: bool,
    /// Fixed KDE bandwidth; Silverman's rule per block when absent.
    pub bandwidth: Option<f64>,
    /// Where the `kde` estimator evaluates the density.
    pub kde_points: Vec<f64>,
}

impl Default for EstimatorOptions {
    fn default() -> Self {
        EstimatorOptions {
            quantile: 0.5,
            intercept: true,
            bandwidth: None,
            kde_points: vec![0.0],
        }
    }
}

/// Names accepted by [`lookup`].
pub const REGISTERED: &[&str] = &["mean", "ols", "quantreg", "kendall-naive", "kendall-knight", "kde"];

/// Builds a registered estimator by name.
pub fn lookup(name: &str, opts: &EstimatorOptions) -> Result<Box<dyn Estimator>> {
    Ok(match name {
        "mean" => Box::new(Mean),
        "ols" => Box::new(Ols::new(opts.intercept)),
        "quantreg" => Box::new(QuantReg::new(opts.quantile, opts.intercept, QuantRegOptions::default())?),
        "kendall-naive" => Box::new(KendallNaive),
        "kendall-knight" => Box::new(KendallKnight),
        "kde" => Box::new(Kde::new(opts.kde_points.clone(), opts.bandwidth)?),
        other => return Err(Error::UnknownEstimator(other.to_string())),
    })
}

/// Predictors and response split out of a regression block.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionData {
    pub x: crate::data::DataMatrix,
    pub y: Vec<f64>,
}

impl RegressionData {
    pub fn new(x: crate::data::DataMatrix, y: Vec<f64>) -> Result<Self> {
        if x.rows() != y.len() {
            return Err(Error::Dimension(format!(
                "{} predictor rows but {} responses",
                x.rows(),
                y.len()
            )));
        }
        Ok(RegressionData { x, y })
    }

    /// Splits a block whose last column is the response.
    pub fn from_block(block: MatrixView<'_>) -> Result<Self> {
        Columns::Regression.check(block.cols())?;
        let p = block.cols() - 1;
        let mut xs = Vec::with_capacity(block.rows() * p);
        let mut y = Vec::with_capacity(block.rows());
        for row in block.iter_rows() {
            xs.extend_from_slice(&row[..p]);
            y.push(row[p]);
        }
        Ok(RegressionData {
            x: crate::data::DataMatrix::new(xs, block.rows(), p)?,
            y,
        })
    }

    /// Joins predictors and response into one table, response last.
    pub fn to_matrix(&self) -> crate::data::DataMatrix {
        let p = self.x.cols();
        let mut values = Vec::with_capacity(self.y.len() * (p + 1));
        for (i, y) in self.y.iter().enumerate() {
            values.extend_from_slice(self.x.row(i));
            values.push(*y);
        }
        crate::data::DataMatrix::new(values, self.y.len(), p + 1).expect("shape is consistent")
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn p(&self) -> usize {
        self.x.cols()
    }

    /// Design row `i`, with a leading 1 when `intercept` is set.
    pub(crate) fn design_row(&self, i: usize, intercept: bool, buf: &mut Vec<f64>) {
        buf.clear();
        if intercept {
            buf.push(1.0);
        }
        buf.extend_from_slice(self.x.row(i));
    }

    pub(crate) fn design_width(&self, intercept: bool) -> usize {
        self.p() + usize::from(intercept)
    }
}
