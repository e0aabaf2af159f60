//! Linear quantile regression by iteratively reweighted least squares.
//!
//! The pinball loss is `ρ_q(u) = |u|/2 + (q − ½)u`. Each iteration majorizes
//! `|u|` at the current residual `r` by `u²/(2a) + a/2` with
//! `a = max(|r|, ε)`, which leaves the weighted normal equations
//!
//! ```text
//! Xᵀ W X β = Xᵀ W y + (2q − 1) Xᵀ 1,    W = diag(1 / max(|rᵢ|, ε))
//! ```
//!
//! For `q = ½` the extra term vanishes and this is plain IRLS for least
//! absolute deviations. The iterate with the lowest pinball loss is returned,
//! so the result is never worse than the least-squares start.

use crate::data::MatrixView;
use crate::error::{Error, Result};
use crate::linalg::{Cholesky, NormalEquations};

use super::{ols_fit, Columns, EstimateVector, Estimator, RegressionData};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantRegOptions {
    /// Floor on `|residual|` when forming weights.
    pub epsilon: f64,
    /// Converged once the largest coefficient change drops below this.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub intercept: bool,
}

impl Default for QuantRegOptions {
    fn default() -> Self {
        QuantRegOptions {
            epsilon: 1e-6,
            tolerance: 1e-8,
            max_iterations: 200,
            intercept: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantRegFit {
    pub coefficients: EstimateVector,
    /// Pinball loss of `coefficients`.
    pub loss: f64,
    pub iterations: usize,
    /// False when the iteration cap was hit first; the best iterate is
    /// still returned.
    pub converged: bool,
}

/// `Σ ρ_q(rᵢ)` over the given residuals.
pub fn pinball_loss(residuals: impl IntoIterator<Item = f64>, q: f64) -> f64 {
    residuals
        .into_iter()
        .map(|r| if r >= 0.0 { q * r } else { (q - 1.0) * r })
        .sum()
}

fn residual_loss(data: &RegressionData, intercept: bool, beta: &[f64], q: f64, resid: &mut Vec<f64>) -> f64 {
    resid.clear();
    let mut row = Vec::with_capacity(beta.len());
    for i in 0..data.n() {
        data.design_row(i, intercept, &mut row);
        let fitted: f64 = row.iter().zip(beta).map(|(x, b)| x * b).sum();
        resid.push(data.y[i] - fitted);
    }
    pinball_loss(resid.iter().copied(), q)
}

/// Coefficients minimizing the pinball loss at quantile `q`.
pub fn quantile_reg_fit(data: &RegressionData, q: f64, opts: &QuantRegOptions) -> Result<QuantRegFit> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::InvalidInput(format!("quantile must lie in (0, 1), got {q}")));
    }
    if !(opts.epsilon > 0.0) {
        return Err(Error::InvalidInput("epsilon must be positive".into()));
    }
    let intercept = opts.intercept;
    let width = data.design_width(intercept);
    let mut beta = ols_fit(data, intercept)?.into_vec();
    let mut resid = Vec::with_capacity(data.n());
    let mut best_loss = residual_loss(data, intercept, &beta, q, &mut resid);
    let mut best = beta.clone();

    let tilt = 2.0 * q - 1.0;
    let mut row = Vec::with_capacity(width);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iterations {
        iterations += 1;
        let mut ne = NormalEquations::new(width);
        for (i, r) in resid.iter().enumerate() {
            data.design_row(i, intercept, &mut row);
            ne.add_row(&row, data.y[i], 1.0 / r.abs().max(opts.epsilon));
        }
        let (xtwx, mut rhs) = ne.finish();
        if tilt != 0.0 {
            for i in 0..data.n() {
                data.design_row(i, intercept, &mut row);
                for (acc, x) in rhs.iter_mut().zip(&row) {
                    *acc += tilt * x;
                }
            }
        }
        let next = Cholesky::new(&xtwx)?.solve(&rhs);
        let change = next
            .iter()
            .zip(&beta)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        beta = next;
        let loss = residual_loss(data, intercept, &beta, q, &mut resid);
        if loss < best_loss {
            best_loss = loss;
            best.clone_from(&beta);
        }
        if change < opts.tolerance {
            converged = true;
            break;
        }
    }

    Ok(QuantRegFit {
        coefficients: EstimateVector::new(best)?,
        loss: best_loss,
        iterations,
        converged,
    })
}

/// Quantile regression; the last column of each block is the response.
#[derive(Debug, Clone, Copy)]
pub struct QuantReg {
    q: f64,
    opts: QuantRegOptions,
}

impl QuantReg {
    pub fn new(q: f64, intercept: bool, opts: QuantRegOptions) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::InvalidInput(format!("quantile must lie in (0, 1), got {q}")));
        }
        Ok(QuantReg {
            q,
            opts: QuantRegOptions { intercept, ..opts },
        })
    }

    pub fn quantile(&self) -> f64 {
        self.q
    }
}

impl Estimator for QuantReg {
    fn name(&self) -> &str {
        "quantreg"
    }

    fn columns(&self) -> Columns {
        Columns::Regression
    }

    fn fit(&self, block: MatrixView<'_>) -> Result<EstimateVector> {
        let data = RegressionData::from_block(block)?;
        Ok(quantile_reg_fit(&data, self.q, &self.opts)?.coefficients)
    }
}
