use crate::data::MatrixView;
use crate::error::{Error, Result};
use crate::linalg::{Cholesky, Matrix, NormalEquations};

use super::{Columns, EstimateVector, Estimator, RegressionData};

/// Least-squares coefficients from the normal equations `XᵀX β = Xᵀy`,
/// solved by Cholesky. With `intercept` the first coefficient is the
/// intercept. Rank-deficient designs fail with [`Error::SingularDesign`].
pub fn ols_fit(data: &RegressionData, intercept: bool) -> Result<EstimateVector> {
    let (_, beta) = solve_normal(data, intercept)?;
    EstimateVector::new(beta)
}

/// `s² (XᵀX)⁻¹`, with `s²` the residual mean square on `n - p` degrees of
/// freedom.
pub fn ols_covariance(data: &RegressionData, intercept: bool, beta: &EstimateVector) -> Result<Matrix> {
    let width = data.design_width(intercept);
    if beta.dim() != width {
        return Err(Error::Dimension(format!(
            "{} coefficients for a design of width {width}",
            beta.dim()
        )));
    }
    if data.n() <= width {
        return Err(Error::InvalidInput(format!(
            "residual variance needs n > {width}, got n = {}",
            data.n()
        )));
    }
    let (chol, _) = solve_normal(data, intercept)?;
    let mut rss = 0.0;
    let mut row = Vec::with_capacity(width);
    for i in 0..data.n() {
        data.design_row(i, intercept, &mut row);
        let fitted: f64 = row.iter().zip(beta.values()).map(|(x, b)| x * b).sum();
        let e = data.y[i] - fitted;
        rss += e * e;
    }
    let s2 = rss / (data.n() - width) as f64;
    Ok(chol.inverse().scaled(s2))
}

fn solve_normal(data: &RegressionData, intercept: bool) -> Result<(Cholesky, Vec<f64>)> {
    let width = data.design_width(intercept);
    if width == 0 {
        return Err(Error::InvalidInput("empty design".into()));
    }
    let mut ne = NormalEquations::new(width);
    let mut row = Vec::with_capacity(width);
    for i in 0..data.n() {
        data.design_row(i, intercept, &mut row);
        ne.add_row(&row, data.y[i], 1.0);
    }
    let (xtx, xty) = ne.finish();
    let chol = Cholesky::new(&xtx)?;
    let beta = chol.solve(&xty);
    Ok((chol, beta))
}

/// Linear regression; the last column of each block is the response.
#[derive(Debug, Clone, Copy)]
pub struct Ols {
    intercept: bool,
}

impl Ols {
    pub fn new(intercept: bool) -> Self {
        Ols { intercept }
    }
}

impl Default for Ols {
    fn default() -> Self {
        Ols::new(true)
    }
}

impl Estimator for Ols {
    fn name(&self) -> &str {
        "ols"
    }

    fn columns(&self) -> Columns {
        Columns::Regression
    }

    fn fit(&self, block: MatrixView<'_>) -> Result<EstimateVector> {
        ols_fit(&RegressionData::from_block(block)?, self.intercept)
    }

    fn covariance(&self, block: MatrixView<'_>) -> Option<Result<Matrix>> {
        Some(RegressionData::from_block(block).and_then(|data| {
            let beta = ols_fit(&data, self.intercept)?;
            ols_covariance(&data, self.intercept, &beta)
        }))
    }

    fn has_covariance(&self) -> bool {
        true
    }
}
