use crate::data::MatrixView;
use crate::error::{Error, Result};
use crate::linalg::Matrix;

use super::{Columns, EstimateVector, Estimator};

/// Columnwise arithmetic mean.
pub fn mean_estimate(data: MatrixView<'_>) -> Result<EstimateVector> {
    if data.rows() == 0 {
        return Err(Error::InvalidInput("mean of an empty block".into()));
    }
    let mut sums = vec![0.0; data.cols()];
    for row in data.iter_rows() {
        for (s, v) in sums.iter_mut().zip(row) {
            *s += v;
        }
    }
    let n = data.rows() as f64;
    EstimateVector::new(sums.into_iter().map(|s| s / n).collect())
}

/// Sample mean; its covariance is the sample covariance divided by `n`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Mean;

impl Estimator for Mean {
    fn name(&self) -> &str {
        "mean"
    }

    fn columns(&self) -> Columns {
        Columns::Any
    }

    fn fit(&self, block: MatrixView<'_>) -> Result<EstimateVector> {
        mean_estimate(block)
    }

    fn covariance(&self, block: MatrixView<'_>) -> Option<Result<Matrix>> {
        Some(mean_covariance(block))
    }

    fn has_covariance(&self) -> bool {
        true
    }
}

// A single row has no spread, so it reports a zero matrix.
fn mean_covariance(block: MatrixView<'_>) -> Result<Matrix> {
    let mean = mean_estimate(block)?;
    let mean = mean.values();
    let d = block.cols();
    let mut cov = Matrix::zeros(d, d);
    for row in block.iter_rows() {
        for i in 0..d {
            let di = row[i] - mean[i];
            for j in i..d {
                cov.add_at(i, j, di * (row[j] - mean[j]));
            }
        }
    }
    cov.symmetrize_from_upper();
    let n = block.rows() as f64;
    Ok(cov.scaled(1.0 / ((n - 1.0).max(1.0) * n)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::DataMatrix;

    #[test]
    fn single_column() {
        let m = DataMatrix::from_column(vec![1.0, 2.0, 3.0]);
        assert_eq!(mean_estimate(m.view()).unwrap().values(), &[2.0]);
    }

    #[test]
    fn two_columns() {
        let m = DataMatrix::from_rows(&[vec![1.0, 10.0], vec![3.0, 30.0]]).unwrap();
        assert_eq!(mean_estimate(m.view()).unwrap().values(), &[2.0, 20.0]);
    }

    #[test]
    fn constant_column() {
        let m = DataMatrix::from_column(vec![7.25; 9]);
        assert_eq!(mean_estimate(m.view()).unwrap().values(), &[7.25]);
    }

    #[test]
    fn empty_is_an_error() {
        let m = DataMatrix::new(vec![], 0, 2).unwrap();
        assert!(mean_estimate(m.view()).is_err());
    }

    #[test]
    fn covariance_of_the_mean() {
        // sample variance of [1,2,3,4] is 5/3; divided by n = 4.
        let m = DataMatrix::from_column(vec![1.0, 2.0, 3.0, 4.0]);
        let c = Mean.covariance(m.view()).unwrap().unwrap();
        assert!((c.get(0, 0) - 5.0 / 12.0).abs() < 1e-15);
    }
}
