use std::f64::consts::PI;

use crate::data::MatrixView;
use crate::error::{Error, Result};

use super::{Columns, EstimateVector, Estimator};

/// Gaussian kernel density estimate `(1/nh) Σ φ((t − sᵢ)/h)` at each point.
///
/// Cost is `points.len() × sample.len()` kernel evaluations.
pub fn kde_at(points: &[f64], sample: &[f64], h: f64) -> Result<Vec<f64>> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidInput(format!("bandwidth must be positive, got {h}")));
    }
    if sample.is_empty() {
        return Err(Error::InvalidInput("kde sample is empty".into()));
    }
    let inv_h = 1.0 / h;
    let norm = 1.0 / (sample.len() as f64 * h * (2.0 * PI).sqrt());
    Ok(points
        .iter()
        .map(|&t| {
            let s: f64 = sample
                .iter()
                .map(|&x| {
                    let u = (t - x) * inv_h;
                    (-0.5 * u * u).exp()
                })
                .sum();
            s * norm
        })
        .collect())
}

/// Silverman's rule of thumb, `0.9 · min(sd, IQR/1.34) · n^(-1/5)`.
///
/// When the IQR collapses but the standard deviation does not, the standard
/// deviation is used alone. A sample with zero standard deviation is an
/// error.
pub fn silverman_bandwidth(sample: &[f64]) -> Result<f64> {
    let n = sample.len();
    if n < 2 {
        return Err(Error::InvalidInput("bandwidth needs at least 2 observations".into()));
    }
    let nf = n as f64;
    let mean = sample.iter().sum::<f64>() / nf;
    let var = sample.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (nf - 1.0);
    let sd = var.sqrt();
    if !(sd > 0.0) {
        return Err(Error::ZeroSpread(format!("{n} identical observations")));
    }
    let mut sorted = sample.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
    let spread = match sd.min(iqr / 1.34) {
        s if s > 0.0 => s,
        _ => sd,
    };
    Ok(0.9 * spread * nf.powf(-0.2))
}

// Linear interpolation between order statistics (Hyndman–Fan type 7).
fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Density of column 0 at fixed query points.
#[derive(Debug, Clone, PartialEq)]
pub struct Kde {
    points: Vec<f64>,
    bandwidth: Option<f64>,
}

impl Kde {
    /// `bandwidth: None` applies Silverman's rule to each block.
    pub fn new(points: Vec<f64>, bandwidth: Option<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidInput("kde needs at least one query point".into()));
        }
        if let Some(h) = bandwidth {
            if !(h > 0.0) {
                return Err(Error::InvalidInput(format!("bandwidth must be positive, got {h}")));
            }
        }
        Ok(Kde { points, bandwidth })
    }
}

impl Estimator for Kde {
    fn name(&self) -> &str {
        "kde"
    }

    fn columns(&self) -> Columns {
        Columns::Exactly(1)
    }

    fn fit(&self, block: MatrixView<'_>) -> Result<EstimateVector> {
        Columns::Exactly(1).check(block.cols())?;
        let sample = block.as_slice();
        let h = match self.bandwidth {
            Some(h) => h,
            None => silverman_bandwidth(sample)?,
        };
        EstimateVector::new(kde_at(&self.points, sample, h)?)
    }
}
