//! Chunk averaging: fit the estimator on every chunk, then combine.
//!
//! The combined estimate is the size-weighted average of the chunk estimates.
//! Two covariance summaries are reported. The scatter covariance is
//! `(1/r) Σ (θ̃ₘ − θ̄)(θ̃ₘ − θ̄)ᵀ`, which tracks the covariance of a single chunk
//! estimate; [`CaResult::theta_bar_cov`] divides it by `r` to estimate the
//! covariance of θ̄ itself. The plug-in covariance `Σ wₘ² Cₘ` is available
//! when the estimator reports per-chunk covariances `Cₘ`.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::data::MatrixView;
use crate::error::{Error, Result};
use crate::estimators::{EstimateVector, Estimator};
use crate::executor::{timed_map_chunks, ExecPolicy};
use crate::linalg::Matrix;
use crate::plan::ChunkPlan;

/// Which covariance the standard errors were taken from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeSource {
    Plugin,
    Scatter,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaResult {
    pub theta_bar: EstimateVector,
    pub chunk_estimates: Vec<EstimateVector>,
    pub scatter_cov: Matrix,
    pub plugin_cov: Option<Matrix>,
    pub std_errors: Vec<f64>,
    pub plan: ChunkPlan,
    pub se_source: SeSource,
}

impl CaResult {
    /// Scatter covariance divided by `r`: the estimated covariance of θ̄.
    pub fn theta_bar_cov(&self) -> Matrix {
        self.scatter_cov.scaled(1.0 / self.plan.r() as f64)
    }
}

/// Estimate from the whole sample at once.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FullEstimate {
    pub theta_hat: EstimateVector,
    pub cov: Option<Matrix>,
}

/// `Σ wₘ θ̃ₘ`, componentwise.
pub fn combine_estimates(chunk_estimates: &[EstimateVector], weights: &[f64]) -> Result<EstimateVector> {
    let first = chunk_estimates
        .first()
        .ok_or_else(|| Error::Combination("no chunk estimates".into()))?;
    if weights.len() != chunk_estimates.len() {
        return Err(Error::Combination(format!(
            "{} estimates but {} weights",
            chunk_estimates.len(),
            weights.len()
        )));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Combination(format!("weights sum to {total}, not 1")));
    }
    let p = first.dim();
    if let Some(m) = chunk_estimates.iter().position(|e| e.dim() != p) {
        return Err(Error::Combination(format!(
            "chunk {m} has dimension {} but chunk 0 has {p}",
            chunk_estimates[m].dim()
        )));
    }
    // Seeding with the first weighted term keeps r = 1 bit-identical to the input.
    let mut acc: Vec<f64> = first.values().iter().map(|v| weights[0] * v).collect();
    for (est, w) in chunk_estimates.iter().zip(weights).skip(1) {
        for (a, v) in acc.iter_mut().zip(est.values()) {
            *a += w * v;
        }
    }
    EstimateVector::new(acc)
}

/// `(1/r) Σ (θ̃ₘ − θ̄)(θ̃ₘ − θ̄)ᵀ`.
pub fn scatter_covariance(chunk_estimates: &[EstimateVector], theta_bar: &EstimateVector) -> Result<Matrix> {
    if chunk_estimates.is_empty() {
        return Err(Error::InvalidInput("scatter covariance needs at least one chunk".into()));
    }
    let p = theta_bar.dim();
    let mut cov = Matrix::zeros(p, p);
    let mut dev = vec![0.0; p];
    for (m, est) in chunk_estimates.iter().enumerate() {
        if est.dim() != p {
            return Err(Error::Dimension(format!(
                "chunk {m} has dimension {} but theta_bar has {p}",
                est.dim()
            )));
        }
        for (d, (a, b)) in dev.iter_mut().zip(est.values().iter().zip(theta_bar.values())) {
            *d = a - b;
        }
        for i in 0..p {
            for j in i..p {
                cov.add_at(i, j, dev[i] * dev[j]);
            }
        }
    }
    cov.symmetrize_from_upper();
    Ok(cov.scaled(1.0 / chunk_estimates.len() as f64))
}

/// `Σ wₘ² Cₘ`.
pub fn plugin_covariance(chunk_covs: &[Matrix], weights: &[f64]) -> Result<Matrix> {
    let first = chunk_covs
        .first()
        .ok_or_else(|| Error::InvalidInput("plug-in covariance needs at least one chunk".into()))?;
    if weights.len() != chunk_covs.len() {
        return Err(Error::Dimension(format!(
            "{} covariances but {} weights",
            chunk_covs.len(),
            weights.len()
        )));
    }
    if !first.is_square() {
        return Err(Error::Dimension("chunk covariance is not square".into()));
    }
    let mut acc = Matrix::zeros(first.rows(), first.cols());
    for (m, (c, w)) in chunk_covs.iter().zip(weights).enumerate() {
        acc.add_scaled(w * w, c)
            .map_err(|e| Error::Dimension(format!("chunk {m}: {e}")))?;
    }
    Ok(acc)
}

/// `Σ|θ̄ᵢ − θ̂ᵢ| / Σ|θ̂ᵢ|`.
pub fn relative_l1_diff(theta_bar: &EstimateVector, theta_hat: &EstimateVector) -> Result<f64> {
    if theta_bar.dim() != theta_hat.dim() {
        return Err(Error::Dimension(format!(
            "{} vs {} components",
            theta_bar.dim(),
            theta_hat.dim()
        )));
    }
    let denom: f64 = theta_hat.values().iter().map(|v| v.abs()).sum();
    if denom == 0.0 {
        return Err(Error::InvalidInput("reference estimate is the zero vector".into()));
    }
    let num: f64 = theta_bar
        .values()
        .iter()
        .zip(theta_hat.values())
        .map(|(a, b)| (a - b).abs())
        .sum();
    Ok(num / denom)
}

/// Runs the estimator once on all of `data`.
pub fn full_estimate(data: MatrixView<'_>, estimator: &dyn Estimator) -> Result<FullEstimate> {
    estimator.columns().check(data.cols())?;
    let theta_hat = estimator.fit(data)?;
    let cov = estimator.covariance(data).transpose()?;
    Ok(FullEstimate { theta_hat, cov })
}

/// Chunk-averaged estimate using a pool of `workers` threads.
pub fn ca_estimate(
    data: MatrixView<'_>,
    estimator: &dyn Estimator,
    plan: &ChunkPlan,
    workers: usize,
) -> Result<CaResult> {
    let policy = ExecPolicy::parallel(workers)?;
    ca_estimate_timed(data, estimator, plan, &policy).map(|t| t.result)
}

#[derive(Debug, Clone)]
pub struct TimedCa {
    pub result: CaResult,
    /// Wall time of the chunk phase.
    pub wall: Duration,
    pub per_chunk: Vec<Duration>,
}

/// As [`ca_estimate`] with an explicit policy, reporting chunk timings.
pub fn ca_estimate_timed(
    data: MatrixView<'_>,
    estimator: &dyn Estimator,
    plan: &ChunkPlan,
    policy: &ExecPolicy,
) -> Result<TimedCa> {
    estimator.columns().check(data.cols())?;
    let with_cov = estimator.has_covariance();
    let run = timed_map_chunks(
        data,
        plan,
        |block| {
            let est = estimator.fit(block)?;
            let cov = if with_cov {
                estimator.covariance(block).transpose()?
            } else {
                None
            };
            Ok((est, cov))
        },
        policy,
    )?;

    let (chunk_estimates, covs): (Vec<EstimateVector>, Vec<Option<Matrix>>) = run.results.into_iter().unzip();
    let theta_bar = combine_estimates(&chunk_estimates, plan.weights())?;
    let scatter_cov = scatter_covariance(&chunk_estimates, &theta_bar)?;
    let plugin_cov = match covs.into_iter().collect::<Option<Vec<_>>>() {
        Some(cs) if with_cov => Some(plugin_covariance(&cs, plan.weights())?),
        _ => None,
    };
    let (se_cov, se_source) = match &plugin_cov {
        Some(c) => (c.clone(), SeSource::Plugin),
        None => (scatter_cov.scaled(1.0 / plan.r() as f64), SeSource::Scatter),
    };
    let std_errors = se_cov.diagonal().into_iter().map(|v| v.max(0.0).sqrt()).collect();

    Ok(TimedCa {
        result: CaResult {
            theta_bar,
            chunk_estimates,
            scatter_cov,
            plugin_cov,
            std_errors,
            plan: plan.clone(),
            se_source,
        },
        wall: run.wall,
        per_chunk: run.per_chunk,
    })
}
