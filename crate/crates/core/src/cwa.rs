//! Chunked density estimation without averaging: each observation's density
//! is estimated from the observations in its own chunk only.

use std::time::Instant;

use crate::bench::{median, BenchRecord};
use crate::ca::relative_l1_diff;
use crate::data::MatrixView;
use crate::datagen::gen_normal;
use crate::error::{Error, Result};
use crate::estimators::{kde_at, silverman_bandwidth, EstimateVector};
use crate::executor::{map_chunks, ExecPolicy};
use crate::plan::ChunkPlan;

/// How each chunk picks its kernel bandwidth.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum BandwidthRule {
    /// Silverman's rule on the chunk's own observations.
    #[default]
    PerChunk,
    /// Silverman's rule on the whole sample, shared by every chunk.
    Global,
    Fixed(f64),
}

/// Density at every observation, estimated from that observation's chunk.
/// Cost is `Σ kₘ²` kernel evaluations instead of `n²`.
pub fn cwa_density(
    sample: &[f64],
    plan: &ChunkPlan,
    rule: BandwidthRule,
    policy: &ExecPolicy,
) -> Result<Vec<f64>> {
    if plan.n() != sample.len() {
        return Err(Error::InvalidPlan(format!(
            "plan covers {} observations but the sample has {}",
            plan.n(),
            sample.len()
        )));
    }
    if sample.len() < 2 * plan.r() {
        return Err(Error::InvalidInput(format!(
            "need at least 2 observations per chunk (n = {}, r = {})",
            sample.len(),
            plan.r()
        )));
    }
    let shared = match rule {
        BandwidthRule::PerChunk => None,
        BandwidthRule::Global => Some(silverman_bandwidth(sample)?),
        BandwidthRule::Fixed(h) => Some(h),
    };
    let per_chunk = map_chunks(
        MatrixView::column_of(sample),
        plan,
        |block| {
            let chunk = block.as_slice();
            let h = match shared {
                Some(h) => h,
                None => silverman_bandwidth(chunk)?,
            };
            kde_at(chunk, chunk, h)
        },
        policy,
    )?;
    Ok(per_chunk.concat())
}

/// Full-sample KDE at every observation, the baseline `cwa_density` replaces.
pub fn full_density(sample: &[f64]) -> Result<Vec<f64>> {
    kde_at(sample, sample, silverman_bandwidth(sample)?)
}

/// Times full-sample KDE at all `n` points against `cwa_density` with
/// `r` chunks on `workers` threads, over `n` standard normal draws. One
/// warmup, then the median of `reps` interleaved runs.
pub fn cwa_speedup_probe(n: usize, r: usize, workers: usize, reps: usize, seed: u64) -> Result<BenchRecord> {
    if reps == 0 {
        return Err(Error::InvalidInput("reps must be at least 1".into()));
    }
    let sample = gen_normal(n, seed);
    let plan = crate::plan::make_chunk_plan(n, r)?;
    let policy = ExecPolicy::parallel(workers)?;

    let mut full = full_density(&sample)?;
    let mut chunked = cwa_density(&sample, &plan, BandwidthRule::PerChunk, &policy)?;
    let mut fe_times = Vec::with_capacity(reps);
    let mut ca_times = Vec::with_capacity(reps);
    for _ in 0..reps {
        let t = Instant::now();
        full = full_density(&sample)?;
        fe_times.push(t.elapsed().as_secs_f64());

        let t = Instant::now();
        chunked = cwa_density(&sample, &plan, BandwidthRule::PerChunk, &policy)?;
        ca_times.push(t.elapsed().as_secs_f64());
    }

    let rel = relative_l1_diff(&EstimateVector::new(chunked)?, &EstimateVector::new(full)?)?;
    Ok(BenchRecord::new(
        "cwa-kde",
        n,
        0,
        r,
        workers,
        median(fe_times),
        median(ca_times),
        rel,
        Vec::new(),
    ))
}
