//! Partitioning `n` observations into `r` contiguous chunks.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How `n` rows are split into `r` contiguous chunks, and the weight each
/// chunk estimate carries when averaged.
///
/// The first `r - 1` chunks hold `k = ⌊n/r⌋` rows and the last holds the
/// remaining `n - (r-1)k`. Weights are proportional to chunk size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "PlanWire", try_from = "PlanWire")]
pub struct ChunkPlan {
    n: usize,
    ranges: Vec<Range<usize>>,
    weights: Vec<f64>,
}

/// Builds the plan for `n` rows and `r` chunks.
pub fn make_chunk_plan(n: usize, r: usize) -> Result<ChunkPlan> {
    if n == 0 {
        return Err(Error::InvalidPlan("n must be at least 1".into()));
    }
    if r == 0 {
        return Err(Error::InvalidPlan("r must be at least 1".into()));
    }
    if r > n {
        return Err(Error::InvalidPlan(format!(
            "r = {r} exceeds n = {n}; every chunk needs a row"
        )));
    }
    let k = n / r;
    let mut sizes = vec![k; r];
    sizes[r - 1] = n - (r - 1) * k;
    Ok(ChunkPlan::from_sizes(n, &sizes))
}

impl ChunkPlan {
    fn from_sizes(n: usize, sizes: &[usize]) -> ChunkPlan {
        let mut ranges = Vec::with_capacity(sizes.len());
        let mut start = 0;
        for &s in sizes {
            ranges.push(start..start + s);
            start += s;
        }
        let weights = sizes.iter().map(|&s| s as f64 / n as f64).collect();
        ChunkPlan { n, ranges, weights }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of chunks.
    pub fn r(&self) -> usize {
        self.ranges.len()
    }

    pub fn ranges(&self) -> &[Range<usize>] {
        &self.ranges
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.ranges.iter().map(Range::len).collect()
    }

    /// True when every chunk has the same size.
    pub fn is_even(&self) -> bool {
        self.n.is_multiple_of(self.r())
    }

    /// Chunk index holding row `i`.
    pub fn chunk_of(&self, i: usize) -> usize {
        let k = self.n / self.r();
        (i / k).min(self.r() - 1)
    }
}

#[derive(Serialize, Deserialize)]
struct PlanWire {
    n: usize,
    r: usize,
    sizes: Vec<usize>,
    weights: Vec<f64>,
}

impl From<ChunkPlan> for PlanWire {
    fn from(p: ChunkPlan) -> Self {
        PlanWire {
            n: p.n,
            r: p.r(),
            sizes: p.sizes(),
            weights: p.weights,
        }
    }
}

impl TryFrom<PlanWire> for ChunkPlan {
    type Error = Error;

    fn try_from(w: PlanWire) -> Result<Self> {
        let plan = make_chunk_plan(w.n, w.r)?;
        if plan.sizes() != w.sizes {
            return Err(Error::InvalidPlan(format!(
                "sizes {:?} do not match the contiguous split of n = {} into r = {}",
                w.sizes, w.n, w.r
            )));
        }
        if w.weights.len() != plan.r()
            || plan.weights.iter().zip(&w.weights).any(|(a, b)| (a - b).abs() > 1e-12)
        {
            return Err(Error::InvalidPlan("weights are not proportional to sizes".into()));
        }
        Ok(plan)
    }
}
