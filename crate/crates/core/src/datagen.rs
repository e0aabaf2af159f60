//! Seeded synthetic data for the simulation designs.
//!
//! Every generator draws from xoshiro256++ seeded through SplitMix64
//! (`Xoshiro256PlusPlus::seed_from_u64`). A uniform on the open interval
//! (0, 1) is `((next_u64 >> 11) + 0.5) · 2⁻⁵³`, and normals come from the
//! Box–Muller transform applied to consecutive uniform pairs, cosine branch
//! first. Any implementation following these three rules reproduces the
//! same streams.

use std::fmt;
use std::str::FromStr;

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::estimators::RegressionData;

/// Algorithm name written into generated-file metadata.
pub const PRNG_NAME: &str = "xoshiro256++/splitmix64-seed";

/// Seeded uniform / normal source.
#[derive(Debug, Clone)]
pub struct Xoshiro {
    rng: Xoshiro256PlusPlus,
    spare_normal: Option<f64>,
}

impl Xoshiro {
    pub fn new(seed: u64) -> Self {
        Xoshiro {
            rng: Xoshiro256PlusPlus::seed_from_u64(seed),
            spare_normal: None,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform on the open interval (0, 1).
    pub fn uniform(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal by Box–Muller.
    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        let u1 = self.uniform();
        let u2 = self.uniform();
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = 2.0 * std::f64::consts::PI * u2;
        self.spare_normal = Some(radius * angle.sin());
        radius * angle.cos()
    }

    /// Uniform integer in `[lo, hi)`.
    pub fn range(&mut self, lo: usize, hi: usize) -> usize {
        assert!(hi > lo);
        lo + (self.uniform() * (hi - lo) as f64) as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GenKind {
    Kendall,
    Regression,
    Normal,
}

impl fmt::Display for GenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GenKind::Kendall => "kendall",
            GenKind::Regression => "regression",
            GenKind::Normal => "normal",
        })
    }
}

impl FromStr for GenKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kendall" => Ok(GenKind::Kendall),
            "regression" => Ok(GenKind::Regression),
            "normal" => Ok(GenKind::Normal),
            other => Err(Error::InvalidInput(format!(
                "unknown data kind `{other}` (expected kendall, regression or normal)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenSpec {
    pub kind: GenKind,
    pub n: usize,
    /// Predictor count; only meaningful for regression data.
    #[serde(default)]
    pub p: usize,
    pub seed: u64,
}

impl GenSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidInput("n must be at least 1".into()));
        }
        if self.kind == GenKind::Regression {
            if self.p == 0 {
                return Err(Error::InvalidInput("regression data needs p >= 1".into()));
            }
            if self.n <= self.p {
                return Err(Error::InvalidInput(format!(
                    "regression data needs n > p (n = {}, p = {})",
                    self.n, self.p
                )));
            }
        }
        Ok(())
    }

    /// Generates the table: `(x, y)` rows for kendall, `x₁..x_p, y` for
    /// regression, one column for normal.
    pub fn generate(&self) -> Result<DataMatrix> {
        self.validate()?;
        Ok(match self.kind {
            GenKind::Kendall => gen_kendall_pairs(self.n, self.seed),
            GenKind::Regression => gen_regression(self.n, self.p, self.seed)?.to_matrix(),
            GenKind::Normal => DataMatrix::from_column(gen_normal(self.n, self.seed)),
        })
    }

    /// One-line metadata comment for generated CSV files.
    pub fn metadata_line(&self) -> String {
        format!(
            "# kind={}, n={}, p={}, seed={}, prng={}",
            self.kind, self.n, self.p, self.seed, PRNG_NAME
        )
    }
}

/// Rows `(U₁, 0.2·U₁ + U₂)` with independent uniforms.
pub fn gen_kendall_pairs(n: usize, seed: u64) -> DataMatrix {
    let mut rng = Xoshiro::new(seed);
    let mut values = Vec::with_capacity(2 * n);
    for _ in 0..n {
        let u1 = rng.uniform();
        let u2 = rng.uniform();
        values.push(u1);
        values.push(0.2 * u1 + u2);
    }
    DataMatrix::new(values, n, 2).expect("2n values")
}

/// `p` uniform predictors per row and `Y = X₁ + … + X_p + 0.2·U`.
pub fn gen_regression(n: usize, p: usize, seed: u64) -> Result<RegressionData> {
    if p == 0 || n <= p {
        return Err(Error::InvalidInput(format!(
            "regression data needs p >= 1 and n > p (n = {n}, p = {p})"
        )));
    }
    let mut rng = Xoshiro::new(seed);
    let mut xs = Vec::with_capacity(n * p);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let mut sum = 0.0;
        for _ in 0..p {
            let x = rng.uniform();
            sum += x;
            xs.push(x);
        }
        y.push(sum + 0.2 * rng.uniform());
    }
    RegressionData::new(DataMatrix::new(xs, n, p)?, y)
}

/// `n` standard normal draws.
pub fn gen_normal(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = Xoshiro::new(seed);
    (0..n).map(|_| rng.normal()).collect()
}
