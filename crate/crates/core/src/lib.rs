//! Chunk-averaged statistical estimation.
//!
//! Split an i.i.d. sample into `r` contiguous chunks, run the full estimator
//! on each chunk in parallel, and average the chunk estimates with weights
//! proportional to chunk size. The averaged estimate has the same asymptotic
//! distribution as the estimator run on all the data, and for estimators that
//! cost `O(n^c)` with `c > 1` it is cheaper even on a single core.
//!
//! ```
//! use chunkforge::{ca_estimate, full_estimate, make_chunk_plan, relative_l1_diff};
//! use chunkforge::datagen::gen_kendall_pairs;
//! use chunkforge::estimators::KendallKnight;
//!
//! let data = gen_kendall_pairs(10_000, 1);
//! let plan = make_chunk_plan(data.rows(), 4).unwrap();
//! let ca = ca_estimate(data.view(), &KendallKnight, &plan, 4).unwrap();
//! let fe = full_estimate(data.view(), &KendallKnight).unwrap();
//! assert!(relative_l1_diff(&ca.theta_bar, &fe.theta_hat).unwrap() < 0.1);
//! ```

pub mod bench;
pub mod ca;
pub mod cwa;
pub mod data;
pub mod datagen;
pub mod error;
pub mod estimators;
pub mod executor;
pub mod io;
pub mod linalg;
pub mod plan;
pub mod verify;

pub use ca::{
    ca_estimate, ca_estimate_timed, combine_estimates, full_estimate, plugin_covariance, relative_l1_diff,
    scatter_covariance, CaResult, FullEstimate, SeSource,
};
pub use data::{DataMatrix, MatrixView};
pub use error::{Error, Result};
pub use estimators::{EstimateVector, Estimator};
pub use executor::{ExecPolicy, ExecMode};
pub use linalg::Matrix;
pub use plan::{make_chunk_plan, ChunkPlan};
