//! Fast self-checks: equivalences between independent computation routes
//! that must hold on any correct build.

use std::time::{Duration, Instant};

use crate::ca::{ca_estimate, full_estimate, relative_l1_diff};
use crate::data::DataMatrix;
use crate::datagen::{gen_kendall_pairs, gen_normal, gen_regression, Xoshiro};
use crate::error::Result;
use crate::estimators::{
    count_inversions, kendall_tau_knight, kendall_tau_naive, lookup, EstimatorOptions, REGISTERED,
};
use crate::plan::make_chunk_plan;

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl Check {
    fn run(name: &'static str, f: impl FnOnce() -> Result<std::result::Result<String, String>>) -> Check {
        let t = Instant::now();
        let (passed, detail) = match f() {
            Ok(Ok(d)) => (true, d),
            Ok(Err(d)) => (false, d),
            Err(e) => (false, format!("error: {e}")),
        };
        Check {
            name,
            passed,
            detail,
            elapsed: t.elapsed(),
        }
    }
}

/// The common weight of the first `r − 1` chunks that minimizes the
/// asymptotic variance of the weighted average, and the last chunk's weight.
fn lambda_weights(n: usize, r: usize) -> Vec<f64> {
    let k = (n / r) as f64;
    let k_last = (n - (r - 1) * (n / r)) as f64;
    let lambda = 1.0 / ((r - 1) as f64 + k_last / k);
    let mut w = vec![lambda; r];
    w[r - 1] = 1.0 - (r - 1) as f64 * lambda;
    w
}

pub fn check_weight_identity() -> Check {
    Check::run("chunk weights equal the variance-optimal lambda weights", || {
        let mut rng = Xoshiro::new(2024);
        let mut cases = vec![(10, 3)];
        for _ in 0..100 {
            let n = rng.range(1, 100_000);
            let r = rng.range(1, n.min(500) + 1);
            cases.push((n, r));
        }
        let mut worst = 0.0_f64;
        for &(n, r) in &cases {
            let plan = make_chunk_plan(n, r)?;
            for (a, b) in plan.weights().iter().zip(lambda_weights(n, r)) {
                worst = worst.max((a - b).abs());
            }
        }
        Ok(if worst <= 1e-12 {
            Ok(format!("{} plans, max |diff| = {worst:.1e}", cases.len()))
        } else {
            Err(format!("max |diff| = {worst:.3e} > 1e-12"))
        })
    })
}

fn distinct_values(rng: &mut Xoshiro, n: usize) -> Vec<f64> {
    // A random permutation of 0..n, scaled, is tie-free by construction.
    let mut v: Vec<f64> = (0..n).map(|i| i as f64 * 0.37 - 5.0).collect();
    for i in (1..n).rev() {
        v.swap(i, rng.range(0, i + 1));
    }
    v
}

pub fn check_kendall_paths() -> Check {
    Check::run("kendall-knight equals kendall-naive on tie-free data", || {
        let mut rng = Xoshiro::new(77);
        for case in 0..200 {
            let n = rng.range(2, 501);
            let x = distinct_values(&mut rng, n);
            let y = distinct_values(&mut rng, n);
            let a = kendall_tau_knight(&x, &y)?.values()[0];
            let b = kendall_tau_naive(&x, &y)?.values()[0];
            if a.to_bits() != b.to_bits() {
                return Ok(Err(format!("instance {case} (n = {n}): {a} vs {b}")));
            }
        }
        Ok(Ok("200 instances, bitwise equal".into()))
    })
}

pub fn check_inversion_symmetry() -> Check {
    Check::run("inversions(v) + inversions(reverse v) = n(n-1)/2", || {
        let mut rng = Xoshiro::new(5);
        for _ in 0..50 {
            let n = rng.range(0, 400);
            let v = distinct_values(&mut rng, n);
            let mut rev = v.clone();
            rev.reverse();
            let total = count_inversions(&v) + count_inversions(&rev);
            let want = (n * n.saturating_sub(1) / 2) as u64;
            if total != want {
                return Ok(Err(format!("n = {n}: {total} != {want}")));
            }
        }
        Ok(Ok("50 vectors".into()))
    })
}

/// Data suited to each registered estimator.
pub fn sample_data_for(estimator: &str, n: usize, seed: u64) -> DataMatrix {
    match estimator {
        "ols" | "quantreg" => gen_regression(n, 3, seed).expect("n > 3").to_matrix(),
        "kendall-naive" | "kendall-knight" => gen_kendall_pairs(n, seed),
        _ => DataMatrix::from_column(gen_normal(n, seed)),
    }
}

pub fn check_single_chunk_collapse() -> Check {
    Check::run("one chunk reproduces the full estimate bit for bit", || {
        let opts = EstimatorOptions::default();
        for name in REGISTERED {
            let est = lookup(name, &opts)?;
            let data = sample_data_for(name, 2_000, 17);
            let plan = make_chunk_plan(data.rows(), 1)?;
            let fe = full_estimate(data.view(), est.as_ref())?;
            let ca = ca_estimate(data.view(), est.as_ref(), &plan, 1)?;
            let same = fe
                .theta_hat
                .values()
                .iter()
                .zip(ca.theta_bar.values())
                .all(|(a, b)| a.to_bits() == b.to_bits());
            if !same {
                return Ok(Err(format!("{name}: {} vs {}", fe.theta_hat, ca.theta_bar)));
            }
        }
        Ok(Ok(format!("{} estimators", REGISTERED.len())))
    })
}

pub fn check_mean_collapse() -> Check {
    Check::run("chunk-averaged mean equals the full mean for every r", || {
        let data = DataMatrix::from_column(gen_normal(10_007, 3));
        let est = lookup("mean", &EstimatorOptions::default())?;
        let fe = full_estimate(data.view(), est.as_ref())?;
        let mut worst = 0.0_f64;
        for r in [1, 2, 3, 7, 10, 64, 1000, 10_007] {
            let plan = make_chunk_plan(data.rows(), r)?;
            let ca = ca_estimate(data.view(), est.as_ref(), &plan, 4)?;
            let scale = fe.theta_hat.values()[0].abs().max(f64::MIN_POSITIVE);
            worst = worst.max((ca.theta_bar.values()[0] - fe.theta_hat.values()[0]).abs() / scale);
        }
        Ok(if worst < 1e-10 {
            Ok(format!("max relative error {worst:.1e}"))
        } else {
            Err(format!("max relative error {worst:.3e} >= 1e-10"))
        })
    })
}

pub fn check_worker_independence() -> Check {
    Check::run("results do not depend on the worker count", || {
        let opts = EstimatorOptions::default();
        for name in ["ols", "kendall-knight", "mean"] {
            let est = lookup(name, &opts)?;
            let data = sample_data_for(name, 5_000, 8);
            let plan = make_chunk_plan(data.rows(), 6)?;
            let one = ca_estimate(data.view(), est.as_ref(), &plan, 1)?;
            let many = ca_estimate(data.view(), est.as_ref(), &plan, 6)?;
            if one != many {
                return Ok(Err(format!("{name} differs between 1 and 6 workers")));
            }
        }
        Ok(Ok("ols, kendall-knight, mean".into()))
    })
}

fn rel_l1_check(name: &'static str, estimator: &'static str, n: usize, p: usize, bound: f64) -> Check {
    Check::run(name, move || {
        let data = gen_regression(n, p, 99)?.to_matrix();
        let est = lookup(estimator, &EstimatorOptions::default())?;
        let fe = full_estimate(data.view(), est.as_ref())?;
        let ca = ca_estimate(data.view(), est.as_ref(), &make_chunk_plan(n, 8)?, crate::executor::hardware_threads())?;
        let d = relative_l1_diff(&ca.theta_bar, &fe.theta_hat)?;
        Ok(if d < bound {
            Ok(format!("rel_l1 = {d:.2e} < {bound}"))
        } else {
            Err(format!("rel_l1 = {d:.3e} >= {bound}"))
        })
    })
}

pub fn check_ols_rel_l1() -> Check {
    rel_l1_check("ols chunk average is close to the full fit", "ols", 100_000, 10, 0.01)
}

pub fn check_quantreg_rel_l1() -> Check {
    rel_l1_check("quantreg chunk average is close to the full fit", "quantreg", 50_000, 5, 0.02)
}

/// Every check, in a fixed order.
pub fn run_all() -> Vec<Check> {
    vec![
        check_weight_identity(),
        check_kendall_paths(),
        check_inversion_symmetry(),
        check_single_chunk_collapse(),
        check_mean_collapse(),
        check_worker_independence(),
        check_ols_rel_l1(),
        check_quantreg_rel_l1(),
    ]
}
