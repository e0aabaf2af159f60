//! Kendall's τ_a by exhaustive pair enumeration (Θ(n²)) and by Knight's
//! sort-and-count-inversions method (Θ(n log n)).
//!
//! Both paths finish with the same integer arithmetic, `(C − D) / P` with
//! `P = n(n−1)/2`, so on tie-free input they agree to the last bit. Knight's
//! form `1 − 4D/(n(n−1))` is that same quantity once `C = P − D`.

use crate::data::MatrixView;
use crate::error::{Error, Result};

use super::{Columns, EstimateVector, Estimator};

/// Number of pairs `i < j` with `v[i] > v[j]`, counted during a merge sort of
/// a private copy.
pub fn count_inversions(v: &[f64]) -> u64 {
    let mut work = v.to_vec();
    let mut buf = vec![0.0; v.len()];
    sort_count(&mut work, &mut buf)
}

fn sort_count(v: &mut [f64], buf: &mut [f64]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut inv = {
        let (lo, hi) = v.split_at_mut(mid);
        let (blo, bhi) = buf.split_at_mut(mid);
        sort_count(lo, blo) + sort_count(hi, bhi)
    };
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if v[j] < v[i] {
            // v[j] jumps ahead of every element still left in the lower half.
            inv += (mid - i) as u64;
            buf[k] = v[j];
            j += 1;
        } else {
            buf[k] = v[i];
            i += 1;
        }
        k += 1;
    }
    buf[k..k + mid - i].copy_from_slice(&v[i..mid]);
    k += mid - i;
    buf[k..k + n - j].copy_from_slice(&v[j..n]);
    v.copy_from_slice(&buf[..n]);
    inv
}

fn check_pair_input(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::Dimension(format!(
            "x has {} values, y has {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::InvalidInput("kendall's tau needs at least 2 pairs".into()));
    }
    Ok(())
}

fn pair_count(n: usize) -> u64 {
    n as u64 * (n as u64 - 1) / 2
}

fn tau_from_counts(concordant_minus_discordant: i64, pairs: u64) -> Result<EstimateVector> {
    EstimateVector::scalar(concordant_minus_discordant as f64 / pairs as f64)
}

/// τ_a by enumerating every pair. Pairs tied in `x` or `y` count as neither
/// concordant nor discordant.
pub fn kendall_tau_naive(x: &[f64], y: &[f64]) -> Result<EstimateVector> {
    check_pair_input(x, y)?;
    let n = x.len();
    let mut score: i64 = 0;
    for i in 0..n {
        let (xi, yi) = (x[i], y[i]);
        // Sign products; a tie or NaN in either coordinate gives 0.
        score += x[i + 1..]
            .iter()
            .zip(&y[i + 1..])
            .map(|(&xj, &yj)| {
                let sx = (xj > xi) as i64 - (xj < xi) as i64;
                let sy = (yj > yi) as i64 - (yj < yi) as i64;
                sx * sy
            })
            .sum::<i64>();
    }
    tau_from_counts(score, pair_count(n))
}

/// τ_a in Θ(n log n): order the pairs by `x`, then the discordant pairs are
/// exactly the inversions of the reordered `y`. Tied input is rejected.
pub fn kendall_tau_knight(x: &[f64], y: &[f64]) -> Result<EstimateVector> {
    check_pair_input(x, y)?;
    if x.iter().chain(y).any(|v| v.is_nan()) {
        return Err(Error::InvalidInput("NaN in kendall input".into()));
    }
    let n = x.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_unstable_by(|&a, &b| x[a].total_cmp(&x[b]));
    if order.windows(2).any(|w| x[w[0]] == x[w[1]]) {
        return Err(Error::TiesUnsupported("x"));
    }
    let y_by_x: Vec<f64> = order.iter().map(|&i| y[i]).collect();

    let mut sorted_y = y.to_vec();
    sorted_y.sort_unstable_by(f64::total_cmp);
    if sorted_y.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::TiesUnsupported("y"));
    }

    let pairs = pair_count(n);
    let discordant = count_inversions(&y_by_x);
    tau_from_counts(pairs as i64 - 2 * discordant as i64, pairs)
}

fn pair_columns(block: MatrixView<'_>) -> Result<(Vec<f64>, Vec<f64>)> {
    Columns::Exactly(2).check(block.cols())?;
    Ok(block.iter_rows().map(|r| (r[0], r[1])).unzip())
}

/// Kendall's τ_a of columns 0 and 1 by pair enumeration.
#[derive(Debug, Clone, Copy, Default)]
pub struct KendallNaive;

impl Estimator for KendallNaive {
    fn name(&self) -> &str {
        "kendall-naive"
    }

    fn columns(&self) -> Columns {
        Columns::Exactly(2)
    }

    fn fit(&self, block: MatrixView<'_>) -> Result<EstimateVector> {
        let (x, y) = pair_columns(block)?;
        kendall_tau_naive(&x, &y)
    }
}

/// Kendall's τ_a of columns 0 and 1 by inversion counting.
#[derive(Debug, Clone, Copy, Default)]
pub struct KendallKnight;

impl Estimator for KendallKnight {
    fn name(&self) -> &str {
        "kendall-knight"
    }

    fn columns(&self) -> Columns {
        Columns::Exactly(2)
    }

    fn fit(&self, block: MatrixView<'_>) -> Result<EstimateVector> {
        let (x, y) = pair_columns(block)?;
        kendall_tau_knight(&x, &y)
    }
}
