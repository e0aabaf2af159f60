//! FE-versus-CA timing harness.
//!
//! Cases run strictly one after another; only the CA run under measurement
//! uses more than one thread. Each timing is the median of `reps` runs taken
//! after one untimed warmup.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::ca::{ca_estimate_timed, full_estimate, relative_l1_diff};
use crate::cwa::cwa_speedup_probe;
use crate::datagen::{GenKind, GenSpec};
use crate::error::{Error, Result};
use crate::estimators::{lookup, EstimatorOptions};
use crate::executor::ExecPolicy;
use crate::plan::make_chunk_plan;

/// Column order of the suite CSV.
pub const CSV_COLUMNS: [&str; 11] = [
    "estimator",
    "n",
    "p",
    "r",
    "workers",
    "fe_seconds",
    "ca_seconds",
    "speedup",
    "rel_l1",
    "superlinear",
    "error",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub estimator: String,
    pub n: usize,
    pub p: usize,
    pub r: usize,
    pub workers: usize,
    pub fe_seconds: f64,
    pub ca_seconds: f64,
    /// `fe_seconds / ca_seconds`.
    pub speedup: f64,
    pub rel_l1: f64,
    /// `speedup > workers`.
    pub superlinear: bool,
    pub per_chunk_seconds: Vec<f64>,
    pub error: Option<String>,
}

impl BenchRecord {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        estimator: &str,
        n: usize,
        p: usize,
        r: usize,
        workers: usize,
        fe_seconds: f64,
        ca_seconds: f64,
        rel_l1: f64,
        per_chunk_seconds: Vec<f64>,
    ) -> Self {
        let speedup = fe_seconds / ca_seconds;
        BenchRecord {
            estimator: estimator.to_string(),
            n,
            p,
            r,
            workers,
            fe_seconds,
            ca_seconds,
            speedup,
            rel_l1,
            superlinear: speedup > workers as f64,
            per_chunk_seconds,
            error: None,
        }
    }

    fn failed(case: &BenchCase, err: &Error) -> Self {
        BenchRecord {
            estimator: case.estimator.clone(),
            n: case.n,
            p: case.p,
            r: case.chunks,
            workers: case.workers,
            fe_seconds: f64::NAN,
            ca_seconds: f64::NAN,
            speedup: f64::NAN,
            rel_l1: f64::NAN,
            superlinear: false,
            per_chunk_seconds: Vec::new(),
            error: Some(err.to_string()),
        }
    }

    /// Spread between the slowest and fastest chunk, in seconds.
    pub fn chunk_time_spread(&self) -> f64 {
        let max = self.per_chunk_seconds.iter().copied().fold(f64::NAN, f64::max);
        let min = self.per_chunk_seconds.iter().copied().fold(f64::NAN, f64::min);
        max - min
    }
}

pub(crate) fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_unstable_by(f64::total_cmp);
    let m = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[m]
    } else {
        0.5 * (xs[m - 1] + xs[m])
    }
}

/// Times FE on the full data against CA with `r` chunks and `workers`
/// threads, on data drawn from `gen`.
pub fn run_case(
    estimator: &str,
    opts: &EstimatorOptions,
    gen: &GenSpec,
    r: usize,
    workers: usize,
    reps: usize,
) -> Result<BenchRecord> {
    if reps == 0 {
        return Err(Error::InvalidInput("reps must be at least 1".into()));
    }
    if estimator == "cwa-kde" {
        return cwa_speedup_probe(gen.n, r, workers, reps, gen.seed);
    }
    let est = lookup(estimator, opts)?;
    let data = gen.generate()?;
    let plan = make_chunk_plan(data.rows(), r)?;
    let policy = ExecPolicy::parallel(workers)?;

    let mut fe = full_estimate(data.view(), est.as_ref())?;
    let mut ca = ca_estimate_timed(data.view(), est.as_ref(), &plan, &policy)?;

    let mut fe_times = Vec::with_capacity(reps);
    let mut ca_times = Vec::with_capacity(reps);
    for _ in 0..reps {
        let t = Instant::now();
        fe = full_estimate(data.view(), est.as_ref())?;
        fe_times.push(t.elapsed().as_secs_f64());

        let t = Instant::now();
        ca = ca_estimate_timed(data.view(), est.as_ref(), &plan, &policy)?;
        ca_times.push(t.elapsed().as_secs_f64());
    }

    let rel = relative_l1_diff(&ca.result.theta_bar, &fe.theta_hat)?;
    Ok(BenchRecord::new(
        estimator,
        gen.n,
        gen.p,
        r,
        workers,
        median(fe_times),
        median(ca_times),
        rel,
        ca.per_chunk.iter().map(|d| d.as_secs_f64()).collect(),
    ))
}

fn default_reps() -> usize {
    3
}

fn default_seed() -> u64 {
    1
}

fn default_quantile() -> f64 {
    0.5
}

/// One benchmark case, as read from a `[[case]]` table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchCase {
    pub estimator: String,
    pub kind: GenKind,
    pub n: usize,
    #[serde(default)]
    pub p: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub chunks: usize,
    pub workers: usize,
    #[serde(default = "default_reps")]
    pub reps: usize,
    #[serde(default = "default_quantile")]
    pub q: f64,
    #[serde(default)]
    pub bandwidth: Option<f64>,
}

impl BenchCase {
    pub fn gen_spec(&self) -> GenSpec {
        GenSpec {
            kind: self.kind,
            n: self.n,
            p: self.p,
            seed: self.seed,
        }
    }

    pub fn run(&self) -> Result<BenchRecord> {
        let opts = EstimatorOptions {
            quantile: self.q,
            bandwidth: self.bandwidth,
            ..EstimatorOptions::default()
        };
        run_case(&self.estimator, &opts, &self.gen_spec(), self.chunks, self.workers, self.reps)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    #[serde(default, rename = "case")]
    pub cases: Vec<BenchCase>,
}

impl BenchConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }
}

/// Runs every case in order. A failing case becomes a record with its
/// `error` set, and the suite carries on.
pub fn run_suite(config: &BenchConfig) -> Vec<BenchRecord> {
    config
        .cases
        .iter()
        .map(|case| case.run().unwrap_or_else(|e| BenchRecord::failed(case, &e)))
        .collect()
}

fn metric(v: f64) -> String {
    if v.is_finite() {
        v.to_string()
    } else {
        String::new()
    }
}

/// Writes records as CSV with the [`CSV_COLUMNS`] header.
pub fn write_csv<W: Write>(records: &[BenchRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for rec in records {
        let ok = rec.error.is_none();
        w.write_record([
            rec.estimator.clone(),
            rec.n.to_string(),
            rec.p.to_string(),
            rec.r.to_string(),
            rec.workers.to_string(),
            metric(rec.fe_seconds),
            metric(rec.ca_seconds),
            metric(rec.speedup),
            metric(rec.rel_l1),
            if ok { rec.superlinear.to_string() } else { String::new() },
            rec.error.clone().unwrap_or_default(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<csv output>", e))?;
    Ok(())
}

/// Writes one `workers speedup` data file per (estimator, n) into `dir`,
/// returning the paths written.
pub fn write_plot_files(records: &[BenchRecord], dir: &Path) -> Result<Vec<PathBuf>> {
    let mut groups: BTreeMap<(String, usize), Vec<(usize, f64)>> = BTreeMap::new();
    for rec in records.iter().filter(|r| r.error.is_none()) {
        groups
            .entry((rec.estimator.clone(), rec.n))
            .or_default()
            .push((rec.workers, rec.speedup));
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    for ((estimator, n), mut points) in groups {
        points.sort_by_key(|p| p.0);
        let path = dir.join(format!("{estimator}_n{n}.dat"));
        let mut body = String::from("# workers speedup\n");
        for (w, s) in points {
            body.push_str(&format!("{w} {s}\n"));
        }
        fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn case(estimator: &str, kind: GenKind, n: usize) -> BenchCase {
        BenchCase {
            estimator: estimator.into(),
            kind,
            n,
            p: 0,
            seed: 1,
            chunks: 2,
            workers: 2,
            reps: 1,
            q: 0.5,
            bandwidth: None,
        }
    }

    #[test]
    fn record_fields_are_consistent() {
        let r = BenchRecord::new("mean", 10, 0, 2, 4, 3.0, 0.5, 0.0, vec![0.1, 0.3]);
        assert_eq!(r.speedup, 6.0);
        assert!(r.superlinear);
        assert!((r.chunk_time_spread() - 0.2).abs() < 1e-15);
        let r = BenchRecord::new("mean", 10, 0, 2, 4, 1.0, 0.5, 0.0, vec![]);
        assert!(!r.superlinear);
    }

    #[test]
    fn median_of_reps() {
        assert_eq!(median(vec![3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(vec![4.0, 1.0]), 2.5);
    }

    #[test]
    fn empty_config_gives_header_only() {
        let cfg = BenchConfig::from_toml("").unwrap();
        let records = run_suite(&cfg);
        let mut buf = Vec::new();
        write_csv(&records, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), format!("{}\n", CSV_COLUMNS.join(",")));
    }

    #[test]
    fn two_cases_two_rows() {
        let cfg = BenchConfig {
            cases: vec![case("mean", GenKind::Normal, 1000), case("kendall-knight", GenKind::Kendall, 1000)],
        };
        let records = run_suite(&cfg);
        let mut buf = Vec::new();
        write_csv(&records, &mut buf).unwrap();
        let mut rdr = csv::Reader::from_reader(buf.as_slice());
        assert_eq!(rdr.headers().unwrap().iter().collect::<Vec<_>>(), CSV_COLUMNS);
        let rows: Vec<_> = rdr.records().map(|r| r.unwrap()).collect();
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| r.len() == CSV_COLUMNS.len() && r[10].is_empty()));
    }

    #[test]
    fn failing_case_is_recorded() {
        let mut bad = case("kendall-naive", GenKind::Normal, 100);
        bad.chunks = 4;
        let cfg = BenchConfig {
            cases: vec![bad, case("mean", GenKind::Normal, 100)],
        };
        let records = run_suite(&cfg);
        assert!(records[0].error.is_some());
        assert!(records[1].error.is_none());
    }

    #[test]
    fn mean_collapse_in_records() {
        for r in [1, 3, 7] {
            let mut c = case("mean", GenKind::Normal, 10_000);
            c.chunks = r;
            let rec = c.run().unwrap();
            assert!(rec.rel_l1 < 1e-10, "r={r}: {}", rec.rel_l1);
            assert!((rec.speedup - rec.fe_seconds / rec.ca_seconds).abs() <= 1e-9 * rec.speedup);
        }
    }

    #[test]
    fn config_parses_tables() {
        let text = r#"
            [[case]]
            estimator = "quantreg"
            kind = "regression"
            n = 500
            p = 2
            chunks = 4
            workers = 2
            q = 0.25

            [[case]]
            estimator = "kendall-naive"
            kind = "kendall"
            n = 200
            chunks = 2
            workers = 1
        "#;
        let cfg = BenchConfig::from_toml(text).unwrap();
        assert_eq!(cfg.cases.len(), 2);
        assert_eq!(cfg.cases[0].q, 0.25);
        assert_eq!(cfg.cases[1].reps, 3);
        assert!(BenchConfig::from_toml("[[case]]\nestimator = 3").is_err());
    }

    #[test]
    fn plot_files_group_by_estimator_and_n() {
        let recs = vec![
            BenchRecord::new("kendall-naive", 100, 0, 4, 4, 1.0, 0.1, 0.0, vec![]),
            BenchRecord::new("kendall-naive", 100, 0, 1, 1, 1.0, 1.0, 0.0, vec![]),
            BenchRecord::new("ols", 100, 2, 2, 2, 1.0, 0.7, 0.0, vec![]),
        ];
        let dir = tempfile::tempdir().unwrap();
        let paths = write_plot_files(&recs, dir.path()).unwrap();
        assert_eq!(paths.len(), 2);
        let body = fs::read_to_string(dir.path().join("kendall-naive_n100.dat")).unwrap();
        assert_eq!(body, "# workers speedup\n1 1\n4 10\n");
    }
}
