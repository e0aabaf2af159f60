//! Wall-clock checks. They hold a shared lock so no two overlap, and the
//! ones that need several cores skip on smaller hosts.

use std::sync::Mutex;
use std::time::Instant;

use chunkforge::bench::run_case;
use chunkforge::cwa::cwa_speedup_probe;
use chunkforge::datagen::{gen_kendall_pairs, GenKind, GenSpec};
use chunkforge::estimators::{kendall_tau_naive, EstimatorOptions};
use chunkforge::executor::{hardware_threads, timed_map_chunks, ExecPolicy};
use chunkforge::make_chunk_plan;

static CLOCK: Mutex<()> = Mutex::new(());

fn exclusive() -> std::sync::MutexGuard<'static, ()> {
    CLOCK.lock().unwrap_or_else(|e| e.into_inner())
}

fn enough_cores(needed: usize) -> bool {
    let have = hardware_threads();
    if have < needed {
        eprintln!("skipped: needs {needed} hardware threads, host has {have}");
    }
    have >= needed
}

fn kendall(n: usize) -> GenSpec {
    GenSpec {
        kind: GenKind::Kendall,
        n,
        p: 0,
        seed: 21,
    }
}

fn naive_on_block(block: chunkforge::MatrixView<'_>) -> chunkforge::Result<f64> {
    Ok(kendall_tau_naive(&block.column(0), &block.column(1))?.values()[0])
}

#[test]
fn serial_wall_time_is_the_sum_of_chunk_times() {
    let _g = exclusive();
    let data = gen_kendall_pairs(12_000, 3);
    let plan = make_chunk_plan(data.rows(), 4).unwrap();
    let run = timed_map_chunks(data.view(), &plan, naive_on_block, &ExecPolicy::serial()).unwrap();
    let total: f64 = run.per_chunk.iter().map(|d| d.as_secs_f64()).sum();
    let wall = run.wall.as_secs_f64();
    assert!(total <= wall * 1.0001, "sum {total} > wall {wall}");
    assert!(wall - total < 0.1 * wall + 0.005, "wall {wall}, sum {total}");
}

#[test]
fn parallel_chunks_halve_wall_time_on_four_cores() {
    let _g = exclusive();
    if !enough_cores(4) {
        return;
    }
    let data = gen_kendall_pairs(20_000, 3);
    let plan = make_chunk_plan(data.rows(), 4).unwrap();
    let serial = timed_map_chunks(data.view(), &plan, naive_on_block, &ExecPolicy::serial()).unwrap();
    let parallel = timed_map_chunks(data.view(), &plan, naive_on_block, &ExecPolicy::parallel(4).unwrap()).unwrap();
    assert!(parallel.wall.as_secs_f64() < 0.5 * serial.wall.as_secs_f64());
}

#[test]
fn single_chunk_bench_is_a_wash() {
    let _g = exclusive();
    let rec = run_case("kendall-naive", &EstimatorOptions::default(), &kendall(8_000), 1, 1, 5).unwrap();
    assert_eq!(rec.rel_l1, 0.0);
    assert!((rec.speedup - 1.0).abs() <= 0.2, "speedup {}", rec.speedup);
}

#[test]
fn naive_kendall_gains_on_one_worker() {
    let _g = exclusive();
    let rec = run_case("kendall-naive", &EstimatorOptions::default(), &kendall(20_000), 8, 1, 3).unwrap();
    assert!(rec.speedup >= 3.0, "speedup {}", rec.speedup);
    assert!(rec.superlinear);
    assert!((rec.speedup - rec.fe_seconds / rec.ca_seconds).abs() <= 1e-9 * rec.speedup);
    assert_eq!(rec.per_chunk_seconds.len(), 8);
}

#[test]
fn naive_kendall_superlinear_on_four_cores() {
    let _g = exclusive();
    if !enough_cores(4) {
        return;
    }
    let rec = run_case("kendall-naive", &EstimatorOptions::default(), &kendall(20_000), 4, 4, 3).unwrap();
    assert!(rec.superlinear, "speedup {}", rec.speedup);
}

#[test]
fn naive_kendall_cost_is_quadratic() {
    let _g = exclusive();
    let opts = EstimatorOptions::default();
    let big = run_case("kendall-naive", &opts, &kendall(16_000), 1, 1, 3).unwrap();
    let half = run_case("kendall-naive", &opts, &kendall(8_000), 1, 1, 3).unwrap();
    assert!(big.fe_seconds >= 3.0 * half.fe_seconds, "{} vs {}", big.fe_seconds, half.fe_seconds);
}

#[test]
fn mean_bench_has_exact_collapse() {
    let _g = exclusive();
    let gen = GenSpec {
        kind: GenKind::Normal,
        n: 50_000,
        p: 0,
        seed: 2,
    };
    for r in [1, 3, 16] {
        let rec = run_case("mean", &EstimatorOptions::default(), &gen, r, 2, 1).unwrap();
        assert!(rec.rel_l1 < 1e-10, "r = {r}: {}", rec.rel_l1);
    }
}

#[test]
fn knight_speedup_grows_with_workers_up_to_core_count() {
    let _g = exclusive();
    let cores = hardware_threads();
    if !enough_cores(2) {
        return;
    }
    let mut last = 0.0;
    let mut w = 1;
    while w <= cores.min(8) {
        let rec = run_case("kendall-knight", &EstimatorOptions::default(), &kendall(2_000_000), w, w, 3).unwrap();
        assert!(rec.speedup <= 1.5 * w as f64, "w = {w}: {}", rec.speedup);
        assert!(rec.speedup >= 0.9 * last, "w = {w}: {} after {last}", rec.speedup);
        last = rec.speedup;
        w *= 2;
    }
}

#[test]
fn cwa_single_chunk_probe_is_a_wash() {
    let _g = exclusive();
    let rec = cwa_speedup_probe(4_000, 1, 1, 5, 5).unwrap();
    assert_eq!(rec.estimator, "cwa-kde");
    assert!((rec.speedup - 1.0).abs() <= 0.2, "speedup {}", rec.speedup);
}

#[test]
fn cwa_serial_probe_gains_from_chunking() {
    let _g = exclusive();
    let rec = cwa_speedup_probe(20_000, 8, 1, 3, 5).unwrap();
    assert!(rec.speedup >= 4.0, "speedup {}", rec.speedup);
}

#[test]
fn cwa_parallel_probe_on_eight_cores() {
    let _g = exclusive();
    if !enough_cores(8) {
        return;
    }
    let rec = cwa_speedup_probe(20_000, 8, 8, 3, 5).unwrap();
    assert!(rec.speedup >= 16.0, "speedup {}", rec.speedup);
}

#[test]
fn timed_runs_report_nonnegative_times() {
    let _g = exclusive();
    let data = gen_kendall_pairs(100, 1);
    let plan = make_chunk_plan(100, 3).unwrap();
    let t = Instant::now();
    let run = timed_map_chunks(data.view(), &plan, naive_on_block, &ExecPolicy::parallel(2).unwrap()).unwrap();
    assert!(run.wall <= t.elapsed());
    assert_eq!(run.per_chunk.len(), 3);
}
