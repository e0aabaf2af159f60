//! Bounded worker pool that applies a pure function to each chunk of a plan.
//!
//! Workers pull chunk indices from a shared counter, so a pool may have more
//! workers than hardware threads. Each worker keeps its own results and the
//! caller scatters them into chunk order after every worker has joined, so the
//! output never depends on scheduling.

use std::panic;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use crate::data::MatrixView;
use crate::error::{Error, Result};
use crate::plan::ChunkPlan;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecMode {
    Parallel,
    Serial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExecPolicy {
    workers: usize,
    mode: ExecMode,
}

impl ExecPolicy {
    /// Pool of `workers` threads; may exceed the hardware thread count.
    pub fn parallel(workers: usize) -> Result<Self> {
        if workers == 0 {
            return Err(Error::InvalidInput("worker count must be at least 1".into()));
        }
        Ok(ExecPolicy {
            workers,
            mode: ExecMode::Parallel,
        })
    }

    /// Runs every chunk on the calling thread, in order.
    pub fn serial() -> Self {
        ExecPolicy {
            workers: 1,
            mode: ExecMode::Serial,
        }
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    pub fn mode(&self) -> ExecMode {
        self.mode
    }

    fn runs_inline(&self) -> bool {
        self.mode == ExecMode::Serial || self.workers == 1
    }
}

impl Default for ExecPolicy {
    fn default() -> Self {
        ExecPolicy {
            workers: hardware_threads(),
            mode: ExecMode::Parallel,
        }
    }
}

pub fn hardware_threads() -> usize {
    thread::available_parallelism().map_or(1, |n| n.get())
}

/// Results of a timed run, in chunk order.
#[derive(Debug, Clone)]
pub struct TimedRun<T> {
    pub results: Vec<T>,
    /// Dispatch of the first chunk to completion of the last.
    pub wall: Duration,
    pub per_chunk: Vec<Duration>,
}

/// Applies `f` to every chunk block; `result[m] = f(block_m)`.
pub fn map_chunks<T, F>(
    data: MatrixView<'_>,
    plan: &ChunkPlan,
    f: F,
    policy: &ExecPolicy,
) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(MatrixView<'_>) -> Result<T> + Sync,
{
    timed_map_chunks(data, plan, f, policy).map(|run| run.results)
}

/// As [`map_chunks`], also reporting wall time and per-chunk times.
pub fn timed_map_chunks<T, F>(
    data: MatrixView<'_>,
    plan: &ChunkPlan,
    f: F,
    policy: &ExecPolicy,
) -> Result<TimedRun<T>>
where
    T: Send,
    F: Fn(MatrixView<'_>) -> Result<T> + Sync,
{
    if plan.n() != data.rows() {
        return Err(Error::InvalidPlan(format!(
            "plan covers {} rows but the data has {}",
            plan.n(),
            data.rows()
        )));
    }
    let r = plan.r();
    let run_one = |m: usize| {
        let block = data.slice_rows(plan.ranges()[m].clone());
        let t = Instant::now();
        let out = f(block);
        (out, t.elapsed())
    };

    let start = Instant::now();
    let mut slots: Vec<Option<(T, Duration)>> = (0..r).map(|_| None).collect();

    if policy.runs_inline() {
        for (m, slot) in slots.iter_mut().enumerate() {
            let (out, dt) = run_one(m);
            let value = out.map_err(|e| chunk_error(m, e))?;
            *slot = Some((value, dt));
        }
    } else {
        let next = AtomicUsize::new(0);
        let failed = AtomicBool::new(false);
        let first_error: Mutex<Option<(usize, Error)>> = Mutex::new(None);
        let threads = policy.workers.min(r);

        let batches: Vec<Vec<(usize, T, Duration)>> = thread::scope(|s| {
            let handles: Vec<_> = (0..threads)
                .map(|_| {
                    s.spawn(|| {
                        let mut done = Vec::new();
                        while !failed.load(Ordering::Relaxed) {
                            let m = next.fetch_add(1, Ordering::Relaxed);
                            if m >= r {
                                break;
                            }
                            match run_one(m) {
                                (Ok(v), dt) => done.push((m, v, dt)),
                                (Err(e), _) => {
                                    let mut slot = first_error.lock().unwrap_or_else(|p| p.into_inner());
                                    if slot.is_none() {
                                        *slot = Some((m, e));
                                    }
                                    failed.store(true, Ordering::Relaxed);
                                    break;
                                }
                            }
                        }
                        done
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().unwrap_or_else(|p| panic::resume_unwind(p)))
                .collect()
        });

        if let Some((m, e)) = first_error.into_inner().unwrap_or_else(|p| p.into_inner()) {
            return Err(chunk_error(m, e));
        }
        for (m, v, dt) in batches.into_iter().flatten() {
            slots[m] = Some((v, dt));
        }
    }

    let wall = start.elapsed();
    let (results, per_chunk) = slots
        .into_iter()
        .map(|s| s.expect("every chunk completes when no error is reported"))
        .unzip();
    Ok(TimedRun {
        results,
        wall,
        per_chunk,
    })
}

fn chunk_error(index: usize, e: Error) -> Error {
    Error::Chunk {
        index,
        source: Box::new(e),
    }
}
