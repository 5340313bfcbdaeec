//! Query throughput measurement: warmup passes, then timed passes over the
//! whole query set with a fixed number of worker threads.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BenchSettings {
    pub threads: usize,
    pub trials: usize,
    pub warmup: usize,
    /// Echoed into the report.
    pub k: usize,
    /// Echoed into the report.
    pub ef_search: usize,
}

impl Default for BenchSettings {
    fn default() -> Self {
        BenchSettings { threads: 16, trials: 4, warmup: 1, k: 1000, ef_search: 1000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    /// Mean over timed trials of `queries / trial wall time`.
    pub queries_per_second: f64,
    pub trials: usize,
    pub warmup_runs: usize,
    pub threads: usize,
    pub k: usize,
    pub ef_search: usize,
    pub num_queries: usize,
    pub trial_seconds: Vec<f64>,
}

/// Runs `search(i)` for every query index `i` once per pass, `warmup + trials` passes in all.
pub fn run_bench<F>(num_queries: usize, settings: BenchSettings, search: F) -> Result<BenchReport>
where
    F: Fn(usize) -> Result<()> + Sync,
{
    if num_queries == 0 {
        return Err(Error::invalid("no queries to benchmark"));
    }
    if settings.trials == 0 || settings.threads == 0 {
        return Err(Error::invalid("trials and threads must be at least 1"));
    }
    for _ in 0..settings.warmup {
        one_pass(num_queries, settings.threads, &search)?;
    }
    let mut trial_seconds = Vec::with_capacity(settings.trials);
    for _ in 0..settings.trials {
        trial_seconds.push(one_pass(num_queries, settings.threads, &search)?);
    }
    let qps = trial_seconds.iter().map(|s| num_queries as f64 / s).sum::<f64>() / settings.trials as f64;
    Ok(BenchReport {
        queries_per_second: qps,
        trials: settings.trials,
        warmup_runs: settings.warmup,
        threads: settings.threads,
        k: settings.k,
        ef_search: settings.ef_search,
        num_queries,
        trial_seconds,
    })
}

fn one_pass<F>(num_queries: usize, threads: usize, search: &F) -> Result<f64>
where
    F: Fn(usize) -> Result<()> + Sync,
{
    let next = AtomicUsize::new(0);
    let started = Instant::now();
    let outcome: Result<()> = std::thread::scope(|scope| {
        let workers: Vec<_> = (0..threads.min(num_queries))
            .map(|_| {
                scope.spawn(|| -> Result<()> {
                    loop {
                        let i = next.fetch_add(1, Ordering::Relaxed);
                        if i >= num_queries {
                            return Ok(());
                        }
                        search(i)?;
                    }
                })
            })
            .collect();
        workers.into_iter().try_for_each(|w| w.join().expect("bench worker panicked"))
    });
    outcome?;
    // guard against a zero-length timer reading on trivial workloads
    Ok(started.elapsed().as_secs_f64().max(1e-9))
}
