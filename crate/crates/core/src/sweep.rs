//! Independent runs over a range of seeds.
//!
//! Each seed is a separate colony with no shared state, so runs can be
//! farmed out to a rayon pool. The sequential path is always available and
//! gives identical results in the same order.

use serde::Serialize;

use crate::analysis::{break_ties, fit_exponential};
use crate::colony::{run, ColonyConfig, RunRecord};
use crate::error::{BagaError, Result};
use crate::output::FitSummary;

/// Env var capping the worker count of parallel sweeps.
pub const THREADS_ENV: &str = "BAGA_THREADS";

/// Parses `a..b` (inclusive of both ends), `a..=b` or a single seed.
pub fn parse_seed_range(s: &str) -> Result<Vec<u64>> {
    let bad = || BagaError::config("--seeds", format!("expected `a..b`, got `{s}`"));
    let (lo, hi) = match s.split_once("..") {
        Some((a, b)) => {
            let b = b.strip_prefix('=').unwrap_or(b);
            (
                a.trim().parse::<u64>().map_err(|_| bad())?,
                b.trim().parse::<u64>().map_err(|_| bad())?,
            )
        }
        None => {
            let v = s.trim().parse::<u64>().map_err(|_| bad())?;
            (v, v)
        }
    };
    if hi < lo {
        return Err(bad());
    }
    Ok((lo..=hi).collect())
}

/// Worker cap from `BAGA_THREADS`; unset, empty or zero means no cap.
pub fn thread_cap() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) if v.trim().is_empty() => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(0) => Ok(None),
            Ok(n) => Ok(Some(n)),
            Err(_) => Err(BagaError::config(THREADS_ENV, format!("not a thread count: `{v}`"))),
        },
        Err(_) => Ok(None),
    }
}

pub fn map_seeds_sequential<T, F>(seeds: &[u64], f: F) -> Vec<T>
where
    F: Fn(u64) -> T,
{
    seeds.iter().map(|&s| f(s)).collect()
}

#[cfg(feature = "parallel")]
pub fn map_seeds_parallel<T, F>(seeds: &[u64], threads: Option<usize>, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    use rayon::prelude::*;
    let work = || seeds.par_iter().map(|&s| f(s)).collect();
    match threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| BagaError::param(format!("thread pool: {e}")))?;
            Ok(pool.install(work))
        }
        None => Ok(work()),
    }
}

/// Parallel when the `parallel` feature is on, sequential otherwise.
/// Output order always follows `seeds`.
pub fn map_seeds<T, F>(seeds: &[u64], threads: Option<usize>, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        map_seeds_parallel(seeds, threads, f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        Ok(map_seeds_sequential(seeds, f))
    }
}

fn with_seed(cfg: &ColonyConfig, seed: u64) -> ColonyConfig {
    ColonyConfig { seed, ..cfg.clone() }
}

pub fn run_seeds_sequential(cfg: &ColonyConfig, seeds: &[u64]) -> Vec<Result<RunRecord>> {
    map_seeds_sequential(seeds, |s| run(&with_seed(cfg, s)))
}

#[cfg(feature = "parallel")]
pub fn run_seeds_parallel(cfg: &ColonyConfig, seeds: &[u64], threads: Option<usize>) -> Result<Vec<Result<RunRecord>>> {
    map_seeds_parallel(seeds, threads, |s| run(&with_seed(cfg, s)))
}

pub fn run_seeds(cfg: &ColonyConfig, seeds: &[u64], threads: Option<usize>) -> Result<Vec<Result<RunRecord>>> {
    map_seeds(seeds, threads, |s| run(&with_seed(cfg, s)))
}

#[derive(Clone, Debug, Serialize)]
pub struct SeedSummary {
    pub seed: u64,
    pub occurrences: usize,
    pub first_occurrence: Option<f64>,
    pub final_size: usize,
    pub fit: FitSummary,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepSummary {
    pub runs: Vec<SeedSummary>,
    /// One regression over the occurrence series of every run pooled together.
    pub pooled_fit: FitSummary,
    pub median_b: Option<f64>,
    pub median_first_occurrence: Option<f64>,
}

pub fn median(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    })
}

impl SweepSummary {
    pub fn from_runs(runs: Vec<SeedSummary>, records: &[&RunRecord]) -> Self {
        let mut pooled = Vec::new();
        for r in records {
            let times = break_ties(&r.occurrence_times());
            pooled.extend(times.into_iter().enumerate().map(|(i, t)| (t, (i + 1) as f64)));
        }
        let n = pooled.len();
        let bs: Vec<f64> = runs.iter().filter_map(|r| r.fit.b).collect();
        let firsts: Vec<f64> = runs.iter().filter_map(|r| r.first_occurrence).collect();
        SweepSummary {
            pooled_fit: FitSummary::from_result(&fit_exponential(&pooled), n),
            median_b: median(&bs),
            median_first_occurrence: median(&firsts),
            runs,
        }
    }
}
