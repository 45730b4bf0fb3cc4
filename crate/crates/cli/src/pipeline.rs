//! Day-level fan-out. Results always come back in panel order, whatever the
//! number of workers.

use emdx_core::{decompose, run_day, DayPanel, DayResult, Decomposition, SiftConfig};
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Worker pool capped at `threads` (rayon's default when `None`).
pub fn pool(threads: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        b = b.num_threads(n);
    }
    b.build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))
}

fn day_error(day: &str, e: emdx_core::Error) -> Error {
    Error::Day {
        day: day.to_string(),
        source: e,
    }
}

/// Runs the pair pipeline on every panel.
pub fn run_days(
    pool: &rayon::ThreadPool,
    panels: &[DayPanel],
    pair: (&str, &str),
    cfg: &SiftConfig,
) -> Result<Vec<DayResult>> {
    pool.install(|| {
        panels
            .par_iter()
            .map(|p| run_day(p, pair, cfg).map_err(|e| day_error(&p.day_id, e)))
            .collect()
    })
}

/// Decomposes `label` on every panel.
pub fn decompose_days(
    pool: &rayon::ThreadPool,
    panels: &[DayPanel],
    label: &str,
    cfg: &SiftConfig,
) -> Result<Vec<Decomposition>> {
    pool.install(|| {
        panels
            .par_iter()
            .map(|p| {
                let series = p.get(label).ok_or_else(|| {
                    Error::Config(format!("label {label} not in day {}", p.day_id))
                })?;
                decompose(series, cfg).map_err(|e| day_error(&p.day_id, e))
            })
            .collect()
    })
}
