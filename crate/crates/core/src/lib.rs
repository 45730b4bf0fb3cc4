//! Empirical mode decomposition and time-scale-dependent cross-correlation.
//!
//! The crate splits a uniformly sampled series into intrinsic mode functions
//! (IMFs) by sifting, estimates the oscillating period of every IMF, and
//! correlates two decompositions either across all pairs of scales or
//! scale-by-scale over rolling windows at a range of lags. Multi-day results
//! are reduced with elementwise medians and diagonal histograms.
//!
//! Everything here is a pure function over owned or borrowed slices; the crate
//! is `no_std` and only needs `alloc`. File formats, ingestion and the CLI
//! live in the `emdx` crate.

#![cfg_attr(not(any(feature = "std", test)), no_std)]
#![deny(missing_docs)]

extern crate alloc;

pub mod aggregate;
pub mod correlation;
pub mod emd;
mod error;
pub mod extrema;
pub mod spectral;
pub mod spline;
pub mod types;

pub use aggregate::{
    diagonal_histograms, median_lag_field, median_scale_matrix, run_day, summarize, DayFlag,
    DayPanel, DayResult, DiagonalHistograms, MedianSummary, DEFAULT_BINS,
};
pub use correlation::{
    lag_bound, lagged_correlation_field, lagged_windowed_correlation, pearson, scale_correlation,
    LagWindowRule, MIN_WINDOW,
};
pub use emd::{build_envelopes, decompose, extract_imf, sift_once, SiftConfig};
pub use error::{Error, Result};
pub use extrema::{count_extrema, count_zero_crossings, satisfies_extrema_balance};
pub use spectral::estimate_period;
pub use types::{
    Decomposition, Imf, LaggedCorrelationField, ScaleCorrelationMatrix, ScaleLabel, SiftWarning,
    TimeSeries,
};
