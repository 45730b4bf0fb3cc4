//! Local extrema and zero crossings.
//!
//! Only interior samples can be extrema. A maximal run of equal samples
//! flanked on both sides by lower (higher) neighbours is a single maximum
//! (minimum) located at the run midpoint, which may fall between two samples.

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// A local extremum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremum {
    /// Sample position; half-integer for plateaus of even length.
    pub position: f64,
    /// Sample value.
    pub value: f64,
}

/// Interior maxima and minima of a series, each in increasing position order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Extrema {
    /// Local maxima.
    pub maxima: Vec<Extremum>,
    /// Local minima.
    pub minima: Vec<Extremum>,
}

impl Extrema {
    /// Total number of extrema.
    pub fn total(&self) -> usize {
        self.maxima.len() + self.minima.len()
    }
}

/// Locates interior extrema. Series shorter than 3 have none.
pub fn find_extrema(series: &[f64]) -> Extrema {
    let mut out = Extrema::default();
    let n = series.len();
    if n < 3 {
        return out;
    }
    let mut start = 1;
    while start < n - 1 {
        let v = series[start];
        let mut end = start;
        while end + 1 < n && series[end + 1] == v {
            end += 1;
        }
        // A run reaching the last sample is not interior.
        if end == n - 1 {
            break;
        }
        let left = series[start - 1];
        let right = series[end + 1];
        let ext = Extremum {
            position: (start + end) as f64 / 2.0,
            value: v,
        };
        if v > left && v > right {
            out.maxima.push(ext);
        } else if v < left && v < right {
            out.minima.push(ext);
        }
        start = end + 1;
    }
    out
}

/// Counts interior local maxima and minima.
pub fn count_extrema(series: &[f64]) -> Result<(usize, usize)> {
    if series.len() < 3 {
        return Err(Error::DegenerateInput {
            len: series.len(),
            min: 3,
        });
    }
    let e = find_extrema(series);
    Ok((e.maxima.len(), e.minima.len()))
}

/// Counts sign changes. Exact zeros are skipped, so a zero between samples
/// of opposite sign contributes one crossing and a zero touched from one
/// side contributes none.
pub fn count_zero_crossings(series: &[f64]) -> Result<usize> {
    if series.len() < 2 {
        return Err(Error::DegenerateInput {
            len: series.len(),
            min: 2,
        });
    }
    Ok(zero_crossings_unchecked(series))
}

pub(crate) fn zero_crossings_unchecked(series: &[f64]) -> usize {
    let mut count = 0;
    let mut last_positive: Option<bool> = None;
    for &v in series {
        if v == 0.0 {
            continue;
        }
        let positive = v > 0.0;
        if last_positive.is_some_and(|p| p != positive) {
            count += 1;
        }
        last_positive = Some(positive);
    }
    count
}

/// IMF condition 1: extrema and zero crossings are equal or differ by one.
pub fn satisfies_extrema_balance(series: &[f64]) -> bool {
    let e = find_extrema(series).total();
    let z = zero_crossings_unchecked(series);
    e.abs_diff(z) <= 1
}
