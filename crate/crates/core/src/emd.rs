//! Sifting and empirical mode decomposition.
//!
//! Each sifting step interpolates natural cubic splines through the interior
//! maxima and minima, averages the two envelopes and subtracts the mean from
//! the candidate. Before fitting, the first and last few extrema are mirrored
//! about the endpoints so the splines are anchored beyond the sample range.
//!
//! Sifting stops when the Cauchy-type change
//! `SD = sum (h_prev - h)^2 / sum h_prev^2` drops below the threshold and the
//! candidate has balanced extrema and zero crossings.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::extrema::{find_extrema, satisfies_extrema_balance, Extremum};
use crate::spectral::period_of;
use crate::spline::NaturalCubicSpline;
use crate::types::{Decomposition, Imf, SiftWarning, TimeSeries, MIN_DECOMPOSITION_LEN};

/// A residue whose range is at most this fraction of the input's largest
/// magnitude counts as constant.
const FLAT_RELATIVE_RANGE: f64 = 1e-10;

/// Sifting and decomposition parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SiftConfig {
    /// Stop threshold for the normalized squared change between iterations.
    pub sd_threshold: f64,
    /// Upper bound on sifting iterations per IMF.
    pub max_sift_iterations: usize,
    /// Maximum number of IMFs; `None` extracts until the residue is terminal.
    pub max_imfs: Option<usize>,
    /// Extrema mirrored beyond each endpoint before spline fitting.
    pub boundary_padding_extrema: usize,
}

impl Default for SiftConfig {
    fn default() -> Self {
        Self {
            sd_threshold: 0.2,
            max_sift_iterations: 100,
            max_imfs: None,
            boundary_padding_extrema: 2,
        }
    }
}

impl SiftConfig {
    /// Checks parameter ranges.
    pub fn validate(&self) -> Result<()> {
        if !(self.sd_threshold > 0.0 && self.sd_threshold < 1.0) {
            return Err(Error::InvalidConfig("sd_threshold must lie in (0, 1)"));
        }
        if self.max_sift_iterations == 0 {
            return Err(Error::InvalidConfig(
                "max_sift_iterations must be at least 1",
            ));
        }
        if self.max_imfs == Some(0) {
            return Err(Error::InvalidConfig("max_imfs must be at least 1"));
        }
        if self.boundary_padding_extrema == 0 {
            return Err(Error::InvalidConfig(
                "boundary_padding_extrema must be at least 1",
            ));
        }
        Ok(())
    }

    /// Same configuration with an IMF cap.
    pub fn with_max_imfs(mut self, max_imfs: usize) -> Self {
        self.max_imfs = Some(max_imfs);
        self
    }
}

/// Knots for one envelope: the extrema plus `padding` mirror images about each
/// endpoint.
fn mirrored_knots(ext: &[Extremum], len: usize, padding: usize) -> (Vec<f64>, Vec<f64>) {
    let p = padding.min(ext.len());
    let last = (len - 1) as f64;
    let mut xs = Vec::with_capacity(ext.len() + 2 * p);
    let mut ys = Vec::with_capacity(ext.len() + 2 * p);
    for e in ext[..p].iter().rev() {
        xs.push(-e.position);
        ys.push(e.value);
    }
    for e in ext {
        xs.push(e.position);
        ys.push(e.value);
    }
    for e in ext[ext.len() - p..].iter().rev() {
        xs.push(2.0 * last - e.position);
        ys.push(e.value);
    }
    (xs, ys)
}

/// Upper and lower spline envelopes evaluated at every sample.
///
/// Needs at least one interior maximum and one interior minimum; mirroring
/// then gives each spline at least three knots. The envelopes are
/// interpolants and may cross the series between knots.
pub fn build_envelopes(series: &[f64], padding: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let ext = find_extrema(series);
    if ext.maxima.is_empty() || ext.minima.is_empty() {
        return Err(Error::NotSiftable {
            maxima: ext.maxima.len(),
            minima: ext.minima.len(),
        });
    }
    let padding = padding.max(1);
    let n = series.len();
    let (ux, uy) = mirrored_knots(&ext.maxima, n, padding);
    let (lx, ly) = mirrored_knots(&ext.minima, n, padding);
    let upper = NaturalCubicSpline::fit(&ux, &uy)?.eval_grid(n);
    let lower = NaturalCubicSpline::fit(&lx, &ly)?.eval_grid(n);
    Ok((upper, lower))
}

/// One sifting step: the series minus the mean of its envelopes.
pub fn sift_once(series: &[f64], cfg: &SiftConfig) -> Result<Vec<f64>> {
    let (upper, lower) = build_envelopes(series, cfg.boundary_padding_extrema)?;
    Ok(series
        .iter()
        .zip(upper.iter().zip(&lower))
        .map(|(x, (u, l))| x - (u + l) / 2.0)
        .collect())
}

fn normalized_change(prev: &[f64], next: &[f64]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (a, b) in prev.iter().zip(next) {
        num += (a - b) * (a - b);
        den += a * a;
    }
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Sifts `series` into one IMF with the given scale index.
fn extract(series: &[f64], cfg: &SiftConfig, scale_index: usize) -> Result<Imf> {
    if series.len() < 3 {
        return Err(Error::DegenerateInput {
            len: series.len(),
            min: 3,
        });
    }
    let mut h = sift_once(series, cfg)?;
    let mut iterations = 1;
    let mut warning = None;
    let mut sd = normalized_change(series, &h);
    loop {
        if sd < cfg.sd_threshold && satisfies_extrema_balance(&h) {
            break;
        }
        if iterations >= cfg.max_sift_iterations {
            warning = Some(SiftWarning::IterationCap);
            break;
        }
        match sift_once(&h, cfg) {
            Ok(next) => {
                sd = normalized_change(&h, &next);
                h = next;
                iterations += 1;
            }
            Err(Error::NotSiftable { .. }) => {
                if !satisfies_extrema_balance(&h) {
                    warning = Some(SiftWarning::ExtremaExhausted);
                }
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(Imf {
        period: period_of(&h),
        values: h,
        scale_index,
        iterations,
        warning,
    })
}

/// Extracts the first (fastest) IMF of `series`.
///
/// Returns `NotSiftable` if the series itself lacks envelope extrema. Hitting
/// the iteration cap is not an error; the IMF then carries a warning.
pub fn extract_imf(series: &[f64], cfg: &SiftConfig) -> Result<Imf> {
    cfg.validate()?;
    extract(series, cfg, 1)
}

/// Constant up to accumulated rounding relative to the input scale.
fn is_flat(series: &[f64], scale: f64) -> bool {
    let (lo, hi) = series
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    hi - lo <= FLAT_RELATIVE_RANGE * scale
}

fn is_siftable(series: &[f64]) -> bool {
    let e = find_extrema(series);
    !e.maxima.is_empty() && !e.minima.is_empty()
}

/// Decomposes a series into IMFs and a residue.
///
/// Extraction continues until the residue has no interior maximum or no
/// interior minimum (constant and monotone series included), or until
/// `max_imfs` components exist, in which case the remaining signal is the
/// residue even if it still oscillates.
pub fn decompose(x: &TimeSeries, cfg: &SiftConfig) -> Result<Decomposition> {
    cfg.validate()?;
    let values = x.values();
    let n = values.len();
    if n < MIN_DECOMPOSITION_LEN {
        return Err(Error::DegenerateInput {
            len: n,
            min: MIN_DECOMPOSITION_LEN,
        });
    }
    let cap = cfg.max_imfs.unwrap_or(usize::MAX);
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut residue = values.to_vec();
    let mut imfs: Vec<Imf> = Vec::new();
    while imfs.len() < cap && !is_flat(&residue, scale) && is_siftable(&residue) {
        let imf = extract(&residue, cfg, imfs.len() + 1)?;
        if imf.values.iter().all(|&v| v == 0.0) {
            break;
        }
        for (r, v) in residue.iter_mut().zip(&imf.values) {
            *r -= v;
        }
        imfs.push(imf);
    }
    Ok(Decomposition {
        imfs,
        residue,
        source_length: n,
    })
}
