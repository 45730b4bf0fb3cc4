//! Scale-by-scale and rolling lagged Pearson correlation.
//!
//! All moments are population moments over exactly the samples summed, so a
//! correlation computed over a window uses that window's own means and
//! standard deviations. A zero-variance side yields `None`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::types::{
    Decomposition, Imf, LaggedCorrelationField, ScaleCorrelationMatrix, ScaleLabel,
};

/// Smallest rolling window used by the lag/window rule.
pub const MIN_WINDOW: usize = 20;

/// Pearson correlation of two equal-length slices; `None` if either is constant.
pub(crate) fn pearson_unchecked(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len();
    if n == 0 || is_constant(x) || is_constant(y) {
        return None;
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (a, b) in x.iter().zip(y) {
        let da = a - mx;
        let db = b - my;
        sxx += da * da;
        syy += db * db;
        sxy += da * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (libm::sqrt(sxx) * libm::sqrt(syy)))
}

fn is_constant(x: &[f64]) -> bool {
    x.iter().all(|&v| v == x[0])
}

/// Windows between exact recomputations in [`rolling_pearson`].
const REFRESH: usize = 32;

/// Index where the run of equal values containing each sample starts.
fn run_starts(x: &[f64]) -> Vec<usize> {
    let mut out = Vec::with_capacity(x.len());
    let mut start = 0;
    for i in 0..x.len() {
        if i > 0 && x[i] != x[i - 1] {
            start = i;
        }
        out.push(start);
    }
    out
}

/// Centered sums of one window, updated as the window slides.
struct Moments {
    k: f64,
    ma: f64,
    mb: f64,
    saa: f64,
    sbb: f64,
    sab: f64,
}

impl Moments {
    /// Two-pass sums over `a` and `b`.
    fn exact(a: &[f64], b: &[f64]) -> Self {
        let k = a.len() as f64;
        let ma = a.iter().sum::<f64>() / k;
        let mb = b.iter().sum::<f64>() / k;
        let (mut saa, mut sbb, mut sab) = (0.0, 0.0, 0.0);
        for (x, y) in a.iter().zip(b) {
            let (dx, dy) = (x - ma, y - mb);
            saa += dx * dx;
            sbb += dy * dy;
            sab += dx * dy;
        }
        Self {
            k,
            ma,
            mb,
            saa,
            sbb,
            sab,
        }
    }

    fn remove(&mut self, x: f64, y: f64) {
        self.k -= 1.0;
        let dx = x - self.ma;
        let dy = y - self.mb;
        self.ma -= dx / self.k;
        self.mb -= dy / self.k;
        self.saa -= dx * (x - self.ma);
        self.sbb -= dy * (y - self.mb);
        self.sab -= dx * (y - self.mb);
    }

    fn add(&mut self, x: f64, y: f64) {
        self.k += 1.0;
        let dx = x - self.ma;
        let dy = y - self.mb;
        self.ma += dx / self.k;
        self.mb += dy / self.k;
        self.saa += dx * (x - self.ma);
        self.sbb += dy * (y - self.mb);
        self.sab += dx * (y - self.mb);
    }

    fn correlation(&self) -> Option<f64> {
        if self.saa <= 0.0 || self.sbb <= 0.0 {
            return None;
        }
        Some((self.sab / (libm::sqrt(self.saa) * libm::sqrt(self.sbb))).clamp(-1.0, 1.0))
    }
}

/// Correlation of `a[s..s+m]` with `b[s..s+m]` for every start `s`, appended
/// to `out`.
///
/// Moments slide in O(1) per step and are recomputed exactly every
/// [`REFRESH`] windows to stop rounding drift. Constancy is decided from the
/// raw values, so a constant window is `None` exactly as in the direct form.
fn rolling_pearson(a: &[f64], b: &[f64], m: usize, out: &mut Vec<Option<f64>>) {
    debug_assert!(a.len() == b.len() && m >= 1 && m <= a.len());
    let (ra, rb) = (run_starts(a), run_starts(b));
    let mut mom = Moments::exact(&a[..m], &b[..m]);
    for s in 0..=a.len() - m {
        if s > 0 {
            if s % REFRESH == 0 {
                mom = Moments::exact(&a[s..s + m], &b[s..s + m]);
            } else if m == 1 {
                mom = Moments::exact(&a[s..s + 1], &b[s..s + 1]);
            } else {
                mom.remove(a[s - 1], b[s - 1]);
                mom.add(a[s + m - 1], b[s + m - 1]);
            }
        }
        let last = s + m - 1;
        let constant = ra[last] <= s || rb[last] <= s;
        out.push(if constant { None } else { mom.correlation() });
    }
}

/// Pearson correlation with population moments.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<Option<f64>> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    Ok(pearson_unchecked(x, y))
}

fn components(d: &Decomposition, include_residue: bool) -> Vec<(ScaleLabel, &[f64])> {
    let mut out: Vec<(ScaleLabel, &[f64])> = d
        .imfs
        .iter()
        .map(|imf| (ScaleLabel::Imf(imf.scale_index), imf.values.as_slice()))
        .collect();
    if include_residue {
        out.push((ScaleLabel::Residue, d.residue.as_slice()));
    }
    out
}

/// Correlation of every IMF of `dx` with every IMF of `dy`.
///
/// With `include_residue`, the residues get an extra row and column. Residues
/// mostly carry trend, so their correlations are flagged on the result.
pub fn scale_correlation(
    dx: &Decomposition,
    dy: &Decomposition,
    include_residue: bool,
) -> Result<ScaleCorrelationMatrix> {
    if dx.source_length != dy.source_length {
        return Err(Error::LengthMismatch {
            left: dx.source_length,
            right: dy.source_length,
        });
    }
    let rows = components(dx, include_residue);
    let cols = components(dy, include_residue);
    for (_, v) in rows.iter().chain(&cols) {
        if v.len() != dx.source_length {
            return Err(Error::LengthMismatch {
                left: dx.source_length,
                right: v.len(),
            });
        }
    }
    let mut entries = Vec::with_capacity(rows.len() * cols.len());
    for (_, a) in &rows {
        for (_, b) in &cols {
            entries.push(pearson_unchecked(a, b));
        }
    }
    Ok(ScaleCorrelationMatrix {
        entries,
        rows: rows.iter().map(|(l, _)| *l).collect(),
        cols: cols.iter().map(|(l, _)| *l).collect(),
        includes_residue: include_residue,
    })
}

/// Maximum lag and rolling-window size for one scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LagWindowRule {
    /// Largest lag magnitude, in samples.
    pub lambda_max: usize,
    /// Window size, in samples.
    pub window: usize,
}

impl LagWindowRule {
    /// Window `max(lambda_max, 20)` for the given lag bound.
    pub fn from_lag(lambda_max: usize) -> Self {
        Self {
            lambda_max,
            window: lambda_max.max(MIN_WINDOW),
        }
    }

    /// Rule with the lag bound reduced so every lag keeps at least two pairs
    /// inside the window. The bound rule can produce `lambda_max == window`.
    pub fn effective(self) -> Self {
        Self {
            lambda_max: self.lambda_max.min(self.window.saturating_sub(2)),
            window: self.window,
        }
    }

    /// Rounded means of lag bounds and of windows; `None` for an empty slice.
    pub fn average(rules: &[LagWindowRule]) -> Option<Self> {
        if rules.is_empty() {
            return None;
        }
        let n = rules.len() as f64;
        let lag = rules.iter().map(|r| r.lambda_max as f64).sum::<f64>() / n;
        let win = rules.iter().map(|r| r.window as f64).sum::<f64>() / n;
        Some(Self {
            lambda_max: libm::round(lag) as usize,
            window: libm::round(win) as usize,
        })
    }
}

/// Lag bound `ceil(max(px, py))` with its window.
pub fn lag_bound(px: f64, py: f64) -> Result<LagWindowRule> {
    let ok = |p: f64| p.is_finite() && p > 0.0;
    if !ok(px) || !ok(py) {
        return Err(Error::UndefinedPeriod);
    }
    Ok(LagWindowRule::from_lag(libm::ceil(px.max(py)) as usize))
}

/// Rolling lagged correlation between two same-scale IMFs.
pub fn lagged_windowed_correlation(
    ix: &Imf,
    iy: &Imf,
    rule: LagWindowRule,
) -> Result<LaggedCorrelationField> {
    lagged_correlation_field(&ix.values, &iy.values, ix.scale_index, rule)
}

/// Slice form of [`lagged_windowed_correlation`].
///
/// For window end `t` (1-based, `t >= W`) and lag `l >= 0` the entry
/// correlates `x(s)` with `y(s + l)` for `s` in `t-W+1 ..= t-l`. Negative lags
/// swap the roles: `y(s)` against `x(s + l)`. A positive extremum therefore
/// means `x` leads `y`.
pub fn lagged_correlation_field(
    x: &[f64],
    y: &[f64],
    scale_index: usize,
    rule: LagWindowRule,
) -> Result<LaggedCorrelationField> {
    let n = x.len();
    if y.len() != n {
        return Err(Error::LengthMismatch {
            left: n,
            right: y.len(),
        });
    }
    let LagWindowRule { lambda_max, window } = rule;
    if lambda_max >= window {
        return Err(Error::LagNotBelowWindow { lambda_max, window });
    }
    if window > n {
        return Err(Error::WindowTooLong { window, len: n });
    }
    let lags: Vec<i64> = (-(lambda_max as i64)..=lambda_max as i64).collect();
    let n_windows = n + 1 - window;
    let mut entries = Vec::with_capacity(lags.len() * n_windows);
    for &lag in &lags {
        let l = lag.unsigned_abs() as usize;
        let (lead, follow) = if lag >= 0 { (x, y) } else { (y, x) };
        rolling_pearson(&lead[..n - l], &follow[l..], window - l, &mut entries);
    }
    Ok(LaggedCorrelationField {
        scale_index,
        lags,
        window,
        source_length: n,
        entries,
    })
}
