//! Shared domain types.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};

/// Shortest series accepted for decomposition.
pub const MIN_DECOMPOSITION_LEN: usize = 8;

/// A uniformly sampled real series.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    values: Vec<f64>,
    dt: f64,
    label: String,
}

impl TimeSeries {
    /// Builds a series, rejecting non-finite samples.
    ///
    /// `dt` is the sampling interval in seconds and is carried as metadata only.
    pub fn new(label: impl Into<String>, values: Vec<f64>, dt: f64) -> Result<Self> {
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidConfig("sampling interval must be positive"));
        }
        Ok(Self {
            values,
            dt,
            label: label.into(),
        })
    }

    /// Samples.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Sampling interval in seconds.
    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Instrument label.
    pub fn label(&self) -> &str {
        &self.label
    }

    /// Number of samples.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// True for an empty series.
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Why sifting stopped before the stop criterion was met.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SiftWarning {
    /// The iteration cap was reached.
    IterationCap,
    /// The candidate lost its envelope extrema mid-sifting and fails the
    /// extrema/zero-crossing balance.
    ExtremaExhausted,
}

/// One intrinsic mode function.
#[derive(Debug, Clone, PartialEq)]
pub struct Imf {
    /// Samples, same length as the decomposed series.
    pub values: Vec<f64>,
    /// 1-based scale index, highest frequency first.
    pub scale_index: usize,
    /// Samples per oscillation (length divided by the number of maxima);
    /// `None` when the component has no interior maximum.
    pub period: Option<f64>,
    /// Number of sifting iterations used.
    pub iterations: usize,
    /// Set when sifting ended without satisfying the stop criterion.
    pub warning: Option<SiftWarning>,
}

/// IMFs plus residue of one series.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    /// IMFs ordered from highest to lowest frequency.
    pub imfs: Vec<Imf>,
    /// What is left after the last IMF was removed.
    pub residue: Vec<f64>,
    /// Length of the input.
    pub source_length: usize,
}

impl Decomposition {
    /// Number of IMFs.
    pub fn len(&self) -> usize {
        self.imfs.len()
    }

    /// True when no IMF was extracted.
    pub fn is_empty(&self) -> bool {
        self.imfs.is_empty()
    }

    /// Sum of all IMFs and the residue.
    pub fn reconstruct(&self) -> Vec<f64> {
        let mut out = self.residue.clone();
        for imf in &self.imfs {
            for (o, v) in out.iter_mut().zip(&imf.values) {
                *o += v;
            }
        }
        out
    }

    /// Estimated periods, one per IMF.
    pub fn periods(&self) -> Vec<Option<f64>> {
        self.imfs.iter().map(|imf| imf.period).collect()
    }
}

/// Row or column identity in a scale correlation matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ScaleLabel {
    /// IMF with the given 1-based scale index.
    Imf(usize),
    /// The residue.
    Residue,
}

impl fmt::Display for ScaleLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScaleLabel::Imf(k) => write!(f, "imf_{k}"),
            ScaleLabel::Residue => f.write_str("residue"),
        }
    }
}

/// Pearson correlations between the components of two decompositions.
///
/// Undefined entries (a zero-variance component) are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleCorrelationMatrix {
    /// Row-major entries.
    pub entries: Vec<Option<f64>>,
    /// Row identities (components of the first series).
    pub rows: Vec<ScaleLabel>,
    /// Column identities (components of the second series).
    pub cols: Vec<ScaleLabel>,
    /// True when a residue row and column are present. Residue-to-residue
    /// correlation mostly measures shared trend and should be read with care.
    pub includes_residue: bool,
}

impl ScaleCorrelationMatrix {
    /// Entry at `(row, col)`.
    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        self.entries[row * self.cols.len() + col]
    }

    /// Entry addressed by labels.
    pub fn get_by_label(&self, row: ScaleLabel, col: ScaleLabel) -> Option<f64> {
        let r = self.rows.iter().position(|&l| l == row)?;
        let c = self.cols.iter().position(|&l| l == col)?;
        self.get(r, c)
    }

    /// Number of rows.
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    /// Number of columns.
    pub fn n_cols(&self) -> usize {
        self.cols.len()
    }

    /// Same-label entries `(label, value)` in row order.
    pub fn diagonal(&self) -> Vec<(ScaleLabel, Option<f64>)> {
        self.rows
            .iter()
            .enumerate()
            .filter_map(|(r, &label)| {
                let c = self.cols.iter().position(|&l| l == label)?;
                Some((label, self.get(r, c)))
            })
            .collect()
    }

    /// Re-lays the matrix on the given labels; cells it lacks become undefined.
    pub fn aligned_to(&self, rows: &[ScaleLabel], cols: &[ScaleLabel]) -> Self {
        let mut entries = Vec::with_capacity(rows.len() * cols.len());
        for &r in rows {
            for &c in cols {
                entries.push(self.get_by_label(r, c));
            }
        }
        Self {
            entries,
            rows: rows.to_vec(),
            cols: cols.to_vec(),
            includes_residue: self.includes_residue
                || rows.contains(&ScaleLabel::Residue)
                || cols.contains(&ScaleLabel::Residue),
        }
    }
}

/// Rolling-window lagged correlation at one scale.
///
/// Rows are lags `-lambda_max..=lambda_max`, columns are window end times
/// `window..=source_length` (1-based, so the first column covers samples
/// `1..=window`).
#[derive(Debug, Clone, PartialEq)]
pub struct LaggedCorrelationField {
    /// 1-based scale index.
    pub scale_index: usize,
    /// Lags, ascending.
    pub lags: Vec<i64>,
    /// Window size.
    pub window: usize,
    /// Length of the correlated series.
    pub source_length: usize,
    /// Row-major entries, `lags.len() * n_windows()`.
    pub entries: Vec<Option<f64>>,
}

impl LaggedCorrelationField {
    /// Number of window positions.
    pub fn n_windows(&self) -> usize {
        self.source_length + 1 - self.window
    }

    /// 1-based window end times, one per column.
    pub fn window_ends(&self) -> core::ops::RangeInclusive<usize> {
        self.window..=self.source_length
    }

    /// Largest lag magnitude.
    pub fn lambda_max(&self) -> usize {
        self.lags.last().map_or(0, |&l| l as usize)
    }

    /// Entry for `lag` at window end `t` (1-based).
    pub fn get(&self, lag: i64, t: usize) -> Option<f64> {
        let row = self.lags.iter().position(|&l| l == lag)?;
        if t < self.window || t > self.source_length {
            return None;
        }
        self.entries[row * self.n_windows() + (t - self.window)]
    }

    /// Row of entries for `lag`.
    pub fn row(&self, lag: i64) -> Option<&[Option<f64>]> {
        let row = self.lags.iter().position(|&l| l == lag)?;
        let n = self.n_windows();
        Some(&self.entries[row * n..(row + 1) * n])
    }
}
