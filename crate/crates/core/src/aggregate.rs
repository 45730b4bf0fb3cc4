//! Per-day pipeline and cross-day reduction.
//!
//! Every day is decomposed and correlated on its own; days are never joined.
//! Results are then reduced with elementwise medians that skip undefined
//! entries, and with fixed-range histograms of same-scale correlations.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::correlation::{
    lag_bound, lagged_windowed_correlation, pearson, scale_correlation, LagWindowRule,
};
use crate::emd::{decompose, SiftConfig};
use crate::error::{Error, Result};
use crate::types::{
    LaggedCorrelationField, ScaleCorrelationMatrix, ScaleLabel, SiftWarning, TimeSeries,
};

/// Default number of histogram bins over `[-1, 1]`.
pub const DEFAULT_BINS: usize = 40;

/// Equal-length series of several instruments for one day.
#[derive(Debug, Clone, PartialEq)]
pub struct DayPanel {
    /// Day identifier, taken verbatim from the input.
    pub day_id: String,
    series_by_label: BTreeMap<String, TimeSeries>,
}

impl DayPanel {
    /// Builds a panel; all series must have the same length.
    pub fn new(day_id: impl Into<String>, series: Vec<TimeSeries>) -> Result<Self> {
        let mut map = BTreeMap::new();
        let mut len = None;
        for s in series {
            match len {
                None => len = Some(s.len()),
                Some(l) if l != s.len() => {
                    return Err(Error::LengthMismatch {
                        left: l,
                        right: s.len(),
                    })
                }
                _ => {}
            }
            map.insert(String::from(s.label()), s);
        }
        Ok(Self {
            day_id: day_id.into(),
            series_by_label: map,
        })
    }

    /// Series for `label`.
    pub fn get(&self, label: &str) -> Option<&TimeSeries> {
        self.series_by_label.get(label)
    }

    /// Labels in sorted order.
    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.series_by_label.keys().map(String::as_str)
    }

    /// Common series length (0 for an empty panel).
    pub fn len(&self) -> usize {
        self.series_by_label
            .values()
            .next()
            .map_or(0, TimeSeries::len)
    }

    /// True when the panel holds no series.
    pub fn is_empty(&self) -> bool {
        self.series_by_label.is_empty()
    }
}

/// Which side of the pair a flag refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// First instrument.
    X,
    /// Second instrument.
    Y,
}

/// Conditions that make a day's output partial.
#[derive(Debug, Clone, PartialEq)]
pub enum DayFlag {
    /// The two decompositions have different IMF counts; only common scales
    /// get lag fields.
    ImfCountMismatch {
        /// IMFs of the first series.
        x: usize,
        /// IMFs of the second series.
        y: usize,
    },
    /// Neither decomposition produced an IMF shared with the other.
    NoCommonScales,
    /// An IMF ended sifting without meeting the stop criterion.
    SiftWarning {
        /// Series.
        side: Side,
        /// Scale index.
        scale: usize,
        /// Reason.
        warning: SiftWarning,
    },
    /// No lag field for a scale.
    ScaleSkipped {
        /// Scale index.
        scale: usize,
        /// Why.
        reason: Error,
    },
}

/// Everything computed for one day and one instrument pair.
#[derive(Debug, Clone, PartialEq)]
pub struct DayResult {
    /// Day identifier.
    pub day_id: String,
    /// Estimated IMF periods of the first series.
    pub periods_x: Vec<Option<f64>>,
    /// Estimated IMF periods of the second series.
    pub periods_y: Vec<Option<f64>>,
    /// Scale correlation matrix over the IMFs.
    pub matrix: ScaleCorrelationMatrix,
    /// Correlation of the two residues. Residues mostly carry trend, so this
    /// is kept apart from the matrix and out of every median and histogram.
    pub residue_correlation: Option<f64>,
    /// Lag bound and window per common scale, before any reduction of the lag.
    pub rules: Vec<(usize, LagWindowRule)>,
    /// Lag fields per common scale, computed with the effective rule.
    pub fields: Vec<LaggedCorrelationField>,
    /// Partial-output conditions.
    pub flags: Vec<DayFlag>,
}

impl DayResult {
    /// True when anything was flagged.
    pub fn is_flagged(&self) -> bool {
        !self.flags.is_empty()
    }
}

/// Decomposes both series of `pair`, then computes the scale correlation
/// matrix and a lag field for every scale present in both decompositions.
///
/// The lag bound of a scale comes from that day's two periods.
pub fn run_day(panel: &DayPanel, pair: (&str, &str), cfg: &SiftConfig) -> Result<DayResult> {
    let x = panel.get(pair.0).ok_or(Error::MissingLabel)?;
    let y = panel.get(pair.1).ok_or(Error::MissingLabel)?;
    let dx = decompose(x, cfg)?;
    let dy = decompose(y, cfg)?;
    let matrix = scale_correlation(&dx, &dy, false)?;
    let residue_correlation = pearson(&dx.residue, &dy.residue)?;

    let mut flags = Vec::new();
    for (side, d) in [(Side::X, &dx), (Side::Y, &dy)] {
        for imf in &d.imfs {
            if let Some(warning) = imf.warning {
                flags.push(DayFlag::SiftWarning {
                    side,
                    scale: imf.scale_index,
                    warning,
                });
            }
        }
    }
    if dx.len() != dy.len() {
        flags.push(DayFlag::ImfCountMismatch {
            x: dx.len(),
            y: dy.len(),
        });
    }
    let common = dx.len().min(dy.len());
    if common == 0 {
        flags.push(DayFlag::NoCommonScales);
    }

    let mut rules = Vec::new();
    let mut fields = Vec::new();
    for (ix, iy) in dx.imfs.iter().zip(&dy.imfs) {
        let scale = ix.scale_index;
        let rule = match (ix.period, iy.period) {
            (Some(px), Some(py)) => lag_bound(px, py),
            _ => Err(Error::UndefinedPeriod),
        };
        let rule = match rule {
            Ok(r) => r,
            Err(reason) => {
                flags.push(DayFlag::ScaleSkipped { scale, reason });
                continue;
            }
        };
        rules.push((scale, rule));
        match lagged_windowed_correlation(ix, iy, rule.effective()) {
            Ok(f) => fields.push(f),
            Err(reason) => flags.push(DayFlag::ScaleSkipped { scale, reason }),
        }
    }

    Ok(DayResult {
        day_id: panel.day_id.clone(),
        periods_x: dx.periods(),
        periods_y: dy.periods(),
        matrix,
        residue_correlation,
        rules,
        fields,
        flags,
    })
}

/// Median of the defined values; the two central values are averaged for
/// even counts.
pub fn median_defined(values: impl IntoIterator<Item = Option<f64>>) -> Option<f64> {
    let mut v: Vec<f64> = values.into_iter().flatten().collect();
    median_in_place(&mut v)
}

/// Median of `v`, reordering it. Selection under the IEEE total order makes
/// the result independent of the input order, bit for bit.
fn median_in_place(v: &mut [f64]) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    let (mid, odd) = (v.len() / 2, v.len() % 2 == 1);
    let (below, &mut upper, _) = v.select_nth_unstable_by(mid, f64::total_cmp);
    if odd {
        return Some(upper);
    }
    let lower = below.iter().copied().max_by(f64::total_cmp)?;
    Some((lower + upper) / 2.0)
}

/// Elementwise median over conformable matrices, skipping undefined entries.
pub fn median_scale_matrix(matrices: &[ScaleCorrelationMatrix]) -> Result<ScaleCorrelationMatrix> {
    let first = matrices.first().ok_or(Error::NoOverlappingGrid)?;
    if matrices
        .iter()
        .any(|m| m.rows != first.rows || m.cols != first.cols)
    {
        return Err(Error::NotConformable);
    }
    let entries = (0..first.entries.len())
        .map(|i| median_defined(matrices.iter().map(|m| m.entries[i])))
        .collect();
    Ok(ScaleCorrelationMatrix {
        entries,
        rows: first.rows.clone(),
        cols: first.cols.clone(),
        includes_residue: matrices.iter().any(|m| m.includes_residue),
    })
}

/// Re-lays matrices on the union of their row and column labels so that days
/// with fewer IMFs contribute only the scales they have.
pub fn conform_matrices(matrices: &[ScaleCorrelationMatrix]) -> Vec<ScaleCorrelationMatrix> {
    let rows: BTreeSet<ScaleLabel> = matrices
        .iter()
        .flat_map(|m| m.rows.iter().copied())
        .collect();
    let cols: BTreeSet<ScaleLabel> = matrices
        .iter()
        .flat_map(|m| m.cols.iter().copied())
        .collect();
    let rows: Vec<ScaleLabel> = rows.into_iter().collect();
    let cols: Vec<ScaleLabel> = cols.into_iter().collect();
    matrices
        .iter()
        .map(|m| {
            if m.rows == rows && m.cols == cols {
                m.clone()
            } else {
                m.aligned_to(&rows, &cols)
            }
        })
        .collect()
}

/// Elementwise median of same-scale lag fields on a common grid.
///
/// The grid is lags `-L..=L` and window ends `W..=T` from `lag_window` (after
/// reducing the lag so each lag keeps two pairs). A day contributes to a cell
/// only when its own field has that lag and window end; cells no day covers
/// stay undefined.
pub fn median_lag_field(
    fields: &[LaggedCorrelationField],
    lag_window: LagWindowRule,
) -> Result<LaggedCorrelationField> {
    let first = fields.first().ok_or(Error::NoOverlappingGrid)?;
    if fields
        .iter()
        .any(|f| f.scale_index != first.scale_index || f.source_length != first.source_length)
    {
        return Err(Error::NotConformable);
    }
    let rule = lag_window.effective();
    let n = first.source_length;
    if rule.window == 0 || rule.window > n {
        return Err(Error::NoOverlappingGrid);
    }
    let lags: Vec<i64> = (-(rule.lambda_max as i64)..=rule.lambda_max as i64).collect();
    let n_windows = n + 1 - rule.window;

    // Row offset of every grid lag in every field, if the field has it.
    let rows: Vec<Vec<Option<usize>>> = fields
        .iter()
        .map(|f| {
            lags.iter()
                .map(|lag| f.lags.iter().position(|l| l == lag))
                .collect()
        })
        .collect();

    let mut covered = false;
    let mut entries = Vec::with_capacity(lags.len() * n_windows);
    let mut buf: Vec<f64> = Vec::with_capacity(fields.len());
    for li in 0..lags.len() {
        for t in rule.window..=n {
            buf.clear();
            for (f, r) in fields.iter().zip(&rows) {
                if let Some(row) = r[li] {
                    if t >= f.window {
                        covered = true;
                        buf.extend(f.entries[row * f.n_windows() + (t - f.window)]);
                    }
                }
            }
            entries.push(median_in_place(&mut buf));
        }
    }
    if !covered {
        return Err(Error::NoOverlappingGrid);
    }
    Ok(LaggedCorrelationField {
        scale_index: first.scale_index,
        lags,
        window: rule.window,
        source_length: n,
        entries,
    })
}

/// Per-scale histograms of same-scale correlations across days.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalHistograms {
    /// Number of uniform bins over `[-1, 1]`.
    pub bins: usize,
    /// Scales, ascending.
    pub scales: Vec<ScaleLabel>,
    /// `counts[s][b]`: days whose scale-`s` correlation fell in bin `b`.
    pub counts: Vec<Vec<u64>>,
}

impl DiagonalHistograms {
    /// Lower and upper edge of bin `b`.
    pub fn edges(&self, b: usize) -> (f64, f64) {
        let w = 2.0 / self.bins as f64;
        (-1.0 + b as f64 * w, -1.0 + (b + 1) as f64 * w)
    }

    /// Counts for one scale.
    pub fn counts_for(&self, scale: ScaleLabel) -> Option<&[u64]> {
        let i = self.scales.iter().position(|&s| s == scale)?;
        Some(&self.counts[i])
    }
}

fn bin_of(v: f64, bins: usize) -> usize {
    let b = libm::floor((v + 1.0) / 2.0 * bins as f64);
    if b < 0.0 {
        0
    } else {
        (b as usize).min(bins - 1)
    }
}

/// Histograms of same-scale IMF correlations; residues are left out.
pub fn diagonal_histograms(
    matrices: &[ScaleCorrelationMatrix],
    bins: usize,
) -> Result<DiagonalHistograms> {
    diagonal_histograms_with(matrices, bins, false)
}

/// As [`diagonal_histograms`], optionally with the residue-to-residue entry.
pub fn diagonal_histograms_with(
    matrices: &[ScaleCorrelationMatrix],
    bins: usize,
    include_residue: bool,
) -> Result<DiagonalHistograms> {
    if bins == 0 {
        return Err(Error::InvalidConfig("histogram needs at least one bin"));
    }
    let mut by_scale: BTreeMap<ScaleLabel, Vec<u64>> = BTreeMap::new();
    for m in matrices {
        for (label, value) in m.diagonal() {
            if label == ScaleLabel::Residue && !include_residue {
                continue;
            }
            let counts = by_scale.entry(label).or_insert_with(|| vec![0; bins]);
            if let Some(v) = value {
                counts[bin_of(v, bins)] += 1;
            }
        }
    }
    let (scales, counts) = by_scale.into_iter().unzip();
    Ok(DiagonalHistograms {
        bins,
        scales,
        counts,
    })
}

/// Cross-day reduction of a set of day results.
#[derive(Debug, Clone, PartialEq)]
pub struct MedianSummary {
    /// Elementwise median of the scale correlation matrices.
    pub median_scale_matrix: ScaleCorrelationMatrix,
    /// Averaged lag/window rule per scale.
    pub common_rules: Vec<(usize, LagWindowRule)>,
    /// Median lag field per scale, on the averaged grid.
    pub median_lag_fields: Vec<LaggedCorrelationField>,
    /// Histograms of same-scale correlations.
    pub histograms: DiagonalHistograms,
}

/// Averaged lag/window rule and median lag field for every scale that has a
/// field on at least one day.
pub fn median_lag_fields(
    days: &[DayResult],
) -> Result<Vec<(LagWindowRule, LaggedCorrelationField)>> {
    let scales: BTreeSet<usize> = days
        .iter()
        .flat_map(|d| d.fields.iter().map(|f| f.scale_index))
        .collect();
    let mut out = Vec::new();
    for scale in scales {
        let rules: Vec<LagWindowRule> = days
            .iter()
            .flat_map(|d| d.rules.iter().filter(|(s, _)| *s == scale).map(|(_, r)| *r))
            .collect();
        let fields: Vec<LaggedCorrelationField> = days
            .iter()
            .flat_map(|d| d.fields.iter().filter(|f| f.scale_index == scale).cloned())
            .collect();
        let Some(rule) = LagWindowRule::average(&rules) else {
            continue;
        };
        out.push((rule, median_lag_field(&fields, rule)?));
    }
    Ok(out)
}

/// Medians and histograms over `days`. The result does not depend on the
/// order of `days`.
pub fn summarize(days: &[DayResult], bins: usize) -> Result<MedianSummary> {
    let matrices: Vec<ScaleCorrelationMatrix> = days.iter().map(|d| d.matrix.clone()).collect();
    let median = median_scale_matrix(&conform_matrices(&matrices))?;
    let histograms = diagonal_histograms(&matrices, bins)?;
    let (common_rules, median_lag_fields) = median_lag_fields(days)?
        .into_iter()
        .map(|(rule, field)| ((field.scale_index, rule), field))
        .unzip();
    Ok(MedianSummary {
        median_scale_matrix: median,
        common_rules,
        median_lag_fields,
        histograms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m1(v: Option<f64>) -> ScaleCorrelationMatrix {
        ScaleCorrelationMatrix {
            entries: vec![v],
            rows: vec![ScaleLabel::Imf(1)],
            cols: vec![ScaleLabel::Imf(1)],
            includes_residue: false,
        }
    }

    #[test]
    fn median_examples() {
        let odd = [m1(Some(0.1)), m1(Some(0.2)), m1(Some(0.9))];
        assert_eq!(median_scale_matrix(&odd).unwrap().get(0, 0), Some(0.2));
        let even = [m1(Some(0.1)), m1(Some(0.3))];
        assert_eq!(
            median_scale_matrix(&even).unwrap().get(0, 0),
            Some((0.1 + 0.3) / 2.0)
        );
        let skip = [m1(Some(0.4)), m1(None), m1(Some(0.6))];
        assert_eq!(median_scale_matrix(&skip).unwrap().get(0, 0), Some(0.5));
        let none = [m1(None), m1(None)];
        assert_eq!(median_scale_matrix(&none).unwrap().get(0, 0), None);
    }

    #[test]
    fn median_rejects_nonconformable() {
        let mut other = m1(Some(0.1));
        other.rows = vec![ScaleLabel::Imf(2)];
        assert_eq!(
            median_scale_matrix(&[m1(Some(0.1)), other]),
            Err(Error::NotConformable)
        );
        assert_eq!(median_scale_matrix(&[]), Err(Error::NoOverlappingGrid));
    }

    #[test]
    fn conform_pads_missing_scales() {
        let big = ScaleCorrelationMatrix {
            entries: vec![Some(1.0), Some(0.5), Some(0.5), Some(1.0)],
            rows: vec![ScaleLabel::Imf(1), ScaleLabel::Imf(2)],
            cols: vec![ScaleLabel::Imf(1), ScaleLabel::Imf(2)],
            includes_residue: false,
        };
        let out = conform_matrices(&[big.clone(), m1(Some(0.3))]);
        assert_eq!(out[0], big);
        assert_eq!(out[1].entries, vec![Some(0.3), None, None, None]);
    }

    #[test]
    fn histogram_edges_and_counts() {
        let ms = [m1(Some(-1.0)), m1(Some(1.0)), m1(Some(0.0)), m1(None)];
        let h = diagonal_histograms(&ms, 4).unwrap();
        assert_eq!(h.counts_for(ScaleLabel::Imf(1)).unwrap(), &[1, 0, 1, 1]);
        assert_eq!(h.edges(0), (-1.0, -0.5));
        assert!(diagonal_histograms(&ms, 0).is_err());
    }

    #[test]
    fn histogram_single_matrix() {
        let h = diagonal_histograms(&[m1(Some(0.37))], DEFAULT_BINS).unwrap();
        assert_eq!(h.counts[0].iter().sum::<u64>(), 1);
    }

    fn field(window: usize, lambda_max: usize, n: usize, value: f64) -> LaggedCorrelationField {
        let lags: Vec<i64> = (-(lambda_max as i64)..=lambda_max as i64).collect();
        let entries = vec![Some(value); lags.len() * (n + 1 - window)];
        LaggedCorrelationField {
            scale_index: 1,
            lags,
            window,
            source_length: n,
            entries,
        }
    }

    #[test]
    fn lag_field_median_on_common_grid() {
        let fields = [
            field(20, 4, 100, 0.1),
            field(20, 3, 100, 0.3),
            field(22, 5, 100, 0.2),
        ];
        let m = median_lag_field(&fields, LagWindowRule::from_lag(4)).unwrap();
        assert_eq!(m.lags, (-4..=4).collect::<Vec<_>>());
        assert_eq!(m.window, 20);
        // t = 20: the window-22 day does not cover it.
        assert_eq!(m.get(0, 20), Some((0.1 + 0.3) / 2.0));
        assert_eq!(m.get(0, 50), Some(0.2));
        // lag 4 is missing from the second day.
        assert_eq!(m.get(4, 50), Some((0.1 + 0.2) / 2.0));
        assert_eq!(m.get(4, 21), Some(0.1));
    }

    #[test]
    fn lag_field_identical_days() {
        let f = field(20, 4, 60, 0.42);
        let m = median_lag_field(
            &[f.clone(), f.clone(), f.clone()],
            LagWindowRule::from_lag(4),
        )
        .unwrap();
        assert_eq!(m, f);
    }

    #[test]
    fn lag_field_without_overlap() {
        let f = field(20, 4, 60, 0.1);
        assert_eq!(
            median_lag_field(core::slice::from_ref(&f), LagWindowRule::from_lag(80)),
            Err(Error::NoOverlappingGrid)
        );
        assert_eq!(
            median_lag_field(&[], LagWindowRule::from_lag(4)),
            Err(Error::NoOverlappingGrid)
        );
        let mut g = f.clone();
        g.scale_index = 2;
        assert_eq!(
            median_lag_field(&[f, g], LagWindowRule::from_lag(4)),
            Err(Error::NotConformable)
        );
    }

    #[test]
    fn constant_series_day_is_flagged() {
        let wave: Vec<f64> = (0..120).map(|t| libm::sin(t as f64 * 0.8)).collect();
        let panel = DayPanel::new(
            "d",
            vec![
                TimeSeries::new("A", wave, 30.0).unwrap(),
                TimeSeries::new("B", vec![1.0; 120], 30.0).unwrap(),
            ],
        )
        .unwrap();
        let r = run_day(&panel, ("A", "B"), &SiftConfig::default().with_max_imfs(5)).unwrap();
        assert!(r.matrix.entries.iter().all(Option::is_none));
        assert!(r.fields.is_empty());
        assert!(r.flags.contains(&DayFlag::NoCommonScales));
        assert!(r.is_flagged());
    }

    #[test]
    fn missing_label_is_error() {
        let panel = DayPanel::new(
            "d",
            vec![TimeSeries::new("A", vec![0.0; 10], 30.0).unwrap()],
        )
        .unwrap();
        assert_eq!(
            run_day(&panel, ("A", "B"), &SiftConfig::default()),
            Err(Error::MissingLabel)
        );
    }

    #[test]
    fn panel_rejects_unequal_lengths() {
        let r = DayPanel::new(
            "d",
            vec![
                TimeSeries::new("A", vec![0.0; 10], 30.0).unwrap(),
                TimeSeries::new("B", vec![0.0; 11], 30.0).unwrap(),
            ],
        );
        assert!(matches!(r, Err(Error::LengthMismatch { .. })));
    }
}
