//! Plot-ready delimited output and the plain-text run manifest.
//!
//! Numbers are written with 17 significant digits so that every value parses
//! back to the identical `f64`. Undefined correlations are empty fields.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use emdx_core::aggregate::{DayFlag, DayResult, DiagonalHistograms, Side};
use emdx_core::{LagWindowRule, LaggedCorrelationField, ScaleCorrelationMatrix, ScaleLabel};

use crate::error::{Error, Result};

/// 17 significant digits, scientific notation.
pub fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_num).unwrap_or_default()
}

/// Creates `dir` and checks that files can be written into it.
pub fn ensure_writable(dir: &Path) -> Result<()> {
    let unwritable = |source| Error::Unwritable {
        path: dir.to_path_buf(),
        source,
    };
    fs::create_dir_all(dir).map_err(unwritable)?;
    let probe = dir.join(".emdx-write-probe");
    fs::write(&probe, b"").map_err(unwritable)?;
    fs::remove_file(&probe).map_err(unwritable)?;
    Ok(())
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Replaces characters that are unsafe in file names.
pub fn file_stem(id: &str) -> String {
    id.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.') {
                c
            } else {
                '_'
            }
        })
        .collect()
}

/// `t,value` rows with 1-based `t`.
pub fn series_csv(values: &[f64]) -> String {
    let mut s = String::from("t,value\n");
    for (t, v) in values.iter().enumerate() {
        let _ = writeln!(s, "{},{}", t + 1, fmt_num(*v));
    }
    s
}

/// Header `scale,<col labels>`, one row per row label.
pub fn matrix_csv(m: &ScaleCorrelationMatrix) -> String {
    let mut s = String::from("scale");
    for c in &m.cols {
        let _ = write!(s, ",{c}");
    }
    s.push('\n');
    for (r, label) in m.rows.iter().enumerate() {
        s.push_str(&label.to_string());
        for c in 0..m.n_cols() {
            s.push(',');
            s.push_str(&fmt_opt(m.get(r, c)));
        }
        s.push('\n');
    }
    s
}

/// Header `lag,<window end times>`, one row per lag.
pub fn field_csv(f: &LaggedCorrelationField) -> String {
    let mut s = String::from("lag");
    for t in f.window_ends() {
        let _ = write!(s, ",{t}");
    }
    s.push('\n');
    for &lag in &f.lags {
        let _ = write!(s, "{lag}");
        for v in f.row(lag).unwrap_or(&[]) {
            s.push(',');
            s.push_str(&fmt_opt(*v));
        }
        s.push('\n');
    }
    s
}

/// Columns `bin_lower,bin_upper` then one count column per scale.
pub fn histograms_csv(h: &DiagonalHistograms) -> String {
    let mut s = String::from("bin_lower,bin_upper");
    for scale in &h.scales {
        let _ = write!(s, ",{scale}");
    }
    s.push('\n');
    for b in 0..h.bins {
        let (lo, hi) = h.edges(b);
        let _ = write!(s, "{},{}", fmt_num(lo), fmt_num(hi));
        for counts in &h.counts {
            let _ = write!(s, ",{}", counts[b]);
        }
        s.push('\n');
    }
    s
}

fn parse_label(s: &str) -> Result<ScaleLabel> {
    if s == "residue" {
        return Ok(ScaleLabel::Residue);
    }
    s.strip_prefix("imf_")
        .and_then(|k| k.parse().ok())
        .map(ScaleLabel::Imf)
        .ok_or_else(|| Error::Parse(format!("bad scale label `{s}`")))
}

fn parse_opt(s: &str) -> Result<Option<f64>> {
    if s.is_empty() {
        return Ok(None);
    }
    s.parse()
        .map(Some)
        .map_err(|_| Error::Parse(format!("bad number `{s}`")))
}

/// Inverse of [`matrix_csv`].
pub fn parse_matrix(text: &str) -> Result<ScaleCorrelationMatrix> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty matrix file".into()))?;
    let cols = header
        .split(',')
        .skip(1)
        .map(parse_label)
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    let mut entries = Vec::new();
    for line in lines {
        let mut fields = line.split(',');
        rows.push(parse_label(fields.next().unwrap_or(""))?);
        let row = fields.map(parse_opt).collect::<Result<Vec<_>>>()?;
        if row.len() != cols.len() {
            return Err(Error::Parse("ragged matrix row".into()));
        }
        entries.extend(row);
    }
    let includes_residue =
        rows.contains(&ScaleLabel::Residue) || cols.contains(&ScaleLabel::Residue);
    Ok(ScaleCorrelationMatrix {
        entries,
        rows,
        cols,
        includes_residue,
    })
}

/// Inverse of [`field_csv`]; the scale index is not stored in the file.
pub fn parse_field(text: &str, scale_index: usize) -> Result<LaggedCorrelationField> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty field file".into()))?;
    let ends = header
        .split(',')
        .skip(1)
        .map(|t| {
            t.parse::<usize>()
                .map_err(|_| Error::Parse(format!("bad window end `{t}`")))
        })
        .collect::<Result<Vec<_>>>()?;
    let (&window, &source_length) = ends
        .first()
        .zip(ends.last())
        .ok_or_else(|| Error::Parse("field without windows".into()))?;
    let mut lags = Vec::new();
    let mut entries = Vec::new();
    for line in lines {
        let mut fields = line.split(',');
        let lag = fields
            .next()
            .and_then(|l| l.parse::<i64>().ok())
            .ok_or_else(|| Error::Parse("bad lag".into()))?;
        lags.push(lag);
        let row = fields.map(parse_opt).collect::<Result<Vec<_>>>()?;
        if row.len() != ends.len() {
            return Err(Error::Parse("ragged field row".into()));
        }
        entries.extend(row);
    }
    Ok(LaggedCorrelationField {
        scale_index,
        lags,
        window,
        source_length,
        entries,
    })
}

fn describe_flag(f: &DayFlag) -> String {
    let side = |s: &Side| match s {
        Side::X => "x",
        Side::Y => "y",
    };
    match f {
        DayFlag::ImfCountMismatch { x, y } => format!("imf_count_mismatch x={x} y={y}"),
        DayFlag::NoCommonScales => "no_common_scales".to_string(),
        DayFlag::SiftWarning {
            side: s,
            scale,
            warning,
        } => format!("sift_warning {} imf_{scale} {warning:?}", side(s)),
        DayFlag::ScaleSkipped { scale, reason } => format!("scale_skipped imf_{scale} ({reason})"),
    }
}

fn fmt_period(p: Option<f64>) -> String {
    p.map(|v| format!("{}", v.round() as i64))
        .unwrap_or_else(|| "-".into())
}

/// Run manifest: configuration, per-day period and lag/window tables, flags,
/// dropped days, and the list of files written.
#[derive(Debug, Default)]
pub struct Manifest {
    /// Command that produced the run.
    pub command: String,
    /// Configuration lines.
    pub config: Vec<(String, String)>,
    /// `(day, label, periods)`.
    pub periods: Vec<(String, String, Vec<Option<f64>>)>,
    /// `(day, scale, rule)` per pair.
    pub rules: Vec<(String, usize, LagWindowRule)>,
    /// Averaged rule per scale.
    pub common_rules: Vec<(usize, LagWindowRule)>,
    /// `(day, flag)`.
    pub flags: Vec<(String, String)>,
    /// `(day, residue correlation)`; informational only.
    pub residues: Vec<(String, Option<f64>)>,
    /// Dropped-day warnings.
    pub warnings: Vec<String>,
    /// Files written, relative to the output directory.
    pub files: Vec<PathBuf>,
}

impl Manifest {
    /// Adds the period, rule and flag tables of a day result.
    pub fn add_day(&mut self, day: &DayResult, pair: (&str, &str)) {
        self.periods.push((
            day.day_id.clone(),
            pair.0.to_string(),
            day.periods_x.clone(),
        ));
        self.periods.push((
            day.day_id.clone(),
            pair.1.to_string(),
            day.periods_y.clone(),
        ));
        for (scale, rule) in &day.rules {
            self.rules.push((day.day_id.clone(), *scale, *rule));
        }
        for f in &day.flags {
            self.flags.push((day.day_id.clone(), describe_flag(f)));
        }
        self.residues
            .push((day.day_id.clone(), day.residue_correlation));
    }

    /// Plain-text rendering.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "command={}", self.command);
        for (k, v) in &self.config {
            let _ = writeln!(s, "{k}={v}");
        }
        if !self.periods.is_empty() {
            s.push_str("\n[periods] samples per oscillation, rounded\n");
            let width = self.periods.iter().map(|p| p.2.len()).max().unwrap_or(0);
            s.push_str("day\tlabel");
            for k in 1..=width {
                let _ = write!(s, "\timf_{k}");
            }
            s.push('\n');
            for (day, label, periods) in &self.periods {
                let _ = write!(s, "{day}\t{label}");
                for p in periods {
                    let _ = write!(s, "\t{}", fmt_period(*p));
                }
                s.push('\n');
            }
        }
        if !self.rules.is_empty() {
            s.push_str("\n[lag_window] per day\nday\tscale\tlag\twindow\n");
            for (day, scale, r) in &self.rules {
                let _ = writeln!(s, "{day}\timf_{scale}\t{}\t{}", r.lambda_max, r.window);
            }
        }
        if !self.common_rules.is_empty() {
            s.push_str("\n[lag_window] averaged over days\nscale\tlag\twindow\n");
            for (scale, r) in &self.common_rules {
                let _ = writeln!(s, "imf_{scale}\t{}\t{}", r.lambda_max, r.window);
            }
        }
        if !self.flags.is_empty() {
            s.push_str("\n[flags]\n");
            for (day, f) in &self.flags {
                let _ = writeln!(s, "{day}\t{f}");
            }
        }
        if !self.residues.is_empty() {
            s.push_str("\n[residue] correlation of residues, not used in medians\nday\trho\n");
            for (day, r) in &self.residues {
                let _ = writeln!(s, "{day}\t{}", fmt_opt(*r));
            }
        }
        if !self.warnings.is_empty() {
            s.push_str("\n[dropped]\n");
            for w in &self.warnings {
                let _ = writeln!(s, "{w}");
            }
        }
        if !self.files.is_empty() {
            s.push_str("\n[files]\n");
            for f in &self.files {
                let _ = writeln!(s, "{}", f.display());
            }
        }
        s
    }
}
