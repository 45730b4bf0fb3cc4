//! Delimited intraday price files.
//!
//! Two layouts are recognised from the header (case-insensitive):
//!
//! * long: `day,time,label,price`, one row per observation;
//! * wide: `day,time,<label1>,<label2>,...`, one column per instrument.
//!
//! Rows are grouped by the day column verbatim and sorted by time within each
//! day. Times compare numerically when they parse as numbers, otherwise as
//! text. A day is kept only if every requested label has exactly the declared
//! number of points.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use emdx_core::{DayPanel, TimeSeries};
use log::warn;

use crate::config::{RunConfig, Transform};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum TimeKey {
    Num(f64),
    Text(String),
}

impl TimeKey {
    fn parse(s: &str) -> Self {
        match s.trim().parse::<f64>() {
            Ok(v) if v.is_finite() => TimeKey::Num(v),
            _ => TimeKey::Text(s.trim().to_string()),
        }
    }

    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (TimeKey::Num(a), TimeKey::Num(b)) => a.total_cmp(b),
            (TimeKey::Num(_), TimeKey::Text(_)) => Ordering::Less,
            (TimeKey::Text(_), TimeKey::Num(_)) => Ordering::Greater,
            (TimeKey::Text(a), TimeKey::Text(b)) => a.cmp(b),
        }
    }
}

struct Observation {
    time: TimeKey,
    price: f64,
    line: u64,
    path: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Layout {
    Long {
        day: usize,
        time: usize,
        label: usize,
        price: usize,
    },
    Wide,
}

fn detect_layout(header: &csv::StringRecord) -> Option<Layout> {
    let names: Vec<String> = header
        .iter()
        .map(|h| h.trim().to_ascii_lowercase())
        .collect();
    let find = |n: &str| names.iter().position(|h| h == n);
    if let (Some(day), Some(time), Some(label), Some(price)) =
        (find("day"), find("time"), find("label"), find("price"))
    {
        return Some(Layout::Long {
            day,
            time,
            label,
            price,
        });
    }
    if names.len() >= 3 && names[0] == "day" && names[1] == "time" {
        return Some(Layout::Wide);
    }
    None
}

/// Panels plus the days that were dropped and why.
#[derive(Debug, Default)]
pub struct Ingested {
    /// Complete days, sorted by day identifier.
    pub panels: Vec<DayPanel>,
    /// One message per dropped day.
    pub warnings: Vec<String>,
    /// Time stamps of each kept day, strictly increasing.
    pub times: BTreeMap<String, Vec<String>>,
}

type DayMap = BTreeMap<String, BTreeMap<String, Vec<Observation>>>;

fn read_file(path: &Path, path_idx: usize, cfg: &RunConfig, days: &mut DayMap) -> Result<()> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(cfg.delimiter)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|source| Error::Csv {
            path: path.to_path_buf(),
            source,
        })?;
    let header = rdr
        .headers()
        .map_err(|source| Error::Csv {
            path: path.to_path_buf(),
            source,
        })?
        .clone();
    let layout = detect_layout(&header).ok_or_else(|| Error::Header {
        path: path.to_path_buf(),
    })?;
    let needs_positive = cfg.transform != Transform::Raw;

    let row_err = |line: u64, message: String| Error::Row {
        path: path.to_path_buf(),
        line,
        message,
    };
    let parse_price = |raw: &str, line: u64| -> Result<f64> {
        let price: f64 = raw
            .parse()
            .map_err(|_| row_err(line, format!("invalid price `{raw}`")))?;
        if !price.is_finite() {
            return Err(row_err(line, format!("non-finite price `{raw}`")));
        }
        if needs_positive && price <= 0.0 {
            return Err(row_err(
                line,
                format!("non-positive price {raw} under {} transform", cfg.transform),
            ));
        }
        Ok(price)
    };

    for record in rdr.records() {
        let record = record.map_err(|source| Error::Csv {
            path: path.to_path_buf(),
            source,
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize| record.get(i).unwrap_or("");
        match layout {
            Layout::Long {
                day,
                time,
                label,
                price,
            } => {
                let price = parse_price(field(price), line)?;
                days.entry(field(day).to_string())
                    .or_default()
                    .entry(field(label).to_string())
                    .or_default()
                    .push(Observation {
                        time: TimeKey::parse(field(time)),
                        price,
                        line,
                        path: path_idx,
                    });
            }
            Layout::Wide => {
                let per_day = days.entry(field(0).to_string()).or_default();
                for (col, name) in header.iter().enumerate().skip(2) {
                    let raw = field(col);
                    if raw.is_empty() {
                        continue;
                    }
                    let price = parse_price(raw, line)?;
                    per_day
                        .entry(name.to_string())
                        .or_default()
                        .push(Observation {
                            time: TimeKey::parse(field(1)),
                            price,
                            line,
                            path: path_idx,
                        });
                }
            }
        }
    }
    Ok(())
}

fn transform(prices: &[f64], t: Transform) -> Vec<f64> {
    match t {
        Transform::Raw => prices.to_vec(),
        Transform::Log => prices.iter().map(|p| p.ln()).collect(),
        Transform::LogReturn => prices.windows(2).map(|w| w[1].ln() - w[0].ln()).collect(),
    }
}

/// Reads all `paths` into day panels for `labels` (all labels seen when
/// empty). Days missing a label or with the wrong point count are dropped
/// with a warning; a repeated time stamp within a day and label is an error.
pub fn ingest(paths: &[PathBuf], cfg: &RunConfig, labels: &[String]) -> Result<Ingested> {
    let mut days = DayMap::new();
    for (i, path) in paths.iter().enumerate() {
        read_file(path, i, cfg, &mut days)?;
    }

    let wanted: Vec<String> = if labels.is_empty() {
        let all: BTreeSet<&String> = days.values().flat_map(|m| m.keys()).collect();
        all.into_iter().cloned().collect()
    } else {
        labels.to_vec()
    };

    let mut out = Ingested::default();
    'days: for (day, mut by_label) in days {
        let mut series = Vec::with_capacity(wanted.len());
        let mut day_times: Option<Vec<String>> = None;
        for label in &wanted {
            let Some(mut obs) = by_label.remove(label) else {
                let msg = format!("day {day}: dropped, label {label} missing");
                warn!("{msg}");
                out.warnings.push(msg);
                continue 'days;
            };
            if obs.len() != cfg.points_per_day {
                let msg = format!(
                    "day {day}: dropped, label {label} has {} points, expected {}",
                    obs.len(),
                    cfg.points_per_day
                );
                warn!("{msg}");
                out.warnings.push(msg);
                continue 'days;
            }
            obs.sort_by(|a, b| a.time.cmp(&b.time));
            if let Some(w) = obs
                .windows(2)
                .find(|w| w[0].time.cmp(&w[1].time) == Ordering::Equal)
            {
                return Err(Error::Row {
                    path: paths[w[1].path].clone(),
                    line: w[1].line,
                    message: format!("duplicate time stamp for {label} on day {day}"),
                });
            }
            if day_times.is_none() {
                day_times = Some(
                    obs.iter()
                        .map(|o| match &o.time {
                            TimeKey::Num(v) => v.to_string(),
                            TimeKey::Text(s) => s.clone(),
                        })
                        .collect(),
                );
            }
            let prices: Vec<f64> = obs.iter().map(|o| o.price).collect();
            series.push(TimeSeries::new(
                label.clone(),
                transform(&prices, cfg.transform),
                cfg.dt,
            )?);
        }
        let panel = DayPanel::new(day.clone(), series)?;
        if let Some(t) = day_times {
            out.times.insert(day, t);
        }
        out.panels.push(panel);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fmt::Write as _;

    fn long_file(days: &[&str], labels: &[&str], points: usize) -> String {
        let mut s = String::from("day,time,label,price\n");
        for d in days {
            for l in labels {
                // Reverse order on purpose: ingestion must sort.
                for t in (0..points).rev() {
                    writeln!(s, "{d},{t},{l},{}", 100.0 + (t as f64 * 0.3).sin()).unwrap();
                }
            }
        }
        s
    }

    fn cfg(points: usize) -> RunConfig {
        RunConfig {
            points_per_day: points,
            ..RunConfig::default()
        }
    }

    #[test]
    fn long_layout_two_days() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("in.csv");
        std::fs::write(
            &p,
            long_file(&["2014-07-17", "2014-07-18"], &["SPX", "IPC"], 780),
        )
        .unwrap();
        let got = ingest(&[p], &cfg(780), &[]).unwrap();
        assert_eq!(got.panels.len(), 2);
        assert!(got.warnings.is_empty());
        let spx = got.panels[0].get("SPX").unwrap();
        assert_eq!(spx.len(), 780);
        assert!((spx.values()[0] - 100f64.ln()).abs() < 1e-15);
        let times = &got.times["2014-07-17"];
        let nums: Vec<f64> = times.iter().map(|t| t.parse().unwrap()).collect();
        assert!(nums.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn day_missing_label_dropped() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("in.csv");
        let mut text = long_file(&["d1"], &["A", "B"], 20);
        text.push_str(&long_file(&["d2"], &["A"], 20).replacen("day,time,label,price\n", "", 1));
        std::fs::write(&p, text).unwrap();
        let labels = vec!["A".to_string(), "B".to_string()];
        let got = ingest(&[p], &cfg(20), &labels).unwrap();
        assert_eq!(got.panels.len(), 1);
        assert_eq!(got.panels[0].day_id, "d1");
        assert_eq!(got.warnings.len(), 1);
        assert!(got.warnings[0].contains("d2"));
    }

    #[test]
    fn short_day_dropped() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("in.csv");
        std::fs::write(&p, long_file(&["d1"], &["A"], 19)).unwrap();
        let got = ingest(&[p], &cfg(20), &[]).unwrap();
        assert!(got.panels.is_empty());
        assert_eq!(got.warnings.len(), 1);
    }

    #[test]
    fn zero_price_under_log_names_row() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("in.csv");
        std::fs::write(&p, "day,time,label,price\nd,1,A,10\nd,2,A,0\n").unwrap();
        let err = ingest(std::slice::from_ref(&p), &cfg(8), &[]).unwrap_err();
        match err {
            Error::Row { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other}"),
        }
        let raw = RunConfig {
            transform: Transform::Raw,
            ..cfg(2)
        };
        assert!(ingest(&[p], &raw, &[]).is_ok());
    }

    #[test]
    fn wide_layout_and_log_returns() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("wide.tsv");
        let mut s = String::from("Day\tTime\tSPX\tVIX\n");
        for t in 0..10 {
            writeln!(
                s,
                "d\t09:{:02}:00\t{}\t{}",
                30 + t,
                100.0 + t as f64,
                20.0 - 0.5 * t as f64
            )
            .unwrap();
        }
        std::fs::write(&p, s).unwrap();
        let c = RunConfig {
            delimiter: b'\t',
            transform: Transform::LogReturn,
            ..cfg(10)
        };
        let got = ingest(&[p], &c, &[]).unwrap();
        let spx = got.panels[0].get("SPX").unwrap();
        assert_eq!(spx.len(), 9);
        assert!((spx.values()[0] - (101f64.ln() - 100f64.ln())).abs() < 1e-15);
        assert_eq!(got.panels[0].labels().collect::<Vec<_>>(), ["SPX", "VIX"]);
    }

    #[test]
    fn duplicate_time_is_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("in.csv");
        std::fs::write(&p, "day,time,label,price\nd,1,A,10\nd,1,A,11\n").unwrap();
        assert!(matches!(ingest(&[p], &cfg(2), &[]), Err(Error::Row { .. })));
    }

    #[test]
    fn unknown_header_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("in.csv");
        std::fs::write(&p, "a,b\n1,2\n").unwrap();
        assert!(matches!(
            ingest(&[p], &cfg(8), &[]),
            Err(Error::Header { .. })
        ));
    }
}
