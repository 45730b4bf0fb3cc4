//! Run configuration: defaults, `key=value` config files, and the thread cap.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use emdx_core::SiftConfig;

use crate::error::{Error, Result};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "EMDX_THREADS";

/// Price transform applied at ingestion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Transform {
    /// Natural log of the price.
    #[default]
    Log,
    /// Price as given.
    Raw,
    /// First differences of log prices; one sample shorter than the day.
    LogReturn,
}

impl FromStr for Transform {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "log" => Ok(Transform::Log),
            "raw" => Ok(Transform::Raw),
            "log-return" | "log_return" | "logreturn" => Ok(Transform::LogReturn),
            other => Err(Error::Config(format!("unknown transform `{other}`"))),
        }
    }
}

impl fmt::Display for Transform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Transform::Log => "log",
            Transform::Raw => "raw",
            Transform::LogReturn => "log-return",
        })
    }
}

/// Everything a pipeline run needs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Input files, read in order.
    pub inputs: Vec<PathBuf>,
    /// Instrument pair for correlation commands.
    pub pair: Option<(String, String)>,
    /// Labels for single-series commands; empty means all.
    pub labels: Vec<String>,
    /// Sampling interval in seconds.
    pub dt: f64,
    /// Expected samples per day and label.
    pub points_per_day: usize,
    /// IMFs per series.
    pub max_imfs: usize,
    /// Sifting stop threshold.
    pub sd_threshold: f64,
    /// Sifting iteration cap.
    pub max_sift_iterations: usize,
    /// Histogram bins over [-1, 1].
    pub bins: usize,
    /// Output directory.
    pub out_dir: PathBuf,
    /// Price transform.
    pub transform: Transform,
    /// Input field delimiter.
    pub delimiter: u8,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            inputs: Vec::new(),
            pair: None,
            labels: Vec::new(),
            dt: 30.0,
            points_per_day: 780,
            max_imfs: 5,
            sd_threshold: 0.2,
            max_sift_iterations: 100,
            bins: emdx_core::DEFAULT_BINS,
            out_dir: PathBuf::from("out"),
            transform: Transform::Log,
            delimiter: b',',
        }
    }
}

pub(crate) fn parse_pair(s: &str) -> Result<(String, String)> {
    let mut it = s.split(',').map(str::trim);
    match (it.next(), it.next(), it.next()) {
        (Some(a), Some(b), None) if !a.is_empty() && !b.is_empty() => {
            Ok((a.to_string(), b.to_string()))
        }
        _ => Err(Error::Config(format!(
            "pair must look like `A,B`, got `{s}`"
        ))),
    }
}

pub(crate) fn parse_delimiter(s: &str) -> Result<u8> {
    match s {
        "\\t" | "tab" => Ok(b'\t'),
        _ if s.len() == 1 && s.is_ascii() => Ok(s.as_bytes()[0]),
        _ => Err(Error::Config(format!(
            "delimiter must be one ASCII character, got `{s}`"
        ))),
    }
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("invalid value `{value}` for `{key}`")))
}

impl RunConfig {
    /// Applies one `key=value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key.trim().replace('-', "_").as_str() {
            "input" | "inputs" => {
                self.inputs = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(PathBuf::from)
                    .collect()
            }
            "pair" => self.pair = Some(parse_pair(value)?),
            "label" | "labels" => {
                self.labels = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(String::from)
                    .collect()
            }
            "dt" => self.dt = parse_num("dt", value)?,
            "points_per_day" => self.points_per_day = parse_num("points_per_day", value)?,
            "max_imfs" => self.max_imfs = parse_num("max_imfs", value)?,
            "sd_threshold" => self.sd_threshold = parse_num("sd_threshold", value)?,
            "max_sift_iterations" => {
                self.max_sift_iterations = parse_num("max_sift_iterations", value)?
            }
            "bins" => self.bins = parse_num("bins", value)?,
            "out" | "out_dir" => self.out_dir = PathBuf::from(value),
            "transform" => self.transform = value.parse()?,
            "delimiter" => self.delimiter = parse_delimiter(value)?,
            other => return Err(Error::Config(format!("unknown config key `{other}`"))),
        }
        Ok(())
    }

    /// Applies a `key=value` file. Blank lines and `#` comments are skipped.
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("{}:{}: expected key=value", path.display(), i + 1))
            })?;
            self.set(key, value)
                .map_err(|e| Error::Config(format!("{}:{}: {e}", path.display(), i + 1)))?;
        }
        Ok(())
    }

    /// Checks value ranges.
    pub fn validate(&self) -> Result<()> {
        if self.points_per_day < emdx_core::types::MIN_DECOMPOSITION_LEN {
            return Err(Error::Config("points_per_day must be at least 8".into()));
        }
        if self.transform == Transform::LogReturn
            && self.points_per_day <= emdx_core::types::MIN_DECOMPOSITION_LEN
        {
            return Err(Error::Config(
                "points_per_day must be at least 9 for log-returns".into(),
            ));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::Config("dt must be positive".into()));
        }
        if self.bins == 0 {
            return Err(Error::Config("bins must be at least 1".into()));
        }
        self.sift_config().validate()?;
        Ok(())
    }

    /// Sifting parameters derived from this run.
    pub fn sift_config(&self) -> SiftConfig {
        SiftConfig {
            sd_threshold: self.sd_threshold,
            max_sift_iterations: self.max_sift_iterations,
            max_imfs: Some(self.max_imfs),
            ..SiftConfig::default()
        }
    }

    /// `key=value` lines describing this run, for the manifest.
    pub fn describe(&self) -> Vec<(String, String)> {
        let inputs: Vec<String> = self
            .inputs
            .iter()
            .map(|p| p.display().to_string())
            .collect();
        let mut out = vec![
            ("inputs".to_string(), inputs.join(",")),
            ("transform".to_string(), self.transform.to_string()),
            ("dt".to_string(), self.dt.to_string()),
            (
                "points_per_day".to_string(),
                self.points_per_day.to_string(),
            ),
            ("max_imfs".to_string(), self.max_imfs.to_string()),
            ("sd_threshold".to_string(), self.sd_threshold.to_string()),
            (
                "max_sift_iterations".to_string(),
                self.max_sift_iterations.to_string(),
            ),
            ("bins".to_string(), self.bins.to_string()),
        ];
        if let Some((a, b)) = &self.pair {
            out.push(("pair".to_string(), format!("{a},{b}")));
        }
        if !self.labels.is_empty() {
            out.push(("labels".to_string(), self.labels.join(",")));
        }
        out
    }
}

/// Worker cap from `EMDX_THREADS`; `None` when unset or empty.
pub fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) if v.trim().is_empty() => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::Config(format!(
                "{THREADS_ENV} must be a positive integer, got `{v}`"
            ))),
        },
        Err(_) => Ok(None),
    }
}
