//! Command-line front end.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use emdx_core::aggregate::{conform_matrices, median_lag_fields, median_scale_matrix};
use emdx_core::{diagonal_histograms, DayPanel, DayResult, ScaleCorrelationMatrix};

use crate::config::{parse_delimiter, parse_pair, threads_from_env, RunConfig};
use crate::error::{Error, Result};
use crate::export::{
    ensure_writable, field_csv, file_stem, fmt_num, histograms_csv, matrix_csv, series_csv,
    write_text, Manifest,
};
use crate::ingest::{ingest, Ingested};
use crate::pipeline::{decompose_days, pool, run_days};

#[derive(Debug, Parser)]
#[command(
    name = "emdx",
    version,
    about = "Multi-scale EMD correlation analysis of intraday series"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
struct Common {
    /// Input files (repeat the flag or separate with commas).
    #[arg(long, value_delimiter = ',')]
    input: Vec<PathBuf>,
    /// key=value configuration file; command-line flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Samples per day and instrument.
    #[arg(long)]
    points_per_day: Option<usize>,
    /// Sampling interval in seconds.
    #[arg(long)]
    dt: Option<f64>,
    /// Price transform: log, raw or log-return.
    #[arg(long)]
    transform: Option<String>,
    /// IMFs per series.
    #[arg(long)]
    max_imfs: Option<usize>,
    /// Sifting stop threshold.
    #[arg(long)]
    sd_threshold: Option<f64>,
    /// Sifting iteration cap.
    #[arg(long)]
    max_sift_iterations: Option<usize>,
    /// Input field delimiter (one character, or `tab`).
    #[arg(long)]
    delimiter: Option<String>,
}

#[derive(Debug, Clone, Args)]
struct PairArgs {
    /// Instrument pair, `A,B`.
    #[arg(long)]
    pair: Option<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Decompose one instrument into IMF and residue files, per day.
    Decompose {
        #[command(flatten)]
        common: Common,
        /// Instrument label.
        #[arg(long)]
        label: String,
        /// Restrict to one day.
        #[arg(long)]
        day: Option<String>,
    },
    /// Oscillating period of every IMF, per day and instrument.
    Periods {
        #[command(flatten)]
        common: Common,
        /// Instrument labels (default: all).
        #[arg(long, value_delimiter = ',')]
        label: Vec<String>,
    },
    /// Scale-by-scale correlation matrices per day and their median.
    ScaleCorr {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        pair: PairArgs,
    },
    /// Rolling lagged correlation per scale and day, and median fields.
    LagCorr {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        pair: PairArgs,
    },
    /// Histograms of same-scale correlations across days.
    Histograms {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        pair: PairArgs,
        /// Bins over [-1, 1].
        #[arg(long)]
        bins: Option<usize>,
    },
    /// Everything: periods, matrices, median lag fields and histograms.
    Pipeline {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        pair: PairArgs,
        /// Bins over [-1, 1].
        #[arg(long)]
        bins: Option<usize>,
        /// Also write every day's lag fields (large: about 9 MB per day).
        #[arg(long)]
        day_fields: bool,
    },
}

fn build_config(common: &Common) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &common.config {
        cfg.apply_file(path)?;
    }
    if !common.input.is_empty() {
        cfg.inputs = common.input.clone();
    }
    if let Some(v) = &common.out {
        cfg.out_dir = v.clone();
    }
    if let Some(v) = common.points_per_day {
        cfg.points_per_day = v;
    }
    if let Some(v) = common.dt {
        cfg.dt = v;
    }
    if let Some(v) = &common.transform {
        cfg.transform = v.parse()?;
    }
    if let Some(v) = common.max_imfs {
        cfg.max_imfs = v;
    }
    if let Some(v) = common.sd_threshold {
        cfg.sd_threshold = v;
    }
    if let Some(v) = common.max_sift_iterations {
        cfg.max_sift_iterations = v;
    }
    if let Some(v) = &common.delimiter {
        cfg.delimiter = parse_delimiter(v)?;
    }
    Ok(cfg)
}

fn apply_pair(cfg: &mut RunConfig, pair: &PairArgs) -> Result<(String, String)> {
    if let Some(p) = &pair.pair {
        cfg.pair = Some(parse_pair(p)?);
    }
    cfg.pair
        .clone()
        .ok_or_else(|| Error::Config("--pair A,B is required".into()))
}

/// Validates, checks the output directory and reads the input.
fn prepare(cfg: &RunConfig, labels: &[String]) -> Result<Ingested> {
    cfg.validate()?;
    if cfg.inputs.is_empty() {
        return Err(Error::Config("at least one --input is required".into()));
    }
    ensure_writable(&cfg.out_dir)?;
    let ingested = ingest(&cfg.inputs, cfg, labels)?;
    if ingested.panels.is_empty() {
        return Err(Error::NoDays);
    }
    log::info!(
        "{} complete days, {} dropped",
        ingested.panels.len(),
        ingested.warnings.len()
    );
    Ok(ingested)
}

struct Writer<'a> {
    root: &'a Path,
    manifest: Manifest,
}

impl Writer<'_> {
    fn write(&mut self, rel: PathBuf, text: &str) -> Result<()> {
        write_text(&self.root.join(&rel), text)?;
        self.manifest.files.push(rel);
        Ok(())
    }

    fn finish(self) -> Result<()> {
        log::info!(
            "wrote {} files under {}",
            self.manifest.files.len(),
            self.root.display()
        );
        write_text(&self.root.join("manifest.txt"), &self.manifest.render())
    }
}

fn periods_csv(rows: &[(String, String, Vec<Option<f64>>)]) -> String {
    let width = rows.iter().map(|r| r.2.len()).max().unwrap_or(0);
    let mut s = String::from("day,label");
    for k in 1..=width {
        s.push_str(&format!(",imf_{k}"));
    }
    s.push('\n');
    for (day, label, periods) in rows {
        s.push_str(&format!("{day},{label}"));
        for k in 0..width {
            s.push(',');
            if let Some(Some(p)) = periods.get(k) {
                s.push_str(&fmt_num(*p));
            }
        }
        s.push('\n');
    }
    s
}

fn write_scale_corr(w: &mut Writer<'_>, days: &[DayResult]) -> Result<()> {
    for d in days {
        let rel = PathBuf::from("scale_corr/days").join(format!("{}.csv", file_stem(&d.day_id)));
        w.write(rel, &matrix_csv(&d.matrix))?;
    }
    let matrices: Vec<ScaleCorrelationMatrix> = days.iter().map(|d| d.matrix.clone()).collect();
    let median = median_scale_matrix(&conform_matrices(&matrices))?;
    w.write(PathBuf::from("scale_corr/median.csv"), &matrix_csv(&median))
}

fn write_lag_corr(w: &mut Writer<'_>, days: &[DayResult], day_fields: bool) -> Result<()> {
    for d in days.iter().filter(|_| day_fields) {
        for f in &d.fields {
            let rel = PathBuf::from("lag_corr/days")
                .join(file_stem(&d.day_id))
                .join(format!("imf_{}.csv", f.scale_index));
            w.write(rel, &field_csv(f))?;
        }
    }
    let medians = median_lag_fields(days)?;
    let mut table = String::from("scale,lag,window\n");
    for (rule, field) in &medians {
        table.push_str(&format!(
            "imf_{},{},{}\n",
            field.scale_index, rule.lambda_max, rule.window
        ));
        let rel = PathBuf::from("lag_corr/median").join(format!("imf_{}.csv", field.scale_index));
        w.write(rel, &field_csv(field))?;
        w.manifest.common_rules.push((field.scale_index, *rule));
    }
    w.write(PathBuf::from("lag_corr/lag_windows.csv"), &table)
}

fn write_histograms(w: &mut Writer<'_>, days: &[DayResult], bins: usize) -> Result<()> {
    let matrices: Vec<ScaleCorrelationMatrix> = days.iter().map(|d| d.matrix.clone()).collect();
    let h = diagonal_histograms(&matrices, bins)?;
    w.write(PathBuf::from("histograms.csv"), &histograms_csv(&h))
}

fn pair_run(
    cmd: &str,
    common: &Common,
    pair: &PairArgs,
    bins: Option<usize>,
    day_fields: bool,
) -> Result<()> {
    let mut cfg = build_config(common)?;
    let (a, b) = apply_pair(&mut cfg, pair)?;
    if let Some(bins) = bins {
        cfg.bins = bins;
    }
    let ingested = prepare(&cfg, &[a.clone(), b.clone()])?;
    let pool = pool(threads_from_env()?)?;
    let days = run_days(&pool, &ingested.panels, (&a, &b), &cfg.sift_config())?;
    log::info!("correlated {a} and {b} on {} days", days.len());

    let mut w = Writer {
        root: &cfg.out_dir,
        manifest: Manifest {
            command: cmd.to_string(),
            config: cfg.describe(),
            warnings: ingested.warnings.clone(),
            ..Manifest::default()
        },
    };
    w.manifest
        .config
        .push(("days".to_string(), days.len().to_string()));
    for d in &days {
        w.manifest.add_day(d, (&a, &b));
    }
    match cmd {
        "scale-corr" => write_scale_corr(&mut w, &days)?,
        "lag-corr" => write_lag_corr(&mut w, &days, true)?,
        "histograms" => write_histograms(&mut w, &days, cfg.bins)?,
        _ => {
            let periods = w.manifest.periods.clone();
            w.write(PathBuf::from("periods.csv"), &periods_csv(&periods))?;
            write_scale_corr(&mut w, &days)?;
            write_lag_corr(&mut w, &days, day_fields)?;
            write_histograms(&mut w, &days, cfg.bins)?;
        }
    }
    w.finish()
}

fn select_days(panels: Vec<DayPanel>, day: Option<&str>) -> Result<Vec<DayPanel>> {
    match day {
        None => Ok(panels),
        Some(d) => {
            let kept: Vec<DayPanel> = panels.into_iter().filter(|p| p.day_id == d).collect();
            if kept.is_empty() {
                Err(Error::Config(format!(
                    "day {d} not found among complete days"
                )))
            } else {
                Ok(kept)
            }
        }
    }
}

fn decompose_cmd(common: &Common, label: &str, day: Option<&str>) -> Result<()> {
    let mut cfg = build_config(common)?;
    cfg.labels = vec![label.to_string()];
    let ingested = prepare(&cfg, &cfg.labels)?;
    let panels = select_days(ingested.panels, day)?;
    let pool = pool(threads_from_env()?)?;
    let decompositions = decompose_days(&pool, &panels, label, &cfg.sift_config())?;
    let mut w = Writer {
        root: &cfg.out_dir,
        manifest: Manifest {
            command: "decompose".to_string(),
            config: cfg.describe(),
            warnings: ingested.warnings,
            ..Manifest::default()
        },
    };
    for (panel, d) in panels.iter().zip(&decompositions) {
        let dir = PathBuf::from("decompose")
            .join(file_stem(label))
            .join(file_stem(&panel.day_id));
        for imf in &d.imfs {
            w.write(
                dir.join(format!("imf_{}.csv", imf.scale_index)),
                &series_csv(&imf.values),
            )?;
        }
        w.write(dir.join("residue.csv"), &series_csv(&d.residue))?;
        w.manifest
            .periods
            .push((panel.day_id.clone(), label.to_string(), d.periods()));
        for imf in d.imfs.iter().filter(|i| i.warning.is_some()) {
            w.manifest.flags.push((
                panel.day_id.clone(),
                format!(
                    "sift_warning imf_{} {:?}",
                    imf.scale_index,
                    imf.warning.unwrap()
                ),
            ));
        }
    }
    w.finish()
}

fn periods_cmd(common: &Common, labels: &[String]) -> Result<()> {
    let mut cfg = build_config(common)?;
    if !labels.is_empty() {
        cfg.labels = labels.to_vec();
    }
    let ingested = prepare(&cfg, &cfg.labels)?;
    let pool = pool(threads_from_env()?)?;
    let all_labels: Vec<String> = match ingested.panels.first() {
        Some(p) if cfg.labels.is_empty() => p.labels().map(String::from).collect(),
        _ => cfg.labels.clone(),
    };
    let mut rows = Vec::new();
    let mut per_label = Vec::new();
    for label in &all_labels {
        per_label.push(decompose_days(
            &pool,
            &ingested.panels,
            label,
            &cfg.sift_config(),
        )?);
    }
    for (i, panel) in ingested.panels.iter().enumerate() {
        for (label, ds) in all_labels.iter().zip(&per_label) {
            rows.push((panel.day_id.clone(), label.clone(), ds[i].periods()));
        }
    }
    let mut w = Writer {
        root: &cfg.out_dir,
        manifest: Manifest {
            command: "periods".to_string(),
            config: cfg.describe(),
            warnings: ingested.warnings,
            ..Manifest::default()
        },
    };
    w.write(PathBuf::from("periods.csv"), &periods_csv(&rows))?;
    w.manifest.periods = rows;
    w.finish()
}

fn execute(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Decompose { common, label, day } => decompose_cmd(common, label, day.as_deref()),
        Command::Periods { common, label } => periods_cmd(common, label),
        Command::ScaleCorr { common, pair } => pair_run("scale-corr", common, pair, None, false),
        Command::LagCorr { common, pair } => pair_run("lag-corr", common, pair, None, true),
        Command::Histograms { common, pair, bins } => {
            pair_run("histograms", common, pair, *bins, false)
        }
        Command::Pipeline {
            common,
            pair,
            bins,
            day_fields,
        } => pair_run("pipeline", common, pair, *bins, *day_fields),
    }
}

/// Parses `argv` and runs the command; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
