mod common;

use std::path::Path;
use std::process::{Command, Output};

use emdx::export::{parse_field, parse_matrix};
use emdx::ingest::ingest;
use emdx::pipeline::{pool, run_days};
use emdx::RunConfig;
use emdx_core::aggregate::{conform_matrices, median_scale_matrix};

fn emdx(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_emdx"))
        .current_dir(dir)
        .env_remove("EMDX_THREADS")
        .args(args)
        .output()
        .unwrap()
}

fn ok(out: &Output) {
    assert!(
        out.status.success(),
        "exit {:?}\n{}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn read(p: impl AsRef<Path>) -> String {
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn decompose_writes_five_imfs_and_residue() {
    let dir = tempfile::tempdir().unwrap();
    common::write_file(dir.path(), "day.csv", &common::lead_lag_csv(1, 780, 1));
    let out = emdx(
        dir.path(),
        &[
            "decompose",
            "--input",
            "day.csv",
            "--label",
            "SPX",
            "--max-imfs",
            "5",
            "--out",
            "o",
        ],
    );
    ok(&out);
    let files = common::tree(&dir.path().join("o/decompose/SPX/2014-01-01"));
    let names: Vec<String> = files.iter().map(|p| p.display().to_string()).collect();
    assert_eq!(
        names,
        [
            "imf_1.csv",
            "imf_2.csv",
            "imf_3.csv",
            "imf_4.csv",
            "imf_5.csv",
            "residue.csv"
        ]
    );
    let imf = read(dir.path().join("o/decompose/SPX/2014-01-01/imf_1.csv"));
    let lines: Vec<&str> = imf.lines().collect();
    assert_eq!(lines.len(), 781);
    assert_eq!(lines[0], "t,value");
    assert!(lines[1].starts_with("1,"));
    assert!(read(dir.path().join("o/manifest.txt")).contains("command=decompose"));
}

#[test]
fn scale_corr_median_matches_library_bit_for_bit() {
    let dir = tempfile::tempdir().unwrap();
    let input = common::write_file(dir.path(), "p.csv", &common::lead_lag_csv(3, 780, 2));
    ok(&emdx(
        dir.path(),
        &[
            "scale-corr",
            "--input",
            "p.csv",
            "--pair",
            "SPX,VIX",
            "--out",
            "o",
        ],
    ));

    let day_files = common::tree(&dir.path().join("o/scale_corr/days"));
    assert_eq!(day_files.len(), 3);
    let text = read(dir.path().join("o/scale_corr/median.csv"));
    assert_eq!(
        text.lines().next().unwrap(),
        "scale,imf_1,imf_2,imf_3,imf_4,imf_5"
    );
    assert_eq!(text.lines().count(), 6);
    let from_file = parse_matrix(&text).unwrap();

    let cfg = RunConfig {
        inputs: vec![input.clone()],
        ..RunConfig::default()
    };
    let labels = ["SPX".to_string(), "VIX".to_string()];
    let ingested = ingest(&[input], &cfg, &labels).unwrap();
    let days = run_days(
        &pool(Some(1)).unwrap(),
        &ingested.panels,
        ("SPX", "VIX"),
        &cfg.sift_config(),
    )
    .unwrap();
    let mats: Vec<_> = days.iter().map(|d| d.matrix.clone()).collect();
    let median = median_scale_matrix(&conform_matrices(&mats)).unwrap();
    let bits = |m: &emdx_core::ScaleCorrelationMatrix| -> Vec<Option<u64>> {
        m.entries.iter().map(|v| v.map(f64::to_bits)).collect()
    };
    assert_eq!(from_file.rows, median.rows);
    assert_eq!(bits(&from_file), bits(&median));
}

#[test]
fn lag_corr_median_peaks_at_planted_lag() {
    let dir = tempfile::tempdir().unwrap();
    common::write_file(dir.path(), "p.csv", &common::lead_lag_csv(4, 780, 3));
    ok(&emdx(
        dir.path(),
        &[
            "lag-corr", "--input", "p.csv", "--pair", "SPX,VIX", "--out", "o",
        ],
    ));
    assert_eq!(
        common::tree(&dir.path().join("o/lag_corr/days")).len(),
        4 * 5
    );
    let field = parse_field(&read(dir.path().join("o/lag_corr/median/imf_1.csv")), 1).unwrap();
    let (mut hits, mut total) = (0, 0);
    for t in field.window_ends() {
        total += 1;
        let best = field
            .lags
            .iter()
            .filter_map(|&l| field.get(l, t).map(|v| (l, v)))
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .unwrap();
        if best.0 == 2 && best.1 < 0.0 {
            hits += 1;
        }
    }
    assert!(hits as f64 >= 0.95 * total as f64, "{hits}/{total}");
    let table = read(dir.path().join("o/lag_corr/lag_windows.csv"));
    assert!(table.starts_with("scale,lag,window\nimf_1,"));
}

#[test]
fn pipeline_honours_config_file_and_thread_cap() {
    let dir = tempfile::tempdir().unwrap();
    common::write_file(dir.path(), "p.csv", &common::lead_lag_csv(2, 780, 4));
    common::write_file(
        dir.path(),
        "run.conf",
        "# two-instrument run\ninput = p.csv\npair = SPX,VIX\nmax-imfs = 3\nbins = 10\nout = o\n",
    );
    let out = Command::new(env!("CARGO_BIN_EXE_emdx"))
        .current_dir(dir.path())
        .env("EMDX_THREADS", "2")
        .args(["pipeline", "--config", "run.conf"])
        .output()
        .unwrap();
    ok(&out);
    let o = dir.path().join("o");
    assert_eq!(read(o.join("scale_corr/median.csv")).lines().count(), 4);
    let hist = read(o.join("histograms.csv"));
    assert_eq!(hist.lines().count(), 11);
    assert_eq!(
        hist.lines().next().unwrap(),
        "bin_lower,bin_upper,imf_1,imf_2,imf_3"
    );
    assert!(!o.join("lag_corr/days").exists());
    assert_eq!(common::tree(&o.join("lag_corr/median")).len(), 3);
    let manifest = read(o.join("manifest.txt"));
    assert!(manifest.contains("max_imfs=3"));
    assert!(manifest.contains("[lag_window] averaged over days"));
    assert!(manifest.contains("[residue]"));

    // A flag beats the file.
    ok(&emdx(
        dir.path(),
        &[
            "pipeline",
            "--config",
            "run.conf",
            "--max-imfs",
            "4",
            "--out",
            "o4",
        ],
    ));
    assert_eq!(
        read(dir.path().join("o4/scale_corr/median.csv"))
            .lines()
            .count(),
        5
    );
}

#[test]
fn periods_table_has_one_row_per_day_and_label() {
    let dir = tempfile::tempdir().unwrap();
    common::write_file(dir.path(), "p.csv", &common::lead_lag_csv(2, 780, 5));
    ok(&emdx(
        dir.path(),
        &["periods", "--input", "p.csv", "--out", "o"],
    ));
    let text = read(dir.path().join("o/periods.csv"));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "day,label,imf_1,imf_2,imf_3,imf_4,imf_5");
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("2014-01-01,SPX,"));
}

#[test]
fn shuffled_rows_give_identical_output() {
    let dir = tempfile::tempdir().unwrap();
    let csv = common::lead_lag_csv(2, 780, 6);
    let mut lines: Vec<&str> = csv.lines().collect();
    let header = lines.remove(0);
    lines.reverse();
    let shuffled = format!("{header}\n{}\n", lines.join("\n"));
    common::write_file(dir.path(), "a.csv", &csv);
    common::write_file(dir.path(), "b.csv", &shuffled);
    ok(&emdx(
        dir.path(),
        &[
            "scale-corr",
            "--input",
            "a.csv",
            "--pair",
            "SPX,VIX",
            "--out",
            "a",
        ],
    ));
    ok(&emdx(
        dir.path(),
        &[
            "scale-corr",
            "--input",
            "b.csv",
            "--pair",
            "SPX,VIX",
            "--out",
            "b",
        ],
    ));
    assert_eq!(
        read(dir.path().join("a/scale_corr/median.csv")),
        read(dir.path().join("b/scale_corr/median.csv"))
    );
}

#[test]
fn errors_exit_nonzero_with_a_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    common::write_file(dir.path(), "p.csv", &common::lead_lag_csv(1, 780, 7));

    let out = emdx(dir.path(), &["scale-corr", "--no-such-flag"]);
    assert_ne!(out.status.code(), Some(0));
    assert!(!out.stderr.is_empty());

    let out = emdx(
        dir.path(),
        &[
            "scale-corr",
            "--input",
            "missing.csv",
            "--pair",
            "SPX,VIX",
            "--out",
            "o",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.csv"));

    common::write_file(dir.path(), "blocker", "");
    let out = emdx(
        dir.path(),
        &[
            "scale-corr",
            "--input",
            "p.csv",
            "--pair",
            "SPX,VIX",
            "--out",
            "blocker/o",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not writable"));

    let out = emdx(
        dir.path(),
        &[
            "scale-corr",
            "--input",
            "p.csv",
            "--pair",
            "SPX,DAX",
            "--out",
            "o",
        ],
    );
    assert_eq!(out.status.code(), Some(1));

    let out = Command::new(env!("CARGO_BIN_EXE_emdx"))
        .current_dir(dir.path())
        .env("EMDX_THREADS", "zero")
        .args([
            "scale-corr",
            "--input",
            "p.csv",
            "--pair",
            "SPX,VIX",
            "--out",
            "o",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("EMDX_THREADS"));
}
