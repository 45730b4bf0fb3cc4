#![allow(dead_code)]

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn white_noise(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

pub fn random_walk(rng: &mut ChaCha8Rng, n: usize, step: f64) -> Vec<f64> {
    let mut level = 0.0;
    (0..n)
        .map(|_| {
            let e: f64 = StandardNormal.sample(rng);
            level += step * e;
            level
        })
        .collect()
}

/// Log levels of a leader and of a follower that mirrors it `lag` samples
/// later with the opposite sign, plus a little noise of its own.
pub fn lead_lag_levels(rng: &mut ChaCha8Rng, n: usize, lag: usize) -> (Vec<f64>, Vec<f64>) {
    let step = 1e-3;
    let x = random_walk(rng, n, step);
    let noise = white_noise(rng, n);
    let y = (0..n)
        .map(|t| -x[t.saturating_sub(lag)] + 0.05 * step * noise[t])
        .collect();
    (x, y)
}

/// Long-layout CSV (`day,time,label,price`) for `days` days of a lead/lag
/// pair `SPX`/`VIX`, prices `100 * exp(level)`.
pub fn lead_lag_csv(days: usize, n: usize, seed: u64) -> String {
    let mut rng = rng(seed);
    let mut s = String::from("day,time,label,price\n");
    for d in 0..days {
        let (x, y) = lead_lag_levels(&mut rng, n, 2);
        let day = format!("2014-{:02}-{:02}", 1 + d / 28, 1 + d % 28);
        for (label, levels, base) in [("SPX", &x, 1900.0), ("VIX", &y, 12.0)] {
            for (t, v) in levels.iter().enumerate() {
                let _ = writeln!(s, "{day},{},{label},{:.12}", t + 1, base * v.exp());
            }
        }
    }
    s
}

pub fn write_file(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

/// Every regular file under `root`, relative, sorted.
pub fn tree(root: &Path) -> Vec<PathBuf> {
    fn walk(root: &Path, dir: &Path, out: &mut Vec<PathBuf>) {
        for e in std::fs::read_dir(dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                walk(root, &p, out);
            } else {
                out.push(p.strip_prefix(root).unwrap().to_path_buf());
            }
        }
    }
    let mut out = Vec::new();
    walk(root, root, &mut out);
    out.sort();
    out
}
