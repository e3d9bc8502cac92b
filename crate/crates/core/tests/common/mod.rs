#![allow(dead_code)]

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const SMALL_RUN: &str = r#"
[run]
realizations = 2
duration = 20000
burn_in = 1000
seed = 5

[stats]
psd_window_len = 512
"#;

pub const SMALL_INGEST: &str = r#"
windows = [1, 3, 10, 30]

[stats]
psd_window_len = 8
"#;

/// Tick file for `symbol` over three sessions in early January 2024, one
/// trade per minute at 20 s past, as a geometric random walk.
pub fn tick_file(dir: &Path, symbol: &str, seed: u64) -> PathBuf {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut text = String::from("timestamp,price,symbol\n");
    let mut price = 100.0f64;
    for day in 2..=4 {
        for m in 0..390 {
            let (h, min) = (14 + (30 + m) / 60, (30 + m) % 60);
            price *= (0.001 * (rng.random::<f64>() - 0.5)).exp();
            writeln!(text, "2024-01-{day:02}T{h:02}:{min:02}:20Z,{price:.6},{symbol}").unwrap();
        }
    }
    let path = dir.join(format!("{symbol}.csv"));
    fs::write(&path, text).unwrap();
    path
}

pub fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}
