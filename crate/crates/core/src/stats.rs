//! Estimators for absolute returns: log-binned probability density and
//! averaged periodogram power spectral density, pooled over realizations,
//! plus tail-exponent, Kolmogorov-Smirnov and log-log fitting utilities.

use std::io::Write;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::ReturnSeries;

/// Logarithmically spaced bins over `[min, max)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogBins {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Default for LogBins {
    fn default() -> Self {
        Self { min: 1e-2, max: 1e3, count: 50 }
    }
}

impl LogBins {
    pub fn validate(&self) -> Result<()> {
        if !(self.min > 0.0 && self.max > self.min && self.max.is_finite()) {
            return Err(Error::invalid("bins", format!("need 0 < min < max, got [{}, {})", self.min, self.max)));
        }
        if self.count == 0 {
            return Err(Error::invalid("bins", "count must be >= 1"));
        }
        Ok(())
    }

    pub fn edges(&self) -> Vec<f64> {
        let step = (self.max / self.min).ln() / self.count as f64;
        let mut e: Vec<f64> = (0..=self.count).map(|i| self.min * (i as f64 * step).exp()).collect();
        e[self.count] = self.max;
        e
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { min: self.min * c, max: self.max * c, count: self.count }
    }
}

fn check_windows(series: &[ReturnSeries]) -> Result<u32> {
    let first = series.first().ok_or_else(|| Error::InsufficientData("no series given".into()))?;
    if let Some(s) = series.iter().find(|s| s.window != first.window) {
        return Err(Error::Mismatch(format!("windows {} and {} in one group", first.window, s.window)));
    }
    Ok(first.window)
}

/// Log-binned probability density of `|r|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityEstimate {
    pub window: u32,
    pub bin_edges: Vec<f64>,
    pub density: Vec<f64>,
    pub counts: Vec<u64>,
    /// All pooled samples, including those outside the binned range.
    pub n_samples: u64,
    pub n_realizations: usize,
}

impl DensityEstimate {
    /// Geometric bin centers.
    pub fn centers(&self) -> Vec<f64> {
        self.bin_edges.windows(2).map(|w| (w[0] * w[1]).sqrt()).collect()
    }

    /// Mass of all samples with `|r| >= x`, counting a partially covered bin
    /// in full. Samples beyond the last edge are not counted.
    pub fn mass_above(&self, x: f64) -> f64 {
        self.bin_edges
            .windows(2)
            .zip(&self.density)
            .filter(|(w, _)| w[1] > x)
            .map(|(w, d)| d * (w[1] - w[0]))
            .sum()
    }

    /// Writes `bin_center,density,count`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "bin_center,density,count")?;
        for ((c, d), n) in self.centers().iter().zip(&self.density).zip(&self.counts) {
            writeln!(w, "{c:.16e},{d:.16e},{n}")?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Fold-style histogram accumulator; partial results merge by addition.
#[derive(Debug, Clone)]
pub struct DensityAccumulator {
    window: Option<u32>,
    edges: Vec<f64>,
    counts: Vec<u64>,
    n_samples: u64,
    n_realizations: usize,
}

impl DensityAccumulator {
    pub fn new(bins: &LogBins) -> Result<Self> {
        bins.validate()?;
        Ok(Self { window: None, edges: bins.edges(), counts: vec![0; bins.count], n_samples: 0, n_realizations: 0 })
    }

    pub fn add(&mut self, series: &ReturnSeries) -> Result<()> {
        match self.window {
            Some(w) if w != series.window => {
                return Err(Error::Mismatch(format!("windows {w} and {} in one group", series.window)))
            }
            _ => self.window = Some(series.window),
        }
        let lo = self.edges[0];
        let hi = *self.edges.last().unwrap();
        for x in series.abs_values() {
            self.n_samples += 1;
            if x >= lo && x < hi {
                // index of the last edge <= x
                let i = self.edges.partition_point(|&e| e <= x) - 1;
                self.counts[i] += 1;
            }
        }
        self.n_realizations += 1;
        Ok(())
    }

    pub fn merge(mut self, other: DensityAccumulator) -> Result<Self> {
        if self.edges != other.edges {
            return Err(Error::Mismatch("histograms with different bins".into()));
        }
        match (self.window, other.window) {
            (Some(a), Some(b)) if a != b => return Err(Error::Mismatch(format!("windows {a} and {b}"))),
            (None, w) => self.window = w,
            _ => {}
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.n_samples += other.n_samples;
        self.n_realizations += other.n_realizations;
        Ok(self)
    }

    pub fn finish(self) -> Result<DensityEstimate> {
        if self.n_samples == 0 {
            return Err(Error::InsufficientData("no samples".into()));
        }
        let n = self.n_samples as f64;
        let density = self.edges.windows(2).zip(&self.counts).map(|(w, &c)| c as f64 / (n * (w[1] - w[0]))).collect();
        Ok(DensityEstimate {
            window: self.window.unwrap_or(1),
            bin_edges: self.edges,
            density,
            counts: self.counts,
            n_samples: self.n_samples,
            n_realizations: self.n_realizations,
        })
    }
}

/// Pools `|r|` over all series with equal weight per sample. Zero returns
/// and other values outside the bins count toward the normalization only.
pub fn abs_return_pdf(series: &[ReturnSeries], bins: &LogBins) -> Result<DensityEstimate> {
    check_windows(series)?;
    let mut acc = DensityAccumulator::new(bins)?;
    for s in series {
        acc.add(s)?;
    }
    acc.finish()
}

/// Power spectral density of `|r|` on frequencies in cycles per minute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEstimate {
    pub window: u32,
    pub window_len: usize,
    pub freqs: Vec<f64>,
    pub power: Vec<f64>,
    pub n_windows: usize,
    pub n_realizations: usize,
}

impl SpectrumEstimate {
    /// Averages power within `bins_per_decade` logarithmic frequency bins;
    /// each reported frequency is the geometric mean of its members.
    pub fn log_binned(&self, bins_per_decade: usize) -> SpectrumEstimate {
        let mut freqs = Vec::new();
        let mut power = Vec::new();
        let width = 1.0 / bins_per_decade.max(1) as f64;
        let mut i = 0;
        while i < self.freqs.len() {
            let key = (self.freqs[i].log10() / width).floor();
            let mut j = i;
            while j < self.freqs.len() && (self.freqs[j].log10() / width).floor() == key {
                j += 1;
            }
            let n = (j - i) as f64;
            freqs.push((self.freqs[i..j].iter().map(|f| f.ln()).sum::<f64>() / n).exp());
            power.push(self.power[i..j].iter().sum::<f64>() / n);
            i = j;
        }
        SpectrumEstimate { freqs, power, ..self.clone() }
    }

    /// Writes `freq_per_min,power`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "freq_per_min,power")?;
        for (f, p) in self.freqs.iter().zip(&self.power) {
            writeln!(w, "{f:.16e},{p:.16e}")?;
        }
        w.flush()?;
        Ok(())
    }
}

/// One-sided periodograms of `|r|` averaged over non-overlapping windows of
/// `window_len` samples, then over series with equal weight per series.
///
/// Power at `f_k = k / (window_len T)` for `k = 1..=window_len/2` is
/// `T |X_k|^2 / window_len`, so the mean over all `k` of a mean-free window
/// equals its variance.
pub fn power_spectrum(series: &[ReturnSeries], window_len: usize, detrend: bool) -> Result<SpectrumEstimate> {
    let window = check_windows(series)?;
    if window_len < 2 || !window_len.is_power_of_two() {
        return Err(Error::invalid("window_len", format!("must be a power of two >= 2, got {window_len}")));
    }
    if let Some(s) = series.iter().find(|s| s.len() < window_len) {
        return Err(Error::InsufficientData(format!("series of {} returns is shorter than one window of {window_len}", s.len())));
    }
    let fft = FftPlanner::new().plan_fft_forward(window_len);
    let half = window_len / 2;
    let t = window as f64;
    let mut total = vec![0.0; half];
    let mut n_windows = 0;
    let mut buf = vec![Complex::new(0.0, 0.0); window_len];
    for s in series {
        let abs: Vec<f64> = s.abs_values().collect();
        let mut acc = vec![0.0; half];
        let chunks = abs.chunks_exact(window_len);
        let m = chunks.len();
        for chunk in chunks {
            let mean = if detrend { chunk.iter().sum::<f64>() / window_len as f64 } else { 0.0 };
            for (b, x) in buf.iter_mut().zip(chunk) {
                *b = Complex::new(x - mean, 0.0);
            }
            fft.process(&mut buf);
            for (k, a) in acc.iter_mut().enumerate() {
                *a += buf[k + 1].norm_sqr();
            }
        }
        for (tot, a) in total.iter_mut().zip(&acc) {
            *tot += a * t / (window_len as f64 * m as f64);
        }
        n_windows += m;
    }
    let r = series.len() as f64;
    Ok(SpectrumEstimate {
        window,
        window_len,
        freqs: (1..=half).map(|k| k as f64 / (window_len as f64 * t)).collect(),
        power: total.into_iter().map(|p| p / r).collect(),
        n_windows,
        n_realizations: series.len(),
    })
}

/// Hill estimate of the density tail exponent of `|x|`: the Hill index on
/// the largest `top_fraction` order statistics, plus one.
pub fn hill_tail_exponent(values: &[f64], top_fraction: f64) -> Result<f64> {
    if !(top_fraction > 0.0 && top_fraction < 1.0) {
        return Err(Error::invalid("top_fraction", format!("must lie in (0, 1), got {top_fraction}")));
    }
    let k = (top_fraction * values.len() as f64).floor() as usize;
    if k < 100 {
        return Err(Error::InsufficientData(format!("only {k} tail samples, need at least 100")));
    }
    let mut abs: Vec<f64> = values.iter().map(|x| x.abs()).collect();
    abs.sort_unstable_by(|a, b| b.total_cmp(a));
    let threshold = abs[k];
    if !(threshold > 0.0) {
        return Err(Error::InsufficientData("tail threshold is zero".into()));
    }
    let sum: f64 = abs[..k].iter().map(|x| (x / threshold).ln()).sum();
    Ok(k as f64 / sum + 1.0)
}

/// Sup-norm distance between the empirical CDF of `samples` and `cdf`.
pub fn ks_distance<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_unstable_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Two-sample Kolmogorov-Smirnov statistic.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_unstable_by(f64::total_cmp);
    b.sort_unstable_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Ordinary least-squares slope of `ln y` against `ln x` over points with
/// `lo <= x <= hi` and `y > 0`.
pub fn loglog_slope(xs: &[f64], ys: &[f64], lo: f64, hi: f64) -> Result<f64> {
    let pts: Vec<(f64, f64)> =
        xs.iter().zip(ys).filter(|(&x, &y)| x >= lo && x <= hi && y > 0.0).map(|(x, y)| (x.ln(), y.ln())).collect();
    if pts.len() < 3 {
        return Err(Error::InsufficientData(format!("{} usable points in [{lo}, {hi}], need 3", pts.len())));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Ok(sxy / sxx)
}

/// Ratio of the largest power within one bin of `f0` to the median power of
/// the surrounding bins with frequency in `[f0 / (1 + rel), f0 (1 + rel)]`,
/// excluding the three bins around the peak.
pub fn peak_to_background(spec: &SpectrumEstimate, f0: f64, rel: f64) -> Result<f64> {
    let k = spec
        .freqs
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - f0).abs().total_cmp(&(b.1 - f0).abs()))
        .map(|(i, _)| i)
        .ok_or_else(|| Error::InsufficientData("empty spectrum".into()))?;
    let lo = k.saturating_sub(1);
    let hi = (k + 1).min(spec.power.len() - 1);
    let peak = spec.power[lo..=hi].iter().cloned().fold(f64::MIN, f64::max);
    let mut bg: Vec<f64> = spec
        .freqs
        .iter()
        .zip(&spec.power)
        .enumerate()
        .filter(|(i, (f, _))| (*i + 2 < k || *i > k + 2) && **f >= f0 / (1.0 + rel) && **f <= f0 * (1.0 + rel))
        .map(|(_, (_, p))| *p)
        .collect();
    if bg.len() < 4 {
        return Err(Error::InsufficientData(format!("only {} background bins around {f0}", bg.len())));
    }
    bg.sort_unstable_by(f64::total_cmp);
    let median = bg[bg.len() / 2];
    Ok(peak / median)
}
