//! Simulation, ingestion and comparison campaigns. Workers compute in
//! parallel; every file is written by the calling thread and listed with its
//! SHA-256 in `manifest.json`.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{IngestConfig, RunConfig, StatsSection};
use crate::error::{Context, Error, Result};
use crate::herding::{simulate_path, PricePath};
use crate::ingest::{minute_returns, parse_ticks, pool_by_group, split_by_symbol, SessionCalendar};
use crate::params::ModelParams;
use crate::series::{build_returns, ReturnSeries};
use crate::stats::{abs_return_pdf, loglog_slope, power_spectrum, DensityEstimate, SpectrumEstimate};

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Artifact {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub version: String,
    pub config: serde_json::Value,
    pub files: Vec<Artifact>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes files below a root directory and records their hashes.
struct ArtifactWriter {
    root: PathBuf,
    files: Vec<Artifact>,
}

impl ArtifactWriter {
    fn new(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).map_err(Error::from).in_file(root)?;
        Ok(Self { root: root.to_path_buf(), files: Vec::new() })
    }

    fn write(&mut self, rel: &str, fill: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
        let mut buf = Vec::new();
        fill(&mut buf)?;
        let path = self.root.join(rel);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(Error::from).in_file(dir)?;
        }
        fs::write(&path, &buf).map_err(Error::from).in_file(&path)?;
        self.files.push(Artifact { path: rel.to_string(), sha256: sha256_hex(&buf), bytes: buf.len() as u64 });
        Ok(())
    }

    fn json<T: Serialize>(&mut self, rel: &str, value: &T) -> Result<()> {
        self.write(rel, |buf| {
            serde_json::to_writer_pretty(&mut *buf, value)?;
            buf.push(b'\n');
            Ok(())
        })
    }

    fn finish(self, command: &str, config: serde_json::Value) -> Result<Manifest> {
        let manifest = Manifest { command: command.into(), version: env!("CARGO_PKG_VERSION").into(), config, files: self.files };
        let path = self.root.join(MANIFEST);
        let mut text = serde_json::to_vec_pretty(&manifest)?;
        text.push(b'\n');
        fs::write(&path, text).map_err(Error::from).in_file(&path)?;
        Ok(manifest)
    }
}

/// Files whose current content no longer matches the manifest.
pub fn verify_manifest(dir: &Path) -> Result<Vec<String>> {
    let path = dir.join(MANIFEST);
    let text = fs::read(&path).map_err(Error::from).in_file(&path)?;
    let manifest: Manifest = serde_json::from_slice(&text).map_err(Error::from).in_file(&path)?;
    Ok(manifest
        .files
        .iter()
        .filter(|a| fs::read(dir.join(&a.path)).map_or(true, |b| sha256_hex(&b) != a.sha256))
        .map(|a| a.path.clone())
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct EstimateMeta<'a> {
    window: u32,
    n_samples: Option<u64>,
    n_windows: Option<usize>,
    window_len: Option<usize>,
    bins_per_decade: Option<usize>,
    n_realizations: usize,
    params_hash: Option<&'a str>,
    realizations: &'a [String],
}

/// Log-log fits over the configured ranges; `None` where a range holds too
/// few points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowFits {
    pub window: u32,
    /// Minus the density slope over the tail range.
    pub pdf_tail_exponent: Option<f64>,
    pub psd_low_slope: Option<f64>,
    pub psd_high_slope: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowEstimates {
    pub window: u32,
    pub pdf: DensityEstimate,
    /// Log-binned spectrum.
    pub psd: SpectrumEstimate,
    pub fits: WindowFits,
}

#[derive(Debug, Clone)]
pub struct SimulationOutput {
    pub manifest: Manifest,
    pub estimates: Vec<WindowEstimates>,
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new().num_threads(jobs).build().map_err(|e| Error::Config(e.to_string()))
}

/// One realization: path, then normalized one-minute returns aggregated to
/// every window.
pub fn realization(config: &RunConfig, seed: u64) -> Result<(PricePath, Vec<ReturnSeries>)> {
    let path = simulate_path(&config.model, config.run.duration, config.run.burn_in, seed)
        .during("herding_core", "simulate_path")?;
    let raw = build_returns(&path, &config.noise_spec(), config.model.feedback_weight, &config.seasonality(), seed)
        .during("series_pipeline", "build_returns")?;
    let unit = raw.normalize_unit_variance().during("series_pipeline", "normalize_unit_variance")?;
    let series = config
        .run
        .windows
        .iter()
        .map(|&w| unit.aggregate(w as usize).during("series_pipeline", "aggregate"))
        .collect::<Result<_>>()?;
    Ok((path, series))
}

fn estimate(
    window: u32,
    series: &[ReturnSeries],
    stats: &StatsSection,
    fits: Option<&crate::config::FitsSection>,
) -> Result<WindowEstimates> {
    let pdf = abs_return_pdf(series, &stats.bins()).during("stats", "abs_return_pdf")?;
    let psd = power_spectrum(series, stats.psd_window_len, stats.detrend)
        .during("stats", "power_spectrum")?
        .log_binned(stats.bins_per_decade);
    let fit = |xs: &[f64], ys: &[f64], r: [f64; 2]| loglog_slope(xs, ys, r[0], r[1]).ok();
    let fits = match fits {
        Some(f) => WindowFits {
            window,
            pdf_tail_exponent: fit(&pdf.centers(), &pdf.density, f.pdf_tail).map(|s| -s),
            psd_low_slope: fit(&psd.freqs, &psd.power, f.psd_low),
            psd_high_slope: fit(&psd.freqs, &psd.power, f.psd_high),
        },
        None => WindowFits { window, pdf_tail_exponent: None, psd_low_slope: None, psd_high_slope: None },
    };
    Ok(WindowEstimates { window, pdf, psd, fits })
}

fn write_estimates(
    out: &mut ArtifactWriter,
    est: &WindowEstimates,
    stats: &StatsSection,
    params_hash: Option<&str>,
    realizations: &[String],
) -> Result<()> {
    let w = est.window;
    out.write(&format!("pdf_T{w}.csv"), |b| est.pdf.write_csv(b))?;
    out.json(
        &format!("pdf_T{w}.json"),
        &EstimateMeta {
            window: w,
            n_samples: Some(est.pdf.n_samples),
            n_windows: None,
            window_len: None,
            bins_per_decade: None,
            n_realizations: est.pdf.n_realizations,
            params_hash,
            realizations,
        },
    )?;
    out.write(&format!("psd_T{w}.csv"), |b| est.psd.write_csv(b))?;
    out.json(
        &format!("psd_T{w}.json"),
        &EstimateMeta {
            window: w,
            n_samples: None,
            n_windows: Some(est.psd.n_windows),
            window_len: Some(est.psd.window_len),
            bins_per_decade: Some(stats.bins_per_decade),
            n_realizations: est.psd.n_realizations,
            params_hash,
            realizations,
        },
    )
}

#[derive(Serialize)]
struct PathMeta<'a> {
    seed: u64,
    dt_grid: f64,
    burn_in: u64,
    params_hash: String,
    params: &'a ModelParams,
}

/// Runs `realizations` seeded paths (base seed plus index) and writes paths,
/// return series, density and spectrum estimates per window, fits and the
/// manifest. Output is byte-identical for identical configs.
pub fn simulate(config: &RunConfig, out_dir: &Path) -> Result<SimulationOutput> {
    config.validate().during("cli", "simulate")?;
    let seeds: Vec<u64> = (0..config.run.realizations as u64).map(|i| config.run.seed.wrapping_add(i)).collect();
    info!("simulating {} realizations of {} minutes on {} threads", seeds.len(), config.run.duration, config.jobs());
    let runs: Vec<(PricePath, Vec<ReturnSeries>)> = pool(config.jobs())
        .during("cli", "simulate")?
        .install(|| seeds.par_iter().map(|&s| realization(config, s)).collect::<Result<_>>())?;

    let mut out = ArtifactWriter::new(out_dir).during("cli", "simulate")?;
    let hash = config.model.hash();
    let labels: Vec<String> = seeds.iter().map(|s| format!("seed:{s}")).collect();
    for (path, series) in &runs {
        let i = path.seed;
        out.write(&format!("paths/path_s{i}.csv"), |b| path.write_csv(b))?;
        out.json(
            &format!("paths/path_s{i}.json"),
            &PathMeta { seed: i, dt_grid: path.dt_grid, burn_in: path.burn_in, params_hash: hash.clone(), params: &path.params },
        )?;
        for s in series {
            let w = s.window;
            out.write(&format!("returns/returns_T{w}_s{i}.csv"), |b| s.write_csv(b))?;
            out.json(&format!("returns/returns_T{w}_s{i}.json"), &s.meta())?;
        }
    }
    let mut estimates = Vec::new();
    for (k, &w) in config.run.windows.iter().enumerate() {
        let group: Vec<ReturnSeries> = runs.iter().map(|(_, s)| s[k].clone()).collect();
        let est = estimate(w, &group, &config.stats, Some(&config.fits))?;
        write_estimates(&mut out, &est, &config.stats, Some(&hash), &labels)?;
        estimates.push(est);
    }
    let fits: Vec<&WindowFits> = estimates.iter().map(|e| &e.fits).collect();
    out.json("fits.json", &fits)?;
    // settings that cannot change any output stay out of the manifest
    let mut recorded = config.clone();
    recorded.run.jobs = None;
    recorded.run.output_dir = None;
    let manifest = out.finish("simulate", serde_json::to_value(&recorded)?)?;
    Ok(SimulationOutput { manifest, estimates })
}

/// Per-symbol ingestion summary row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymbolSummary {
    pub symbol: String,
    pub file: String,
    pub ticks: usize,
    pub rejected_rows: usize,
    pub priced_minutes: usize,
    pub returns: usize,
    pub sessions: usize,
    pub zero_fraction: f64,
}

#[derive(Debug, Clone)]
pub struct IngestOutput {
    pub manifest: Manifest,
    pub summary: Vec<SymbolSummary>,
    pub estimates: Vec<WindowEstimates>,
}

/// Ingests tick files into per-symbol normalized return series, pooled
/// density and spectrum estimates per window, and `summary.csv`.
pub fn ingest(config: &IngestConfig, extra_files: &[PathBuf], out_dir: &Path, jobs: usize) -> Result<IngestOutput> {
    config.validate().during("cli", "ingest")?;
    let files: Vec<(PathBuf, SessionCalendar)> = config
        .files
        .iter()
        .map(|f| (f.path.clone(), f.calendar.clone().unwrap_or_else(|| config.calendar.clone())))
        .chain(extra_files.iter().map(|p| (p.clone(), config.calendar.clone())))
        .collect();
    if files.is_empty() {
        return Err(Error::InsufficientData("no input files".into())).during("cli", "ingest");
    }
    if let Some((p, _)) = files.iter().find(|(_, c)| *c != files[0].1) {
        return Err(Error::Mismatch(format!(
            "mixed calendars: {} and {} use different sessions",
            files[0].0.display(),
            p.display()
        )))
        .during("cli", "ingest");
    }
    let calendar = files[0].1.clone();

    // parsing is sequential per file
    let mut by_symbol: BTreeMap<String, (String, Vec<crate::ingest::TickRecord>, usize)> = BTreeMap::new();
    let mut rejected_rows = Vec::new();
    for (path, _) in &files {
        let name = path.display().to_string();
        let mut format = config.format.clone();
        if format.default_symbol.is_none() {
            format.default_symbol = path.file_stem().map(|s| s.to_string_lossy().into_owned());
        }
        let file = fs::File::open(path).map_err(Error::from).in_file(path).during("ingest", "parse_ticks")?;
        let parsed = parse_ticks(BufReader::new(file), &format).in_file(path).during("ingest", "parse_ticks")?;
        if parsed.records.is_empty() {
            return Err(Error::InsufficientData("no tick rows".into())).in_file(path).during("ingest", "parse_ticks");
        }
        for e in &parsed.rejected {
            warn!("{name}:{}: {}", e.line, e.message);
        }
        let n_rejected = parsed.rejected.len();
        rejected_rows.extend(parsed.rejected.into_iter().map(|e| (name.clone(), e)));
        for (symbol, ticks) in split_by_symbol(parsed.records) {
            if by_symbol.contains_key(&symbol) {
                return Err(Error::Mismatch(format!("symbol {symbol:?} appears in more than one file")))
                    .in_file(path)
                    .during("ingest", "parse_ticks");
            }
            by_symbol.insert(symbol, (name.clone(), ticks, n_rejected));
        }
    }

    let entries: Vec<_> = by_symbol.into_iter().collect();
    let processed: Vec<(SymbolSummary, Vec<ReturnSeries>)> = pool(jobs).during("cli", "ingest")?.install(|| {
        entries
            .par_iter()
            .map(|(symbol, (file, ticks, rejected))| {
                let mr = minute_returns(ticks, &calendar)
                    .during("ingest", "minute_returns")
                    .in_file(file)?;
                let unit = mr.series.normalize_unit_variance().during("series_pipeline", "normalize_unit_variance").in_file(file)?;
                let series = config
                    .windows
                    .iter()
                    .map(|&w| unit.aggregate(w as usize).during("series_pipeline", "aggregate").in_file(file))
                    .collect::<Result<Vec<_>>>()?;
                let summary = SymbolSummary {
                    symbol: symbol.clone(),
                    file: file.clone(),
                    ticks: ticks.len(),
                    rejected_rows: *rejected,
                    priced_minutes: mr.priced_minutes,
                    returns: mr.series.len(),
                    sessions: mr.sessions,
                    zero_fraction: mr.zero_fraction,
                };
                Ok((summary, series))
            })
            .collect::<Result<_>>()
    })?;

    let mut out = ArtifactWriter::new(out_dir).during("cli", "ingest")?;
    for (summary, series) in &processed {
        for s in series {
            let stem = format!("returns/{}_T{}", sanitize(&summary.symbol), s.window);
            out.write(&format!("{stem}.csv"), |b| s.write_csv(b))?;
            out.json(&format!("{stem}.json"), &s.meta())?;
        }
    }
    out.write("summary.csv", |b| {
        let mut w = csv::Writer::from_writer(b);
        for (s, _) in &processed {
            w.serialize(s)?;
        }
        w.flush()?;
        Ok(())
    })?;
    if !rejected_rows.is_empty() {
        out.write("rejected_rows.csv", |b| {
            writeln!(b, "file,line,message")?;
            let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(b);
            for (f, e) in &rejected_rows {
                w.write_record([f.as_str(), &e.line.to_string(), &e.message])?;
            }
            w.flush()?;
            Ok(())
        })?;
    }
    let labels: Vec<String> = processed.iter().map(|(s, _)| format!("symbol:{}", s.symbol)).collect();
    let mut estimates = Vec::new();
    for (k, &w) in config.windows.iter().enumerate() {
        let group = pool_by_group(processed.iter().map(|(_, s)| s[k].clone()).collect()).during("ingest", "pool_by_group")?;
        let est = estimate(w, &group.series, &config.stats, None)?;
        write_estimates(&mut out, &est, &config.stats, None, &labels)?;
        estimates.push(est);
    }
    let mut recorded = config.clone();
    recorded.output_dir = None;
    let manifest = out.finish("ingest", serde_json::to_value(&recorded)?)?;
    Ok(IngestOutput { manifest, summary: processed.into_iter().map(|(s, _)| s).collect(), estimates })
}

fn sanitize(symbol: &str) -> String {
    symbol.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' }).collect()
}

fn read_columns(path: &Path, names: [&str; 2]) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut rdr = csv::Reader::from_path(path).map_err(Error::from).in_file(path)?;
    let headers = rdr.headers().map_err(Error::from).in_file(path)?.clone();
    let idx = |n: &str| {
        headers
            .iter()
            .position(|h| h == n)
            .ok_or_else(|| Error::Parse { line: 1, message: format!("no column {n:?}") })
            .in_file(path)
    };
    let (ix, iy) = (idx(names[0])?, idx(names[1])?);
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for rec in rdr.records() {
        let rec = rec.map_err(Error::from).in_file(path)?;
        let line = rec.position().map_or(0, |p| p.line());
        let num = |i: usize| -> Result<f64> {
            rec.get(i)
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| Error::Parse { line, message: format!("bad number in column {i}") })
                .in_file(path)
        };
        xs.push(num(ix)?);
        ys.push(num(iy)?);
    }
    Ok((xs, ys))
}

/// Linear interpolation of `ln y` against `ln x`; `None` outside the grid
/// or where a neighbouring value is not positive.
fn interp_loglog(xs: &[f64], ys: &[f64], x: f64) -> Option<f64> {
    let i = xs.partition_point(|&v| v < x);
    if i < xs.len() && xs[i] == x {
        return (ys[i] > 0.0).then(|| ys[i].ln());
    }
    if i == 0 || i == xs.len() {
        return None;
    }
    let (x0, x1, y0, y1) = (xs[i - 1], xs[i], ys[i - 1], ys[i]);
    if !(y0 > 0.0 && y1 > 0.0) {
        return None;
    }
    let u = (x.ln() - x0.ln()) / (x1.ln() - x0.ln());
    Some(y0.ln() + u * (y1.ln() - y0.ln()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowComparison {
    pub window: u32,
    pub pdf_overlap_bins: usize,
    /// Root mean square of the log-density difference over overlapping bins.
    pub pdf_log_rmse: Option<f64>,
    pub psd_overlap_points: usize,
    /// Mean log-power offset removed before the PSD residual.
    pub psd_log_offset: Option<f64>,
    pub psd_log_rmse: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub windows: Vec<WindowComparison>,
    pub flags: Vec<String>,
}

fn rmse(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| (xs.iter().map(|x| x * x).sum::<f64>() / xs.len() as f64).sqrt())
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or(String::new(), |v| format!("{v:.16e}"))
}

/// Pairs model and empirical estimates per window on the model grid and
/// writes paired tables plus `report.json`.
pub fn compare(model_dir: &Path, empirical_dir: &Path, windows: &[u32], out_dir: &Path) -> Result<CompareReport> {
    if windows.is_empty() {
        return Err(Error::invalid("windows", "need at least one window")).during("cli", "compare");
    }
    let mut tables = Vec::new();
    for &w in windows {
        let load = |dir: &Path, kind: &str, cols: [&str; 2]| -> Result<(Vec<f64>, Vec<f64>)> {
            let path = dir.join(format!("{kind}_T{w}.csv"));
            if !path.is_file() {
                return Err(Error::InsufficientData(format!("window T={w} missing: no {}", path.display())));
            }
            read_columns(&path, cols)
        };
        let pdf_m = load(model_dir, "pdf", ["bin_center", "density"]).during("cli", "compare")?;
        let pdf_e = load(empirical_dir, "pdf", ["bin_center", "density"]).during("cli", "compare")?;
        let psd_m = load(model_dir, "psd", ["freq_per_min", "power"]).during("cli", "compare")?;
        let psd_e = load(empirical_dir, "psd", ["freq_per_min", "power"]).during("cli", "compare")?;
        tables.push((w, pdf_m, pdf_e, psd_m, psd_e));
    }

    let mut out = ArtifactWriter::new(out_dir).during("cli", "compare")?;
    let mut report = CompareReport { windows: Vec::new(), flags: Vec::new() };
    for (w, (mx, my), (ex, ey), (fx, fy), (gx, gy)) in tables {
        let emp: Vec<Option<f64>> = mx.iter().map(|&x| interp_loglog(&ex, &ey, x)).collect();
        let pdf_diff: Vec<f64> =
            my.iter().zip(&emp).filter_map(|(&m, e)| e.filter(|_| m > 0.0).map(|e| m.ln() - e)).collect();
        if pdf_diff.is_empty() {
            report.flags.push(format!("T={w}: no overlapping density bins"));
        }
        out.write(&format!("compare_pdf_T{w}.csv"), |b| {
            writeln!(b, "bin_center,model_density,empirical_density")?;
            for ((x, m), e) in mx.iter().zip(&my).zip(&emp) {
                writeln!(b, "{x:.16e},{m:.16e},{}", fmt_opt(e.map(f64::exp)))?;
            }
            Ok(())
        })?;

        let emp: Vec<Option<f64>> = fx.iter().map(|&x| interp_loglog(&gx, &gy, x)).collect();
        let pairs: Vec<(f64, f64)> =
            fy.iter().zip(&emp).filter_map(|(&m, e)| e.filter(|_| m > 0.0).map(|e| (m.ln(), e))).collect();
        let offset = (!pairs.is_empty()).then(|| pairs.iter().map(|(m, e)| m - e).sum::<f64>() / pairs.len() as f64);
        let psd_rmse = offset.and_then(|o| rmse(&pairs.iter().map(|(m, e)| m - e - o).collect::<Vec<_>>()));
        if pairs.is_empty() {
            report.flags.push(format!("T={w}: no overlapping spectrum frequencies"));
        }
        out.write(&format!("compare_psd_T{w}.csv"), |b| {
            writeln!(b, "freq_per_min,model_power,empirical_power_aligned")?;
            for ((x, m), e) in fx.iter().zip(&fy).zip(&emp) {
                writeln!(b, "{x:.16e},{m:.16e},{}", fmt_opt(e.zip(offset).map(|(e, o)| (e + o).exp())))?;
            }
            Ok(())
        })?;
        report.windows.push(WindowComparison {
            window: w,
            pdf_overlap_bins: pdf_diff.len(),
            pdf_log_rmse: rmse(&pdf_diff),
            psd_overlap_points: pairs.len(),
            psd_log_offset: offset,
            psd_log_rmse: psd_rmse,
        });
    }
    out.json("report.json", &report)?;
    let config = serde_json::json!({
        "model": model_dir.display().to_string(),
        "empirical": empirical_dir.display().to_string(),
        "windows": windows,
    });
    out.finish("compare", config)?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolation_hits_nodes_exactly() {
        let xs = [1.0, 10.0, 100.0];
        let ys = [1.0, 0.1, 0.0];
        assert_eq!(interp_loglog(&xs, &ys, 10.0), Some((0.1f64).ln()));
        assert!((interp_loglog(&xs, &ys, 10f64.sqrt()).unwrap() - (0.1f64).sqrt().ln()).abs() < 1e-14);
        assert_eq!(interp_loglog(&xs, &ys, 50.0), None);
        assert_eq!(interp_loglog(&xs, &ys, 0.5), None);
        assert_eq!(interp_loglog(&xs, &ys, 100.0), None);
    }

    #[test]
    fn symbol_names_are_safe_paths() {
        assert_eq!(sanitize("BRK/B"), "BRK_B");
        assert_eq!(sanitize("ab-1.x"), "ab-1.x");
    }

    #[test]
    fn rmse_of_nothing_is_none() {
        assert_eq!(rmse(&[]), None);
        assert_eq!(rmse(&[3.0, -3.0]), Some(3.0));
    }
}
