//! TOML run configuration for simulation and ingestion campaigns.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Context, Error, Result};
use crate::ingest::{SessionCalendar, TickFormat};
use crate::noise::{NoiseKind, NoiseSpec, SeasonalityProfile};
use crate::params::ModelParams;
use crate::stats::LogBins;

/// Environment variable naming the default output root.
pub const OUT_ENV: &str = "HERDSIM_OUT";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSection {
    pub kind: NoiseKind,
}

impl Default for NoiseSection {
    fn default() -> Self {
        Self { kind: NoiseKind::QGaussian }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub realizations: usize,
    /// Sampled minutes per realization, after burn-in.
    pub duration: u64,
    pub burn_in: u64,
    pub windows: Vec<u32>,
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
    /// Worker threads; all available cores when unset.
    pub jobs: Option<usize>,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            realizations: 4,
            duration: 1 << 18,
            burn_in: 10_000,
            windows: vec![1, 3, 10, 30],
            seed: 1,
            output_dir: None,
            jobs: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StatsSection {
    pub pdf_bins: usize,
    pub pdf_min: f64,
    pub pdf_max: f64,
    pub psd_window_len: usize,
    /// Frequency bins per decade of the smoothed spectrum.
    pub bins_per_decade: usize,
    pub detrend: bool,
}

impl Default for StatsSection {
    fn default() -> Self {
        Self { pdf_bins: 50, pdf_min: 1e-2, pdf_max: 1e3, psd_window_len: 1 << 13, bins_per_decade: 10, detrend: true }
    }
}

impl StatsSection {
    pub fn bins(&self) -> LogBins {
        LogBins { min: self.pdf_min, max: self.pdf_max, count: self.pdf_bins }
    }

    pub fn validate(&self) -> Result<()> {
        self.bins().validate()?;
        if self.psd_window_len < 2 || !self.psd_window_len.is_power_of_two() {
            return Err(Error::invalid("psd_window_len", format!("must be a power of two >= 2, got {}", self.psd_window_len)));
        }
        if self.bins_per_decade == 0 {
            return Err(Error::invalid("bins_per_decade", "must be >= 1"));
        }
        Ok(())
    }
}

/// Ranges for the log-log fits reported after a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitsSection {
    /// Range of `|r|` for the density tail exponent.
    pub pdf_tail: [f64; 2],
    /// Frequency ranges, cycles per minute, of the two spectral slopes.
    pub psd_low: [f64; 2],
    pub psd_high: [f64; 2],
}

impl Default for FitsSection {
    fn default() -> Self {
        Self { pdf_tail: [3.0, 30.0], psd_low: [1e-4, 1e-3], psd_high: [1e-2, 1e-1] }
    }
}

impl FitsSection {
    pub fn validate(&self) -> Result<()> {
        for (name, [lo, hi]) in [("pdf_tail", self.pdf_tail), ("psd_low", self.psd_low), ("psd_high", self.psd_high)] {
            if !(lo > 0.0 && hi > lo && hi.is_finite()) {
                return Err(Error::invalid("fits", format!("{name} needs 0 < lo < hi, got [{lo}, {hi}]")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelParams,
    pub noise: NoiseSection,
    /// Constant `b` from the model when unset.
    pub seasonality: Option<SeasonalityProfile>,
    pub run: RunSection,
    pub stats: StatsSection,
    pub fits: FitsSection,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(Error::from).in_file(path)?;
        Self::from_toml(&text).in_file(path)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Noise for one-minute returns; longer windows are sums of these.
    pub fn noise_spec(&self) -> NoiseSpec {
        match self.noise.kind {
            NoiseKind::Gaussian => NoiseSpec::gaussian(1.0),
            NoiseKind::QGaussian => NoiseSpec::q_gaussian(self.model.tail_exponent, 1.0),
        }
    }

    pub fn seasonality(&self) -> SeasonalityProfile {
        self.seasonality.unwrap_or(SeasonalityProfile::Constant { b: self.model.noise_scale })
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.noise_spec().validate()?;
        self.seasonality().validate()?;
        self.stats.validate()?;
        self.fits.validate()?;
        let run = &self.run;
        if run.realizations < 1 {
            return Err(Error::invalid("realizations", "must be >= 1"));
        }
        if run.windows.is_empty() || run.windows.contains(&0) {
            return Err(Error::invalid("windows", format!("need at least one window, all >= 1, got {:?}", run.windows)));
        }
        let mut sorted = run.windows.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != run.windows.len() {
            return Err(Error::invalid("windows", format!("duplicate window in {:?}", run.windows)));
        }
        let need = *sorted.last().unwrap() as u64 * self.stats.psd_window_len as u64;
        if run.duration <= need {
            return Err(Error::invalid(
                "duration",
                format!(
                    "{} minutes does not exceed the largest window times the spectrum window ({need} minutes)",
                    run.duration
                ),
            ));
        }
        if run.jobs == Some(0) {
            return Err(Error::invalid("jobs", "must be >= 1"));
        }
        Ok(())
    }

    pub fn jobs(&self) -> usize {
        self.run.jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
    }
}

/// Resolves the output directory: explicit flag, then the config, then
/// the environment, then `herdsim-out`.
pub fn output_dir(flag: Option<&Path>, config: Option<&Path>) -> PathBuf {
    flag.or(config)
        .map(Path::to_path_buf)
        .or_else(|| std::env::var_os(OUT_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("herdsim-out"))
}

/// One input file of an ingestion campaign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IngestFile {
    pub path: PathBuf,
    /// Overrides the campaign calendar for this file.
    #[serde(default)]
    pub calendar: Option<SessionCalendar>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IngestConfig {
    pub format: TickFormat,
    pub calendar: SessionCalendar,
    pub files: Vec<IngestFile>,
    pub windows: Vec<u32>,
    pub output_dir: Option<PathBuf>,
    pub stats: StatsSection,
}

impl Default for IngestConfig {
    fn default() -> Self {
        Self {
            format: TickFormat::default(),
            calendar: SessionCalendar::default(),
            files: Vec::new(),
            windows: vec![1, 3, 10, 30],
            output_dir: None,
            stats: StatsSection { psd_window_len: 1 << 10, ..StatsSection::default() },
        }
    }
}

impl IngestConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(Error::from).in_file(path)?;
        Self::from_toml(&text).in_file(path)
    }

    pub fn validate(&self) -> Result<()> {
        self.format.validate()?;
        self.calendar.validate()?;
        self.stats.validate()?;
        for f in &self.files {
            if let Some(c) = &f.calendar {
                c.validate()?;
            }
        }
        if self.windows.is_empty() || self.windows.contains(&0) {
            return Err(Error::invalid("windows", format!("need at least one window, all >= 1, got {:?}", self.windows)));
        }
        Ok(())
    }
}
