//! Return series: per-minute returns from a log-price path, unit-variance
//! normalization, and block aggregation to longer windows.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::herding::PricePath;
use crate::noise::{seasonal_b, NoiseSpec, ReturnNoise, SeasonalityProfile};
use crate::rng::{self, Stream};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SeriesSource {
    Model { seed: u64 },
    Empirical { symbol: String },
}

/// Returns on a uniform grid of `window` minutes.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSeries {
    pub window: u32,
    pub values: Vec<f64>,
    pub normalized: bool,
    /// Product of all standard deviations divided out so far.
    pub norm_factor: f64,
    pub source: SeriesSource,
    pub params_hash: Option<String>,
    /// Indices where a new trading session begins. Empty for a continuous
    /// stream; when present, aggregation restarts its blocks at each one.
    pub session_starts: Vec<usize>,
}

/// Sidecar metadata written next to a series CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesMeta {
    pub window: u32,
    pub length: usize,
    pub normalized: bool,
    pub norm_factor: f64,
    pub source: SeriesSource,
    pub params_hash: Option<String>,
    pub session_starts: Vec<usize>,
}

impl ReturnSeries {
    pub fn new(window: u32, values: Vec<f64>, source: SeriesSource) -> Self {
        Self { window, values, normalized: false, norm_factor: 1.0, source, params_hash: None, session_starts: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn abs_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().map(|r| r.abs())
    }

    /// Divides by the population standard deviation of the whole series.
    pub fn normalize_unit_variance(&self) -> Result<ReturnSeries> {
        if self.values.len() < 2 {
            return Err(Error::InsufficientData(format!("need at least 2 returns, got {}", self.values.len())));
        }
        let sd = population_variance(&self.values).sqrt();
        if !(sd.is_finite() && sd > 0.0) {
            return Err(Error::ZeroVariance);
        }
        Ok(ReturnSeries {
            values: self.values.iter().map(|r| r / sd).collect(),
            normalized: true,
            norm_factor: self.norm_factor * sd,
            ..self.clone()
        })
    }

    /// Sums successive disjoint blocks of `m` returns; a trailing partial
    /// block is dropped. With session starts, blocks restart per session and
    /// each session drops its own partial block.
    pub fn aggregate(&self, m: usize) -> Result<ReturnSeries> {
        if m == 0 {
            return Err(Error::invalid("m", "must be >= 1"));
        }
        if m > self.values.len() {
            return Err(Error::InsufficientData(format!("block of {m} exceeds series length {}", self.values.len())));
        }
        let window = u32::try_from(m)
            .ok()
            .and_then(|m| self.window.checked_mul(m))
            .ok_or_else(|| Error::invalid("m", "aggregated window overflows"))?;
        let (values, session_starts) = if self.session_starts.is_empty() {
            (block_sums(&self.values, m), Vec::new())
        } else {
            let mut bounds = self.session_starts.clone();
            if bounds.first() != Some(&0) {
                bounds.insert(0, 0);
            }
            bounds.push(self.values.len());
            let mut values = Vec::new();
            let mut starts = Vec::new();
            for w in bounds.windows(2) {
                let sums = block_sums(&self.values[w[0]..w[1]], m);
                if !sums.is_empty() {
                    starts.push(values.len());
                    values.extend(sums);
                }
            }
            if values.is_empty() {
                return Err(Error::InsufficientData(format!("no session holds a full block of {m}")));
            }
            (values, starts)
        };
        Ok(ReturnSeries { window, values, session_starts, ..self.clone() })
    }

    pub fn meta(&self) -> SeriesMeta {
        SeriesMeta {
            window: self.window,
            length: self.values.len(),
            normalized: self.normalized,
            norm_factor: self.norm_factor,
            source: self.source.clone(),
            params_hash: self.params_hash.clone(),
            session_starts: self.session_starts.clone(),
        }
    }

    /// Writes `idx,r` rows with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "idx,r")?;
        for (i, r) in self.values.iter().enumerate() {
            writeln!(w, "{i},{r:.16e}")?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R, meta: SeriesMeta) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        if rdr.headers()?.iter().collect::<Vec<_>>() != ["idx", "r"] {
            return Err(Error::Parse { line: 1, message: "expected header `idx,r`".into() });
        }
        let mut values = Vec::with_capacity(meta.length);
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            values.push(rec[1].parse().map_err(|e| Error::Parse { line: i as u64 + 2, message: format!("{e}") })?);
        }
        if values.len() != meta.length {
            return Err(Error::Mismatch(format!("metadata declares {} returns, file has {}", meta.length, values.len())));
        }
        Ok(Self {
            window: meta.window,
            values,
            normalized: meta.normalized,
            norm_factor: meta.norm_factor,
            source: meta.source,
            params_hash: meta.params_hash,
            session_starts: meta.session_starts,
        })
    }
}

fn block_sums(xs: &[f64], m: usize) -> Vec<f64> {
    xs.chunks_exact(m).map(|c| c.iter().sum()).collect()
}

pub fn population_variance(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n
}

/// Applies exogenous noise to every minute of `path`:
/// `r_t = b(t) (1 + a |p_t|) * noise`, with `t` the minute index.
/// The result is not normalized.
pub fn build_returns(
    path: &PricePath,
    spec: &NoiseSpec,
    a: f64,
    profile: &SeasonalityProfile,
    seed: u64,
) -> Result<ReturnSeries> {
    if path.is_empty() {
        return Err(Error::InsufficientData("price path is empty".into()));
    }
    if !(a.is_finite() && a >= 0.0) {
        return Err(Error::invalid("a", format!("must be >= 0, got {a}")));
    }
    profile.validate()?;
    let noise = ReturnNoise::new(spec)?;
    let window = spec.window.round();
    if window != spec.window || window < 1.0 || window > u32::MAX as f64 {
        return Err(Error::invalid("T", format!("must be a whole number of minutes, got {}", spec.window)));
    }
    let mut rng = rng::stream(seed, Stream::Noise);
    let values = path
        .samples
        .iter()
        .enumerate()
        .map(|(t, s)| noise.increment(s.p, a, seasonal_b(t as f64, profile), &mut rng))
        .collect();
    let mut series = ReturnSeries::new(window as u32, values, SeriesSource::Model { seed });
    series.params_hash = Some(path.params.hash());
    Ok(series)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::herding::simulate_path;
    use crate::params::ModelParams;
    use proptest::prelude::*;

    fn series(values: Vec<f64>) -> ReturnSeries {
        ReturnSeries::new(1, values, SeriesSource::Model { seed: 0 })
    }

    #[test]
    fn normalize_examples() {
        let s = series(vec![1.0, -1.0, 1.0, -1.0]).normalize_unit_variance().unwrap();
        assert_eq!(s.values, vec![1.0, -1.0, 1.0, -1.0]);
        assert!(s.normalized);
        let s = series(vec![2.0, -2.0, 2.0, -2.0]).normalize_unit_variance().unwrap();
        assert_eq!(s.values, vec![1.0, -1.0, 1.0, -1.0]);
        assert_eq!(s.norm_factor, 2.0);
    }

    #[test]
    fn normalize_errors() {
        assert!(matches!(series(vec![3.0; 10]).normalize_unit_variance(), Err(Error::ZeroVariance)));
        assert!(matches!(series(vec![1.0]).normalize_unit_variance(), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn aggregate_examples() {
        let s = series(vec![1.0, 2.0, 3.0, 4.0]);
        let a = s.aggregate(2).unwrap();
        assert_eq!(a.values, vec![3.0, 7.0]);
        assert_eq!(a.window, 2);
        assert_eq!(s.aggregate(1).unwrap().values, s.values);
        assert_eq!(series(vec![1.0; 5]).aggregate(2).unwrap().len(), 2);
        assert!(s.aggregate(5).is_err());
        assert!(s.aggregate(0).is_err());
    }

    #[test]
    fn aggregate_restarts_blocks_per_session() {
        let mut s = series((1..=7).map(f64::from).collect());
        // sessions [1,2,3] and [4,5,6,7]
        s.session_starts = vec![0, 3];
        let a = s.aggregate(2).unwrap();
        assert_eq!(a.values, vec![3.0, 9.0, 13.0]);
        assert_eq!(a.session_starts, vec![0, 1]);
        assert!(s.aggregate(4).is_ok());
        assert!(s.aggregate(5).is_err());
    }

    #[test]
    fn build_returns_is_deterministic() {
        let p = ModelParams::default();
        let path = simulate_path(&p, 100, 0, 1).unwrap();
        let spec = NoiseSpec::q_gaussian(4.0, 1.0);
        let prof = SeasonalityProfile::Constant { b: 1.0 };
        let a = build_returns(&path, &spec, 0.5, &prof, 9).unwrap();
        let b = build_returns(&path, &spec, 0.5, &prof, 9).unwrap();
        let c = build_returns(&path, &spec, 0.5, &prof, 10).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.values, c.values);
        assert_eq!(a.len(), 100);
        assert!(!a.normalized);
        assert_eq!(a.params_hash, Some(p.hash()));
    }

    #[test]
    fn state_free_gaussian_returns_have_b_squared_variance() {
        let p = ModelParams::default();
        let path = simulate_path(&p, 50_000, 0, 2).unwrap();
        let prof = SeasonalityProfile::Constant { b: 2.0 };
        let s = build_returns(&path, &NoiseSpec::gaussian(1.0), 0.0, &prof, 3).unwrap();
        let v = population_variance(&s.values);
        assert!((v - 4.0).abs() < 0.1, "variance {v}");
    }

    #[test]
    fn build_returns_rejects_fractional_window() {
        let path = simulate_path(&ModelParams::default(), 5, 0, 1).unwrap();
        let prof = SeasonalityProfile::Constant { b: 1.0 };
        assert!(build_returns(&path, &NoiseSpec::gaussian(1.5), 0.5, &prof, 1).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let mut s = series(vec![0.1, -2.5e-7, 3.0]);
        s.session_starts = vec![0, 2];
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let back = ReturnSeries::read_csv(buf.as_slice(), s.meta()).unwrap();
        assert_eq!(back, s);
    }

    // dyadic values keep every partial sum exact in f64
    fn dyadic() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec((-1_000_000i64..1_000_000).prop_map(|k| k as f64 / 1024.0), 1..200)
    }

    proptest! {
        #[test]
        fn aggregation_conserves_sums(xs in dyadic(), m in 1usize..12) {
            prop_assume!(m <= xs.len());
            let agg = series(xs.clone()).aggregate(m).unwrap();
            let used = m * (xs.len() / m);
            let lhs: f64 = agg.values.iter().sum();
            let rhs: f64 = xs[..used].iter().sum();
            prop_assert_eq!(lhs, rhs);
            prop_assert_eq!(agg.len(), xs.len() / m);
        }

        #[test]
        fn aggregation_is_linear(pairs in prop::collection::vec((-1_000i64..1_000, -1_000i64..1_000), 1..100), m in 1usize..8) {
            prop_assume!(m <= pairs.len());
            let x: Vec<f64> = pairs.iter().map(|p| p.0 as f64 / 8.0).collect();
            let y: Vec<f64> = pairs.iter().map(|p| p.1 as f64 / 8.0).collect();
            let xy: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
            let ax = series(x).aggregate(m).unwrap();
            let ay = series(y).aggregate(m).unwrap();
            let axy = series(xy).aggregate(m).unwrap();
            for i in 0..axy.len() {
                prop_assert_eq!(axy.values[i], ax.values[i] + ay.values[i]);
            }
        }

        #[test]
        fn normalization_gives_unit_variance_and_is_idempotent(xs in prop::collection::vec(-1e3f64..1e3, 2..300), c in 1e-3f64..1e3) {
            let s = series(xs.clone());
            prop_assume!(population_variance(&xs) > 1e-9);
            let n1 = s.normalize_unit_variance().unwrap();
            prop_assert!((population_variance(&n1.values) - 1.0).abs() < 1e-6);
            let n2 = n1.normalize_unit_variance().unwrap();
            for (a, b) in n1.values.iter().zip(&n2.values) {
                prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
            }
            // pre-scaling does not change the normalized series
            let scaled = series(xs.iter().map(|x| x * c).collect()).normalize_unit_variance().unwrap();
            for (a, b) in n1.values.iter().zip(&scaled.values) {
                prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
            }
        }
    }
}
