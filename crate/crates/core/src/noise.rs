//! Exogenous noise: Gaussian and q-Gaussian return shocks scaled by the
//! volatility `sigma(t) = b(t) (1 + a |p(t)|)`.
//!
//! The unit q-Gaussian with `q = 1 + 2/lambda` has density proportional to
//! `(1 - (1-q) u^2 / (3-q))^(1/(1-q)) = (1 + u^2/(lambda-1))^(-lambda/2)`,
//! which is a Student-t with `lambda - 1` degrees of freedom and unit scale.
//! Samples are drawn as `z / sqrt(chi2_nu / nu)`.

use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::params::validate_tail_exponent;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    Gaussian,
    #[serde(alias = "q-gaussian", alias = "q_gaussian")]
    QGaussian,
}

/// Shape of the per-window return noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    /// Tail exponent; ignored for Gaussian noise.
    pub lambda: f64,
    /// Return window `T` in minutes.
    pub window: f64,
}

impl NoiseSpec {
    pub fn gaussian(window: f64) -> Self {
        Self { kind: NoiseKind::Gaussian, lambda: f64::INFINITY, window }
    }

    pub fn q_gaussian(lambda: f64, window: f64) -> Self {
        Self { kind: NoiseKind::QGaussian, lambda, window }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.window.is_finite() && self.window > 0.0) {
            return Err(Error::invalid("T", format!("must be > 0, got {}", self.window)));
        }
        if self.kind == NoiseKind::QGaussian {
            validate_tail_exponent(self.lambda)?;
        }
        Ok(())
    }

    /// Entropic index `q = 1 + 2/lambda`.
    pub fn q(&self) -> f64 {
        1.0 + 2.0 / self.lambda
    }
}

/// Intraday profile of the exogenous noise scale `b(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SeasonalityProfile {
    Constant { b: f64 },
    /// `exp(-(t - peak)^2 / w^2) + base`, with `t` and the distance to the
    /// peak measured on a circle of `session_length` minutes.
    IntradayBump { width: f64, base: f64, peak_offset: f64, session_length: f64 },
}

impl SeasonalityProfile {
    /// Profile with `w = 20`, base `0.5`, peak at minute 195 of a 390-minute session.
    pub fn nyse_bump() -> Self {
        SeasonalityProfile::IntradayBump { width: 20.0, base: 0.5, peak_offset: 195.0, session_length: 390.0 }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            SeasonalityProfile::Constant { b } => {
                if !(b.is_finite() && b > 0.0) {
                    return Err(Error::invalid("b", format!("must be > 0, got {b}")));
                }
            }
            SeasonalityProfile::IntradayBump { width, base, peak_offset, session_length } => {
                if !(width.is_finite() && width > 0.0) {
                    return Err(Error::invalid("width", format!("must be > 0, got {width}")));
                }
                if !(base.is_finite() && base >= 0.0) {
                    return Err(Error::invalid("base", format!("must be >= 0, got {base}")));
                }
                if !peak_offset.is_finite() {
                    return Err(Error::invalid("peak_offset", "must be finite"));
                }
                if !(session_length.is_finite() && session_length > 0.0) {
                    return Err(Error::invalid("session_length", format!("must be > 0, got {session_length}")));
                }
            }
        }
        Ok(())
    }
}

/// `b(t)` at minute `t`.
pub fn seasonal_b(t: f64, profile: &SeasonalityProfile) -> f64 {
    match *profile {
        SeasonalityProfile::Constant { b } => b,
        SeasonalityProfile::IntradayBump { width, base, peak_offset, session_length } => {
            let len = session_length;
            let d = (t.rem_euclid(len) - peak_offset.rem_euclid(len)).abs();
            let d = d.min(len - d);
            (-(d * d) / (width * width)).exp() + base
        }
    }
}

/// `sigma = b_t (1 + a |p|)`.
pub fn volatility(p: f64, a: f64, b_t: f64) -> f64 {
    b_t * (1.0 + a * p.abs())
}

/// Scale `sigma_q(T)` of the q-Gaussian return over a window of `T` minutes:
///
/// ```text
/// [sqrt(pi (lambda-1)) G((lambda-1)/2) / G(lambda/2)]^(1/(lambda-1)) * [(lambda-2) T / lambda]^(lambda / (2 (lambda-1)))
/// ```
pub fn sigma_q(window: f64, lambda: f64) -> Result<f64> {
    if !(window.is_finite() && window > 0.0) {
        return Err(Error::invalid("T", format!("must be > 0, got {window}")));
    }
    validate_tail_exponent(lambda)?;
    let nu = lambda - 1.0;
    let ln_norm = 0.5 * (std::f64::consts::PI * nu).ln() + ln_gamma(nu / 2.0) - ln_gamma(lambda / 2.0);
    let ln_time = (lambda - 2.0) / lambda * window;
    Ok((ln_norm / nu + lambda / (2.0 * nu) * ln_time.ln()).exp())
}

/// Normalized unit q-Gaussian density, written in terms of `q`.
pub fn qgaussian_density(u: f64, lambda: f64) -> f64 {
    let q = 1.0 + 2.0 / lambda;
    let inv = 1.0 / (q - 1.0);
    let ln_z = 0.5 * (std::f64::consts::PI * (3.0 - q) * inv).ln() + ln_gamma((3.0 - q) * inv / 2.0) - ln_gamma(inv);
    let kernel = (1.0 - (1.0 - q) * u * u / (3.0 - q)).powf(1.0 / (1.0 - q));
    kernel * (-ln_z).exp()
}

/// Sampler for the unit q-Gaussian with tail exponent `lambda`.
#[derive(Debug, Clone, Copy)]
pub struct UnitQGaussian {
    dof: f64,
    chi2: ChiSquared<f64>,
}

impl UnitQGaussian {
    pub fn new(lambda: f64) -> Result<Self> {
        validate_tail_exponent(lambda)?;
        let dof = lambda - 1.0;
        let chi2 = ChiSquared::new(dof).map_err(|e| Error::invalid("lambda", e.to_string()))?;
        Ok(Self { dof, chi2 })
    }
}

impl Distribution<f64> for UnitQGaussian {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let z: f64 = rng.sample(StandardNormal);
        let w = self.chi2.sample(rng);
        z / (w / self.dof).sqrt()
    }
}

pub fn sample_unit_qgaussian<R: Rng + ?Sized>(rng: &mut R, lambda: f64) -> Result<f64> {
    Ok(UnitQGaussian::new(lambda)?.sample(rng))
}

/// Noise source with the window scale precomputed.
#[derive(Debug, Clone, Copy)]
pub struct ReturnNoise {
    shape: Shape,
}

#[derive(Debug, Clone, Copy)]
enum Shape {
    Gaussian { sqrt_window: f64 },
    QGaussian { scale: f64, unit: UnitQGaussian },
}

impl ReturnNoise {
    pub fn new(spec: &NoiseSpec) -> Result<Self> {
        spec.validate()?;
        let shape = match spec.kind {
            NoiseKind::Gaussian => Shape::Gaussian { sqrt_window: spec.window.sqrt() },
            NoiseKind::QGaussian => {
                Shape::QGaussian { scale: sigma_q(spec.window, spec.lambda)?, unit: UnitQGaussian::new(spec.lambda)? }
            }
        };
        Ok(Self { shape })
    }

    /// One return over the window given log-price `p`.
    pub fn increment<R: Rng + ?Sized>(&self, p: f64, a: f64, b_t: f64, rng: &mut R) -> f64 {
        let sigma = volatility(p, a, b_t);
        match self.shape {
            Shape::Gaussian { sqrt_window } => {
                let z: f64 = rng.sample(StandardNormal);
                sigma * sqrt_window * z
            }
            Shape::QGaussian { scale, unit } => sigma * scale * unit.sample(rng),
        }
    }
}

pub fn return_increment<R: Rng + ?Sized>(p: f64, spec: &NoiseSpec, a: f64, b_t: f64, rng: &mut R) -> Result<f64> {
    Ok(ReturnNoise::new(spec)?.increment(p, a, b_t, rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Stream};
    use statrs::distribution::{ContinuousCDF, StudentsT};

    /// Gamma function by composite Simpson quadrature of `t^(x-1) e^-t`
    /// after the substitution `t = s^2`, independent of the implementation.
    fn gamma_quadrature(x: f64) -> f64 {
        let (upper, n) = (12.0f64, 200_000);
        let h = upper / n as f64;
        let f = |s: f64| 2.0 * s.powf(2.0 * x - 1.0) * (-s * s).exp();
        let mut acc = f(0.0) + f(upper);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(i as f64 * h);
        }
        acc * h / 3.0
    }

    fn sigma_q_oracle(t: f64, lambda: f64) -> f64 {
        let bracket = (std::f64::consts::PI * (lambda - 1.0)).sqrt() * gamma_quadrature((lambda - 1.0) / 2.0)
            / gamma_quadrature(lambda / 2.0);
        bracket.powf(1.0 / (lambda - 1.0)) * ((lambda - 2.0) / lambda * t).powf(lambda / (2.0 * (lambda - 1.0)))
    }

    #[test]
    fn sigma_q_at_unit_window_lambda_four() {
        // (sqrt(3 pi) G(1.5) / G(2))^(1/3) * 0.5^(2/3), with G(1.5) = sqrt(pi)/2, G(2) = 1
        let closed = ((3.0 * std::f64::consts::PI).sqrt() * std::f64::consts::PI.sqrt() / 2.0).powf(1.0 / 3.0)
            * 0.5f64.powf(2.0 / 3.0);
        let got = sigma_q(1.0, 4.0).unwrap();
        assert!((got - closed).abs() < 1e-12);
        assert!((got - 0.8795).abs() < 1e-3);
    }

    #[test]
    fn sigma_q_matches_quadrature_oracle() {
        for &(t, lambda) in &[(1.0, 3.5), (3.0, 4.0), (10.0, 5.0), (30.0, 7.5)] {
            let want = sigma_q_oracle(t, lambda);
            let got = sigma_q(t, lambda).unwrap();
            assert!((got / want - 1.0).abs() < 1e-6, "T={t} lambda={lambda}: {got} vs {want}");
        }
    }

    #[test]
    fn sigma_q_power_law_in_window() {
        let lambda = 4.0;
        let c = 7.0;
        let ratio = sigma_q(c * 2.0, lambda).unwrap() / sigma_q(2.0, lambda).unwrap();
        assert!((ratio - c.powf(lambda / (2.0 * (lambda - 1.0)))).abs() < 1e-12);
        // exponent tends to 1/2 for large lambda
        let big = 1e6;
        let r = sigma_q(4.0, big).unwrap() / sigma_q(1.0, big).unwrap();
        assert!((r - 2.0).abs() < 1e-5);
    }

    #[test]
    fn sigma_q_rejects_bad_inputs() {
        assert!(sigma_q(0.0, 4.0).is_err());
        assert!(sigma_q(1.0, 2.0).is_err());
        assert!(sigma_q(1.0, 1.5).is_err());
    }

    #[test]
    fn unit_qgaussian_density_equals_student_t() {
        for &lambda in &[2.5, 3.0, 4.0, 5.0, 9.0] {
            let t = StudentsT::new(0.0, 1.0, lambda - 1.0).unwrap();
            let mut u = -50.0;
            while u <= 50.0 {
                let a = qgaussian_density(u, lambda);
                let b = statrs::distribution::Continuous::pdf(&t, u);
                assert!((a / b - 1.0).abs() < 1e-12, "lambda={lambda} u={u}: {a} vs {b}");
                u += 0.25;
            }
        }
    }

    #[test]
    fn unit_qgaussian_sample_is_symmetric() {
        let mut rng = stream(1, Stream::Noise);
        let d = UnitQGaussian::new(4.0).unwrap();
        let mut xs: Vec<f64> = (0..100_001).map(|_| d.sample(&mut rng)).collect();
        xs.sort_by(f64::total_cmp);
        let median = xs[50_000];
        // median standard error ~ 1 / (2 f(0) sqrt(n)), f(0) = 0.3676 for t(3)
        assert!(median.abs() < 4.0 * 1.0 / (2.0 * 0.3676 * (1e5f64).sqrt()), "median {median}");
        let t3 = StudentsT::new(0.0, 1.0, 3.0).unwrap();
        let ks = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = t3.cdf(x);
                (f - i as f64 / xs.len() as f64).abs().max(((i + 1) as f64 / xs.len() as f64 - f).abs())
            })
            .fold(0.0, f64::max);
        assert!(ks < 0.01, "ks {ks}");
    }

    #[test]
    fn volatility_examples() {
        assert_eq!(volatility(0.0, 0.5, 1.0), 1.0);
        assert_eq!(volatility(2.0, 0.5, 1.0), 2.0);
        assert_eq!(volatility(-2.0, 0.5, 1.0), 2.0);
        for p in [-10.0, 0.0, 3.0] {
            assert_eq!(volatility(p, 0.0, 0.7), 0.7);
        }
    }

    #[test]
    fn seasonal_profile_examples() {
        let prof = SeasonalityProfile::nyse_bump();
        assert!((seasonal_b(195.0, &prof) - 1.5).abs() < 1e-15);
        let at_zero = seasonal_b(0.0, &prof);
        assert!((at_zero - 0.5).abs() < 1e-30 + (-(195.0f64 / 20.0).powi(2)).exp() * 1.01);
        assert_eq!(seasonal_b(390.0, &prof), at_zero);
        assert_eq!(seasonal_b(1.0, &prof), seasonal_b(391.0, &prof));
        assert_eq!(seasonal_b(12.5, &SeasonalityProfile::Constant { b: 1.3 }), 1.3);
    }

    #[test]
    fn bump_wraps_around_the_session() {
        let prof = SeasonalityProfile::IntradayBump { width: 20.0, base: 0.5, peak_offset: 5.0, session_length: 390.0 };
        // 10 minutes before the peak across the wrap
        assert!((seasonal_b(385.0, &prof) - seasonal_b(15.0, &prof)).abs() < 1e-15);
        assert!((seasonal_b(385.0, &prof) - ((-0.25f64).exp() + 0.5)).abs() < 1e-15);
    }

    #[test]
    fn profile_validation() {
        assert!(SeasonalityProfile::Constant { b: 0.0 }.validate().is_err());
        assert!(SeasonalityProfile::nyse_bump().validate().is_ok());
        let bad = SeasonalityProfile::IntradayBump { width: 0.0, base: 0.5, peak_offset: 1.0, session_length: 390.0 };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn gaussian_increment_is_standard_normal_when_state_free() {
        let mut rng = stream(5, Stream::Noise);
        let spec = NoiseSpec::gaussian(1.0);
        let n = 200_000;
        let xs: Vec<f64> = (0..n).map(|_| return_increment(3.0, &spec, 0.0, 1.0, &mut rng).unwrap()).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 0.01);
        assert!((var - 1.0).abs() < 0.01);
    }

    #[test]
    fn gaussian_variance_is_linear_in_window() {
        let noise1 = ReturnNoise::new(&NoiseSpec::gaussian(1.0)).unwrap();
        let noise9 = ReturnNoise::new(&NoiseSpec::gaussian(9.0)).unwrap();
        // identical streams: the deviate is shared, so the ratio is exactly sqrt(9)
        let x1 = noise1.increment(0.4, 0.5, 1.0, &mut stream(2, Stream::Noise));
        let x9 = noise9.increment(0.4, 0.5, 1.0, &mut stream(2, Stream::Noise));
        assert!((x9 / x1 - 3.0).abs() < 1e-12);
    }

    #[test]
    fn spec_validation() {
        assert!(NoiseSpec::q_gaussian(2.0, 1.0).validate().is_err());
        assert!(NoiseSpec::q_gaussian(4.0, 0.0).validate().is_err());
        assert!(NoiseSpec::gaussian(1.0).validate().is_ok());
        assert!((NoiseSpec::q_gaussian(4.0, 1.0).q() - 1.5).abs() < 1e-15);
    }
}
