//! Model constants of the three-state herding model.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// All constants of the endogenous agent dynamics and the exogenous noise.
///
/// Rates are given in the scaled form used by the integrator: `eps_cf` and
/// `eps_fc` are the spontaneous fundamentalist/chartist switching rates in
/// units of the herding rate `h`, and `eps_cc` is the optimist/pessimist rate
/// in units of `H * h`. Defaults reproduce the NYSE calibration
/// (`eps_cf = 0.1`, `eps_fc = 3`, `eps_cc = 3`, `H = 300`, `h = 1e-8 1/s`,
/// `a = 0.5`, `b = 1`, `lambda = 4`, `alpha = 2`) with integrator precision
/// `kappa = 0.03` and boundary margin `delta = 1e-6`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelParams {
    pub eps_cf: f64,
    pub eps_fc: f64,
    pub eps_cc: f64,
    /// Speed of chartist-chartist herding relative to chartist-fundamentalist.
    #[serde(rename = "H")]
    pub herd_ratio: f64,
    /// Herding rate in 1/s.
    #[serde(rename = "h")]
    pub herding_rate: f64,
    /// Weight of the log-price in both the volatility and the trading activity.
    #[serde(rename = "a")]
    pub feedback_weight: f64,
    /// Constant scale of the exogenous noise.
    #[serde(rename = "b")]
    pub noise_scale: f64,
    /// Exponent of the trading-activity feedback.
    #[serde(rename = "alpha")]
    pub feedback_exponent: f64,
    /// Power-law tail exponent of the q-Gaussian noise.
    #[serde(rename = "lambda")]
    pub tail_exponent: f64,
    /// Integrator precision factor.
    #[serde(rename = "kappa")]
    pub precision: f64,
    /// Distance of the absorbing boundaries from the edges of the domain.
    #[serde(rename = "delta")]
    pub boundary_margin: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            eps_cf: 0.1,
            eps_fc: 3.0,
            eps_cc: 3.0,
            herd_ratio: 300.0,
            herding_rate: 1e-8,
            feedback_weight: 0.5,
            noise_scale: 1.0,
            feedback_exponent: 2.0,
            tail_exponent: 4.0,
            precision: 0.03,
            boundary_margin: 1e-6,
        }
    }
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be finite and > 0, got {v}")))
    }
}

fn non_negative(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be finite and >= 0, got {v}")))
    }
}

/// Rejects `lambda <= 2` (no finite-scale q-Gaussian) and warns for
/// `2 < lambda <= 3`, where `q >= 5/3` leaves the closed-form validity range.
pub fn validate_tail_exponent(lambda: f64) -> Result<()> {
    if !(lambda.is_finite() && lambda > 2.0) {
        return Err(Error::invalid("lambda", format!("must be > 2, got {lambda}")));
    }
    if lambda <= 3.0 {
        log::warn!("lambda = {lambda} gives q = {} >= 5/3, outside 1 < q < 5/3", 1.0 + 2.0 / lambda);
    }
    Ok(())
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        positive("eps_cf", self.eps_cf)?;
        positive("eps_fc", self.eps_fc)?;
        positive("eps_cc", self.eps_cc)?;
        if !(self.herd_ratio.is_finite() && self.herd_ratio >= 1.0) {
            return Err(Error::invalid("H", format!("must be >= 1, got {}", self.herd_ratio)));
        }
        positive("h", self.herding_rate)?;
        non_negative("a", self.feedback_weight)?;
        positive("b", self.noise_scale)?;
        non_negative("alpha", self.feedback_exponent)?;
        validate_tail_exponent(self.tail_exponent)?;
        positive("kappa", self.precision)?;
        let d = self.boundary_margin;
        if !(d.is_finite() && d > 0.0 && d < 0.5) {
            return Err(Error::invalid("delta", format!("must lie in (0, 0.5), got {d}")));
        }
        Ok(())
    }

    /// `1 + eps_cf + eps_fc + H (1 + 2 eps_cc)`, the rate bound in the step-size rule.
    pub fn rate_bound(&self) -> f64 {
        1.0 + self.eps_cf + self.eps_fc + self.herd_ratio * (1.0 + 2.0 * self.eps_cc)
    }

    /// Hex SHA-256 of the canonical JSON form, used to tag output files.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("params serialize");
        hex::encode(Sha256::digest(json))
    }
}
