//! Endogenous agent dynamics: the coupled SDEs for the fundamentalist
//! fraction `n_f` and the chartist mood `xi`, integrated by Euler-Maruyama
//! with a state-dependent step and absorbing margins at the domain edges.
//!
//! In physical time `t` (seconds) the difference equations are
//!
//! ```text
//! x'  = x + h [ (1-x) eps_cf / tau - x eps_fc ] dt + sqrt(2 h x (1-x) dt / tau) z1
//! xi' = xi - 2 h H eps_cc xi dt / tau            + sqrt(2 h H (1-xi^2) dt / tau) z2
//! dt  = kappa^2 tau / (h (1 + eps_cf + eps_fc + H (1 + 2 eps_cc)))
//! ```
//!
//! with `1/tau = (1 + a |p|)^alpha` and log-price `p = (1-x)/x * xi`, all
//! evaluated once at the pre-step state. After each step `x` is clamped to
//! `[delta, 1-delta]` and `xi` to `[-1+delta, 1-delta]`.

use std::io::{BufRead, Write};

use rand::Rng;
use rand_distr::{Beta, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::rng::{self, SimRng, Stream};

/// Seconds between recorded samples of a [`PricePath`].
pub const GRID_SECONDS: f64 = 60.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketState {
    /// Physical time in seconds.
    pub t: f64,
    /// Fraction of fundamentalists.
    pub n_f: f64,
    /// Mean mood of the chartists, `(n_o - n_p) / (n_o + n_p)`.
    pub xi: f64,
}

impl MarketState {
    pub fn new(n_f: f64, xi: f64) -> Self {
        Self { t: 0.0, n_f, xi }
    }

    pub fn log_price(&self) -> Result<f64> {
        log_price(self.n_f, self.xi)
    }

    pub fn in_bounds(&self, delta: f64) -> bool {
        self.n_f >= delta && self.n_f <= 1.0 - delta && self.xi >= -1.0 + delta && self.xi <= 1.0 - delta
    }
}

fn check_domain(n_f: f64, xi: f64) -> Result<()> {
    if !(n_f > 0.0 && n_f <= 1.0) {
        return Err(Error::Domain(format!("n_f must lie in (0, 1], got {n_f}")));
    }
    if !(xi.abs() <= 1.0) {
        return Err(Error::Domain(format!("|xi| must be <= 1, got {xi}")));
    }
    Ok(())
}

/// Log-price `ln(P / P_f) = (1 - n_f) / n_f * xi`.
pub fn log_price(n_f: f64, xi: f64) -> Result<f64> {
    check_domain(n_f, xi)?;
    Ok(price_unchecked(n_f, xi))
}

/// Trading activity `1/tau = (1 + a |p|)^alpha`; always `>= 1`.
pub fn transaction_rate(n_f: f64, xi: f64, a: f64, alpha: f64) -> Result<f64> {
    check_domain(n_f, xi)?;
    if !(a >= 0.0) {
        return Err(Error::invalid("a", format!("must be >= 0, got {a}")));
    }
    if !(alpha >= 0.0) {
        return Err(Error::invalid("alpha", format!("must be >= 0, got {alpha}")));
    }
    Ok(rate_from_price(price_unchecked(n_f, xi), a, alpha))
}

#[inline]
fn price_unchecked(n_f: f64, xi: f64) -> f64 {
    (1.0 - n_f) / n_f * xi
}

#[inline]
fn rate_from_price(p: f64, a: f64, alpha: f64) -> f64 {
    let base = 1.0 + a * p.abs();
    if alpha == 2.0 {
        base * base
    } else if alpha == 1.0 {
        base
    } else {
        base.powf(alpha)
    }
}

/// Step size `kappa^2 tau / (h (1 + eps_cf + eps_fc + H (1 + 2 eps_cc)))` in seconds.
pub fn adaptive_dt(state: &MarketState, params: &ModelParams) -> Result<f64> {
    params.validate()?;
    let rate = transaction_rate(state.n_f, state.xi, params.feedback_weight, params.feedback_exponent)?;
    Ok(params.precision * params.precision / (rate * params.herding_rate * params.rate_bound()))
}

/// Precomputed coefficients of the difference equations.
#[derive(Debug, Clone, Copy)]
struct Coefficients {
    h: f64,
    eps_cf: f64,
    eps_fc: f64,
    /// `2 h H eps_cc`
    mood_drift: f64,
    /// `2 h H`
    mood_diffusion: f64,
    a: f64,
    alpha: f64,
    /// `kappa^2 / (h * rate_bound)`
    dt_scale: f64,
    lo: f64,
    hi: f64,
}

impl Coefficients {
    fn new(p: &ModelParams) -> Self {
        let h = p.herding_rate;
        Self {
            h,
            eps_cf: p.eps_cf,
            eps_fc: p.eps_fc,
            mood_drift: 2.0 * h * p.herd_ratio * p.eps_cc,
            mood_diffusion: 2.0 * h * p.herd_ratio,
            a: p.feedback_weight,
            alpha: p.feedback_exponent,
            dt_scale: p.precision * p.precision / (h * p.rate_bound()),
            lo: p.boundary_margin,
            hi: 1.0 - p.boundary_margin,
        }
    }

    #[inline]
    fn rate(&self, s: &MarketState) -> f64 {
        rate_from_price(price_unchecked(s.n_f, s.xi), self.a, self.alpha)
    }

    /// One update with `rate = 1/tau` evaluated at the pre-step state.
    /// Returns `None` if the unclamped result is not finite.
    #[inline]
    fn apply(&self, s: &MarketState, rate: f64, z1: f64, z2: f64, dt: f64) -> Option<MarketState> {
        let x = s.n_f;
        let xi = s.xi;
        let x_drift = self.h * ((1.0 - x) * self.eps_cf * rate - x * self.eps_fc) * dt;
        let x_diff = (2.0 * self.h * x * (1.0 - x) * rate * dt).sqrt() * z1;
        let xi_drift = -self.mood_drift * xi * rate * dt;
        let xi_diff = (self.mood_diffusion * (1.0 - xi * xi) * rate * dt).sqrt() * z2;
        let x_next = x + x_drift + x_diff;
        let xi_next = xi + xi_drift + xi_diff;
        if !(x_next.is_finite() && xi_next.is_finite()) {
            return None;
        }
        Some(MarketState {
            t: s.t + dt,
            n_f: x_next.clamp(self.lo, self.hi),
            xi: xi_next.clamp(-self.hi, self.hi),
        })
    }
}

/// Applies one Euler-Maruyama step of size `dt` seconds with the given
/// standard normal deviates, then clamps both variables.
///
/// `dt` is expected not to exceed [`adaptive_dt`] at `state`; this is not
/// enforced.
pub fn sde_step(state: &MarketState, params: &ModelParams, z1: f64, z2: f64, dt: f64) -> Result<MarketState> {
    params.validate()?;
    check_domain(state.n_f, state.xi)?;
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::invalid("dt", format!("must be finite and > 0, got {dt}")));
    }
    let c = Coefficients::new(params);
    c.apply(state, c.rate(state), z1, z2, dt)
        .ok_or(Error::Integration { step: 0, t: state.t, n_f: state.n_f, xi: state.xi })
}

/// Draws `n_f ~ Beta(eps_cf, eps_fc)` and `(1 + xi)/2 ~ Beta(eps_cc, eps_cc)`,
/// the stationary laws without feedback, clamped into the margins.
pub fn initial_state<R: Rng + ?Sized>(params: &ModelParams, rng: &mut R) -> Result<MarketState> {
    params.validate()?;
    let nf = Beta::new(params.eps_cf, params.eps_fc).map_err(|e| Error::invalid("eps_cf/eps_fc", e.to_string()))?;
    let mood = Beta::new(params.eps_cc, params.eps_cc).map_err(|e| Error::invalid("eps_cc", e.to_string()))?;
    let lo = params.boundary_margin;
    let hi = 1.0 - lo;
    let n_f = nf.sample(rng).clamp(lo, hi);
    let xi = (2.0 * mood.sample(rng) - 1.0).clamp(-hi, hi);
    Ok(MarketState::new(n_f, xi))
}

/// Sequential integrator owning its state and random stream.
#[derive(Debug, Clone)]
pub struct Integrator {
    coeffs: Coefficients,
    state: MarketState,
    steps: u64,
    rng: SimRng,
}

impl Integrator {
    pub fn new(params: &ModelParams, state: MarketState, rng: SimRng) -> Result<Self> {
        params.validate()?;
        check_domain(state.n_f, state.xi)?;
        Ok(Self { coeffs: Coefficients::new(params), state, steps: 0, rng })
    }

    /// Integrator started from [`initial_state`] drawn from the path stream of `seed`.
    pub fn seeded(params: &ModelParams, seed: u64) -> Result<Self> {
        let mut rng = rng::stream(seed, Stream::Path);
        let state = initial_state(params, &mut rng)?;
        Self::new(params, state, rng)
    }

    pub fn state(&self) -> MarketState {
        self.state
    }

    /// Number of steps taken so far.
    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Size of the next uncapped step in seconds.
    pub fn next_dt(&self) -> f64 {
        self.coeffs.dt_scale / self.coeffs.rate(&self.state)
    }

    /// Takes one step of `min(adaptive dt, max_dt)`.
    #[inline]
    pub fn step_capped(&mut self, max_dt: f64) -> Result<()> {
        let c = &self.coeffs;
        let rate = c.rate(&self.state);
        let dt = (c.dt_scale / rate).min(max_dt);
        let z1: f64 = self.rng.sample(StandardNormal);
        let z2: f64 = self.rng.sample(StandardNormal);
        match c.apply(&self.state, rate, z1, z2, dt) {
            Some(next) => {
                self.state = next;
                self.steps += 1;
                Ok(())
            }
            None => Err(Error::Integration {
                step: self.steps,
                t: self.state.t,
                n_f: self.state.n_f,
                xi: self.state.xi,
            }),
        }
    }

    /// Integrates until the physical time equals `t_target` exactly; the
    /// final step is shortened to land on it.
    pub fn advance_to(&mut self, t_target: f64) -> Result<()> {
        while self.state.t < t_target {
            let remaining = t_target - self.state.t;
            let capped = self.next_dt() >= remaining;
            self.step_capped(remaining)?;
            if capped {
                self.state.t = t_target;
            }
        }
        Ok(())
    }
}

/// One recorded grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathSample {
    pub n_f: f64,
    pub xi: f64,
    /// Log-price, `(1 - n_f) / n_f * xi`.
    pub p: f64,
}

/// Log-price path sampled once per minute after burn-in.
///
/// Sample `i` is taken at physical time `(burn_in + i + 1) * 60` seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct PricePath {
    pub dt_grid: f64,
    pub burn_in: u64,
    pub samples: Vec<PathSample>,
    pub seed: u64,
    pub params: ModelParams,
}

/// Integrates the model for `burn_in + duration` minutes and records
/// `(n_f, xi, p)` at each of the last `duration` minute marks.
pub fn simulate_path(params: &ModelParams, duration: u64, burn_in: u64, seed: u64) -> Result<PricePath> {
    if duration < 1 {
        return Err(Error::invalid("duration", "must be at least 1 minute"));
    }
    let mut integ = Integrator::seeded(params, seed)?;
    for k in 1..=burn_in {
        integ.advance_to(k as f64 * GRID_SECONDS)?;
    }
    let mut samples = Vec::with_capacity(duration as usize);
    for k in 1..=duration {
        integ.advance_to((burn_in + k) as f64 * GRID_SECONDS)?;
        let s = integ.state();
        samples.push(PathSample { n_f: s.n_f, xi: s.xi, p: price_unchecked(s.n_f, s.xi) });
    }
    Ok(PricePath { dt_grid: GRID_SECONDS, burn_in, samples, seed, params: *params })
}

impl PricePath {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn log_prices(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.p)
    }

    /// Writes `t_min,n_f,xi,p`, one row per minute, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t_min,n_f,xi,p")?;
        for (i, s) in self.samples.iter().enumerate() {
            writeln!(w, "{i},{:.16e},{:.16e},{:.16e}", s.n_f, s.xi, s.p)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the samples written by [`PricePath::write_csv`]; seed and
    /// params are not part of the CSV and must be supplied.
    pub fn read_csv<R: BufRead>(r: R, seed: u64, params: ModelParams) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let headers = rdr.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["t_min", "n_f", "xi", "p"] {
            return Err(Error::Parse { line: 1, message: format!("unexpected header {headers:?}") });
        }
        let mut samples = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let field = |j: usize| -> Result<f64> {
                rec[j].parse().map_err(|e| Error::Parse { line: i as u64 + 2, message: format!("{e}") })
            };
            samples.push(PathSample { n_f: field(1)?, xi: field(2)?, p: field(3)? });
        }
        Ok(Self { dt_grid: GRID_SECONDS, burn_in: 0, samples, seed, params })
    }
}
