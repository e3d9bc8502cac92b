//! Microscopic three-state agent chain, used to cross-check the SDE limit.
//!
//! Each of the six one-agent transitions has an ant-recruitment rate with a
//! spontaneous part and a herding part proportional to the occupation of
//! the destination group:
//!
//! ```text
//! f -> o : N_f [sigma_fc / 2N + h n_o]      o -> f : N_o [sigma_cf / N + h n_f]
//! f -> p : N_f [sigma_fc / 2N + h n_p]      p -> f : N_p [sigma_cf / N + h n_f]
//! o -> p : N_o [sigma_cc / N + H h n_p]     p -> o : N_p [sigma_cc / N + H h n_o]
//! ```
//!
//! Summing the first column gives `N pi_fc(n_f)`, the second `N pi_cf(n_f)`.
//! The stationary law of `N_f` is Beta-binomial with parameters
//! `(N, sigma_cf / h, sigma_fc / h)`, whose `N -> inf` limit is the Beta law of
//! the SDE. Time here runs `N` times slower than the SDE time.

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::rng::{self, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AgentCounts {
    pub fundamentalists: u64,
    pub optimists: u64,
    pub pessimists: u64,
}

impl AgentCounts {
    pub fn new(fundamentalists: u64, optimists: u64, pessimists: u64) -> Self {
        Self { fundamentalists, optimists, pessimists }
    }

    pub fn total(&self) -> u64 {
        self.fundamentalists + self.optimists + self.pessimists
    }

    pub fn chartists(&self) -> u64 {
        self.optimists + self.pessimists
    }

    pub fn fundamentalist_fraction(&self) -> f64 {
        self.fundamentalists as f64 / self.total() as f64
    }

    /// `(N_o - N_p) / (N_o + N_p)`, or `None` without chartists.
    pub fn mood(&self) -> Option<f64> {
        let c = self.chartists();
        (c > 0).then(|| (self.optimists as f64 - self.pessimists as f64) / c as f64)
    }
}

/// Unscaled transition rates (1/time).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentRates {
    pub sigma_cf: f64,
    pub sigma_fc: f64,
    pub sigma_cc: f64,
    pub h: f64,
    pub herd_ratio: f64,
}

impl AgentRates {
    /// Inverts the scaling `eps_cf = sigma_cf / h`, `eps_fc = sigma_fc / h`,
    /// `eps_cc = sigma_cc / (H h)`.
    pub fn from_params(p: &ModelParams) -> Self {
        let h = p.herding_rate;
        Self {
            sigma_cf: p.eps_cf * h,
            sigma_fc: p.eps_fc * h,
            sigma_cc: p.eps_cc * p.herd_ratio * h,
            h,
            herd_ratio: p.herd_ratio,
        }
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("sigma_cf", self.sigma_cf),
            ("sigma_fc", self.sigma_fc),
            ("sigma_cc", self.sigma_cc),
            ("h", self.h),
            ("H", self.herd_ratio),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(name, format!("must be finite and > 0, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transition {
    FundamentalistToOptimist,
    FundamentalistToPessimist,
    OptimistToFundamentalist,
    PessimistToFundamentalist,
    OptimistToPessimist,
    PessimistToOptimist,
}

impl Transition {
    pub const ALL: [Transition; 6] = [
        Transition::FundamentalistToOptimist,
        Transition::FundamentalistToPessimist,
        Transition::OptimistToFundamentalist,
        Transition::PessimistToFundamentalist,
        Transition::OptimistToPessimist,
        Transition::PessimistToOptimist,
    ];

    fn apply(self, c: &mut AgentCounts) {
        use Transition::*;
        match self {
            FundamentalistToOptimist => {
                c.fundamentalists -= 1;
                c.optimists += 1;
            }
            FundamentalistToPessimist => {
                c.fundamentalists -= 1;
                c.pessimists += 1;
            }
            OptimistToFundamentalist => {
                c.optimists -= 1;
                c.fundamentalists += 1;
            }
            PessimistToFundamentalist => {
                c.pessimists -= 1;
                c.fundamentalists += 1;
            }
            OptimistToPessimist => {
                c.optimists -= 1;
                c.pessimists += 1;
            }
            PessimistToOptimist => {
                c.pessimists -= 1;
                c.optimists += 1;
            }
        }
    }
}

/// Rates of the six transitions, in the order of [`Transition::ALL`].
pub fn transition_rates(c: &AgentCounts, r: &AgentRates) -> [f64; 6] {
    let n = c.total() as f64;
    let nf = c.fundamentalists as f64;
    let no = c.optimists as f64;
    let np = c.pessimists as f64;
    let spont_fc = r.sigma_fc / (2.0 * n);
    let spont_cf = r.sigma_cf / n;
    let spont_cc = r.sigma_cc / n;
    let hh = r.herd_ratio * r.h;
    [
        nf * (spont_fc + r.h * no / n),
        nf * (spont_fc + r.h * np / n),
        no * (spont_cf + r.h * nf / n),
        np * (spont_cf + r.h * nf / n),
        no * (spont_cc + hh * np / n),
        np * (spont_cc + hh * no / n),
    ]
}

/// Aggregate `(f -> c, c -> f)` rates, i.e. `N pi_fc(n_f)` and `N pi_cf(n_f)`.
pub fn fc_rates(c: &AgentCounts, r: &AgentRates) -> (f64, f64) {
    let k = transition_rates(c, r);
    (k[0] + k[1], k[2] + k[3])
}

/// Exact event-driven simulation of the agent chain.
///
/// Returns the occupation at times `0, dt_s, 2 dt_s, ...` up to `duration`,
/// where `dt_s = sample_interval`.
pub fn agent_oracle(
    initial: AgentCounts,
    rates: &AgentRates,
    duration: f64,
    sample_interval: f64,
    seed: u64,
) -> Result<Vec<AgentCounts>> {
    let n = initial.total();
    if n < 3 {
        return Err(Error::invalid("N", format!("need at least 3 agents, got {n}")));
    }
    // beyond 2^53 counts lose integer precision as f64
    if n > (1u64 << 53) {
        return Err(Error::invalid("N", format!("{n} agents overflow the rate arithmetic")));
    }
    rates.validate()?;
    let peak = n as f64 * (rates.sigma_cf + rates.sigma_fc + rates.sigma_cc) + n as f64 * rates.h * (1.0 + rates.herd_ratio);
    if !peak.is_finite() {
        return Err(Error::invalid("N", format!("{n} agents overflow the rate arithmetic")));
    }
    if !(duration.is_finite() && duration >= 0.0) {
        return Err(Error::invalid("duration", format!("must be >= 0, got {duration}")));
    }
    if !(sample_interval.is_finite() && sample_interval > 0.0) {
        return Err(Error::invalid("sample_interval", format!("must be > 0, got {sample_interval}")));
    }

    let mut rng = rng::stream(seed, Stream::Agents);
    let n_samples = (duration / sample_interval).floor() as usize + 1;
    let mut out = Vec::with_capacity(n_samples);
    let mut state = initial;
    let mut t = 0.0;
    let mut next_sample = 0.0;
    while out.len() < n_samples {
        let k = transition_rates(&state, rates);
        let total: f64 = k.iter().sum();
        let wait: f64 = Exp1.sample(&mut rng);
        let t_event = t + wait / total;
        while out.len() < n_samples && next_sample < t_event {
            out.push(state);
            next_sample = out.len() as f64 * sample_interval;
        }
        if out.len() == n_samples {
            break;
        }
        let mut u = rng.random::<f64>() * total;
        let mut chosen = None;
        for (tr, rate) in Transition::ALL.iter().zip(k) {
            // empty groups have zero rate and are never selected
            if rate > 0.0 {
                chosen = Some(*tr);
                if u < rate {
                    break;
                }
                u -= rate;
            }
        }
        let chosen = chosen.expect("total rate is positive");
        chosen.apply(&mut state);
        t = t_event;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rates() -> AgentRates {
        AgentRates { sigma_cf: 2.0, sigma_fc: 3.0, sigma_cc: 3.0, h: 1.0, herd_ratio: 1.0 }
    }

    #[test]
    fn boundary_rates() {
        let r = rates();
        let (f_to_c, c_to_f) = fc_rates(&AgentCounts::new(100, 0, 0), &r);
        assert!((f_to_c - r.sigma_fc).abs() < 1e-12);
        assert_eq!(c_to_f, 0.0);
        let (f_to_c, c_to_f) = fc_rates(&AgentCounts::new(0, 60, 40), &r);
        assert_eq!(f_to_c, 0.0);
        assert!((c_to_f - r.sigma_cf).abs() < 1e-12);
    }

    #[test]
    fn aggregate_rates_match_one_step_form() {
        let r = AgentRates { sigma_cf: 0.7, sigma_fc: 1.3, sigma_cc: 4.0, h: 0.9, herd_ratio: 5.0 };
        let c = AgentCounts::new(30, 45, 25);
        let n = 100.0;
        let nf = 0.3;
        let (f_to_c, c_to_f) = fc_rates(&c, &r);
        assert!((f_to_c - n * nf * (r.sigma_fc / n + r.h * (1.0 - nf))).abs() < 1e-12);
        assert!((c_to_f - n * (1.0 - nf) * (r.sigma_cf / n + r.h * nf)).abs() < 1e-12);
        let k = transition_rates(&c, &r);
        let (np, no) = (0.25, 0.45);
        assert!((k[5] - n * np * (r.sigma_cc / n + r.herd_ratio * r.h * (1.0 - nf - np))).abs() < 1e-12);
        assert!((k[4] - n * no * (r.sigma_cc / n + r.herd_ratio * r.h * np)).abs() < 1e-12);
    }

    #[test]
    fn counts_are_conserved() {
        let traj = agent_oracle(AgentCounts::new(50, 30, 20), &rates(), 50.0, 0.5, 9).unwrap();
        assert_eq!(traj.len(), 101);
        assert_eq!(traj[0], AgentCounts::new(50, 30, 20));
        assert!(traj.iter().all(|c| c.total() == 100));
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(agent_oracle(AgentCounts::new(1, 1, 0), &rates(), 1.0, 0.1, 0).is_err());
        let bad = AgentRates { h: 0.0, ..rates() };
        assert!(agent_oracle(AgentCounts::new(5, 5, 5), &bad, 1.0, 0.1, 0).is_err());
        let huge = AgentRates { sigma_cc: f64::MAX, ..rates() };
        assert!(agent_oracle(AgentCounts::new(u64::MAX / 4, 1, 1), &huge, 1.0, 0.1, 0).is_err());
        assert!(agent_oracle(AgentCounts::new(3_000, 3, 3), &huge, 1.0, 0.1, 0).is_err());
    }

    #[test]
    fn deterministic_given_seed() {
        let a = agent_oracle(AgentCounts::new(10, 5, 5), &rates(), 20.0, 1.0, 4).unwrap();
        let b = agent_oracle(AgentCounts::new(10, 5, 5), &rates(), 20.0, 1.0, 4).unwrap();
        assert_eq!(a, b);
    }

    /// Beta-binomial pmf by detailed balance of the one-step chain.
    fn detailed_balance_pmf(n: u64, eps_cf: f64, eps_fc: f64) -> Vec<f64> {
        let mut w = vec![1.0f64];
        for k in 0..n {
            let (k, nn) = (k as f64, n as f64);
            let up = (nn - k) * (eps_cf + k);
            let down = (k + 1.0) * (eps_fc + nn - k - 1.0);
            w.push(w.last().unwrap() * up / down);
        }
        let z: f64 = w.iter().sum();
        w.iter().map(|x| x / z).collect()
    }

    #[test]
    fn stationary_histogram_matches_beta_binomial() {
        let r = rates();
        let n = 40u64;
        let traj = agent_oracle(AgentCounts::new(20, 10, 10), &r, 4.0e4, 1.0, 17).unwrap();
        let mut hist = vec![0.0; n as usize + 1];
        for c in &traj[1000..] {
            hist[c.fundamentalists as usize] += 1.0;
        }
        let total: f64 = hist.iter().sum();
        let exact = detailed_balance_pmf(n, r.sigma_cf / r.h, r.sigma_fc / r.h);
        let tv: f64 = hist.iter().zip(&exact).map(|(h, e)| (h / total - e).abs()).sum::<f64>() / 2.0;
        assert!(tv < 0.05, "total variation {tv}");
    }
}
