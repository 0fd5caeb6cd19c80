//! Modified binomial inductions and the per-horizon decomposition.
//!
//! Both binomial algorithms evaluate, at every node of period `k`,
//!
//! ```text
//! V(k, S) = b·q_d·V(k+1, S·d) + q_m·f(S) + b·q_u·V(k+1, S·u)
//! ```
//!
//! with `V(N, S) = f(S)`: the middle branch is never stored, it pays on the
//! spot.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::expiry::{discount_mgf, ExpiryLaw};
use crate::model::{MarketParams, MoveFactors, PeriodProbabilities};
use crate::payoff::Payoff;

use super::{check_law, setup, Algorithm, PriceResult, Timer};

struct Recursion<'a> {
    schedule: &'a [PeriodProbabilities],
    factors: &'a MoveFactors,
    payoff: &'a Payoff,
    steps: usize,
    work: u64,
}

impl Recursion<'_> {
    fn value(&mut self, s: f64, k: usize) -> Result<f64> {
        self.work += 1;
        if k == self.steps {
            return self.payoff.evaluate(s);
        }
        let q = self.schedule[k];
        let b = self.factors.disc;
        let down = self.value(s * self.factors.down, k + 1)?;
        let now = self.payoff.evaluate(s)?;
        self.work += 1;
        let up = self.value(s * self.factors.up, k + 1)?;
        Ok(b * q.q_down() * down + q.q_mid() * now + b * q.q_up() * up)
    }
}

/// Recursive non-recombining binomial tree, `3·2^N - 2` units of work
/// (calls plus middle-branch payoff evaluations).
pub fn price_recursive_binomial(
    params: &MarketParams,
    factors: &MoveFactors,
    law: &ExpiryLaw,
    payoff: &Payoff,
) -> Result<PriceResult> {
    let schedule = setup(Algorithm::RecursiveBinomial, params, factors, law, payoff)?;
    let timer = Timer::start();
    let mut rec = Recursion {
        schedule: &schedule,
        factors,
        payoff,
        steps: params.steps,
        work: 0,
    };
    let value = rec.value(params.spot, 0)?;
    Ok(timer.finish(Algorithm::RecursiveBinomial, value, rec.work))
}

/// Recombining binomial tree stored level by level: level `k` starts at
/// `k(k+1)/2` and node `i` carries `S0·u^i·d^{k-i}`.
pub fn price_recombining(
    params: &MarketParams,
    factors: &MoveFactors,
    law: &ExpiryLaw,
    payoff: &Payoff,
) -> Result<PriceResult> {
    let schedule = setup(Algorithm::Recombining, params, factors, law, payoff)?;
    let timer = Timer::start();
    let n = params.steps;
    let (s0, u, d, b) = (params.spot, factors.up, factors.down, factors.disc);
    let mut tree = vec![0.0; n * (n + 3) / 2 + 1];
    let mut writes = 0u64;
    for k in (0..=n).rev() {
        let offset = k * (k + 1) / 2;
        for i in 0..=k {
            let s = s0 * u.powi(i as i32) * d.powi((k - i) as i32);
            tree[offset + i] = if k == n {
                payoff.evaluate(s)?
            } else {
                let q = schedule[k];
                b * q.q_down() * tree[offset + k + 1 + i]
                    + q.q_mid() * payoff.evaluate(s)?
                    + b * q.q_up() * tree[offset + k + 2 + i]
            };
            writes += 1;
        }
    }
    Ok(timer.finish(Algorithm::Recombining, tree[0], writes))
}

/// `e^{-r·k·dt}·E[f(S_k) | τ = k]`: a fixed-expiry option on a `k`-step
/// binomial tree with the no-expiry risk-neutral probabilities.
pub fn fixed_expiry_price(
    spot: f64,
    factors: &MoveFactors,
    horizon: usize,
    payoff: &Payoff,
) -> Result<f64> {
    fixed_expiry_counted(spot, factors, horizon, payoff).map(|(v, _)| v)
}

fn fixed_expiry_counted(
    spot: f64,
    factors: &MoveFactors,
    horizon: usize,
    payoff: &Payoff,
) -> Result<(f64, u64)> {
    let (u, d, b) = (factors.up, factors.down, factors.disc);
    let (pu, pd) = (factors.binomial_up(), factors.binomial_down());
    let mut layer = (0..=horizon)
        .map(|i| payoff.evaluate(spot * u.powi(i as i32) * d.powi((horizon - i) as i32)))
        .collect::<Result<Vec<_>>>()?;
    let mut writes = layer.len() as u64;
    for k in (0..horizon).rev() {
        for i in 0..=k {
            layer[i] = b * (pd * layer[i] + pu * layer[i + 1]);
        }
        writes += k as u64 + 1;
    }
    Ok((layer[0], writes))
}

fn fixed_expiry_all(
    spot: f64,
    factors: &MoveFactors,
    steps: usize,
    payoff: &Payoff,
) -> Result<(Vec<f64>, u64)> {
    let mut work = 0;
    let prices = (0..=steps)
        .map(|k| {
            let (v, w) = fixed_expiry_counted(spot, factors, k, payoff)?;
            work += w;
            Ok(v)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((prices, work))
}

/// `Σ_k Q(τ = k)·e^{-r·k·dt}·E[f(S_k) | τ = k]`, one binomial tree per horizon.
pub fn price_conditioning_sum(
    params: &MarketParams,
    factors: &MoveFactors,
    law: &ExpiryLaw,
    payoff: &Payoff,
) -> Result<PriceResult> {
    setup(Algorithm::ConditioningSum, params, factors, law, payoff)?;
    let timer = Timer::start();
    let (per_k, work) = fixed_expiry_all(params.spot, factors, params.steps, payoff)?;
    let value = law.pmf().iter().zip(&per_k).map(|(p, v)| p * v).sum();
    Ok(timer.finish(Algorithm::ConditioningSum, value, work))
}

/// `S0·E[e^{-y·τ·dt}]`.
pub fn price_zsc_closed_form(params: &MarketParams, law: &ExpiryLaw) -> Result<f64> {
    check_law(params, law)?;
    Ok(params.spot * discount_mgf(law, params.div_yield, params.dt()))
}

/// Hull of the fixed-expiry prices over all horizons. Every admissible
/// expiry law prices inside `[low, high]`; when the hull is not degenerate
/// the price lies strictly inside, the endpoints being limits only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceRange {
    pub low: f64,
    pub high: f64,
    pub per_k_prices: Vec<f64>,
    pub degenerate: bool,
}

impl PriceRange {
    pub fn contains(&self, value: f64, slack: f64) -> bool {
        value >= self.low - slack && value <= self.high + slack
    }
}

pub fn price_range(
    params: &MarketParams,
    factors: &MoveFactors,
    payoff: &Payoff,
) -> Result<PriceRange> {
    params.validate()?;
    payoff.validate()?;
    let (per_k, _) = fixed_expiry_all(params.spot, factors, params.steps, payoff)?;
    let low = per_k.iter().copied().fold(f64::INFINITY, f64::min);
    let high = per_k.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let degenerate = high - low <= 1e-12 * high.abs().max(1.0);
    Ok(PriceRange {
        low,
        high,
        per_k_prices: per_k,
        degenerate,
    })
}
