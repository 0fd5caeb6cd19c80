//! Continuous-time limit: geometric Brownian motion stopped at an
//! independent random time `τ∞`, priced by Monte-Carlo, and a harness that
//! compares lattice prices against it as the number of periods grows.
//!
//! Because `τ∞` is independent of the Brownian motion, `W_{τ∞}` is drawn
//! exactly as `√τ∞ · Z`; no time grid is simulated.
//!
//! Path `i` draws from its own ChaCha8 stream (`seed`, stream `i`), and paths
//! are reduced in fixed-size blocks combined in block order, so an estimate
//! depends only on the seed, never on the number of worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expiry::{discretize, ContinuousExpiry, DiscretizeMode};
use crate::model::{make_factors, FactorStyle, MarketParams};
use crate::payoff::Payoff;
use crate::pricer::price_recombining;

const BLOCK: u64 = 8192;
const Z99: f64 = 2.576;

/// Diffusion inputs: the lattice's market parameters without a step count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiffusionParams {
    pub spot: f64,
    pub rate: f64,
    pub div_yield: f64,
    pub sigma: f64,
}

impl From<&MarketParams> for DiffusionParams {
    fn from(p: &MarketParams) -> Self {
        Self {
            spot: p.spot,
            rate: p.rate,
            div_yield: p.div_yield,
            sigma: p.sigma,
        }
    }
}

impl DiffusionParams {
    pub fn lattice(&self, maturity: f64, steps: usize) -> MarketParams {
        MarketParams {
            spot: self.spot,
            rate: self.rate,
            div_yield: self.div_yield,
            sigma: self.sigma,
            maturity,
            steps,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub n_paths: u64,
    /// Steps per unit time for path discretization. Unused while expiry is
    /// independent of the price path.
    pub time_grid: usize,
    pub seed: u64,
    pub antithetic: bool,
    /// Price an unbounded payoff anyway.
    pub allow_unbounded: bool,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            n_paths: 1_000_000,
            time_grid: 1,
            seed: 0,
            antithetic: false,
            allow_unbounded: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_paths: u64,
    pub ci99_low: f64,
    pub ci99_high: f64,
}

/// Inverse-CDF draw of `τ∞` from one uniform.
pub fn sample_expiry<R: Rng + ?Sized>(cont: &ContinuousExpiry, rng: &mut R) -> f64 {
    let u: f64 = rng.random();
    expiry_from_uniform(cont, u)
}

fn expiry_from_uniform(cont: &ContinuousExpiry, u: f64) -> f64 {
    let horizon = cont.horizon();
    match cont {
        ContinuousExpiry::PointMass { t, .. } => *t,
        ContinuousExpiry::ExponentialWithAtom { lambda, .. } => {
            // u ∈ [0, 1), so -ln(1-u) is finite.
            let x = -(-u).ln_1p() / lambda;
            if x >= horizon {
                horizon
            } else {
                x
            }
        }
        ContinuousExpiry::Generic(_) => {
            if cont.prob_before(horizon) <= u {
                return horizon;
            }
            // Smallest x with Q(τ∞ < x) > u, by bisection.
            let (mut lo, mut hi) = (0.0, horizon);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if cont.prob_before(mid) > u {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            lo
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if self.count == 0 {
            return other;
        }
        if other.count == 0 {
            return self;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        let mean = self.mean + delta * other.count as f64 / count as f64;
        let m2 = self.m2
            + other.m2
            + delta * delta * self.count as f64 * other.count as f64 / count as f64;
        Moments { count, mean, m2 }
    }
}

/// `E[e^{-r·τ∞}·f(S∞(τ∞))]` with `S∞(t) = S0·exp((r - y - σ²/2)t + σW_t)`.
pub fn mc_price(
    params: &DiffusionParams,
    cont: &ContinuousExpiry,
    payoff: &Payoff,
    cfg: &McConfig,
) -> Result<McEstimate> {
    cont.validate()?;
    payoff.validate()?;
    if cfg.n_paths == 0 || cfg.time_grid == 0 {
        return Err(Error::InvalidParams(
            "Monte-Carlo needs n_paths >= 1 and time_grid >= 1".into(),
        ));
    }
    if !(params.spot > 0.0 && params.sigma > 0.0 && params.rate >= 0.0 && params.div_yield >= 0.0) {
        return Err(Error::InvalidParams(format!(
            "bad diffusion parameters {params:?}"
        )));
    }
    if !payoff.is_bounded() && !cfg.allow_unbounded {
        return Err(Error::Unbounded(payoff.name().to_string()));
    }

    let drift = params.rate - params.div_yield - 0.5 * params.sigma * params.sigma;
    let base = ChaCha8Rng::seed_from_u64(cfg.seed);
    let eval = |tau: f64, z: f64| -> Result<f64> {
        let s = params.spot * (drift * tau + params.sigma * tau.sqrt() * z).exp();
        Ok((-params.rate * tau).exp() * payoff.evaluate(s)?)
    };
    let path = |i: u64| -> Result<f64> {
        let mut rng = base.clone();
        rng.set_stream(i);
        let tau = sample_expiry(cont, &mut rng);
        let z: f64 = rng.sample(StandardNormal);
        if cfg.antithetic {
            Ok(0.5 * (eval(tau, z)? + eval(tau, -z)?))
        } else {
            eval(tau, z)
        }
    };

    let blocks = cfg.n_paths.div_ceil(BLOCK);
    let partial: Vec<Result<Moments>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut m = Moments::default();
            for i in b * BLOCK..((b + 1) * BLOCK).min(cfg.n_paths) {
                m.push(path(i)?);
            }
            Ok(m)
        })
        .collect();
    let mut total = Moments::default();
    for m in partial {
        total = total.merge(m?);
    }

    let var = if total.count > 1 {
        total.m2 / (total.count - 1) as f64
    } else {
        0.0
    };
    let std_error = (var / total.count as f64).sqrt();
    Ok(McEstimate {
        mean: total.mean,
        std_error,
        n_paths: total.count,
        ci99_low: total.mean - Z99 * std_error,
        ci99_high: total.mean + Z99 * std_error,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    /// Periods per unit time.
    pub n: usize,
    pub tree_price: f64,
    pub mc_mean: f64,
    pub mc_se: f64,
    pub abs_diff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceStudy {
    pub rows: Vec<ConvergenceRow>,
    pub mc: McEstimate,
}

impl ConvergenceStudy {
    /// Whether the finest lattice lies within `k` standard errors of the
    /// Monte-Carlo estimate.
    pub fn final_within(&self, k: f64) -> bool {
        self.rows.last().is_some_and(|r| r.abs_diff <= k * r.mc_se)
    }
}

/// Recombining-tree prices for each `n` (periods per unit time) against one
/// shared Monte-Carlo estimate. The lattice expiry is `⌊n·τ∞⌋`.
pub fn convergence_study(
    params: &DiffusionParams,
    cont: &ContinuousExpiry,
    payoff: &Payoff,
    steps_list: &[usize],
    style: FactorStyle,
    cfg: &McConfig,
) -> Result<ConvergenceStudy> {
    if steps_list.is_empty() || steps_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParams(
            "steps_list must be non-empty and strictly ascending".into(),
        ));
    }
    let mc = mc_price(params, cont, payoff, cfg)?;
    let horizon = cont.horizon();
    let rows = steps_list
        .iter()
        .map(|&n| {
            let law = discretize(cont, n, DiscretizeMode::Floor)?;
            let lattice = params.lattice(horizon, law.steps());
            let factors = make_factors(&lattice, style)?;
            let tree_price = price_recombining(&lattice, &factors, &law, payoff)?.value;
            Ok(ConvergenceRow {
                n,
                tree_price,
                mc_mean: mc.mean,
                mc_se: mc.std_error,
                abs_diff: (tree_price - mc.mean).abs(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceStudy { rows, mc })
}
