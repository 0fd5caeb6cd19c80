//! Market inputs, lattice move factors and risk-neutral calibration.
//!
//! The middle branch of every trinomial step grows the ex-dividend price by
//! exactly `m = e^{(r-y)dt}` and is read as "the option expires now". Given a
//! middle probability (the expiry hazard of that period), the up and down
//! probabilities are the binomial risk-neutral ones scaled by `1 - q_mid`,
//! which keeps the one-step drift equal to `e^{(r-y)dt}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Economic inputs of the lattice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketParams {
    pub spot: f64,
    pub rate: f64,
    pub div_yield: f64,
    pub sigma: f64,
    pub maturity: f64,
    pub steps: usize,
}

impl Default for MarketParams {
    /// Reference parameter set: `N = 20, T = 1, S0 = 100, sigma = 30%,
    /// r = 10%, y = 5%`.
    fn default() -> Self {
        Self {
            spot: 100.0,
            rate: 0.10,
            div_yield: 0.05,
            sigma: 0.30,
            maturity: 1.0,
            steps: 20,
        }
    }
}

impl MarketParams {
    pub fn new(
        spot: f64,
        rate: f64,
        div_yield: f64,
        sigma: f64,
        maturity: f64,
        steps: usize,
    ) -> Result<Self> {
        let params = Self {
            spot,
            rate,
            div_yield,
            sigma,
            maturity,
            steps,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParams(format!("{name} must be > 0, got {v}")))
            }
        };
        let non_negative = |name: &str, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParams(format!(
                    "{name} must be >= 0, got {v}"
                )))
            }
        };
        positive("spot", self.spot)?;
        positive("sigma", self.sigma)?;
        positive("maturity", self.maturity)?;
        non_negative("rate", self.rate)?;
        non_negative("div_yield", self.div_yield)?;
        if self.steps == 0 {
            return Err(Error::InvalidParams("steps must be >= 1".into()));
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        self.maturity / self.steps as f64
    }

    pub fn with_steps(self, steps: usize) -> Self {
        Self { steps, ..self }
    }

    pub fn with_spot(self, spot: f64) -> Self {
        Self { spot, ..self }
    }
}

/// How the up and down factors are spread around the middle factor.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FactorStyle {
    /// `u, d = m e^{±σ√dt}`
    #[default]
    Exponential,
    /// `u, d = m (1 ± σ√dt)`; needs `σ²dt < 1`.
    Linear,
}

/// Per-step factors, cached once per lattice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MoveFactors {
    pub up: f64,
    pub mid: f64,
    pub down: f64,
    pub dt: f64,
    /// One-period discount factor `e^{-r dt}`.
    pub disc: f64,
}

impl MoveFactors {
    /// Risk-neutral one-step growth of the ex-dividend price, `e^{(r-y)dt}`.
    /// Equal to `mid` by construction.
    pub fn growth(&self) -> f64 {
        self.mid
    }

    /// Conditional up-probability given that the step is not a middle move.
    pub fn binomial_up(&self) -> f64 {
        (self.growth() - self.down) / (self.up - self.down)
    }

    pub fn binomial_down(&self) -> f64 {
        (self.up - self.growth()) / (self.up - self.down)
    }

    fn check(&self) -> Result<()> {
        let ok = self.down > 0.0
            && self.down < self.mid
            && self.mid < self.up
            && self.up.is_finite()
            && self.dt > 0.0
            && self.disc > 0.0
            && self.disc <= 1.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!(
                "factors violate 0 < d < m < u: d={}, m={}, u={}",
                self.down, self.mid, self.up
            )))
        }
    }
}

pub fn make_factors(params: &MarketParams, style: FactorStyle) -> Result<MoveFactors> {
    params.validate()?;
    let dt = params.dt();
    let mid = ((params.rate - params.div_yield) * dt).exp();
    let disc = (-params.rate * dt).exp();
    let spread = params.sigma * dt.sqrt();
    let (up, down) = match style {
        FactorStyle::Exponential => (mid * spread.exp(), mid * (-spread).exp()),
        FactorStyle::Linear => {
            if spread >= 1.0 {
                return Err(Error::InvalidParams(format!(
                    "linear factors need sigma^2 * dt < 1, got {}",
                    spread * spread
                )));
            }
            (mid * (1.0 + spread), mid * (1.0 - spread))
        }
    };
    let factors = MoveFactors {
        up,
        mid,
        down,
        dt,
        disc,
    };
    factors.check()?;
    Ok(factors)
}

/// One trinomial move.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Move {
    Down,
    Mid,
    Up,
}

/// Risk-neutral branch probabilities of a single node or period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodProbabilities {
    q_up: f64,
    q_mid: f64,
    q_down: f64,
}

impl PeriodProbabilities {
    pub fn q_up(&self) -> f64 {
        self.q_up
    }

    pub fn q_mid(&self) -> f64 {
        self.q_mid
    }

    pub fn q_down(&self) -> f64 {
        self.q_down
    }

    pub fn of(&self, mv: Move) -> f64 {
        match mv {
            Move::Down => self.q_down,
            Move::Mid => self.q_mid,
            Move::Up => self.q_up,
        }
    }

    /// Expiry with certainty. Only reachable through an expiry law whose
    /// survival drops to zero before maturity; never produced by the
    /// calibration functions.
    pub(crate) fn certain_expiry() -> Self {
        Self {
            q_up: 0.0,
            q_mid: 1.0,
            q_down: 0.0,
        }
    }

    /// `q_up·u + q_mid·m + q_down·d`, which calibration pins to `e^{(r-y)dt}`.
    pub fn drift(&self, factors: &MoveFactors) -> f64 {
        self.q_up * factors.up + self.q_mid * factors.mid + self.q_down * factors.down
    }
}

pub fn homogeneous_probs(factors: &MoveFactors, hazard: f64) -> Result<PeriodProbabilities> {
    calibrate(factors, hazard, 0)
}

fn calibrate(factors: &MoveFactors, hazard: f64, period: usize) -> Result<PeriodProbabilities> {
    if !(0.0..1.0).contains(&hazard) {
        return Err(Error::InvalidHazard {
            period,
            value: hazard,
        });
    }
    let survive = 1.0 - hazard;
    Ok(PeriodProbabilities {
        q_up: factors.binomial_up() * survive,
        q_mid: hazard,
        q_down: factors.binomial_down() * survive,
    })
}

/// Per-period probabilities for a homogeneous tree.
///
/// Hazards must lie in `[0, 1)` except that a hazard of exactly `1` is
/// accepted as "expires here for sure"; later periods are then unreachable.
pub fn homogeneous_schedule(
    factors: &MoveFactors,
    hazards: &[f64],
) -> Result<Vec<PeriodProbabilities>> {
    hazards
        .iter()
        .enumerate()
        .map(|(k, &h)| {
            if h == 1.0 {
                Ok(PeriodProbabilities::certain_expiry())
            } else {
                calibrate(factors, h, k)
            }
        })
        .collect()
}

/// Hazard callback for the general tree: `(period, up/down moves so far)`.
pub type HazardFn<'a> = dyn Fn(usize, &[Move]) -> f64 + Sync + 'a;

/// Node-dependent probabilities on the non-recombining up/down skeleton.
///
/// Level `k` holds `2^k` nodes. A node is addressed by its move history read
/// as a binary number, most significant bit first, with `Up = 1`. Nodes that
/// sit after a middle move are not represented: the payoff is already fixed
/// there.
#[derive(Debug, Clone)]
pub struct GeneralSchedule {
    levels: Vec<Vec<PeriodProbabilities>>,
}

impl GeneralSchedule {
    pub fn steps(&self) -> usize {
        self.levels.len()
    }

    pub fn at(&self, period: usize, node: usize) -> &PeriodProbabilities {
        &self.levels[period][node]
    }

    pub fn level(&self, period: usize) -> &[PeriodProbabilities] {
        &self.levels[period]
    }
}

/// Decode a node index at level `period` into its move history.
pub fn path_of(period: usize, node: usize, out: &mut Vec<Move>) {
    out.clear();
    for j in (0..period).rev() {
        out.push(if (node >> j) & 1 == 1 {
            Move::Up
        } else {
            Move::Down
        });
    }
}

pub fn general_probs(
    factors: &MoveFactors,
    steps: usize,
    hazard_fn: &HazardFn<'_>,
) -> Result<GeneralSchedule> {
    let mut path = Vec::with_capacity(steps);
    let mut levels = Vec::with_capacity(steps);
    for k in 0..steps {
        let mut level = Vec::with_capacity(1 << k);
        for node in 0..(1usize << k) {
            path_of(k, node, &mut path);
            level.push(calibrate(factors, hazard_fn(k, &path), k)?);
        }
        levels.push(level);
    }
    Ok(GeneralSchedule { levels })
}
