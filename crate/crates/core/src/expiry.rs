//! Laws of the random expiry period.
//!
//! An [`ExpiryLaw`] is an exact probability vector over the periods
//! `0..=N`. Its hazard view, `h(k) = P(τ = k | τ ≥ k)`, is what the trees
//! use as the middle-branch probability of period `k`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SUM_TOL: f64 = 1e-12;

/// Law of the expiry period `τ ∈ {0, …, N}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawLaw")]
pub struct ExpiryLaw {
    pmf: Vec<f64>,
}

#[derive(Deserialize)]
struct RawLaw {
    pmf: Vec<f64>,
}

impl TryFrom<RawLaw> for ExpiryLaw {
    type Error = Error;

    fn try_from(raw: RawLaw) -> Result<Self> {
        ExpiryLaw::new(raw.pmf)
    }
}

impl ExpiryLaw {
    /// Build a law from `Q(τ = k)`, `k = 0..=N`.
    ///
    /// Zero-probability periods are fine. A law whose survival reaches zero
    /// before `N` is also accepted: the hazard of its last supported period
    /// is exactly one and the periods after it are unreachable.
    pub fn new(pmf: Vec<f64>) -> Result<Self> {
        if pmf.len() < 2 {
            return Err(Error::InvalidLaw(format!(
                "need at least two periods (N >= 1), got {}",
                pmf.len()
            )));
        }
        if let Some((k, p)) = pmf
            .iter()
            .enumerate()
            .find(|(_, p)| !p.is_finite() || **p < 0.0)
        {
            return Err(Error::InvalidLaw(format!(
                "pmf[{k}] = {p} is not a probability"
            )));
        }
        let total: f64 = pmf.iter().sum();
        if (total - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidLaw(format!("pmf sums to {total}, not 1")));
        }
        Ok(Self { pmf })
    }

    /// Point mass at maturity: no early expiry.
    pub fn fixed(steps: usize) -> Result<Self> {
        let mut pmf = vec![0.0; steps + 1];
        pmf[steps] = 1.0;
        Self::new(pmf)
    }

    /// Constant hazard `λ·dt` in every period.
    pub fn from_intensity(lambda: f64, dt: f64, steps: usize) -> Result<Self> {
        law_from_hazards(&vec![lambda * dt; steps])
    }

    pub fn steps(&self) -> usize {
        self.pmf.len() - 1
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    /// `S(k) = Q(τ ≥ k)` for `k = 0..=N`, summed from the tail.
    pub fn survival(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.pmf.len()];
        let mut acc = 0.0;
        for (k, p) in self.pmf.iter().enumerate().rev() {
            acc += p;
            out[k] = acc;
        }
        out
    }

    /// `h(k) = Q(τ = k | τ ≥ k)` for `k = 0..N`. Unreachable periods report 0.
    pub fn hazards(&self) -> Vec<f64> {
        let surv = self.survival();
        (0..self.steps())
            .map(|k| {
                if surv[k] > 0.0 {
                    (self.pmf[k] / surv[k]).min(1.0)
                } else {
                    0.0
                }
            })
            .collect()
    }
}

pub fn geometric_law(p: f64, steps: usize) -> Result<ExpiryLaw> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParams(format!(
            "geometric p must lie in (0, 1), got {p}"
        )));
    }
    if steps == 0 {
        return Err(Error::InvalidParams("steps must be >= 1".into()));
    }
    let keep = 1.0 - p;
    let mut pmf: Vec<f64> = (0..steps).map(|k| p * keep.powi(k as i32)).collect();
    pmf.push(keep.powi(steps as i32));
    ExpiryLaw::new(pmf)
}

pub fn law_from_hazards(hazards: &[f64]) -> Result<ExpiryLaw> {
    if hazards.is_empty() {
        return Err(Error::InvalidLaw("need at least one hazard".into()));
    }
    let mut pmf = Vec::with_capacity(hazards.len() + 1);
    let mut alive = 1.0;
    for (k, &h) in hazards.iter().enumerate() {
        if !(0.0..1.0).contains(&h) {
            return Err(Error::InvalidHazard {
                period: k,
                value: h,
            });
        }
        pmf.push(alive * h);
        alive *= 1.0 - h;
    }
    pmf.push(alive);
    ExpiryLaw::new(pmf)
}

/// `E[e^{-y·τ·dt}]`, accumulated as `1 - E[1 - e^{-y·τ·dt}]` so that a zero
/// yield gives exactly one.
pub fn discount_mgf(law: &ExpiryLaw, y: f64, dt: f64) -> f64 {
    let shortfall: f64 = law
        .pmf()
        .iter()
        .enumerate()
        .map(|(k, p)| -p * (-y * k as f64 * dt).exp_m1())
        .sum();
    1.0 - shortfall
}

/// User-supplied law on `[0, T]` given by its left-continuous CDF
/// `x ↦ Q(τ∞ < x)`. Any mass missing at `x = T` is an atom at `T`.
#[derive(Clone)]
pub struct GenericExpiry {
    cdf: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    horizon: f64,
}

impl GenericExpiry {
    pub fn new(horizon: f64, cdf: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            cdf: Arc::new(cdf),
            horizon,
        }
    }
}

impl fmt::Debug for GenericExpiry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GenericExpiry")
            .field("horizon", &self.horizon)
            .finish_non_exhaustive()
    }
}

/// Continuous-time expiry `τ∞` supported on `[0, T]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum ContinuousExpiry {
    /// Density `λe^{-λx}` on `(0, T)` plus an atom `e^{-λT}` at `T`.
    #[serde(rename = "exp_atom")]
    ExponentialWithAtom {
        lambda: f64,
        #[serde(rename = "T")]
        horizon: f64,
    },
    #[serde(rename = "point_mass")]
    PointMass {
        t: f64,
        #[serde(rename = "T")]
        horizon: f64,
    },
    #[serde(skip)]
    Generic(GenericExpiry),
}

/// How a continuous expiry is mapped onto tree periods.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiscretizeMode {
    /// `τ_n = ⌊n τ∞⌋`
    Floor,
    /// `τ_n = ⌊n τ∞⌋ + 1`; only for laws without an atom at `T`.
    FloorPlusOne,
}

impl ContinuousExpiry {
    pub fn horizon(&self) -> f64 {
        match self {
            Self::ExponentialWithAtom { horizon, .. } | Self::PointMass { horizon, .. } => *horizon,
            Self::Generic(g) => g.horizon,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let t_max = self.horizon();
        if !(t_max.is_finite() && t_max > 0.0) {
            return Err(Error::InvalidParams(format!(
                "horizon must be > 0, got {t_max}"
            )));
        }
        match self {
            Self::ExponentialWithAtom { lambda, .. } if !(lambda.is_finite() && *lambda > 0.0) => {
                Err(Error::InvalidParams(format!(
                    "lambda must be > 0, got {lambda}"
                )))
            }
            Self::PointMass { t, .. } if !(*t >= 0.0 && *t <= t_max) => Err(Error::InvalidParams(
                format!("point mass {t} outside [0, {t_max}]"),
            )),
            _ => Ok(()),
        }
    }

    /// `Q(τ∞ < x)` for `x ∈ [0, T]`.
    pub fn prob_before(&self, x: f64) -> f64 {
        match self {
            Self::ExponentialWithAtom { lambda, .. } => -(-lambda * x).exp_m1(),
            Self::PointMass { t, .. } => {
                if *t < x {
                    1.0
                } else {
                    0.0
                }
            }
            Self::Generic(g) => (g.cdf)(x),
        }
    }

    /// `Q(τ∞ = T)`.
    pub fn atom_at_horizon(&self) -> f64 {
        match self {
            Self::ExponentialWithAtom { lambda, horizon } => (-lambda * horizon).exp(),
            _ => 1.0 - self.prob_before(self.horizon()),
        }
    }
}

/// Exact law of `⌊n τ∞⌋` (or `⌊n τ∞⌋ + 1`) on `{0, …, nT}`.
pub fn discretize(cont: &ContinuousExpiry, n: usize, mode: DiscretizeMode) -> Result<ExpiryLaw> {
    cont.validate()?;
    if n == 0 {
        return Err(Error::InvalidParams(
            "need n >= 1 periods per unit time".into(),
        ));
    }
    let horizon = cont.horizon();
    let scaled = n as f64 * horizon;
    let steps = scaled.round();
    if steps < 1.0 || (scaled - steps).abs() > 1e-9 {
        return Err(Error::InvalidParams(format!(
            "n * T = {scaled} must be a positive integer"
        )));
    }
    let steps = steps as usize;
    let nf = n as f64;
    // Q(τ∞ < k/n), with the last grid point pinned to T.
    let before = |k: usize| {
        if k == steps {
            cont.prob_before(horizon)
        } else {
            cont.prob_before(k as f64 / nf)
        }
    };

    let mut pmf = vec![0.0; steps + 1];
    match mode {
        DiscretizeMode::Floor => {
            for (k, p) in pmf.iter_mut().take(steps).enumerate() {
                *p = before(k + 1) - before(k);
            }
            pmf[steps] = cont.atom_at_horizon();
        }
        DiscretizeMode::FloorPlusOne => {
            let atom = cont.atom_at_horizon();
            if atom > 1e-15 {
                return Err(Error::InvalidMode(format!(
                    "FloorPlusOne needs no atom at T, found mass {atom}"
                )));
            }
            for (k, p) in pmf.iter_mut().enumerate().skip(1) {
                *p = before(k) - before(k - 1);
            }
        }
    }
    for (k, p) in pmf.iter_mut().enumerate() {
        if *p < 0.0 {
            if *p < -1e-14 {
                return Err(Error::InvalidLaw(format!(
                    "cdf decreases on period {k} (mass {p})"
                )));
            }
            *p = 0.0;
        }
    }
    ExpiryLaw::new(pmf)
}
