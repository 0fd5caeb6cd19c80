//! Random-expiry option pricers.
//!
//! Three lattice algorithms price the same claim:
//!
//! * [`price_trinomial`]: the full trinomial tree. Every terminal node below
//!   a first middle move is pre-loaded with the early payoff carried forward
//!   at the risk-free rate, then ordinary backward induction runs.
//! * [`price_recursive_binomial`]: a non-recombining up/down tree where the
//!   middle branch is virtual and pays `f(S)` immediately.
//! * [`price_recombining`]: the same modified induction on a recombining
//!   tree, `O(N²)` values.
//!
//! [`price_conditioning_sum`] and [`price_path_enumeration`] are independent
//! routes used to cross-check them.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expiry::ExpiryLaw;
use crate::model::{homogeneous_schedule, MarketParams, MoveFactors, PeriodProbabilities};
use crate::payoff::Payoff;

mod binomial;
mod enumerate;
mod general;
mod trinomial;

pub use binomial::{
    fixed_expiry_price, price_conditioning_sum, price_range, price_recombining,
    price_recursive_binomial, price_zsc_closed_form, PriceRange,
};
pub use enumerate::{price_path_enumeration, PathRecord};
pub use general::price_general_tree;
pub use trinomial::{price_trinomial, TrinomialTree};

pub const TRINOMIAL_MAX_STEPS: usize = 16;
pub const RECURSIVE_MAX_STEPS: usize = 25;
pub const GENERAL_MAX_STEPS: usize = 20;
pub const ENUMERATION_MAX_STEPS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    #[serde(rename = "tri")]
    Trinomial,
    #[serde(rename = "recursive")]
    RecursiveBinomial,
    #[serde(rename = "reco")]
    Recombining,
    #[serde(rename = "sum")]
    ConditioningSum,
    #[serde(rename = "enum")]
    PathEnumeration,
    #[serde(rename = "general")]
    GeneralTree,
}

impl Algorithm {
    /// The pricers that take a homogeneous expiry law and work for any `N`
    /// within their guard.
    pub const HOMOGENEOUS: [Algorithm; 4] = [
        Algorithm::Trinomial,
        Algorithm::RecursiveBinomial,
        Algorithm::Recombining,
        Algorithm::ConditioningSum,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Algorithm::Trinomial => "tri",
            Algorithm::RecursiveBinomial => "recursive",
            Algorithm::Recombining => "reco",
            Algorithm::ConditioningSum => "sum",
            Algorithm::PathEnumeration => "enum",
            Algorithm::GeneralTree => "general",
        }
    }

    pub fn max_steps(self) -> Option<usize> {
        match self {
            Algorithm::Trinomial => Some(TRINOMIAL_MAX_STEPS),
            Algorithm::RecursiveBinomial => Some(RECURSIVE_MAX_STEPS),
            Algorithm::PathEnumeration => Some(ENUMERATION_MAX_STEPS),
            Algorithm::GeneralTree => Some(GENERAL_MAX_STEPS),
            Algorithm::Recombining | Algorithm::ConditioningSum => None,
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.pad(self.tag())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriceResult {
    pub value: f64,
    pub algo: Algorithm,
    /// Values written (lattice pricers) or units of recursive work.
    pub nodes_touched: u64,
    pub wall_time_ns: u64,
}

/// Dispatch to a homogeneous pricer by tag. Path enumeration is included;
/// its record list is dropped.
pub fn price(
    algo: Algorithm,
    params: &MarketParams,
    factors: &MoveFactors,
    law: &ExpiryLaw,
    payoff: &Payoff,
) -> Result<PriceResult> {
    match algo {
        Algorithm::Trinomial => price_trinomial(params, factors, law, payoff),
        Algorithm::RecursiveBinomial => price_recursive_binomial(params, factors, law, payoff),
        Algorithm::Recombining => price_recombining(params, factors, law, payoff),
        Algorithm::ConditioningSum => price_conditioning_sum(params, factors, law, payoff),
        Algorithm::PathEnumeration => {
            price_path_enumeration(params, factors, law, payoff).map(|(r, _)| r)
        }
        Algorithm::GeneralTree => {
            // A homogeneous law is a general tree whose hazards ignore the path.
            let hazards = law.hazards();
            if hazards.iter().any(|&h| h >= 1.0) {
                return Err(Error::InvalidLaw(
                    "general tree needs hazards strictly below one".into(),
                ));
            }
            check_law(params, law)?;
            price_general_tree(params, factors, &|k, _| hazards[k], payoff)
        }
    }
}

pub(crate) fn check_law(params: &MarketParams, law: &ExpiryLaw) -> Result<()> {
    params.validate()?;
    if law.steps() != params.steps {
        return Err(Error::InvalidLaw(format!(
            "law has {} periods but the tree has N = {}",
            law.steps(),
            params.steps
        )));
    }
    Ok(())
}

pub(crate) fn guard(algo: Algorithm, steps: usize) -> Result<()> {
    match algo.max_steps() {
        Some(max) if steps > max => Err(Error::TooLarge {
            algo: algo.tag(),
            steps,
            max,
        }),
        _ => Ok(()),
    }
}

/// Validated inputs shared by the homogeneous pricers.
pub(crate) fn setup(
    algo: Algorithm,
    params: &MarketParams,
    factors: &MoveFactors,
    law: &ExpiryLaw,
    payoff: &Payoff,
) -> Result<Vec<PeriodProbabilities>> {
    guard(algo, params.steps)?;
    check_law(params, law)?;
    payoff.validate()?;
    homogeneous_schedule(factors, &law.hazards())
}

pub(crate) struct Timer(Instant);

impl Timer {
    pub(crate) fn start() -> Self {
        Timer(Instant::now())
    }

    pub(crate) fn finish(self, algo: Algorithm, value: f64, nodes_touched: u64) -> PriceResult {
        PriceResult {
            value,
            algo,
            nodes_touched,
            wall_time_ns: (self.0.elapsed().as_nanos() as u64).max(1),
        }
    }
}

#[cfg(test)]
mod tests;
