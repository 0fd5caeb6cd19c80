use crate::error::Result;
use crate::model::{general_probs, GeneralSchedule, HazardFn, MarketParams, MoveFactors};
use crate::payoff::Payoff;

use super::{guard, Algorithm, PriceResult, Timer};

struct Recursion<'a> {
    schedule: &'a GeneralSchedule,
    factors: &'a MoveFactors,
    payoff: &'a Payoff,
    work: u64,
}

impl Recursion<'_> {
    fn value(&mut self, s: f64, k: usize, node: usize) -> Result<f64> {
        self.work += 1;
        if k == self.schedule.steps() {
            return self.payoff.evaluate(s);
        }
        let q = *self.schedule.at(k, node);
        let b = self.factors.disc;
        let down = self.value(s * self.factors.down, k + 1, node << 1)?;
        let now = self.payoff.evaluate(s)?;
        self.work += 1;
        let up = self.value(s * self.factors.up, k + 1, (node << 1) | 1)?;
        Ok(b * q.q_down() * down + q.q_mid() * now + b * q.q_up() * up)
    }
}

/// Modified backward induction on the non-recombining up/down tree where
/// every node carries its own expiry hazard, e.g. one that depends on the
/// price history. Such hazards make expiry depend on the stock.
pub fn price_general_tree(
    params: &MarketParams,
    factors: &MoveFactors,
    hazard_fn: &HazardFn<'_>,
    payoff: &Payoff,
) -> Result<PriceResult> {
    params.validate()?;
    guard(Algorithm::GeneralTree, params.steps)?;
    payoff.validate()?;
    let schedule = general_probs(factors, params.steps, hazard_fn)?;
    let timer = Timer::start();
    let mut rec = Recursion {
        schedule: &schedule,
        factors,
        payoff,
        work: 0,
    };
    let value = rec.value(params.spot, 0, 0)?;
    Ok(timer.finish(Algorithm::GeneralTree, value, rec.work))
}
