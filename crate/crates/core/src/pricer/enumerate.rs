use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::expiry::ExpiryLaw;
use crate::model::{MarketParams, Move, MoveFactors, PeriodProbabilities};
use crate::payoff::Payoff;

use super::{setup, Algorithm, PriceResult, Timer};

/// One full trinomial path, i.e. one state of the world.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathRecord {
    pub moves: Vec<Move>,
    pub probability: f64,
    /// First middle move, or `N` if there is none.
    pub expiry_period: usize,
    /// `e^{-r·τ·dt}·f(S_τ)`
    pub discounted_payoff: f64,
}

struct Walk<'a> {
    schedule: &'a [PeriodProbabilities],
    factors: &'a MoveFactors,
    payoff: &'a Payoff,
    steps: usize,
    moves: Vec<Move>,
    records: Vec<PathRecord>,
}

impl Walk<'_> {
    fn visit(&mut self, k: usize, s: f64, prob: f64, expired: Option<(usize, f64)>) -> Result<()> {
        if k == self.steps {
            let (expiry_period, discounted_payoff) = match expired {
                Some(e) => e,
                None => (
                    k,
                    self.factors.disc.powi(k as i32) * self.payoff.evaluate(s)?,
                ),
            };
            self.records.push(PathRecord {
                moves: self.moves.clone(),
                probability: prob,
                expiry_period,
                discounted_payoff,
            });
            return Ok(());
        }
        let q = self.schedule[k];
        for mv in [Move::Down, Move::Mid, Move::Up] {
            let factor = match mv {
                Move::Down => self.factors.down,
                Move::Mid => self.factors.mid,
                Move::Up => self.factors.up,
            };
            let expired = match (expired, mv) {
                (None, Move::Mid) => Some((
                    k,
                    self.factors.disc.powi(k as i32) * self.payoff.evaluate(s)?,
                )),
                (e, _) => e,
            };
            self.moves.push(mv);
            self.visit(k + 1, s * factor, prob * q.of(mv), expired)?;
            self.moves.pop();
        }
        Ok(())
    }
}

/// Brute force over all `3^N` paths. The returned price is the compensated
/// sum of `probability·discounted_payoff` in path order (down < mid < up,
/// earliest move most significant).
pub fn price_path_enumeration(
    params: &MarketParams,
    factors: &MoveFactors,
    law: &ExpiryLaw,
    payoff: &Payoff,
) -> Result<(PriceResult, Vec<PathRecord>)> {
    let schedule = setup(Algorithm::PathEnumeration, params, factors, law, payoff)?;
    let timer = Timer::start();
    let mut walk = Walk {
        schedule: &schedule,
        factors,
        payoff,
        steps: params.steps,
        moves: Vec::with_capacity(params.steps),
        records: Vec::with_capacity(3usize.pow(params.steps as u32)),
    };
    walk.visit(0, params.spot, 1.0, None)?;
    let records = walk.records;
    let value = neumaier_sum(records.iter().map(|r| r.probability * r.discounted_payoff));
    let result = timer.finish(Algorithm::PathEnumeration, value, records.len() as u64);
    Ok((result, records))
}

/// Neumaier-compensated summation; thousands of small terms otherwise drift
/// by tens of ulps.
pub(crate) fn neumaier_sum(terms: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for x in terms {
        let t = sum + x;
        comp += if sum.abs() >= x.abs() {
            (sum - t) + x
        } else {
            (x - t) + sum
        };
        sum = t;
    }
    sum + comp
}
