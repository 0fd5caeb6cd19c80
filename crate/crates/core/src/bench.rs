//! Wall-clock comparison of the three lattice algorithms.
//!
//! Timings are noisy and machine dependent; `nodes_touched` is the exact,
//! reproducible measure of work.

use std::hint::black_box;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expiry::ExpiryLaw;
use crate::model::{make_factors, FactorStyle, MarketParams};
use crate::payoff::Payoff;
use crate::pricer::{self, Algorithm};

pub const BENCH_ALGOS: [Algorithm; 3] = [
    Algorithm::Trinomial,
    Algorithm::RecursiveBinomial,
    Algorithm::Recombining,
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub n_steps: usize,
    pub algo: Algorithm,
    pub mean_ns: u64,
    pub reps: usize,
    pub nodes_touched: u64,
}

/// Price `payoff` `reps` times per `(N, algorithm)` with the intensity law
/// `q_m = λ·dt`, after one untimed warm-up run.
pub fn run_bench(
    template: &MarketParams,
    lambda: f64,
    payoff: &Payoff,
    n_list: &[usize],
    reps: usize,
) -> Result<Vec<BenchRow>> {
    if reps == 0 {
        return Err(Error::InvalidParams("reps must be >= 1".into()));
    }
    let mut rows = Vec::with_capacity(n_list.len() * BENCH_ALGOS.len());
    for &n in n_list {
        let params = template.with_steps(n);
        let factors = make_factors(&params, FactorStyle::Exponential)?;
        let law = ExpiryLaw::from_intensity(lambda, params.dt(), n)?;
        for algo in BENCH_ALGOS {
            let warm = pricer::price(algo, &params, &factors, &law, payoff)?;
            let start = Instant::now();
            for _ in 0..reps {
                black_box(pricer::price(
                    algo,
                    black_box(&params),
                    &factors,
                    &law,
                    payoff,
                )?);
            }
            let total = start.elapsed().as_nanos() as u64;
            rows.push(BenchRow {
                n_steps: n,
                algo,
                mean_ns: (total / reps as u64).max(1),
                reps,
                nodes_touched: warm.nodes_touched,
            });
        }
    }
    Ok(rows)
}

/// Algorithms at step count `n`, fastest first.
pub fn ranking_at(rows: &[BenchRow], n: usize) -> Vec<Algorithm> {
    let mut at: Vec<&BenchRow> = rows.iter().filter(|r| r.n_steps == n).collect();
    at.sort_by_key(|r| r.mean_ns);
    at.into_iter().map(|r| r.algo).collect()
}
