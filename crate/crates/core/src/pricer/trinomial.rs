use crate::error::Result;
use crate::expiry::ExpiryLaw;
use crate::model::{MarketParams, MoveFactors};
use crate::payoff::Payoff;

use super::{setup, Algorithm, PriceResult, Timer};

fn pow3(k: usize) -> usize {
    3usize.pow(k as u32)
}

/// Full trinomial stock lattice in heap order: the children of node `i` are
/// `3i+1` (down), `3i+2` (mid) and `3i+3` (up).
#[derive(Debug, Clone)]
pub struct TrinomialTree {
    steps: usize,
    stock: Vec<f64>,
}

impl TrinomialTree {
    pub fn build(spot: f64, factors: &MoveFactors, steps: usize) -> Self {
        let mut stock = vec![0.0; Self::node_count(steps)];
        stock[0] = spot;
        for i in 0..(pow3(steps) - 1) / 2 {
            let s = stock[i];
            stock[3 * i + 1] = factors.down * s;
            stock[3 * i + 2] = factors.mid * s;
            stock[3 * i + 3] = factors.up * s;
        }
        Self { steps, stock }
    }

    /// `(3^{N+1} - 1) / 2`
    pub fn node_count(steps: usize) -> usize {
        (pow3(steps + 1) - 1) / 2
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Index range of the nodes at `level`.
    pub fn level_range(level: usize) -> std::ops::Range<usize> {
        (pow3(level) - 1) / 2..(pow3(level + 1) - 1) / 2
    }

    pub fn children(i: usize) -> [usize; 3] {
        [3 * i + 1, 3 * i + 2, 3 * i + 3]
    }

    pub fn stock(&self) -> &[f64] {
        &self.stock
    }
}

/// Trinomial tree with carried-interest initialisation of the terminal layer.
pub fn price_trinomial(
    params: &MarketParams,
    factors: &MoveFactors,
    law: &ExpiryLaw,
    payoff: &Payoff,
) -> Result<PriceResult> {
    let schedule = setup(Algorithm::Trinomial, params, factors, law, payoff)?;
    let timer = Timer::start();
    let n = params.steps;
    let tree = TrinomialTree::build(params.spot, factors, n);
    let stock = tree.stock();
    let mut value = vec![f64::NAN; stock.len()];
    let mut writes = 0u64;

    #[allow(clippy::too_many_arguments)]
    // Walk the up/down skeleton; each middle child's terminal descendants
    // receive f(S) at the branching node, compounded to maturity.
    fn init(
        j: usize,
        k: usize,
        n: usize,
        stock: &[f64],
        value: &mut [f64],
        writes: &mut u64,
        payoff: &Payoff,
        factors: &MoveFactors,
    ) -> Result<()> {
        if k == n {
            value[j] = payoff.evaluate(stock[j])?;
            *writes += 1;
            return Ok(());
        }
        let carried = payoff.evaluate(stock[j])? / factors.disc.powi((n - k) as i32);
        let width = pow3(n - k - 1);
        let first = width * (3 * j + 2) + (width - 1) / 2;
        value[first..first + width].fill(carried);
        *writes += width as u64;
        init(3 * j + 1, k + 1, n, stock, value, writes, payoff, factors)?;
        init(3 * j + 3, k + 1, n, stock, value, writes, payoff, factors)
    }
    init(0, 0, n, stock, &mut value, &mut writes, payoff, factors)?;

    let b = factors.disc;
    for k in (0..n).rev() {
        let q = schedule[k];
        let (qd, qm, qu) = (q.q_down(), q.q_mid(), q.q_up());
        for j in TrinomialTree::level_range(k).rev() {
            value[j] = b * (qd * value[3 * j + 1] + qm * value[3 * j + 2] + qu * value[3 * j + 3]);
            writes += 1;
        }
    }
    Ok(timer.finish(Algorithm::Trinomial, value[0], writes))
}
