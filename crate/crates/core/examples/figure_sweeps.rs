//! Price curves against N, spot and expiry intensity at the reference
//! market, as CSV on stdout. Same data as `reopt sweep`.

use reopt::cli::{sig12, sweep_grid, sweep_rows, SweepParam};
use reopt::{FactorStyle, MarketParams};

fn main() {
    let base = MarketParams::default();
    let sweeps = [
        (SweepParam::Steps, 1.0, 200.0, None),
        (SweepParam::Spot, 50.0, 150.0, Some(101)),
        (SweepParam::Lambda, 0.0, 2.0, Some(41)),
    ];
    println!("param,param_value,payoff,price");
    for (param, from, to, points) in sweeps {
        let grid = sweep_grid(param, from, to, points).expect("valid grid");
        let rows =
            sweep_rows(param, &grid, &base, FactorStyle::Exponential, 0.10, 100.0).expect("prices");
        for r in rows {
            println!(
                "{param:?},{},{},{}",
                sig12(r.param_value),
                r.payoff,
                sig12(r.price)
            );
        }
    }
}
