//! Price the four test payoffs with every homogeneous pricer at N = 12 and
//! the reference market, expiry intensity λ = 0.10.

use reopt::model::make_factors;
use reopt::pricer::price;
use reopt::{Algorithm, ExpiryLaw, FactorStyle, MarketParams, Payoff};

fn main() -> reopt::Result<()> {
    let params = MarketParams::default().with_steps(12);
    let factors = make_factors(&params, FactorStyle::Exponential)?;
    let law = ExpiryLaw::from_intensity(0.10, params.dt(), params.steps)?;

    println!(
        "{:<12} {:>10} {:>18} {:>8}",
        "payoff", "algo", "price", "work"
    );
    for payoff in Payoff::standard_set(100.0) {
        for algo in Algorithm::HOMOGENEOUS {
            let r = price(algo, &params, &factors, &law, &payoff)?;
            println!(
                "{:<12} {:>10} {:>18.12} {:>8}",
                payoff.name(),
                algo,
                r.value,
                r.nodes_touched
            );
        }
    }
    Ok(())
}
