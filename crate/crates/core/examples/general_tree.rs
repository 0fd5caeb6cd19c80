//! Expiry whose hazard depends on the price path: the contract is twice as
//! likely to terminate right after a down move.

use reopt::model::make_factors;
use reopt::pricer::{price_general_tree, price_recombining};
use reopt::{ExpiryLaw, FactorStyle, MarketParams, Move, Payoff};

fn main() -> reopt::Result<()> {
    let params = MarketParams::default().with_steps(12);
    let factors = make_factors(&params, FactorStyle::Exponential)?;
    let base = 0.10 * params.dt();
    let put = Payoff::put(100.0)?;

    let flat = price_general_tree(&params, &factors, &|_, _| base, &put)?;
    let law = ExpiryLaw::from_intensity(0.10, params.dt(), params.steps)?;
    let reco = price_recombining(&params, &factors, &law, &put)?;
    println!(
        "constant hazard: general {:.12}  recombining {:.12}",
        flat.value, reco.value
    );

    let after_down = |_: usize, path: &[Move]| match path.last() {
        Some(Move::Down) => 2.0 * base,
        _ => base,
    };
    let r = price_general_tree(&params, &factors, &after_down, &put)?;
    println!(
        "hazard doubled after a down move: {:.12} ({} node visits)",
        r.value, r.nodes_touched
    );
    Ok(())
}
