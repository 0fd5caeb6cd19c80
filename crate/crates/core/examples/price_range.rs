//! No-arbitrage bounds: whatever the expiry law, the price lies between the
//! smallest and largest fixed-expiry price over horizons 0..=N.

use reopt::model::make_factors;
use reopt::pricer::{price_range, price_recombining};
use reopt::{ExpiryLaw, FactorStyle, MarketParams, Payoff};

fn main() -> reopt::Result<()> {
    let params = MarketParams::default().with_steps(8);
    let factors = make_factors(&params, FactorStyle::Exponential)?;
    let laws = [
        ("fixed at N", ExpiryLaw::fixed(8)?),
        (
            "intensity 0.1",
            ExpiryLaw::from_intensity(0.1, params.dt(), 8)?,
        ),
        (
            "intensity 2",
            ExpiryLaw::from_intensity(2.0, params.dt(), 8)?,
        ),
        ("uniform", ExpiryLaw::new(vec![1.0 / 9.0; 9])?),
    ];
    for payoff in Payoff::standard_set(100.0) {
        let range = price_range(&params, &factors, &payoff)?;
        println!(
            "{:<12} [{:.6}, {:.6}]{}",
            payoff.name(),
            range.low,
            range.high,
            if range.degenerate { " degenerate" } else { "" }
        );
        for (name, law) in &laws {
            let v = price_recombining(&params, &factors, law, &payoff)?.value;
            println!("    {name:<14} {v:.6}");
        }
    }
    Ok(())
}
