//! The zero-strike call pays the stock itself, so its price is
//! `S0·E[e^{-y·τ·dt}]` and equals the spot when there are no dividends.

use reopt::expiry::discount_mgf;
use reopt::model::make_factors;
use reopt::pricer::{price_recombining, price_zsc_closed_form};
use reopt::{ExpiryLaw, FactorStyle, MarketParams, Payoff};

fn main() -> reopt::Result<()> {
    let law = ExpiryLaw::new(vec![0.1, 0.2, 0.0, 0.3, 0.15, 0.25])?;
    for div_yield in [0.0, 0.05, 0.12] {
        let params = MarketParams {
            div_yield,
            steps: 5,
            ..MarketParams::default()
        };
        let factors = make_factors(&params, FactorStyle::Exponential)?;
        let tree = price_recombining(&params, &factors, &law, &Payoff::ZeroStrikeCall)?.value;
        let closed = price_zsc_closed_form(&params, &law)?;
        println!(
            "y = {div_yield:.2}: tree {tree:.12}  closed form {closed:.12}  E[e^(-y tau dt)] = {:.12}",
            discount_mgf(&law, div_yield, params.dt())
        );
    }
    Ok(())
}
