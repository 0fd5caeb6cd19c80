use thiserror::Error;

/// Everything that can go wrong while building a lattice or pricing on it.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid hazard {value} at period {period}: must lie in [0, 1)")]
    InvalidHazard { period: usize, value: f64 },

    #[error("invalid expiry law: {0}")]
    InvalidLaw(String),

    #[error("invalid discretization mode: {0}")]
    InvalidMode(String),

    #[error("payoff undefined at non-positive price {0}")]
    InvalidPrice(f64),

    #[error("payoff `{name}` returned a non-finite value at S = {price}")]
    NonFinitePayoff { name: String, price: f64 },

    #[error("{algo} guard exceeded: N = {steps} > {max}")]
    TooLarge {
        algo: &'static str,
        steps: usize,
        max: usize,
    },

    #[error("payoff `{0}` is unbounded; Monte-Carlo limit pricing needs a bounded payoff or an explicit override")]
    Unbounded(String),
}

pub type Result<T> = std::result::Result<T, Error>;
