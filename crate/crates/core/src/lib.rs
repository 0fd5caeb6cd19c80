//! Pricing of random-expiry options on trinomial trees.
//!
//! A random-expiry option pays `f(S_τ)` at a random period `τ` no later than
//! maturity. On a trinomial lattice the middle branch, which grows the
//! ex-dividend price at exactly the risk-neutral drift, is read as the expiry
//! event, so any law for `τ` that is independent of the stock gives an
//! arbitrage-free set of branch probabilities.
//!
//! * [`model`]: market inputs, move factors, risk-neutral calibration.
//! * [`expiry`]: expiry laws and their hazards; discretization of
//!   continuous-time expiries.
//! * [`payoff`]: terminal payoffs.
//! * [`pricer`]: the lattice pricers, closed forms and price range.
//! * [`continuum`]: Monte-Carlo for the continuous-time limit.
//! * [`bench`]: runtime and work accounting for the lattice algorithms.
//! * [`cli`]: the `reopt` command line.

pub mod bench;
pub mod cli;
pub mod continuum;
pub mod error;
pub mod expiry;
pub mod model;
pub mod payoff;
pub mod pricer;

pub use error::{Error, Result};
pub use expiry::{ContinuousExpiry, DiscretizeMode, ExpiryLaw};
pub use model::{FactorStyle, MarketParams, Move, MoveFactors, PeriodProbabilities};
pub use payoff::Payoff;
pub use pricer::{Algorithm, PriceResult};
