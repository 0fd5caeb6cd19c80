//! Terminal payoffs `f(S)` paid at the expiry date.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A user payoff. `bounded` declares whether `f` is bounded on `(0, ∞)`,
/// which the continuous-time Monte-Carlo pricer checks.
#[derive(Clone)]
pub struct CustomPayoff {
    name: String,
    bounded: bool,
    func: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl CustomPayoff {
    pub fn new(
        name: impl Into<String>,
        bounded: bool,
        func: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            bounded,
            func: Arc::new(func),
        }
    }
}

impl fmt::Debug for CustomPayoff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomPayoff")
            .field("name", &self.name)
            .field("bounded", &self.bounded)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Payoff {
    Call {
        strike: f64,
    },
    Put {
        strike: f64,
    },
    /// Delivers one share: `f(S) = S`.
    #[serde(rename = "zsc")]
    ZeroStrikeCall,
    /// `f(S) = ln(S / reference)`
    #[serde(rename = "logcontract")]
    LogContract {
        reference: f64,
    },
    #[serde(skip)]
    Custom(CustomPayoff),
}

impl Payoff {
    pub fn call(strike: f64) -> Result<Self> {
        check_level("strike", strike)?;
        Ok(Self::Call { strike })
    }

    pub fn put(strike: f64) -> Result<Self> {
        check_level("strike", strike)?;
        Ok(Self::Put { strike })
    }

    pub fn log_contract(reference: f64) -> Result<Self> {
        check_level("reference", reference)?;
        Ok(Self::LogContract { reference })
    }

    pub fn custom(
        name: impl Into<String>,
        bounded: bool,
        func: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self::Custom(CustomPayoff::new(name, bounded, func))
    }

    /// The four test payoffs with strike/reference `level`, in the order
    /// call, put, zsc, logcontract.
    pub fn standard_set(level: f64) -> Vec<Payoff> {
        vec![
            Self::Call { strike: level },
            Self::Put { strike: level },
            Self::ZeroStrikeCall,
            Self::LogContract { reference: level },
        ]
    }

    pub fn name(&self) -> &str {
        match self {
            Self::Call { .. } => "call",
            Self::Put { .. } => "put",
            Self::ZeroStrikeCall => "zsc",
            Self::LogContract { .. } => "logcontract",
            Self::Custom(c) => &c.name,
        }
    }

    pub fn is_bounded(&self) -> bool {
        match self {
            Self::Put { .. } => true,
            Self::Custom(c) => c.bounded,
            _ => false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Call { strike } | Self::Put { strike } => check_level("strike", *strike),
            Self::LogContract { reference } => check_level("reference", *reference),
            _ => Ok(()),
        }
    }

    pub fn evaluate(&self, s: f64) -> Result<f64> {
        if s.is_nan() || s <= 0.0 {
            return Err(Error::InvalidPrice(s));
        }
        let v = match self {
            Self::Call { strike } => (s - strike).max(0.0),
            Self::Put { strike } => (strike - s).max(0.0),
            Self::ZeroStrikeCall => s,
            Self::LogContract { reference } => (s / reference).ln(),
            Self::Custom(c) => (c.func)(s),
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinitePayoff {
                name: self.name().to_string(),
                price: s,
            })
        }
    }
}

fn check_level(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!("{name} must be > 0, got {v}")))
    }
}
