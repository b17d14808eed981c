//! Validated scalar newtypes shared by every module.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A real in `[0, 1]`, used both for market prices and for beliefs.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Probability(f64);

impl Probability {
    pub const ZERO: Probability = Probability(0.0);
    pub const HALF: Probability = Probability(0.5);
    pub const ONE: Probability = Probability(1.0);

    pub fn new(value: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&value) {
            Ok(Probability(value))
        } else {
            Err(Error::InvalidProbability(value))
        }
    }

    /// Like [`Probability::new`] but also rejects the endpoints; used for prices.
    pub fn interior(value: f64) -> Result<Self> {
        Probability::new(value)?.require_interior()
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// `1 - self`.
    #[inline]
    pub fn complement(self) -> Probability {
        Probability(1.0 - self.0)
    }

    pub fn is_interior(self) -> bool {
        self.0 > 0.0 && self.0 < 1.0
    }

    pub fn require_interior(self) -> Result<Self> {
        if self.is_interior() {
            Ok(self)
        } else {
            Err(Error::BoundaryPrice(self.0))
        }
    }

    /// Odds ratio `x / (1 - x)`; only defined for interior values.
    pub fn odds(self) -> Result<OddsRatio> {
        let p = self.require_interior()?.0;
        Ok(OddsRatio(p / (1.0 - p)))
    }
}

impl TryFrom<f64> for Probability {
    type Error = Error;
    fn try_from(value: f64) -> Result<Self> {
        Probability::new(value)
    }
}

impl From<Probability> for f64 {
    fn from(p: Probability) -> f64 {
        p.0
    }
}

/// `x / (1 - x)` for an interior probability `x`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct OddsRatio(f64);

impl OddsRatio {
    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// Inverse map back to a probability, `o / (1 + o)`.
    pub fn probability(self) -> Probability {
        Probability(self.0 / (1.0 + self.0))
    }
}

/// Signed fraction of capital committed to a contract. Positive values are
/// long the event, negative values are long its complement.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct BetFraction(f64);

impl BetFraction {
    pub const ZERO: BetFraction = BetFraction(0.0);

    pub fn new(value: f64) -> Result<Self> {
        if (-1.0..=1.0).contains(&value) {
            Ok(BetFraction(value))
        } else {
            Err(Error::InvalidFraction(value))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    // Callers guarantee |value| <= 1 analytically; rounding may push it a hair
    // past the edge.
    pub(crate) fn clamped(value: f64) -> Self {
        BetFraction(value.clamp(-1.0, 1.0))
    }
}

impl TryFrom<f64> for BetFraction {
    type Error = Error;
    fn try_from(value: f64) -> Result<Self> {
        BetFraction::new(value)
    }
}

impl From<BetFraction> for f64 {
    fn from(f: BetFraction) -> f64 {
        f.0
    }
}
