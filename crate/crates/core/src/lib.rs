//! Kelly betting on all-or-nothing prediction-market contracts.
//!
//! * [`kelly`]: log utility and optimal fractions, including a modified payout.
//! * [`clearing`]: capital-weighted market clearing and the price/mean-belief gap.
//! * [`growth`]: binomial tails, KL rate function, Chernoff bounds and growth
//!   thresholds for the double-or-nothing game.
//! * [`simulation`]: seeded Monte Carlo checks of the growth results.
//!
//! With the default `parallel` feature the simulator spreads paths over a rayon
//! pool; without it everything runs on the calling thread with identical output.

pub mod clearing;
pub mod error;
pub mod growth;
pub mod kelly;
mod numeric;
pub mod probability;
pub mod simulation;

pub use clearing::{ClearingResult, Investor, MarketPopulation};
pub use error::{Error, Result};
pub use growth::{GrowthThreshold, WalkSpec};
pub use kelly::PayoutSpec;
pub use probability::{BetFraction, OddsRatio, Probability};
pub use simulation::{SimConfig, SimResult};
