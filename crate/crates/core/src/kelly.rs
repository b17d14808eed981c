//! Log utility and optimal Kelly fractions for all-or-nothing contracts.
//!
//! A long position of fraction `f` bought at price `p` returns `f (1 - p) / p`
//! on a win and loses `f` otherwise. A short view is expressed by buying the
//! complement contract at price `1 - p`, reported as a negative fraction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::probability::{BetFraction, Probability};

/// Payout modification: the winning multiplier becomes `((1 - p) / p)^alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PayoutSpec {
    alpha: f64,
}

impl PayoutSpec {
    /// The ordinary all-or-nothing contract.
    pub const STANDARD: PayoutSpec = PayoutSpec { alpha: 1.0 };

    pub fn new(alpha: f64) -> Result<Self> {
        if alpha.is_finite() && alpha >= 0.0 {
            Ok(PayoutSpec { alpha })
        } else {
            Err(Error::InvalidAlpha(alpha))
        }
    }

    pub fn alpha(self) -> f64 {
        self.alpha
    }

    /// Net winnings per dollar staked at price `p`.
    pub fn multiplier(self, p: Probability) -> Result<f64> {
        let p = p.require_interior()?.value();
        Ok(((1.0 - p) / p).powf(self.alpha))
    }
}

impl Default for PayoutSpec {
    fn default() -> Self {
        PayoutSpec::STANDARD
    }
}

// `weight * ln(arg)`, with a zero weight annihilating the term even when the
// argument is zero (the usual 0 log 0 = 0 convention).
fn weighted_ln(weight: f64, arg: f64, f: f64) -> Result<f64> {
    if weight == 0.0 {
        Ok(0.0)
    } else if arg > 0.0 {
        Ok(weight * arg.ln())
    } else {
        Err(Error::InvalidFraction(f))
    }
}

fn long_utility(q: f64, multiplier: f64, f: f64) -> Result<f64> {
    let lose = weighted_ln(1.0 - q, 1.0 - f, f)?;
    let win = weighted_ln(q, 1.0 + f * multiplier, f)?;
    Ok(lose + win)
}

/// Expected log growth `U(q, p, f)` of staking fraction `f` at price `p` with
/// belief `q`. Negative `f` is evaluated as a long position of `-f` in the
/// complement contract.
pub fn log_utility(q: Probability, p: Probability, f: BetFraction) -> Result<f64> {
    let p = p.require_interior()?.value();
    let (q, p, f) = if f.value() >= 0.0 {
        (q.value(), p, f.value())
    } else {
        (1.0 - q.value(), 1.0 - p, -f.value())
    };
    long_utility(q, (1.0 - p) / p, f)
}

/// Long-side utility under a modified payout. Only `f` in `[0, 1]` is
/// meaningful here.
pub fn log_utility_alpha(q: Probability, p: Probability, f: BetFraction, spec: PayoutSpec) -> Result<f64> {
    if f.value() < 0.0 {
        return Err(Error::InvalidFraction(f.value()));
    }
    long_utility(q.value(), spec.multiplier(p)?, f.value())
}

/// Kelly fraction for belief `q` against price `p`, signed by side.
///
/// For `q >= p` this is `q - p (1 - q) / (1 - p)`; for `q < p` it is minus the
/// same expression written for the complement contract.
pub fn optimal_fraction(q: Probability, p: Probability) -> Result<BetFraction> {
    let p = p.require_interior()?.value();
    let q = q.value();
    let f = if q == p {
        0.0
    } else if q > p {
        q - p * (1.0 - q) / (1.0 - p)
    } else {
        -((1.0 - q) - (1.0 - p) * q / p)
    };
    Ok(BetFraction::clamped(f))
}

/// Kelly fraction in odds form, `(Q - P) / (1 + Q)`. Long side only; needs an
/// interior belief.
pub fn optimal_fraction_odds(q: Probability, p: Probability) -> Result<f64> {
    let big_q = q.odds()?.value();
    let big_p = p.odds()?.value();
    Ok((big_q - big_p) / (1.0 + big_q))
}

/// Long-side Kelly fraction for the modified payout:
/// `max(0, q - (1 - q) (p / (1 - p))^alpha)`.
pub fn optimal_fraction_alpha(q: Probability, p: Probability, spec: PayoutSpec) -> Result<BetFraction> {
    let inv = 1.0 / spec.multiplier(p)?;
    let q = q.value();
    Ok(BetFraction::clamped((q - (1.0 - q) * inv).max(0.0)))
}

/// Growth rate of the even-odds (double-or-nothing) game,
/// `p ln(1 + f) + (1 - p) ln(1 - f)`.
pub fn even_odds_growth_rate(p: Probability, f: BetFraction) -> Result<f64> {
    let f = f.value();
    if f.abs() >= 1.0 {
        return Err(Error::InvalidFraction(f));
    }
    let p = p.value();
    Ok(p * f.ln_1p() + (1.0 - p) * (-f).ln_1p())
}

/// `2p - 1`, the growth-optimal even-odds stake.
pub fn kelly_fraction_even_odds(p: Probability) -> BetFraction {
    BetFraction::clamped(2.0 * p.value() - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn pr(x: f64) -> Probability {
        Probability::new(x).unwrap()
    }
    fn fr(x: f64) -> BetFraction {
        BetFraction::new(x).unwrap()
    }

    #[test]
    fn utility_examples() {
        assert_eq!(log_utility(pr(0.5), pr(0.5), fr(0.0)).unwrap(), 0.0);
        let expected = 0.7 * (1.0 + 0.25 * (2.0 / 3.0f64)).ln() + 0.3 * 0.75f64.ln();
        assert_abs_diff_eq!(log_utility(pr(0.7), pr(0.6), fr(0.25)).unwrap(), expected, epsilon = 1e-15);
        for f in [-0.9, -0.3, 0.0, 0.4, 0.8] {
            let u = log_utility(pr(0.5), pr(0.5), fr(f)).unwrap();
            assert_abs_diff_eq!(u, 0.5 * (1.0 - f * f).ln(), epsilon = 1e-14);
        }
    }

    #[test]
    fn utility_rejects_bad_inputs() {
        assert_eq!(log_utility(pr(0.5), pr(0.0), fr(0.1)), Err(Error::BoundaryPrice(0.0)));
        assert_eq!(log_utility(pr(0.5), pr(1.0), fr(0.1)), Err(Error::BoundaryPrice(1.0)));
        assert!(log_utility(pr(0.5), pr(0.5), fr(1.0)).is_err());
        assert!(log_utility(pr(0.5), pr(0.5), fr(-1.0)).is_err());
        // a certain investor staking everything has a finite utility
        assert_abs_diff_eq!(log_utility(pr(1.0), pr(0.6), fr(1.0)).unwrap(), (1.0f64 / 0.6).ln(), epsilon = 1e-15);
    }

    #[test]
    fn fraction_examples() {
        assert_eq!(optimal_fraction(pr(0.3), pr(0.3)).unwrap().value(), 0.0);
        assert_eq!(optimal_fraction(pr(1.0), pr(0.6)).unwrap().value(), 1.0);
        assert_eq!(optimal_fraction(pr(0.0), pr(0.6)).unwrap().value(), -1.0);
        assert_abs_diff_eq!(optimal_fraction(pr(0.7), pr(0.6)).unwrap().value(), 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(optimal_fraction(pr(0.2), pr(0.5)).unwrap().value(), -0.6, epsilon = 1e-15);
        assert!(optimal_fraction(pr(0.2), pr(1.0)).is_err());
    }

    #[test]
    fn alpha_examples() {
        let half = PayoutSpec::new(0.5).unwrap();
        assert_abs_diff_eq!(
            optimal_fraction_alpha(pr(0.9), pr(0.8), half).unwrap().value(),
            0.7,
            epsilon = 1e-15
        );
        for a in [0.0, 0.3, 1.0, 2.5] {
            let spec = PayoutSpec::new(a).unwrap();
            assert_eq!(optimal_fraction_alpha(pr(0.5), pr(0.5), spec).unwrap().value(), 0.0);
        }
        assert_abs_diff_eq!(
            optimal_fraction_alpha(pr(0.7), pr(0.6), PayoutSpec::STANDARD).unwrap().value(),
            0.25,
            epsilon = 1e-15
        );
        // short view: clamped at zero on the long-only modified contract
        assert_eq!(optimal_fraction_alpha(pr(0.2), pr(0.6), PayoutSpec::STANDARD).unwrap().value(), 0.0);
        assert!(PayoutSpec::new(-0.1).is_err());
        assert!(PayoutSpec::new(f64::INFINITY).is_err());
    }

    #[test]
    fn even_odds_examples() {
        assert_eq!(even_odds_growth_rate(pr(0.5), fr(0.0)).unwrap(), 0.0);
        assert_abs_diff_eq!(
            even_odds_growth_rate(pr(0.6), fr(0.2)).unwrap(),
            0.6 * 1.2f64.ln() + 0.4 * 0.8f64.ln(),
            epsilon = 1e-16
        );
        assert_abs_diff_eq!(even_odds_growth_rate(pr(0.6), fr(0.2)).unwrap(), 0.020136, epsilon = 5e-7);
        assert!(even_odds_growth_rate(pr(0.6), fr(1.0)).is_err());
        assert!(even_odds_growth_rate(pr(0.6), fr(-1.0)).is_err());
        assert_eq!(kelly_fraction_even_odds(pr(0.5)).value(), 0.0);
        assert_eq!(kelly_fraction_even_odds(pr(0.75)).value(), 0.5);
        assert!(kelly_fraction_even_odds(pr(0.2)).value() < 0.0);
    }

    #[test]
    fn odds_form_matches_direct_form() {
        for i in 1..100 {
            for j in 1..100 {
                let (q, p) = (pr(i as f64 / 100.0), pr(j as f64 / 100.0));
                let direct = q.value() - p.value() * (1.0 - q.value()) / (1.0 - p.value());
                assert!((direct - optimal_fraction_odds(q, p).unwrap()).abs() < 1e-12);
            }
        }
    }
}
