//! Capital-weighted market clearing for a population of log-utility investors.
//!
//! Each investor stakes their signed Kelly fraction of capital at the quoted
//! price. The clearing price is where those dollar exposures sum to zero; it is
//! generally different from the capital-weighted mean belief.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kelly::optimal_fraction;
use crate::probability::Probability;

/// Price bracket searched by [`clearing_price`].
pub const PRICE_FLOOR: f64 = 1e-9;
pub const PRICE_CEIL: f64 = 1.0 - 1e-9;
/// Default residual tolerance on aggregate exposure, in dollars.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;
/// Closed forms reject `|q - p|` below this, where capital diverges.
pub const POLE_GUARD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawInvestor")]
pub struct Investor {
    capital: f64,
    belief: Probability,
}

#[derive(Deserialize)]
struct RawInvestor {
    capital: f64,
    belief: f64,
}

impl TryFrom<RawInvestor> for Investor {
    type Error = Error;
    fn try_from(raw: RawInvestor) -> Result<Self> {
        Investor::new(raw.capital, Probability::new(raw.belief)?)
    }
}

impl Investor {
    pub fn new(capital: f64, belief: Probability) -> Result<Self> {
        if capital.is_finite() && capital > 0.0 {
            Ok(Investor { capital, belief })
        } else {
            Err(Error::InvalidCapital(capital))
        }
    }

    pub fn capital(&self) -> f64 {
        self.capital
    }

    pub fn belief(&self) -> Probability {
        self.belief
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarketPopulation {
    investors: Vec<Investor>,
}

impl MarketPopulation {
    pub fn new(investors: Vec<Investor>) -> Result<Self> {
        if investors.is_empty() {
            return Err(Error::EmptyPopulation);
        }
        Ok(MarketPopulation { investors })
    }

    pub fn investors(&self) -> &[Investor] {
        &self.investors
    }

    pub fn total_capital(&self) -> f64 {
        self.investors.iter().map(|i| i.capital).sum()
    }

    /// Copy with every capital multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let investors = self
            .investors
            .iter()
            .map(|i| Investor::new(i.capital * factor, i.belief))
            .collect::<Result<Vec<_>>>()?;
        MarketPopulation::new(investors)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClearingResult {
    pub price: Probability,
    /// Signed dollar exposure per investor, in population order.
    pub exposures: Vec<f64>,
    pub mean_belief: Probability,
    /// `mean_belief - price`.
    pub gap: f64,
    /// Aggregate exposure at `price`.
    pub residual: f64,
}

/// How a short view is counted when exposures are summed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExposureConvention {
    /// Dollars spent: a "no" investor contributes minus the dollars paid for
    /// complement contracts. A certain "no" investor contributes `-capital`.
    #[default]
    StakedDollars,
    /// Dollars spent on "no" are converted to the equivalent short "yes"
    /// position, `-dollars * p / (1 - p)`. Zero aggregate exposure then means
    /// equal numbers of "yes" and "no" contracts. The exposure is
    /// `capital * (q - p) / (1 - p)` for every belief.
    ContractBalanced,
}

/// Dollars committed by one investor at price `p`; negative means long "no".
pub fn signed_exposure(inv: &Investor, p: Probability) -> Result<f64> {
    signed_exposure_with(inv, p, ExposureConvention::StakedDollars)
}

pub fn signed_exposure_with(inv: &Investor, p: Probability, convention: ExposureConvention) -> Result<f64> {
    let f = optimal_fraction(inv.belief, p)?.value();
    Ok(match convention {
        ExposureConvention::StakedDollars => inv.capital * f,
        ExposureConvention::ContractBalanced if f < 0.0 => {
            let p = p.value();
            inv.capital * f * p / (1.0 - p)
        }
        ExposureConvention::ContractBalanced => inv.capital * f,
    })
}

pub fn aggregate_exposure(pop: &MarketPopulation, p: Probability) -> Result<f64> {
    aggregate_exposure_with(pop, p, ExposureConvention::StakedDollars)
}

pub fn aggregate_exposure_with(pop: &MarketPopulation, p: Probability, convention: ExposureConvention) -> Result<f64> {
    p.require_interior()?;
    pop.investors
        .iter()
        .map(|inv| signed_exposure_with(inv, p, convention))
        .sum()
}

/// Capital-weighted mean belief `sum(C q) / sum(C)`.
pub fn mean_belief(pop: &MarketPopulation) -> Probability {
    let total = pop.total_capital();
    let weighted: f64 = pop.investors.iter().map(|i| i.capital * i.belief.value()).sum();
    Probability::new((weighted / total).clamp(0.0, 1.0)).expect("clamped")
}

fn exposure_at(pop: &MarketPopulation, p: f64, convention: ExposureConvention) -> f64 {
    aggregate_exposure_with(pop, Probability::interior(p).expect("bracket is interior"), convention)
        .expect("interior price")
}

/// Solve for the price at which aggregate Kelly exposure vanishes.
///
/// Bisection on `[PRICE_FLOOR, PRICE_CEIL]`: aggregate exposure is
/// non-increasing in price but has kinks where an investor changes side. The
/// search runs until the bracket collapses to adjacent floats, so the result
/// depends only on the signs of the exposures and not on the capital scale;
/// `tol` is then checked against the residual.
pub fn clearing_price(pop: &MarketPopulation, tol: f64) -> Result<ClearingResult> {
    clearing_price_with(pop, tol, ExposureConvention::StakedDollars)
}

pub fn clearing_price_with(pop: &MarketPopulation, tol: f64, convention: ExposureConvention) -> Result<ClearingResult> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    let first = pop.investors[0].belief;
    let unanimous = pop.investors.iter().all(|i| i.belief == first);
    let price = if unanimous && first.is_interior() {
        // zero-volume fixed point
        first.value()
    } else {
        bisect(pop, tol, convention)?
    };
    let price = Probability::interior(price)?;
    let exposures = pop
        .investors
        .iter()
        .map(|inv| signed_exposure_with(inv, price, convention))
        .collect::<Result<Vec<_>>>()?;
    let residual: f64 = exposures.iter().sum();
    let mean = mean_belief(pop);
    if residual.abs() > tol {
        return Err(Error::Unconverged { residual });
    }
    Ok(ClearingResult { price, gap: mean.value() - price.value(), exposures, mean_belief: mean, residual })
}

fn bisect(pop: &MarketPopulation, tol: f64, convention: ExposureConvention) -> Result<f64> {
    let (mut lo, mut hi) = (PRICE_FLOOR, PRICE_CEIL);
    let (mut f_lo, mut f_hi) = (exposure_at(pop, lo, convention), exposure_at(pop, hi, convention));
    if f_lo < -tol || f_hi > tol {
        return Err(Error::NoInteriorClearing { at_low: f_lo, at_high: f_hi });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = exposure_at(pop, mid, convention);
        if f_mid > 0.0 {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
            f_hi = f_mid;
        }
    }
    Ok(if f_lo.abs() <= f_hi.abs() { lo } else { hi })
}

fn check_closed_form_price(p: Probability) -> Result<f64> {
    Ok(p.require_interior()?.value())
}

/// Capital of a belief-`q` investor that clears against one dollar held by an
/// investor certain the event will not happen: `(1 - p) / (q - p)`.
pub fn confident_no_capital(q: Probability, p: Probability) -> Result<f64> {
    let p = check_closed_form_price(p)?;
    let q = q.value();
    if q - p < POLE_GUARD {
        return Err(Error::ClosedFormDomain("p < q against a certain-no investor"));
    }
    Ok((1.0 - p) / (q - p))
}

/// Mean belief of that two-investor market, `(1 - p) q / (q - 2p + 1)`.
pub fn mean_belief_confident_no(q: Probability, p: Probability) -> Result<Probability> {
    confident_no_capital(q, p)?;
    let (q, p) = (q.value(), p.value());
    Probability::new(((1.0 - p) * q / (q - 2.0 * p + 1.0)).clamp(0.0, 1.0))
}

/// Capital of a belief-`q` investor that clears against one dollar held by an
/// investor certain the event will happen: `(1 - p) / (p - q)`.
pub fn confident_yes_capital(q: Probability, p: Probability) -> Result<f64> {
    let p = check_closed_form_price(p)?;
    let q = q.value();
    if p - q < POLE_GUARD {
        return Err(Error::ClosedFormDomain("q < p against a certain-yes investor"));
    }
    Ok((1.0 - p) / (p - q))
}

/// Mean belief of the certain-yes two-investor market. It always equals the
/// price.
pub fn mean_belief_confident_yes(q: Probability, p: Probability) -> Result<Probability> {
    confident_yes_capital(q, p)?;
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn pr(x: f64) -> Probability {
        Probability::new(x).unwrap()
    }
    fn inv(c: f64, q: f64) -> Investor {
        Investor::new(c, pr(q)).unwrap()
    }
    fn pop(v: &[(f64, f64)]) -> MarketPopulation {
        MarketPopulation::new(v.iter().map(|&(c, q)| inv(c, q)).collect()).unwrap()
    }

    #[test]
    fn exposure_examples() {
        for p in [0.1, 0.5, 0.93] {
            assert_eq!(signed_exposure(&inv(1.0, 0.0), pr(p)).unwrap(), -1.0);
            assert_eq!(signed_exposure(&inv(1.0, 1.0), pr(p)).unwrap(), 1.0);
            assert_eq!(signed_exposure(&inv(5.0, p), pr(p)).unwrap(), 0.0);
        }
        assert!(signed_exposure(&inv(1.0, 0.3), pr(0.0)).is_err());
    }

    #[test]
    fn aggregate_examples() {
        assert!(aggregate_exposure(&pop(&[(2.0, 0.7)]), pr(0.4)).unwrap() > 0.0);
        assert!(aggregate_exposure(&pop(&[(2.0, 0.2)]), pr(0.4)).unwrap() < 0.0);
        assert_abs_diff_eq!(aggregate_exposure(&pop(&[(1.0, 0.3), (1.0, 0.7)]), pr(0.5)).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(aggregate_exposure(&pop(&[(3.0, 0.6), (1.0, 0.0)]), pr(0.4)).unwrap(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn clearing_examples() {
        let r = clearing_price(&pop(&[(2.0, 0.3), (5.0, 0.3)]), 1e-9).unwrap();
        assert_eq!(r.price.value(), 0.3);
        assert!(r.exposures.iter().all(|&e| e == 0.0));

        let r = clearing_price(&pop(&[(1.0, 0.0), (3.0, 0.6)]), 1e-9).unwrap();
        assert_abs_diff_eq!(r.price.value(), 0.4, epsilon = 1e-12);
        assert_abs_diff_eq!(r.mean_belief.value(), 0.45, epsilon = 1e-15);
        assert_abs_diff_eq!(r.gap, 0.05, epsilon = 1e-12);

        let scaled = clearing_price(&pop(&[(7.0, 0.0), (21.0, 0.6)]), 1e-9).unwrap();
        assert_abs_diff_eq!(scaled.price.value(), r.price.value(), epsilon = 1e-12);
    }

    #[test]
    fn contract_balanced_convention() {
        let cb = ExposureConvention::ContractBalanced;
        let p = pr(0.6);
        assert_abs_diff_eq!(signed_exposure_with(&inv(1.0, 0.0), p, cb).unwrap(), -1.5, epsilon = 1e-15);
        assert_abs_diff_eq!(signed_exposure_with(&inv(2.0, 0.2), p, cb).unwrap(), 2.0 * (0.2 - 0.6) / 0.4, epsilon = 1e-15);
        assert_eq!(signed_exposure_with(&inv(2.0, 0.9), p, cb).unwrap(), signed_exposure(&inv(2.0, 0.9), p).unwrap());
        // certain investors on both sides clear at the capital share
        let r = clearing_price_with(&pop(&[(1.0, 0.0), (3.0, 1.0)]), 1e-9, cb).unwrap();
        assert_abs_diff_eq!(r.price.value(), 0.75, epsilon = 1e-12);
        let r = clearing_price_with(&pop(&[(1.0, 0.2), (1.0, 1.0)]), 1e-9, cb).unwrap();
        assert_abs_diff_eq!(r.price.value(), 0.6, epsilon = 1e-12);
    }

    #[test]
    fn clearing_failures() {
        assert!(matches!(clearing_price(&pop(&[(1.0, 0.0), (2.0, 0.0)]), 1e-9), Err(Error::NoInteriorClearing { .. })));
        assert!(matches!(clearing_price(&pop(&[(1.0, 1.0)]), 1e-9), Err(Error::NoInteriorClearing { .. })));
        // a one-in-a-million imbalance between certain investors has no interior price
        assert!(matches!(
            clearing_price(&pop(&[(1.0, 0.0), (1.0 + 1e-6, 1.0)]), 1e-9),
            Err(Error::NoInteriorClearing { .. })
        ));
        assert!(clearing_price(&pop(&[(1.0, 0.4)]), 0.0).is_err());
        assert_eq!(MarketPopulation::new(vec![]), Err(Error::EmptyPopulation));
        assert!(Investor::new(0.0, pr(0.5)).is_err());
        assert!(Investor::new(f64::NAN, pr(0.5)).is_err());
    }

    #[test]
    fn mean_belief_examples() {
        assert_eq!(mean_belief(&pop(&[(4.0, 0.37)])).value(), 0.37);
        assert_abs_diff_eq!(mean_belief(&pop(&[(3.0, 0.6), (1.0, 0.0)])).value(), 0.45, epsilon = 1e-15);
        assert_eq!(mean_belief(&pop(&[(2.0, 0.0), (2.0, 1.0)])).value(), 0.5);
    }

    #[test]
    fn closed_form_examples() {
        assert_abs_diff_eq!(confident_no_capital(pr(0.6), pr(0.4)).unwrap(), 3.0, epsilon = 1e-14);
        assert_eq!(confident_no_capital(pr(1.0), pr(0.3)).unwrap(), 1.0);
        assert!(confident_no_capital(pr(0.4), pr(0.4)).is_err());
        assert!(confident_no_capital(pr(0.4 + 1e-13), pr(0.4)).is_err());
        assert!(confident_no_capital(pr(0.3), pr(0.4)).is_err());

        assert_abs_diff_eq!(mean_belief_confident_no(pr(0.6), pr(0.4)).unwrap().value(), 0.45, epsilon = 1e-15);
        assert_eq!(mean_belief_confident_no(pr(1.0), pr(0.5)).unwrap().value(), 0.5);
        let e = mean_belief_confident_no(pr(0.9), pr(0.1)).unwrap().value();
        assert_abs_diff_eq!(e, 0.81 / 1.7, epsilon = 1e-15);
        assert!(e <= 0.5);

        assert_abs_diff_eq!(confident_yes_capital(pr(0.2), pr(0.6)).unwrap(), 1.0, epsilon = 1e-15);
        assert_eq!(confident_yes_capital(pr(0.0), pr(0.5)).unwrap(), 1.0);
        assert!(confident_yes_capital(pr(0.6 - 1e-13), pr(0.6)).is_err());
        assert_eq!(mean_belief_confident_yes(pr(0.2), pr(0.6)).unwrap().value(), 0.6);
        assert_eq!(mean_belief_confident_yes(pr(0.4), pr(0.5)).unwrap().value(), 0.5);
    }
}
