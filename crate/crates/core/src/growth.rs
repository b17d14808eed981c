//! Finite-horizon analysis of the double-or-nothing game.
//!
//! A walk of `N` independent steps moves up with probability `p`. Staking a
//! fraction `f` each step multiplies wealth by `1 + f` on an up step and by
//! `1 - f` on a down step, so terminal log-wealth depends only on the number of
//! up steps. Tail probabilities of that count are computed exactly in log
//! space and bracketed by Chernoff-type bounds through the Bernoulli
//! Kullback-Leibler divergence.

pub mod exact;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kelly::{even_odds_growth_rate, kelly_fraction_even_odds};
use crate::numeric::{xlny, CompensatedSum};
use crate::probability::{BetFraction, Probability};

/// Fractional step counts within this distance of an integer are treated as
/// that integer before flooring. Shared with the simulator's threshold test.
pub const TIE_TOLERANCE_STEPS: f64 = 1e-9;

// Relative slack on `k <= N p` so that an integer product such as 10 * 0.6
// is not excluded by rounding.
const VALIDITY_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkSpec {
    steps: u64,
    bias: Probability,
}

impl WalkSpec {
    /// A walk of `steps >= 1` steps with up-probability `bias`. Degenerate
    /// biases 0 and 1 are accepted; operations that need the divergence reject
    /// them.
    pub fn new(steps: u64, bias: Probability) -> Result<Self> {
        if steps == 0 {
            return Err(Error::ZeroSteps);
        }
        Ok(WalkSpec { steps, bias })
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn bias(&self) -> Probability {
        self.bias
    }

    fn n(&self) -> f64 {
        self.steps as f64
    }
}

/// Threshold on terminal log-wealth (natural log of final over initial wealth).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct GrowthThreshold(f64);

impl GrowthThreshold {
    pub const BREAK_EVEN: GrowthThreshold = GrowthThreshold(0.0);

    pub fn new(log_wealth: f64) -> Result<Self> {
        if log_wealth.is_finite() {
            Ok(GrowthThreshold(log_wealth))
        } else {
            Err(Error::InvalidParameter(format!("growth threshold must be finite, got {log_wealth}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Iterates `ln C(n, i) + i ln p + (n - i) ln(1 - p)` for `i = 0, 1, ...`.
/// The log coefficient is accumulated term by term with compensation.
struct LogPmfRow {
    n: u64,
    ln_p: f64,
    ln_q: f64,
    p: f64,
    i: u64,
    ln_coeff: CompensatedSum,
}

impl LogPmfRow {
    fn new(spec: &WalkSpec) -> Self {
        let p = spec.bias.value();
        LogPmfRow { n: spec.steps, ln_p: p.ln(), ln_q: (-p).ln_1p(), p, i: 0, ln_coeff: CompensatedSum::default() }
    }
}

impl Iterator for LogPmfRow {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        if self.i > self.n {
            return None;
        }
        let i = self.i as f64;
        let rest = (self.n - self.i) as f64;
        let up = if i == 0.0 { 0.0 } else if self.p == 0.0 { f64::NEG_INFINITY } else { i * self.ln_p };
        let down = if rest == 0.0 { 0.0 } else if self.p == 1.0 { f64::NEG_INFINITY } else { rest * self.ln_q };
        let value = self.ln_coeff.total() + up + down;
        if self.i < self.n {
            self.ln_coeff.add(((self.n - self.i) as f64 / (self.i + 1) as f64).ln());
        }
        self.i += 1;
        Some(value)
    }
}

fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    let sum: CompensatedSum = terms.iter().map(|t| (t - max).exp()).collect();
    max + sum.total().ln()
}

fn check_step(spec: &WalkSpec, k: i64) -> Result<u64> {
    if k < 0 || k as u64 > spec.steps {
        Err(Error::StepOutOfRange { k, n: spec.steps })
    } else {
        Ok(k as u64)
    }
}

pub fn log_binomial_pmf(spec: &WalkSpec, k: i64) -> Result<f64> {
    let k = check_step(spec, k)?;
    Ok(LogPmfRow::new(spec).nth(k as usize).expect("k <= n"))
}

/// Probability of exactly `k` up steps.
pub fn binomial_pmf(spec: &WalkSpec, k: i64) -> Result<Probability> {
    Probability::new(log_binomial_pmf(spec, k)?.exp().min(1.0))
}

/// `ln P(up steps <= floor(k))`; `-inf` below zero and `0` from `N` upward.
pub fn log_binomial_cdf(spec: &WalkSpec, k: f64) -> f64 {
    if k.is_nan() {
        return f64::NAN;
    }
    let k = k.floor();
    if k < 0.0 {
        return f64::NEG_INFINITY;
    }
    if k >= spec.n() {
        return 0.0;
    }
    let terms: Vec<f64> = LogPmfRow::new(spec).take(k as usize + 1).collect();
    log_sum_exp(&terms).min(0.0)
}

/// Probability that the number of up steps is at most `floor(k)`.
pub fn binomial_cdf(spec: &WalkSpec, k: f64) -> Probability {
    Probability::new(log_binomial_cdf(spec, k).exp().clamp(0.0, 1.0)).expect("clamped")
}

/// Bernoulli relative entropy `D(a || p)` in nats, with `0 ln 0 = 0`.
pub fn kl_divergence(a: Probability, p: Probability) -> Result<f64> {
    let p = p.require_interior()?.value();
    let a = a.value();
    let d = xlny(a, a / p) + xlny(1.0 - a, (1.0 - a) / (1.0 - p));
    Ok(d.max(0.0))
}

fn validity_region(spec: &WalkSpec, k: i64) -> Result<f64> {
    spec.bias.require_interior()?;
    let limit = spec.n() * spec.bias.value();
    if k < 0 || k as f64 > limit * (1.0 + VALIDITY_SLACK) {
        return Err(Error::OutOfValidityRegion { k, limit });
    }
    Ok(k as f64 / spec.n())
}

fn tail_exponent(spec: &WalkSpec, k: i64) -> Result<f64> {
    let a = validity_region(spec, k)?;
    // rounding inside the slack can put a a hair above p
    let a = Probability::new(a.min(spec.bias.value()))?;
    Ok(spec.n() * kl_divergence(a, spec.bias)?)
}

/// Chernoff upper bound `exp(-N D(k/N || p))` on `P(up steps <= k)`, valid for
/// `0 <= k <= N p`.
pub fn chernoff_upper(spec: &WalkSpec, k: i64) -> Result<f64> {
    Ok((-tail_exponent(spec, k)?).exp())
}

/// Lower companion `exp(-N D(k/N || p)) / sqrt(2N)` on the same region. At
/// `k = 0` the upper bound is exact, so the lower one holds trivially there.
pub fn chernoff_lower(spec: &WalkSpec, k: i64) -> Result<f64> {
    Ok((-tail_exponent(spec, k)?).exp() / (2.0 * spec.n()).sqrt())
}

/// Empirical rate `-ln P(up steps <= k) / N`. On the Chernoff validity
/// region it lies in `[D, D + ln(2N) / (2N)]` with `D = D(k/N || p)`.
pub fn rate_per_step(spec: &WalkSpec, k: i64) -> Result<f64> {
    if k < 0 {
        return Err(Error::StepOutOfRange { k, n: spec.steps });
    }
    let log_f = log_binomial_cdf(spec, k as f64);
    if log_f == f64::NEG_INFINITY {
        return Err(Error::InvalidParameter(format!("P(up steps <= {k}) is zero")));
    }
    Ok((-log_f / spec.n()).max(0.0))
}

fn check_open_fraction(f: BetFraction) -> Result<f64> {
    let f = f.value();
    if f > 0.0 && f < 1.0 {
        Ok(f)
    } else {
        Err(Error::InvalidFraction(f))
    }
}

/// Number of up steps `k_Q` at which terminal log-wealth equals the threshold:
/// `(Q - N ln(1 - f)) / (ln(1 + f) - ln(1 - f))`. Not clamped to `[0, N]`.
pub fn threshold_steps(f: BetFraction, spec: &WalkSpec, thr: GrowthThreshold) -> Result<f64> {
    let f = check_open_fraction(f)?;
    let ln_up = f.ln_1p();
    let ln_down = (-f).ln_1p();
    Ok((thr.value() - spec.n() * ln_down) / (ln_up - ln_down))
}

pub(crate) fn snap_steps(k: f64) -> f64 {
    let r = k.round();
    if (k - r).abs() <= TIE_TOLERANCE_STEPS {
        r
    } else {
        k
    }
}

/// Probability that terminal log-wealth after the walk is at most `Q`.
pub fn prob_growth_below(f: BetFraction, spec: &WalkSpec, thr: GrowthThreshold) -> Result<Probability> {
    let k = snap_steps(threshold_steps(f, spec, thr)?);
    Ok(if k < 0.0 {
        Probability::ZERO
    } else if k >= spec.n() {
        Probability::ONE
    } else {
        binomial_cdf(spec, k)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BiasSensitivity {
    /// `D(k/N || p + eps) - D(k/N || p)`.
    pub exact: f64,
    /// `(p - k/N) / (p (1 - p)) * eps`.
    pub first_order: f64,
}

/// Change in the tail exponent when the assumed bias moves by `eps`.
pub fn sensitivity_bias(k: i64, spec: &WalkSpec, eps: f64) -> Result<BiasSensitivity> {
    let k = check_step(spec, k)?;
    let p = spec.bias.require_interior()?.value();
    let shifted = Probability::new(p + eps)
        .and_then(Probability::require_interior)
        .map_err(|_| Error::InvalidParameter(format!("p + eps = {} is outside (0, 1)", p + eps)))?;
    let a = Probability::new(k as f64 / spec.n())?;
    let exact = kl_divergence(a, shifted)? - kl_divergence(a, spec.bias)?;
    let first_order = (p - a.value()) / (p * (1.0 - p)) * eps;
    Ok(BiasSensitivity { exact, first_order })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FractionSensitivity {
    /// `U(p, 2p - 1 + eps) - U(p, 2p - 1)`.
    pub exact: f64,
    /// `quadratic_coefficient * eps^2`.
    pub quadratic: f64,
    /// Half the curvature at the optimum, `-1 / (8 p (1 - p))`.
    pub quadratic_coefficient: f64,
    /// Full curvature `U''` at the optimum, `-1 / (4 p (1 - p))`. Using it as
    /// the Taylor coefficient overstates the loss by a factor of two.
    pub curvature: f64,
}

/// Growth-rate loss from staking `2p - 1 + eps` instead of the optimum.
pub fn sensitivity_fraction(p: Probability, eps: f64) -> Result<FractionSensitivity> {
    let p_val = p.require_interior()?.value();
    let optimum = kelly_fraction_even_odds(p);
    let moved = optimum.value() + eps;
    if !(moved > -1.0 && moved < 1.0) {
        return Err(Error::InvalidFraction(moved));
    }
    let exact = even_odds_growth_rate(p, BetFraction::new(moved)?)? - even_odds_growth_rate(p, optimum)?;
    let curvature = -1.0 / (4.0 * p_val * (1.0 - p_val));
    let quadratic_coefficient = 0.5 * curvature;
    Ok(FractionSensitivity { exact: exact.min(0.0), quadratic: quadratic_coefficient * eps * eps, quadratic_coefficient, curvature })
}
