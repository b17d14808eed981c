#![allow(dead_code)]

use pmkelly::{BetFraction, Probability, WalkSpec};

pub fn pr(x: f64) -> Probability {
    Probability::new(x).unwrap()
}

pub fn fr(x: f64) -> BetFraction {
    BetFraction::new(x).unwrap()
}

pub fn walk(n: u64, p: f64) -> WalkSpec {
    WalkSpec::new(n, pr(p)).unwrap()
}

/// Argmax of a concave function on `[lo, hi]`: a 1e-3 grid, then a 1e-6 grid
/// around the best coarse point.
pub fn grid_argmax(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let scan = |a: f64, b: f64, step: f64| {
        let n = ((b - a) / step).floor() as usize;
        (0..=n)
            .map(|i| a + i as f64 * step)
            .filter(|x| *x >= lo && *x <= hi)
            .map(|x| (x, f(x)))
            .filter(|(_, v)| v.is_finite())
            .fold((f64::NAN, f64::NEG_INFINITY), |best, (x, v)| if v > best.1 { (x, v) } else { best })
            .0
    };
    let coarse = scan(lo, hi, 1e-3);
    scan((coarse - 2e-3).max(lo), (coarse + 2e-3).min(hi), 1e-6)
}

/// Direct evaluation of the long-side log utility; independent of the library.
pub fn utility_formula(q: f64, p: f64, f: f64) -> f64 {
    (1.0 - q) * (1.0 - f).ln() + q * (1.0 + f * (1.0 - p) / p).ln()
}

/// Bernoulli KL divergence written out directly.
pub fn kl_formula(a: f64, p: f64) -> f64 {
    let t = |x: f64, y: f64| if x == 0.0 { 0.0 } else { x * (x / y).ln() };
    t(a, p) + t(1.0 - a, 1.0 - p)
}

use pmkelly::{Investor, MarketPopulation};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Deterministic uniform source for test fixtures.
pub struct Uniform(ChaCha8Rng);

impl Uniform {
    pub fn new(seed: u64) -> Self {
        Uniform(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn next(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * ((self.0.next_u64() >> 11) as f64 / (1u64 << 53) as f64)
    }

    pub fn int(&mut self, lo: u64, hi: u64) -> u64 {
        lo + self.0.next_u64() % (hi - lo + 1)
    }
}

/// Sizes 1-50, capitals in [0.01, 100], beliefs in [0.01, 0.99].
pub fn random_population(rng: &mut Uniform) -> MarketPopulation {
    let n = rng.int(1, 50);
    let investors = (0..n)
        .map(|_| Investor::new(rng.next(0.01, 100.0), pr(rng.next(0.01, 0.99))).unwrap())
        .collect();
    MarketPopulation::new(investors).unwrap()
}

pub fn population(v: &[(f64, f64)]) -> MarketPopulation {
    MarketPopulation::new(v.iter().map(|&(c, q)| Investor::new(c, pr(q)).unwrap()).collect()).unwrap()
}
