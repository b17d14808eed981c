//! Exact rational evaluation of binomial tails, for cross-checking the
//! log-space routines on small walks.
//!
//! A double `p` is exactly `m / 2^e`, so every term of the sum shares the
//! denominator `2^(e n)` and the numerator is a plain big-integer sum. The only
//! rounding is the final conversion back to `f64`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, One, ToPrimitive, Zero};

struct Dyadic {
    num: BigInt,
    comp: BigInt,
    shift: u64,
}

fn dyadic(p: f64) -> Dyadic {
    assert!((0.0..=1.0).contains(&p), "p must be a probability");
    if p == 0.0 {
        return Dyadic { num: BigInt::zero(), comp: BigInt::one(), shift: 0 };
    }
    let (mantissa, exponent, _) = p.integer_decode();
    let (num, shift) = if exponent >= 0 {
        (BigInt::from(mantissa) << exponent as usize, 0u64)
    } else {
        (BigInt::from(mantissa), (-exponent) as u64)
    };
    let comp = (BigInt::one() << shift as usize) - &num;
    Dyadic { num, comp, shift }
}

fn tail_numerator(n: u64, d: &Dyadic, top: u64) -> BigInt {
    // term_i = C(n, i) num^i comp^(n - i)
    let comp_powers: Vec<BigInt> = std::iter::successors(Some(BigInt::one()), |x| Some(x * &d.comp))
        .take(n as usize + 1)
        .collect();
    let mut total = BigInt::zero();
    let mut coeff = BigInt::one();
    let mut num_power = BigInt::one();
    for i in 0..=top {
        total += &coeff * &num_power * &comp_powers[(n - i) as usize];
        coeff = coeff * BigInt::from(n - i) / BigInt::from(i + 1);
        num_power *= &d.num;
    }
    total
}

fn to_f64(numerator: BigInt, d: &Dyadic, n: u64) -> f64 {
    let denominator = BigInt::one() << (d.shift * n) as usize;
    BigRational::new_raw(numerator, denominator).to_f64().expect("finite ratio")
}

/// `P(X <= k)` for `X ~ Binomial(n, p)`. Negative `k` gives 0.
pub fn exact_binomial_cdf(n: u64, p: f64, k: i64) -> f64 {
    if k < 0 {
        return 0.0;
    }
    let top = (k as u64).min(n);
    if top == n {
        return 1.0;
    }
    let d = dyadic(p);
    to_f64(tail_numerator(n, &d, top), &d, n)
}

pub fn exact_binomial_pmf(n: u64, p: f64, k: u64) -> f64 {
    assert!(k <= n);
    let d = dyadic(p);
    let coeff = (0..k).fold(BigInt::one(), |acc, i| acc * BigInt::from(n - i) / BigInt::from(i + 1));
    let term = coeff * num_traits::pow(d.num.clone(), k as usize) * num_traits::pow(d.comp.clone(), (n - k) as usize);
    to_f64(term, &d, n)
}
