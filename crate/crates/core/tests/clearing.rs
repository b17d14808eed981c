mod common;

use common::{population, pr, random_population, Uniform};
use pmkelly::clearing::*;
use pmkelly::Error;

#[test]
fn random_populations_clear() {
    let mut rng = Uniform::new(11);
    for _ in 0..200 {
        let pop = random_population(&mut rng);
        let r = clearing_price(&pop, DEFAULT_TOLERANCE).unwrap();
        assert!(r.residual.abs() < 1e-9);
        assert!((r.exposures.iter().sum::<f64>() - r.residual).abs() < 1e-12);
        assert_eq!(r.gap, r.mean_belief.value() - r.price.value());
        assert!(r.price.is_interior());
    }
}

#[test]
fn clearing_price_lies_within_belief_range() {
    let mut rng = Uniform::new(12);
    for _ in 0..100 {
        let pop = random_population(&mut rng);
        let r = clearing_price(&pop, DEFAULT_TOLERANCE).unwrap();
        let lo = pop.investors().iter().map(|i| i.belief().value()).fold(1.0, f64::min);
        let hi = pop.investors().iter().map(|i| i.belief().value()).fold(0.0, f64::max);
        assert!(r.price.value() >= lo - 1e-12 && r.price.value() <= hi + 1e-12);
    }
}

#[test]
fn scale_invariance() {
    let mut rng = Uniform::new(13);
    for _ in 0..200 {
        let pop = random_population(&mut rng);
        let base = clearing_price(&pop, DEFAULT_TOLERANCE).unwrap().price.value();
        for lambda in [0.1, 7.0, 1000.0] {
            let scaled = pop.scaled(lambda).unwrap();
            // residual scales with capital, so the tolerance does too
            let p = clearing_price(&scaled, DEFAULT_TOLERANCE * lambda.max(1.0)).unwrap().price.value();
            assert!((p - base).abs() <= 1e-12, "lambda={lambda}: {p} vs {base}");
        }
    }
}

#[test]
fn aggregate_exposure_is_monotone() {
    let mut rng = Uniform::new(14);
    for _ in 0..50 {
        let pop = random_population(&mut rng);
        let values: Vec<f64> = (1..1000).map(|i| aggregate_exposure(&pop, pr(i as f64 / 1000.0)).unwrap()).collect();
        assert!(values.windows(2).all(|w| w[1] < w[0]));
    }
}

#[test]
fn two_investor_constructions_recover_price() {
    for i in 1..20 {
        for j in 1..20 {
            let (p, q) = (i as f64 / 20.0, j as f64 / 20.0);
            if q > p {
                let c = confident_no_capital(pr(q), pr(p)).unwrap();
                let pop = population(&[(c, q), (1.0, 0.0)]);
                let r = clearing_price(&pop, DEFAULT_TOLERANCE).unwrap();
                assert!((r.price.value() - p).abs() < 1e-9, "no p={p} q={q} got {}", r.price.value());
                let e = mean_belief_confident_no(pr(q), pr(p)).unwrap().value();
                assert!((mean_belief(&pop).value() - e).abs() < 1e-12);
            } else if q < p {
                // the certain-yes construction balances contracts, not dollars staked
                let c = confident_yes_capital(pr(q), pr(p)).unwrap();
                let pop = population(&[(c, q), (1.0, 1.0)]);
                let r = clearing_price_with(&pop, DEFAULT_TOLERANCE, ExposureConvention::ContractBalanced).unwrap();
                assert!((r.price.value() - p).abs() < 1e-9);
                assert!((mean_belief(&pop).value() - p).abs() < 1e-12);
                assert_eq!(mean_belief_confident_yes(pr(q), pr(p)).unwrap().value(), p);
            }
        }
    }
}

#[test]
fn confident_no_mean_belief_range() {
    for p in [0.05, 0.1, 0.3, 0.49, 0.5, 0.51, 0.9, 0.95] {
        let values: Vec<f64> = (1..=10_000)
            .map(|i| p + (1.0 - p) * i as f64 / 10_000.0)
            .filter(|&q| q - p >= 1e-9)
            .map(|q| mean_belief_confident_no(pr(q), pr(p)).unwrap().value())
            .collect();
        let (lo, hi) = values.iter().fold((1.0f64, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
        if p < 0.5 {
            assert!(lo >= 0.0 && hi <= 0.5 + 1e-15);
            assert!((hi - 0.5).abs() < 1e-6 && (lo - p).abs() < 1e-3);
        } else if p > 0.5 {
            assert!(lo >= 0.5 - 1e-15 && hi <= 1.0);
            assert!((lo - 0.5).abs() < 1e-6 && (hi - p).abs() < 1e-3);
        } else {
            assert!(values.iter().all(|v| (v - 0.5).abs() < 1e-15));
        }
    }
}

#[test]
fn extreme_beliefs() {
    // a one-in-a-million capital imbalance among certain investors pushes the
    // price out of the interior while the mean belief barely moves
    let pop = population(&[(1.0, 0.0), (1.0 + 1e-6, 1.0)]);
    assert!(matches!(clearing_price(&pop, DEFAULT_TOLERANCE), Err(Error::NoInteriorClearing { .. })));
    assert!((mean_belief(&pop).value() - 0.5).abs() <= 1e-6 / 2.0);
    let pop = population(&[(1.0 + 1e-6, 0.0), (1.0, 1.0)]);
    assert!(matches!(clearing_price(&pop, DEFAULT_TOLERANCE), Err(Error::NoInteriorClearing { .. })));
}

#[test]
fn settlement_is_zero_sum() {
    let mut rng = Uniform::new(15);
    for _ in 0..50 {
        let pop = random_population(&mut rng);
        let r = clearing_price(&pop, DEFAULT_TOLERANCE).unwrap();
        let p = r.price.value();
        // signed dollar exposure e pays e (1 - p) / p if the event happens and
        // loses e otherwise
        let pnl = |event: bool| -> f64 {
            r.exposures.iter().map(|&e| if event { e * (1.0 - p) / p } else { -e }).sum()
        };
        let tol = DEFAULT_TOLERANCE * (1.0 - p) / p + 1e-12;
        assert!(pnl(true).abs() <= tol.max(DEFAULT_TOLERANCE));
        assert!(pnl(false).abs() <= DEFAULT_TOLERANCE);
    }
}
