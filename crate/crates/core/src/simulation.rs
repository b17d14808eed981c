//! Seeded Monte Carlo engine for the double-or-nothing game.
//!
//! Path `i` draws its coin flips from ChaCha8 keyed by the run seed with the
//! stream id set to `i`, so every path sees the same flips no matter how the
//! paths are split across workers. Terminal log-wealth depends only on the
//! number of up steps, so workers only build per-chunk histograms of that
//! count; integer histograms merge exactly and all statistics are derived from
//! the merged histogram in a fixed order.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::growth::{prob_growth_below, GrowthThreshold, WalkSpec, TIE_TOLERANCE_STEPS};
use crate::kelly::even_odds_growth_rate;
use crate::numeric::CompensatedSum;
use crate::probability::{BetFraction, Probability};

const CHUNK: u64 = 4096;
const UNIT_53: f64 = 1.0 / (1u64 << 53) as f64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimConfig {
    pub walk: WalkSpec,
    pub fraction: BetFraction,
    pub paths: u64,
    pub seed: u64,
    pub threshold: Option<GrowthThreshold>,
}

impl SimConfig {
    pub fn new(walk: WalkSpec, fraction: BetFraction, paths: u64, seed: u64, threshold: Option<GrowthThreshold>) -> Result<Self> {
        let f = fraction.value();
        if !(0.0..1.0).contains(&f) {
            return Err(Error::InvalidFraction(f));
        }
        if paths == 0 {
            return Err(Error::InvalidParameter("paths must be at least 1".into()));
        }
        Ok(SimConfig { walk, fraction, paths, seed, threshold })
    }

    /// Same walk, paths and seed with a different stake.
    pub fn with_fraction(&self, fraction: BetFraction) -> Result<Self> {
        SimConfig::new(self.walk, fraction, self.paths, self.seed, self.threshold)
    }

    fn log_factors(&self) -> (f64, f64) {
        let f = self.fraction.value();
        (f.ln_1p(), (-f).ln_1p())
    }

    /// Terminal log-wealth after `up` up steps.
    pub fn log_wealth(&self, up: u64) -> f64 {
        let (ln_up, ln_down) = self.log_factors();
        let down = self.walk.steps() - up;
        let up_part = if up == 0 { 0.0 } else { up as f64 * ln_up };
        let down_part = if down == 0 { 0.0 } else { down as f64 * ln_down };
        up_part + down_part
    }

    fn hits_threshold(&self, up: u64, thr: GrowthThreshold) -> bool {
        let (ln_up, ln_down) = self.log_factors();
        self.log_wealth(up) <= thr.value() + TIE_TOLERANCE_STEPS * (ln_up - ln_down)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimResult {
    pub mean_log_growth_per_step: f64,
    /// Standard error of the mean; NaN for a single path.
    pub std_error: f64,
    /// Fraction of paths whose terminal log-wealth is at most the threshold.
    pub threshold_hit_fraction: Option<Probability>,
    pub paths: u64,
    /// `up_step_histogram[k]` counts paths with exactly `k` up steps.
    pub up_step_histogram: Vec<u64>,
}

/// Number of up steps on path `path`.
pub fn path_up_steps(walk: &WalkSpec, seed: u64, path: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path);
    let p = walk.bias().value();
    (0..walk.steps()).filter(|_| ((rng.next_u64() >> 11) as f64 * UNIT_53) < p).count() as u64
}

fn chunk_histogram(walk: &WalkSpec, seed: u64, start: u64, end: u64) -> Vec<u64> {
    let mut hist = vec![0u64; walk.steps() as usize + 1];
    for path in start..end {
        hist[path_up_steps(walk, seed, path) as usize] += 1;
    }
    hist
}

fn merge(mut a: Vec<u64>, b: Vec<u64>) -> Vec<u64> {
    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
    a
}

fn chunks(paths: u64) -> impl Iterator<Item = (u64, u64)> {
    (0..paths.div_ceil(CHUNK)).map(move |c| (c * CHUNK, ((c + 1) * CHUNK).min(paths)))
}

pub fn up_step_histogram_sequential(walk: &WalkSpec, paths: u64, seed: u64) -> Vec<u64> {
    chunks(paths)
        .map(|(s, e)| chunk_histogram(walk, seed, s, e))
        .fold(vec![0u64; walk.steps() as usize + 1], merge)
}

#[cfg(feature = "parallel")]
pub fn up_step_histogram_parallel(walk: &WalkSpec, paths: u64, seed: u64) -> Vec<u64> {
    use rayon::prelude::*;
    let ranges: Vec<(u64, u64)> = chunks(paths).collect();
    ranges
        .into_par_iter()
        .map(|(s, e)| chunk_histogram(walk, seed, s, e))
        .reduce(|| vec![0u64; walk.steps() as usize + 1], merge)
}

/// Histogram of up-step counts over `paths` paths, parallel when the
/// `parallel` feature is enabled.
pub fn up_step_histogram(walk: &WalkSpec, paths: u64, seed: u64) -> Vec<u64> {
    #[cfg(feature = "parallel")]
    {
        up_step_histogram_parallel(walk, paths, seed)
    }
    #[cfg(not(feature = "parallel"))]
    {
        up_step_histogram_sequential(walk, paths, seed)
    }
}

// Mean and standard error of `value(k)` weighted by the histogram.
fn histogram_moments(hist: &[u64], paths: u64, value: impl Fn(u64) -> f64) -> (f64, f64) {
    let n = paths as f64;
    let mean = hist
        .iter()
        .enumerate()
        .filter(|(_, &h)| h > 0)
        .map(|(k, &h)| (h as f64 / n) * value(k as u64))
        .collect::<CompensatedSum>()
        .total();
    if paths < 2 {
        return (mean, f64::NAN);
    }
    let ss = hist
        .iter()
        .enumerate()
        .filter(|(_, &h)| h > 0)
        .map(|(k, &h)| h as f64 * (value(k as u64) - mean).powi(2))
        .collect::<CompensatedSum>()
        .total();
    (mean, (ss / (n - 1.0) / n).sqrt())
}

fn summarize(config: &SimConfig, hist: Vec<u64>) -> SimResult {
    let steps = config.walk.steps() as f64;
    let (mean, se) = histogram_moments(&hist, config.paths, |k| config.log_wealth(k) / steps);
    let threshold_hit_fraction = config.threshold.map(|thr| {
        let hits: u64 = hist.iter().enumerate().filter(|(k, _)| config.hits_threshold(*k as u64, thr)).map(|(_, &h)| h).sum();
        Probability::new(hits as f64 / config.paths as f64).expect("count ratio")
    });
    SimResult { mean_log_growth_per_step: mean, std_error: se, threshold_hit_fraction, paths: config.paths, up_step_histogram: hist }
}

pub fn run(config: &SimConfig) -> SimResult {
    summarize(config, up_step_histogram(&config.walk, config.paths, config.seed))
}

pub fn run_sequential(config: &SimConfig) -> SimResult {
    summarize(config, up_step_histogram_sequential(&config.walk, config.paths, config.seed))
}

/// [`run`] on a dedicated pool of `threads` workers.
#[cfg(feature = "parallel")]
pub fn run_with_threads(config: &SimConfig, threads: usize) -> Result<SimResult> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    Ok(pool.install(|| summarize(config, up_step_histogram_parallel(&config.walk, config.paths, config.seed))))
}

/// Analytic probability of ending at or below the threshold, including the
/// degenerate zero stake.
pub fn analytic_prob_below(config: &SimConfig) -> Result<Option<Probability>> {
    let Some(thr) = config.threshold else { return Ok(None) };
    if config.fraction.value() == 0.0 {
        return Ok(Some(if thr.value() >= 0.0 { Probability::ONE } else { Probability::ZERO }));
    }
    prob_growth_below(config.fraction, &config.walk, thr).map(Some)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairedDifference {
    /// Mean of (this strategy - baseline) log growth per step, path by path.
    pub mean: f64,
    pub std_error: f64,
    pub z_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrategyRow {
    pub fraction: BetFraction,
    pub result: SimResult,
    pub analytic_growth_rate: f64,
    pub analytic_prob_below: Option<Probability>,
    /// Against the first configuration; `None` for the first row.
    pub versus_baseline: Option<PairedDifference>,
}

/// Run several stakes on common random numbers. All configurations must share
/// walk, path count, seed and threshold.
pub fn compare_strategies(configs: &[SimConfig]) -> Result<Vec<StrategyRow>> {
    let base = configs.first().ok_or_else(|| Error::InvalidParameter("no strategies to compare".into()))?;
    if configs.iter().any(|c| c.walk != base.walk || c.paths != base.paths || c.seed != base.seed || c.threshold != base.threshold) {
        return Err(Error::InvalidParameter("strategies must share walk, paths, seed and threshold".into()));
    }
    let hist = up_step_histogram(&base.walk, base.paths, base.seed);
    let steps = base.walk.steps() as f64;
    configs
        .iter()
        .enumerate()
        .map(|(i, cfg)| {
            let versus_baseline = (i > 0).then(|| {
                let (mean, std_error) =
                    histogram_moments(&hist, cfg.paths, |k| (cfg.log_wealth(k) - base.log_wealth(k)) / steps);
                PairedDifference { mean, std_error, z_score: z(mean, std_error) }
            });
            Ok(StrategyRow {
                fraction: cfg.fraction,
                analytic_growth_rate: even_odds_growth_rate(cfg.walk.bias(), cfg.fraction)?,
                analytic_prob_below: analytic_prob_below(cfg)?,
                result: summarize(cfg, hist.clone()),
                versus_baseline,
            })
        })
        .collect()
}

fn z(diff: f64, se: f64) -> f64 {
    if se > 0.0 {
        diff / se
    } else if diff == 0.0 {
        0.0
    } else {
        diff.signum() * f64::INFINITY
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdCheck {
    pub empirical: Probability,
    pub exact: Probability,
    /// `(empirical - exact)` over the binomial standard error of a proportion.
    pub z_score: f64,
}

/// Compare the simulated threshold-hit frequency with the exact tail value.
pub fn threshold_validation(config: &SimConfig) -> Result<ThresholdCheck> {
    if config.threshold.is_none() {
        return Err(Error::InvalidParameter("threshold validation needs a growth threshold".into()));
    }
    if config.fraction.value() <= 0.0 {
        return Err(Error::InvalidFraction(config.fraction.value()));
    }
    let result = run(config);
    check_from(config, &result)
}

/// As [`threshold_validation`], reusing an existing simulation result.
pub fn check_from(config: &SimConfig, result: &SimResult) -> Result<ThresholdCheck> {
    let exact = analytic_prob_below(config)?
        .ok_or_else(|| Error::InvalidParameter("threshold validation needs a growth threshold".into()))?;
    let empirical = result.threshold_hit_fraction.expect("threshold present");
    let se = (exact.value() * (1.0 - exact.value()) / result.paths as f64).sqrt();
    Ok(ThresholdCheck { empirical, exact, z_score: z(empirical.value() - exact.value(), se) })
}
