use std::collections::BTreeMap;
use std::fmt;

use pmkelly::clearing::{self, ExposureConvention};
use pmkelly::growth::{self, GrowthThreshold, WalkSpec};
use pmkelly::kelly::{self, PayoutSpec};
use pmkelly::simulation::{self, SimConfig};
use pmkelly::{BetFraction, MarketPopulation, Probability};

use crate::output::Record;

pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NO_SOLUTION: i32 = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        CliError { code: EXIT_INPUT, message: message.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<pmkelly::Error> for CliError {
    fn from(e: pmkelly::Error) -> Self {
        let code = match e {
            pmkelly::Error::NoInteriorClearing { .. } | pmkelly::Error::Unconverged { .. } => EXIT_NO_SOLUTION,
            _ => EXIT_INPUT,
        };
        CliError { code, message: e.to_string() }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Named numeric parameters shared by the subcommands and the sweep driver.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Params(BTreeMap<String, f64>);

impl Params {
    pub fn new() -> Self {
        Params::default()
    }

    pub fn set(&mut self, name: &str, value: f64) {
        self.0.insert(name.to_string(), value);
    }

    pub fn with(mut self, name: &str, value: Option<f64>) -> Self {
        if let Some(v) = value {
            self.set(name, v);
        }
        self
    }

    pub fn opt(&self, name: &str) -> Option<f64> {
        self.0.get(name).copied()
    }

    pub fn get(&self, name: &str) -> CliResult<f64> {
        self.opt(name).ok_or_else(|| CliError::input(format!("missing parameter {name}")))
    }

    pub fn count(&self, name: &str) -> CliResult<u64> {
        let v = self.get(name)?;
        if v.fract() != 0.0 || !(0.0..=u32::MAX as f64).contains(&v) {
            return Err(CliError::input(format!("{name} must be a non-negative integer, got {v}")));
        }
        Ok(v as u64)
    }

    pub fn step(&self, name: &str) -> CliResult<i64> {
        let v = self.get(name)?;
        if v.fract() != 0.0 || v.abs() > i32::MAX as f64 {
            return Err(CliError::input(format!("{name} must be an integer, got {v}")));
        }
        Ok(v as i64)
    }

    fn prob(&self, name: &str) -> CliResult<Probability> {
        Ok(Probability::new(self.get(name)?)?)
    }

    fn fraction(&self, name: &str) -> CliResult<BetFraction> {
        Ok(BetFraction::new(self.get(name)?)?)
    }

    fn walk(&self) -> CliResult<WalkSpec> {
        Ok(WalkSpec::new(self.count("N")?, self.prob("p")?)?)
    }

    fn threshold(&self) -> CliResult<Option<GrowthThreshold>> {
        self.opt("Q").map(GrowthThreshold::new).transpose().map_err(Into::into)
    }
}

pub fn fraction(params: &Params) -> CliResult<Record> {
    let (q, p) = (params.prob("q")?, params.prob("p")?);
    let alpha = params.opt("alpha").unwrap_or(1.0);
    let spec = PayoutSpec::new(alpha)?;
    let (f, u) = if alpha == 1.0 {
        let f = kelly::optimal_fraction(q, p)?;
        (f, kelly::log_utility(q, p, f)?)
    } else {
        let f = kelly::optimal_fraction_alpha(q, p, spec)?;
        (f, kelly::log_utility_alpha(q, p, f, spec)?)
    };
    Ok(Record::new()
        .input("q", q.value())
        .input("p", p.value())
        .input("alpha", alpha)
        .value("fraction", f.value())
        .value("utility_at_fraction", u))
}

pub fn growth_rate(params: &Params) -> CliResult<Record> {
    let (p, f) = (params.prob("p")?, params.fraction("f")?);
    Ok(Record::new()
        .input("p", p.value())
        .input("f", f.value())
        .value("growth_rate", kelly::even_odds_growth_rate(p, f)?)
        .value("kelly_fraction", kelly::kelly_fraction_even_odds(p).value()))
}

pub fn bounds(params: &Params) -> CliResult<Record> {
    let spec = params.walk()?;
    let k = params.step("k")?;
    let upper = growth::chernoff_upper(&spec, k)?;
    let lower = growth::chernoff_lower(&spec, k)?;
    let a = Probability::new(k as f64 / spec.steps() as f64)?;
    Ok(Record::new()
        .input_int("N", spec.steps() as i64)
        .input("p", spec.bias().value())
        .input_int("k", k)
        .value("exact_cdf", growth::binomial_cdf(&spec, k as f64).value())
        .value("upper", upper)
        .value("lower", lower)
        .value("kl", growth::kl_divergence(a, spec.bias())?)
        .value("rate_per_step", growth::rate_per_step(&spec, k)?))
}

pub fn kq(params: &Params) -> CliResult<Record> {
    let f = params.fraction("f")?;
    let n = params.count("N")?;
    let thr = GrowthThreshold::new(params.get("Q")?)?;
    // k_Q does not depend on the bias; p only enters the tail probability
    let walk = WalkSpec::new(n, params.opt("p").map(Probability::new).transpose()?.unwrap_or(Probability::HALF))?;
    let k = growth::threshold_steps(f, &walk, thr)?;
    let mut r = Record::new().input("f", f.value()).input_int("N", n as i64).input("Q", thr.value());
    if let Some(p) = params.opt("p") {
        r = r.input("p", p);
    }
    r = r.value("k_q", k).flag("reachable", (0.0..=n as f64).contains(&k));
    if params.opt("p").is_some() {
        r = r.value("prob_below", growth::prob_growth_below(f, &walk, thr)?.value());
    }
    Ok(r)
}

pub fn sensitivity_bias(params: &Params) -> CliResult<Record> {
    let spec = params.walk()?;
    let (k, eps) = (params.step("k")?, params.get("eps")?);
    let s = growth::sensitivity_bias(k, &spec, eps)?;
    Ok(Record::new()
        .text("mode", "bias")
        .input_int("N", spec.steps() as i64)
        .input_int("k", k)
        .input("p", spec.bias().value())
        .input("eps", eps)
        .value("exact", s.exact)
        .value("first_order", s.first_order)
        .value("error", s.exact - s.first_order))
}

pub fn sensitivity_fraction(params: &Params) -> CliResult<Record> {
    let (p, eps) = (params.prob("p")?, params.get("eps")?);
    let s = growth::sensitivity_fraction(p, eps)?;
    Ok(Record::new()
        .text("mode", "fraction")
        .input("p", p.value())
        .input("eps", eps)
        .value("exact", s.exact)
        .value("quadratic", s.quadratic)
        .value("quadratic_coefficient", s.quadratic_coefficient)
        .value("full_curvature_coefficient", s.curvature)
        .value("full_curvature_quadratic", s.curvature * eps * eps)
        .value("error", s.exact - s.quadratic))
}

/// Two-investor market against one certain-"no" dollar.
pub fn gap_confident_no(params: &Params) -> CliResult<Record> {
    let (q, p) = (params.prob("q")?, params.prob("p")?);
    let capital = clearing::confident_no_capital(q, p)?;
    let mean = clearing::mean_belief_confident_no(q, p)?.value();
    Ok(Record::new()
        .input("q", q.value())
        .input("p", p.value())
        .value("capital", capital)
        .value("mean_belief", mean)
        .value("gap", mean - p.value()))
}

/// Two-investor market against one certain-"yes" dollar.
pub fn gap_confident_yes(params: &Params) -> CliResult<Record> {
    let (q, p) = (params.prob("q")?, params.prob("p")?);
    let capital = clearing::confident_yes_capital(q, p)?;
    let mean = clearing::mean_belief_confident_yes(q, p)?.value();
    Ok(Record::new()
        .input("q", q.value())
        .input("p", p.value())
        .value("capital", capital)
        .value("mean_belief", mean)
        .value("gap", mean - p.value()))
}

pub fn clear(pop: &MarketPopulation, tol: f64, convention: ExposureConvention) -> CliResult<Record> {
    let r = clearing::clearing_price_with(pop, tol, convention)?;
    Ok(Record::new()
        .input("tol", tol)
        .text(
            "convention",
            match convention {
                ExposureConvention::StakedDollars => "staked-dollars",
                ExposureConvention::ContractBalanced => "contract-balanced",
            },
        )
        .input_int("investors", pop.investors().len() as i64)
        .value("price", r.price.value())
        .value("mean_belief", r.mean_belief.value())
        .value("gap", r.gap)
        .value("residual", r.residual)
        .list("exposures", r.exposures.iter().copied()))
}

fn sim_config(params: &Params, seed: u64, f: f64) -> CliResult<SimConfig> {
    let paths = params.count("paths")?;
    Ok(SimConfig::new(params.walk()?, BetFraction::new(f)?, paths, seed, params.threshold()?)?)
}

fn run_config(config: &SimConfig, threads: Option<usize>) -> CliResult<simulation::SimResult> {
    match threads {
        #[cfg(feature = "parallel")]
        Some(t) => Ok(simulation::run_with_threads(config, t)?),
        #[cfg(not(feature = "parallel"))]
        Some(_) => Ok(simulation::run_sequential(config)),
        None => Ok(simulation::run(config)),
    }
}

fn sim_inputs(config: &SimConfig) -> Record {
    let r = Record::new()
        .input_int("N", config.walk.steps() as i64)
        .input("p", config.walk.bias().value())
        .input("f", config.fraction.value())
        .input_int("paths", config.paths as i64)
        .input_uint("seed", config.seed);
    match config.threshold {
        Some(q) => r.input("Q", q.value()),
        None => r.null("Q"),
    }
}

pub fn simulate(params: &Params, seed: u64, threads: Option<usize>) -> CliResult<Record> {
    let config = sim_config(params, seed, params.get("f")?)?;
    let result = run_config(&config, threads)?;
    let analytic = kelly::even_odds_growth_rate(config.walk.bias(), config.fraction)?;
    let mut r = sim_inputs(&config)
        .value("mean_log_growth_per_step", result.mean_log_growth_per_step)
        .value("std_error", result.std_error)
        .value("analytic_growth_rate", analytic);
    if config.threshold.is_some() {
        let exact = simulation::analytic_prob_below(&config)?.map(|p| p.value());
        r = r.maybe("threshold_hit_fraction", result.threshold_hit_fraction.map(|p| p.value())).maybe("exact_prob_below", exact);
        r = if config.fraction.value() > 0.0 {
            r.value("z_score", simulation::check_from(&config, &result)?.z_score)
        } else {
            r.null("z_score")
        };
    }
    Ok(r.counts("up_step_histogram", &result.up_step_histogram))
}

/// Several stakes on common random numbers; differences are against the first.
pub fn compare(params: &Params, seed: u64, fractions: &[f64]) -> CliResult<Vec<Record>> {
    let configs = fractions.iter().map(|&f| sim_config(params, seed, f)).collect::<CliResult<Vec<_>>>()?;
    let rows = simulation::compare_strategies(&configs)?;
    Ok(configs
        .iter()
        .zip(rows)
        .map(|(cfg, row)| {
            let paired = row.versus_baseline;
            sim_inputs(cfg)
                .value("mean_log_growth_per_step", row.result.mean_log_growth_per_step)
                .value("std_error", row.result.std_error)
                .value("analytic_growth_rate", row.analytic_growth_rate)
                .maybe("threshold_hit_fraction", row.result.threshold_hit_fraction.map(|p| p.value()))
                .maybe("analytic_prob_below", row.analytic_prob_below.map(|p| p.value()))
                .maybe("paired_difference", paired.map(|d| d.mean))
                .maybe("paired_std_error", paired.map(|d| d.std_error))
                .maybe("paired_z_score", paired.map(|d| d.z_score))
        })
        .collect())
}
