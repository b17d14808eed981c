//! `pmkelly` command-line front end.

mod commands;
mod output;
mod population;
mod sweep;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pmkelly::clearing::{ExposureConvention, DEFAULT_TOLERANCE};

use commands::{CliError, CliResult, Params, EXIT_INPUT};
use output::{render, Format, Record};

#[derive(Debug, Parser)]
#[command(name = "pmkelly", version, about = "Kelly sizing, market clearing and growth analysis for binary contracts")]
struct Cli {
    /// Emit JSON (default for single records)
    #[arg(long, global = true, conflicts_with = "csv")]
    json: bool,
    /// Emit CSV (default for sweeps)
    #[arg(long, global = true)]
    csv: bool,
    /// Clearing residual tolerance
    #[arg(long, global = true, default_value_t = DEFAULT_TOLERANCE)]
    tol: f64,
    /// Seed for randomized commands
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for simulation; output does not depend on it
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// How negative stakes enter the clearing balance
    #[arg(long, global = true, value_enum, default_value_t = Convention::StakedDollars)]
    convention: Convention,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Convention {
    StakedDollars,
    ContractBalanced,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    Bias,
    Fraction,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Optimal fraction of wealth to stake
    Fraction {
        #[arg(long)]
        q: f64,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Clearing price of a population file
    Clear { file: PathBuf },
    /// Binomial tail and its exponential bounds
    Bounds {
        #[arg(long = "N")]
        n: f64,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        k: f64,
    },
    /// Up-step count at which log wealth reaches Q
    Kq {
        #[arg(long)]
        f: f64,
        #[arg(long = "N")]
        n: f64,
        #[arg(long = "Q")]
        q: f64,
        /// Also report the probability of ending below Q
        #[arg(long)]
        p: Option<f64>,
    },
    /// Growth loss from a misestimated bias or fraction
    Sensitivity(SensitivityArgs),
    /// Monte Carlo simulation of repeated even-odds bets
    Simulate(SimulateArgs),
    /// Evaluate a command over a one-parameter grid from a JSON file
    Sweep { file: PathBuf },
}

#[derive(Debug, Args)]
struct SensitivityArgs {
    #[arg(long, value_enum)]
    mode: Mode,
    #[arg(long)]
    p: f64,
    #[arg(long)]
    eps: f64,
    #[arg(long = "N", required_if_eq("mode", "bias"))]
    n: Option<f64>,
    #[arg(long, required_if_eq("mode", "bias"))]
    k: Option<f64>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long = "N")]
    n: f64,
    #[arg(long)]
    p: f64,
    #[arg(long, required_unless_present = "strategies")]
    f: Option<f64>,
    #[arg(long = "Q")]
    q: Option<f64>,
    #[arg(long)]
    paths: f64,
    /// Compare several fractions on common random numbers
    #[arg(long, value_delimiter = ',', conflicts_with = "f")]
    strategies: Option<Vec<f64>>,
}

fn execute(cli: &Cli) -> CliResult<(Vec<Record>, bool)> {
    if !(cli.tol.is_finite() && cli.tol > 0.0) {
        return Err(CliError::input("--tol must be positive"));
    }
    if cli.threads == Some(0) {
        return Err(CliError::input("--threads must be at least 1"));
    }
    let one = |r: CliResult<Record>| r.map(|r| (vec![r], false));
    match &cli.command {
        Command::Fraction { q, p, alpha } => {
            one(commands::fraction(&Params::new().with("q", Some(*q)).with("p", Some(*p)).with("alpha", *alpha)))
        }
        Command::Clear { file } => {
            let pop = population::read(file)?;
            let convention = match cli.convention {
                Convention::StakedDollars => ExposureConvention::StakedDollars,
                Convention::ContractBalanced => ExposureConvention::ContractBalanced,
            };
            one(commands::clear(&pop, cli.tol, convention))
        }
        Command::Bounds { n, p, k } => {
            one(commands::bounds(&Params::new().with("N", Some(*n)).with("p", Some(*p)).with("k", Some(*k))))
        }
        Command::Kq { f, n, q, p } => {
            one(commands::kq(&Params::new().with("f", Some(*f)).with("N", Some(*n)).with("Q", Some(*q)).with("p", *p)))
        }
        Command::Sensitivity(a) => {
            let params = Params::new().with("p", Some(a.p)).with("eps", Some(a.eps)).with("N", a.n).with("k", a.k);
            one(match a.mode {
                Mode::Bias => commands::sensitivity_bias(&params),
                Mode::Fraction => commands::sensitivity_fraction(&params),
            })
        }
        Command::Simulate(a) => {
            let seed = cli.seed.ok_or_else(|| CliError::input("simulate requires --seed"))?;
            let params = Params::new()
                .with("N", Some(a.n))
                .with("p", Some(a.p))
                .with("f", a.f)
                .with("Q", a.q)
                .with("paths", Some(a.paths));
            match &a.strategies {
                Some(fs) => commands::compare(&params, seed, fs).map(|r| (r, true)),
                None => one(commands::simulate(&params, seed, cli.threads)),
            }
        }
        Command::Sweep { file } => {
            let text = std::fs::read_to_string(file).map_err(|e| CliError::input(format!("{}: {e}", file.display())))?;
            let spec = sweep::SweepSpec::parse(&text)?;
            sweep::run(&spec, cli.seed, cli.threads).map(|r| (r, true))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT as u8 } else { 0 });
        }
    };
    let sweeping = matches!(cli.command, Command::Sweep { .. });
    let format = if cli.csv || (sweeping && !cli.json) { Format::Csv } else { Format::Json };
    match execute(&cli) {
        Ok((records, as_array)) => {
            let text = render(&records, format, as_array);
            let mut out = std::io::stdout().lock();
            if out.write_all(text.as_bytes()).and_then(|_| out.flush()).is_err() {
                return ExitCode::from(EXIT_INPUT as u8);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}
