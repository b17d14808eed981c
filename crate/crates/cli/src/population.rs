//! Population files: CSV with a `capital,belief` header, or a JSON array of
//! `{"capital": .., "belief": ..}` objects.

use pmkelly::{Investor, MarketPopulation, Probability};
use serde::Deserialize;

use crate::commands::{CliError, CliResult};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Row {
    capital: f64,
    belief: f64,
}

fn investor(row: Row, index: usize) -> CliResult<Investor> {
    let belief = Probability::new(row.belief).map_err(|e| CliError::input(format!("investor {index}: {e}")))?;
    Investor::new(row.capital, belief).map_err(|e| CliError::input(format!("investor {index}: {e}")))
}

pub fn parse(text: &str) -> CliResult<MarketPopulation> {
    let rows: Vec<Row> = if text.trim_start().starts_with('[') {
        serde_json::from_str(text).map_err(|e| CliError::input(format!("population json: {e}")))?
    } else {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let headers = reader.headers().map_err(|e| CliError::input(format!("population csv: {e}")))?;
        if headers.iter().collect::<Vec<_>>() != ["capital", "belief"] {
            return Err(CliError::input("population csv header must be capital,belief"));
        }
        reader
            .deserialize()
            .collect::<Result<_, _>>()
            .map_err(|e| CliError::input(format!("population csv: {e}")))?
    };
    let investors = rows.into_iter().enumerate().map(|(i, r)| investor(r, i)).collect::<CliResult<Vec<_>>>()?;
    Ok(MarketPopulation::new(investors)?)
}

pub fn read(path: &std::path::Path) -> CliResult<MarketPopulation> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    parse(&text)
}
