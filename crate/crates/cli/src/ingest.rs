//! CSV ingestion for count datasets, lattice severities and regression data.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use ptex_core::{CountDataset, DiscreteSeverity, RegressionData};

use crate::error::{CliError, CliResult};

/// Name of the embedded seizure dataset.
pub const SEIZURE: &str = "seizure";

/// Embedded dataset by name, or a CSV file.
pub fn load_counts(source: &str) -> CliResult<CountDataset> {
    if source == SEIZURE {
        return Ok(CountDataset::seizure());
    }
    let file = open(source)?;
    parse_counts(file).map_err(|e| with_path(source, e))
}

fn open(path: &str) -> CliResult<File> {
    File::open(Path::new(path)).map_err(|e| CliError::data(format!("{path}: {e}")))
}

fn with_path(path: &str, e: CliError) -> CliError {
    match e {
        CliError::Data(m) => CliError::Data(format!("{path}: {m}")),
        other => other,
    }
}

fn reader<R: Read>(input: R, headers: bool) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(headers)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(input)
}

fn line_of(rec: &csv::StringRecord) -> u64 {
    rec.position().map_or(0, |p| p.line())
}

fn csv_error(e: csv::Error) -> CliError {
    let line = e.position().map(|p| format!("line {}: ", p.line())).unwrap_or_default();
    CliError::data(format!("{line}{e}"))
}

fn parse_count(field: &str, line: u64, what: &str) -> CliResult<u64> {
    field
        .parse::<u64>()
        .map_err(|_| CliError::data(format!("line {line}: {what} '{field}' is not a non-negative integer")))
}

/// `value,frequency` rows, or one raw count per line; an optional header
/// line is skipped.
pub fn parse_counts<R: Read>(input: R) -> CliResult<CountDataset> {
    let mut pairs = Vec::new();
    let mut width = None;
    for (k, rec) in reader(input, false).records().enumerate() {
        let rec = rec.map_err(csv_error)?;
        let line = line_of(&rec);
        if rec.iter().all(str::is_empty) {
            continue;
        }
        if k == 0 && rec.get(0).is_some_and(|f| f.parse::<f64>().is_err()) {
            continue;
        }
        match (rec.len(), width) {
            (1 | 2, None) => width = Some(rec.len()),
            (n, Some(w)) if n == w => {}
            (n, _) => {
                return Err(CliError::data(format!(
                    "line {line}: expected {} field(s), found {n}",
                    width.unwrap_or(2)
                )))
            }
        }
        let value = parse_count(&rec[0], line, "value")?;
        let freq = if rec.len() == 2 { parse_count(&rec[1], line, "frequency")? } else { 1 };
        pairs.push((value, freq));
    }
    if pairs.is_empty() {
        return Err(CliError::data("no observations"));
    }
    Ok(CountDataset::from_pairs(pairs)?)
}

/// `value,probability` rows with values `>= 1`; optional header.
pub fn load_severity(path: &str) -> CliResult<DiscreteSeverity> {
    parse_severity(open(path)?).map_err(|e| with_path(path, e))
}

pub fn parse_severity<R: Read>(input: R) -> CliResult<DiscreteSeverity> {
    let mut pairs = Vec::new();
    for (k, rec) in reader(input, false).records().enumerate() {
        let rec = rec.map_err(csv_error)?;
        let line = line_of(&rec);
        if rec.iter().all(str::is_empty) {
            continue;
        }
        if k == 0 && rec.get(0).is_some_and(|f| f.parse::<f64>().is_err()) {
            continue;
        }
        if rec.len() != 2 {
            return Err(CliError::data(format!("line {line}: expected value,probability")));
        }
        let value = parse_count(&rec[0], line, "value")?;
        let prob: f64 = rec[1]
            .parse()
            .map_err(|_| CliError::data(format!("line {line}: probability '{}' is not a number", &rec[1])))?;
        pairs.push((value, prob));
    }
    if pairs.is_empty() {
        return Err(CliError::data("severity file has no rows"));
    }
    Ok(DiscreteSeverity::from_pairs(&pairs)?)
}

/// Header row required; an intercept is prepended to the named covariates.
pub fn load_regression(path: &str, response: &str, covariates: &[String]) -> CliResult<RegressionData> {
    parse_regression(open(path)?, response, covariates).map_err(|e| with_path(path, e))
}

pub fn parse_regression<R: Read>(input: R, response: &str, covariates: &[String]) -> CliResult<RegressionData> {
    let mut rdr = reader(input, true);
    let header = rdr.headers().map_err(csv_error)?.clone();
    let column = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::data(format!("no column named '{name}'")))
    };
    let yi = column(response)?;
    let xi: Vec<usize> = covariates.iter().map(|c| column(c)).collect::<CliResult<_>>()?;

    let mut y = Vec::new();
    let mut cols: Vec<Vec<f64>> = vec![Vec::new(); xi.len()];
    for rec in rdr.records() {
        let rec = rec.map_err(csv_error)?;
        let line = line_of(&rec);
        let cell = |j: usize| -> CliResult<f64> {
            let raw = rec.get(j).unwrap_or("");
            raw.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| CliError::data(format!("line {line}: column '{}' has non-numeric value '{raw}'", &header[j])))
        };
        let v = cell(yi)?;
        if v < 0.0 || v.fract() != 0.0 || v > u64::MAX as f64 {
            return Err(CliError::data(format!("line {line}: response {v} is not a non-negative integer")));
        }
        y.push(v as u64);
        for (c, &j) in cols.iter_mut().zip(&xi) {
            c.push(cell(j)?);
        }
    }
    let named: Vec<(String, Vec<f64>)> = covariates.iter().cloned().zip(cols).collect();
    Ok(RegressionData::with_intercept(&named, y)?)
}
