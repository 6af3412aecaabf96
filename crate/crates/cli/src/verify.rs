//! Checking a result table against expectations.

use std::path::Path;

use serde::Deserialize;

use crate::config::SchemeName;
use crate::error::{usage, CliError};

/// A row read back from a results file.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub scheme: String,
    pub n: usize,
    pub q: usize,
    pub estimate: f64,
    pub std_error: f64,
}

pub fn read_results(path: &Path) -> Result<Vec<ResultRow>, CliError> {
    let bad = |message: String| CliError::Results {
        path: path.to_path_buf(),
        message,
    };
    let file = std::fs::File::open(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::Reader::from_reader(file);
    let headers = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| bad(format!("missing column {name}")))
    };
    let (cs, cn, cq, ce, cse) = (
        col("scheme")?,
        col("n")?,
        col("q")?,
        col("estimate")?,
        col("std_error")?,
    );
    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| bad(e.to_string()))?;
        let get = |i: usize| record.get(i).unwrap_or("");
        let num = |i: usize| {
            get(i)
                .parse::<f64>()
                .map_err(|_| bad(format!("row {}: bad number {:?}", line + 1, get(i))))
        };
        let int = |i: usize| {
            get(i)
                .parse::<usize>()
                .map_err(|_| bad(format!("row {}: bad integer {:?}", line + 1, get(i))))
        };
        rows.push(ResultRow {
            scheme: get(cs).to_string(),
            n: int(cn)?,
            q: int(cq)?,
            estimate: num(ce)?,
            std_error: num(cse)?,
        });
    }
    Ok(rows)
}

/// One expectation on a results table.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Expectation {
    /// `|estimate - reference| <= k * sqrt(se^2 + reference_std_error^2)`.
    Value {
        scheme: String,
        n: usize,
        reference: f64,
        #[serde(default = "three")]
        k: f64,
        #[serde(default)]
        reference_std_error: f64,
    },
    /// `target / factor <= se <= target * factor`.
    StdError {
        scheme: String,
        n: usize,
        target: f64,
        #[serde(default = "two")]
        factor: f64,
    },
    /// Bounds on `se(numerator) / se(denominator)` at equal `n`.
    Ratio {
        numerator: String,
        denominator: String,
        n: usize,
        min: Option<f64>,
        max: Option<f64>,
    },
}

fn three() -> f64 {
    3.0
}

fn two() -> f64 {
    2.0
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExpectationFile {
    #[serde(default)]
    expect: Vec<Expectation>,
}

pub fn read_expectations(path: &Path) -> Result<Vec<Expectation>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let file: ExpectationFile = toml::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    for e in &file.expect {
        let schemes: Vec<&str> = match e {
            Expectation::Value { scheme, .. } | Expectation::StdError { scheme, .. } => vec![scheme],
            Expectation::Ratio {
                numerator, denominator, ..
            } => vec![numerator, denominator],
        };
        if let Some(s) = schemes.iter().find(|s| SchemeName::parse(s).is_none()) {
            return Err(usage(format!("{}: unknown scheme {s:?}", path.display())));
        }
    }
    Ok(file.expect)
}

/// Outcome of one check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub passed: bool,
    pub description: String,
}

fn find<'a>(rows: &'a [ResultRow], scheme: &str, n: usize) -> Option<&'a ResultRow> {
    rows.iter().find(|r| r.scheme == scheme && r.n == n)
}

pub fn check(rows: &[ResultRow], e: &Expectation) -> CheckResult {
    let missing = |scheme: &str, n: usize| CheckResult {
        passed: false,
        description: format!("no result for {scheme} at n={n}"),
    };
    match e {
        Expectation::Value {
            scheme,
            n,
            reference,
            k,
            reference_std_error,
        } => {
            let Some(r) = find(rows, scheme, *n) else {
                return missing(scheme, *n);
            };
            let tol = k * r.std_error.hypot(*reference_std_error);
            let diff = (r.estimate - reference).abs();
            CheckResult {
                passed: diff <= tol,
                description: format!(
                    "{scheme} n={n}: |{} - {reference}| = {diff:.3e} <= {tol:.3e}",
                    r.estimate
                ),
            }
        }
        Expectation::StdError {
            scheme,
            n,
            target,
            factor,
        } => {
            let Some(r) = find(rows, scheme, *n) else {
                return missing(scheme, *n);
            };
            let (lo, hi) = (target / factor, target * factor);
            CheckResult {
                passed: r.std_error >= lo && r.std_error <= hi,
                description: format!("{scheme} n={n}: std error {:.3e} in [{lo:.3e}, {hi:.3e}]", r.std_error),
            }
        }
        Expectation::Ratio {
            numerator,
            denominator,
            n,
            min,
            max,
        } => {
            let Some(a) = find(rows, numerator, *n) else {
                return missing(numerator, *n);
            };
            let Some(b) = find(rows, denominator, *n) else {
                return missing(denominator, *n);
            };
            let ratio = a.std_error / b.std_error;
            let passed = min.is_none_or(|m| ratio >= m) && max.is_none_or(|m| ratio <= m);
            CheckResult {
                passed,
                description: format!(
                    "n={n}: se({numerator})/se({denominator}) = {ratio:.3} within [{}, {}]",
                    min.map_or("-inf".into(), |m| m.to_string()),
                    max.map_or("inf".into(), |m| m.to_string())
                ),
            }
        }
    }
}

/// Exact comparison against a previously written results file.
pub fn check_golden(rows: &[ResultRow], golden: &[ResultRow]) -> Vec<CheckResult> {
    golden
        .iter()
        .map(|g| match find(rows, &g.scheme, g.n) {
            None => CheckResult {
                passed: false,
                description: format!("no result for {} at n={}", g.scheme, g.n),
            },
            Some(r) => CheckResult {
                passed: r.estimate.to_bits() == g.estimate.to_bits()
                    && r.std_error.to_bits() == g.std_error.to_bits()
                    && r.q == g.q,
                description: format!("{} n={}: matches golden row", g.scheme, g.n),
            },
        })
        .collect()
}
