//! Running an experiment and writing its result table.

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use svqmc::qmc::{generate_net, mc_estimate, rqmc_estimate, EstimatorReport};

use crate::config::{ExperimentConfig, SchemeName};
use crate::error::CliError;

/// One `(scheme, n)` cell of the result table.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub scheme: SchemeName,
    pub n: usize,
    pub q: usize,
    pub estimate: f64,
    pub std_error: f64,
    pub wall_ms: f64,
    pub replicate_means: Vec<f64>,
    pub error: Option<String>,
}

/// Per-row seed so that rows do not depend on each other or on scheduling.
fn row_seed(seed: u64, scheme: SchemeName, n: usize) -> u64 {
    let mut z = seed ^ ((scheme as u64) << 56) ^ (n as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn estimate(config: &ExperimentConfig, scheme: SchemeName, n: usize, seed: u64) -> Result<EstimatorReport, CliError> {
    let f = config.integrand(scheme)?;
    let report = if scheme.is_monte_carlo() {
        mc_estimate(f.as_ref(), n, config.q, seed)?
    } else {
        let net = generate_net(f.dimension(), n.trailing_zeros())?;
        rqmc_estimate(f.as_ref(), &net, config.q, seed)?
    };
    Ok(report)
}

/// Evaluates every `(scheme, n)` pair; rows come back sorted by scheme
/// name and then `n`. A failing row is reported with NaN values and the
/// run continues.
pub fn run_experiment(config: &ExperimentConfig) -> Vec<Row> {
    let mut cells: Vec<(SchemeName, usize)> = config
        .schemes
        .iter()
        .flat_map(|&s| config.n.iter().map(move |&n| (s, n)))
        .collect();
    cells.sort_by_key(|&(s, n)| (s.as_str(), n));
    cells.dedup();
    cells
        .par_iter()
        .map(|&(scheme, n)| {
            let start = Instant::now();
            let result = estimate(config, scheme, n, row_seed(config.seed, scheme, n));
            let wall_ms = start.elapsed().as_secs_f64() * 1e3;
            match result {
                Ok(r) => Row {
                    scheme,
                    n,
                    q: r.q,
                    estimate: r.estimate,
                    std_error: r.std_error,
                    wall_ms,
                    replicate_means: r.replicate_means,
                    error: None,
                },
                Err(e) => Row {
                    scheme,
                    n,
                    q: config.q,
                    estimate: f64::NAN,
                    std_error: f64::NAN,
                    wall_ms,
                    replicate_means: Vec::new(),
                    error: Some(e.to_string()),
                },
            }
        })
        .collect()
}

fn write_err(path: &Path) -> impl Fn(csv::Error) -> CliError + '_ {
    move |e| CliError::Write {
        path: path.to_path_buf(),
        source: std::io::Error::other(e),
    }
}

/// Writes `scheme,n,q,estimate,std_error,wall_ms`; with `timing` off the
/// time column is zero so that output is reproducible byte for byte.
pub fn write_results(path: &Path, rows: &[Row], timing: bool) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(write_err(path))?;
    w.write_record(["scheme", "n", "q", "estimate", "std_error", "wall_ms"])
        .map_err(write_err(path))?;
    for r in rows {
        let wall = if timing {
            format!("{:.3}", r.wall_ms)
        } else {
            "0".to_string()
        };
        w.write_record([
            r.scheme.as_str().to_string(),
            r.n.to_string(),
            r.q.to_string(),
            r.estimate.to_string(),
            r.std_error.to_string(),
            wall,
        ])
        .map_err(write_err(path))?;
    }
    w.flush().map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes `scheme,n,replicate,mean`, one line per replicate mean.
pub fn write_replicates(path: &Path, rows: &[Row]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(write_err(path))?;
    w.write_record(["scheme", "n", "replicate", "mean"])
        .map_err(write_err(path))?;
    for r in rows {
        for (i, m) in r.replicate_means.iter().enumerate() {
            w.write_record([
                r.scheme.as_str().to_string(),
                r.n.to_string(),
                i.to_string(),
                m.to_string(),
            ])
            .map_err(write_err(path))?;
        }
    }
    w.flush().map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}
