//! Experiment runner behind the `svqmc` command.

pub mod config;
pub mod error;
pub mod run;
pub mod verify;

use std::path::{Path, PathBuf};

pub use config::ExperimentConfig;
pub use error::CliError;

/// Options of the `price` command.
#[derive(Debug, Clone, Default)]
pub struct PriceOptions {
    pub config: PathBuf,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub emit_replicates: bool,
    pub timing: bool,
}

/// Runs a configuration file and writes its result table; returns the
/// path written.
pub fn price(opts: &PriceOptions) -> Result<PathBuf, CliError> {
    let mut config = ExperimentConfig::from_path(&opts.config)?;
    if let Some(seed) = opts.seed {
        config.seed = seed;
    }
    let out = opts
        .out
        .clone()
        .or_else(|| config.output.clone())
        .unwrap_or_else(|| PathBuf::from("results.csv"));
    let rows = run::run_experiment(&config);
    for r in &rows {
        match &r.error {
            Some(e) => eprintln!("{} n={}: failed: {e}", r.scheme.as_str(), r.n),
            None => eprintln!(
                "{} n={}: {:.6} ({:.6}) in {:.0} ms",
                r.scheme.as_str(),
                r.n,
                r.estimate,
                r.std_error,
                r.wall_ms
            ),
        }
    }
    run::write_results(&out, &rows, opts.timing)?;
    if opts.emit_replicates {
        run::write_replicates(&replicates_path(&out), &rows)?;
    }
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    if failed > 0 {
        return Err(CliError::RowsFailed(failed));
    }
    Ok(out)
}

/// `results.csv` -> `results.replicates.csv`.
pub fn replicates_path(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    out.with_file_name(format!("{stem}.replicates.csv"))
}

/// Checks a results file; a `.csv` expectation file is treated as a golden
/// table that must match exactly.
pub fn verify(results: &Path, expect: &Path) -> Result<Vec<verify::CheckResult>, CliError> {
    let rows = verify::read_results(results)?;
    let checks = if expect.extension().is_some_and(|e| e == "csv") {
        verify::check_golden(&rows, &verify::read_results(expect)?)
    } else {
        verify::read_expectations(expect)?
            .iter()
            .map(|e| verify::check(&rows, e))
            .collect()
    };
    Ok(checks)
}
