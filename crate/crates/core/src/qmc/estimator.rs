use super::scramble::{clamp_unit, ScrambleState};
use super::DigitalNet;
use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Replicate count used when none is given.
pub const DEFAULT_REPLICATES: usize = 30;

/// A function on the unit cube, possibly vector valued.
pub trait Integrand: Sync {
    fn dimension(&self) -> usize;

    fn outputs(&self) -> usize {
        1
    }

    /// Writes `outputs()` values for the point `u` into `out`.
    fn evaluate(&self, u: &[f64], out: &mut [f64]) -> Result<()>;
}

/// Adapts a scalar closure to [`Integrand`].
pub struct FnIntegrand<F> {
    dimension: usize,
    f: F,
}

impl<F: Fn(&[f64]) -> f64 + Sync> FnIntegrand<F> {
    pub fn new(dimension: usize, f: F) -> Self {
        Self { dimension, f }
    }
}

impl<F: Fn(&[f64]) -> f64 + Sync> Integrand for FnIntegrand<F> {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn evaluate(&self, u: &[f64], out: &mut [f64]) -> Result<()> {
        out[0] = (self.f)(u);
        Ok(())
    }
}

/// Result of a replicated estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorReport {
    pub estimate: f64,
    /// Per-replicate means; for plain MC these are the means of the `q` batches.
    pub replicate_means: Vec<f64>,
    pub std_error: f64,
    /// Points per replicate.
    pub n: usize,
    /// Number of replicates.
    pub q: usize,
}

impl EstimatorReport {
    /// Report whose standard error is the spread of the replicate means.
    pub fn from_replicates(replicate_means: Vec<f64>, n: usize) -> Self {
        let q = replicate_means.len();
        let estimate = replicate_means.iter().sum::<f64>() / q as f64;
        let ss: f64 = replicate_means.iter().map(|m| (m - estimate).powi(2)).sum();
        let std_error = if q > 1 { (ss / (q * (q - 1)) as f64).sqrt() } else { 0.0 };
        Self {
            estimate,
            replicate_means,
            std_error,
            n,
            q,
        }
    }

    /// Half-width `z * std_error` interval.
    pub fn interval(&self, z: f64) -> (f64, f64) {
        (self.estimate - z * self.std_error, self.estimate + z * self.std_error)
    }
}

fn check_sizes(f: &dyn Integrand, dim: usize, q: usize) -> Result<()> {
    if q < 2 {
        return Err(Error::Config(format!("need at least 2 replicates, got {q}")));
    }
    if f.dimension() != dim {
        return Err(Error::Config(format!(
            "integrand dimension {} does not match point dimension {dim}",
            f.dimension()
        )));
    }
    if f.outputs() == 0 {
        return Err(Error::Config("integrand has no outputs".into()));
    }
    Ok(())
}

fn check_finite(values: &[f64], index: usize) -> Result<()> {
    match values.iter().find(|v| !v.is_finite()) {
        Some(&value) => Err(Error::Evaluation { index, value }),
        None => Ok(()),
    }
}

fn single(mut reports: Vec<EstimatorReport>) -> EstimatorReport {
    reports.swap_remove(0)
}

/// Randomized QMC estimate of a scalar integrand with `q` independently
/// scrambled copies of `net`.
pub fn rqmc_estimate(f: &dyn Integrand, net: &DigitalNet, q: usize, seed: u64) -> Result<EstimatorReport> {
    rqmc_estimate_all(f, net, q, seed).map(single)
}

/// Randomized QMC estimates of every output of `f`, sharing the same points.
pub fn rqmc_estimate_all(f: &dyn Integrand, net: &DigitalNet, q: usize, seed: u64) -> Result<Vec<EstimatorReport>> {
    check_sizes(f, net.dimension(), q)?;
    let k = f.outputs();
    let n = net.len();
    let sums: Vec<Vec<f64>> = (0..q)
        .into_par_iter()
        .map(|r| {
            let state = ScrambleState::new(seed, r as u64);
            let mut u = vec![0.0; net.dimension()];
            let mut out = vec![0.0; k];
            let mut acc = vec![0.0; k];
            net.for_each_bits(|i, bits| {
                state.apply_point(bits, &mut u);
                f.evaluate(&u, &mut out)?;
                check_finite(&out, i)?;
                for (a, o) in acc.iter_mut().zip(&out) {
                    *a += o;
                }
                Ok(())
            })?;
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    Ok((0..k)
        .map(|j| EstimatorReport::from_replicates(sums.iter().map(|s| s[j] / n as f64).collect(), n))
        .collect())
}

/// Plain Monte Carlo estimate of a scalar integrand from `q * n` i.i.d.
/// uniform points, drawn in `q` batches of `n`.
pub fn mc_estimate(f: &dyn Integrand, n: usize, q: usize, seed: u64) -> Result<EstimatorReport> {
    mc_estimate_all(f, n, q, seed).map(single)
}

/// Plain Monte Carlo estimates of every output of `f`.
///
/// The standard error uses the per-point sample variance over all `q * n`
/// evaluations; `replicate_means` holds the batch means.
pub fn mc_estimate_all(f: &dyn Integrand, n: usize, q: usize, seed: u64) -> Result<Vec<EstimatorReport>> {
    check_sizes(f, f.dimension(), q)?;
    if n == 0 {
        return Err(Error::Config("need at least one point per batch".into()));
    }
    let k = f.outputs();
    let d = f.dimension();
    // Per batch: (mean, sum of squared deviations) per output.
    let batches: Vec<Vec<(f64, f64)>> = (0..q)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let mut u = vec![0.0; d];
            let mut out = vec![0.0; k];
            let mut stats = vec![(0.0, 0.0); k];
            for i in 0..n {
                for x in u.iter_mut() {
                    *x = clamp_unit(rng.gen::<f64>());
                }
                f.evaluate(&u, &mut out)?;
                check_finite(&out, b * n + i)?;
                for ((mean, m2), &o) in stats.iter_mut().zip(&out) {
                    let delta = o - *mean;
                    *mean += delta / (i + 1) as f64;
                    *m2 += delta * (o - *mean);
                }
            }
            Ok(stats)
        })
        .collect::<Result<_>>()?;
    let total = (n * q) as f64;
    Ok((0..k)
        .map(|j| {
            let means: Vec<f64> = batches.iter().map(|s| s[j].0).collect();
            let estimate = means.iter().sum::<f64>() / q as f64;
            let ss: f64 = batches
                .iter()
                .map(|s| s[j].1 + n as f64 * (s[j].0 - estimate).powi(2))
                .sum();
            let std_error = if total > 1.0 {
                (ss / (total * (total - 1.0))).sqrt()
            } else {
                0.0
            };
            EstimatorReport {
                estimate,
                replicate_means: means,
                std_error,
                n,
                q,
            }
        })
        .collect())
}
