//! Heston dynamics with lognormal jumps in the price on a Poisson clock.
//!
//! Jumps are simulated through counts and conditionally normal sums of log
//! jump sizes, one pair per date, so the dimension stays fixed. Layout per
//! path with `h` dates: the `3h` diffusion coordinates of [`crate::paths`],
//! then `h` count coordinates and `h` jump-sum coordinates (both by visiting
//! position), then, for the bridge scheme, the `2h` variance-bridge
//! coordinates. That is `5h` coordinates naive and `7h` bridge.

use crate::distributions::{binomial_quantile, norm_inv, poisson_quantile};
use crate::error::{check_probability, Error, Result};
use crate::heston::{sample_variance_step, ConditionedLogPriceLaw, HestonParams};
use crate::paths::{BridgeSchedule, PathBuilder, PathGrid, Scheme};

/// Heston parameters plus jump intensity `lambda`, mean relative jump
/// `mu_bar` and log-jump standard deviation `sigma_s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvjParams {
    pub heston: HestonParams,
    pub lambda: f64,
    pub mu_bar: f64,
    pub sigma_s: f64,
}

impl SvjParams {
    pub fn new(heston: HestonParams, lambda: f64, mu_bar: f64, sigma_s: f64) -> Result<Self> {
        let p = Self {
            heston,
            lambda,
            mu_bar,
            sigma_s,
        };
        p.validate()?;
        Ok(p)
    }

    /// Parameters given the mean `mu_s` of the log jump size.
    pub fn from_log_mean(heston: HestonParams, lambda: f64, mu_s: f64, sigma_s: f64) -> Result<Self> {
        Self::new(heston, lambda, (mu_s + 0.5 * sigma_s * sigma_s).exp_m1(), sigma_s)
    }

    /// Heston reference parameters with `lambda = 0.11`, log-jump mean
    /// `-0.1391` and log-jump volatility `0.15`.
    pub fn reference() -> Self {
        Self::from_log_mean(HestonParams::reference(), 0.11, -0.1391, 0.15).expect("valid reference parameters")
    }

    pub fn validate(&self) -> Result<()> {
        self.heston.validate()?;
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::Config(format!(
                "jump intensity must be >= 0, got {}",
                self.lambda
            )));
        }
        if !(self.mu_bar > -1.0 && self.mu_bar.is_finite()) {
            return Err(Error::Config(format!(
                "mean relative jump must exceed -1, got {}",
                self.mu_bar
            )));
        }
        if !(self.sigma_s >= 0.0 && self.sigma_s.is_finite()) {
            return Err(Error::Config(format!(
                "jump volatility must be >= 0, got {}",
                self.sigma_s
            )));
        }
        Ok(())
    }

    /// Mean of the log jump size, `log(1 + mu_bar) - sigma_s^2 / 2`.
    pub fn mu_s(&self) -> f64 {
        self.mu_bar.ln_1p() - 0.5 * self.sigma_s * self.sigma_s
    }

    /// Compensated drift `r - lambda mu_bar` of the diffusion part.
    pub fn drift(&self) -> f64 {
        self.heston.r - self.lambda * self.mu_bar
    }
}

/// Jump counts and cumulative log-jump sums at each date.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpPath {
    pub counts: Vec<u64>,
    pub log_sums: Vec<f64>,
}

/// Exact `S_T` from five coordinates: variance, integrated variance,
/// price normal, jump count and jump-sum normal.
pub fn svj_terminal(params: &SvjParams, expiry: f64, u: &[f64]) -> Result<f64> {
    if u.len() < 5 {
        return Err(Error::Config("jump terminal draw needs 5 coordinates".into()));
    }
    let h = &params.heston;
    let (_, iv, z) = sample_variance_step(h, h.v0, expiry, u[0], u[1])?;
    let law = ConditionedLogPriceLaw::new(h.s0, params.drift(), expiry, h.rho, iv, z);
    let diffusion = law.price_from_normal(norm_inv(u[2]));
    let n = poisson_quantile(params.lambda * expiry, u[3])?;
    let jumps = jump_increment(params, n, u[4]);
    Ok(diffusion * jumps.exp())
}

/// Sum of `n` log jump sizes from its normal quantile `p`.
fn jump_increment(params: &SvjParams, n: u64, p: f64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    n * params.mu_s() + n.sqrt() * params.sigma_s * norm_inv(p)
}

/// `N_u` given `N_s` and `N_t` for `s < u < t`: `N_u - N_s` is binomial with
/// `N_t - N_s` trials and success probability `(u - s) / (t - s)`.
pub fn poisson_bridge_count(n_s: u64, n_t: u64, s: f64, u_time: f64, t: f64, p: f64) -> Result<u64> {
    if n_t < n_s {
        return Err(Error::Domain(format!("counts must not decrease: {n_s} > {n_t}")));
    }
    if !(s < u_time && u_time < t) {
        return Err(Error::Domain(format!("bridge time {u_time} outside ({s}, {t})")));
    }
    Ok(n_s + binomial_quantile(n_t - n_s, (u_time - s) / (t - s), p)?)
}

/// Cumulative log-jump sum at an interior date given its neighbours and the
/// counts `(N_l, N_i, N_r)`: conditionally normal, deterministic when no
/// jumps occur over the span.
pub fn jumpsum_bridge(mu_s: f64, sigma_s: f64, j_l: f64, j_r: f64, counts: (u64, u64, u64), p: f64) -> Result<f64> {
    check_probability(p)?;
    let (n_l, n_i, n_r) = counts;
    if !(n_l <= n_i && n_i <= n_r) {
        return Err(Error::Domain(format!("counts {counts:?} are not ordered")));
    }
    if n_i == n_l {
        return Ok(j_l);
    }
    if n_i == n_r {
        return Ok(j_r);
    }
    let (a, b) = ((n_i - n_l) as f64, (n_r - n_l) as f64);
    let frac = a / b;
    let mean = j_l + a * mu_s + frac * (j_r - j_l - b * mu_s);
    let var = sigma_s * sigma_s * a * (1.0 - frac);
    Ok(mean + var.sqrt() * norm_inv(p))
}

/// Builds jump-diffusion paths; see the module docs for the layout.
#[derive(Debug, Clone)]
pub struct SvjPathBuilder {
    params: SvjParams,
    diffusion: PathBuilder,
}

impl SvjPathBuilder {
    pub fn new(params: SvjParams, times: Vec<f64>, scheme: Scheme) -> Result<Self> {
        params.validate()?;
        let diffusion = PathBuilder::new(params.heston, times, scheme)?.with_drift(params.drift());
        Ok(Self { params, diffusion })
    }

    pub fn params(&self) -> &SvjParams {
        &self.params
    }

    pub fn diffusion(&self) -> &PathBuilder {
        &self.diffusion
    }

    pub fn dates(&self) -> usize {
        self.diffusion.dates()
    }

    pub fn dimension(&self) -> usize {
        self.diffusion.dimension() + 2 * self.dates()
    }

    /// Counts and log-jump sums from coordinates indexed by visiting position.
    pub fn jumps(&self, u_count: &[f64], u_sum: &[f64]) -> Result<JumpPath> {
        let h = self.dates();
        let times = self.diffusion.times();
        let schedule: &BridgeSchedule = self.diffusion.schedule();
        let time = |k: usize| if k == 0 { 0.0 } else { times[k - 1] };
        let mu_s = self.params.mu_s();
        let mut counts = vec![0u64; h + 1];
        let mut sums = vec![0.0; h + 1];
        for p in 0..h {
            let k = schedule.date(p);
            match schedule.neighbours(p) {
                (l, None) => {
                    let n = poisson_quantile(self.params.lambda * (time(k) - time(l)), u_count[p])?;
                    counts[k] = counts[l] + n;
                    sums[k] = sums[l] + jump_increment(&self.params, n, u_sum[p]);
                }
                (l, Some(r)) => {
                    counts[k] = poisson_bridge_count(counts[l], counts[r], time(l), time(k), time(r), u_count[p])?;
                    sums[k] = jumpsum_bridge(
                        mu_s,
                        self.params.sigma_s,
                        sums[l],
                        sums[r],
                        (counts[l], counts[k], counts[r]),
                        u_sum[p],
                    )?;
                }
            }
        }
        counts.remove(0);
        sums.remove(0);
        Ok(JumpPath { counts, log_sums: sums })
    }

    /// Path with prices including jumps, and the jump path itself.
    pub fn build(&self, u: &[f64]) -> Result<(PathGrid, JumpPath)> {
        let h = self.dates();
        if u.len() < self.dimension() {
            return Err(Error::Config(format!(
                "jump path needs {} coordinates, got {}",
                self.dimension(),
                u.len()
            )));
        }
        let aux = if self.diffusion.scheme() == Scheme::Bridge {
            &u[5 * h..7 * h]
        } else {
            &[][..]
        };
        let mut grid = self.diffusion.variance_part(&u[..3 * h], aux)?;
        let normals: Vec<f64> = (0..h).map(|p| norm_inv(u[3 * p + 2])).collect();
        self.diffusion.fill_prices(&mut grid, &normals);
        let jumps = self.jumps(&u[3 * h..4 * h], &u[4 * h..5 * h])?;
        for (s, j) in grid.s.iter_mut().zip(&jumps.log_sums) {
            *s *= j.exp();
        }
        Ok((grid, jumps))
    }
}

/// One jump-diffusion path from `u`.
pub fn build_svj_path(params: &SvjParams, times: &[f64], scheme: Scheme, u: &[f64]) -> Result<(PathGrid, JumpPath)> {
    SvjPathBuilder::new(*params, times.to_vec(), scheme)?.build(u)
}
