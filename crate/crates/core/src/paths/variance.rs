use super::schedule::BridgeSchedule;
use super::{validate_times, Scheme};
use crate::distributions::{gamma_quantile, poisson_quantile, BesselDistribution, BesselSeries};
use crate::error::{Error, Result};
use crate::heston::{IntegratedVarianceLaw, SquareRootProcess};

/// Exact sampler of a square-root process on a grid of dates, forward or by
/// squared Bessel bridges, together with the integrated variance over each
/// interval.
#[derive(Debug, Clone)]
pub struct VarianceBridge {
    process: SquareRootProcess,
    v0: f64,
    times: Vec<f64>,
    schedule: BridgeSchedule,
    series: BesselSeries,
}

impl VarianceBridge {
    pub fn new(process: SquareRootProcess, v0: f64, times: Vec<f64>, scheme: Scheme) -> Result<Self> {
        process.validate()?;
        validate_times(&times)?;
        if !(v0 >= 0.0 && v0.is_finite()) {
            return Err(Error::Config(format!("initial variance {v0} must be nonnegative")));
        }
        let schedule = match scheme {
            Scheme::Naive => BridgeSchedule::naive(times.len())?,
            Scheme::Bridge => BridgeSchedule::bridge(times.len())?,
        };
        let series = BesselSeries::new(0.5 * process.dimension() - 1.0)?;
        Ok(Self {
            process,
            v0,
            times,
            schedule,
            series,
        })
    }

    pub fn process(&self) -> &SquareRootProcess {
        &self.process
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn schedule(&self) -> &BridgeSchedule {
        &self.schedule
    }

    fn time(&self, k: usize) -> f64 {
        if k == 0 {
            0.0
        } else {
            self.times[k - 1]
        }
    }

    /// Variance at every date. `u_v` is indexed by visiting position; the
    /// Poisson and Bessel coordinates are only read for bridge steps.
    pub fn sample(&self, u_v: &[f64], u_poisson: &[f64], u_bessel: &[f64]) -> Result<Vec<f64>> {
        self.sample_from(None, u_v, u_poisson, u_bessel)
    }

    /// Bridge-scheme path pinned to `terminal` at the last date; position 0
    /// of the inputs is not read.
    pub fn sample_pinned(&self, terminal: f64, u_v: &[f64], u_poisson: &[f64], u_bessel: &[f64]) -> Result<Vec<f64>> {
        if self.schedule.date(0) != self.times.len() {
            return Err(Error::Unsupported("pinned paths need the bridge order".into()));
        }
        self.sample_from(Some(terminal), u_v, u_poisson, u_bessel)
    }

    fn sample_from(&self, terminal: Option<f64>, u_v: &[f64], u_poisson: &[f64], u_bessel: &[f64]) -> Result<Vec<f64>> {
        let h = self.times.len();
        let mut x = vec![0.0; h + 1];
        x[0] = self.v0;
        let start = match terminal {
            Some(end) => {
                x[h] = end;
                1
            }
            None => 0,
        };
        for p in start..h {
            let k = self.schedule.date(p);
            let (l, r) = self.schedule.neighbours(p);
            x[k] = match r {
                None => self
                    .process
                    .transition_quantile(x[l], self.time(k) - self.time(l), u_v[p])?,
                Some(r) => self.bridge_step(
                    (self.time(l), x[l]),
                    self.time(k),
                    (self.time(r), x[r]),
                    [u_poisson[p], u_bessel[p], u_v[p]],
                )?,
            };
        }
        x.remove(0);
        Ok(x)
    }

    /// Draws `V_{t_i}` given `V_{t_l}` and `V_{t_r}`.
    ///
    /// Under the time change `s = c(t)`, `X_s = e^{kappa t} V_t` is a squared
    /// Bessel process; its bridge value is Gamma distributed with a shape
    /// mixed by a Poisson and a Bessel variable. Everything is written in
    /// terms of `d(a, b) = c(t_b - t_a)` to keep magnitudes moderate.
    fn bridge_step(&self, (tl, vl): (f64, f64), ti: f64, (tr, vr): (f64, f64), u: [f64; 3]) -> Result<f64> {
        let kappa = self.process.kappa;
        let c = |dt: f64| self.process.time_change(dt);
        let (d_li, d_ir, d_lr) = (c(ti - tl), c(tr - ti), c(tr - tl));
        let rate = d_lr / (2.0 * d_li * d_ir);
        let lambda = 0.5
            * ((kappa * (ti - tl)).exp() * d_ir * vl / (d_lr * d_li)
                + (kappa * (tr - ti)).exp() * d_li * vr / (d_lr * d_ir));
        let poisson = if lambda > 0.0 {
            poisson_quantile(lambda, u[0])?
        } else {
            0
        };
        let arg = (0.5 * kappa * (tr - tl)).exp() * (vl * vr).sqrt() / d_lr;
        let bessel = BesselDistribution::new(self.series.order(), arg)?.quantile_with(&self.series, u[1])?;
        let shape = poisson as f64 + 2.0 * bessel as f64 + 0.5 * self.process.dimension();
        gamma_quantile(shape, rate, u[2])
    }

    /// Integrated variance and `int sqrt(V) dW` over each interval; `u_iv`
    /// is indexed by the visiting position of the interval's right end.
    pub fn integrate(&self, v: &[f64], u_iv: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let h = self.times.len();
        let mut iv = vec![0.0; h];
        let mut z = vec![0.0; h];
        let mut prev = self.v0;
        for k in 1..=h {
            let dt = self.time(k) - self.time(k - 1);
            let law = IntegratedVarianceLaw::new(&self.process, prev, v[k - 1], dt)?;
            iv[k - 1] = law.quantile(u_iv[self.schedule.position(k)])?;
            z[k - 1] = self.process.stochastic_integral(prev, v[k - 1], iv[k - 1], dt);
            prev = v[k - 1];
        }
        Ok((iv, z))
    }
}

/// Variance path on `times` (`2^m` dates) by the bridge construction.
/// Inputs are indexed by visiting position.
pub fn sqrt_bridge_path(
    process: &SquareRootProcess,
    v0: f64,
    times: &[f64],
    u_v: &[f64],
    u_poisson: &[f64],
    u_bessel: &[f64],
) -> Result<Vec<f64>> {
    VarianceBridge::new(*process, v0, times.to_vec(), Scheme::Bridge)?.sample(u_v, u_poisson, u_bessel)
}

/// Integrated variance and stochastic integral over each interval of a
/// given variance path; `u_iv[k]` drives the interval ending at `times[k]`.
pub fn fill_integrated_variance(
    process: &SquareRootProcess,
    v0: f64,
    times: &[f64],
    v: &[f64],
    u_iv: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    VarianceBridge::new(*process, v0, times.to_vec(), Scheme::Naive)?.integrate(v, u_iv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bridge_pins_to_endpoints() {
        let p = SquareRootProcess::new(6.21, 0.019, 0.61).unwrap();
        let b = VarianceBridge::new(p, 0.010201, vec![0.5, 1.0], Scheme::Bridge).unwrap();
        // very short intervals around the midpoint concentrate the bridge
        let v = b
            .bridge_step((0.5 - 1e-7, 0.02), 0.5, (0.5 + 1e-7, 0.021), [0.5, 0.5, 0.5])
            .unwrap();
        assert!((v - 0.0205).abs() < 1e-3, "{v}");
        let v = b.sample(&[0.5, 0.5], &[0.0, 0.3], &[0.0, 0.7]).unwrap();
        assert!(v.iter().all(|&x| x > 0.0));
    }
}
