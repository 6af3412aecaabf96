//! The 3/2 model `dV = kappa V (theta - V) dt + epsilon V^{3/2} dW^1`.
//!
//! `X = 1/V` is a square-root process,
//! `dX = (kappa + epsilon^2 - kappa theta X) dt - epsilon sqrt(X) dW^1`,
//! so its path is sampled exactly like the Heston variance. The conditional
//! law of `int ds / X` given the endpoints is supplied by an
//! [`InverseIntegralSampler`]. The coordinate layout is that of
//! [`crate::paths`].

use std::fmt::Debug;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::distributions::norm_inv;
use crate::error::{Error, Result};
use crate::heston::SquareRootProcess;
use crate::paths::{stock_bridge_path, uniform_times, LogPriceBridgeCoeffs, PathGrid, Scheme, VarianceBridge};
use crate::qmc::clamp_unit;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreeHalvesParams {
    pub s0: f64,
    pub v0: f64,
    pub kappa: f64,
    pub theta: f64,
    pub epsilon: f64,
    pub rho: f64,
    pub r: f64,
}

impl ThreeHalvesParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("s0", self.s0),
            ("v0", self.v0),
            ("kappa", self.kappa),
            ("theta", self.theta),
            ("epsilon", self.epsilon),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.rho > -1.0 && self.rho < 1.0) {
            return Err(Error::Config(format!("rho must lie in (-1, 1), got {}", self.rho)));
        }
        Ok(())
    }

    /// The square-root process followed by `1/V`.
    pub fn inverse_process(&self) -> SquareRootProcess {
        SquareRootProcess {
            kappa: self.kappa * self.theta,
            theta: (self.kappa + self.epsilon * self.epsilon) / (self.kappa * self.theta),
            sigma: self.epsilon,
        }
    }

    /// `int dW^1 / sqrt(X)` over a step of length `dt` from the endpoints of
    /// `X` and `int ds / X`.
    pub fn stochastic_integral(&self, x_start: f64, x_end: f64, inverse_integral: f64, dt: f64) -> f64 {
        let e = self.epsilon;
        ((x_start / x_end).ln() + (self.kappa + 0.5 * e * e) * inverse_integral - self.kappa * self.theta * dt) / e
    }
}

/// Draws `int_0^dt ds / X_s` given `X_0 = x_start`, `X_dt = x_end` from a
/// uniform `u`.
pub trait InverseIntegralSampler: Send + Sync + Debug {
    fn sample(&self, process: &SquareRootProcess, x_start: f64, x_end: f64, dt: f64, u: f64) -> Result<f64>;
}

/// Reference sampler: an exact squared-Bessel bridge on `substeps` equal
/// sub-intervals, pinned at both ends, integrated by the trapezoidal rule.
/// The uniform seeds a pseudo-random generator for the interior draws, so
/// this is only suitable for checking other samplers.
#[derive(Debug, Clone, Copy)]
pub struct BridgeQuadratureSampler {
    pub substeps: usize,
}

impl InverseIntegralSampler for BridgeQuadratureSampler {
    fn sample(&self, process: &SquareRootProcess, x_start: f64, x_end: f64, dt: f64, u: f64) -> Result<f64> {
        let n = self.substeps;
        let bridge = VarianceBridge::new(*process, x_start, uniform_times(n, dt), Scheme::Bridge)?;
        let mut rng = ChaCha8Rng::seed_from_u64(u.to_bits());
        let mut draw = || -> Vec<f64> { (0..n).map(|_| clamp_unit(rng.gen::<f64>())).collect() };
        let (a, b, c) = (draw(), draw(), draw());
        let x = bridge.sample_pinned(x_end, &a, &b, &c)?;
        let h = dt / n as f64;
        let mut sum = 0.5 * (1.0 / x_start + 1.0 / x_end);
        sum += x[..n - 1].iter().map(|v| 1.0 / v).sum::<f64>();
        Ok(sum * h)
    }
}

/// Path builder for the 3/2 model.
#[derive(Debug, Clone)]
pub struct ThreeHalvesPathBuilder {
    params: ThreeHalvesParams,
    scheme: Scheme,
    inverse: VarianceBridge,
    sampler: Option<Arc<dyn InverseIntegralSampler>>,
}

impl ThreeHalvesPathBuilder {
    pub fn new(params: ThreeHalvesParams, times: Vec<f64>, scheme: Scheme) -> Result<Self> {
        params.validate()?;
        let inverse = VarianceBridge::new(params.inverse_process(), 1.0 / params.v0, times, scheme)?;
        Ok(Self {
            params,
            scheme,
            inverse,
            sampler: None,
        })
    }

    pub fn with_sampler(mut self, sampler: Arc<dyn InverseIntegralSampler>) -> Self {
        self.sampler = Some(sampler);
        self
    }

    pub fn params(&self) -> &ThreeHalvesParams {
        &self.params
    }

    pub fn dates(&self) -> usize {
        self.inverse.times().len()
    }

    pub fn dimension(&self) -> usize {
        match self.scheme {
            Scheme::Naive => 3 * self.dates(),
            Scheme::Bridge => 5 * self.dates(),
        }
    }

    /// Path with `v = 1/X`, `iv = int V ds` and `z = int sqrt(V) dW^1`.
    pub fn build(&self, u: &[f64]) -> Result<PathGrid> {
        let sampler = self
            .sampler
            .as_ref()
            .ok_or_else(|| Error::Unsupported("the 3/2 model needs an integrated-variance sampler".into()))?;
        let h = self.dates();
        if u.len() < self.dimension() {
            return Err(Error::Config(format!(
                "3/2 path needs {} coordinates",
                self.dimension()
            )));
        }
        let schedule = self.inverse.schedule();
        let u_x: Vec<f64> = (0..h).map(|p| u[3 * p]).collect();
        let x = match self.scheme {
            Scheme::Naive => self.inverse.sample(&u_x, &[], &[])?,
            Scheme::Bridge => self.inverse.sample(&u_x, &u[3 * h..4 * h], &u[4 * h..5 * h])?,
        };
        let times = self.inverse.times().to_vec();
        let process = self.params.inverse_process();
        let mut iv = Vec::with_capacity(h);
        let mut z = Vec::with_capacity(h);
        let (mut prev_x, mut prev_t) = (1.0 / self.params.v0, 0.0);
        for k in 0..h {
            let dt = times[k] - prev_t;
            let int_inv = sampler.sample(&process, prev_x, x[k], dt, u[3 * schedule.position(k + 1) + 1])?;
            iv.push(int_inv);
            z.push(self.params.stochastic_integral(prev_x, x[k], int_inv, dt));
            prev_x = x[k];
            prev_t = times[k];
        }
        let coeffs = LogPriceBridgeCoeffs::new(self.params.s0, self.params.r, self.params.rho, &times, &iv, &z);
        let normals: Vec<f64> = (0..h).map(|p| norm_inv(u[3 * p + 2])).collect();
        let s = stock_bridge_path(&coeffs, schedule, &normals);
        Ok(PathGrid {
            times,
            v0: self.params.v0,
            s0: self.params.s0,
            v: x.iter().map(|x| 1.0 / x).collect(),
            iv,
            z,
            s,
        })
    }
}
