//! Multi-date Heston paths: sequential (naive) construction and the bridge
//! construction that generates the terminal date first and then midpoints.
//!
//! Coordinate layout for a path with `h` dates (`u` has `3h` coordinates for
//! the naive scheme and `5h` for the bridge scheme):
//!
//! * `u[3p]`: variance at the date visited at position `p` (transition
//!   quantile for forward steps, Gamma quantile for bridge steps),
//! * `u[3p + 1]`: integrated variance over the interval ending at that date,
//! * `u[3p + 2]`: normal driving the log-price at that date,
//! * `u[3h + p]`, `u[4h + p]`: Poisson and Bessel draws of the variance
//!   bridge at position `p` (bridge scheme only; position 0 is unused).
//!
//! With one date both schemes read the same coordinates and agree exactly.

mod schedule;
mod stock;
mod variance;

pub use schedule::BridgeSchedule;
pub use stock::{stock_bridge_path, LogPriceBridgeCoeffs};
pub use variance::{fill_integrated_variance, sqrt_bridge_path, VarianceBridge};

use crate::distributions::norm_inv;
use crate::error::{Error, Result};
use crate::heston::HestonParams;

/// Order in which a path's variates are generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Dates in increasing order.
    Naive,
    /// Terminal date first, then midpoints level by level.
    Bridge,
}

/// A simulated path on monitoring dates `t_1 < ... < t_h` (with `t_0 = 0`).
#[derive(Debug, Clone, PartialEq)]
pub struct PathGrid {
    pub times: Vec<f64>,
    pub v0: f64,
    pub s0: f64,
    /// `V_{t_k}`, `k = 1..h`.
    pub v: Vec<f64>,
    /// `int_{t_{k-1}}^{t_k} V ds`.
    pub iv: Vec<f64>,
    /// `int_{t_{k-1}}^{t_k} sqrt(V) dW^2`.
    pub z: Vec<f64>,
    /// `S_{t_k}`.
    pub s: Vec<f64>,
}

impl PathGrid {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn expiry(&self) -> f64 {
        *self.times.last().expect("path has dates")
    }
}

/// Checks that `times` is a strictly increasing grid of positive times.
pub fn validate_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::Config("need at least one monitoring date".into()));
    }
    let mut prev = 0.0;
    for &t in times {
        if !(t > prev && t.is_finite()) {
            return Err(Error::Config(format!(
                "monitoring times must increase from 0, got {times:?}"
            )));
        }
        prev = t;
    }
    Ok(())
}

/// `h` equally spaced dates on `(0, expiry]`.
pub fn uniform_times(h: usize, expiry: f64) -> Vec<f64> {
    (1..=h).map(|k| expiry * k as f64 / h as f64).collect()
}

/// Builds Heston paths from points of the unit cube.
#[derive(Debug, Clone)]
pub struct PathBuilder {
    params: HestonParams,
    drift: f64,
    scheme: Scheme,
    variance: VarianceBridge,
}

impl PathBuilder {
    pub fn new(params: HestonParams, times: Vec<f64>, scheme: Scheme) -> Result<Self> {
        params.validate()?;
        let variance = VarianceBridge::new(params.variance_process(), params.v0, times, scheme)?;
        Ok(Self {
            params,
            drift: params.r,
            scheme,
            variance,
        })
    }

    /// Replaces the log-price drift rate (default `r`).
    pub fn with_drift(mut self, drift: f64) -> Self {
        self.drift = drift;
        self
    }

    pub fn params(&self) -> &HestonParams {
        &self.params
    }

    pub fn drift(&self) -> f64 {
        self.drift
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn times(&self) -> &[f64] {
        self.variance.times()
    }

    pub fn schedule(&self) -> &BridgeSchedule {
        self.variance.schedule()
    }

    pub fn variance_bridge(&self) -> &VarianceBridge {
        &self.variance
    }

    pub fn dates(&self) -> usize {
        self.variance.times().len()
    }

    /// Number of coordinates consumed by [`Self::build`].
    pub fn dimension(&self) -> usize {
        match self.scheme {
            Scheme::Naive => 3 * self.dates(),
            Scheme::Bridge => 5 * self.dates(),
        }
    }

    /// Variance, integrated variance and stochastic integrals, with price
    /// normals still to be applied. `aux` holds the `2h` bridge coordinates.
    pub fn variance_part(&self, main: &[f64], aux: &[f64]) -> Result<PathGrid> {
        let h = self.dates();
        if main.len() < 3 * h || (self.scheme == Scheme::Bridge && aux.len() < 2 * h) {
            return Err(Error::Config(format!("path needs {} coordinates", self.dimension())));
        }
        let u_v: Vec<f64> = (0..h).map(|p| main[3 * p]).collect();
        let u_iv: Vec<f64> = (0..h).map(|p| main[3 * p + 1]).collect();
        let (u_pois, u_bes) = if self.scheme == Scheme::Bridge {
            (&aux[..h], &aux[h..2 * h])
        } else {
            (&[][..], &[][..])
        };
        let v = self.variance.sample(&u_v, u_pois, u_bes)?;
        let (iv, z) = self.variance.integrate(&v, &u_iv)?;
        Ok(PathGrid {
            times: self.times().to_vec(),
            v0: self.params.v0,
            s0: self.params.s0,
            v,
            iv,
            z,
            s: vec![0.0; h],
        })
    }

    /// Fills `grid.s` from normals indexed by visiting position.
    pub fn fill_prices(&self, grid: &mut PathGrid, normals: &[f64]) {
        let coeffs = LogPriceBridgeCoeffs::new(
            self.params.s0,
            self.drift,
            self.params.rho,
            &grid.times,
            &grid.iv,
            &grid.z,
        );
        grid.s = stock_bridge_path(&coeffs, self.schedule(), normals);
    }

    /// Full path from a point with [`Self::dimension`] coordinates.
    pub fn build(&self, u: &[f64]) -> Result<PathGrid> {
        let h = self.dates();
        if u.len() < self.dimension() {
            return Err(Error::Config(format!(
                "path needs {} coordinates, got {}",
                self.dimension(),
                u.len()
            )));
        }
        let aux = if self.scheme == Scheme::Bridge {
            &u[3 * h..5 * h]
        } else {
            &[][..]
        };
        let mut grid = self.variance_part(&u[..3 * h], aux)?;
        let normals: Vec<f64> = (0..h).map(|p| norm_inv(u[3 * p + 2])).collect();
        self.fill_prices(&mut grid, &normals);
        Ok(grid)
    }
}

/// One Heston path from `u` (see the module docs for the layout).
pub fn build_path(params: &HestonParams, times: &[f64], scheme: Scheme, u: &[f64]) -> Result<PathGrid> {
    PathBuilder::new(*params, times.to_vec(), scheme)?.build(u)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_date_schemes_agree() {
        let p = HestonParams::reference();
        let u = [0.3, 0.6, 0.2, 0.9, 0.1];
        let a = build_path(&p, &[1.0], Scheme::Naive, &u[..3]).unwrap();
        let b = build_path(&p, &[1.0], Scheme::Bridge, &u).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn dimensions() {
        let p = HestonParams::reference();
        let n = PathBuilder::new(p, uniform_times(6, 1.0), Scheme::Naive).unwrap();
        assert_eq!(n.dimension(), 18);
        let b = PathBuilder::new(p, uniform_times(8, 1.0), Scheme::Bridge).unwrap();
        assert_eq!(b.dimension(), 40);
        assert!(PathBuilder::new(p, uniform_times(6, 1.0), Scheme::Bridge).is_err());
        assert!(PathBuilder::new(p, vec![0.5, 0.4], Scheme::Naive).is_err());
    }

    #[test]
    fn path_fields_are_consistent() {
        let p = HestonParams::reference();
        let b = PathBuilder::new(p, uniform_times(8, 1.0), Scheme::Bridge).unwrap();
        let u: Vec<f64> = (0..40).map(|i| ((i * 37 + 11) % 97) as f64 / 97.0 + 0.004).collect();
        let g = b.build(&u).unwrap();
        let proc_ = p.variance_process();
        let mut prev = p.v0;
        for k in 0..8 {
            assert!(g.v[k] >= 0.0 && g.iv[k] >= 0.0 && g.s[k] > 0.0);
            let z = proc_.stochastic_integral(prev, g.v[k], g.iv[k], 0.125);
            assert!((z - g.z[k]).abs() < 1e-14);
            prev = g.v[k];
        }
    }
}
