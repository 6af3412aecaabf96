//! Two stocks driven by three independent square-root variance factors:
//! factor `i` is private to stock `i` and factor 3 is shared,
//!
//! `dS^i = S^i (r dt + sqrt(V^i) dZ^i + sqrt(V^3) dZ^3)`,
//! `Z^j = rho_j W^j + sqrt(1 - rho_j^2) B^j`.
//!
//! Given the factor paths the two log-prices are jointly Gaussian; the
//! shared `B^3` term gives them covariance `(1 - rho_3^2) int V^3`.
//!
//! Terminal layout (8 coordinates): `V^1, V^2, V^3, iv^1, iv^2, iv^3, Z_1, Z_2`.
//! Path layout with `h` dates, `p` the visiting position and `f` the factor:
//! variance `u[f h + p]`, integrated variance `u[3h + f h + p]`, normals
//! `u[6h + 2p]`, `u[6h + 2p + 1]`, and for the bridge scheme the Poisson and
//! Bessel draws `u[8h + 2 f h + p]`, `u[8h + 2 f h + h + p]`. That is `8h`
//! naive and `14h` bridge coordinates.

use crate::distributions::norm_inv;
use crate::error::{Error, Result};
use crate::heston::{sample_variance_step, HestonParams, SquareRootProcess};
use crate::paths::{BridgeSchedule, PathGrid, Scheme, VarianceBridge};
use crate::qmc::Integrand;

/// One variance factor and its correlation with the stock noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactorParams {
    pub v0: f64,
    pub kappa: f64,
    pub theta: f64,
    pub sigma: f64,
    pub rho: f64,
}

impl FactorParams {
    pub fn process(&self) -> SquareRootProcess {
        SquareRootProcess {
            kappa: self.kappa,
            theta: self.theta,
            sigma: self.sigma,
        }
    }

    fn as_heston(&self, s0: f64, r: f64) -> HestonParams {
        HestonParams {
            s0,
            v0: self.v0,
            kappa: self.kappa,
            theta: self.theta,
            sigma: self.sigma,
            rho: self.rho,
            r,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultiAssetParams {
    pub s0: [f64; 2],
    /// Private factors of stock 1 and 2, then the shared factor.
    pub factors: [FactorParams; 3],
    pub r: f64,
}

impl MultiAssetParams {
    pub fn validate(&self) -> Result<()> {
        for f in &self.factors {
            f.as_heston(self.s0[0], self.r).validate()?;
        }
        for &s in &self.s0 {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::Config(format!("spot {s} must be positive")));
            }
        }
        Ok(())
    }

    /// Same model with the two stocks (and their private factors) swapped.
    pub fn swapped(&self) -> Self {
        Self {
            s0: [self.s0[1], self.s0[0]],
            factors: [self.factors[1], self.factors[0], self.factors[2]],
            r: self.r,
        }
    }
}

/// How the two conditional log-price normals are coupled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormalCoupling {
    /// Joint normal with the covariance induced by the shared factor.
    Correlated,
    /// Two independent normals with the right marginal variances; this
    /// ignores the shared `B^3` noise.
    Independent,
}

/// Variance, integrated variance and `int sqrt(V) dW` of one factor.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorPath {
    pub v: Vec<f64>,
    pub iv: Vec<f64>,
    pub z: Vec<f64>,
}

/// Conditional moments of `(log S^1, log S^2)` accumulated to each date.
#[derive(Debug, Clone)]
struct JointMoments {
    mu: Vec<[f64; 2]>,
    /// `(var_1, cov, var_2)`.
    cov: Vec<[f64; 3]>,
}

impl JointMoments {
    fn new(params: &MultiAssetParams, times: &[f64], factors: &[FactorPath; 3], coupling: NormalCoupling) -> Self {
        let h = times.len();
        let f = &params.factors;
        let mut mu = vec![[params.s0[0].ln(), params.s0[1].ln()]];
        let mut cov = vec![[0.0; 3]];
        let mut sums = [[0.0; 2]; 3];
        for k in 0..h {
            for j in 0..3 {
                sums[j][0] += factors[j].iv[k];
                sums[j][1] += factors[j].z[k];
            }
            let shared = -0.5 * sums[2][0] + f[2].rho * sums[2][1];
            let shared_var = (1.0 - f[2].rho * f[2].rho) * sums[2][0];
            let m =
                |i: usize| params.s0[i].ln() + params.r * times[k] - 0.5 * sums[i][0] + f[i].rho * sums[i][1] + shared;
            let var = |i: usize| (1.0 - f[i].rho * f[i].rho) * sums[i][0] + shared_var;
            let c = match coupling {
                NormalCoupling::Correlated => shared_var,
                NormalCoupling::Independent => 0.0,
            };
            mu.push([m(0), m(1)]);
            cov.push([var(0), c, var(1)]);
        }
        Self { mu, cov }
    }
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// `L (z1, z2)` with `L L^T = [[a, b], [b, c]]`.
fn correlate(m: [f64; 3], z: [f64; 2]) -> [f64; 2] {
    let l11 = m[0].max(0.0).sqrt();
    let l21 = if l11 > 0.0 { m[1] / l11 } else { 0.0 };
    let l22 = (m[2] - l21 * l21).max(0.0).sqrt();
    [l11 * z[0], l21 * z[0] + l22 * z[1]]
}

/// Two-dimensional Gaussian bridge over the log-prices.
fn joint_price_path(m: &JointMoments, schedule: &BridgeSchedule, normals: &[[f64; 2]]) -> [Vec<f64>; 2] {
    let mut x = vec![[0.0; 2]; m.mu.len()];
    x[0] = m.mu[0];
    for p in 0..schedule.len() {
        let k = schedule.date(p);
        let (l, r) = schedule.neighbours(p);
        let a = sub(m.cov[k], m.cov[l]);
        let drift = [m.mu[k][0] - m.mu[l][0], m.mu[k][1] - m.mu[l][1]];
        let (mean, cov) = match r {
            None => ([x[l][0] + drift[0], x[l][1] + drift[1]], a),
            Some(r) => {
                let b = sub(m.cov[r], m.cov[l]);
                let gap = [
                    x[r][0] - x[l][0] - (m.mu[r][0] - m.mu[l][0]),
                    x[r][1] - x[l][1] - (m.mu[r][1] - m.mu[l][1]),
                ];
                // gain A B^{-1}
                let det = b[0] * b[2] - b[1] * b[1];
                let g = if det > 1e-300 {
                    [
                        (a[0] * b[2] - a[1] * b[1]) / det,
                        (a[1] * b[0] - a[0] * b[1]) / det,
                        (a[1] * b[2] - a[2] * b[1]) / det,
                        (a[2] * b[0] - a[1] * b[1]) / det,
                    ]
                } else {
                    let ratio = |x: f64, y: f64| if y > 0.0 { x / y } else { 0.0 };
                    [ratio(a[0], b[0]), 0.0, 0.0, ratio(a[2], b[2])]
                };
                let mean = [
                    x[l][0] + drift[0] + g[0] * gap[0] + g[1] * gap[1],
                    x[l][1] + drift[1] + g[2] * gap[0] + g[3] * gap[1],
                ];
                // A - G A
                let cov = [
                    a[0] - (g[0] * a[0] + g[1] * a[1]),
                    a[1] - (g[0] * a[1] + g[1] * a[2]),
                    a[2] - (g[2] * a[1] + g[3] * a[2]),
                ];
                (mean, cov)
            }
        };
        let e = correlate(cov, normals[p]);
        x[k] = [mean[0] + e[0], mean[1] + e[1]];
    }
    [
        x[1..].iter().map(|v| v[0].exp()).collect(),
        x[1..].iter().map(|v| v[1].exp()).collect(),
    ]
}

/// `(S^1_T, S^2_T)` from eight coordinates.
pub fn multiasset_terminal(
    params: &MultiAssetParams,
    expiry: f64,
    u: &[f64],
    coupling: NormalCoupling,
) -> Result<(f64, f64)> {
    if u.len() < 8 {
        return Err(Error::Config("two-asset terminal draw needs 8 coordinates".into()));
    }
    let mut factors = Vec::with_capacity(3);
    for (j, f) in params.factors.iter().enumerate() {
        let (v, iv, z) = sample_variance_step(&f.as_heston(1.0, params.r), f.v0, expiry, u[j], u[3 + j])?;
        factors.push(FactorPath {
            v: vec![v],
            iv: vec![iv],
            z: vec![z],
        });
    }
    let factors: [FactorPath; 3] = factors.try_into().expect("three factors");
    let m = JointMoments::new(params, &[expiry], &factors, coupling);
    let e = correlate(m.cov[1], [norm_inv(u[6]), norm_inv(u[7])]);
    Ok(((m.mu[1][0] + e[0]).exp(), (m.mu[1][1] + e[1]).exp()))
}

/// Factor paths and both price paths.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiAssetPath {
    pub times: Vec<f64>,
    pub factors: [FactorPath; 3],
    pub s: [Vec<f64>; 2],
}

impl MultiAssetPath {
    /// Path of stock `i` with its private factor in the variance fields.
    pub fn asset_grid(&self, i: usize, params: &MultiAssetParams) -> PathGrid {
        PathGrid {
            times: self.times.clone(),
            v0: params.factors[i].v0,
            s0: params.s0[i],
            v: self.factors[i].v.clone(),
            iv: self.factors[i].iv.clone(),
            z: self.factors[i].z.clone(),
            s: self.s[i].clone(),
        }
    }
}

/// Path builder for the two-asset model; see the module docs for the layout.
#[derive(Debug, Clone)]
pub struct MultiAssetPathBuilder {
    params: MultiAssetParams,
    coupling: NormalCoupling,
    scheme: Scheme,
    factors: [VarianceBridge; 3],
}

impl MultiAssetPathBuilder {
    pub fn new(params: MultiAssetParams, times: Vec<f64>, scheme: Scheme, coupling: NormalCoupling) -> Result<Self> {
        params.validate()?;
        let make = |f: &FactorParams| VarianceBridge::new(f.process(), f.v0, times.clone(), scheme);
        let factors = [
            make(&params.factors[0])?,
            make(&params.factors[1])?,
            make(&params.factors[2])?,
        ];
        Ok(Self {
            params,
            coupling,
            scheme,
            factors,
        })
    }

    pub fn params(&self) -> &MultiAssetParams {
        &self.params
    }

    pub fn times(&self) -> &[f64] {
        self.factors[0].times()
    }

    pub fn dates(&self) -> usize {
        self.times().len()
    }

    pub fn dimension(&self) -> usize {
        match self.scheme {
            Scheme::Naive => 8 * self.dates(),
            Scheme::Bridge => 14 * self.dates(),
        }
    }

    pub fn build(&self, u: &[f64]) -> Result<MultiAssetPath> {
        let h = self.dates();
        if u.len() < self.dimension() {
            return Err(Error::Config(format!(
                "two-asset path needs {} coordinates, got {}",
                self.dimension(),
                u.len()
            )));
        }
        let mut paths = Vec::with_capacity(3);
        for (j, bridge) in self.factors.iter().enumerate() {
            let u_v = &u[j * h..(j + 1) * h];
            let u_iv = &u[3 * h + j * h..3 * h + (j + 1) * h];
            let v = match self.scheme {
                Scheme::Naive => bridge.sample(u_v, &[], &[])?,
                Scheme::Bridge => {
                    let aux = &u[8 * h + 2 * j * h..8 * h + 2 * (j + 1) * h];
                    bridge.sample(u_v, &aux[..h], &aux[h..])?
                }
            };
            let (iv, z) = bridge.integrate(&v, u_iv)?;
            paths.push(FactorPath { v, iv, z });
        }
        let factors: [FactorPath; 3] = paths.try_into().expect("three factors");
        let times = self.times().to_vec();
        let moments = JointMoments::new(&self.params, &times, &factors, self.coupling);
        let normals: Vec<[f64; 2]> = (0..h)
            .map(|p| [norm_inv(u[6 * h + 2 * p]), norm_inv(u[6 * h + 2 * p + 1])])
            .collect();
        let s = joint_price_path(&moments, self.factors[0].schedule(), &normals);
        Ok(MultiAssetPath { times, factors, s })
    }
}

/// Terminal two-asset integrand. Outputs: discounted `S^1_T`, `S^2_T`,
/// calls and puts on each stock at their strikes, and a call on
/// `max(S^1_T, S^2_T)` at the first strike.
#[derive(Debug, Clone)]
pub struct MultiAssetEuropeanIntegrand {
    pub params: MultiAssetParams,
    pub strikes: [f64; 2],
    pub expiry: f64,
    pub coupling: NormalCoupling,
}

impl Integrand for MultiAssetEuropeanIntegrand {
    fn dimension(&self) -> usize {
        8
    }

    fn outputs(&self) -> usize {
        7
    }

    fn evaluate(&self, u: &[f64], out: &mut [f64]) -> Result<()> {
        let (s1, s2) = multiasset_terminal(&self.params, self.expiry, u, self.coupling)?;
        let disc = (-self.params.r * self.expiry).exp();
        let [k1, k2] = self.strikes;
        out[0] = disc * s1;
        out[1] = disc * s2;
        out[2] = disc * (s1 - k1).max(0.0);
        out[3] = disc * (k1 - s1).max(0.0);
        out[4] = disc * (s2 - k2).max(0.0);
        out[5] = disc * (k2 - s2).max(0.0);
        out[6] = disc * (s1.max(s2) - k1).max(0.0);
        Ok(())
    }
}
