use super::iv_law::IntegratedVarianceLaw;
use super::params::HestonParams;
use crate::distributions::{norm_inv, normal_cdf};
use crate::error::{check_probability, Error, Result};
use crate::qmc::Integrand;

/// Normal law of `log S_t` given `S_u`, `int V` and `int sqrt(V) dW^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionedLogPriceLaw {
    pub mean: f64,
    pub variance: f64,
}

impl ConditionedLogPriceLaw {
    /// Law over an interval of length `dt` with drift rate `drift`
    /// (`r` for Heston, `r - lambda mu_bar` with jumps).
    pub fn new(s_u: f64, drift: f64, dt: f64, rho: f64, iv: f64, z: f64) -> Self {
        Self {
            mean: s_u.ln() + drift * dt - 0.5 * iv + rho * z,
            variance: (1.0 - rho * rho) * iv,
        }
    }

    pub fn std_dev(&self) -> f64 {
        self.variance.max(0.0).sqrt()
    }

    /// `exp(mean + sd * Q(p))`.
    pub fn price_from_normal(&self, normal: f64) -> f64 {
        (self.mean + self.std_dev() * normal).exp()
    }
}

/// Quantile `p` of `S_t` under `law`.
pub fn terminal_logprice_quantile(law: &ConditionedLogPriceLaw, p: f64) -> Result<f64> {
    check_probability(p)?;
    Ok(law.price_from_normal(norm_inv(p)))
}

/// Black-Scholes call price.
pub fn black_scholes_call(s0: f64, k: f64, r: f64, tau: f64, vol: f64) -> f64 {
    let disc = (-r * tau).exp();
    let sd = vol * tau.sqrt();
    if sd <= 0.0 || !sd.is_finite() {
        return (s0 - k * disc).max(0.0);
    }
    let d1 = ((s0 / k).ln() + r * tau) / sd + 0.5 * sd;
    s0 * normal_cdf(d1) - k * disc * normal_cdf(d1 - sd)
}

/// Black-Scholes put price.
pub fn black_scholes_put(s0: f64, k: f64, r: f64, tau: f64, vol: f64) -> f64 {
    black_scholes_call(s0, k, r, tau, vol) - s0 + k * (-r * tau).exp()
}

/// `(V_T, int_0^T V ds, int_0^T sqrt(V) dW^2)` from two uniforms.
pub fn sample_variance_step(params: &HestonParams, v0: f64, dt: f64, u_v: f64, u_iv: f64) -> Result<(f64, f64, f64)> {
    let process = params.variance_process();
    let v1 = process.transition_quantile(v0, dt, u_v)?;
    let iv = IntegratedVarianceLaw::new(&process, v0, v1, dt)?.quantile(u_iv)?;
    let z = process.stochastic_integral(v0, v1, iv, dt);
    Ok((v1, iv, z))
}

/// Black-Scholes value of a call conditional on the variance path, driven by
/// `u = (u_V, u_iv)`. Integrating over the unit square gives the Heston price.
pub fn conditional_european_call(params: &HestonParams, strike: f64, expiry: f64, u: &[f64]) -> Result<f64> {
    if u.len() < 2 {
        return Err(Error::Config("conditional call needs 2 coordinates".into()));
    }
    let (_, iv, z) = sample_variance_step(params, params.v0, expiry, u[0], u[1])?;
    let rho = params.rho;
    let s_tilde = params.s0 * (-0.5 * rho * rho * iv + rho * z).exp();
    let vol = ((1.0 - rho * rho) * iv / expiry).sqrt();
    Ok(black_scholes_call(s_tilde, strike, params.r, expiry, vol))
}

/// Exact draw of `S_T` from three coordinates (variance, integrated variance,
/// terminal normal).
pub fn exact_terminal_price(params: &HestonParams, expiry: f64, u: &[f64]) -> Result<f64> {
    if u.len() < 3 {
        return Err(Error::Config("terminal draw needs 3 coordinates".into()));
    }
    let (_, iv, z) = sample_variance_step(params, params.v0, expiry, u[0], u[1])?;
    let law = ConditionedLogPriceLaw::new(params.s0, params.r, expiry, params.rho, iv, z);
    terminal_logprice_quantile(&law, u[2])
}

/// How a European option is simulated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EuropeanMethod {
    /// Black-Scholes given the variance path (2 coordinates).
    Conditional,
    /// Exact terminal draw (3 coordinates).
    Exact,
}

/// Discounted European call (and optionally put and forward) as an integrand.
#[derive(Debug, Clone)]
pub struct EuropeanIntegrand {
    pub params: HestonParams,
    pub strike: f64,
    pub expiry: f64,
    pub method: EuropeanMethod,
}

impl EuropeanIntegrand {
    pub fn new(params: HestonParams, strike: f64, expiry: f64, method: EuropeanMethod) -> Result<Self> {
        params.validate()?;
        if !(strike > 0.0 && expiry > 0.0) {
            return Err(Error::Config("strike and expiry must be positive".into()));
        }
        Ok(Self {
            params,
            strike,
            expiry,
            method,
        })
    }
}

impl Integrand for EuropeanIntegrand {
    fn dimension(&self) -> usize {
        match self.method {
            EuropeanMethod::Conditional => 2,
            EuropeanMethod::Exact => 3,
        }
    }

    /// Outputs: call, put, discounted terminal price.
    fn outputs(&self) -> usize {
        3
    }

    fn evaluate(&self, u: &[f64], out: &mut [f64]) -> Result<()> {
        let p = &self.params;
        let disc = (-p.r * self.expiry).exp();
        match self.method {
            EuropeanMethod::Conditional => {
                let (_, iv, z) = sample_variance_step(p, p.v0, self.expiry, u[0], u[1])?;
                let rho = p.rho;
                let s_tilde = p.s0 * (-0.5 * rho * rho * iv + rho * z).exp();
                let vol = ((1.0 - rho * rho) * iv / self.expiry).sqrt();
                out[0] = black_scholes_call(s_tilde, self.strike, p.r, self.expiry, vol);
                out[1] = black_scholes_put(s_tilde, self.strike, p.r, self.expiry, vol);
                out[2] = s_tilde;
            }
            EuropeanMethod::Exact => {
                let s = exact_terminal_price(p, self.expiry, u)?;
                out[0] = disc * (s - self.strike).max(0.0);
                out[1] = disc * (self.strike - s).max(0.0);
                out[2] = disc * s;
            }
        }
        Ok(())
    }
}
