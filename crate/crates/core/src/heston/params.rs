use crate::distributions::NoncentralChiSq;
use crate::error::{check_probability, Error, Result};

/// A square-root (CIR) process `dV = kappa (theta - V) dt + sigma sqrt(V) dW`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SquareRootProcess {
    pub kappa: f64,
    pub theta: f64,
    pub sigma: f64,
}

impl SquareRootProcess {
    pub fn new(kappa: f64, theta: f64, sigma: f64) -> Result<Self> {
        let p = Self { kappa, theta, sigma };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("kappa", self.kappa), ("theta", self.theta), ("sigma", self.sigma)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(())
    }

    /// Dimension `4 kappa theta / sigma^2` of the associated squared Bessel process.
    pub fn dimension(&self) -> f64 {
        4.0 * self.kappa * self.theta / (self.sigma * self.sigma)
    }

    /// Whether `2 kappa theta >= sigma^2`.
    pub fn feller(&self) -> bool {
        2.0 * self.kappa * self.theta >= self.sigma * self.sigma
    }

    /// Scale factor `sigma^2 (1 - e^{-kappa dt}) / (4 kappa)` of the transition.
    pub fn transition_scale(&self, dt: f64) -> f64 {
        -self.sigma * self.sigma * (-self.kappa * dt).exp_m1() / (4.0 * self.kappa)
    }

    /// The noncentral chi-squared law of `V_{u+dt} / transition_scale(dt)` given `V_u = v`.
    pub fn transition_law(&self, v: f64, dt: f64) -> Result<NoncentralChiSq> {
        if !(dt > 0.0) {
            return Err(Error::Domain(format!("time step {dt} must be positive")));
        }
        if !(v >= 0.0 && v.is_finite()) {
            return Err(Error::Domain(format!("variance {v} must be nonnegative")));
        }
        let scale = self.transition_scale(dt);
        NoncentralChiSq::new(self.dimension(), v * (-self.kappa * dt).exp() / scale)
    }

    /// Quantile `p` of `V_{u+dt}` given `V_u = v`.
    pub fn transition_quantile(&self, v: f64, dt: f64, p: f64) -> Result<f64> {
        check_probability(p)?;
        let law = self.transition_law(v, dt)?;
        Ok(self.transition_scale(dt) * law.quantile(p)?)
    }

    /// Time change `c(t) = sigma^2 (e^{kappa t} - 1) / (4 kappa)` under which
    /// `e^{kappa t} V_t` is a squared Bessel process.
    pub fn time_change(&self, t: f64) -> f64 {
        self.sigma * self.sigma * (self.kappa * t).exp_m1() / (4.0 * self.kappa)
    }

    /// `int sqrt(V) dW` over an interval of length `dt` from the endpoints and
    /// the integrated variance.
    pub fn stochastic_integral(&self, v_start: f64, v_end: f64, iv: f64, dt: f64) -> f64 {
        (v_end - v_start - self.kappa * self.theta * dt + self.kappa * iv) / self.sigma
    }
}

/// Heston model constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HestonParams {
    pub s0: f64,
    pub v0: f64,
    pub kappa: f64,
    pub theta: f64,
    pub sigma: f64,
    pub rho: f64,
    pub r: f64,
}

impl HestonParams {
    pub fn new(s0: f64, v0: f64, kappa: f64, theta: f64, sigma: f64, rho: f64, r: f64) -> Result<Self> {
        let p = Self {
            s0,
            v0,
            kappa,
            theta,
            sigma,
            rho,
            r,
        };
        p.validate()?;
        Ok(p)
    }

    /// Parameters used for the European, Asian and barrier examples:
    /// `S0 = 100, V0 = 0.010201, kappa = 6.21, theta = 0.019, sigma = 0.61,
    /// rho = -0.7, r = 3.19%`. These violate the Feller condition.
    pub fn reference() -> Self {
        Self {
            s0: 100.0,
            v0: 0.010201,
            kappa: 6.21,
            theta: 0.019,
            sigma: 0.61,
            rho: -0.7,
            r: 0.0319,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.variance_process().validate()?;
        if !(self.s0 > 0.0 && self.s0.is_finite()) {
            return Err(Error::Config(format!("s0 must be positive, got {}", self.s0)));
        }
        if !(self.v0 >= 0.0 && self.v0.is_finite()) {
            return Err(Error::Config(format!("v0 must be nonnegative, got {}", self.v0)));
        }
        if !(self.rho > -1.0 && self.rho < 1.0) {
            return Err(Error::Config(format!("rho must lie in (-1, 1), got {}", self.rho)));
        }
        if !self.r.is_finite() {
            return Err(Error::Config("r must be finite".into()));
        }
        Ok(())
    }

    pub fn variance_process(&self) -> SquareRootProcess {
        SquareRootProcess {
            kappa: self.kappa,
            theta: self.theta,
            sigma: self.sigma,
        }
    }
}

/// Quantile `p` of `V_{u+dt}` given `V_u = v_u`.
pub fn variance_transition_quantile(params: &HestonParams, v_u: f64, dt: f64, p: f64) -> Result<f64> {
    params.variance_process().transition_quantile(v_u, dt, p)
}

/// `int_u^t sqrt(V) dW^2` recovered from `V_u`, `V_t` and `int_u^t V ds`.
pub fn recover_stoch_integral(params: &HestonParams, v_u: f64, v_t: f64, iv: f64, dt: f64) -> Result<f64> {
    if !(iv >= 0.0) {
        return Err(Error::Domain(format!("integrated variance {iv} must be nonnegative")));
    }
    Ok(params.variance_process().stochastic_integral(v_u, v_t, iv, dt))
}
