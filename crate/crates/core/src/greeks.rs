//! Pathwise and likelihood-ratio sensitivities of Asian calls under Heston,
//! computed conditionally on the variance path so that price steps are
//! lognormal.

use crate::error::{Error, Result};
use crate::heston::HestonParams;
use crate::paths::{PathBuilder, PathGrid};
use crate::payoffs::{asian_average, AsianSpec};
use crate::qmc::{EstimatorReport, Integrand};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GreekKind {
    Delta,
    Gamma,
    Rho,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GreekMethod {
    Pathwise,
    LikelihoodRatio,
    FiniteDifference,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GreekEstimate {
    pub kind: GreekKind,
    pub method: GreekMethod,
    pub report: EstimatorReport,
}

/// Per-step quantities of the lognormal price steps given the variance path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepScore {
    /// Conditional volatility over the step.
    pub sigma_bar: f64,
    /// `exp(-rho^2/2 int V + rho int sqrt(V) dW)`.
    pub xi: f64,
    /// Standardised log-increment of the step.
    pub d: f64,
    pub dt: f64,
}

/// Step scores of a Heston path with rate `r`.
pub fn step_scores(path: &PathGrid, params: &HestonParams) -> Result<Vec<StepScore>> {
    let rho = params.rho;
    let mut prev_s = path.s0;
    let mut prev_t = 0.0;
    let mut out = Vec::with_capacity(path.len());
    for k in 0..path.len() {
        let dt = path.times[k] - prev_t;
        let var = (1.0 - rho * rho) * path.iv[k] / dt;
        if !(var > 0.0) {
            return Err(Error::Numerical(format!("zero conditional volatility on step {k}")));
        }
        let sigma_bar = var.sqrt();
        let log_xi = -0.5 * rho * rho * path.iv[k] + rho * path.z[k];
        let d = ((path.s[k] / prev_s).ln() - log_xi - (params.r - 0.5 * var) * dt) / (sigma_bar * dt.sqrt());
        out.push(StepScore {
            sigma_bar,
            xi: log_xi.exp(),
            d,
            dt,
        });
        prev_s = path.s[k];
        prev_t = path.times[k];
    }
    Ok(out)
}

fn discount(spec: &AsianSpec, r: f64) -> f64 {
    (-r * spec.expiry()).exp()
}

/// `e^{-rT} 1{avg >= K} avg / S_0`.
pub fn pw_delta_asian(path: &PathGrid, spec: &AsianSpec, r: f64) -> Result<f64> {
    let avg = asian_average(path, spec)?;
    Ok(if avg >= spec.strike {
        discount(spec, r) * avg / path.s0
    } else {
        0.0
    })
}

/// `e^{-rT} 1{avg >= K} ((1/d) sum S_i t_i - T (avg - K))`.
pub fn pw_rho_asian(path: &PathGrid, spec: &AsianSpec, r: f64) -> Result<f64> {
    let avg = asian_average(path, spec)?;
    if avg < spec.strike {
        return Ok(0.0);
    }
    ensure_full_grid(path, spec)?;
    let weighted = path.s.iter().zip(&path.times).map(|(s, t)| s * t).sum::<f64>() / path.len() as f64;
    Ok(discount(spec, r) * (weighted - spec.expiry() * (avg - spec.strike)))
}

fn ensure_full_grid(path: &PathGrid, spec: &AsianSpec) -> Result<()> {
    if path.times != spec.times {
        return Err(Error::Unsupported(
            "sensitivities need the payoff dates to be the simulation dates".into(),
        ));
    }
    Ok(())
}

/// Likelihood-ratio `(Delta, Gamma, Rho)`.
pub fn lr_greeks_asian(path: &PathGrid, spec: &AsianSpec, params: &HestonParams) -> Result<(f64, f64, f64)> {
    ensure_full_grid(path, spec)?;
    let avg = asian_average(path, spec)?;
    let payoff = discount(spec, params.r) * (avg - spec.strike).max(0.0);
    if payoff == 0.0 {
        return Ok((0.0, 0.0, 0.0));
    }
    let scores = step_scores(path, params)?;
    let first = scores[0];
    let vol_1 = first.sigma_bar * first.dt.sqrt();
    let s0 = path.s0;
    let delta = payoff * first.d / (s0 * vol_1);
    let gamma = payoff * (first.d * first.d - first.d * vol_1 - 1.0) / (s0 * s0 * vol_1 * vol_1);
    let rho_score = -spec.expiry() + scores.iter().map(|s| s.d * s.dt.sqrt() / s.sigma_bar).sum::<f64>();
    Ok((delta, gamma, payoff * rho_score))
}

/// Outputs per point, in order.
pub const ASIAN_GREEK_OUTPUTS: [&str; 8] = [
    "price", "pw_delta", "pw_rho", "lr_delta", "lr_gamma", "lr_rho", "fd_delta", "fd_gamma",
];

/// Asian call price and sensitivities from one Heston path per point.
///
/// The finite-difference outputs reuse the same path: it scales linearly
/// with `S_0`, so bumping `S_0` by a relative `bump` multiplies every price.
#[derive(Debug, Clone)]
pub struct AsianGreeksIntegrand {
    pub builder: PathBuilder,
    pub spec: AsianSpec,
    pub bump: f64,
}

impl AsianGreeksIntegrand {
    pub fn new(builder: PathBuilder, strike: f64, bump: f64) -> Result<Self> {
        if !(bump > 0.0 && bump < 1.0) {
            return Err(Error::Config(format!("relative bump {bump} must lie in (0, 1)")));
        }
        let spec = AsianSpec::new(strike, builder.times().to_vec())?;
        Ok(Self { builder, spec, bump })
    }

    /// Names the reports returned by `rqmc_estimate_all` on this integrand.
    pub fn label(reports: Vec<EstimatorReport>) -> Vec<GreekEstimate> {
        use GreekKind::*;
        use GreekMethod::*;
        let tags = [
            (Delta, Pathwise),
            (Rho, Pathwise),
            (Delta, LikelihoodRatio),
            (Gamma, LikelihoodRatio),
            (Rho, LikelihoodRatio),
            (Delta, FiniteDifference),
            (Gamma, FiniteDifference),
        ];
        reports
            .into_iter()
            .skip(1)
            .zip(tags)
            .map(|(report, (kind, method))| GreekEstimate { kind, method, report })
            .collect()
    }
}

impl Integrand for AsianGreeksIntegrand {
    fn dimension(&self) -> usize {
        self.builder.dimension()
    }

    fn outputs(&self) -> usize {
        ASIAN_GREEK_OUTPUTS.len()
    }

    fn evaluate(&self, u: &[f64], out: &mut [f64]) -> Result<()> {
        let params = self.builder.params();
        let path = self.builder.build(u)?;
        let disc = discount(&self.spec, params.r);
        let avg = asian_average(&path, &self.spec)?;
        let k = self.spec.strike;
        let price = |scale: f64| disc * (scale * avg - k).max(0.0);
        let (lr_delta, lr_gamma, lr_rho) = lr_greeks_asian(&path, &self.spec, params)?;
        let h = self.bump * params.s0;
        let (up, mid, down) = (price(1.0 + self.bump), price(1.0), price(1.0 - self.bump));
        out[0] = mid;
        out[1] = pw_delta_asian(&path, &self.spec, params.r)?;
        out[2] = pw_rho_asian(&path, &self.spec, params.r)?;
        out[3] = lr_delta;
        out[4] = lr_gamma;
        out[5] = lr_rho;
        out[6] = (up - down) / (2.0 * h);
        out[7] = (up - 2.0 * mid + down) / (h * h);
        Ok(())
    }
}
