//! Path payoffs: arithmetic Asian calls and discretely monitored
//! down-and-out calls, plus their integrand wrappers.

use crate::distributions::{norm_inv, normal_cdf};
use crate::error::{Error, Result};
use crate::paths::{PathBuilder, PathGrid};
use crate::qmc::Integrand;
use crate::svj::SvjPathBuilder;

/// Arithmetic-average call on the given monitoring dates.
#[derive(Debug, Clone, PartialEq)]
pub struct AsianSpec {
    pub strike: f64,
    pub times: Vec<f64>,
}

impl AsianSpec {
    pub fn new(strike: f64, times: Vec<f64>) -> Result<Self> {
        if !(strike > 0.0) {
            return Err(Error::Config(format!("strike must be positive, got {strike}")));
        }
        crate::paths::validate_times(&times)?;
        Ok(Self { strike, times })
    }

    pub fn expiry(&self) -> f64 {
        *self.times.last().expect("validated")
    }
}

/// Indices of `wanted` within `times`.
fn match_dates(times: &[f64], wanted: &[f64]) -> Result<Vec<usize>> {
    wanted
        .iter()
        .map(|&t| {
            times
                .iter()
                .position(|&s| (s - t).abs() <= 1e-12 * t.max(1.0))
                .ok_or_else(|| Error::Config(format!("date {t} is not on the simulated grid")))
        })
        .collect()
}

/// Average of `S` over the spec dates.
pub fn asian_average(path: &PathGrid, spec: &AsianSpec) -> Result<f64> {
    if path.times == spec.times {
        return Ok(path.s.iter().sum::<f64>() / path.s.len() as f64);
    }
    let idx = match_dates(&path.times, &spec.times)?;
    Ok(idx.iter().map(|&i| path.s[i]).sum::<f64>() / idx.len() as f64)
}

/// `e^{-rT} max(average - K, 0)`.
pub fn asian_payoff(path: &PathGrid, spec: &AsianSpec, rate: f64) -> Result<f64> {
    let avg = asian_average(path, spec)?;
    Ok((-rate * spec.expiry()).exp() * (avg - spec.strike).max(0.0))
}

/// Path generator for either model.
#[derive(Debug, Clone)]
pub enum PathModel {
    Heston(PathBuilder),
    Svj(SvjPathBuilder),
}

impl PathModel {
    pub fn dimension(&self) -> usize {
        match self {
            PathModel::Heston(b) => b.dimension(),
            PathModel::Svj(b) => b.dimension(),
        }
    }

    pub fn rate(&self) -> f64 {
        match self {
            PathModel::Heston(b) => b.params().r,
            PathModel::Svj(b) => b.params().heston.r,
        }
    }

    pub fn build(&self, u: &[f64]) -> Result<PathGrid> {
        match self {
            PathModel::Heston(b) => b.build(u),
            PathModel::Svj(b) => Ok(b.build(u)?.0),
        }
    }
}

/// Discounted Asian payoff as a function of the path coordinates.
#[derive(Debug, Clone)]
pub struct AsianIntegrand {
    pub model: PathModel,
    pub spec: AsianSpec,
}

impl AsianIntegrand {
    pub fn new(model: PathModel, strike: f64) -> Result<Self> {
        let times = match &model {
            PathModel::Heston(b) => b.times().to_vec(),
            PathModel::Svj(b) => b.diffusion().times().to_vec(),
        };
        Ok(Self {
            spec: AsianSpec::new(strike, times)?,
            model,
        })
    }
}

impl Integrand for AsianIntegrand {
    fn dimension(&self) -> usize {
        self.model.dimension()
    }

    fn evaluate(&self, u: &[f64], out: &mut [f64]) -> Result<()> {
        let path = self.model.build(u)?;
        out[0] = asian_payoff(&path, &self.spec, self.model.rate())?;
        Ok(())
    }
}

/// Down-and-out call: pays `(S_T - K)^+` at the last date unless the price
/// was below `barrier` at some monitoring date.
#[derive(Debug, Clone, PartialEq)]
pub struct BarrierSpec {
    pub barrier: f64,
    pub strike: f64,
}

/// Whether the option is alive on every date of the path.
pub fn barrier_alive(path: &PathGrid, spec: &BarrierSpec) -> bool {
    path.s.iter().all(|&s| s >= spec.barrier)
}

/// Knock-out indicator times the discounted terminal payoff.
pub fn barrier_crude(path: &PathGrid, spec: &BarrierSpec, rate: f64) -> f64 {
    if !barrier_alive(path, spec) {
        return 0.0;
    }
    let s_t = *path.s.last().expect("path has dates");
    (-rate * path.expiry()).exp() * (s_t - spec.strike).max(0.0)
}

/// Survival probability of one lognormal step from `s` with log-mean
/// increment `m` and standard deviation `sd`: `P(S_next >= H)`.
pub fn survival_probability(s: f64, barrier: f64, m: f64, sd: f64) -> f64 {
    let x = (s / barrier).ln() + m;
    if sd > 0.0 {
        normal_cdf(x / sd)
    } else if x >= 0.0 {
        1.0
    } else {
        0.0
    }
}

/// One-step-survival estimate on a path whose variance part is already
/// filled in: each price step is drawn conditionally on staying above the
/// barrier and the survival probabilities are multiplied into a weight.
/// `uniforms[k]` drives step `k`. Returns `(weight * discounted payoff,
/// weight)`; `path.s` is overwritten with the conditioned prices.
pub fn barrier_onestep_survival(
    path: &mut PathGrid,
    spec: &BarrierSpec,
    rate: f64,
    rho: f64,
    uniforms: &[f64],
) -> (f64, f64) {
    let mut s = path.s0;
    let mut prev_t = 0.0;
    let mut weight = 1.0;
    for k in 0..path.len() {
        let dt = path.times[k] - prev_t;
        prev_t = path.times[k];
        let m = rate * dt - 0.5 * path.iv[k] + rho * path.z[k];
        let sd = ((1.0 - rho * rho) * path.iv[k]).max(0.0).sqrt();
        let p = survival_probability(s, spec.barrier, m, sd);
        weight *= p;
        if weight == 0.0 {
            path.s[k..].iter_mut().for_each(|x| *x = 0.0);
            return (0.0, 0.0);
        }
        // U = 1 - p + V p, taken through its complement for accuracy
        let normal = if sd > 0.0 {
            -norm_inv(p * (1.0 - uniforms[k]))
        } else {
            0.0
        };
        s *= (m + sd * normal).exp();
        path.s[k] = s;
    }
    let payoff = (-rate * path.expiry()).exp() * (s - spec.strike).max(0.0);
    (weight * payoff, weight)
}

/// How the barrier option is estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BarrierMethod {
    /// Plain knock-out indicator.
    Crude,
    /// Conditional sampling on one-step survival.
    OneStepSurvival,
}

/// Down-and-out call integrand over Heston paths; the price normals of the
/// path layout are reused as the conditional uniforms.
#[derive(Debug, Clone)]
pub struct BarrierIntegrand {
    pub builder: PathBuilder,
    pub spec: BarrierSpec,
    pub method: BarrierMethod,
}

impl BarrierIntegrand {
    pub fn new(builder: PathBuilder, spec: BarrierSpec, method: BarrierMethod) -> Result<Self> {
        if !(spec.barrier > 0.0 && spec.barrier < builder.params().s0) {
            return Err(Error::Config(format!("barrier {} must lie in (0, S0)", spec.barrier)));
        }
        Ok(Self { builder, spec, method })
    }
}

impl Integrand for BarrierIntegrand {
    fn dimension(&self) -> usize {
        self.builder.dimension()
    }

    fn evaluate(&self, u: &[f64], out: &mut [f64]) -> Result<()> {
        let rate = self.builder.params().r;
        match self.method {
            BarrierMethod::Crude => {
                out[0] = barrier_crude(&self.builder.build(u)?, &self.spec, rate);
            }
            BarrierMethod::OneStepSurvival => {
                let h = self.builder.dates();
                let aux = if u.len() >= 5 * h { &u[3 * h..5 * h] } else { &[][..] };
                let mut path = self.builder.variance_part(&u[..3 * h], aux)?;
                let schedule = self.builder.schedule();
                let uniforms: Vec<f64> = (1..=h).map(|k| u[3 * schedule.position(k) + 2]).collect();
                let rho = self.builder.params().rho;
                out[0] = barrier_onestep_survival(&mut path, &self.spec, rate, rho, &uniforms).0;
            }
        }
        Ok(())
    }
}
