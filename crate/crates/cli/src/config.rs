//! Experiment configuration files.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Deserialize;
use svqmc::extensions::{
    BridgeQuadratureSampler, FactorParams, MultiAssetEuropeanIntegrand, MultiAssetParams, MultiAssetPathBuilder,
    NormalCoupling, ThreeHalvesParams, ThreeHalvesPathBuilder,
};
use svqmc::heston::{EuropeanIntegrand, EuropeanMethod, HestonParams};
use svqmc::paths::{uniform_times, PathBuilder, PathGrid, Scheme};
use svqmc::payoffs::{AsianIntegrand, BarrierIntegrand, BarrierMethod, BarrierSpec, PathModel};
use svqmc::qmc::Integrand;
use svqmc::svj::{svj_terminal, SvjParams, SvjPathBuilder};

use crate::error::{usage, CliError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Heston,
    Svj,
    Multiasset,
    #[serde(rename = "3over2")]
    ThreeHalves,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Payoff {
    European,
    Asian,
    Barrier,
    Basket,
}

/// Estimation scheme of one result row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Deserialize)]
pub enum SchemeName {
    #[serde(rename = "bridge")]
    Bridge,
    #[serde(rename = "cond-qmc")]
    CondQmc,
    #[serde(rename = "mc")]
    Mc,
    #[serde(rename = "qmc")]
    Qmc,
}

impl SchemeName {
    pub fn as_str(&self) -> &'static str {
        match self {
            SchemeName::Bridge => "bridge",
            SchemeName::CondQmc => "cond-qmc",
            SchemeName::Mc => "mc",
            SchemeName::Qmc => "qmc",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [SchemeName::Bridge, SchemeName::CondQmc, SchemeName::Mc, SchemeName::Qmc]
            .into_iter()
            .find(|k| k.as_str() == s)
    }

    pub fn is_monte_carlo(&self) -> bool {
        *self == SchemeName::Mc
    }

    fn path_scheme(&self) -> Scheme {
        match self {
            SchemeName::Bridge => Scheme::Bridge,
            _ => Scheme::Naive,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsBlock {
    pub s0: Option<f64>,
    pub v0: Option<f64>,
    pub kappa: Option<f64>,
    pub theta: Option<f64>,
    pub sigma: Option<f64>,
    pub epsilon: Option<f64>,
    pub rho: Option<f64>,
    pub r: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JumpsBlock {
    pub lambda: f64,
    pub mu_s: Option<f64>,
    pub mu_bar: Option<f64>,
    pub sigma_s: f64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorBlock {
    pub v0: f64,
    pub kappa: f64,
    pub theta: f64,
    pub sigma: f64,
    pub rho: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultiAssetBlock {
    pub s0: [f64; 2],
    pub r: f64,
    pub factors: [FactorBlock; 3],
    #[serde(default)]
    pub independent_normals: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum BarrierEstimator {
    #[default]
    Survival,
    Crude,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptionBlock {
    pub strike: f64,
    #[serde(default = "one")]
    pub expiry: f64,
    #[serde(default = "one_date")]
    pub dates: usize,
    pub barrier: Option<f64>,
    #[serde(default)]
    pub barrier_estimator: BarrierEstimator,
}

fn one() -> f64 {
    1.0
}

fn one_date() -> usize {
    1
}

fn default_q() -> usize {
    svqmc::qmc::DEFAULT_REPLICATES
}

fn default_substeps() -> usize {
    256
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerBlock {
    #[serde(default = "default_substeps")]
    pub substeps: usize,
}

/// One experiment: a model, a payoff, the schemes to compare and the
/// per-replicate sample sizes.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: Model,
    pub payoff: Payoff,
    pub schemes: Vec<SchemeName>,
    pub n: Vec<usize>,
    #[serde(default = "default_q")]
    pub q: usize,
    #[serde(default)]
    pub seed: u64,
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub params: ParamsBlock,
    pub jumps: Option<JumpsBlock>,
    pub multiasset: Option<MultiAssetBlock>,
    pub sampler: Option<SamplerBlock>,
    pub option: OptionBlock,
}

fn field(value: Option<f64>, name: &str) -> Result<f64, CliError> {
    value.ok_or_else(|| usage(format!("params.{name}: missing")))
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let config: Self = toml::from_str(text).map_err(|e| usage(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.schemes.is_empty() {
            return Err(usage("schemes: at least one scheme is required"));
        }
        if self.n.is_empty() {
            return Err(usage("n: at least one sample size is required"));
        }
        for &n in &self.n {
            if !n.is_power_of_two() || n > 1 << 30 {
                return Err(usage(format!("n: {n} is not a power of two up to 2^30")));
            }
        }
        if self.q < 2 {
            return Err(usage("q: at least two replicates are needed for a standard error"));
        }
        let opt = &self.option;
        if !(opt.strike > 0.0 && opt.expiry > 0.0 && opt.dates >= 1) {
            return Err(usage("option: strike and expiry must be positive and dates at least 1"));
        }
        for s in &self.schemes {
            if *s == SchemeName::CondQmc && !(self.payoff == Payoff::European && self.model == Model::Heston) {
                return Err(usage(
                    "schemes: cond-qmc is only available for the Heston european payoff",
                ));
            }
            if *s == SchemeName::Bridge && !opt.dates.is_power_of_two() {
                return Err(usage(format!(
                    "option.dates: bridge needs a power of two, got {}",
                    opt.dates
                )));
            }
        }
        match (self.model, self.payoff) {
            (Model::Heston, _) if self.payoff != Payoff::Basket => {}
            (Model::Svj, Payoff::European | Payoff::Asian) => {}
            (Model::ThreeHalves, Payoff::European | Payoff::Asian) => {}
            (Model::Multiasset, Payoff::European | Payoff::Basket) => {}
            (m, p) => return Err(usage(format!("payoff: {p:?} is not available for model {m:?}"))),
        }
        if self.payoff == Payoff::Barrier && opt.barrier.is_none() {
            return Err(usage("option.barrier: missing"));
        }
        if self.model == Model::Svj && self.jumps.is_none() {
            return Err(usage("jumps: missing for model svj"));
        }
        if self.model == Model::Multiasset && self.multiasset.is_none() {
            return Err(usage("multiasset: missing for model multiasset"));
        }
        // surface parameter errors before any work starts
        for s in &self.schemes {
            self.integrand(*s)?;
        }
        Ok(())
    }

    pub fn heston(&self) -> Result<HestonParams, CliError> {
        let p = &self.params;
        Ok(HestonParams::new(
            field(p.s0, "s0")?,
            field(p.v0, "v0")?,
            field(p.kappa, "kappa")?,
            field(p.theta, "theta")?,
            field(p.sigma, "sigma")?,
            field(p.rho, "rho")?,
            field(p.r, "r")?,
        )?)
    }

    pub fn svj(&self) -> Result<SvjParams, CliError> {
        let j = self.jumps.as_ref().ok_or_else(|| usage("jumps: missing"))?;
        let heston = self.heston()?;
        match (j.mu_s, j.mu_bar) {
            (Some(mu_s), None) => Ok(SvjParams::from_log_mean(heston, j.lambda, mu_s, j.sigma_s)?),
            (None, Some(mu_bar)) => Ok(SvjParams::new(heston, j.lambda, mu_bar, j.sigma_s)?),
            _ => Err(usage("jumps: give exactly one of mu_s and mu_bar")),
        }
    }

    pub fn multiasset(&self) -> Result<(MultiAssetParams, NormalCoupling), CliError> {
        let m = self.multiasset.as_ref().ok_or_else(|| usage("multiasset: missing"))?;
        let f = |b: &FactorBlock| FactorParams {
            v0: b.v0,
            kappa: b.kappa,
            theta: b.theta,
            sigma: b.sigma,
            rho: b.rho,
        };
        let params = MultiAssetParams {
            s0: m.s0,
            factors: [f(&m.factors[0]), f(&m.factors[1]), f(&m.factors[2])],
            r: m.r,
        };
        params.validate()?;
        let coupling = if m.independent_normals {
            NormalCoupling::Independent
        } else {
            NormalCoupling::Correlated
        };
        Ok((params, coupling))
    }

    pub fn three_halves(&self) -> Result<ThreeHalvesParams, CliError> {
        let p = &self.params;
        let params = ThreeHalvesParams {
            s0: field(p.s0, "s0")?,
            v0: field(p.v0, "v0")?,
            kappa: field(p.kappa, "kappa")?,
            theta: field(p.theta, "theta")?,
            epsilon: field(p.epsilon, "epsilon")?,
            rho: field(p.rho, "rho")?,
            r: field(p.r, "r")?,
        };
        params.validate()?;
        Ok(params)
    }

    fn times(&self) -> Vec<f64> {
        uniform_times(self.option.dates, self.option.expiry)
    }

    /// The function integrated for `scheme`.
    pub fn integrand(&self, scheme: SchemeName) -> Result<Box<dyn Integrand>, CliError> {
        let opt = &self.option;
        let path_scheme = scheme.path_scheme();
        let boxed: Box<dyn Integrand> = match (self.model, self.payoff) {
            (Model::Heston, Payoff::European) => {
                let method = if scheme == SchemeName::CondQmc {
                    EuropeanMethod::Conditional
                } else {
                    EuropeanMethod::Exact
                };
                Box::new(Selected {
                    inner: EuropeanIntegrand::new(self.heston()?, opt.strike, opt.expiry, method)?,
                    index: 0,
                })
            }
            (Model::Heston, Payoff::Asian) => {
                let b = PathBuilder::new(self.heston()?, self.times(), path_scheme)?;
                Box::new(AsianIntegrand::new(PathModel::Heston(b), opt.strike)?)
            }
            (Model::Heston, Payoff::Barrier) => {
                let b = PathBuilder::new(self.heston()?, self.times(), path_scheme)?;
                let spec = BarrierSpec {
                    barrier: opt.barrier.expect("validated"),
                    strike: opt.strike,
                };
                let method = match opt.barrier_estimator {
                    BarrierEstimator::Survival => BarrierMethod::OneStepSurvival,
                    BarrierEstimator::Crude => BarrierMethod::Crude,
                };
                Box::new(BarrierIntegrand::new(b, spec, method)?)
            }
            (Model::Svj, Payoff::European) => {
                let p = self.svj()?;
                let (k, t) = (opt.strike, opt.expiry);
                Box::new(PathFn::new(5, move |u: &[f64]| {
                    let s = svj_terminal(&p, t, u)?;
                    Ok((-p.heston.r * t).exp() * (s - k).max(0.0))
                }))
            }
            (Model::Svj, Payoff::Asian) => {
                let b = SvjPathBuilder::new(self.svj()?, self.times(), path_scheme)?;
                Box::new(AsianIntegrand::new(PathModel::Svj(b), opt.strike)?)
            }
            (Model::ThreeHalves, payoff) => {
                let p = self.three_halves()?;
                let substeps = self.sampler.as_ref().map_or(default_substeps(), |s| s.substeps);
                if !substeps.is_power_of_two() {
                    return Err(usage("sampler.substeps: must be a power of two"));
                }
                let b = ThreeHalvesPathBuilder::new(p, self.times(), path_scheme)?
                    .with_sampler(Arc::new(BridgeQuadratureSampler { substeps }));
                let (k, r, t) = (opt.strike, p.r, opt.expiry);
                let dim = b.dimension();
                Box::new(PathFn::new(dim, move |u: &[f64]| {
                    let path = b.build(u)?;
                    Ok((-r * t).exp() * (path_statistic(&path, payoff) - k).max(0.0))
                }))
            }
            (Model::Multiasset, payoff) => {
                let (params, coupling) = self.multiasset()?;
                if opt.dates == 1 {
                    let inner = MultiAssetEuropeanIntegrand {
                        params,
                        strikes: [opt.strike, opt.strike],
                        expiry: opt.expiry,
                        coupling,
                    };
                    let index = if payoff == Payoff::Basket { 6 } else { 2 };
                    return Ok(Box::new(Selected { inner, index }));
                }
                let b = MultiAssetPathBuilder::new(params, self.times(), path_scheme, coupling)?;
                let (k, r, t) = (opt.strike, params.r, opt.expiry);
                Box::new(PathFn::new(b.dimension(), move |u: &[f64]| {
                    let path = b.build(u)?;
                    let s1 = *path.s[0].last().expect("dates");
                    let s2 = *path.s[1].last().expect("dates");
                    let x = if payoff == Payoff::Basket { s1.max(s2) } else { s1 };
                    Ok((-r * t).exp() * (x - k).max(0.0))
                }))
            }
            (m, p) => return Err(usage(format!("payoff: {p:?} is not available for model {m:?}"))),
        };
        Ok(boxed)
    }
}

fn path_statistic(path: &PathGrid, payoff: Payoff) -> f64 {
    match payoff {
        Payoff::Asian => path.s.iter().sum::<f64>() / path.len() as f64,
        _ => *path.s.last().expect("dates"),
    }
}

/// Scalar integrand from a fallible closure.
struct PathFn<F> {
    dimension: usize,
    f: F,
}

impl<F> PathFn<F> {
    fn new(dimension: usize, f: F) -> Self {
        Self { dimension, f }
    }
}

impl<F: Fn(&[f64]) -> svqmc::Result<f64> + Sync> Integrand for PathFn<F> {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn evaluate(&self, u: &[f64], out: &mut [f64]) -> svqmc::Result<()> {
        out[0] = (self.f)(u)?;
        Ok(())
    }
}

/// Restricts a vector-valued integrand to one of its outputs.
struct Selected<I> {
    inner: I,
    index: usize,
}

impl<I: Integrand> Integrand for Selected<I> {
    fn dimension(&self) -> usize {
        self.inner.dimension()
    }

    fn evaluate(&self, u: &[f64], out: &mut [f64]) -> svqmc::Result<()> {
        let mut all = vec![0.0; self.inner.outputs()];
        self.inner.evaluate(u, &mut all)?;
        out[0] = all[self.index];
        Ok(())
    }
}
