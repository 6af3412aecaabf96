//! Sobol nets, Owen scrambling and the randomized QMC / plain MC estimators.

mod estimator;
mod scramble;
mod sobol;

pub use estimator::{
    mc_estimate, mc_estimate_all, rqmc_estimate, rqmc_estimate_all, EstimatorReport, FnIntegrand, Integrand,
    DEFAULT_REPLICATES,
};
pub use scramble::{clamp_unit, scramble, ScrambleState, UNIT_HIGH, UNIT_LOW};
pub use sobol::{DigitalNet, DirectionTable};

/// Builds the first `2^m` points of a `d`-dimensional Sobol net.
pub fn generate_net(d: usize, m: u32) -> crate::Result<DigitalNet> {
    DigitalNet::new(d, m)
}
