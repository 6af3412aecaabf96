//! Exact simulation of the Heston model in quantile form: variance
//! transition, integrated variance by Fourier inversion, and the conditional
//! log-price law.

mod iv_law;
mod params;
mod pricing;

pub use iv_law::{IntegratedVarianceLaw, MAX_TERMS, MESH_WIDTH, QUANTILE_TOL, TRUNCATION_EPS, UPPER_SDS};
pub use params::{recover_stoch_integral, variance_transition_quantile, HestonParams, SquareRootProcess};
pub use pricing::{
    black_scholes_call, black_scholes_put, conditional_european_call, exact_terminal_price, sample_variance_step,
    terminal_logprice_quantile, ConditionedLogPriceLaw, EuropeanIntegrand, EuropeanMethod,
};
