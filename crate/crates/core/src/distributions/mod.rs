//! Special functions and distribution kernels.
//!
//! Every sampler in the engine is expressed as an inverse CDF so that a single
//! uniform coordinate (pseudo-random or from a scrambled net) drives each draw.
//! All functions here are pure.

mod bessel;
mod bessel_dist;
mod discrete;
mod gamma;
mod ncx2;
mod normal;
mod solve;

pub use bessel::{bessel_i, bessel_i_real, log_bessel_i_reduced, BesselSeries};
pub use bessel_dist::BesselDistribution;
pub use discrete::{binomial_quantile, poisson_cdf, poisson_quantile};
pub use gamma::{gamma_cdf, gamma_quantile, ln_gamma, regularized_gamma};
pub use ncx2::NoncentralChiSq;
pub use normal::{norm_inv, normal_cdf, normal_pdf, normal_quantile};
