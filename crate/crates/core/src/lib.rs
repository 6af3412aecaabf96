#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod distributions;
pub mod error;
pub mod extensions;
pub mod greeks;
pub mod heston;
pub mod paths;
pub mod payoffs;
pub mod qmc;
pub mod svj;

pub use error::{Error, Result};
