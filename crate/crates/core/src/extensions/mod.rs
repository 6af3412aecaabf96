//! Two-asset model with a shared variance factor, and the 3/2 model.

mod multiasset;
mod three_halves;

pub use multiasset::{
    multiasset_terminal, FactorParams, FactorPath, MultiAssetEuropeanIntegrand, MultiAssetParams, MultiAssetPath,
    MultiAssetPathBuilder, NormalCoupling,
};
pub use three_halves::{BridgeQuadratureSampler, InverseIntegralSampler, ThreeHalvesParams, ThreeHalvesPathBuilder};
