//! Fixtures shared by the benchmarks in `benches/`.

use dynkin_core::equilibrium::{build_profile, EquilibriumProfile};
use dynkin_core::{GbmRealOptionModel, ValueOracle};

pub fn standard_oracle() -> ValueOracle {
    GbmRealOptionModel::standard().into()
}

/// Equilibrium at `p1 = 0.15`, `p2 = 0.3`, `x = 1.5`, in the action region.
pub fn action_profile(oracle: &ValueOracle) -> EquilibriumProfile {
    build_profile(oracle, 0.15, 0.3, 1.5).expect("standard profile")
}
