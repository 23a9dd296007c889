//! Shared fixtures for the criterion benchmarks.

use fdpd::{builtin_phi, Density, DivergenceSpec};

pub fn normal_pair() -> (Density, Density) {
    (
        Density::normal(0.0, 1.0).expect("valid normal"),
        Density::normal(0.5, 1.3).expect("valid normal"),
    )
}

pub fn spec(name: &str, alpha: f64) -> DivergenceSpec {
    DivergenceSpec::new(builtin_phi(name).expect("builtin generator"), alpha).expect("valid spec")
}
