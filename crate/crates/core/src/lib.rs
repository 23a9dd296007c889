//! Functional density power divergences.
//!
//! For a generator `phi` and exponent `alpha > 0` the divergence of a model
//! density `f` from a target `g` is
//!
//! ```text
//! phi(int f^(1+alpha)) - (1 + 1/alpha) phi(int f^alpha g) + (1/alpha) phi(int g^(1+alpha))
//! ```
//!
//! `phi = identity` gives the density power divergence and `phi = log` the
//! logarithmic density power divergence. The expression is a genuine
//! divergence exactly when `psi(x) = phi(e^x)` is convex and strictly
//! increasing on `[-inf, inf)` and finite on the reals.
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`phi`] | generators, `psi` transforms, built-in registry |
//! | [`density`] | densities, closed-form power and cross integrals |
//! | [`quadrature`] | adaptive Gauss-Kronrod integration |
//! | [`divergence`] | divergence evaluation, including the `alpha = 0` limit |
//! | [`certifier`] | grid-based validity check of a generator |
//! | [`adversarial`] | explicit counterexample densities for invalid generators |
//! | [`estimation`] | minimum-divergence estimation and a contamination harness |
//!
//! ```
//! use fdpd::{builtin_phi, fdpd, Density, DivergenceSpec};
//!
//! let spec = DivergenceSpec::new(builtin_phi("log").unwrap(), 1.0).unwrap();
//! let g = Density::uniform(0.0, 2.0).unwrap();
//! let f = Density::uniform(0.0, 1.0).unwrap();
//! let d = fdpd(&spec, &g, &f).unwrap();
//! assert!((d.value.finite().unwrap() - 2f64.ln()).abs() < 1e-12);
//! ```

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adversarial;
pub mod certifier;
pub mod corpus;
pub mod density;
pub mod divergence;
mod error;
pub mod estimation;
pub mod ext;
mod interp;
pub mod phi;
pub mod quadrature;

pub use adversarial::{
    disjoint_support_probe, holder_audit, power_pair_fdpd, search_counterexample, Construction,
    CounterexampleRecord, FailureMode, HolderAudit, SearchGrid,
};
pub use certifier::{
    certify, check_lambda_convex, check_strict_increasing, CertifierConfig, ValidityReport, Verdict,
    Violation, ViolationKind,
};
pub use density::{
    cross_integral_closed, parametric_density, power_density, power_integral_closed, uniform_pair,
    Density, PowerDensityParams,
};
pub use divergence::{
    dpd, dpd_limit_check, fdpd, fdpd_alpha_zero, ldpd, DivergenceSpec, DivergenceValue, Method,
};
pub use error::{Error, Result};
pub use estimation::{
    bias_experiment, contaminate, empirical_objective, minimize_scalar, BiasConfig, BiasRow,
    EstimationResult, Model, Sample,
};
pub use ext::{Combined, ExtReal};
pub use phi::{builtin_phi, phi_derivative_at_one, psi_of, PhiSpec, PsiTransform};
pub use quadrature::quadrature;
