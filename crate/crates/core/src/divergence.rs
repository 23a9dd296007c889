//! The functional density power divergence
//!
//! `FDPD(g, f) = phi(int f^(1+a)) - (1 + 1/a) phi(int f^a g) + (1/a) phi(int g^(1+a))`
//!
//! with its two named members (`phi = identity` gives the density power
//! divergence, `phi = log` the logarithmic one) and the `a -> 0` limit
//! `phi'(1) int g log(g/f)`.

use std::cell::Cell;
use std::f64::consts::PI;

use serde::Serialize;

use crate::density::{canonical_kind, cross_integral, power_integral, Density, DensityKind, Integral};
use crate::ext::{linear_combination, Combined, ExtReal};
use crate::phi::{builtin_phi, phi_derivative_at_one, PhiSpec};
use crate::quadrature::{integrate, QuadratureOptions, DEFAULT_REL_TOL};
use crate::{Error, Result};

/// Step used when `phi'(1)` has to be estimated numerically.
pub const DERIVATIVE_STEP: f64 = 1e-4;

/// One member of the family: a generator and an exponent.
#[derive(Debug, Clone)]
pub struct DivergenceSpec {
    phi: PhiSpec,
    alpha: f64,
}

impl DivergenceSpec {
    /// `alpha = 0` is accepted only when the generator has a positive
    /// derivative at one.
    pub fn new(phi: PhiSpec, alpha: f64) -> Result<Self> {
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::Config(format!("alpha must be finite and >= 0, got {alpha}")));
        }
        if alpha == 0.0 {
            let d = phi_derivative_at_one(&phi, DERIVATIVE_STEP)?;
            if !(d > 0.0) {
                return Err(Error::Config(format!(
                    "alpha = 0 needs phi'(1) > 0, but {} has phi'(1) = {d}",
                    phi.name()
                )));
            }
        }
        Ok(Self { phi, alpha })
    }

    pub fn phi(&self) -> &PhiSpec {
        &self.phi
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    Quadrature,
    Mixed,
}

impl Method {
    fn from_flags(flags: &[bool]) -> Self {
        if flags.iter().all(|&c| c) {
            Method::ClosedForm
        } else if flags.iter().all(|&c| !c) {
            Method::Quadrature
        } else {
            Method::Mixed
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Method::ClosedForm => "closed_form",
            Method::Quadrature => "quadrature",
            Method::Mixed => "mixed",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DivergenceValue {
    pub value: Combined,
    /// `phi(int f^(1+a))`, `phi(int f^a g)`, `phi(int g^(1+a))`.
    pub terms: [ExtReal; 3],
    /// The three integrals the terms were computed from.
    pub integrals: [f64; 3],
    pub method: Method,
}

impl DivergenceValue {
    /// Recombines the stored terms; agrees bit-for-bit with `value`.
    pub fn recompute(&self, alpha: f64) -> Combined {
        combine_terms(alpha, self.terms)
    }
}

/// `t1 - (1 + 1/alpha) t2 + (1/alpha) t3` over the extended reals.
pub fn combine_terms(alpha: f64, terms: [ExtReal; 3]) -> Combined {
    let inv = 1.0 / alpha;
    linear_combination(&[(1.0, terms[0]), (-(1.0 + inv), terms[1]), (inv, terms[2])])
}

fn check_positive_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "the three-term divergence needs alpha > 0 (use the alpha = 0 limit otherwise), got {alpha}"
        )))
    }
}

/// Evaluates the divergence of `f` (model) from `g` (truth) with quadrature
/// at the default relative tolerance where no closed form applies.
pub fn fdpd(spec: &DivergenceSpec, g: &Density, f: &Density) -> Result<DivergenceValue> {
    fdpd_with_tol(spec, g, f, DEFAULT_REL_TOL)
}

pub fn fdpd_with_tol(spec: &DivergenceSpec, g: &Density, f: &Density, rel_tol: f64) -> Result<DivergenceValue> {
    let alpha = spec.alpha;
    check_positive_alpha(alpha)?;
    let ff = power_integral(f, alpha, rel_tol)?;
    let fg = cross_integral(f, g, alpha, rel_tol)?;
    let gg = power_integral(g, alpha, rel_tol)?;
    fdpd_from_integrals(&spec.phi, alpha, [ff, fg, gg])
}

/// Applies the generator to precomputed integrals `[int f^(1+a), int f^a g, int g^(1+a)]`.
pub fn fdpd_from_integrals(phi: &PhiSpec, alpha: f64, integrals: [Integral; 3]) -> Result<DivergenceValue> {
    check_positive_alpha(alpha)?;
    let mut terms = [ExtReal::ZERO; 3];
    for (t, i) in terms.iter_mut().zip(&integrals) {
        *t = phi.eval(i.value)?;
    }
    Ok(DivergenceValue {
        value: combine_terms(alpha, terms),
        terms,
        integrals: integrals.map(|i| i.value),
        method: Method::from_flags(&integrals.map(|i| i.closed_form)),
    })
}

pub fn dpd(alpha: f64, g: &Density, f: &Density) -> Result<DivergenceValue> {
    fdpd(&DivergenceSpec::new(builtin_phi("identity")?, alpha)?, g, f)
}

pub fn ldpd(alpha: f64, g: &Density, f: &Density) -> Result<DivergenceValue> {
    fdpd(&DivergenceSpec::new(builtin_phi("log")?, alpha)?, g, f)
}

/// `int g log(g/f)`, infinite when `g` puts mass where `f` vanishes.
pub fn kl_divergence(g: &Density, f: &Density) -> Result<ExtReal> {
    if g.is_identical(f) {
        return Ok(ExtReal::ZERO);
    }
    match closed_kl(g, f) {
        Some(v) => Ok(v),
        None => kl_quadrature(g, f),
    }
}

fn kl_quadrature(g: &Density, f: &Density) -> Result<ExtReal> {
    let (a, b) = g.window();
    let mut points = g.break_points();
    points.extend(f.break_points().into_iter().filter(|&x| x > a && x < b));
    let escaped = Cell::new(false);
    let integrand = |x: f64| {
        let lg = g.ln_pdf(x);
        if lg == f64::NEG_INFINITY {
            return 0.0;
        }
        let lf = f.ln_pdf(x);
        if lf == f64::NEG_INFINITY {
            escaped.set(true);
            return 0.0;
        }
        lg.exp() * (lg - lf)
    };
    let value = integrate(integrand, &points, QuadratureOptions::default())?.value;
    if escaped.get() {
        Ok(ExtReal::PosInf)
    } else {
        Ok(ExtReal::Finite(value))
    }
}

fn closed_kl(g: &Density, f: &Density) -> Option<ExtReal> {
    let v = match (canonical_kind(g.kind()), canonical_kind(f.kind())) {
        (DensityKind::Normal { mean: mg, sd: sg }, DensityKind::Normal { mean: mf, sd: sf }) => {
            (sf / sg).ln() + (sg * sg + (mg - mf).powi(2)) / (2.0 * sf * sf) - 0.5
        }
        (DensityKind::Uniform { lo: ga, hi: gb }, DensityKind::Uniform { lo: fa, hi: fb }) => {
            if ga >= fa && gb <= fb {
                ((fb - fa) / (gb - ga)).ln()
            } else {
                return Some(ExtReal::PosInf);
            }
        }
        (DensityKind::Exponential { rate: rg }, DensityKind::Exponential { rate: rf }) => {
            (rg / rf).ln() + rf / rg - 1.0
        }
        (DensityKind::Power(pg), DensityKind::Power(pf)) if pg.gamma == pf.gamma => {
            if pg.theta <= pf.theta {
                (pg.gamma + 1.0) * (pf.theta / pg.theta).ln()
            } else {
                return Some(ExtReal::PosInf);
            }
        }
        _ => return None,
    };
    Some(ExtReal::Finite(v))
}

/// The `alpha = 0` member: `phi'(1) int g log(g/f)`.
pub fn fdpd_alpha_zero(phi: &PhiSpec, g: &Density, f: &Density) -> Result<ExtReal> {
    let scale = phi_derivative_at_one(phi, DERIVATIVE_STEP)?;
    if !(scale > 0.0) {
        return Err(Error::Domain(format!(
            "{} has phi'(1) = {scale}; the alpha = 0 divergence needs it positive",
            phi.name()
        )));
    }
    let kl = kl_divergence(g, f)?;
    Ok(kl.scale(scale).value().expect("positive scale"))
}

/// `dpd(alpha, g, f)` along a decreasing sequence of exponents.
pub fn dpd_limit_check(g: &Density, f: &Density, alphas: &[f64]) -> Result<Vec<f64>> {
    if alphas.iter().any(|&a| !(a > 0.0)) || alphas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Config("alphas must be positive and strictly decreasing".into()));
    }
    alphas
        .iter()
        .map(|&a| {
            dpd(a, g, f)?
                .value
                .finite()
                .ok_or_else(|| Error::Domain(format!("dpd at alpha = {a} is not finite")))
        })
        .collect()
}

/// Closed-form `ln` of a normal density, for tails where `pdf` underflows.
pub(crate) fn normal_ln_pdf(x: f64, mean: f64, sd: f64) -> f64 {
    let z = (x - mean) / sd;
    -0.5 * z * z - (sd * (2.0 * PI).sqrt()).ln()
}
