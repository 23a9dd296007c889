//! Counterexample search for generators that do not yield a divergence.
//!
//! Two constructions are used. Disjoint uniform pairs `(0, theta)` and
//! `(theta, 2 theta)` expose generators that fail to be strictly increasing
//! at zero, since their divergence collapses to
//! `(1 + 1/alpha)(phi(theta^-alpha) - phi(0))`. Pairs from the power family
//! `f(x) = (gamma+1) theta^(-gamma-1) x^gamma` on `(0, theta)` have exact
//! power and cross integrals, and as `gamma` approaches `-1/(1+alpha)` they
//! probe lambda-convexity of `psi` at weight `alpha/(1+alpha)`.
//!
//! Records store construction parameters only, so they replay bit-identically.

use serde::Serialize;

use crate::density::{
    cross_integral, cross_integral_closed, power_density, power_integral, power_integral_closed, uniform_pair,
    Density, PowerDensityParams,
};
use crate::divergence::combine_terms;
use crate::ext::{Combined, ExtReal};
use crate::phi::PhiSpec;
use crate::quadrature::DEFAULT_REL_TOL;
use crate::{Error, Result};

/// Below `-NEGATIVE_THRESHOLD * max(1, term scale)` a value counts as negative.
pub const NEGATIVE_THRESHOLD: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Construction {
    /// `g = f_tau`, `f = f_theta` from the power family with shape `gamma`.
    PowerPair { gamma: f64, theta: f64, tau: f64 },
    /// `f = U(0, theta)`, `g = U(theta, 2 theta)`.
    DisjointUniform { theta: f64 },
}

impl Construction {
    /// The `(g, f)` pair the record refers to.
    pub fn densities(&self) -> Result<(Density, Density)> {
        match *self {
            Construction::PowerPair { gamma, theta, tau } => Ok((
                power_density(PowerDensityParams::new(gamma, tau)?),
                power_density(PowerDensityParams::new(gamma, theta)?),
            )),
            Construction::DisjointUniform { theta } => {
                let (f, g) = uniform_pair(theta)?;
                Ok((g, f))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureMode {
    /// The divergence is negative.
    Negative,
    /// The divergence vanishes although the densities differ.
    ZeroUnequal,
    /// The three-term combination is `inf - inf`.
    Indeterminate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CounterexampleRecord {
    pub phi_name: String,
    pub alpha: f64,
    pub construction: Construction,
    pub fdpd_value: Combined,
    pub term_values: [ExtReal; 3],
    pub failure: FailureMode,
}

impl CounterexampleRecord {
    /// Recomputes the record from its construction parameters.
    pub fn replay(&self, phi: &PhiSpec) -> Result<CounterexampleRecord> {
        let (terms, value) = match self.construction {
            Construction::PowerPair { gamma, theta, tau } => power_pair_terms(phi, self.alpha, gamma, theta, tau)?,
            Construction::DisjointUniform { theta } => disjoint_terms(phi, self.alpha, theta)?,
        };
        let failure = classify(value, terms, self.alpha).ok_or_else(|| {
            Error::Domain("replayed construction no longer witnesses a failure".into())
        })?;
        Ok(CounterexampleRecord {
            phi_name: phi.name().to_string(),
            alpha: self.alpha,
            construction: self.construction,
            fdpd_value: value,
            term_values: terms,
            failure,
        })
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("alpha must be positive, got {alpha}")))
    }
}

/// Terms and value of the divergence of `f_theta` from `f_tau`, via the exact
/// power-family integrals.
pub fn power_pair_terms(
    phi: &PhiSpec,
    alpha: f64,
    gamma: f64,
    theta: f64,
    tau: f64,
) -> Result<([ExtReal; 3], Combined)> {
    check_alpha(alpha)?;
    if theta == tau {
        return Err(Error::Domain("power pair needs theta != tau".into()));
    }
    let f = PowerDensityParams::new(gamma, theta)?;
    let g = PowerDensityParams::new(gamma, tau)?;
    let ff = power_integral_closed(f, alpha)?;
    let fg = cross_integral_closed(f, g, alpha)?;
    let gg = power_integral_closed(g, alpha)?;
    let terms = [phi.eval(ff)?, phi.eval(fg)?, phi.eval(gg)?];
    Ok((terms, combine_terms(alpha, terms)))
}

pub fn power_pair_fdpd(phi: &PhiSpec, alpha: f64, gamma: f64, theta: f64, tau: f64) -> Result<Combined> {
    power_pair_terms(phi, alpha, gamma, theta, tau).map(|(_, v)| v)
}

fn disjoint_terms(phi: &PhiSpec, alpha: f64, theta: f64) -> Result<([ExtReal; 3], Combined)> {
    check_alpha(alpha)?;
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(Error::Domain(format!("theta must be positive, got {theta}")));
    }
    let power = phi.eval(theta.powf(-alpha))?;
    let terms = [power, phi.value_at_zero(), power];
    Ok((terms, combine_terms(alpha, terms)))
}

fn term_scale(terms: [ExtReal; 3], alpha: f64) -> f64 {
    let coefs = [1.0, 1.0 + 1.0 / alpha, 1.0 / alpha];
    terms
        .iter()
        .zip(coefs)
        .filter_map(|(t, c)| t.finite().map(|v| v.abs() * c))
        .fold(1.0, f64::max)
}

fn classify(value: Combined, terms: [ExtReal; 3], alpha: f64) -> Option<FailureMode> {
    match value {
        Combined::Indeterminate => Some(FailureMode::Indeterminate),
        Combined::Defined(ExtReal::NegInf) => Some(FailureMode::Negative),
        Combined::Defined(ExtReal::PosInf) => None,
        Combined::Defined(ExtReal::Finite(v)) => {
            if v < -NEGATIVE_THRESHOLD * term_scale(terms, alpha) {
                Some(FailureMode::Negative)
            } else if v == 0.0 {
                Some(FailureMode::ZeroUnequal)
            } else {
                None
            }
        }
    }
}

fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| (lo + (hi - lo) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Scales used by the disjoint-support probe by default: `e^-10 .. e^10`.
pub fn default_probe_thetas() -> Vec<f64> {
    log_spaced(-10.0, 10.0, 21)
}

/// Parameter grid of the power-pair scan.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchGrid {
    pub gammas: Vec<f64>,
    pub thetas: Vec<f64>,
    pub taus: Vec<f64>,
}

impl SearchGrid {
    /// Shapes `-1/(1+alpha) + 1/n` for `n = 2..=12` together with
    /// `{0, 0.5, 1, 2, 5}`; scales log-spaced over `[e^-10, e^10]`.
    pub fn default_for(alpha: f64) -> Self {
        let edge = -1.0 / (1.0 + alpha);
        let mut gammas: Vec<f64> = (2..=12).map(|n| edge + 1.0 / n as f64).collect();
        gammas.extend([0.0, 0.5, 1.0, 2.0, 5.0]);
        let scales = log_spaced(-10.0, 10.0, 41);
        Self {
            gammas,
            thetas: scales.clone(),
            taus: scales,
        }
    }
}

/// Looks for a witness that `phi` does not yield a divergence at `alpha`:
/// first the disjoint-support probe, then the power-pair grid ordered by
/// decreasing `|log(theta/tau)|`. The first witness in that order is returned.
pub fn search_counterexample(phi: &PhiSpec, alpha: f64, grid: &SearchGrid) -> Result<Option<CounterexampleRecord>> {
    check_alpha(alpha)?;
    if let Some(rec) = disjoint_support_probe(phi, alpha, &default_probe_thetas())? {
        return Ok(Some(rec));
    }

    let mut order: Vec<(usize, usize, usize)> = Vec::new();
    for gi in 0..grid.gammas.len() {
        for ti in 0..grid.thetas.len() {
            for ui in 0..grid.taus.len() {
                if grid.thetas[ti] != grid.taus[ui] {
                    order.push((gi, ti, ui));
                }
            }
        }
    }
    let spread = |&(_, ti, ui): &(usize, usize, usize)| (grid.thetas[ti] / grid.taus[ui]).ln().abs();
    // Stable sort keeps index order among equal spreads.
    order.sort_by(|a, b| spread(b).total_cmp(&spread(a)));

    for (gi, ti, ui) in order {
        let (gamma, theta, tau) = (grid.gammas[gi], grid.thetas[ti], grid.taus[ui]);
        let Ok((terms, value)) = power_pair_terms(phi, alpha, gamma, theta, tau) else {
            continue;
        };
        if let Some(failure) = classify(value, terms, alpha) {
            return Ok(Some(CounterexampleRecord {
                phi_name: phi.name().to_string(),
                alpha,
                construction: Construction::PowerPair { gamma, theta, tau },
                fdpd_value: value,
                term_values: terms,
                failure,
            }));
        }
    }
    Ok(None)
}

/// Divergence between the disjoint uniforms on `(0, theta)` and `(theta, 2 theta)`
/// for each `theta`; a non-positive or indeterminate value is a witness.
pub fn disjoint_support_probe(phi: &PhiSpec, alpha: f64, thetas: &[f64]) -> Result<Option<CounterexampleRecord>> {
    check_alpha(alpha)?;
    for &theta in thetas {
        let Ok((terms, value)) = disjoint_terms(phi, alpha, theta) else {
            continue;
        };
        let failure = match value {
            Combined::Indeterminate => Some(FailureMode::Indeterminate),
            Combined::Defined(ExtReal::Finite(0.0)) => Some(FailureMode::ZeroUnequal),
            Combined::Defined(v) if v < ExtReal::ZERO => Some(FailureMode::Negative),
            _ => None,
        };
        if let Some(failure) = failure {
            return Ok(Some(CounterexampleRecord {
                phi_name: phi.name().to_string(),
                alpha,
                construction: Construction::DisjointUniform { theta },
                fdpd_value: value,
                term_values: terms,
                failure,
            }));
        }
    }
    Ok(None)
}

/// Both sides of `(int f^(1+a))^(a/(1+a)) (int g^(1+a))^(1/(1+a)) >= int f^a g`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HolderAudit {
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
}

pub fn holder_audit(f: &Density, g: &Density, alpha: f64) -> Result<HolderAudit> {
    check_alpha(alpha)?;
    let ff = power_integral(f, alpha, DEFAULT_REL_TOL)?.value;
    let gg = power_integral(g, alpha, DEFAULT_REL_TOL)?.value;
    let fg = cross_integral(f, g, alpha, DEFAULT_REL_TOL)?.value;
    let lhs = ff.powf(alpha / (1.0 + alpha)) * gg.powf(1.0 / (1.0 + alpha));
    Ok(HolderAudit {
        lhs,
        rhs: fg,
        slack: lhs - fg,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phi::builtin_phi;

    fn phi(name: &str) -> PhiSpec {
        builtin_phi(name).unwrap()
    }

    #[test]
    fn power_pair_examples() {
        let v = power_pair_fdpd(&phi("identity"), 1.0, 0.0, 2.0, 1.0).unwrap();
        assert_eq!(v.finite(), Some(0.5));
        let v = power_pair_fdpd(&phi("log"), 1.0, 0.0, 2.0, 1.0).unwrap().finite().unwrap();
        assert!((v - 2f64.ln()).abs() < 1e-15);
        let v = power_pair_fdpd(&phi("neg_reciprocal"), 1.0, 0.0, 2.0, 1.0).unwrap();
        assert_eq!(v.finite(), Some(1.0));
        assert!(power_pair_fdpd(&phi("identity"), 1.0, -0.6, 2.0, 1.0).is_err());
        assert!(power_pair_fdpd(&phi("identity"), 1.0, 0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn disjoint_probe_examples() {
        assert!(disjoint_support_probe(&phi("identity"), 1.0, &[1.0]).unwrap().is_none());
        assert!(disjoint_support_probe(&phi("log"), 1.0, &[1.0]).unwrap().is_none());
        let (terms, v) = disjoint_terms(&phi("identity"), 1.0, 1.0).unwrap();
        assert_eq!(v.finite(), Some(2.0));
        assert_eq!(terms[1], ExtReal::ZERO);
        let rec = disjoint_support_probe(&phi("constant"), 1.0, &[1.0]).unwrap().unwrap();
        assert_eq!(rec.failure, FailureMode::ZeroUnequal);
        let rec = disjoint_support_probe(&phi("power(-1)"), 1.0, &[1.0]).unwrap().unwrap();
        assert_eq!(rec.failure, FailureMode::Negative);
    }

    #[test]
    fn search_examples() {
        assert!(search_counterexample(&phi("identity"), 1.0, &SearchGrid::default_for(1.0))
            .unwrap()
            .is_none());
        assert!(search_counterexample(&phi("log"), 0.5, &SearchGrid::default_for(0.5))
            .unwrap()
            .is_none());
        let rec = search_counterexample(&phi("neg_reciprocal"), 1.0, &SearchGrid::default_for(1.0))
            .unwrap()
            .unwrap();
        assert_eq!(rec.failure, FailureMode::Negative);
        assert!(rec.fdpd_value.finite().unwrap() < 0.0);
        assert_eq!(rec.replay(&phi("neg_reciprocal")).unwrap(), rec);
    }

    #[test]
    fn holder_examples() {
        let u1 = Density::uniform(0.0, 1.0).unwrap();
        let u2 = Density::uniform(0.0, 2.0).unwrap();
        assert_eq!(holder_audit(&u1, &u1, 1.0).unwrap().slack, 0.0);
        let h = holder_audit(&u1, &u2, 1.0).unwrap();
        assert!((h.lhs - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(h.rhs, 0.5);
        assert!((h.slack - 0.20710678118654752).abs() < 1e-15);
        let (f, g) = uniform_pair(1.0).unwrap();
        let h = holder_audit(&f, &g, 1.0).unwrap();
        assert_eq!(h.rhs, 0.0);
        assert_eq!(h.slack, h.lhs);
        assert!(h.lhs > 0.0);
    }
}
