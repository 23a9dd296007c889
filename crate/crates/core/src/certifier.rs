//! Numerical certification of generators.
//!
//! A generator `phi` yields a valid divergence for a fixed `alpha > 0` if and
//! only if `psi(x) = phi(e^x)` is strictly increasing on `[-inf, inf)`,
//! convex, and finite on the reals. The certifier tests these three
//! properties on a bounded grid. Convexity is checked through
//! lambda-convexity, `psi(l x + (1-l) y) <= l psi(x) + (1-l) psi(y)`, for a
//! short list of weights that always includes `alpha/(1+alpha)` and `1/2`.
//!
//! Verdicts are relative to the grid recorded in the report: a falsifiable
//! numerical check, not a proof.

use serde::Serialize;

use crate::ext::ExtReal;
use crate::phi::{psi_of, PhiSpec, PsiTransform};
use crate::{Error, Result};

/// Violations kept per check; the total count is reported separately.
pub const MAX_RECORDED_VIOLATIONS: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertifierConfig {
    pub grid_lo: f64,
    pub grid_hi: f64,
    pub grid_points: usize,
    /// Largest decrease between neighbouring grid values still counted as a flat step.
    pub strictness_eps: f64,
    pub lambda_list: Vec<f64>,
}

impl Default for CertifierConfig {
    fn default() -> Self {
        Self::for_alpha(1.0)
    }
}

impl CertifierConfig {
    /// Grid `[-20, 20]` with 2048 points and weights `{a/(1+a), 1/2, 0.1, 0.9}`.
    pub fn for_alpha(alpha: f64) -> Self {
        let mut lambda_list = vec![alpha / (1.0 + alpha)];
        for l in [0.5, 0.1, 0.9] {
            if !lambda_list.contains(&l) {
                lambda_list.push(l);
            }
        }
        Self {
            grid_lo: -20.0,
            grid_hi: 20.0,
            grid_points: 2048,
            strictness_eps: 1e-12,
            lambda_list,
        }
    }

    pub fn with_grid(mut self, lo: f64, hi: f64, points: usize) -> Self {
        self.grid_lo = lo;
        self.grid_hi = hi;
        self.grid_points = points;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.grid_lo.is_finite() && self.grid_hi.is_finite() && self.grid_lo < self.grid_hi) {
            return Err(Error::Config(format!(
                "certifier grid needs finite lo < hi, got [{}, {}]",
                self.grid_lo, self.grid_hi
            )));
        }
        if self.grid_points < 64 {
            return Err(Error::Config(format!(
                "certifier grid needs at least 64 points, got {}",
                self.grid_points
            )));
        }
        if !(self.strictness_eps >= 0.0) {
            return Err(Error::Config("strictness_eps must be non-negative".into()));
        }
        if let Some(l) = self.lambda_list.iter().find(|l| !(**l > 0.0 && **l < 1.0)) {
            return Err(Error::Config(format!("lambda {l} is outside (0, 1)")));
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        let n = self.grid_points;
        let step = (self.grid_hi - self.grid_lo) / (n - 1) as f64;
        (0..n)
            .map(|i| {
                if i == n - 1 {
                    self.grid_hi
                } else {
                    self.grid_lo + step * i as f64
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    /// `psi` decreases between neighbouring grid points.
    Decrease,
    /// `psi` is flat over more than one grid step.
    Plateau,
    /// `phi(0)` is not strictly below `psi(grid_lo)`.
    NotAboveZeroLimit,
    /// `psi` is infinite at a finite point.
    NonFinite,
    /// The lambda-convexity inequality fails.
    Convexity,
}

/// Evidence against validity. For monotonicity records `lhs` and `rhs` hold
/// `psi(x)` and `psi(y)`; for convexity they hold `psi(l x + (1-l) y)` and
/// `l psi(x) + (1-l) psi(y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub x: ExtReal,
    pub y: ExtReal,
    pub lambda: Option<f64>,
    pub lhs: ExtReal,
    pub rhs: ExtReal,
}

/// Outcome of one grid check.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub ok: bool,
    pub violations: Vec<Violation>,
    pub total_violations: usize,
    /// Points where `psi` could not be evaluated.
    pub unevaluable: usize,
}

impl CheckOutcome {
    fn record(&mut self, v: Violation) {
        self.total_violations += 1;
        if self.violations.len() < MAX_RECORDED_VIOLATIONS {
            self.violations.push(v);
        }
    }

    fn finish(mut self) -> Self {
        self.ok = self.total_violations == 0 && self.unevaluable == 0;
        self
    }

    fn merge(&mut self, other: CheckOutcome) {
        for v in other.violations {
            if self.violations.len() < MAX_RECORDED_VIOLATIONS {
                self.violations.push(v);
            }
        }
        self.total_violations += other.total_violations;
        self.unevaluable += other.unevaluable;
    }
}

fn sample(psi: &PsiTransform, grid: &[f64]) -> Vec<Option<ExtReal>> {
    grid.iter().map(|&x| psi.at(x).ok()).collect()
}

/// Strict monotonicity on the grid, plus `psi(-inf) = phi(0) < psi(grid_lo)`.
pub fn check_strict_increasing(psi: &PsiTransform, cfg: &CertifierConfig) -> Result<CheckOutcome> {
    cfg.validate()?;
    let grid = cfg.grid();
    let values = sample(psi, &grid);
    let mut out = CheckOutcome {
        unevaluable: values.iter().filter(|v| v.is_none()).count(),
        ..CheckOutcome::default()
    };

    if let Some(first) = values[0] {
        let zero = psi.source().value_at_zero();
        if !(zero < first) {
            out.record(Violation {
                kind: ViolationKind::NotAboveZeroLimit,
                x: ExtReal::NegInf,
                y: ExtReal::Finite(grid[0]),
                lambda: None,
                lhs: zero,
                rhs: first,
            });
        }
    }

    let mut flat_run = 0usize;
    for i in 0..grid.len() - 1 {
        let (Some(a), Some(b)) = (values[i], values[i + 1]) else {
            flat_run = 0;
            continue;
        };
        let violation = |kind| Violation {
            kind,
            x: ExtReal::Finite(grid[i]),
            y: ExtReal::Finite(grid[i + 1]),
            lambda: None,
            lhs: a,
            rhs: b,
        };
        if b > a {
            flat_run = 0;
            continue;
        }
        let flat = match (a, b) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => b - a > -cfg.strictness_eps,
            _ => a == b,
        };
        if flat {
            flat_run += 1;
            if flat_run == 2 {
                out.record(violation(ViolationKind::Plateau));
            }
        } else {
            flat_run = 0;
            out.record(violation(ViolationKind::Decrease));
        }
    }
    Ok(out.finish())
}

/// Tests one pair: `psi(l x + (1-l) y) <= l psi(x) + (1-l) psi(y) + tol`
/// with `tol = 1e-10 max(1, |rhs|)`. `Ok(None)` means the inequality holds.
pub fn lambda_convex_at(psi: &PsiTransform, lambda: f64, x: f64, y: f64) -> Result<Option<Violation>> {
    let px = psi.at(x)?;
    let py = psi.at(y)?;
    lambda_convex_with(psi, lambda, x, y, px, py)
}

fn lambda_convex_with(
    psi: &PsiTransform,
    lambda: f64,
    x: f64,
    y: f64,
    px: ExtReal,
    py: ExtReal,
) -> Result<Option<Violation>> {
    let (ExtReal::Finite(px), ExtReal::Finite(py)) = (px, py) else {
        return Err(Error::Domain("psi is not finite at a convexity test point".into()));
    };
    let z = lambda * x + (1.0 - lambda) * y;
    let lhs = psi.at(z)?;
    let rhs = lambda * px + (1.0 - lambda) * py;
    let tol = 1e-10 * rhs.abs().max(1.0);
    if lhs <= ExtReal::Finite(rhs + tol) {
        Ok(None)
    } else {
        Ok(Some(Violation {
            kind: ViolationKind::Convexity,
            x: ExtReal::Finite(x),
            y: ExtReal::Finite(y),
            lambda: Some(lambda),
            lhs,
            rhs: ExtReal::Finite(rhs),
        }))
    }
}

/// Lambda-convexity over every ordered pair of grid points. The interpolated
/// point is evaluated directly rather than snapped to the grid.
pub fn check_lambda_convex(psi: &PsiTransform, lambda: f64, cfg: &CertifierConfig) -> Result<CheckOutcome> {
    cfg.validate()?;
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::Config(format!("lambda must lie in (0, 1), got {lambda}")));
    }
    let grid = cfg.grid();
    let values = sample(psi, &grid);
    let mut out = CheckOutcome::default();
    for (i, &x) in grid.iter().enumerate() {
        let Some(px @ ExtReal::Finite(_)) = values[i] else {
            out.unevaluable += 1;
            continue;
        };
        for (j, &y) in grid.iter().enumerate() {
            if i == j {
                continue;
            }
            let Some(py @ ExtReal::Finite(_)) = values[j] else {
                continue;
            };
            match lambda_convex_with(psi, lambda, x, y, px, py) {
                Ok(Some(v)) => out.record(v),
                Ok(None) => {}
                Err(_) => out.unevaluable += 1,
            }
        }
    }
    Ok(out.finish())
}

fn check_finite(psi: &PsiTransform, cfg: &CertifierConfig) -> CheckOutcome {
    let grid = cfg.grid();
    let mut out = CheckOutcome::default();
    for (x, v) in grid.iter().zip(sample(psi, &grid)) {
        match v {
            None => out.unevaluable += 1,
            Some(ExtReal::Finite(_)) => {}
            Some(inf) => out.record(Violation {
                kind: ViolationKind::NonFinite,
                x: ExtReal::Finite(*x),
                y: ExtReal::Finite(*x),
                lambda: None,
                lhs: inf,
                rhs: inf,
            }),
        }
    }
    out.finish()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Valid,
    Invalid,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidityReport {
    pub phi: String,
    pub alpha: f64,
    pub verdict: Verdict,
    pub monotone_ok: bool,
    pub convex_ok: bool,
    pub finite_ok: bool,
    pub violations: Vec<Violation>,
    pub total_violations: usize,
    pub unevaluable_points: usize,
    pub grid_used: CertifierConfig,
}

impl ValidityReport {
    pub fn has_convexity_violation(&self) -> bool {
        self.violations.iter().any(|v| v.kind == ViolationKind::Convexity)
    }
}

/// Runs the monotonicity, finiteness and lambda-convexity checks. The weights
/// `alpha/(1+alpha)` and `1/2` are always added to the configured list.
pub fn certify(phi: &PhiSpec, alpha: f64, cfg: &CertifierConfig) -> Result<ValidityReport> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::Config(format!("certification needs alpha > 0, got {alpha}")));
    }
    let mut cfg = cfg.clone();
    for l in [alpha / (1.0 + alpha), 0.5] {
        if !cfg.lambda_list.contains(&l) {
            cfg.lambda_list.push(l);
        }
    }
    cfg.validate()?;

    let psi = psi_of(phi);
    let monotone = check_strict_increasing(&psi, &cfg)?;
    let finite = check_finite(&psi, &cfg);
    let mut convex = CheckOutcome::default();
    for &l in &cfg.lambda_list {
        convex.merge(check_lambda_convex(&psi, l, &cfg)?);
    }
    let convex = convex.finish();

    let total_violations =
        monotone.total_violations + finite.total_violations + convex.total_violations;
    let unevaluable_points = monotone.unevaluable.max(finite.unevaluable);
    let verdict = if total_violations > 0 {
        Verdict::Invalid
    } else if monotone.ok && convex.ok && finite.ok {
        Verdict::Valid
    } else {
        Verdict::Inconclusive
    };

    let mut violations = Vec::new();
    for v in monotone
        .violations
        .iter()
        .chain(&finite.violations)
        .chain(&convex.violations)
    {
        if violations.len() < MAX_RECORDED_VIOLATIONS {
            violations.push(*v);
        }
    }
    Ok(ValidityReport {
        phi: phi.name().to_string(),
        alpha,
        verdict,
        monotone_ok: monotone.ok,
        convex_ok: convex.ok,
        finite_ok: finite.ok,
        violations,
        total_violations,
        unevaluable_points,
        grid_used: cfg,
    })
}
