//! Probability densities on the real line.
//!
//! Every parametric family carries closed forms for the power integral
//! `int f^(1+alpha)` and, for compatible pairs, the cross integral
//! `int f^alpha g`. Adaptive quadrature is the fallback and the oracle used
//! to validate the closed forms.
//!
//! Unbounded supports are truncated for quadrature: normals at
//! `mean +/- 12 sd` and exponentials at `70 / rate`, each discarding less
//! than `1e-30` of probability mass.

use std::f64::consts::PI;
use std::fmt;
use std::io::Read;
use std::sync::Arc;

use crate::quadrature::{integrate, QuadratureOptions};
use crate::{Error, Result};

const NORMAL_TRUNCATION_SDS: f64 = 12.0;
const EXPONENTIAL_TRUNCATION_RATES: f64 = 70.0;
/// Tolerated deviation of a tabulated density's raw mass from one.
pub const TABULATED_MASS_WARNING: f64 = 1e-3;

/// Parameters of `f(x) = (gamma+1) theta^(-gamma-1) x^gamma` on `(0, theta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerDensityParams {
    pub gamma: f64,
    pub theta: f64,
}

impl PowerDensityParams {
    pub fn new(gamma: f64, theta: f64) -> Result<Self> {
        if !(gamma > -1.0 && gamma.is_finite()) {
            return Err(Error::Domain(format!("power density needs gamma > -1, got {gamma}")));
        }
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(Error::Domain(format!("power density needs theta > 0, got {theta}")));
        }
        Ok(Self { gamma, theta })
    }

    /// Whether `int f^(1+alpha)` is finite, i.e. `gamma > -1/(1+alpha)`.
    pub fn admits(&self, alpha: f64) -> bool {
        1.0 + self.gamma * (1.0 + alpha) > 0.0
    }

    fn check_alpha(&self, alpha: f64) -> Result<()> {
        if self.admits(alpha) {
            Ok(())
        } else {
            Err(Error::DivergentIntegral {
                gamma: self.gamma,
                alpha,
            })
        }
    }
}

/// `C = (gamma+1)^(1+alpha) / (1 + gamma (1+alpha))`.
pub fn power_family_constant(gamma: f64, alpha: f64) -> f64 {
    (gamma + 1.0).powf(1.0 + alpha) / (1.0 + gamma * (1.0 + alpha))
}

/// Exact `int f_theta^(1+alpha) = C theta^(-alpha)`.
pub fn power_integral_closed(params: PowerDensityParams, alpha: f64) -> Result<f64> {
    params.check_alpha(alpha)?;
    Ok(power_family_constant(params.gamma, alpha) * params.theta.powf(-alpha))
}

/// Exact `int f_theta^alpha f_tau` for two members of the same power family
/// (`p1` has scale theta, `p2` scale tau).
pub fn cross_integral_closed(p1: PowerDensityParams, p2: PowerDensityParams, alpha: f64) -> Result<f64> {
    if p1.gamma != p2.gamma {
        return Err(Error::UnsupportedPair(format!(
            "power densities with different shapes ({} and {})",
            p1.gamma, p2.gamma
        )));
    }
    p1.check_alpha(alpha)?;
    let gamma = p1.gamma;
    let (theta, tau) = (p1.theta, p2.theta);
    let c = power_family_constant(gamma, alpha);
    Ok(if theta > tau {
        c * theta.powf(-gamma * alpha - alpha) * tau.powf(gamma * alpha)
    } else {
        c * theta.powf(1.0 + gamma - alpha) * tau.powf(-gamma - 1.0)
    })
}

/// A non-negative piecewise-linear density, normalised to unit mass.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl PiecewiseLinear {
    /// Returns the normalised table together with its raw trapezoidal mass.
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<(Self, f64)> {
        if xs.len() != ys.len() || xs.len() < 2 {
            return Err(Error::Config("tabulated density needs at least two (x, pdf) rows".into()));
        }
        if xs.iter().chain(&ys).any(|v| !v.is_finite()) {
            return Err(Error::Config("tabulated density values must be finite".into()));
        }
        if ys.iter().any(|&y| y < 0.0) {
            return Err(Error::Config("tabulated density values must be non-negative".into()));
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("tabulated density abscissae must be strictly increasing".into()));
        }
        let mass: f64 = xs
            .windows(2)
            .zip(ys.windows(2))
            .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
            .sum();
        if !(mass > 0.0) {
            return Err(Error::Config("tabulated density has zero mass".into()));
        }
        let ys = ys.into_iter().map(|y| y / mass).collect();
        Ok((Self { xs, ys }, mass))
    }

    fn eval(&self, x: f64) -> f64 {
        let (lo, hi) = (self.xs[0], self.xs[self.xs.len() - 1]);
        if !(x >= lo && x <= hi) {
            return 0.0;
        }
        match self.xs.binary_search_by(|p| p.total_cmp(&x)) {
            Ok(i) => self.ys[i],
            Err(i) => {
                let (x0, x1) = (self.xs[i - 1], self.xs[i]);
                let t = (x - x0) / (x1 - x0);
                self.ys[i - 1] + t * (self.ys[i] - self.ys[i - 1])
            }
        }
    }
}

#[derive(Debug, Clone)]
pub enum DensityKind {
    Power(PowerDensityParams),
    Uniform { lo: f64, hi: f64 },
    Normal { mean: f64, sd: f64 },
    Exponential { rate: f64 },
    Tabulated(Arc<PiecewiseLinear>),
}

/// A density with a label for reports.
#[derive(Debug, Clone)]
pub struct Density {
    kind: DensityKind,
    label: String,
}

impl fmt::Display for Density {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

/// Canonical form for identity and closed-form matching: a flat power density is a uniform.
pub(crate) fn canonical_kind(kind: &DensityKind) -> DensityKind {
    match kind {
        DensityKind::Power(p) if p.gamma == 0.0 => DensityKind::Uniform {
            lo: 0.0,
            hi: p.theta,
        },
        other => other.clone(),
    }
}

pub fn power_density(params: PowerDensityParams) -> Density {
    Density {
        kind: DensityKind::Power(params),
        label: format!("power:{},{}", params.gamma, params.theta),
    }
}

/// The disjoint pair `theta^-1 1(0, theta)` and `theta^-1 1(theta, 2 theta)`.
pub fn uniform_pair(theta: f64) -> Result<(Density, Density)> {
    Ok((Density::uniform(0.0, theta)?, Density::uniform(theta, 2.0 * theta)?))
}

/// Builds a model density: `normal` (mean, sd), `exponential` (rate),
/// `uniform` (theta, meaning `(0, theta)`; two parameters give `(lo, hi)`) or
/// `power` (gamma, theta).
pub fn parametric_density(family: &str, params: &[f64]) -> Result<Density> {
    let arity = |n: usize| -> Result<()> {
        if params.len() == n {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "{family} takes {n} parameter(s), got {}",
                params.len()
            )))
        }
    };
    match family {
        "normal" => {
            arity(2)?;
            Density::normal(params[0], params[1])
        }
        "exponential" => {
            arity(1)?;
            Density::exponential(params[0])
        }
        "uniform" if params.len() == 2 => Density::uniform(params[0], params[1]),
        "uniform" => {
            arity(1)?;
            Density::uniform(0.0, params[0])
        }
        "power" => {
            arity(2)?;
            Ok(power_density(PowerDensityParams::new(params[0], params[1])?))
        }
        other => Err(Error::Config(format!("unknown density family {other:?}"))),
    }
}

impl Density {
    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::Domain(format!("uniform needs lo < hi, got ({lo}, {hi})")));
        }
        Ok(Self {
            kind: DensityKind::Uniform { lo, hi },
            label: format!("uniform:{lo},{hi}"),
        })
    }

    pub fn normal(mean: f64, sd: f64) -> Result<Self> {
        if !mean.is_finite() || !(sd > 0.0 && sd.is_finite()) {
            return Err(Error::Domain(format!("normal needs finite mean and sd > 0, got ({mean}, {sd})")));
        }
        Ok(Self {
            kind: DensityKind::Normal { mean, sd },
            label: format!("normal:{mean},{sd}"),
        })
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(Error::Domain(format!("exponential needs rate > 0, got {rate}")));
        }
        Ok(Self {
            kind: DensityKind::Exponential { rate },
            label: format!("exponential:{rate}"),
        })
    }

    /// A piecewise-linear density through `(x, pdf)` knots. The returned float is
    /// the raw mass before renormalisation.
    pub fn piecewise_linear(label: &str, xs: Vec<f64>, ys: Vec<f64>) -> Result<(Self, f64)> {
        let (table, mass) = PiecewiseLinear::new(xs, ys)?;
        Ok((
            Self {
                kind: DensityKind::Tabulated(Arc::new(table)),
                label: label.to_string(),
            },
            mass,
        ))
    }

    /// Reads a CSV with header `x,pdf`. Returns the density and, if the raw mass
    /// is off by more than [`TABULATED_MASS_WARNING`], a warning message.
    pub fn from_csv<R: Read>(label: &str, reader: R) -> Result<(Self, Option<String>)> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["x", "pdf"] {
            return Err(Error::Parse(format!(
                "expected header x,pdf, found {}",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (row, record) in rdr.records().enumerate() {
            let record = record?;
            let field = |i: usize| -> Result<f64> {
                record
                    .get(i)
                    .and_then(|s| s.parse::<f64>().ok())
                    .ok_or_else(|| Error::Parse(format!("row {}: bad number", row + 2)))
            };
            xs.push(field(0)?);
            ys.push(field(1)?);
        }
        let (density, mass) = Self::piecewise_linear(label, xs, ys)?;
        let warning = ((mass - 1.0).abs() > TABULATED_MASS_WARNING)
            .then(|| format!("tabulated density {label} had mass {mass}; renormalised to 1"));
        Ok((density, warning))
    }

    pub fn kind(&self) -> &DensityKind {
        &self.kind
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: &str) -> Self {
        self.label = label.to_string();
        self
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match &self.kind {
            DensityKind::Power(p) => {
                if x > 0.0 && x < p.theta {
                    (p.gamma + 1.0) * p.theta.powf(-p.gamma - 1.0) * x.powf(p.gamma)
                } else {
                    0.0
                }
            }
            DensityKind::Uniform { lo, hi } => {
                if x >= *lo && x <= *hi {
                    1.0 / (hi - lo)
                } else {
                    0.0
                }
            }
            DensityKind::Normal { mean, sd } => {
                let z = (x - mean) / sd;
                (-0.5 * z * z).exp() / (sd * (2.0 * PI).sqrt())
            }
            DensityKind::Exponential { rate } => {
                if x >= 0.0 {
                    rate * (-rate * x).exp()
                } else {
                    0.0
                }
            }
            DensityKind::Tabulated(t) => t.eval(x),
        }
    }

    /// `ln pdf(x)`, exact in the tails of the normal and exponential families.
    pub fn ln_pdf(&self, x: f64) -> f64 {
        match &self.kind {
            DensityKind::Normal { mean, sd } => crate::divergence::normal_ln_pdf(x, *mean, *sd),
            DensityKind::Exponential { rate } if x >= 0.0 => rate.ln() - rate * x,
            _ => self.pdf(x).ln(),
        }
    }

    /// The true support `(a, b)`; either end may be infinite.
    pub fn support(&self) -> (f64, f64) {
        match &self.kind {
            DensityKind::Power(p) => (0.0, p.theta),
            DensityKind::Uniform { lo, hi } => (*lo, *hi),
            DensityKind::Normal { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            DensityKind::Exponential { .. } => (0.0, f64::INFINITY),
            DensityKind::Tabulated(t) => (t.xs[0], t.xs[t.xs.len() - 1]),
        }
    }

    /// The finite interval used for quadrature.
    pub fn window(&self) -> (f64, f64) {
        match &self.kind {
            DensityKind::Normal { mean, sd } => (
                mean - NORMAL_TRUNCATION_SDS * sd,
                mean + NORMAL_TRUNCATION_SDS * sd,
            ),
            DensityKind::Exponential { rate } => (0.0, EXPONENTIAL_TRUNCATION_RATES / rate),
            _ => self.support(),
        }
    }

    pub(crate) fn break_points(&self) -> Vec<f64> {
        let (a, b) = self.window();
        match &self.kind {
            DensityKind::Tabulated(t) => t.xs.clone(),
            DensityKind::Normal { mean, .. } => vec![a, *mean, b],
            _ => vec![a, b],
        }
    }

    /// Whether two densities are the same law, judged on their parameters.
    pub fn is_identical(&self, other: &Density) -> bool {
        match (canonical_kind(&self.kind), canonical_kind(&other.kind)) {
            (DensityKind::Power(a), DensityKind::Power(b)) => a == b,
            (DensityKind::Uniform { lo: a0, hi: a1 }, DensityKind::Uniform { lo: b0, hi: b1 }) => {
                a0 == b0 && a1 == b1
            }
            (DensityKind::Normal { mean: m0, sd: s0 }, DensityKind::Normal { mean: m1, sd: s1 }) => {
                m0 == m1 && s0 == s1
            }
            (DensityKind::Exponential { rate: r0 }, DensityKind::Exponential { rate: r1 }) => r0 == r1,
            (DensityKind::Tabulated(a), DensityKind::Tabulated(b)) => Arc::ptr_eq(&a, &b) || a == b,
            _ => false,
        }
    }

    /// Checks membership in `L_alpha`: `int f^(1+alpha) < inf`.
    pub fn check_l_alpha(&self, alpha: f64) -> Result<()> {
        match &self.kind {
            DensityKind::Power(p) if !p.admits(alpha) => Err(Error::NotInLAlpha {
                alpha,
                detail: format!("{} has gamma <= -1/(1+alpha)", self.label),
            }),
            _ => Ok(()),
        }
    }

    /// `int f^(1+alpha)` when the family has an analytic form.
    pub fn closed_power_integral(&self, alpha: f64) -> Option<Result<f64>> {
        let v = match &self.kind {
            DensityKind::Power(p) => return Some(power_integral_closed(*p, alpha)),
            DensityKind::Uniform { lo, hi } => (hi - lo).powf(-alpha),
            DensityKind::Normal { sd, .. } => {
                1.0 / ((1.0 + alpha).sqrt() * (2.0 * PI).powf(alpha / 2.0) * sd.powf(alpha))
            }
            DensityKind::Exponential { rate } => rate.powf(alpha) / (1.0 + alpha),
            DensityKind::Tabulated(_) => return None,
        };
        Some(Ok(v))
    }
}

/// `int f^alpha g` in closed form for compatible pairs.
pub fn closed_cross_integral(f: &Density, g: &Density, alpha: f64) -> Option<Result<f64>> {
    let v = match (canonical_kind(&f.kind), canonical_kind(&g.kind)) {
        (DensityKind::Power(p1), DensityKind::Power(p2)) if p1.gamma == p2.gamma => {
            return Some(cross_integral_closed(p1, p2, alpha))
        }
        (DensityKind::Uniform { lo: a1, hi: b1 }, DensityKind::Uniform { lo: a2, hi: b2 }) => {
            let overlap = (b1.min(b2) - a1.max(a2)).max(0.0);
            overlap * (b1 - a1).powf(-alpha) / (b2 - a2)
        }
        (DensityKind::Normal { mean: m1, sd: s1 }, DensityKind::Normal { mean: m2, sd: s2 }) => {
            // f^alpha is a scaled normal with variance s1^2 / alpha; the product
            // of two normal kernels integrates to a normal density in m1 - m2.
            let v1 = s1 * s1;
            let var = v1 / alpha + s2 * s2;
            let d = m1 - m2;
            (2.0 * PI * v1).powf((1.0 - alpha) / 2.0) / alpha.sqrt() / (2.0 * PI * var).sqrt()
                * (-d * d / (2.0 * var)).exp()
        }
        (DensityKind::Exponential { rate: r1 }, DensityKind::Exponential { rate: r2 }) => {
            r1.powf(alpha) * r2 / (alpha * r1 + r2)
        }
        _ => return None,
    };
    Some(Ok(v))
}

/// Value of a power or cross integral and whether it came from a closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub closed_form: bool,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("exponent alpha must be positive and finite, got {alpha}")))
    }
}

/// Quadrature of `f^alpha g` over the intersection of both windows.
pub fn cross_integral_quadrature(f: &Density, g: &Density, alpha: f64, rel_tol: f64) -> Result<f64> {
    let (fa, fb) = f.window();
    let (ga, gb) = g.window();
    let (a, b) = (fa.max(ga), fb.min(gb));
    if !(a < b) {
        return Ok(0.0);
    }
    let mut points: Vec<f64> = f
        .break_points()
        .into_iter()
        .chain(g.break_points())
        .filter(|&x| x > a && x < b)
        .collect();
    points.push(a);
    points.push(b);
    let integrand = |x: f64| f.pdf(x).powf(alpha) * g.pdf(x);
    Ok(integrate(integrand, &points, QuadratureOptions::with_rel_tol(rel_tol))?.value)
}

pub fn power_integral_quadrature(f: &Density, alpha: f64, rel_tol: f64) -> Result<f64> {
    cross_integral_quadrature(f, f, alpha, rel_tol)
}

/// `int f^(1+alpha)`, closed form when available.
pub fn power_integral(f: &Density, alpha: f64, rel_tol: f64) -> Result<Integral> {
    check_alpha(alpha)?;
    f.check_l_alpha(alpha)?;
    match f.closed_power_integral(alpha) {
        Some(v) => Ok(Integral {
            value: v?,
            closed_form: true,
        }),
        None => Ok(Integral {
            value: power_integral_quadrature(f, alpha, rel_tol)?,
            closed_form: false,
        }),
    }
}

/// `int f^alpha g`, closed form when the pair admits one. Identical densities
/// reuse the power integral.
pub fn cross_integral(f: &Density, g: &Density, alpha: f64, rel_tol: f64) -> Result<Integral> {
    check_alpha(alpha)?;
    f.check_l_alpha(alpha)?;
    g.check_l_alpha(alpha)?;
    if f.is_identical(g) {
        return power_integral(f, alpha, rel_tol);
    }
    match closed_cross_integral(f, g, alpha) {
        Some(v) => Ok(Integral {
            value: v?,
            closed_form: true,
        }),
        None => Ok(Integral {
            value: cross_integral_quadrature(f, g, alpha, rel_tol)?,
            closed_form: false,
        }),
    }
}
