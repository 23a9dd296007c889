//! Generator functions `phi: [0, inf) -> [-inf, inf]` and their log-substituted
//! transforms `psi(x) = phi(e^x)`.
//!
//! A generator produces a valid divergence for a fixed `alpha > 0` exactly
//! when `psi` is convex and strictly increasing on `[-inf, inf)` and finite on
//! the reals; see [`crate::certifier`].

use std::fmt;
use std::io::Read;
use std::sync::Arc;

use crate::ext::{Combined, ExtReal};
use crate::interp::MonotoneCubic;
use crate::{Error, Result};

type CustomFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum PhiKind {
    Identity,
    Log,
    Power(f64),
    NegReciprocal,
    Sqrt,
    Constant(f64),
    Affine {
        slope: f64,
        offset: f64,
        base: Box<PhiKind>,
    },
    Tabulated(Arc<MonotoneCubic>),
    Custom(CustomFn),
}

impl PhiKind {
    /// Evaluation at `x > 0`. May be infinite or NaN for custom generators.
    fn eval_positive(&self, x: f64) -> Option<f64> {
        match self {
            PhiKind::Identity => Some(x),
            PhiKind::Log => Some(x.ln()),
            PhiKind::Power(p) => Some(x.powf(*p)),
            PhiKind::NegReciprocal => Some(-1.0 / x),
            PhiKind::Sqrt => Some(x.sqrt()),
            PhiKind::Constant(c) => Some(*c),
            PhiKind::Affine {
                slope,
                offset,
                base,
            } => base.eval_positive(x).map(|v| slope * v + offset),
            PhiKind::Tabulated(t) => t.eval(x),
            PhiKind::Custom(f) => Some(f(x)),
        }
    }
}

/// A generator function together with its behaviour at zero and at one.
#[derive(Clone)]
pub struct PhiSpec {
    name: String,
    kind: PhiKind,
    value_at_zero: ExtReal,
    derivative_at_one: Option<f64>,
    description: String,
}

impl fmt::Debug for PhiSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PhiSpec")
            .field("name", &self.name)
            .field("value_at_zero", &self.value_at_zero)
            .field("derivative_at_one", &self.derivative_at_one)
            .finish()
    }
}

/// Names accepted by [`builtin_phi`].
pub const BUILTIN_NAMES: &[&str] = &[
    "identity",
    "log",
    "power(p)",
    "neg_reciprocal",
    "sqrt",
    "constant(c)",
    "neg_identity",
];

fn parse_parameter(name: &str, prefix: &str) -> Option<Result<f64>> {
    let rest = name.strip_prefix(prefix)?;
    let arg = if let Some(inner) = rest.strip_prefix('(') {
        inner.strip_suffix(')')?
    } else {
        rest.strip_prefix(':')?
    };
    Some(
        arg.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| Error::Config(format!("bad parameter in generator name {name:?}"))),
    )
}

/// Looks up a built-in generator.
///
/// Recognised: `identity`, `log`, `power(p)` (also `power:p`), `neg_reciprocal`,
/// `sqrt`, `constant(c)` (bare `constant` means `c = 1`) and `neg_identity`.
pub fn builtin_phi(name: &str) -> Result<PhiSpec> {
    let name = name.trim();
    let spec = match name {
        "identity" => PhiSpec::new(
            "identity",
            PhiKind::Identity,
            ExtReal::ZERO,
            Some(1.0),
            "x; generates the density power divergence",
        ),
        "log" => PhiSpec::new(
            "log",
            PhiKind::Log,
            ExtReal::NegInf,
            Some(1.0),
            "log x with log 0 = -inf; generates the logarithmic density power divergence",
        ),
        "neg_reciprocal" => PhiSpec::new(
            "neg_reciprocal",
            PhiKind::NegReciprocal,
            ExtReal::NegInf,
            Some(1.0),
            "-1/x",
        ),
        "sqrt" => PhiSpec::new("sqrt", PhiKind::Sqrt, ExtReal::ZERO, Some(0.5), "sqrt x"),
        "neg_identity" => PhiSpec::new(
            "neg_identity",
            PhiKind::Affine {
                slope: -1.0,
                offset: 0.0,
                base: Box::new(PhiKind::Identity),
            },
            ExtReal::ZERO,
            None,
            "-x",
        ),
        "constant" => constant_phi(1.0),
        _ => {
            if let Some(p) = parse_parameter(name, "power") {
                power_phi(p?)
            } else if let Some(c) = parse_parameter(name, "constant") {
                constant_phi(c?)
            } else {
                return Err(Error::Config(format!(
                    "unknown generator {name:?}; expected one of {}",
                    BUILTIN_NAMES.join(", ")
                )));
            }
        }
    };
    Ok(spec)
}

fn power_phi(p: f64) -> PhiSpec {
    if p == 0.0 {
        return constant_phi(1.0);
    }
    let zero = if p > 0.0 {
        ExtReal::ZERO
    } else {
        ExtReal::PosInf
    };
    PhiSpec::new(
        &format!("power({p})"),
        PhiKind::Power(p),
        zero,
        (p > 0.0).then_some(p),
        &format!("x^{p}"),
    )
}

fn constant_phi(c: f64) -> PhiSpec {
    PhiSpec::new(
        &format!("constant({c})"),
        PhiKind::Constant(c),
        ExtReal::Finite(c),
        None,
        "constant generator",
    )
}

impl PhiSpec {
    fn new(
        name: &str,
        kind: PhiKind,
        value_at_zero: ExtReal,
        derivative_at_one: Option<f64>,
        description: &str,
    ) -> Self {
        Self {
            name: name.to_string(),
            kind,
            value_at_zero,
            derivative_at_one,
            description: description.to_string(),
        }
    }

    /// Wraps an arbitrary function of `x > 0`. A stored derivative at one must
    /// be strictly positive.
    pub fn custom<F>(
        name: &str,
        f: F,
        value_at_zero: ExtReal,
        derivative_at_one: Option<f64>,
    ) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        check_derivative(derivative_at_one)?;
        Ok(Self::new(
            name,
            PhiKind::Custom(Arc::new(f)),
            value_at_zero,
            derivative_at_one,
            "user-supplied function",
        ))
    }

    /// A generator given by knots `(x, phi(x))`, interpolated monotone-cubically.
    /// The knot range bounds where the generator is evaluable; `x = 0` always
    /// maps to `value_at_zero`.
    pub fn tabulated(name: &str, xs: Vec<f64>, phis: Vec<f64>, value_at_zero: ExtReal) -> Result<Self> {
        if xs.first().is_some_and(|&x| x < 0.0) {
            return Err(Error::Config("tabulated generator needs x >= 0".into()));
        }
        let table = MonotoneCubic::new(xs, phis)?;
        Ok(Self::new(
            name,
            PhiKind::Tabulated(Arc::new(table)),
            value_at_zero,
            None,
            "tabulated generator (monotone cubic interpolation)",
        ))
    }

    /// Reads a CSV with header `x,phi`. When `value_at_zero` is `None` the
    /// table must contain the knot `x = 0`.
    pub fn from_csv<R: Read>(name: &str, reader: R, value_at_zero: Option<ExtReal>) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        let header: Vec<&str> = headers.iter().collect();
        if header != ["x", "phi"] {
            return Err(Error::Parse(format!("expected header x,phi, found {}", header.join(","))));
        }
        let mut xs = Vec::new();
        let mut phis = Vec::new();
        for (line, record) in rdr.records().enumerate() {
            let record = record?;
            let parse = |i: usize| -> Result<f64> {
                record
                    .get(i)
                    .and_then(|s| s.parse::<f64>().ok())
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::Parse(format!("row {}: non-finite or missing field", line + 2)))
            };
            xs.push(parse(0)?);
            phis.push(parse(1)?);
        }
        let zero = match value_at_zero {
            Some(v) => v,
            None if xs.first() == Some(&0.0) => ExtReal::Finite(phis[0]),
            None => {
                return Err(Error::Config(
                    "tabulated generator has no knot at x = 0; supply its value at zero".into(),
                ))
            }
        };
        Self::tabulated(name, xs, phis, zero)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn value_at_zero(&self) -> ExtReal {
        self.value_at_zero
    }

    pub fn derivative_at_one(&self) -> Option<f64> {
        self.derivative_at_one
    }

    /// Knot range of a tabulated generator.
    pub fn tabulated_range(&self) -> Option<(f64, f64)> {
        match &self.kind {
            PhiKind::Tabulated(t) => Some((t.x_min(), t.x_max())),
            _ => None,
        }
    }

    /// Evaluates `phi(x)` for `x >= 0`.
    pub fn eval(&self, x: f64) -> Result<ExtReal> {
        if x == 0.0 {
            return Ok(self.value_at_zero);
        }
        if !(x > 0.0 && x.is_finite()) {
            return Err(Error::Domain(format!("{} evaluated at {x}", self.name)));
        }
        self.kind
            .eval_positive(x)
            .and_then(ExtReal::from_f64)
            .ok_or_else(|| Error::Domain(format!("{} is not evaluable at {x}", self.name)))
    }

    /// `slope * phi + offset`. The derivative at one is kept only when it stays positive.
    pub fn affine(&self, slope: f64, offset: f64) -> Result<PhiSpec> {
        if !(slope.is_finite() && offset.is_finite() && slope != 0.0) {
            return Err(Error::Config("affine map needs a finite non-zero slope".into()));
        }
        let zero = match self.value_at_zero.scale(slope) {
            Combined::Defined(v) => v.checked_add(ExtReal::Finite(offset)).value().unwrap_or(v),
            Combined::Indeterminate => unreachable!("slope is non-zero"),
        };
        Ok(Self::new(
            &format!("{slope}*{}+{offset}", self.name),
            PhiKind::Affine {
                slope,
                offset,
                base: Box::new(self.kind.clone()),
            },
            zero,
            self.derivative_at_one.map(|d| d * slope).filter(|d| *d > 0.0),
            &format!("affine image of {}", self.name),
        ))
    }
}

fn check_derivative(d: Option<f64>) -> Result<()> {
    match d {
        Some(v) if !(v > 0.0 && v.is_finite()) => Err(Error::Config(format!(
            "derivative at one must be strictly positive, got {v}"
        ))),
        _ => Ok(()),
    }
}

/// `psi(x) = phi(e^x)` on `[-inf, inf)`, with `e^{-inf} = 0`.
#[derive(Clone, Debug)]
pub struct PsiTransform {
    source: PhiSpec,
}

pub fn psi_of(phi: &PhiSpec) -> PsiTransform {
    PsiTransform {
        source: phi.clone(),
    }
}

impl PsiTransform {
    pub fn source(&self) -> &PhiSpec {
        &self.source
    }

    pub fn eval(&self, x: ExtReal) -> Result<ExtReal> {
        match x {
            ExtReal::NegInf => Ok(self.source.value_at_zero),
            ExtReal::Finite(v) => self.at(v),
            ExtReal::PosInf => Err(Error::Domain("psi is not defined at +inf".into())),
        }
    }

    /// Evaluation at a finite point.
    pub fn at(&self, x: f64) -> Result<ExtReal> {
        self.source.eval(x.exp())
    }
}

/// Central-difference estimate of `phi'(1)` refined by one Richardson step.
///
/// When the generator stores its derivative, the stored value is returned
/// after checking it against the estimate to `1e-6 * max(1, |stored|)`.
pub fn phi_derivative_at_one(phi: &PhiSpec, step: f64) -> Result<f64> {
    if !(step > 0.0 && step <= 1e-3) {
        return Err(Error::Config(format!("finite-difference step must lie in (0, 1e-3], got {step}")));
    }
    let at = |x: f64| -> Result<f64> {
        phi.eval(x)?.finite().ok_or_else(|| {
            Error::Domain(format!("{} is infinite at {x}, near 1", phi.name))
        })
    };
    let central = |h: f64| -> Result<f64> { Ok((at(1.0 + h)? - at(1.0 - h)?) / (2.0 * h)) };
    let coarse = central(step)?;
    let fine = central(step / 2.0)?;
    let estimate = (4.0 * fine - coarse) / 3.0;

    match phi.derivative_at_one {
        Some(stored) => {
            if (stored - estimate).abs() <= 1e-6 * stored.abs().max(1.0) {
                Ok(stored)
            } else {
                Err(Error::DerivativeMismatch { stored, estimate })
            }
        }
        None => Ok(estimate),
    }
}
