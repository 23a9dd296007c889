//! Globally adaptive Gauss-Kronrod (7, 15) quadrature.
//!
//! The rule is open: integrands are never evaluated at panel endpoints, so
//! integrable endpoint singularities such as `x^gamma` with `-1 < gamma < 0`
//! are handled by repeated bisection toward the singular end.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

pub const DEFAULT_REL_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_PANELS: usize = 1_000_000;
const MIN_REL_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy)]
pub struct QuadratureOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_panels: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            rel_tol: DEFAULT_REL_TOL,
            abs_tol: 0.0,
            max_panels: DEFAULT_MAX_PANELS,
        }
    }
}

impl QuadratureOptions {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_estimate: f64,
    pub panels: usize,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Panel> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let eval = |x: f64| -> Result<f64> {
        let v = f(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Domain(format!("integrand is {v} at x = {x}")))
        }
    };
    let fc = eval(center)?;
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for (j, (&x, &w)) in XGK[..7].iter().zip(&WGK[..7]).enumerate() {
        let dx = half * x;
        let pair = eval(center - dx)? + eval(center + dx)?;
        kronrod += w * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Ok(Panel {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    })
}

fn splittable(p: &Panel) -> bool {
    let mid = 0.5 * (p.a + p.b);
    let scale = p.a.abs().max(p.b.abs()).max(f64::MIN_POSITIVE);
    mid > p.a && mid < p.b && (p.b - p.a) > 8.0 * f64::EPSILON * scale
}

/// Integrates `f` over `[points[0], points[last]]`, starting from one panel
/// per pair of consecutive break points.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    points: &[f64],
    opts: QuadratureOptions,
) -> Result<QuadratureResult> {
    let mut pts: Vec<f64> = points.to_vec();
    if pts.iter().any(|p| !p.is_finite()) {
        return Err(Error::Config("quadrature needs a finite interval".into()));
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    if pts.len() < 2 {
        return Err(Error::Config("quadrature interval is empty".into()));
    }
    let rel_tol = opts.rel_tol.max(MIN_REL_TOL);

    let mut heap = BinaryHeap::new();
    let mut retired: Vec<Panel> = Vec::new();
    for w in pts.windows(2) {
        heap.push(gauss_kronrod(&f, w[0], w[1])?);
    }
    let mut panels = heap.len();
    let mut evaluations = 15 * panels;

    let totals = |heap: &BinaryHeap<Panel>, retired: &[Panel]| -> (f64, f64) {
        heap.iter()
            .chain(retired)
            .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error))
    };
    let (mut value, mut error) = totals(&heap, &retired);
    let mut since_resum = 0usize;

    loop {
        if error <= rel_tol * value.abs() || error <= opts.abs_tol {
            break;
        }
        if panels >= opts.max_panels {
            return Err(Error::QuadratureFailure {
                estimate: value,
                error_estimate: error,
                panels,
            });
        }
        let Some(worst) = heap.pop() else {
            return Err(Error::QuadratureFailure {
                estimate: value,
                error_estimate: error,
                panels,
            });
        };
        if !splittable(&worst) {
            retired.push(worst);
            continue;
        }
        let mid = 0.5 * (worst.a + worst.b);
        let left = gauss_kronrod(&f, worst.a, mid)?;
        let right = gauss_kronrod(&f, mid, worst.b)?;
        evaluations += 30;
        panels += 1;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);

        since_resum += 1;
        if since_resum == 256 {
            since_resum = 0;
            (value, error) = totals(&heap, &retired);
        }
    }

    let (value, error) = totals(&heap, &retired);
    Ok(QuadratureResult {
        value,
        error_estimate: error,
        panels,
        evaluations,
    })
}

/// Adaptive integral of `f` over `(a, b)` to relative tolerance `rel_tol`.
pub fn quadrature<F: Fn(f64) -> f64>(f: F, interval: (f64, f64), rel_tol: f64) -> Result<f64> {
    let (a, b) = interval;
    if !(a < b) {
        return Err(Error::Config(format!("quadrature needs a < b, got ({a}, {b})")));
    }
    integrate(f, &[a, b], QuadratureOptions::with_rel_tol(rel_tol)).map(|r| r.value)
}
