//! Minimum-divergence estimation for one-parameter models.
//!
//! The empirical criterion replaces the unknown truth `g` by the sample:
//!
//! ```text
//! H(theta) = phi(int f_theta^(1+alpha)) - (1 + 1/alpha) phi(mean_i f_theta(X_i)^alpha)
//! ```
//!
//! The target-only term `(1/alpha) phi(int g^(1+alpha))` does not depend on
//! theta and is omitted, so `H` has the same minimiser as the full divergence
//! but a different value. No density smoothing of the data is involved.
//! [`histogram_power_integral`] gives a rough estimate of the omitted term for
//! display purposes only.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Normal};
use serde::Serialize;

use crate::density::{power_integral, Density};
use crate::divergence::DivergenceSpec;
use crate::ext::{linear_combination, Combined, ExtReal};
use crate::quadrature::DEFAULT_REL_TOL;
use crate::{Error, Result};

/// Golden-section shrink factor per iteration.
const INV_PHI: f64 = 0.618_033_988_749_894_9;
/// Grid points used to localise the minimum before golden-section refinement.
pub const SCAN_POINTS: usize = 65;
pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 200;
/// Mixed into per-replication seeds so contamination draws are a separate stream.
const CONTAMINATION_STREAM: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sample {
    pub values: Vec<f64>,
    pub seed: Option<u64>,
    pub source: String,
}

impl Sample {
    pub fn new(values: Vec<f64>, source: &str) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Config("sample is empty".into()));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Config(format!("sample contains non-finite value {v}")));
        }
        Ok(Self {
            values,
            seed: None,
            source: source.to_string(),
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// One-parameter model families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Model {
    /// `N(theta, sd^2)` with known `sd`.
    NormalLocation { sd: f64 },
    /// Exponential with rate `theta`.
    ExponentialRate,
    /// Uniform on `(0, theta)`.
    UniformScale,
}

impl Model {
    pub fn density(&self, theta: f64) -> Result<Density> {
        match *self {
            Model::NormalLocation { sd } => Density::normal(theta, sd),
            Model::ExponentialRate => Density::exponential(theta),
            Model::UniformScale => Density::uniform(0.0, theta),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Model::NormalLocation { sd } => format!("normal:sd={sd}"),
            Model::ExponentialRate => "exponential".into(),
            Model::UniformScale => "uniform".into(),
        }
    }

    pub fn draw<R: Rng>(&self, theta: f64, n: usize, rng: &mut R) -> Result<Vec<f64>> {
        self.density(theta)?;
        Ok(match *self {
            Model::NormalLocation { sd } => {
                let d = Normal::new(theta, sd).map_err(|e| Error::Domain(e.to_string()))?;
                (0..n).map(|_| d.sample(rng)).collect()
            }
            Model::ExponentialRate => {
                let d = Exp::new(theta).map_err(|e| Error::Domain(e.to_string()))?;
                (0..n).map(|_| d.sample(rng)).collect()
            }
            Model::UniformScale => (0..n).map(|_| theta * rng.random::<f64>()).collect(),
        })
    }
}

/// The empirical criterion `H(theta)` described in the module docs.
pub fn empirical_objective(spec: &DivergenceSpec, model: &Model, theta: f64, sample: &Sample) -> Result<ExtReal> {
    let alpha = spec.alpha();
    if !(alpha > 0.0) {
        return Err(Error::Config("empirical objective needs alpha > 0".into()));
    }
    let f = model.density(theta)?;
    let model_term = spec.phi().eval(power_integral(&f, alpha, DEFAULT_REL_TOL)?.value)?;
    let mean = sample.values.iter().map(|&x| f.pdf(x).powf(alpha)).sum::<f64>() / sample.len() as f64;
    let data_term = spec.phi().eval(mean)?;
    match linear_combination(&[(1.0, model_term), (-(1.0 + 1.0 / alpha), data_term)]) {
        Combined::Defined(v) => Ok(v),
        Combined::Indeterminate => Err(Error::Indeterminate),
    }
}

/// `int g^(1+alpha)` for the histogram of the sample with `ceil(sqrt(n))` bins.
pub fn histogram_power_integral(sample: &Sample, alpha: f64) -> Result<f64> {
    let (lo, hi) = sample
        .values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
    if !(hi > lo) {
        return Err(Error::Domain("histogram needs at least two distinct values".into()));
    }
    let n = sample.len();
    let bins = (n as f64).sqrt().ceil() as usize;
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in &sample.values {
        let k = (((v - lo) / width) as usize).min(bins - 1);
        counts[k] += 1;
    }
    Ok(counts
        .iter()
        .map(|&c| width * (c as f64 / (n as f64 * width)).powf(1.0 + alpha))
        .sum())
}

/// Display-only estimate of the full divergence: `H(theta)` plus the
/// histogram estimate of the omitted target term.
pub fn full_divergence_estimate(spec: &DivergenceSpec, model: &Model, theta: f64, sample: &Sample) -> Result<ExtReal> {
    let h = empirical_objective(spec, model, theta, sample)?;
    let g_term = spec.phi().eval(histogram_power_integral(sample, spec.alpha())?)?;
    match linear_combination(&[(1.0, h), (1.0 / spec.alpha(), g_term)]) {
        Combined::Defined(v) => Ok(v),
        Combined::Indeterminate => Err(Error::Indeterminate),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimationResult {
    pub theta_hat: f64,
    pub objective_at_min: f64,
    pub iterations: usize,
    pub converged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<(f64, f64)>>,
}

fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

/// Golden-section search on `[lo, hi]`; each iteration shrinks the bracket by
/// `0.618`. NaN objective values are treated as `+inf`.
pub fn minimize_scalar<F: FnMut(f64) -> f64>(
    objective: F,
    bracket: (f64, f64),
    tol: f64,
    max_iter: usize,
) -> Result<EstimationResult> {
    golden_section(objective, bracket, tol, max_iter, false)
}

/// As [`minimize_scalar`], recording every evaluation.
pub fn minimize_scalar_traced<F: FnMut(f64) -> f64>(
    objective: F,
    bracket: (f64, f64),
    tol: f64,
    max_iter: usize,
) -> Result<EstimationResult> {
    golden_section(objective, bracket, tol, max_iter, true)
}

fn golden_section<F: FnMut(f64) -> f64>(
    mut objective: F,
    bracket: (f64, f64),
    tol: f64,
    max_iter: usize,
    record: bool,
) -> Result<EstimationResult> {
    let (mut a, mut b) = bracket;
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::Config(format!("bracket needs finite lo < hi, got ({a}, {b})")));
    }
    if !(tol > 0.0) {
        return Err(Error::Config("tolerance must be positive".into()));
    }
    let mut trace = Vec::new();
    let mut best = (f64::NAN, f64::INFINITY);
    let mut eval = |x: f64, trace: &mut Vec<(f64, f64)>, best: &mut (f64, f64)| {
        let v = sanitize(objective(x));
        if record {
            trace.push((x, v));
        }
        if v < best.1 || best.0.is_nan() {
            *best = (x, v);
        }
        v
    };

    let f_lo = eval(a, &mut trace, &mut best);
    let f_hi = eval(b, &mut trace, &mut best);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = eval(c, &mut trace, &mut best);
    let mut fd = eval(d, &mut trace, &mut best);
    if [f_lo, f_hi, fc, fd].iter().all(|v| *v == f64::INFINITY) {
        return Err(Error::NoMinimum);
    }

    let mut iterations = 0;
    while b - a > tol && iterations < max_iter {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = eval(c, &mut trace, &mut best);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = eval(d, &mut trace, &mut best);
        }
        iterations += 1;
    }

    let converged = b - a <= tol;
    let (theta_hat, objective_at_min) = if converged {
        let interior = if fc <= fd { (c, fc) } else { (d, fd) };
        if best.1 < interior.1 {
            best
        } else {
            interior
        }
    } else {
        best
    };
    Ok(EstimationResult {
        theta_hat,
        objective_at_min,
        iterations,
        converged,
        trace: record.then_some(trace),
    })
}

/// Minimum-divergence estimate over `bracket`: a coarse scan of
/// [`SCAN_POINTS`] points localises the minimum, then golden-section search
/// refines it within the neighbouring grid cells.
pub fn estimate(
    spec: &DivergenceSpec,
    model: &Model,
    sample: &Sample,
    bracket: (f64, f64),
    tol: f64,
) -> Result<EstimationResult> {
    let (lo, hi) = bracket;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::Config(format!("bracket needs finite lo < hi, got ({lo}, {hi})")));
    }
    let objective = |theta: f64| match empirical_objective(spec, model, theta, sample) {
        Ok(v) => v.to_f64(),
        Err(_) => f64::INFINITY,
    };
    let step = (hi - lo) / (SCAN_POINTS - 1) as f64;
    let grid: Vec<f64> = (0..SCAN_POINTS).map(|i| lo + step * i as f64).collect();
    let values: Vec<f64> = grid.iter().map(|&t| sanitize(objective(t))).collect();
    let k = values
        .iter()
        .enumerate()
        .fold(0, |best, (i, v)| if *v < values[best] { i } else { best });
    if values[k] == f64::INFINITY {
        return Err(Error::NoMinimum);
    }
    let cell = (grid[k.saturating_sub(1)], grid[(k + 1).min(SCAN_POINTS - 1)]);
    let mut result = minimize_scalar(objective, cell, tol, DEFAULT_MAX_ITER)?;
    result.iterations += SCAN_POINTS;
    Ok(result)
}

/// Replaces each point by `outlier_value` independently with probability `eps`.
pub fn contaminate(sample: &Sample, eps: f64, outlier_value: f64, seed: u64) -> Result<Sample> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::Config(format!("contamination rate must lie in [0, 1], got {eps}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = sample
        .values
        .iter()
        .map(|&v| if rng.random::<f64>() < eps { outlier_value } else { v })
        .collect();
    Ok(Sample {
        values,
        seed: Some(seed),
        source: format!("{} contaminated at eps={eps} with {outlier_value}", sample.source),
    })
}

/// Draws `n` points from `model` at `theta` with a seeded generator.
pub fn synthetic_sample(model: &Model, theta: f64, n: usize, seed: u64) -> Result<Sample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = model.draw(theta, n, &mut rng)?;
    Ok(Sample {
        values,
        seed: Some(seed),
        source: format!("{} at theta={theta}", model.name()),
    })
}

#[derive(Debug, Clone)]
pub struct BiasConfig {
    pub specs: Vec<DivergenceSpec>,
    pub model: Model,
    pub true_theta: f64,
    pub eps_grid: Vec<f64>,
    pub outlier_value: f64,
    pub n: usize,
    pub replications: usize,
    pub seed: u64,
    pub bracket: (f64, f64),
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BiasRow {
    pub phi: String,
    pub alpha: f64,
    pub eps: f64,
    pub mean_theta: Option<f64>,
    /// Absent with fewer than two successful replications.
    pub sd_theta: Option<f64>,
    pub mean_abs_bias: Option<f64>,
    pub failures: usize,
}

pub const BIAS_CSV_HEADER: &str = "phi,alpha,eps,mean_theta,sd_theta,mean_abs_bias,failures";

impl BiasRow {
    pub fn csv_fields(&self) -> [String; 7] {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        [
            self.phi.clone(),
            self.alpha.to_string(),
            self.eps.to_string(),
            opt(self.mean_theta),
            opt(self.sd_theta),
            opt(self.mean_abs_bias),
            self.failures.to_string(),
        ]
    }
}

/// Contamination study: for every spec and contamination rate, estimates
/// theta on `replications` seeded samples. Replication `r` draws its data
/// from seed `seed + r`, shared by all specs and rates.
pub fn bias_experiment(cfg: &BiasConfig) -> Result<Vec<BiasRow>> {
    if cfg.n == 0 || cfg.replications == 0 {
        return Err(Error::Config("bias experiment needs n >= 1 and replications >= 1".into()));
    }
    if cfg.specs.iter().any(|s| !(s.alpha() > 0.0)) {
        return Err(Error::Config("bias experiment needs alpha > 0 for every spec".into()));
    }
    let samples: Vec<Sample> = (0..cfg.replications)
        .map(|r| synthetic_sample(&cfg.model, cfg.true_theta, cfg.n, cfg.seed.wrapping_add(r as u64)))
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    for spec in &cfg.specs {
        for &eps in &cfg.eps_grid {
            let mut estimates = Vec::with_capacity(cfg.replications);
            let mut failures = 0;
            for (r, clean) in samples.iter().enumerate() {
                let seed = cfg.seed.wrapping_add(r as u64) ^ CONTAMINATION_STREAM;
                let data = contaminate(clean, eps, cfg.outlier_value, seed)?;
                match estimate(spec, &cfg.model, &data, cfg.bracket, cfg.tol) {
                    Ok(res) if res.converged => estimates.push(res.theta_hat),
                    _ => failures += 1,
                }
            }
            rows.push(summarise(spec, eps, cfg.true_theta, &estimates, failures));
        }
    }
    Ok(rows)
}

fn summarise(spec: &DivergenceSpec, eps: f64, truth: f64, estimates: &[f64], failures: usize) -> BiasRow {
    let k = estimates.len();
    let mean = (k > 0).then(|| estimates.iter().sum::<f64>() / k as f64);
    let sd = mean.filter(|_| k > 1).map(|m| {
        (estimates.iter().map(|t| (t - m).powi(2)).sum::<f64>() / (k - 1) as f64).sqrt()
    });
    let mab = (k > 0).then(|| estimates.iter().map(|t| (t - truth).abs()).sum::<f64>() / k as f64);
    BiasRow {
        phi: spec.phi().name().to_string(),
        alpha: spec.alpha(),
        eps,
        mean_theta: mean,
        sd_theta: sd,
        mean_abs_bias: mab,
        failures,
    }
}
