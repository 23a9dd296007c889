//! End-to-end acceptance checks, run without the test harness so every
//! criterion prints its PASS/FAIL line. Exits non-zero if any criterion fails.

use std::process::Command as Process;
use std::time::{Duration, Instant};

use fdpd::certifier::lambda_convex_at;
use fdpd::corpus;
use fdpd::density::{cross_integral_quadrature, power_integral_quadrature};
use fdpd::estimation::BiasConfig;
use fdpd::ext::{Combined, ExtReal};
use fdpd::phi::PhiSpec;
use fdpd::*;

type Check = std::result::Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

const ALPHAS: [f64; 4] = [0.25, 0.5, 1.0, 2.0];

fn phi(name: &str) -> PhiSpec {
    builtin_phi(name).unwrap()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> std::result::Result<(), String> {
    let took = start.elapsed();
    ensure(took < limit, || format!("took {took:?}, limit {limit:?}"))
}

fn closed_form_oracle() -> Check {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut combos = 0;
    for gamma in [-0.25, 0.0, 0.5, 1.0, 2.0] {
        for theta in [0.5, 1.0, 2.0] {
            for alpha in ALPHAS {
                let p = PowerDensityParams::new(gamma, theta).unwrap();
                let f = power_density(p);
                let closed = power_integral_closed(p, alpha).unwrap();
                let numeric = power_integral_quadrature(&f, alpha, 1e-10).map_err(|e| e.to_string())?;
                worst = worst.max((closed - numeric).abs() / closed);
                for tau in [0.5, 1.0, 2.0] {
                    let q = PowerDensityParams::new(gamma, tau).unwrap();
                    let g = power_density(q);
                    let closed = cross_integral_closed(p, q, alpha).unwrap();
                    let numeric = cross_integral_quadrature(&f, &g, alpha, 1e-10).map_err(|e| e.to_string())?;
                    worst = worst.max((closed - numeric).abs() / closed);
                    combos += 1;
                }
            }
        }
    }
    ensure(combos >= 180, || format!("only {combos} combinations"))?;
    ensure(worst <= 1e-6, || format!("worst relative error {worst:e}"))?;
    within(start, Duration::from_secs(10))?;
    Ok(format!("{combos} combinations, worst relative error {worst:.2e}, {:?}", start.elapsed()))
}

fn divergence_axioms() -> Check {
    let start = Instant::now();
    let pairs = corpus::distinct_pairs();
    let mut min_value = f64::INFINITY;
    let mut max_self: f64 = 0.0;
    for name in ["identity", "log", "power(2)", "sqrt"] {
        for alpha in ALPHAS {
            let spec = DivergenceSpec::new(phi(name), alpha).unwrap();
            ensure(
                certify(spec.phi(), alpha, &CertifierConfig::for_alpha(alpha)).unwrap().verdict == Verdict::Valid,
                || format!("{name} not certified at {alpha}"),
            )?;
            for (g, f) in &pairs {
                let v = fdpd(&spec, g, f).map_err(|e| e.to_string())?.value;
                match v {
                    Combined::Defined(ExtReal::Finite(x)) => {
                        ensure(x >= -1e-10, || format!("{name} {alpha} {g} {f}: {x}"))?;
                        min_value = min_value.min(x);
                    }
                    Combined::Defined(ExtReal::PosInf) => {}
                    other => return Err(format!("{name} {alpha} {g} {f}: {other}")),
                }
            }
            for f in corpus::densities() {
                let v = fdpd(&spec, &f, &f).unwrap().value.finite().unwrap();
                ensure(v.abs() <= 1e-10, || format!("{name} {alpha} self-divergence of {f}: {v}"))?;
                max_self = max_self.max(v.abs());
            }
        }
    }
    within(start, Duration::from_secs(30))?;
    Ok(format!(
        "{} pairs x 4 generators x 4 alphas, min {min_value:.3e}, max |self| {max_self:.1e}, {:?}",
        pairs.len(),
        start.elapsed()
    ))
}

/// `int (f - g)^2` from the raw pdfs on explicit pieces.
fn squared_l2(f: &Density, g: &Density, breaks: &[f64]) -> f64 {
    breaks
        .windows(2)
        .map(|w| quadrature(|x| (f.pdf(x) - g.pdf(x)).powi(2), (w[0], w[1]), 1e-12).unwrap())
        .sum()
}

fn special_cases() -> Check {
    let u = |a, b| Density::uniform(a, b).unwrap();
    let n = |m, s| Density::normal(m, s).unwrap();
    let e = |r| Density::exponential(r).unwrap();
    let pw = |g, t| power_density(PowerDensityParams::new(g, t).unwrap());
    let cases: Vec<(Density, Density, Vec<f64>)> = vec![
        (u(0.0, 1.0), u(0.0, 2.0), vec![0.0, 1.0, 2.0]),
        (u(-1.0, 3.0), u(0.5, 1.5), vec![-1.0, 0.5, 1.5, 3.0]),
        (n(0.0, 1.0), n(0.5, 1.0), vec![-14.0, 0.0, 0.5, 14.0]),
        (n(0.0, 2.0), n(-1.0, 0.5), vec![-26.0, -1.0, 0.0, 26.0]),
        (e(1.0), e(2.0), vec![0.0, 1.0, 80.0]),
        (e(0.5), n(1.0, 1.0), vec![-14.0, 0.0, 1.0, 160.0]),
        (pw(0.5, 1.0), pw(0.5, 2.0), vec![0.0, 1.0, 2.0]),
        (pw(1.0, 1.0), u(0.0, 2.0), vec![0.0, 1.0, 2.0]),
        (n(0.0, 1.0), u(-1.0, 1.0), vec![-14.0, -1.0, 1.0, 14.0]),
        (pw(2.0, 1.5), e(1.0), vec![0.0, 1.5, 80.0]),
    ];
    let mut worst_l2: f64 = 0.0;
    let mut worst_id: f64 = 0.0;
    for (g, f, breaks) in &cases {
        let d = dpd(1.0, g, f).unwrap().value.finite().unwrap();
        let oracle = squared_l2(f, g, breaks);
        let rel = (d - oracle).abs() / oracle;
        ensure(rel <= 1e-8, || format!("{g} {f}: dpd {d} vs {oracle}"))?;
        worst_l2 = worst_l2.max(rel);
        for alpha in ALPHAS {
            for (name, reference) in [("identity", dpd(alpha, g, f)), ("log", ldpd(alpha, g, f))] {
                let spec = DivergenceSpec::new(phi(name), alpha).unwrap();
                let a = fdpd(&spec, g, f).unwrap().value.finite().unwrap();
                let b = reference.unwrap().value.finite().unwrap();
                let diff = (a - b).abs();
                ensure(diff <= 1e-12, || format!("{name} {alpha} {g} {f}: {a} vs {b}"))?;
                worst_id = worst_id.max(diff);
            }
        }
    }
    Ok(format!(
        "{} pairs, worst L2 relative error {worst_l2:.2e}, worst identity gap {worst_id:.1e}",
        cases.len()
    ))
}

fn alpha_limit() -> Check {
    let g = Density::uniform(0.0, 1.0).unwrap();
    let f = Density::uniform(0.0, 2.0).unwrap();
    let alphas = [0.5, 0.2, 0.1, 0.05, 0.01];
    let values = dpd_limit_check(&g, &f, &alphas).map_err(|e| e.to_string())?;
    let ln2 = 2f64.ln();
    let gaps: Vec<f64> = values.iter().map(|v| (v - ln2).abs()).collect();
    ensure(gaps.windows(2).all(|w| w[1] < w[0]), || format!("not monotone: {values:?}"))?;
    ensure(values.windows(2).all(|w| w[1] > w[0]), || format!("not increasing: {values:?}"))?;
    ensure(gaps[4] <= 0.02, || format!("|dpd(0.01) - ln 2| = {}", gaps[4]))?;
    let kl = fdpd_alpha_zero(&phi("identity"), &g, &f).unwrap().finite().unwrap();
    ensure((kl - ln2).abs() < 1e-12, || format!("alpha = 0 value {kl}"))?;
    Ok(format!("dpd(0.01) = {:.6}, |gap| = {:.2e}, monotone over {alphas:?}", values[4], gaps[4]))
}

fn duality() -> Check {
    let start = Instant::now();
    let valid = ["identity", "log", "power(1)", "power(2)", "power(3)", "sqrt"];
    let invalid = ["neg_reciprocal", "constant", "neg_identity"];
    let mut witnesses = Vec::new();
    for alpha in [0.5, 1.0, 2.0] {
        let cfg = CertifierConfig::for_alpha(alpha);
        for name in valid {
            let v = certify(&phi(name), alpha, &cfg).unwrap().verdict;
            ensure(v == Verdict::Valid, || format!("{name} at {alpha}: {v:?}"))?;
        }
        for name in invalid {
            let p = phi(name);
            let v = certify(&p, alpha, &cfg).unwrap().verdict;
            ensure(v == Verdict::Invalid, || format!("{name} at {alpha}: {v:?}"))?;
            let rec = search_counterexample(&p, alpha, &SearchGrid::default_for(alpha))
                .unwrap()
                .ok_or_else(|| format!("no witness for {name} at {alpha}"))?;
            let witnessed = match rec.failure {
                FailureMode::Negative => matches!(rec.fdpd_value.finite(), Some(v) if v < -1e-10)
                    || rec.fdpd_value == Combined::Defined(ExtReal::NegInf),
                FailureMode::ZeroUnequal | FailureMode::Indeterminate => true,
            };
            ensure(witnessed, || format!("{name} at {alpha}: weak record {rec:?}"))?;
            let replayed = rec.replay(&p).map_err(|e| e.to_string())?;
            ensure(replayed == rec, || format!("{name} at {alpha}: replay differs"))?;
            let bits = |r: &CounterexampleRecord| r.term_values.map(|t| t.to_f64().to_bits());
            ensure(bits(&replayed) == bits(&rec), || format!("{name}: replay not bit-identical"))?;
            if alpha == 1.0 {
                witnesses.push(format!("{name}:{:?}", rec.failure));
            }
        }
    }
    within(start, Duration::from_secs(60))?;
    Ok(format!("witnesses at alpha=1 [{}], {:?}", witnesses.join(", "), start.elapsed()))
}

fn holder() -> Check {
    let ds = corpus::densities();
    let mut min_slack = f64::INFINITY;
    let mut max_equal: f64 = 0.0;
    let mut count = 0;
    for alpha in ALPHAS {
        for f in &ds {
            for g in &ds {
                let a = holder_audit(f, g, alpha).map_err(|e| e.to_string())?;
                ensure(a.slack >= -1e-10, || format!("{f} {g} {alpha}: {a:?}"))?;
                if f.is_identical(g) {
                    ensure(a.slack.abs() <= 1e-10, || format!("{f} {alpha}: {a:?}"))?;
                    max_equal = max_equal.max(a.slack.abs());
                } else {
                    min_slack = min_slack.min(a.slack);
                }
                count += 1;
            }
        }
    }
    let (f, g) = uniform_pair(1.0).unwrap();
    let disjoint = holder_audit(&f, &g, 1.0).unwrap();
    ensure(disjoint.rhs == 0.0 && disjoint.slack > 0.0, || format!("disjoint {disjoint:?}"))?;
    Ok(format!("{count} audits, min slack {min_slack:.3e}, max |slack| on f=g {max_equal:.1e}"))
}

fn lambda_machinery() -> Check {
    let cfg = CertifierConfig::for_alpha(1.0).with_grid(-10.0, 10.0, 256);
    let mut lambdas = vec![0.5];
    lambdas.extend(ALPHAS.iter().map(|a| a / (1.0 + a)).filter(|&l| l != 0.5));
    for (name, label) in [("log", "x"), ("identity", "e^x"), ("sqrt", "e^(x/2)")] {
        let psi = psi_of(&phi(name));
        for &l in &lambdas {
            let out = check_lambda_convex(&psi, l, &cfg).unwrap();
            ensure(out.ok, || format!("psi = {label} fails at lambda {l}: {:?}", out.violations.first()))?;
        }
    }
    let psi = psi_of(&phi("neg_reciprocal"));
    for &l in &lambdas {
        ensure(!check_lambda_convex(&psi, l, &cfg).unwrap().ok, || format!("-e^-x passes at {l}"))?;
        let v = lambda_convex_at(&psi, l, 0.0, 2.0)
            .unwrap()
            .ok_or_else(|| format!("no violation at x=0, y=2, lambda {l}"))?;
        // psi(2 - 2l) against l psi(0) + (1 - l) psi(2) for psi = -e^-x.
        let lhs = -(-(2.0 - 2.0 * l)).exp();
        let rhs = -l - (1.0 - l) * (-2.0f64).exp();
        ensure(lhs > rhs, || format!("hand check fails at {l}"))?;
        ensure(
            (v.lhs.to_f64() - lhs).abs() < 1e-12 && (v.rhs.to_f64() - rhs).abs() < 1e-12,
            || format!("witness values differ at {l}: {v:?}"),
        )?;
    }
    Ok(format!("identity, e^x, e^(x/2) pass; -e^-x fails with witness (0, 2) at lambda {lambdas:?}"))
}

/// Regression values from the seeded run (seed 20240607).
const FROZEN_MAB_ALPHA_HALF: f64 = 6.238_585_479_030_769e-2;
const FROZEN_MAB_ALPHA_SMALL: f64 = 1.545_199_414_417_478_5;

fn robustness() -> Check {
    let start = Instant::now();
    let spec = |a| DivergenceSpec::new(phi("identity"), a).unwrap();
    let rows = bias_experiment(&BiasConfig {
        specs: vec![spec(0.5), spec(0.01)],
        model: Model::NormalLocation { sd: 1.0 },
        true_theta: 0.0,
        eps_grid: vec![0.2],
        outlier_value: 10.0,
        n: 200,
        replications: 100,
        seed: fdpd_cli::DEFAULT_SEED,
        bracket: (-10.0, 20.0),
        tol: 1e-8,
    })
    .map_err(|e| e.to_string())?;
    let mab = |i: usize| rows[i].mean_abs_bias.unwrap_or(f64::INFINITY);
    let (robust, mle) = (mab(0), mab(1));
    println!("robustness: mean |bias| alpha=0.5 {robust:.17e}, alpha=0.01 {mle:.17e}");
    ensure(rows.iter().all(|r| r.failures == 0), || format!("failed replications: {rows:?}"))?;
    ensure(robust < mle, || format!("alpha=0.5 bias {robust} not below alpha=0.01 bias {mle}"))?;
    for (got, frozen) in [(robust, FROZEN_MAB_ALPHA_HALF), (mle, FROZEN_MAB_ALPHA_SMALL)] {
        ensure((got - frozen).abs() <= 1e-9 * frozen.abs(), || format!("{got} drifted from frozen {frozen}"))?;
    }
    within(start, Duration::from_secs(120))?;
    Ok(format!("mean |bias| {robust:.4} (alpha=0.5) < {mle:.4} (alpha=0.01), {:?}", start.elapsed()))
}

fn determinism() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let bin = env!("CARGO_BIN_EXE_fdpd");
    let mut outputs = Vec::new();
    for i in 0..2 {
        let path = dir.path().join(format!("bench{i}.csv"));
        let status = Process::new(bin)
            .args(["bench", "--phi", "identity,log", "--alpha", "0.1,0.5", "--eps", "0,0.1,0.2", "--reps", "20"])
            .args(["--n", "100", "--seed", "123", "--out"])
            .arg(&path)
            .status()
            .map_err(|e| e.to_string())?;
        ensure(status.success(), || format!("bench exited with {status}"))?;
        outputs.push(std::fs::read(&path).map_err(|e| e.to_string())?);
    }
    ensure(outputs[0] == outputs[1], || "bench outputs differ".into())?;
    let lines = outputs[0].iter().filter(|&&b| b == b'\n').count();
    ensure(lines == 13, || format!("expected 13 lines, got {lines}"))?;
    Ok(format!("two runs, {} identical bytes", outputs[0].len()))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("1 closed-form oracle agreement", closed_form_oracle),
        ("2 divergence axioms", divergence_axioms),
        ("3 special-case identities", special_cases),
        ("4 alpha -> 0 limit", alpha_limit),
        ("5 characterization duality", duality),
        ("6 Holder audit", holder),
        ("7 lambda-convexity machinery", lambda_machinery),
        ("8 estimation robustness", robustness),
        ("9 bench determinism", determinism),
    ];
    let mut failed = Vec::new();
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("[PASS] {name}: {detail}"),
            Err(why) => {
                println!("[FAIL] {name}: {why}");
                failed.push(name);
            }
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
