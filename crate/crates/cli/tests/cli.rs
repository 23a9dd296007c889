use std::process::Command as Process;

use fdpd_cli::{emit, parse_args, run, Command, Format, Outcome, ParseError, PhiSource, RunConfig};
use serde_json::Value;

fn config(args: &[&str]) -> RunConfig {
    parse_args(std::iter::once("fdpd").chain(args.iter().copied())).unwrap()
}

fn usage_error(args: &[&str]) -> String {
    match parse_args(std::iter::once("fdpd").chain(args.iter().copied())) {
        Err(ParseError::Usage(msg)) => msg,
        other => panic!("expected usage error, got {other:?}"),
    }
}

fn json(args: &[&str]) -> (Outcome, Value) {
    let out = run(&config(args));
    assert!(out.warnings.is_empty() || out.outcome != Outcome::Error, "{:?}", out.warnings);
    let v: Value = serde_json::from_str(&out.artifact).unwrap();
    assert_eq!(v["schema_version"], "1.0");
    (out.outcome, v)
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_reader(text.as_bytes());
    rdr.records().map(|r| r.unwrap().iter().map(String::from).collect()).collect()
}

fn assert_rectangular(text: &str) {
    let rows = csv_rows(text);
    assert!(rows.len() >= 2, "{text}");
    assert!(rows.iter().all(|r| r.len() == rows[0].len()), "{text}");
}

#[test]
fn parse_examples() {
    let cfg = config(&["certify", "--phi", "log", "--alpha", "1"]);
    match cfg.command {
        Command::Certify { phi, alpha, .. } => {
            assert_eq!(phi.source, PhiSource::Builtin("log".into()));
            assert_eq!(alpha, 1.0);
        }
        other => panic!("{other:?}"),
    }
    assert_eq!(cfg.format, Format::Json);

    let cfg = config(&["divergence", "--phi", "identity", "--alpha", "0", "--g", "uniform:0,1", "--f", "uniform:0,2"]);
    assert!(matches!(cfg.command, Command::Divergence { ref alphas, .. } if alphas == &[0.0]));

    assert!(usage_error(&["certify", "--phi", "log", "--alpha", "-1"]).contains("--alpha"));
    assert!(usage_error(&["certify", "--phi", "log", "--alpha", "0"]).contains("--alpha"));
    assert!(usage_error(&["certify", "--phi", "nope", "--alpha", "1"]).contains("--phi"));
    assert!(usage_error(&["divergence", "--phi", "log", "--alpha", "1", "--g", "gamma:1", "--f", "uniform:0,1"])
        .contains("--g"));
    assert!(usage_error(&["divergence", "--phi", "log", "--alpha", "1", "--g", "uniform:0,1", "--f", "normal:0"])
        .contains("--f"));
    assert!(usage_error(&["estimate", "--phi", "log", "--alpha", "1", "--model", "normal:sd=-1", "--data", "x.csv", "--bracket", "0,1"])
        .contains("--model"));
    assert!(usage_error(&["estimate", "--phi", "log", "--alpha", "1", "--model", "normal:sd=1", "--data", "x.csv", "--bracket", "1,0"])
        .contains("--bracket"));
    assert!(usage_error(&["certify", "--phi", "log", "--alpha", "1", "--bogus"]).contains("--bogus"));
    assert!(usage_error(&["bench", "--eps", "1.5"]).contains("--eps"));
}

#[test]
fn certify_outcomes_and_reports() {
    let (o, v) = json(&["certify", "--phi", "identity", "--alpha", "1"]);
    assert_eq!(o, Outcome::Success);
    assert_eq!(v["verdict"], "valid");
    let (o, v) = json(&["certify", "--phi", "neg_reciprocal", "--alpha", "1", "--grid-points", "256"]);
    assert_eq!(o, Outcome::Invalid);
    assert_eq!(v["verdict"], "invalid");
    assert_eq!(v["grid_used"]["grid_points"], 256);
    let out = run(&config(&["certify", "--phi", "sqrt", "--alpha", "1", "--format", "csv"]));
    assert_rectangular(&out.artifact);
}

#[test]
fn counterexample_outcomes() {
    let (o, v) = json(&["counterexample", "--phi", "neg_reciprocal", "--alpha", "1"]);
    assert_eq!(o, Outcome::Invalid);
    assert_eq!(v["found"], true);
    assert!(v["record"]["fdpd_value"].as_f64().unwrap() < -1e-10);
    let (o, v) = json(&["counterexample", "--phi", "log", "--alpha", "1"]);
    assert_eq!(o, Outcome::Success);
    assert_eq!(v["found"], false);
    let (o, v) = json(&["counterexample", "--phi", "constant", "--alpha", "1"]);
    assert_eq!(o, Outcome::Invalid);
    assert_eq!(v["record"]["failure"], "zero_unequal");
}

#[test]
fn divergence_rows() {
    let (o, v) = json(&[
        "divergence", "--phi", "log", "--alpha", "0,1", "--g", "uniform:0,1", "--f", "uniform:0,2", "--g", "normal:0,1",
        "--f", "exponential:1",
    ]);
    assert_eq!(o, Outcome::Success);
    let rows = v["results"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    assert!((rows[0]["value"].as_f64().unwrap() - 2f64.ln()).abs() < 1e-12);
    assert_eq!(rows[0]["method"], "alpha_zero_limit");
    assert!((rows[1]["value"].as_f64().unwrap() - 2f64.ln()).abs() < 1e-12);
    assert_eq!(rows[2]["value"], "inf");
    assert_eq!(rows[3]["method"], "mixed");

    let out = run(&config(&[
        "divergence", "--phi", "identity", "--alpha", "0.5,1,2", "--g", "power:0.5,1", "--f", "power:0.5,2", "--format",
        "csv",
    ]));
    assert_rectangular(&out.artifact);
    assert_eq!(csv_rows(&out.artifact).len(), 4);
}

#[test]
fn tabulated_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let log_path = dir.path().join("log_table.csv");
    let mut table = String::from("x,phi\n");
    for i in -25..=25 {
        let x = (i as f64 * 0.8).exp();
        table.push_str(&format!("{x},{}\n", x.ln()));
    }
    std::fs::write(&log_path, table).unwrap();
    let out = run(&config(&["certify", "--phi", log_path.to_str().unwrap(), "--alpha", "1"]));
    assert_eq!(out.outcome, Outcome::Error);
    assert!(out.warnings[0].contains("zero"));

    // Linear data interpolates exactly, so this is the identity on [0, e^5].
    let linear_path = dir.path().join("linear_table.csv");
    let mut table = String::from("x,phi\n0,0\n");
    for i in -20..=10 {
        let x = (i as f64 * 0.5).exp();
        table.push_str(&format!("{x},{x}\n"));
    }
    std::fs::write(&linear_path, table).unwrap();
    let phi = linear_path.to_str().unwrap();
    let (o, v) = json(&["certify", "--phi", phi, "--alpha", "1"]);
    assert_eq!(o, Outcome::Success, "{v}");
    assert_eq!(v["grid_used"]["grid_lo"], -20.0);
    assert!((v["grid_used"]["grid_hi"].as_f64().unwrap() - 5.0).abs() < 1e-12);
    let (o, _) = json(&["certify", "--phi", phi, "--alpha", "1", "--grid-hi", "8", "--grid-points", "128"]);
    assert_eq!(o, Outcome::Inconclusive);

    let density_path = dir.path().join("tri.csv");
    std::fs::write(&density_path, "x,pdf\n0,0\n1,2\n2,0\n").unwrap();
    let g = format!("csv:{}", density_path.display());
    let out = run(&config(&["divergence", "--phi", "identity", "--alpha", "1", "--g", &g, "--f", "uniform:0,2"]));
    assert_eq!(out.outcome, Outcome::Success);
    assert!(out.warnings.iter().any(|w| w.contains("renormalised")));
    let v: Value = serde_json::from_str(&out.artifact).unwrap();
    // Triangle on (0, 2) against U(0, 2): int (f - g)^2 = 2/3 - 1/2.
    assert!((v["results"][0]["value"].as_f64().unwrap() - 1.0 / 6.0).abs() < 1e-8);
}

#[test]
fn estimate_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data.csv");
    std::fs::write(&data, "x\n-0.5\n0.1\n0.3\n-0.2\n0.4\n9.0\n").unwrap();
    let d = data.to_str().unwrap();
    let (o, v) = json(&[
        "estimate", "--phi", "identity", "--alpha", "0.5", "--model", "normal:sd=1", "--data", d, "--bracket", "-3,12",
        "--full-divergence",
    ]);
    assert_eq!(o, Outcome::Success);
    assert_eq!(v["n"], 6);
    assert_eq!(v["converged"], true);
    assert!(v["theta_hat"].as_f64().unwrap().abs() < 0.5);
    assert!(v["full_divergence_estimate"].is_number());

    let missing = dir.path().join("missing.csv");
    let out = run(&config(&[
        "estimate", "--phi", "identity", "--alpha", "0.5", "--model", "normal:sd=1", "--data",
        missing.to_str().unwrap(), "--bracket", "-3,3",
    ]));
    assert_eq!(out.outcome, Outcome::Error);
    assert_eq!(out.outcome.exit_code(), 1);
}

#[test]
fn bench_table_shape() {
    let out = run(&config(&["bench", "--alpha", "0.5", "--eps", "0,0.2", "--reps", "3", "--n", "50"]));
    assert_eq!(out.outcome, Outcome::Success);
    let rows = csv_rows(&out.artifact);
    assert_eq!(rows[0].join(","), "phi,alpha,eps,mean_theta,sd_theta,mean_abs_bias,failures");
    assert_eq!(rows.len(), 3);
    assert_rectangular(&out.artifact);
    let out = run(&config(&["bench", "--alpha", "0.5", "--eps", "0", "--reps", "1", "--n", "20", "--format", "json"]));
    let v: Value = serde_json::from_str(&out.artifact).unwrap();
    assert!(v["rows"][0]["sd_theta"].is_null());
}

#[test]
fn exit_codes_are_distinct() {
    let all = [Outcome::Success, Outcome::Invalid, Outcome::Inconclusive, Outcome::Error];
    let codes: std::collections::BTreeSet<i32> = all.iter().map(|o| o.exit_code()).collect();
    assert_eq!(codes.len(), all.len());
    assert_eq!(Outcome::Inconclusive.exit_code(), 3);
}

#[test]
fn writes_to_out_path() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let cfg = config(&["certify", "--phi", "log", "--alpha", "1", "--out", path.to_str().unwrap()]);
    assert_eq!(emit(&cfg, &run(&cfg)), 0);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(v["subcommand"], "certify");
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_fdpd");
    let code = |args: &[&str]| Process::new(bin).args(args).output().unwrap().status.code().unwrap();
    assert_eq!(code(&["certify", "--phi", "identity", "--alpha", "1"]), 0);
    assert_eq!(code(&["counterexample", "--phi", "neg_reciprocal", "--alpha", "1"]), 2);
    assert_eq!(code(&["certify", "--phi", "log", "--alpha", "-1"]), 1);
    assert_eq!(code(&["frobnicate"]), 1);
    assert_eq!(code(&["--help"]), 0);
}
