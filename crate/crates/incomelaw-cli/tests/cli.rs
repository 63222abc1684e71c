//! End-to-end tests of the `incomelaw` binary: report contents, data files,
//! exit codes, and determinism.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, Output};

use approx::assert_relative_eq;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_incomelaw"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("stdout is UTF-8")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("stderr is UTF-8")
}

/// Parses the `key=value` report section (everything before the first blank
/// line) into a map.
fn report(out: &Output) -> BTreeMap<String, String> {
    stdout(out)
        .split("\n\n")
        .next()
        .unwrap_or("")
        .lines()
        .filter_map(|line| {
            line.split_once('=')
                .map(|(k, v)| (k.to_string(), v.to_string()))
        })
        .collect()
}

fn report_f64(map: &BTreeMap<String, String>, key: &str) -> f64 {
    map.get(key)
        .unwrap_or_else(|| panic!("report is missing key {key}"))
        .parse()
        .unwrap_or_else(|_| panic!("report value for {key} is not a number"))
}

/// Writes a noiseless sample of the law (mu, theta) on an n-point fraction
/// grid over [p_lo, p_hi].
fn write_exact_sample(path: &Path, mu: f64, theta: f64, n: usize, p_lo: f64, p_hi: f64) {
    let mut text = String::from("threshold,frac_at_or_above\n");
    for i in 0..n {
        let p = p_hi - i as f64 * (p_hi - p_lo) / (n - 1) as f64;
        let x = mu + theta * (1.0 / p).ln();
        text.push_str(&format!("{x},{p}\n"));
    }
    std::fs::write(path, text).expect("write sample");
}

#[test]
fn fit_recovers_exact_law_in_both_modes() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("exact.csv");
    write_exact_sample(&input, 5000.0, 10_000.0, 19, 0.05, 0.95);
    let input = input.to_str().unwrap();

    for mode in ["two-stage", "corollary1"] {
        let out = run(&["fit", "--mode", mode, input]);
        assert!(
            out.status.success(),
            "fit --mode {mode} failed: {}",
            stderr(&out)
        );
        let rep = report(&out);
        assert_relative_eq!(report_f64(&rep, "theta"), 10_000.0, max_relative = 1e-5);
        assert_relative_eq!(report_f64(&rep, "mu"), 5000.0, max_relative = 1e-5);
        assert_relative_eq!(report_f64(&rep, "r2_adj"), 1.0, max_relative = 1e-5);
        assert_relative_eq!(report_f64(&rep, "pct_below"), 5.0, max_relative = 1e-5);
        assert_relative_eq!(report_f64(&rep, "pct_above"), 5.0, max_relative = 1e-5);
        assert!(report_f64(&rep, "x_min") > 5000.0);
        assert!(report_f64(&rep, "x_max") > report_f64(&rep, "x_min"));
    }
}

#[test]
fn corollary1_report_includes_iteration_trace() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("exact.csv");
    write_exact_sample(&input, 5000.0, 10_000.0, 19, 0.05, 0.95);

    let out = run(&["fit", "--mode", "corollary1", input.to_str().unwrap()]);
    assert!(out.status.success());
    let rep = report(&out);
    assert_eq!(rep.get("iterations").map(String::as_str), Some("1"));
    assert_eq!(rep.get("mu_history").map(String::as_str), Some("5000"));

    // The two-stage report sticks to the seven summary fields.
    let out = run(&["fit", "--mode", "two-stage", input.to_str().unwrap()]);
    let rep = report(&out);
    assert!(!rep.contains_key("mu_history"));
}

#[test]
fn fit_writes_plot_data_to_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("exact.csv");
    let plot = dir.path().join("plot.csv");
    write_exact_sample(&input, 5000.0, 10_000.0, 19, 0.05, 0.95);

    let out = run(&[
        "fit",
        input.to_str().unwrap(),
        "--output",
        plot.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    // With --output, stdout carries only the report.
    assert!(!stdout(&out).contains("x_over_theta"));

    let data = std::fs::read_to_string(&plot).unwrap();
    let mut lines = data.lines();
    assert_eq!(lines.next(), Some("x,x_over_theta,cum_pct,fit_pct"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 19);
    // On exact data the observed and fitted percentages coincide.
    for row in rows {
        let fields: Vec<f64> = row.split(',').map(|f| f.parse().unwrap()).collect();
        assert_eq!(fields.len(), 4);
        assert_relative_eq!(fields[0] / 10_000.0, fields[1], max_relative = 1e-12);
        assert_relative_eq!(fields[2], fields[3], max_relative = 1e-9);
    }
}

#[test]
fn fit_json_output_carries_full_precision() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("exact.csv");
    let json_path = dir.path().join("fit.json");
    write_exact_sample(&input, 5000.0, 10_000.0, 19, 0.05, 0.95);

    let out = run(&[
        "fit",
        input.to_str().unwrap(),
        "--format",
        "json",
        "--output",
        json_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());

    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    let law = &doc["fit"]["law"];
    assert_relative_eq!(
        law["theta"].as_f64().unwrap(),
        10_000.0,
        max_relative = 1e-9
    );
    assert_relative_eq!(law["mu"].as_f64().unwrap(), 5000.0, max_relative = 1e-9);
    assert_eq!(doc["points"].as_array().unwrap().len(), 19);
    assert!(doc["fit"]["summary"]["r2_adj"].as_f64().unwrap() > 1.0 - 1e-12);
}

#[test]
fn fit_accepts_percentile_layout_and_normalization_flags() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("pct.csv");
    // Exact law (mu 400, theta 1000) written as below-fractions of monthly
    // income in a currency worth half the target unit: threshold_monthly =
    // (mu + theta ln(1/p)) / 12 * 2.
    let mut text = String::from("cum_frac_below,threshold\n");
    for i in 1..=9 {
        let below = i as f64 / 10.0;
        let x = 400.0 + 1000.0 * (1.0 / (1.0 - below)).ln();
        text.push_str(&format!("{below},{}\n", x / 12.0 * 2.0));
    }
    std::fs::write(&input, text).unwrap();

    let out = run(&[
        "fit",
        input.to_str().unwrap(),
        "--rate",
        "2",
        "--period",
        "monthly",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let rep = report(&out);
    assert_relative_eq!(report_f64(&rep, "theta"), 1000.0, max_relative = 1e-5);
    assert_relative_eq!(report_f64(&rep, "mu"), 400.0, max_relative = 1e-4);
}

#[test]
fn fit_rejects_rising_fractions_with_a_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("rising.csv");
    std::fs::write(
        &input,
        "threshold,frac_at_or_above\n1,0.1\n2,0.2\n3,0.3\n4,0.4\n5,0.5\n",
    )
    .unwrap();

    let out = run(&["fit", input.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(stdout(&out).is_empty());
    let err = stderr(&out);
    assert!(
        err.starts_with("error:"),
        "diagnostic goes to stderr: {err}"
    );
    assert!(err.contains("does not fit"), "{err}");
}

#[test]
fn fit_reports_missing_input() {
    let out = run(&["fit", "/definitely/not/here.csv"]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("does not exist"));
}

#[test]
fn xreg_reproduces_published_2011_row() {
    let out = run(&["xreg", "--year", "2011"]);
    assert!(out.status.success());
    let rep = report(&out);

    assert_eq!(rep.get("n").map(String::as_str), Some("26"));
    assert_relative_eq!(report_f64(&rep, "slope"), 0.29044, max_relative = 5e-3);
    assert_relative_eq!(report_f64(&rep, "intercept"), 2200.382, max_relative = 5e-3);
    assert_relative_eq!(report_f64(&rep, "t_slope"), 8.40292, max_relative = 5e-3);
    assert_relative_eq!(report_f64(&rep, "r2_adj"), 0.735755, max_relative = 5e-3);
    assert_relative_eq!(report_f64(&rep, "pearson_r"), 0.863901, max_relative = 5e-3);

    // Scatter data: one `code,uc_adjusted,mu` row per country.
    let text = stdout(&out);
    let data = text
        .split("\n\n")
        .nth(1)
        .expect("scatter data after the report");
    let mut lines = data.lines();
    assert_eq!(lines.next(), Some("code,uc_adjusted,mu"));
    assert_eq!(lines.clone().count(), 26);
    assert!(lines.any(|l| l.starts_with("AUT,14507,")));
}

#[test]
fn xreg_rejects_years_outside_the_panel() {
    let out = run(&["xreg", "--year", "1999"]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("unknown year 1999"));
}

#[test]
fn simulate_enumerate_lists_every_occupancy() {
    let out = run(&[
        "simulate",
        "--agents",
        "2",
        "--income",
        "2",
        "--mode",
        "enumerate",
    ]);
    assert!(out.status.success());
    let rep = report(&out);
    assert_eq!(rep.get("allocations").map(String::as_str), Some("3"));
    assert_eq!(rep.get("occupancies").map(String::as_str), Some("2"));

    let text = stdout(&out);
    let data = text
        .split("\n\n")
        .nth(1)
        .expect("occupancy table after the report");
    assert!(data.starts_with("counts,omega,entropy\n"));
    assert!(
        data.contains("\n0:1;2:1,2,"),
        "split occupancy has multiplicity 2: {data}"
    );
    assert!(
        data.contains("\n1:2,1,"),
        "paired occupancy has multiplicity 1: {data}"
    );
}

#[test]
fn simulate_single_agent_has_zero_entropy() {
    let out = run(&[
        "simulate",
        "--agents",
        "1",
        "--income",
        "5",
        "--mode",
        "enumerate",
    ]);
    assert!(out.status.success());
    let rep = report(&out);
    assert_eq!(rep.get("allocations").map(String::as_str), Some("1"));
    assert!(stdout(&out).contains("5:1,1,0"));
}

#[test]
fn simulate_argmax_reports_the_max_multiplicity_occupancy() {
    let out = run(&[
        "simulate", "--agents", "2", "--income", "2", "--mode", "argmax",
    ]);
    assert!(out.status.success());
    let rep = report(&out);
    assert_eq!(rep.get("omega").map(String::as_str), Some("2"));
    let text = stdout(&out);
    let data = text.split("\n\n").nth(1).unwrap();
    assert_eq!(data, "level,count\n0,1\n2,1\n");
}

#[test]
fn simulate_sample_histogram_is_seeded_and_mass_one() {
    let out = run(&[
        "simulate", "--agents", "2", "--income", "3", "--mode", "sample", "--seed", "42",
        "--draws", "5000",
    ]);
    assert!(out.status.success());
    let rep = report(&out);
    // Income conservation makes the per-agent mean exactly Y/N.
    assert_eq!(rep.get("mean").map(String::as_str), Some("1.5"));
    assert_eq!(rep.get("seed").map(String::as_str), Some("42"));

    let text = stdout(&out);
    let data = text.split("\n\n").nth(1).unwrap();
    let mut mass = 0.0;
    for line in data.lines().skip(1) {
        let (_, frac) = line.split_once(',').unwrap();
        mass += frac.parse::<f64>().unwrap();
    }
    assert_relative_eq!(mass, 1.0, max_relative = 1e-12);
}

#[test]
fn simulate_refuses_oversized_enumerations() {
    let out = run(&[
        "simulate",
        "--agents",
        "200",
        "--income",
        "400",
        "--mode",
        "enumerate",
    ]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("search space"));
}

#[test]
fn commands_are_deterministic() {
    for args in [
        vec![
            "simulate", "--agents", "2", "--income", "3", "--mode", "sample", "--seed", "7",
            "--draws", "1000",
        ],
        vec!["xreg", "--year", "2013"],
        vec![
            "simulate",
            "--agents",
            "6",
            "--income",
            "9",
            "--mode",
            "enumerate",
        ],
    ] {
        let first = run(&args);
        let second = run(&args);
        assert!(first.status.success());
        assert_eq!(first.stdout, second.stdout, "stdout differs for {args:?}");
    }
}

#[test]
fn gini_prints_six_decimal_places() {
    let out = run(&["gini", "--theta", "1", "--mu", "0"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "gini=0.500000\n");

    let out = run(&["gini", "--theta", "13930", "--mu", "9906"]);
    assert!(out.status.success());
    let rep = report(&out);
    let expected = 0.5 / (1.0 + 9906.0 / 13930.0);
    assert!((report_f64(&rep, "gini") - expected).abs() < 1e-6);
}

#[test]
fn gini_rejects_invalid_laws() {
    let out = run(&["gini", "--theta", "-1", "--mu", "0"]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("theta"));
}

#[test]
fn convert_normalizes_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("weekly.csv");
    std::fs::write(
        &input,
        "threshold,frac_at_or_above\n100,0.9\n200,0.7\n300,0.5\n400,0.3\n500,0.1\n",
    )
    .unwrap();

    let out = run(&[
        "convert",
        input.to_str().unwrap(),
        "--period",
        "weekly",
        "--rate",
        "2",
    ]);
    assert!(out.status.success());
    assert_eq!(
        stdout(&out),
        "threshold,frac_at_or_above\n2600,0.9\n5200,0.7\n7800,0.5\n10400,0.3\n13000,0.1\n"
    );

    // Identity conversion of canonical data is byte-stable.
    let out = run(&["convert", input.to_str().unwrap()]);
    assert_eq!(stdout(&out), std::fs::read_to_string(&input).unwrap());

    // Percentile layout converts to the canonical one.
    let pct = dir.path().join("pct.csv");
    std::fs::write(
        &pct,
        "cum_frac_below,threshold\n0.1,1\n0.2,2\n0.3,3\n0.4,4\n0.5,5\n",
    )
    .unwrap();
    let out = run(&["convert", pct.to_str().unwrap()]);
    assert_eq!(
        stdout(&out),
        "threshold,frac_at_or_above\n1,0.9\n2,0.8\n3,0.7\n4,0.6\n5,0.5\n"
    );

    // --output writes the same bytes to a file and keeps stdout empty.
    let out_path = dir.path().join("converted.csv");
    let out = run(&[
        "convert",
        pct.to_str().unwrap(),
        "--output",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(stdout(&out).is_empty());
    assert!(std::fs::read_to_string(&out_path)
        .unwrap()
        .starts_with("threshold,"));
}
