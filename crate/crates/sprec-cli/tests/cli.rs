//! End-to-end tests of the `sprec` binary: exit codes, report schema,
//! JSON/CSV value agreement and reproducibility.

use std::io::Write;
use std::process::{Command, Output};

use serde_json::Value;

fn sprec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sprec")).args(args).output().expect("binary runs")
}

fn sprec_json(args: &[&str]) -> Value {
    let out = sprec(args);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is a JSON report")
}

fn write_config(name: &str, contents: &str) -> String {
    let path = std::env::temp_dir().join(format!("sprec-test-{}-{}", std::process::id(), name));
    let mut f = std::fs::File::create(&path).unwrap();
    f.write_all(contents.as_bytes()).unwrap();
    path.to_string_lossy().into_owned()
}

const EXP321: &str = r#"{"variables":[
    {"name":"T1","family":"exponential","rate":3.0},
    {"name":"T2","family":"exponential","rate":2.0},
    {"name":"T3","family":"exponential","rate":1.0}
]}"#;

const BLYTH: &str = r#"{"variables":[
    {"name":"T1","family":"discrete","atoms":[{"x":3.0,"p":1.0}]},
    {"name":"T2","family":"discrete","atoms":[{"x":1.0,"p":0.4},{"x":4.0,"p":0.6}]},
    {"name":"T3","family":"discrete","atoms":[{"x":2.0,"p":0.6},{"x":5.0,"p":0.4}]}
]}"#;

#[test]
fn demo_blyth_reports_the_paradox() {
    let report = sprec_json(&["demo", "blyth"]);
    assert_eq!(report["schema"], "sprec-report/1");
    assert_eq!(report["command"], "demo blyth");
    let result = &report["result"];
    let p: Vec<f64> = result["pairwise"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x["p_second_ge_first"]["value"].as_f64().unwrap())
        .collect();
    assert_eq!(p, vec![0.6, 0.64, 0.6]);
    assert_eq!(result["cycle"].as_array().unwrap().len(), 4);
    assert_eq!(result["ssp"]["argmax"][0], serde_json::json!([3, 1, 2]));
    assert_eq!(result["audit"]["holds"], "no");
}

#[test]
fn invalid_parameter_exits_2() {
    let cfg = write_config("badrate.json", r#"{"variables":[{"family":"exponential","rate":-1.0}]}"#);
    let out = sprec(&["-c", &cfg, "order", "check", "--type", "lr"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("rate"));
}

#[test]
fn missing_config_exits_2() {
    let out = sprec(&["ssp", "check"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_claim_exits_2() {
    let cfg = write_config("exp.json", EXP321);
    let out = sprec(&["-c", &cfg, "audit", "--claim", "theorem-7.7"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_flag_exits_2() {
    let out = sprec(&["demo", "blyth", "--frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn perm_table_quadrature_sums_to_one_with_identity_max() {
    let cfg = write_config("exp321.json", EXP321);
    let report = sprec_json(&["-c", &cfg, "perm", "table", "--method", "quadrature"]);
    let result = &report["result"];
    assert!((result["sum"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    let entries = result["table"]["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 6);
    let max = entries
        .iter()
        .max_by(|a, b| {
            let av = a["estimate"]["value"].as_f64().unwrap();
            let bv = b["estimate"]["value"].as_f64().unwrap();
            av.partial_cmp(&bv).unwrap()
        })
        .unwrap();
    assert_eq!(max["perm"], serde_json::json!([1, 2, 3]));
}

#[test]
fn order_check_sp_carries_both_probabilities() {
    let cfg = write_config("exp-pair.json", EXP321);
    let report = sprec_json(&["-c", &cfg, "order", "check", "--type", "sp", "--first", "T1", "--second", "T2"]);
    let r = &report["result"];
    let p21 = r["p_second_ge_first"]["value"].as_f64().unwrap();
    let p12 = r["p_first_ge_second"]["value"].as_f64().unwrap();
    assert_eq!(p21, 0.6); // rates 3,2: 3/(3+2)
    assert_eq!(p12, 0.4);
    assert_eq!(r["verdict"]["direction"], "t1<=t2");
}

#[test]
fn audit_theorem22_on_blyth_finds_the_violation() {
    let cfg = write_config("blyth.json", BLYTH);
    let report = sprec_json(&["-c", &cfg, "audit", "--claim", "theorem-2.2"]);
    let r = &report["result"]["report"];
    assert_eq!(r["holds"], "no");
    let w = &r["witnesses"][0];
    assert_eq!(w["kind"], "sp-violation");
    assert_eq!(w["first"], "T3");
    assert_eq!(w["second"], "T2");
    assert_eq!(w["p_second_ge_first"]["value"].as_f64().unwrap(), 0.36);
    assert_eq!(w["p_first_ge_second"]["value"].as_f64().unwrap(), 0.64);
}

#[test]
fn csp_check_follows_the_chain() {
    let cfg = write_config("blyth2.json", BLYTH);
    let report = sprec_json(&["-c", &cfg, "csp", "check"]);
    // the Blyth chain T1 <=sp T2 <=sp T3 holds even though precedence
    // cycles globally
    assert_eq!(report["result"]["report"]["holds"], "yes");
}

#[test]
fn search_finds_discrete_cycle() {
    let report = sprec_json(&["search", "--claim", "sp-transitivity", "--budget", "600", "--seed", "1", "--max-atoms", "4", "--max-value", "8"]);
    let outcome = &report["result"]["outcome"];
    assert!(outcome.get("found").is_some(), "expected a cycle within budget");
    assert_eq!(outcome["found"]["holds"], "no");
}

/// Every f64 in a JSON report, in document order.
fn collect_numbers(v: &Value, out: &mut Vec<f64>) {
    match v {
        Value::Number(n) => out.push(n.as_f64().unwrap()),
        Value::Array(items) => items.iter().for_each(|x| collect_numbers(x, out)),
        Value::Object(map) => map.values().for_each(|x| collect_numbers(x, out)),
        _ => {}
    }
}

/// Every numeric cell in a CSV document, in document order.
fn csv_numbers(text: &str) -> Vec<f64> {
    text.lines()
        .flat_map(|line| line.split(','))
        .filter_map(|cell| cell.parse::<f64>().ok())
        .collect()
}

#[test]
fn csv_and_json_carry_identical_values() {
    let cfg = write_config("exp-csv.json", EXP321);
    for args in [
        vec!["-c", cfg.as_str(), "perm", "table", "--method", "quadrature"],
        vec!["-c", cfg.as_str(), "order", "check", "--type", "sp"],
        vec!["app", "ratio", "--target", "0.36", "--rival", "0.24"],
    ] {
        let json_report = sprec_json(&args.iter().chain(["--out", "json"].iter()).cloned().collect::<Vec<_>>());
        let csv_out = sprec(&args.iter().chain(["--out", "csv"].iter()).cloned().collect::<Vec<_>>());
        assert!(csv_out.status.success());
        let csv_text = String::from_utf8(csv_out.stdout).unwrap();

        let mut json_nums = Vec::new();
        collect_numbers(&json_report["result"], &mut json_nums);
        let csv_nums = csv_numbers(&csv_text);
        // every numeric the CSV exposes appears bit-identically in JSON
        for x in &csv_nums {
            assert!(
                json_nums.iter().any(|y| y == x || (y.is_nan() && x.is_nan())),
                "csv value {x} missing from json ({args:?})"
            );
        }
        assert!(!csv_nums.is_empty());
    }
}

#[test]
fn reports_are_bit_reproducible() {
    let cfg = write_config("exp-repro.json", EXP321);
    let args = ["-c", cfg.as_str(), "ssp", "check", "--method", "monte-carlo", "--samples", "30000", "--seed", "9"];
    let a = sprec(&args);
    let b = sprec(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn rerun_from_embedded_config_is_bit_identical() {
    let cfg = write_config("exp-embed.json", EXP321);
    let args = ["-c", cfg.as_str(), "perm", "table", "--method", "monte-carlo", "--samples", "20000", "--seed", "4"];
    let first = sprec(&args);
    assert!(first.status.success());
    let report: Value = serde_json::from_slice(&first.stdout).unwrap();

    // rebuild the invocation from the embedded config alone
    let embedded = &report["config"];
    let vars = serde_json::json!({ "variables": embedded["variables"] });
    let cfg2 = write_config("exp-embed2.json", &vars.to_string());
    let rerun = sprec(&[
        "-c",
        cfg2.as_str(),
        "perm",
        "table",
        "--method",
        embedded["method"].as_str().unwrap(),
        "--samples",
        &embedded["samples"].as_u64().unwrap().to_string(),
        "--seed",
        &embedded["seed"].as_u64().unwrap().to_string(),
        "--grid",
        &embedded["grid"].as_u64().unwrap().to_string(),
        "--order-grid",
        &embedded["order_grid"].as_u64().unwrap().to_string(),
        "--trunc",
        &embedded["trunc_quantile"].as_f64().unwrap().to_string(),
        "--ties",
        embedded["ties"].as_str().unwrap(),
        "--perm-cap",
        &embedded["perm_cap"].as_u64().unwrap().to_string(),
    ]);
    assert!(rerun.status.success());
    assert_eq!(first.stdout, rerun.stdout);
}

#[test]
fn report_payloads_reparse_into_core_types() {
    let cfg = write_config("blyth3.json", BLYTH);
    let report = sprec_json(&["-c", &cfg, "ssp", "check"]);
    let ssp: sprec_core::SspReport =
        serde_json::from_value(report["result"]["report"].clone()).expect("SspReport round-trips");
    assert_eq!(ssp.table.entries.len(), 6);
    assert_eq!(ssp.margin, 0.24 - 0.36);

    let report = sprec_json(&["-c", &cfg, "audit", "--claim", "sp-transitivity"]);
    let audit: sprec_core::AuditReport =
        serde_json::from_value(report["result"]["report"].clone()).expect("AuditReport round-trips");
    assert_eq!(audit.claim, sprec_core::ClaimId::SpTransitivity);

    // the embedded variables rebuild the same instance
    let specs: Vec<sprec_core::DistSpec> = serde_json::from_value(report["config"]["variables"].clone()).unwrap();
    let dists: Vec<_> = specs.iter().map(|s| sprec_core::make_distribution(s).unwrap()).collect();
    assert_eq!(dists.len(), 3);
    assert_eq!(dists[1].cdf(3.0), 0.4);
}

#[test]
fn weak_ties_flow_through() {
    let shared = r#"{"variables":[
        {"name":"A","family":"discrete","atoms":[{"x":1.0,"p":0.5},{"x":2.0,"p":0.5}]},
        {"name":"B","family":"discrete","atoms":[{"x":1.0,"p":0.5},{"x":2.0,"p":0.5}]}
    ]}"#;
    let cfg = write_config("shared.json", shared);
    let strict = sprec_json(&["-c", &cfg, "perm", "table", "--ties", "strict"]);
    let weak = sprec_json(&["-c", &cfg, "perm", "table", "--ties", "weak"]);
    let sum = |r: &Value| r["result"]["sum"].as_f64().unwrap();
    assert!(sum(&strict) < 1.0);
    assert!(sum(&weak) > 1.0);
}

#[test]
fn app_series_parallel_runs() {
    let cfg = write_config("exp-sp.json", EXP321);
    let report = sprec_json(&[
        "-c", &cfg, "app", "series-parallel", "--alloc-a", "3,1,2", "--alloc-b", "1,2,3",
        "--samples", "50000", "--seed", "3",
    ]);
    let c = &report["result"]["comparison"];
    let weak = c["weak"]["value"].as_f64().unwrap();
    let strict = c["strict"]["value"].as_f64().unwrap();
    assert!(weak >= strict);
    assert!(weak > 0.5, "largest-in-series should win: weak={weak}");
    assert_eq!(c["samples"].as_u64().unwrap(), 50000);
}

#[test]
fn nonconvergence_exits_3() {
    // weibull shape inside (1, 2): derivative singularity at the origin
    // that the trapezoid engine honestly refuses at the default tolerance
    let cfg = write_config(
        "singular.json",
        r#"{"variables":[
            {"name":"A","family":"weibull","shape":1.5,"scale":1.0},
            {"name":"B","family":"exponential","rate":1.0}
        ]}"#,
    );
    let out = sprec(&["-c", &cfg, "perm", "table", "--method", "quadrature"]);
    assert_eq!(out.status.code(), Some(3), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("converge"));
}

#[test]
fn perm_cap_is_overridable() {
    let cfg = write_config("exp-cap.json", EXP321);
    let out = sprec(&["-c", &cfg, "perm", "table", "--perm-cap", "2"]);
    assert_eq!(out.status.code(), Some(2));
    let report = sprec_json(&["-c", &cfg, "perm", "table", "--perm-cap", "3"]);
    assert_eq!(report["result"]["table"]["entries"].as_array().unwrap().len(), 6);
}

#[test]
fn perm_prob_matches_closed_form() {
    let cfg = write_config("exp-prob.json", EXP321);
    let report = sprec_json(&["-c", &cfg, "perm", "prob", "--perm", "3,2,1"]);
    let value = report["result"]["estimate"]["value"].as_f64().unwrap();
    assert!((value - 1.0 / 15.0).abs() < 1e-6);
}
