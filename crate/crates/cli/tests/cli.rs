use std::path::PathBuf;
use std::process::{Command, Output};
use std::sync::OnceLock;

use serde_json::Value;

fn wickward(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wickward")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> Value {
    let mut all = args.to_vec();
    all.extend(["--format", "json"]);
    let o = wickward(&all);
    assert!(o.status.code() == Some(0) || o.status.code() == Some(1), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

fn validator() -> &'static jsonschema::Validator {
    static V: OnceLock<jsonschema::Validator> = OnceLock::new();
    V.get_or_init(|| {
        let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../schemas/report.schema.json");
        let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
        jsonschema::validator_for(&schema).unwrap()
    })
}

fn assert_valid(report: &Value) {
    let errors: Vec<String> = validator().iter_errors(report).map(|e| format!("{e} at {}", e.instance_path())).collect();
    assert!(errors.is_empty(), "{errors:#?}\n{report:#}");
}

#[test]
fn example_one_verifies_with_exit_zero() {
    let o = wickward(&["ward-check", "phi^2(x1)", "phis^2(x2)"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("contact at x1: 2 * hbar * delta(y-x1)"), "{out}");
    assert!(out.contains("residual: 0\nverdict: Verified"), "{out}");
}

#[test]
fn anomaly_candidate_exits_with_one() {
    let o = wickward(&["ward-check", "j[nu](x1)"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("verdict: AnomalyCandidate"));
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        vec!["ward-check", "phi(x1"],
        vec!["ward-check"],
        vec!["ward-check", "phi(y)", "--at", "y"],
        vec!["ward-check", "star(phi(x), phis(y))"],
        vec!["table1", "--n", "3"],
        vec!["table1", "--dim", "2"],
        vec!["table1", "--dim", "5"],
        vec!["table1", "--format", "dot"],
        vec!["furry-check", "phi(x1)", "--eta", "2"],
        vec!["furry-check", "phi(x1)*phis^2(x1)"],
        vec!["no-such-command"],
    ] {
        let o = wickward(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn parse_errors_report_their_position() {
    let o = wickward(&["expand", "phi(x1) + * phis(x2)"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("1:11"), "{err}");
}

#[test]
fn vev_of_a_feynman_pair() {
    let o = wickward(&["vev", "tproduct(phis(x1), phi(x2))"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).ends_with("\nhbar * DF(x1-x2)\n"));
}

#[test]
fn basic_commutators() {
    let c = |a: &str, b: &str| stdout(&wickward(&["commutator", a, b])).lines().last().unwrap().to_string();
    assert_eq!(c("phi(x)", "phis(y)"), "i * hbar * D(x-y)");
    assert_eq!(c("phi(x)", "phi(y)"), "0");
    assert_eq!(c("phis(x)", "phis(y)"), "0");
}

#[test]
fn every_report_states_the_non_coincidence_assumption() {
    let runs: Vec<Vec<&str>> = vec![
        vec!["expand", "L(x)"],
        vec!["star", "phi(x)", "phis(y)"],
        vec!["tproduct", "phi(x)", "phis(y)"],
        vec!["table1"],
        vec!["dims", "L(x)"],
        vec!["case1-report"],
    ];
    for args in runs {
        let text = stdout(&wickward(&args));
        assert!(text.lines().nth(1).unwrap().contains("pairwise distinct"), "{args:?}");
        let report = json(&args);
        assert!(report["header"]["assumption"].as_str().unwrap().contains("non-coincident"));
    }
    let dot = stdout(&wickward(&["export-diagrams", "phi(x)", "phis(y)", "--format", "dot"]));
    assert!(dot.starts_with("// wickward export-diagrams\n// assumption: point labels are pairwise distinct"));
}

#[test]
fn table1_json_has_eight_rows() {
    let report = json(&["table1", "--n", "6"]);
    assert_valid(&report);
    let rows = report["result"]["rows"].as_array().unwrap();
    let got: Vec<(i64, &str)> =
        rows.iter().map(|r| (r["omega"].as_i64().unwrap(), r["classification"].as_str().unwrap())).collect();
    assert_eq!(
        got,
        [
            (3, "CaseI"),
            (2, "ZeroByFurry"),
            (1, "CaseII"),
            (0, "ZeroByPowerCounting"),
            (2, "ZeroByChargeNumber"),
            (2, "ZeroByChargeNumber"),
            (1, "CaseIII"),
            (0, "ZeroByPowerCounting"),
        ]
    );
    assert!(rows.iter().all(|r| r["args"].as_array().unwrap().len() == 6));
}

#[test]
fn json_reports_validate_against_the_schema() {
    let runs: Vec<Vec<&str>> = vec![
        vec!["expand", "j[mu](y)"],
        vec!["expand", "star(phi(x), phis(y))"],
        vec!["star", "phi^2(x)", "phis^2(y)", "--feynman"],
        vec!["commutator", "phi(x)", "phis(y)"],
        vec!["tproduct", "phi(x1)", "phis(x2)", "L(x3)"],
        vec!["vev", "tproduct(phis(x1), phi(x2))"],
        vec!["ward-check", "phi^2(x1)", "phis^2(x2)"],
        vec!["ward-check", "phi(x1)", "phis(x2)", "--trace"],
        vec!["ward-check", "j[nu](x1)"],
        vec!["furry-check", "j[mu](x1)", "L(x2)", "--eta", "-1"],
        vec!["charge-check", "phi^2(x1)", "phis(x2)"],
        vec!["charge-check", "L(x1)", "j[mu](x2)"],
        vec!["anomaly-scan", "L(x1)", "L(x2)", "j[mu](x3)"],
        vec!["anomaly-scan", "--max-n", "3"],
        vec!["case1-report", "--m", "2"],
        vec!["table1", "--n", "4"],
        vec!["dims", "L(x)", "j[mu](y)", "phi(z)"],
        vec!["dims", "phi(z)", "--dim", "3"],
        vec!["dims", "--rank", "4", "--symmetric", "--epsilon"],
        vec!["export-diagrams", "phi^2(x1)", "phis(x2)", "phis(x3)"],
    ];
    for args in runs {
        let report = json(&args);
        assert_eq!(report["command"], args[0]);
        assert_valid(&report);
    }
}

#[test]
fn the_schema_rejects_malformed_reports() {
    let mut report = json(&["table1"]);
    report["result"]["rows"][0]["classification"] = Value::from("CaseIV");
    assert!(!validator().is_valid(&report));
    let mut report = json(&["ward-check", "phi(x1)", "phis(x2)"]);
    report["result"]["verdict"] = Value::from("Maybe");
    assert!(!validator().is_valid(&report));
    let mut report = json(&["vev", "phi(x)"]);
    report.as_object_mut().unwrap().remove("header");
    assert!(!validator().is_valid(&report));
}

#[test]
fn output_is_deterministic() {
    for args in [
        vec!["ward-check", "phi^2(x1)*phis(x1)", "phis(x2)", "--format", "json"],
        vec!["anomaly-scan", "--max-n", "4"],
        vec!["export-diagrams", "L(x1)", "L(x2)", "--format", "dot"],
        vec!["table1", "--n", "5", "--format", "json"],
    ] {
        let a = wickward(&args);
        let b = wickward(&args);
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn dot_edges_carry_kind_derivs_and_multiplicity() {
    let dot = stdout(&wickward(&["export-diagrams", "phi(x1)*d[mu]phi(x1)", "phis^2(x2)", "--format", "dot"]));
    assert!(dot.contains("graph diagram_0 {"));
    assert!(dot.contains("\"x1\" -- \"x2\" [kind=\"DF\", derivs=\"mu\", multiplicity=1];"), "{dot}");
}

#[test]
fn out_flag_and_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let config = dir.path().join("wickward.toml");
    std::fs::write(&config, "format = \"json\"\neta = \"-1\"\n").unwrap();
    let o = wickward(&[
        "furry-check",
        "j[mu](x1)",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_valid(&report);
    assert_eq!(report["header"]["eta"], "-1");

    let o = wickward(&["table1", "--config", config.to_str().unwrap(), "--format", "text"]);
    assert!(stdout(&o).starts_with("# wickward table1"));

    std::fs::write(&config, "colour = \"red\"\n").unwrap();
    assert_eq!(wickward(&["table1", "--config", config.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn dims_follow_the_dimension_flag() {
    let report = json(&["dims", "phi(x)", "d[mu]phi(x)", "--dim", "3"]);
    let dims: Vec<&str> =
        report["result"]["dimensions"].as_array().unwrap().iter().map(|d| d["dimension"].as_str().unwrap()).collect();
    assert_eq!(dims, ["1/2", "3/2"]);
    assert!(report["result"]["omega"].is_null());
    let report = json(&["dims", "L(x1)", "j[mu](x2)"]);
    assert_eq!(report["result"]["omega"], 3);
}

#[test]
fn case1_report_is_certified() {
    let report = json(&["case1-report"]);
    assert_eq!(report["result"]["constraint_display"], "C1 = C2 - C3 + C4");
    assert_eq!(report["result"]["certified"], true);
    assert_eq!(report["result"]["symmetric_space_dimension"], 9);
}
