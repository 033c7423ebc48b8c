use std::collections::BTreeMap;
use std::fmt::Write as _;

use itertools::Itertools;
use serde::Serialize;
use serde_json::json;
use wickward::anomaly::{
    case1_reduce_with, classify, classify_all, invariant_tensor_basis, omega, scan_tuples, table1, Classification,
    IndexSymmetry,
};
use wickward::contract::describe_scheme;
use wickward::dsl::{parse_and_eval, Value};
use wickward::field::{charge_parity, polynomial_charge, polynomial_dimension};
use wickward::{
    check_mwi, charge_conservation_check, diagrams, diagrams_to_dot, enumerate_full_contractions, furry_check,
    unrenormalized_tproduct, vev_tproduct, Exclusion, FieldPolynomial, Label, RewriteRules, Verdict,
};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::report::Outcome;

fn polynomial(src: &str) -> Result<FieldPolynomial, CliError> {
    match parse_and_eval(src)? {
        Value::Polynomial(p) => Ok(p),
        Value::Operator(_) => Err(CliError::Usage(format!("`{src}` is an operator expression, not a field polynomial"))),
    }
}

fn polynomials(srcs: &[String]) -> Result<Vec<FieldPolynomial>, CliError> {
    srcs.iter().map(|s| polynomial(s)).collect()
}

fn require_args(srcs: &[String], what: &str) -> Result<(), CliError> {
    if srcs.is_empty() {
        return Err(CliError::Usage(format!("{what} needs at least one argument")));
    }
    Ok(())
}

fn require_d4(config: &RunConfig, what: &str) -> Result<(), CliError> {
    if config.dimension != 4 {
        return Err(CliError::Usage(format!("{what} is only implemented in dimension 4")));
    }
    Ok(())
}

fn join(args: &[FieldPolynomial]) -> String {
    args.iter().map(|p| p.to_string()).join(", ")
}

pub fn expand(src: &str) -> Result<Outcome, CliError> {
    let value = parse_and_eval(src)?;
    let kind = match value {
        Value::Polynomial(_) => "polynomial",
        Value::Operator(_) => "operator",
    };
    let text = value.to_string();
    Outcome::new(json!({ "input": src, "kind": kind, "value": text }), format!("{text}\n"))
}

pub fn star(a: &str, b: &str, feynman: bool) -> Result<Outcome, CliError> {
    let (x, y) = (parse_and_eval(a)?.into_operator(), parse_and_eval(b)?.into_operator());
    let product = if feynman { x.feynman_star(&y) } else { x.star(&y) };
    let text = product.to_string();
    let op = if feynman { "feynman_star" } else { "star" };
    Outcome::new(json!({ "operation": op, "left": a, "right": b, "value": text }), format!("{text}\n"))
}

pub fn commutator(a: &str, b: &str) -> Result<Outcome, CliError> {
    let (x, y) = (parse_and_eval(a)?.into_operator(), parse_and_eval(b)?.into_operator());
    let text = x.commutator(&y).to_string();
    Outcome::new(json!({ "operation": "commutator", "left": a, "right": b, "value": text }), format!("{text}\n"))
}

pub fn tproduct(srcs: &[String]) -> Result<Outcome, CliError> {
    require_args(srcs, "tproduct")?;
    let args = polynomials(srcs)?;
    let text = unrenormalized_tproduct(&args)?.to_string();
    Outcome::new(json!({ "args": args, "value": text }), format!("{text}\n"))
}

pub fn vev(src: &str) -> Result<Outcome, CliError> {
    let text = parse_and_eval(src)?.into_operator().vev().to_string();
    Outcome::new(json!({ "input": src, "value": text }), format!("{text}\n"))
}

#[derive(Serialize)]
struct TraceEntry {
    round: usize,
    rule: &'static str,
    result: String,
}

pub fn ward_check(srcs: &[String], y: &str, config: &RunConfig) -> Result<Outcome, CliError> {
    require_args(srcs, "ward-check")?;
    let args = polynomials(srcs)?;
    let y = Label::new(y);
    let rules = RewriteRules::default();
    let report = check_mwi(&args, &y, &rules)?;

    let mut text = String::new();
    let _ = writeln!(text, "args: {}", join(&args));
    let _ = writeln!(text, "current: j[{}]({})", report.current_index, report.current_label);
    let _ = writeln!(text, "lhs: {}", report.lhs);
    let _ = writeln!(text, "rhs: {}", report.rhs);
    for t in &report.contact_terms {
        let op = match &t.kind {
            wickward::ward::ContactKind::Charge => format!("delta({}-{})", y, t.label),
            wickward::ward::ContactKind::Divergence { index } => format!("d[{index}]delta({}-{})", y, t.label),
        };
        let weights = t.normalized_weights.iter().map(|w| w.to_string()).join(", ");
        let _ = writeln!(
            text,
            "contact at {}: {} * {} * t({}) with t = {}; weights [{}]",
            t.label,
            t.prefactor,
            op,
            join(&t.args),
            t.t,
            weights
        );
    }
    let _ = writeln!(text, "diagram unit: {}", report.diagram_unit);
    let _ = writeln!(text, "residual: {}", report.residual);
    let _ = writeln!(text, "verdict: {:?}", report.verdict);

    let mut result = serde_json::to_value(&report)?;
    if config.trace {
        let mut with_current = args.clone();
        with_current.push(FieldPolynomial::current(&report.current_index, &y));
        let raw = vev_tproduct(&with_current)?.differentiate(&y, &report.current_index);
        let (_, steps) = raw.normalize_traced(&y, &rules).map_err(wickward::ward::WardError::from)?;
        let mut trace = vec![TraceEntry { round: 0, rule: "divergence", result: raw.to_string() }];
        trace.extend(steps.into_iter().map(|s| TraceEntry { round: s.round, rule: s.rule, result: s.result.to_string() }));
        text.push_str("trace:\n");
        for s in &trace {
            let _ = writeln!(text, "  [{}] {}: {}", s.round, s.rule, s.result);
        }
        result["trace"] = serde_json::to_value(&trace)?;
    }
    let status = match report.verdict {
        Verdict::Verified => 0,
        Verdict::AnomalyCandidate => 1,
    };
    let dot = Some(diagrams_to_dot(&report.lhs_diagrams));
    Ok(Outcome { result, text, dot, status })
}

fn exclusion_name(e: Exclusion) -> &'static str {
    match e {
        Exclusion::ForcedZero => "ForcedZero",
        Exclusion::NotApplicable => "NotApplicable",
    }
}

pub fn furry(srcs: &[String], config: &RunConfig) -> Result<Outcome, CliError> {
    require_args(srcs, "furry-check")?;
    let args = polynomials(srcs)?;
    let exclusion = furry_check(&args, &config.eta)?;
    let parities = args.iter().map(|p| charge_parity(p, &config.eta)).collect::<Result<Vec<_>, _>>()?;
    let brute_force_zero = vev_tproduct(&args)?.is_zero();
    let mut text = String::new();
    for (p, s) in args.iter().zip(&parities) {
        let _ = writeln!(text, "{p}: parity {}", s.map_or("none".to_string(), |s| format!("{s:+}")));
    }
    let _ = writeln!(text, "exclusion: {}", exclusion_name(exclusion));
    let _ = writeln!(text, "brute-force vev is zero: {brute_force_zero}");
    Outcome::new(
        json!({ "args": args, "parities": parities, "exclusion": exclusion, "brute_force_zero": brute_force_zero }),
        text,
    )
}

pub fn charge(srcs: &[String]) -> Result<Outcome, CliError> {
    require_args(srcs, "charge-check")?;
    let args = polynomials(srcs)?;
    let exclusion = charge_conservation_check(&args)?;
    let charges = args.iter().map(polynomial_charge).collect::<Result<Vec<_>, _>>()?;
    let total: i64 = charges.iter().sum();
    let contractions = match args.iter().map(FieldPolynomial::as_monomial).collect::<Option<Vec<_>>>() {
        Some(ms) => Some(enumerate_full_contractions(&ms)?.len()),
        None => None,
    };
    let brute_force_zero = vev_tproduct(&args)?.is_zero();
    let mut text = String::new();
    let _ = writeln!(text, "charges: [{}], total {total}", charges.iter().join(", "));
    let _ = writeln!(text, "exclusion: {}", exclusion_name(exclusion));
    if let Some(n) = contractions {
        let _ = writeln!(text, "full contractions: {n}");
    }
    let _ = writeln!(text, "brute-force vev is zero: {brute_force_zero}");
    Outcome::new(
        json!({
            "args": args,
            "charges": charges,
            "total_charge": total,
            "exclusion": exclusion,
            "full_contractions": contractions,
            "brute_force_zero": brute_force_zero,
        }),
        text,
    )
}

pub fn anomaly_scan(srcs: &[String], max_n: usize, config: &RunConfig) -> Result<Outcome, CliError> {
    require_d4(config, "anomaly-scan")?;
    if !srcs.is_empty() {
        let args = polynomials(srcs)?;
        let verdict = classify(&args)?;
        let mut text = format!("args: {}\nomega: {}\nclassification: {}\n", join(&args), verdict.omega, verdict.classification);
        if let Some(u) = &verdict.admissible_u {
            let _ = writeln!(text, "admissible u: {}", serde_json::to_string(u)?);
        }
        return Outcome::new(json!({ "mode": "tuple", "verdict": verdict }), text);
    }
    if !(1..=6).contains(&max_n) {
        return Err(CliError::Usage(format!("--max-n must lie in 1..=6, got {max_n}")));
    }
    let tuples = scan_tuples(max_n);
    let verdicts = classify_all(&tuples).into_iter().collect::<Result<Vec<_>, _>>()?;
    let mut counts: BTreeMap<Classification, usize> = BTreeMap::new();
    for v in &verdicts {
        *counts.entry(v.classification).or_default() += 1;
    }
    let unclassified: Vec<_> =
        verdicts.iter().filter(|v| v.classification == Classification::Unclassified).map(|v| &v.args).collect();
    let mut text = format!("tuples: {}\n", verdicts.len());
    for (c, n) in &counts {
        let _ = writeln!(text, "{c}: {n}");
    }
    for args in &unclassified {
        let _ = writeln!(text, "unclassified: {}", join(args));
    }
    let counts_json: BTreeMap<String, usize> = counts.iter().map(|(c, n)| (format!("{c:?}"), *n)).collect();
    Outcome::new(
        json!({ "mode": "scan", "max_n": max_n, "tuples": verdicts.len(), "counts": counts_json, "unclassified": unclassified }),
        text,
    )
}

pub fn case1_report(m: usize, config: &RunConfig) -> Result<Outcome, CliError> {
    require_d4(config, "case1-report")?;
    if !(1..=6).contains(&m) {
        return Err(CliError::Usage(format!("--m must lie in 1..=6, got {m}")));
    }
    let r = case1_reduce_with(m);
    let mut text = String::new();
    let _ = writeln!(text, "points x1..x{m} plus x2 and y");
    let _ = writeln!(text, "ranks: basis1 {}, basis2 {}, joint {}", r.basis1_rank, r.basis2_rank, r.joint_rank);
    let _ = writeln!(text, "symmetric structures: {}", r.symmetric_space_dimension);
    let _ = writeln!(text, "round trip exact: {}", r.round_trip_exact);
    let _ = writeln!(
        text,
        "swap invariance: group 1 {}, group 2 {}, group 3 span {}",
        r.group1_swap_invariant, r.group2_swap_invariant, r.group3_span_closed
    );
    let _ = writeln!(text, "group 3 double divergence: [{}]", r.group3_double_divergence.join(", "));
    let _ = writeln!(text, "constraint: {}", r.constraint_display);
    let _ = writeln!(text, "C3 partner annihilated: {}", r.c3_partner_annihilated);
    let _ = writeln!(text, "certified: {}", r.certified);
    Outcome::new(&r, text)
}

pub fn table(n: usize, config: &RunConfig) -> Result<Outcome, CliError> {
    require_d4(config, "table1")?;
    if n > 12 {
        return Err(CliError::Usage(format!("--n must be at most 12, got {n}")));
    }
    let t = table1(n)?;
    let mut text = format!("n = {}\n", t.n);
    for r in &t.rows {
        let _ = writeln!(text, "{} | {} | omega {} | {}", r.row, r.pattern, r.omega, r.classification);
    }
    Outcome::new(&t, text)
}

pub fn dims(srcs: &[String], rank: Option<usize>, symmetric: bool, epsilon: bool, config: &RunConfig) -> Result<Outcome, CliError> {
    if let Some(rank) = rank {
        require_d4(config, "tensor basis enumeration")?;
        if rank > 8 {
            return Err(CliError::Usage(format!("--rank must be at most 8, got {rank}")));
        }
        let symmetry = if symmetric { IndexSymmetry::total(rank) } else { IndexSymmetry::none() };
        let b = invariant_tensor_basis(rank, &symmetry, epsilon);
        let basis: Vec<String> = b.basis.iter().map(|t| t.to_string()).collect();
        let rejected: Vec<String> = b.rejected.iter().map(|t| t.to_string()).collect();
        let mut text = format!("rank {rank}: dimension {} (component rank {})\n", b.dimension(), b.component_rank);
        for t in &basis {
            let _ = writeln!(text, "  {t}");
        }
        for t in &rejected {
            let _ = writeln!(text, "  rejected: {t}");
        }
        return Outcome::new(
            json!({
                "mode": "tensor",
                "rank": rank,
                "symmetric": symmetric,
                "epsilon": epsilon,
                "dimension": b.dimension(),
                "component_rank": b.component_rank,
                "basis": basis,
                "rejected": rejected,
            }),
            text,
        );
    }
    require_args(srcs, "dims")?;
    let args = polynomials(srcs)?;
    let mut text = String::new();
    let mut rows = Vec::new();
    for p in &args {
        let d = polynomial_dimension(p, config.dimension)?;
        let _ = writeln!(text, "{p}: dimension {d}");
        rows.push(json!({ "polynomial": p, "dimension": d.to_string() }));
    }
    let omega = if config.dimension == 4 { Some(omega(&args)?) } else { None };
    if let Some(w) = omega {
        let _ = writeln!(text, "omega: {w}");
    }
    Outcome::new(json!({ "mode": "polynomials", "dimensions": rows, "omega": omega }), text)
}

pub fn export_diagrams(srcs: &[String]) -> Result<Outcome, CliError> {
    require_args(srcs, "export-diagrams")?;
    let args = polynomials(srcs)?;
    let ds = diagrams(&args)?;
    let mut text = format!("diagrams: {}\n", ds.len());
    for (k, d) in ds.iter().enumerate() {
        let edges = d.edges.iter().map(|e| format!("{}x{} {}-{}", e.multiplicity, e.kind, e.from, e.to)).join(", ");
        let _ = writeln!(text, "{k}: {} (multiplicity {}) [{}]", d.coefficient, d.multiplicity, edges);
    }
    if let Some(ms) = args.iter().map(FieldPolynomial::as_monomial).collect::<Option<Vec<_>>>() {
        let schemes = enumerate_full_contractions(&ms)?;
        if schemes.len() <= 64 {
            for (s, _) in &schemes {
                let _ = writeln!(text, "  scheme {}", describe_scheme(s));
            }
        }
    }
    let dot = diagrams_to_dot(&ds);
    Ok(Outcome { dot: Some(dot), ..Outcome::new(json!({ "args": args, "diagrams": ds }), text)? })
}

pub fn fresh_current_label(srcs: &[String]) -> Result<String, CliError> {
    let args = polynomials(srcs)?;
    let used: Vec<Label> = args.iter().filter_map(FieldPolynomial::point).collect();
    let y = std::iter::once("y".to_string())
        .chain((1..).map(|k| format!("y{k}")))
        .find(|c| !used.iter().any(|l| l.as_str() == c))
        .expect("unbounded supply of names");
    Ok(y)
}
