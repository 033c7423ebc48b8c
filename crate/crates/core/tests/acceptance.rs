//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any failure.

mod common;

use std::time::{Duration, Instant};

use common::*;
use itertools::Itertools;
use wickward::anomaly::{case1_reduce, invariant_tensor_basis, table1, Classification, IndexSymmetry};
use wickward::coeff::{imag, int};
use wickward::contract::{causal_wick_expand_polynomials, ContractionOracle};
use wickward::field::{charge_conjugate, theta};
use wickward::ward::ContactKind;
use wickward::{
    check_mwi, enumerate_full_contractions, furry_check, unrenormalized_tproduct, vev_tproduct, Exclusion,
    FieldPolynomial, Index, OperatorExpr, RewriteRules, ScalarCoeff, Verdict,
};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn golden_ward_identities() -> Outcome {
    let y = l("y");
    let rules = RewriteRules::default();
    let (x1, x2, x3) = (point(1), point(2), point(3));
    let examples = [
        vec![FieldPolynomial::phi_power(&x1, 2, 0), FieldPolynomial::phi_power(&x2, 0, 2)],
        vec![FieldPolynomial::phi_power(&x1, 2, 1), FieldPolynomial::phi_power(&x2, 1, 2)],
        vec![FieldPolynomial::phi_power(&x1, 1, 1), FieldPolynomial::current(&Index::new("nu"), &x2)],
        vec![
            FieldPolynomial::lagrangian(&x1),
            FieldPolynomial::phi_power(&x2, 2, 1),
            FieldPolynomial::phi_power(&x3, 1, 2),
        ],
    ];
    let mut reports = Vec::new();
    for (k, args) in examples.iter().enumerate() {
        let r = check_mwi(args, &y, &rules).map_err(|e| e.to_string())?;
        ensure(r.verdict == Verdict::Verified && r.residual.is_zero() && !r.lhs.is_zero(), || {
            format!("example {}: residual {}", k + 1, r.residual)
        })?;
        reports.push(r);
    }
    let prefactors = |r: &wickward::MwiReport| r.contact_terms.iter().map(|t| t.prefactor.to_string()).collect_vec();
    ensure(prefactors(&reports[0]) == ["2 * hbar", "-2 * hbar"], || format!("example 1 {:?}", prefactors(&reports[0])))?;
    ensure(prefactors(&reports[1]) == ["hbar", "-hbar"], || format!("example 2 {:?}", prefactors(&reports[1])))?;
    let ex3 = &reports[2].contact_terms;
    ensure(
        ex3.len() == 1
            && ex3[0].label == x2
            && ex3[0].kind == ContactKind::Divergence { index: Index::new("nu") }
            && ex3[0].prefactor == ScalarCoeff::new(imag(2), 1, 0)
            && ex3[0].args == [FieldPolynomial::phi_power(&x1, 1, 1), FieldPolynomial::phi_power(&x2, 1, 1)],
        || format!("example 3 contact terms {ex3:?}"),
    )?;
    let weights = reports[3]
        .contact_terms
        .iter()
        .map(|t| (t.label.to_string(), t.normalized_weights.iter().map(|w| w.to_string()).collect_vec()))
        .collect_vec();
    ensure(
        weights == [("x2".to_string(), vec!["5".to_string()]), ("x3".to_string(), vec!["-5".to_string()])],
        || format!("example 4 weights {weights:?}"),
    )?;
    Ok("examples 1-4 verified; 2 hbar, hbar, 2i hbar d[nu]delta(y-x2), weight 5".into())
}

fn furry_suite() -> Outcome {
    let mut checked = 0;
    for s in [1usize, 3, 5] {
        for r in 0..=(5 - s) {
            let mut args: Vec<FieldPolynomial> = (1..=r).map(|k| FieldPolynomial::lagrangian(&point(k))).collect();
            args.extend((1..=s).map(|c| FieldPolynomial::current(&Index::new(format!("nu{c}")), &point(r + c))));
            let parity = furry_check(&args, &int(1)).map_err(|e| e.to_string())?;
            ensure(parity == Exclusion::ForcedZero, || format!("s={s}, r={r}: parity test not applicable"))?;
            let vev = vev_tproduct(&args).map_err(|e| e.to_string())?;
            ensure(vev.is_zero(), || format!("s={s}, r={r}: brute force gives {vev}"))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} tuples, parity and enumeration both zero"))
}

fn charge_suite() -> Outcome {
    let mut rng = rng(0xC4A26E);
    for case in 0..200 {
        let args = charged_tuple(&mut rng);
        let schemes = enumerate_full_contractions(&args).map_err(|e| e.to_string())?;
        ensure(schemes.is_empty(), || format!("case {case}: {} contraction schemes for {args:?}", schemes.len()))?;
    }
    Ok("200 charged tuples, no contractions".into())
}

fn operator(p: &FieldPolynomial) -> OperatorExpr {
    OperatorExpr::from_polynomial(p)
}

fn deformation_axioms() -> Outcome {
    let mut rng = rng(0xD0A1);
    for case in 0..100 {
        let fs = factors(&mut rng, 3, 4);
        let (a, b, c) = (operator(&fs[0]), operator(&fs[1]), operator(&fs[2]));
        ensure(a.star(&b).hbar_order(0) == a.multiply(&b), || format!("case {case}: classical limit"))?;
        let first = a.commutator(&b).hbar_order(1);
        ensure(first == a.poisson_bracket(&b).scale(&imag(1)), || format!("case {case}: bracket {first}"))?;
        ensure(a.star(&b).star(&c) == a.star(&b.star(&c)), || format!("case {case}: associativity"))?;
    }
    Ok("100 triples: classical limit, i x Poisson bracket, associativity".into())
}

fn homomorphisms() -> Outcome {
    let mut rng = rng(0x4040);
    let eta = int(1);
    for case in 0..100 {
        let fs = factors(&mut rng, 2, 4);
        let (a, b) = (operator(&fs[0]), operator(&fs[1]));
        let conj = |p: &FieldPolynomial| operator(&charge_conjugate(p, &eta).unwrap());
        let lhs = a.star(&b).charge_conjugate(&eta).map_err(|e| e.to_string())?;
        ensure(lhs == conj(&fs[0]).star(&conj(&fs[1])), || format!("case {case}: charge conjugation"))?;
        let th = |p: &FieldPolynomial| operator(&theta(p).unwrap());
        let rhs = th(&fs[0]).star(&b).add(&a.star(&th(&fs[1])));
        ensure(a.star(&b).theta() == rhs, || format!("case {case}: charge number derivation"))?;
    }
    Ok("100 pairs: beta_C homomorphism, theta derivation".into())
}

fn wick_oracle() -> Outcome {
    let tuples = basis_multisets(basis_at(1).len(), 3);
    for picks in &tuples {
        let args = basis_tuple(picks);
        let expanded = causal_wick_expand_polynomials(&args, &ContractionOracle).map_err(|e| e.to_string())?;
        let direct = unrenormalized_tproduct(&args).map_err(|e| e.to_string())?;
        ensure(expanded == direct, || format!("{args:?}: expansion differs"))?;
    }
    Ok(format!("{} tuples of size <= 3", tuples.len()))
}

fn table_reproduction() -> Outcome {
    use Classification::*;
    let paper = [
        (Some(3), CaseI),
        (None, ZeroByFurry),
        (Some(1), CaseII),
        (Some(0), ZeroByPowerCounting),
        (None, ZeroByChargeNumber),
        (None, ZeroByChargeNumber),
        (Some(1), CaseIII),
        (Some(0), ZeroByPowerCounting),
    ];
    for n in 4..=7 {
        let t = table1(n).map_err(|e| e.to_string())?;
        ensure(t.rows.len() == 8, || format!("n={n}: {} rows", t.rows.len()))?;
        for (row, (omega, class)) in t.rows.iter().zip(paper) {
            ensure(row.classification == class && omega.is_none_or(|w| w == row.omega), || {
                format!("n={n}, row {}: got ({}, {:?})", row.row, row.omega, row.classification)
            })?;
        }
    }
    Ok("8 rows for n = 4..7".into())
}

fn case_one() -> Outcome {
    let r = case1_reduce();
    ensure((r.basis1_rank, r.basis2_rank, r.joint_rank) == (9, 9, 9), || {
        format!("ranks {} {} {}", r.basis1_rank, r.basis2_rank, r.joint_rank)
    })?;
    ensure(r.symmetric_space_dimension == 9 && r.round_trip_exact, || "basis change".into())?;
    ensure(r.group1_swap_invariant && r.group2_swap_invariant, || "swap invariance".into())?;
    ensure(r.constraint_display == "C1 = C2 - C3 + C4", || r.constraint_display.clone())?;
    ensure(r.c3_partner_annihilated && r.certified, || "C3 partner".into())?;
    Ok(format!("9-dimensional basis, {}", r.constraint_display))
}

fn tensor_bases() -> Outcome {
    let r2 = invariant_tensor_basis(2, &IndexSymmetry::none(), true);
    let idx = [Index::new("mu"), Index::new("nu")];
    let g = r2.basis.first().map(|t| t.components(&idx)).unwrap_or_default();
    let expected: Vec<i128> = (0..16).map(|k| if k % 5 != 0 { 0 } else if k == 0 { 1 } else { -1 }).collect();
    ensure(r2.dimension() == 1 && g == expected.into_iter().map(|v| wickward::coeff::rat(v, 1)).collect_vec(), || {
        format!("rank 2: {:?}", r2.basis)
    })?;
    let r4 = invariant_tensor_basis(4, &IndexSymmetry::none(), false);
    ensure(r4.dimension() == 3 && r4.component_rank == 3, || format!("rank 4: {}", r4.dimension()))?;
    let sym = invariant_tensor_basis(4, &IndexSymmetry::total(4), true);
    ensure(
        sym.dimension() == 1
            && sym.component_rank == 1
            && !sym.basis[0].has_epsilon()
            && sym.rejected.iter().any(|t| t.has_epsilon()),
        || format!("symmetric rank 4: {} {:?}", sym.dimension(), sym.rejected),
    )?;
    Ok("dimensions 1, 3, 1 (eps rejected) with matching component ranks".into())
}

fn basic_commutators() -> Outcome {
    let (x, y) = (l("x"), l("y"));
    let phi = |p: &wickward::Label| operator(&FieldPolynomial::phi(p));
    let phis = |p: &wickward::Label| operator(&FieldPolynomial::phi_star(p));
    let c = phi(&x).commutator(&phis(&y));
    ensure(c.to_string() == "i * hbar * D(x-y)", || c.to_string())?;
    ensure(phi(&x).commutator(&phi(&y)).is_zero(), || "[phi, phi]".into())?;
    ensure(phis(&x).commutator(&phis(&y)).is_zero(), || "[phis, phis]".into())?;
    Ok("[phi(x), phis(y)] = i hbar D(x-y); [phi, phi] = [phis, phis] = 0".into())
}

fn main() {
    let criteria: [(&str, Option<u64>, fn() -> Outcome); 10] = [
        ("golden Ward identities", Some(10), golden_ward_identities),
        ("Furry suite", Some(60), furry_suite),
        ("charge conservation", Some(10), charge_suite),
        ("deformation quantization axioms", Some(60), deformation_axioms),
        ("structural homomorphisms", None, homomorphisms),
        ("Wick expansion oracle", Some(120), wick_oracle),
        ("Table 1 reproduction", None, table_reproduction),
        ("Case I mechanization", Some(5), case_one),
        ("tensor bases", None, tensor_bases),
        ("basic commutators", None, basic_commutators),
    ];
    let mut failed = 0;
    for (k, (name, limit, run)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let outcome = match (outcome, limit) {
            (Ok(_), Some(s)) if elapsed > Duration::from_secs(s) => Err(format!("took longer than {s} s")),
            (o, _) => o,
        };
        let (status, detail) = match &outcome {
            Ok(d) => ("PASS", d.as_str()),
            Err(d) => ("FAIL", d.as_str()),
        };
        println!("criterion {:>2} {status} {name} ({:.2} s): {detail}", k + 1, elapsed.as_secs_f64());
        failed += usize::from(outcome.is_err());
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
