use wickward::anomaly::{
    admissible_u, case1_reduce, case1_reduce_with, classification, classify, invariant_tensor_basis, omega, table1,
    AdmissibleU, Classification, IndexSymmetry,
};
use wickward::{FieldPolynomial, Index, Label};

fn l(s: &str) -> Label {
    Label::new(s)
}

fn lagrangians(count: usize) -> Vec<FieldPolynomial> {
    (1..=count).map(|k| FieldPolynomial::lagrangian(&l(&format!("x{k}")))).collect()
}

#[test]
fn table_rows_match_the_paper() {
    use Classification::*;
    let expected = [
        (3, CaseI),
        (2, ZeroByFurry),
        (1, CaseII),
        (0, ZeroByPowerCounting),
        (2, ZeroByChargeNumber),
        (2, ZeroByChargeNumber),
        (1, CaseIII),
        (0, ZeroByPowerCounting),
    ];
    for n in 4..=7 {
        let t = table1(n).unwrap();
        let got: Vec<(i64, Classification)> = t.rows.iter().map(|r| (r.omega, r.classification)).collect();
        assert_eq!(got, expected, "n = {n}");
        for r in &t.rows {
            assert_eq!(r.args.len(), n);
        }
    }
    assert!(table1(3).is_err());
}

#[test]
fn omega_drops_by_two_when_l_becomes_a_pair() {
    let j = FieldPolynomial::current(&Index::new("nu"), &l("z"));
    for n in 2..6 {
        let mut args = lagrangians(n - 1);
        args.push(j.clone());
        let before = omega(&args).unwrap();
        args[0] = FieldPolynomial::phi_power(&l("x1"), 1, 1);
        assert_eq!(omega(&args).unwrap(), before - 2);
        args.rotate_left(1);
        assert_eq!(omega(&args).unwrap(), before - 2);
    }
}

#[test]
fn only_three_cases_survive() {
    // Every tuple over L, its submonomials and at most four currents either
    // vanishes for a structural reason, is one of the three cases, or is the
    // ω = 1 family (L^{n-3}, φφ*², φ²φ*, j) that no single exclusion covers.
    let shapes: Vec<(usize, usize)> =
        (0..=2).flat_map(|a| (0..=2).map(move |b| (a, b))).filter(|&(a, b)| a + b > 0).collect();
    let mut cases = std::collections::BTreeSet::new();
    let mut unclassified = 0;
    for n in 2..=5 {
        for currents in 1..=n.min(4) {
            for extra in 0..=(n - currents).min(2) {
                let ls = n - currents - extra;
                for picks in itertools_like_combinations(&shapes, extra) {
                    let mut args = lagrangians(ls);
                    let mut k = ls;
                    for (a, b) in picks {
                        k += 1;
                        args.push(FieldPolynomial::phi_power(&l(&format!("x{k}")), a, b));
                    }
                    for c in 0..currents {
                        k += 1;
                        args.push(FieldPolynomial::current(&Index::new(format!("nu{c}")), &l(&format!("x{k}"))));
                    }
                    let (_, class) = classification(&args).unwrap();
                    if class == Classification::Unclassified {
                        let extras: Vec<(usize, usize)> =
                            args[ls..ls + extra].iter().map(|p| shape(p)).collect();
                        assert_eq!((currents, extras), (1, vec![(1, 2), (2, 1)]), "{args:?}");
                        assert_eq!(omega(&args).unwrap(), 1);
                        unclassified += 1;
                    }
                    cases.insert(class);
                }
            }
        }
    }
    assert!(cases.contains(&Classification::CaseI));
    assert!(cases.contains(&Classification::CaseII));
    assert!(cases.contains(&Classification::CaseIII));
    assert_eq!(unclassified, 3);
}

fn shape(p: &FieldPolynomial) -> (usize, usize) {
    let m = p.as_monomial().unwrap();
    let a = m.factors.iter().filter(|f| f.field.species == wickward::Species::Phi).count();
    (a, m.factors.len() - a)
}

fn itertools_like_combinations(items: &[(usize, usize)], k: usize) -> Vec<Vec<(usize, usize)>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for (i, x) in items.iter().enumerate() {
        for mut rest in itertools_like_combinations(&items[i..], k - 1) {
            rest.insert(0, *x);
            out.push(rest);
        }
    }
    out
}

#[test]
fn tensor_bases() {
    let r2 = invariant_tensor_basis(2, &IndexSymmetry::none(), true);
    assert_eq!((r2.dimension(), r2.component_rank), (1, 1));
    assert_eq!(r2.basis[0].to_string(), "g[mu,nu]");

    let r4 = invariant_tensor_basis(4, &IndexSymmetry::none(), false);
    assert_eq!((r4.dimension(), r4.component_rank), (3, 3));

    let sym = invariant_tensor_basis(4, &IndexSymmetry::total(4), true);
    assert_eq!(sym.dimension(), 1);
    assert_eq!(sym.rejected.len(), 1);
    assert!(sym.rejected[0].has_epsilon());
    assert!(!sym.basis[0].has_epsilon());

    let parity_odd = invariant_tensor_basis(4, &IndexSymmetry::none(), true);
    assert_eq!(parity_odd.dimension(), 4);
    assert_eq!(parity_odd.component_rank, 4);

    assert_eq!(invariant_tensor_basis(3, &IndexSymmetry::none(), true).dimension(), 0);
    assert_eq!(invariant_tensor_basis(6, &IndexSymmetry::none(), false).dimension(), 15);
}

#[test]
fn case_one_certificate() {
    let r = case1_reduce();
    assert_eq!((r.basis1_rank, r.basis2_rank, r.joint_rank), (9, 9, 9));
    assert_eq!(r.symmetric_space_dimension, 9);
    assert!(r.round_trip_exact);
    assert!(r.group1_swap_invariant && r.group2_swap_invariant);
    assert!(!r.group3_elementwise_invariant && r.group3_span_closed);
    assert_eq!(r.group3_double_divergence, ["lambda*box_2", "lambda*box_y", "lambda*box_2", "lambda*box_y"]);
    assert_eq!(r.constraint, ["1", "-1", "1", "-1"]);
    assert_eq!(r.constraint_display, "C1 = C2 - C3 + C4");
    assert!(r.c3_partner_annihilated && r.c4_matches_c2_after_divergence);
    assert_eq!(r.one_derivative_structures, 0);
    assert!(r.certified);
    for m in 2..=5 {
        assert!(case1_reduce_with(m).certified, "m = {m}");
    }
}

#[test]
fn admissible_renormalizations_are_symmetric() {
    for row in table1(5).unwrap().rows {
        let v = classify(&row.args).unwrap();
        match v.classification {
            c if c.is_case() => {
                let u = v.admissible_u.clone().unwrap();
                assert!(u.is_symmetric(), "row {}", row.row);
                assert_eq!(admissible_u(&v).unwrap(), u);
            }
            _ => assert!(admissible_u(&v).is_err()),
        }
    }
    let mut args = lagrangians(2);
    args.extend((1..=3).map(|c| FieldPolynomial::current(&Index::new(format!("nu{c}")), &l(&format!("z{c}")))));
    match classify(&args).unwrap().admissible_u.unwrap() {
        AdmissibleU::CaseII { structure, free_coefficients, .. } => {
            assert_eq!(free_coefficients, 1);
            assert_eq!(structure.terms.len(), 3);
        }
        other => panic!("unexpected {other:?}"),
    }
}
