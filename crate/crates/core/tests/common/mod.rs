#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wickward::coeff::{number, rat};
use wickward::field::{polynomial_charge, quartic_basis};
use wickward::{FieldMonomial, FieldPolynomial, Index, Label, Number, Species};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn l(s: &str) -> Label {
    Label::new(s)
}

pub fn point(k: usize) -> Label {
    Label::new(format!("x{k}"))
}

pub fn coefficient(rng: &mut impl Rng) -> Number {
    let pool = [(1, 1, 0, 1), (-1, 1, 0, 1), (2, 1, 0, 1), (0, 1, 1, 1), (1, 2, 0, 1), (0, 1, -3, 1), (1, 1, 1, 2)];
    let &(a, b, c, d) = pool.choose(rng).unwrap();
    number(rat(a, b), rat(c, d))
}

/// A monomial at `label` with `1..=max_fields` basic fields, each carrying
/// a first derivative with probability 1/4, indices drawn from `indices`
/// and each used at most twice.
pub fn monomial_at(rng: &mut impl Rng, label: &Label, max_fields: usize, indices: &[Index]) -> FieldPolynomial {
    let count = rng.gen_range(1..=max_fields);
    let mut p = FieldPolynomial::constant(coefficient(rng));
    let mut uses = vec![0; indices.len()];
    for _ in 0..count {
        let species = if rng.gen_bool(0.5) { Species::Phi } else { Species::PhiStar };
        let open: Vec<usize> = (0..indices.len()).filter(|&i| uses[i] < 2).collect();
        let derivs = if !open.is_empty() && rng.gen_ratio(1, 4) {
            let i = *open.choose(rng).unwrap();
            uses[i] += 1;
            vec![indices[i].clone()]
        } else {
            Vec::new()
        };
        p = p.multiply(&FieldPolynomial::basic(label, species, derivs));
    }
    p
}

/// One or two monomials at `label`.
pub fn polynomial_at(rng: &mut impl Rng, label: &Label, max_fields: usize, indices: &[Index]) -> FieldPolynomial {
    let mut p = monomial_at(rng, label, max_fields, indices);
    if rng.gen_bool(0.4) {
        p = p.add(&monomial_at(rng, label, max_fields, indices));
    }
    p
}

/// Index pool private to the `k`-th factor.
pub fn indices_for(k: usize) -> Vec<Index> {
    vec![Index::new(format!("a{k}")), Index::new(format!("b{k}"))]
}

/// `count` nonzero polynomials at `x1, x2, …` with at most `max_fields` fields per monomial.
pub fn factors(rng: &mut impl Rng, count: usize, max_fields: usize) -> Vec<FieldPolynomial> {
    (1..=count)
        .map(|k| loop {
            let p = polynomial_at(rng, &point(k), max_fields, &indices_for(k));
            if !p.is_zero() {
                break p;
            }
        })
        .collect()
}

/// A tuple of monomials at distinct points with nonzero total charge number.
pub fn charged_tuple(rng: &mut impl Rng) -> Vec<FieldMonomial> {
    loop {
        let n = rng.gen_range(1..=4);
        let args: Vec<FieldPolynomial> =
            (1..=n).map(|k| monomial_at(rng, &point(k), 4, &indices_for(k))).collect();
        let total: i64 = args.iter().map(|p| polynomial_charge(p).unwrap()).sum();
        if total != 0 {
            return args.iter().map(|p| p.as_monomial().unwrap()).collect();
        }
    }
}

/// The basis at point `x{k}` with current index `nu{k}`.
pub fn basis_at(k: usize) -> Vec<FieldPolynomial> {
    quartic_basis(&point(k), &Index::new(format!("nu{k}")))
}

/// Multisets of basis positions of size `1..=max_n`, as index lists.
pub fn basis_multisets(size: usize, max_n: usize) -> Vec<Vec<usize>> {
    use itertools::Itertools;
    (1..=max_n).flat_map(|n| (0..size).combinations_with_replacement(n)).collect()
}

/// The tuple picking basis element `picks[k]` at point `x{k+1}`.
pub fn basis_tuple(picks: &[usize]) -> Vec<FieldPolynomial> {
    picks.iter().enumerate().map(|(k, &i)| basis_at(k + 1)[i].clone()).collect()
}

pub fn has_derivative(p: &FieldPolynomial) -> bool {
    !p.indices().is_empty()
}
