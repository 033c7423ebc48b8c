//! Linear algebra of rank-2 derivative structures with two derivatives.
//!
//! The labels are `x_{11},…,x_{1m}`, `x_2` and `y`. Translation invariance
//! makes `∂_y = −∂_2 − Σ_i ∂_i` dependent, so a derivative symbol is a
//! linear form in the `m + 1` independent derivatives `∂_{1i}`, `∂_2`. A
//! structure is a combination of `g^{μν} u·v` and `u^μ v^ν` for linear
//! forms `u`, `v`; expanding bilinearly gives coordinates in which ranks
//! and basis changes are computed exactly.

use std::collections::BTreeMap;

use itertools::Itertools;
use num_traits::{One, Zero};
use serde::Serialize;

use super::tensor::{invariant_tensor_basis, IndexSymmetry};
use crate::coeff::Rational;
use crate::linalg;

type Form = Vec<Rational>;

#[derive(Clone, Debug, PartialEq, Eq)]
enum Atom {
    /// `g^{μν} (u·v)`
    Contracted(Form, Form),
    /// `u^μ v^ν`
    Free(Form, Form),
}

/// A named linear combination of two-derivative atoms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DerivStructure {
    pub name: String,
    terms: Vec<(Rational, Atom)>,
}

/// Derivative symbols for a fixed number `m` of symmetrized labels.
struct Symbols {
    m: usize,
}

impl Symbols {
    fn nv(&self) -> usize {
        self.m + 1
    }

    fn unit(&self, k: usize) -> Form {
        let mut f = vec![Rational::zero(); self.nv()];
        f[k] = Rational::one();
        f
    }

    fn d1(&self, i: usize) -> Form {
        self.unit(i)
    }

    fn d2(&self) -> Form {
        self.unit(self.m)
    }

    fn dy(&self) -> Form {
        vec![-Rational::one(); self.nv()]
    }

    fn sum1(&self) -> Form {
        (0..self.nv()).map(|k| if k < self.m { Rational::one() } else { Rational::zero() }).collect()
    }

    /// The exchange `x_2 ↔ y` on derivative forms.
    fn swap(&self, u: &Form) -> Form {
        let mut out: Form = u.clone();
        out[self.m] = Rational::zero();
        let c = u[self.m];
        for (o, d) in out.iter_mut().zip(self.dy()) {
            *o += c * d;
        }
        out
    }

    fn coords(&self) -> usize {
        let nv = self.nv();
        nv * (nv + 1) / 2 + nv * nv
    }

    fn contracted_slot(&self, a: usize, b: usize) -> usize {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        let nv = self.nv();
        a * nv - a * (a + 1) / 2 + b
    }

    fn free_slot(&self, a: usize, b: usize) -> usize {
        let nv = self.nv();
        nv * (nv + 1) / 2 + a * nv + b
    }

    fn vector(&self, s: &DerivStructure) -> Vec<Rational> {
        let nv = self.nv();
        let mut out = vec![Rational::zero(); self.coords()];
        for (c, atom) in &s.terms {
            for a in 0..nv {
                for b in 0..nv {
                    match atom {
                        Atom::Contracted(u, v) => {
                            if a <= b {
                                let w = if a == b { u[a] * v[a] } else { u[a] * v[b] + u[b] * v[a] };
                                out[self.contracted_slot(a, b)] += c * w;
                            }
                        }
                        Atom::Free(u, v) => out[self.free_slot(a, b)] += c * u[a] * v[b],
                    }
                }
            }
        }
        out
    }

    /// `(y, μ) ↔ (x_2, ν)`.
    fn swap_structure(&self, s: &DerivStructure) -> DerivStructure {
        let terms = s
            .terms
            .iter()
            .map(|(c, atom)| {
                let a = match atom {
                    Atom::Contracted(u, v) => Atom::Contracted(self.swap(u), self.swap(v)),
                    Atom::Free(u, v) => Atom::Free(self.swap(v), self.swap(u)),
                };
                (*c, a)
            })
            .collect();
        DerivStructure { name: format!("swap({})", s.name), terms }
    }

    /// Permutation of the symmetrized labels acting on coordinates.
    fn permute_coords(&self, perm: &[usize], v: &[Rational]) -> Vec<Rational> {
        let nv = self.nv();
        let p = |k: usize| if k < self.m { perm[k] } else { k };
        let mut out = vec![Rational::zero(); v.len()];
        for a in 0..nv {
            for b in a..nv {
                out[self.contracted_slot(p(a), p(b))] += v[self.contracted_slot(a, b)];
            }
            for b in 0..nv {
                out[self.free_slot(p(a), p(b))] += v[self.free_slot(a, b)];
            }
        }
        out
    }

    /// Dimension of the subspace fixed by all permutations of `x_{11},…,x_{1m}`.
    fn symmetric_dimension(&self) -> usize {
        let perms: Vec<Vec<usize>> = (0..self.m).permutations(self.m).collect();
        let rows: Vec<Vec<Rational>> = (0..self.coords())
            .map(|k| {
                let mut e = vec![Rational::zero(); self.coords()];
                e[k] = Rational::one();
                let mut acc = vec![Rational::zero(); self.coords()];
                for p in &perms {
                    for (a, x) in acc.iter_mut().zip(self.permute_coords(p, &e)) {
                        *a += x;
                    }
                }
                acc
            })
            .collect();
        linalg::rank(&rows)
    }
}

fn structure(name: &str, terms: Vec<(Rational, Atom)>) -> DerivStructure {
    DerivStructure { name: name.to_string(), terms }
}

fn one() -> Rational {
    Rational::one()
}

fn basis1(s: &Symbols) -> Vec<DerivStructure> {
    let m = s.m;
    let pairs_ne = || (0..m).cartesian_product(0..m).filter(|(i, j)| i != j);
    vec![
        structure("g^{mu nu} sum_i box_i", (0..m).map(|i| (one(), Atom::Contracted(s.d1(i), s.d1(i)))).collect()),
        structure("sum_k d_k^mu d_k^nu", (0..m).map(|k| (one(), Atom::Free(s.d1(k), s.d1(k)))).collect()),
        structure(
            "g^{mu nu} sum_{i!=j} d_i.d_j",
            pairs_ne().map(|(i, j)| (one(), Atom::Contracted(s.d1(i), s.d1(j)))).collect(),
        ),
        structure(
            "sum_{k!=l} d_k^mu d_l^nu",
            pairs_ne().map(|(k, l)| (one(), Atom::Free(s.d1(k), s.d1(l)))).collect(),
        ),
        structure("g^{mu nu} d_2.sum_i d_i", vec![(one(), Atom::Contracted(s.d2(), s.sum1()))]),
        structure("d_2^mu sum_k d_k^nu", vec![(one(), Atom::Free(s.d2(), s.sum1()))]),
        structure("d_2^nu sum_k d_k^mu", vec![(one(), Atom::Free(s.sum1(), s.d2()))]),
        structure("g^{mu nu} box_2", vec![(one(), Atom::Contracted(s.d2(), s.d2()))]),
        structure("d_2^mu d_2^nu", vec![(one(), Atom::Free(s.d2(), s.d2()))]),
    ]
}

/// Groups (1), (2), (3) of the adapted basis, in order.
fn basis2(s: &Symbols) -> Vec<Vec<DerivStructure>> {
    let m = s.m;
    vec![
        vec![
            structure("g^{mu nu} sum_i box_i", (0..m).map(|i| (one(), Atom::Contracted(s.d1(i), s.d1(i)))).collect()),
            structure("sum_i d_i^mu d_i^nu", (0..m).map(|i| (one(), Atom::Free(s.d1(i), s.d1(i)))).collect()),
        ],
        vec![
            structure("d_2^mu d_y^nu", vec![(one(), Atom::Free(s.d2(), s.dy()))]),
            structure("d_y^mu d_2^nu", vec![(one(), Atom::Free(s.dy(), s.d2()))]),
            structure("g^{mu nu} d_y.d_2", vec![(one(), Atom::Contracted(s.dy(), s.d2()))]),
        ],
        group3(s),
    ]
}

fn group3(s: &Symbols) -> Vec<DerivStructure> {
    vec![
        structure("g^{mu nu} box_2", vec![(one(), Atom::Contracted(s.d2(), s.d2()))]),
        structure("g^{mu nu} box_y", vec![(one(), Atom::Contracted(s.dy(), s.dy()))]),
        structure("d_2^mu d_2^nu", vec![(one(), Atom::Free(s.d2(), s.d2()))]),
        structure("d_y^mu d_y^nu", vec![(one(), Atom::Free(s.dy(), s.dy()))]),
    ]
}

/// Monomials in the scalar products `d_{ab} = ∂_a·∂_b`, `a ≤ b`.
type Poly = BTreeMap<Vec<(usize, usize)>, Rational>;

fn dot(u: &Form, v: &Form) -> Poly {
    let mut out = Poly::new();
    for (a, ua) in u.iter().enumerate() {
        for (b, vb) in v.iter().enumerate() {
            let c = ua * vb;
            if !c.is_zero() {
                *out.entry(vec![(a.min(b), a.max(b))]).or_insert_with(Rational::zero) += c;
            }
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

fn poly_mul(p: &Poly, q: &Poly) -> Poly {
    let mut out = Poly::new();
    for (ka, ca) in p {
        for (kb, cb) in q {
            let mut k: Vec<(usize, usize)> = ka.iter().chain(kb).copied().collect();
            k.sort();
            *out.entry(k).or_insert_with(Rational::zero) += ca * cb;
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

fn poly_add(p: &Poly, q: &Poly, scale: Rational) -> Poly {
    let mut out = p.clone();
    for (k, c) in q {
        *out.entry(k.clone()).or_insert_with(Rational::zero) += scale * c;
    }
    out.retain(|_, c| !c.is_zero());
    out
}

/// `∂_ν^{x_2} ∂_μ^y u^{μν}` with `y` and `x_2` derivatives given as forms.
fn double_divergence(st: &DerivStructure, dy: &Form, d2: &Form) -> Poly {
    let mut out = Poly::new();
    for (c, atom) in &st.terms {
        let term = match atom {
            Atom::Contracted(u, v) => poly_mul(&dot(dy, d2), &dot(u, v)),
            Atom::Free(u, v) => poly_mul(&dot(dy, u), &dot(d2, v)),
        };
        out = poly_add(&out, &term, *c);
    }
    out
}

/// `∂_μ^y u^{μν}`, keyed by monomial and the component of the free `ν` form.
fn divergence_y(s: &Symbols, st: &DerivStructure) -> BTreeMap<(Vec<(usize, usize)>, usize), Rational> {
    let dy = s.dy();
    let mut out = BTreeMap::new();
    for (c, atom) in &st.terms {
        let (poly, w) = match atom {
            Atom::Contracted(u, v) => (dot(u, v), dy.clone()),
            Atom::Free(u, v) => (dot(&dy, u), v.clone()),
        };
        for (k, pc) in &poly {
            for (slot, wc) in w.iter().enumerate() {
                let x = c * pc * wc;
                if !x.is_zero() {
                    *out.entry((k.clone(), slot)).or_insert_with(Rational::zero) += x;
                }
            }
        }
    }
    out.retain(|_, c: &mut Rational| !c.is_zero());
    out
}

fn combination(name: &str, parts: &[(&DerivStructure, i128)]) -> DerivStructure {
    let terms = parts
        .iter()
        .flat_map(|(s, c)| s.terms.iter().map(move |(x, a)| (x * Rational::from_integer(*c), a.clone())))
        .collect();
    structure(name, terms)
}

/// Certificate for the Case I derivative-structure analysis.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Case1Report {
    /// Number of symmetrized labels `x_{11},…,x_{1m}`.
    pub m: usize,
    pub basis1: Vec<String>,
    pub basis2_groups: Vec<Vec<String>>,
    pub basis1_rank: usize,
    pub basis2_rank: usize,
    pub joint_rank: usize,
    /// Dimension of all two-derivative structures symmetric in the `x_{1i}`.
    pub symmetric_space_dimension: usize,
    /// Row k: coefficients of old element k in the new basis.
    pub old_in_new: Vec<Vec<String>>,
    /// Row k: coefficients of new element k in the old basis.
    pub new_in_old: Vec<Vec<String>>,
    pub round_trip_exact: bool,
    pub group1_swap_invariant: bool,
    pub group2_swap_invariant: bool,
    pub group3_elementwise_invariant: bool,
    pub group3_span_closed: bool,
    /// `∂_ν^2 ∂_μ^y` applied to each group (3) element, as `lambda*box_2` or `lambda*box_y`.
    pub group3_double_divergence: Vec<String>,
    /// Normalized linear constraint `Σ c_k C_k = 0` from antisymmetry in `x_2 ↔ y`.
    pub constraint: Vec<String>,
    pub constraint_display: String,
    pub c2_structure_symmetric: bool,
    pub c4_matches_c2_after_divergence: bool,
    pub c3_structure_symmetric: bool,
    pub c3_partner_annihilated: bool,
    pub c3_symmetrized_symmetric: bool,
    /// Rank-2 invariant structures with exactly one derivative (rank-3 constant tensors).
    pub one_derivative_structures: usize,
    pub zero_derivative_structures: usize,
    pub certified: bool,
}

fn fmt_rat(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn fmt_constraint(c: &[Rational]) -> String {
    let terms = c[1..].iter().enumerate().filter(|(_, x)| !x.is_zero()).map(|(k, x)| {
        let v = -x / c[0];
        let name = format!("C{}", k + 2);
        if v == one() {
            name
        } else if v == -one() {
            format!("-{name}")
        } else {
            format!("{}*{name}", fmt_rat(&v))
        }
    });
    format!("C1 = {}", crate::field::fmt_sum(terms))
}

/// Runs the Case I analysis for `m` symmetrized labels (`m ≥ 2`).
pub fn case1_reduce_with(m: usize) -> Case1Report {
    let s = Symbols { m };
    let old = basis1(&s);
    let groups = basis2(&s);
    let new: Vec<DerivStructure> = groups.iter().flatten().cloned().collect();
    let old_v: Vec<Vec<Rational>> = old.iter().map(|x| s.vector(x)).collect();
    let new_v: Vec<Vec<Rational>> = new.iter().map(|x| s.vector(x)).collect();
    let joint: Vec<Vec<Rational>> = old_v.iter().chain(&new_v).cloned().collect();

    let old_in_new: Option<Vec<Vec<Rational>>> = old_v.iter().map(|v| linalg::express(&new_v, v)).collect();
    let new_in_old: Option<Vec<Vec<Rational>>> = new_v.iter().map(|v| linalg::express(&old_v, v)).collect();
    let round_trip_exact = match (&old_in_new, &new_in_old) {
        (Some(a), Some(b)) => {
            let reconstructs = old_v.iter().zip(a).all(|(v, c)| linalg::combine(&new_v, c) == *v)
                && new_v.iter().zip(b).all(|(v, c)| linalg::combine(&old_v, c) == *v);
            reconstructs && linalg::mat_mul(a, b) == linalg::identity(old.len())
        }
        _ => false,
    };

    let invariant = |x: &DerivStructure| s.vector(&s.swap_structure(x)) == s.vector(x);
    let g3 = &groups[2];
    let g3_v: Vec<Vec<Rational>> = g3.iter().map(|x| s.vector(x)).collect();
    let group3_span_closed =
        g3.iter().all(|x| linalg::express(&g3_v, &s.vector(&s.swap_structure(x))).is_some());

    let dy = s.dy();
    let d2 = s.d2();
    let lambda = dot(&dy, &d2);
    let lambda_box2 = poly_mul(&lambda, &dot(&d2, &d2));
    let lambda_boxy = poly_mul(&lambda, &dot(&dy, &dy));
    let images: Vec<Poly> = g3.iter().map(|x| double_divergence(x, &dy, &d2)).collect();
    let group3_double_divergence = images
        .iter()
        .map(|p| {
            if *p == lambda_box2 {
                "lambda*box_2".to_string()
            } else if *p == lambda_boxy {
                "lambda*box_y".to_string()
            } else {
                "other".to_string()
            }
        })
        .collect();
    let antisym: Vec<Poly> = g3
        .iter()
        .zip(&images)
        .map(|(x, p)| poly_add(p, &double_divergence(&s.swap_structure(x), &dy, &d2), -one()))
        .collect();
    let monomials: Vec<Vec<(usize, usize)>> = antisym.iter().flat_map(|p| p.keys().cloned()).sorted().dedup().collect();
    let system: Vec<Vec<Rational>> = monomials
        .iter()
        .map(|k| antisym.iter().map(|p| p.get(k).copied().unwrap_or_else(Rational::zero)).collect())
        .collect();
    let (rows, _) = linalg::rref(&system);
    let constraint_row = rows.first().cloned().unwrap_or_default();
    let constraint_ok = rows.len() == 1 && !constraint_row[0].is_zero();

    let c2 = combination("C2", &[(&g3[1], 1), (&g3[0], 1)]);
    let c3 = combination("C3", &[(&g3[2], 1), (&g3[0], -1)]);
    let c4 = combination("C4", &[(&g3[3], 1), (&g3[0], 1)]);
    let partner = combination("C3 partner", &[(&g3[3], 1), (&g3[1], -1)]);
    let c3_sym = combination("C3 symmetrized", &[(&c3, 1), (&partner, 1)]);
    let c4_matches_c2_after_divergence = divergence_y(&s, &c4) == divergence_y(&s, &c2);
    let c3_partner_annihilated = divergence_y(&s, &partner).is_empty();
    let constraint_satisfied = [&c2, &c3, &c4].iter().all(|c| {
        let Some(k) = linalg::express(&g3_v, &s.vector(c)) else { return false };
        constraint_row.iter().zip(&k).map(|(a, b)| a * b).sum::<Rational>().is_zero()
    });

    let one_derivative_structures = invariant_tensor_basis(3, &IndexSymmetry::none(), true).dimension();
    let zero_derivative_structures = invariant_tensor_basis(2, &IndexSymmetry::none(), true).dimension();

    let basis1_rank = linalg::rank(&old_v);
    let basis2_rank = linalg::rank(&new_v);
    let joint_rank = linalg::rank(&joint);
    let symmetric_space_dimension = s.symmetric_dimension();
    let group1_swap_invariant = groups[0].iter().all(invariant);
    let group2_swap_invariant = groups[1].iter().all(invariant);
    let group3_elementwise_invariant = g3.iter().all(invariant);
    let c2_structure_symmetric = invariant(&c2);
    let c3_structure_symmetric = invariant(&c3);
    let c3_symmetrized_symmetric = invariant(&c3_sym);

    let certified = basis1_rank == 9
        && basis2_rank == 9
        && joint_rank == 9
        && symmetric_space_dimension == 9
        && round_trip_exact
        && group1_swap_invariant
        && group2_swap_invariant
        && !group3_elementwise_invariant
        && group3_span_closed
        && constraint_ok
        && constraint_satisfied
        && c2_structure_symmetric
        && c4_matches_c2_after_divergence
        && !c3_structure_symmetric
        && c3_partner_annihilated
        && c3_symmetrized_symmetric
        && one_derivative_structures == 0
        && zero_derivative_structures == 1;

    let fmt_matrix =
        |m: Option<Vec<Vec<Rational>>>| m.unwrap_or_default().iter().map(|r| r.iter().map(fmt_rat).collect()).collect();
    Case1Report {
        m,
        basis1: old.iter().map(|x| x.name.clone()).collect(),
        basis2_groups: groups.iter().map(|g| g.iter().map(|x| x.name.clone()).collect()).collect(),
        basis1_rank,
        basis2_rank,
        joint_rank,
        symmetric_space_dimension,
        old_in_new: fmt_matrix(old_in_new),
        new_in_old: fmt_matrix(new_in_old),
        round_trip_exact,
        group1_swap_invariant,
        group2_swap_invariant,
        group3_elementwise_invariant,
        group3_span_closed,
        group3_double_divergence,
        constraint: constraint_row.iter().map(fmt_rat).collect(),
        constraint_display: if constraint_ok { fmt_constraint(&constraint_row) } else { "none".into() },
        c2_structure_symmetric,
        c4_matches_c2_after_divergence,
        c3_structure_symmetric,
        c3_partner_annihilated,
        c3_symmetrized_symmetric,
        one_derivative_structures,
        zero_derivative_structures,
        certified,
    }
}

/// [`case1_reduce_with`] for three symmetrized labels.
pub fn case1_reduce() -> Case1Report {
    case1_reduce_with(3)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn swap_is_an_involution() {
        let s = Symbols { m: 3 };
        for k in 0..4 {
            let u = s.unit(k);
            assert_eq!(s.swap(&s.swap(&u)), u);
        }
        assert_eq!(s.swap(&s.d2()), s.dy());
    }

    #[test]
    fn coordinates_are_injective_on_units() {
        let s = Symbols { m: 2 };
        let mut seen = std::collections::BTreeSet::new();
        for a in 0..3 {
            for b in 0..3 {
                assert!(seen.insert(s.free_slot(a, b)));
                if a <= b {
                    assert!(seen.insert(s.contracted_slot(a, b)));
                }
            }
        }
        assert_eq!(seen.len(), s.coords());
    }

    #[test]
    fn single_label_degenerates() {
        let r = case1_reduce_with(1);
        assert_eq!(r.basis1_rank, 7);
        assert!(!r.certified);
    }
}
