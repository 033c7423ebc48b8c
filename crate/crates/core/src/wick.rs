//! Operator expressions and the star products acting on them.

use std::collections::BTreeMap;
use std::fmt;

use itertools::Itertools;
use serde::{Serialize, Serializer};

use crate::coeff::{format_number, imag, int, is_unit_modulus, Number, ScalarCoeff};
use crate::contract::{leg_classes, transport_matrices, LegClass};
use crate::dist::{differentiate_lc, DistExpr};
use crate::field::{charge_number, conjugate_factors, FieldAt, FieldError, FieldMonomial, FieldPolynomial};
use crate::kernel::{Kernel, KernelKind};
use crate::symbols::{Index, Label};
use crate::term::{LinComb, TermKey};

/// Errors raised when building time-ordered products.
#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum WickError {
    #[error("label `{0}` occurs in more than one argument; arguments must sit at distinct points")]
    RepeatedLabel(Label),
    #[error("argument `{0}` is not a local polynomial")]
    NotLocal(String),
    #[error("Lorentz index `{0}` occurs more than twice")]
    OverusedIndex(Index),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Sum of `coefficient · kernels · normal-ordered fields`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct OperatorExpr(pub(crate) LinComb);

/// Borrowed view of one operator term.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OperatorTerm<'a> {
    pub coeff: ScalarCoeff,
    pub kernels: &'a [Kernel],
    pub fields: &'a [FieldAt],
}

impl OperatorExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::from_monomial(&FieldMonomial::constant(int(1)))
    }

    pub fn from_monomial(m: &FieldMonomial) -> Self {
        let key = TermKey { fields: m.factors.clone(), ..Default::default() };
        Self(LinComb::single(key, m.coeff))
    }

    pub fn from_polynomial(p: &FieldPolynomial) -> Self {
        let mut lc = LinComb::default();
        for m in p.monomials() {
            lc.add_term(TermKey { fields: m.factors, ..Default::default() }, m.coeff);
        }
        Self(lc)
    }

    pub fn from_dist(d: &DistExpr) -> Self {
        Self(d.0.clone())
    }

    pub fn is_zero(&self) -> bool {
        self.0.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.is_zero()
    }

    pub fn terms(&self) -> impl Iterator<Item = OperatorTerm<'_>> {
        self.0.terms.iter().map(|(k, c)| OperatorTerm {
            coeff: ScalarCoeff::new(*c, k.hbar, k.mass2),
            kernels: &k.kernels,
            fields: &k.fields,
        })
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(self.0.add(&other.0))
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self(self.0.sub(&other.0))
    }

    pub fn scale(&self, c: &Number) -> Self {
        Self(self.0.scale(c))
    }

    /// Pointwise (classical) product: no contractions.
    pub fn multiply(&self, other: &Self) -> Self {
        Self(self.0.multiply(&other.0))
    }

    /// Terms of order exactly `ħ^k`, with that power stripped.
    pub fn hbar_order(&self, k: u32) -> Self {
        Self(LinComb::from_raw(self.0.terms.iter().filter(|(key, _)| key.hbar == k).map(|(key, c)| {
            (TermKey { hbar: 0, ..key.clone() }, *c)
        })))
    }

    /// Vacuum expectation value: the field-free part.
    pub fn vev(&self) -> DistExpr {
        let mut lc = LinComb::default();
        for (k, c) in &self.0.terms {
            if k.fields.is_empty() {
                lc.add_canonical(k.clone(), *c);
            }
        }
        DistExpr(lc)
    }

    pub fn differentiate(&self, label: &Label, index: &Index) -> Self {
        Self(differentiate_lc(&self.0, label, index))
    }

    /// Charge number operator on the field part of every term.
    pub fn theta(&self) -> Self {
        Self(LinComb::from_raw(self.0.terms.iter().map(|(k, c)| {
            let q: i64 = k.fields.iter().map(|f| f.field.species.charge()).sum();
            (k.clone(), c * int(q as i128))
        })))
    }

    /// β_C on the field part; kernels are invariant.
    pub fn charge_conjugate(&self, eta: &Number) -> Result<Self, FieldError> {
        if !is_unit_modulus(eta) {
            return Err(FieldError::PhaseNotUnit(format_number(eta)));
        }
        Ok(Self(LinComb::from_raw(self.0.terms.iter().map(|(k, c)| {
            let (phase, fields) = conjugate_factors(&k.fields, eta);
            (TermKey { fields, ..k.clone() }, c * phase)
        }))))
    }

    /// `F ⋆ G`: all partial cross-contractions weighted by `ħΔ⁺(x_F − x_G)`.
    pub fn star(&self, other: &Self) -> Self {
        contract_product(self, other, KernelKind::DeltaPlus)
    }

    /// `F ⋆_F G`: as [`OperatorExpr::star`] with the Feynman propagator.
    pub fn feynman_star(&self, other: &Self) -> Self {
        contract_product(self, other, KernelKind::Feynman)
    }

    /// `[F, G]_⋆`, with every reversed `Δ⁺` rewritten through `iΔ(z) = Δ⁺(z) − Δ⁺(−z)`.
    pub fn commutator(&self, other: &Self) -> Self {
        let raw = self.star(other).sub(&other.star(self));
        Self(orient_delta_plus(&raw.0))
    }

    /// Rewrites every reversed `Δ⁺` through `Δ⁺(−z) = Δ⁺(z) − iΔ(z)`, so
    /// that equal distributions get equal representations.
    pub fn orient_delta_plus(&self) -> Self {
        Self(orient_delta_plus(&self.0))
    }

    /// Single-contraction bracket with kernel `Δ(x_F − x_G)`.
    pub fn poisson_bracket(&self, other: &Self) -> Self {
        let mut out = LinComb::default();
        for (kf, cf) in &self.0.terms {
            for (kg, cg) in &other.0.terms {
                let kg = kg.shift_dummies(kf.dummy_bound());
                let (fp, fs) = leg_classes(&kf.fields);
                let (gp, gs) = leg_classes(&kg.fields);
                for (left, right) in [(&fp, &gs), (&fs, &gp)] {
                    for a in left.iter() {
                        for b in right.iter() {
                            let weight = int((a.count * b.count) as i128);
                            let (kernel, sign) = edge_kernel(KernelKind::Commutator, a, b);
                            let mut fields = remove_one(&kf.fields, &a.field);
                            fields.extend(remove_one(&kg.fields, &b.field));
                            let key = TermKey {
                                hbar: kf.hbar + kg.hbar,
                                mass2: kf.mass2 + kg.mass2,
                                kernels: kf.kernels.iter().chain(&kg.kernels).cloned().chain([kernel]).collect(),
                                fields,
                            };
                            out.add_term(key, cf * cg * weight * int(sign as i128));
                        }
                    }
                }
            }
        }
        Self(out)
    }

    pub fn relabel(&self, from: &Label, to: &Label) -> Self {
        Self(LinComb::from_raw(self.0.terms.iter().map(|(k, c)| (k.relabel(from, to), *c))))
    }
}

fn remove_one(fields: &[FieldAt], f: &FieldAt) -> Vec<FieldAt> {
    let mut out = fields.to_vec();
    if let Some(p) = out.iter().position(|g| g == f) {
        out.remove(p);
    }
    out
}

/// Kernel for one contraction between a leg on the left and one on the
/// right, with the sign from moving right-leg derivatives onto the argument.
pub(crate) fn edge_kernel(kind: KernelKind, left: &LegClass, right: &LegClass) -> (Kernel, i64) {
    let derivs = left.field.field.derivs.iter().chain(&right.field.field.derivs).cloned().collect();
    let sign = if right.field.field.derivs.len() % 2 == 0 { 1 } else { -1 };
    (Kernel::new(kind, left.field.label.clone(), right.field.label.clone(), derivs), sign)
}

fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

/// Leg-level count of partial matchings with class-level pattern `n`.
fn partial_multiplicity(rows: &[usize], cols: &[usize], n: &[Vec<usize>]) -> u128 {
    let mut num = 1u128;
    let mut den = 1u128;
    for (i, c) in rows.iter().enumerate() {
        let used: usize = n[i].iter().sum();
        num *= factorial(*c);
        den *= factorial(c - used);
    }
    for (j, d) in cols.iter().enumerate() {
        let used: usize = n.iter().map(|r| r[j]).sum();
        num *= factorial(*d);
        den *= factorial(d - used);
    }
    for v in n.iter().flatten() {
        den *= factorial(*v);
    }
    num / den
}

fn contract_product(f: &OperatorExpr, g: &OperatorExpr, kind: KernelKind) -> OperatorExpr {
    let mut out = LinComb::default();
    for (kf, cf) in &f.0.terms {
        for (kg, cg) in &g.0.terms {
            let kg = kg.shift_dummies(kf.dummy_bound());
            contract_terms(kf, cf, &kg, cg, kind, &mut out);
        }
    }
    OperatorExpr(out)
}

fn contract_terms(kf: &TermKey, cf: &Number, kg: &TermKey, cg: &Number, kind: KernelKind, out: &mut LinComb) {
    let (fp, fs) = leg_classes(&kf.fields);
    let (gp, gs) = leg_classes(&kg.fields);
    let counts = |v: &[LegClass]| v.iter().map(|c| c.count).collect::<Vec<_>>();
    let any = |_: usize, _: usize| true;
    let first = transport_matrices(&counts(&fp), &counts(&gs), &any, false);
    let second = transport_matrices(&counts(&fs), &counts(&gp), &any, false);
    for a in &first {
        for b in &second {
            let mult = partial_multiplicity(&counts(&fp), &counts(&gs), a)
                * partial_multiplicity(&counts(&fs), &counts(&gp), b);
            let mut sign = 1i64;
            let mut kernels: Vec<Kernel> = kf.kernels.iter().chain(&kg.kernels).cloned().collect();
            let mut left_used = vec![0usize; fp.len() + fs.len()];
            let mut right_used = vec![0usize; gp.len() + gs.len()];
            let mut edges = 0u32;
            for (n, lrows, rcols, loff, roff) in [(a, &fp, &gs, 0, gp.len()), (b, &fs, &gp, fp.len(), 0)] {
                for (i, row) in n.iter().enumerate() {
                    for (j, &k) in row.iter().enumerate() {
                        if k == 0 {
                            continue;
                        }
                        let (kernel, s) = edge_kernel(kind, &lrows[i], &rcols[j]);
                        for _ in 0..k {
                            kernels.push(kernel.clone());
                            sign *= s;
                        }
                        left_used[loff + i] += k;
                        right_used[roff + j] += k;
                        edges += k as u32;
                    }
                }
            }
            let mut fields = Vec::new();
            for (c, used) in fp.iter().chain(&fs).zip(&left_used) {
                fields.extend(std::iter::repeat_n(c.field.clone(), c.count - used));
            }
            for (c, used) in gp.iter().chain(&gs).zip(&right_used) {
                fields.extend(std::iter::repeat_n(c.field.clone(), c.count - used));
            }
            let key = TermKey { hbar: kf.hbar + kg.hbar + edges, mass2: kf.mass2 + kg.mass2, kernels, fields };
            out.add_term(key, cf * cg * int(mult as i128 * sign as i128));
        }
    }
}

/// Rewrites `Δ⁺^{(k)}(b − a)` with `a < b` as `(−1)^k [Δ⁺^{(k)}(a − b) − iΔ^{(k)}(a − b)]`.
pub(crate) fn orient_delta_plus(lc: &LinComb) -> LinComb {
    let mut out = LinComb::default();
    for (key, coeff) in &lc.terms {
        let (reversed, kept): (Vec<Kernel>, Vec<Kernel>) =
            key.kernels.iter().cloned().partition(|k| k.kind == KernelKind::DeltaPlus && k.a > k.b);
        let mut partial = vec![(TermKey { kernels: kept, ..key.clone() }, *coeff)];
        for k in reversed {
            let sign = int(if k.order() % 2 == 0 { 1 } else { -1 });
            let flipped = Kernel::new(KernelKind::DeltaPlus, k.b.clone(), k.a.clone(), k.derivs.clone());
            let comm = Kernel { kind: KernelKind::Commutator, ..flipped.clone() };
            partial = partial
                .into_iter()
                .flat_map(|(t, c)| {
                    let mut p = t.clone();
                    p.kernels.push(flipped.clone());
                    let mut q = t;
                    q.kernels.push(comm.clone());
                    [(p, c * sign), (q, c * sign * imag(-1))]
                })
                .collect();
        }
        for (k, c) in partial {
            out.add_term(k, c);
        }
    }
    out
}

/// Labels of the non-constant arguments, checked for locality and distinctness.
pub(crate) fn argument_labels(args: &[FieldPolynomial]) -> Result<Vec<Option<Label>>, WickError> {
    let mut seen: Vec<Label> = Vec::new();
    let mut out = Vec::with_capacity(args.len());
    for a in args {
        if !a.is_local() {
            return Err(WickError::NotLocal(a.to_string()));
        }
        let label = a.point();
        if let Some(l) = &label {
            if seen.contains(l) {
                return Err(WickError::RepeatedLabel(l.clone()));
            }
            seen.push(l.clone());
        }
        out.push(label);
    }
    let mut uses: BTreeMap<Index, usize> = BTreeMap::new();
    for a in args {
        let mut most: BTreeMap<Index, usize> = BTreeMap::new();
        for m in a.monomials() {
            let mut here: BTreeMap<Index, usize> = BTreeMap::new();
            for idx in m.factors.iter().flat_map(|f| f.field.derivs.iter()) {
                *here.entry(idx.clone()).or_default() += 1;
            }
            for (idx, n) in here {
                if n > 2 {
                    return Err(WickError::OverusedIndex(idx));
                }
                if idx.is_dummy() {
                    continue;
                }
                let e = most.entry(idx).or_default();
                *e = (*e).max(n);
            }
        }
        for (idx, n) in most {
            *uses.entry(idx).or_default() += n;
        }
    }
    if let Some((idx, _)) = uses.into_iter().find(|(_, n)| *n > 2) {
        return Err(WickError::OverusedIndex(idx));
    }
    Ok(out)
}

/// `A₁ ⋆_F ⋯ ⋆_F Aₙ` on local arguments at pairwise distinct points.
pub fn unrenormalized_tproduct(args: &[FieldPolynomial]) -> Result<OperatorExpr, WickError> {
    argument_labels(args)?;
    Ok(args
        .iter()
        .map(OperatorExpr::from_polynomial)
        .fold(OperatorExpr::one(), |acc, a| acc.feynman_star(&a)))
}

/// Charge numbers summed over the tuple.
pub fn total_charge(args: &[FieldMonomial]) -> i64 {
    args.iter().map(charge_number).sum()
}

impl fmt::Display for OperatorExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.render())
    }
}

impl Serialize for OperatorExpr {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// The distinct labels appearing in the field parts.
pub fn field_labels(e: &OperatorExpr) -> Vec<Label> {
    e.0.terms.keys().flat_map(|k| k.fields.iter().map(|f| f.label.clone())).sorted().dedup().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::ScalarCoeff;
    use crate::field::Species;

    fn l(s: &str) -> Label {
        Label::new(s)
    }

    fn op(p: FieldPolynomial) -> OperatorExpr {
        OperatorExpr::from_polynomial(&p)
    }

    #[test]
    fn star_of_basic_fields() {
        let phi = op(FieldPolynomial::phi(&l("x")));
        let phis = op(FieldPolynomial::phi_star(&l("y")));
        let prod = phi.star(&phis);
        let expected = phi.multiply(&phis).add(&OperatorExpr::from_dist(&DistExpr::term(
            ScalarCoeff::hbar(),
            vec![Kernel::plain(KernelKind::DeltaPlus, &l("x"), &l("y"))],
        )));
        assert_eq!(prod, expected);
        let phi_y = op(FieldPolynomial::phi(&l("y")));
        assert_eq!(phi.star(&phi_y), phi.multiply(&phi_y));
        assert_eq!(OperatorExpr::one().star(&phis), phis);
    }

    #[test]
    fn basic_commutators() {
        let phi = op(FieldPolynomial::phi(&l("x")));
        let phis = op(FieldPolynomial::phi_star(&l("y")));
        let c = phi.commutator(&phis);
        assert_eq!(c.to_string(), "i * hbar * D(x-y)");
        assert!(phi.commutator(&op(FieldPolynomial::phi(&l("y")))).is_zero());
        assert!(OperatorExpr::one().commutator(&phis).is_zero());
    }

    #[test]
    fn commutator_of_reversed_labels() {
        let phi = op(FieldPolynomial::phi(&l("y")));
        let phis = op(FieldPolynomial::phi_star(&l("x")));
        assert_eq!(phi.commutator(&phis).to_string(), "-i * hbar * D(x-y)");
    }

    #[test]
    fn two_point_tproduct() {
        let args = [FieldPolynomial::phi_star(&l("x1")), FieldPolynomial::phi(&l("x2"))];
        let t = unrenormalized_tproduct(&args).unwrap();
        assert_eq!(t.vev().to_string(), "hbar * DF(x1-x2)");
        assert_eq!(t.len(), 2);
        let same = [FieldPolynomial::phi(&l("x1")), FieldPolynomial::phi(&l("x1"))];
        assert!(matches!(unrenormalized_tproduct(&same), Err(WickError::RepeatedLabel(_))));
    }

    #[test]
    fn an_index_may_appear_at_most_twice() {
        let d = |label: &str, species, i: &str| FieldPolynomial::basic(&l(label), species, vec![Index::new(i)]);
        let pair = |label: &str, i: &str| d(label, Species::Phi, i).multiply(&d(label, Species::PhiStar, i));
        assert!(unrenormalized_tproduct(&[pair("x1", "mu"), pair("x2", "nu")]).is_ok());
        assert!(matches!(
            unrenormalized_tproduct(&[pair("x1", "mu"), pair("x2", "mu")]),
            Err(WickError::OverusedIndex(_))
        ));
        let triple = pair("x1", "mu").multiply(&d("x1", Species::PhiStar, "mu"));
        assert!(matches!(unrenormalized_tproduct(&[triple]), Err(WickError::OverusedIndex(_))));
        let spread = [d("x1", Species::Phi, "mu"), d("x2", Species::PhiStar, "mu"), d("x3", Species::Phi, "mu")];
        assert!(matches!(unrenormalized_tproduct(&spread), Err(WickError::OverusedIndex(_))));
    }

    #[test]
    fn quadratic_tproduct_vev() {
        let args = [FieldPolynomial::phi_power(&l("x1"), 1, 1), FieldPolynomial::phi_power(&l("x2"), 1, 1)];
        let t = unrenormalized_tproduct(&args).unwrap();
        assert_eq!(t.vev().to_string(), "hbar^2 * DF(x1-x2)^2");
    }

    #[test]
    fn poisson_bracket_of_basic_fields() {
        let phi = op(FieldPolynomial::phi(&l("x")));
        let phis = op(FieldPolynomial::phi_star(&l("y")));
        assert_eq!(phi.poisson_bracket(&phis).to_string(), "D(x-y)");
        assert!(phi.poisson_bracket(&op(FieldPolynomial::phi(&l("y")))).is_zero());
    }

    #[test]
    fn derivative_legs_move_onto_kernel() {
        let mu = Index::new("mu");
        let dphi = op(FieldPolynomial::basic(&l("x"), crate::field::Species::Phi, vec![]));
        let dphis = op(FieldPolynomial::basic(&l("y"), crate::field::Species::PhiStar, vec![mu.clone()]));
        let prod = dphi.star(&dphis).hbar_order(1);
        assert_eq!(prod.to_string(), "-d[mu]DP(x-y)");
    }
}
