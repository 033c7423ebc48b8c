//! Numerical distributions: sums of coefficient × kernel products.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::coeff::{int, Number, ScalarCoeff};
use crate::kernel::{Kernel, KernelKind, RewriteRules};
use crate::symbols::{Index, Label};
use crate::term::{LinComb, TermKey};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KernelError {
    #[error("d'Alembertian on a delta distribution: {0}")]
    BoxOnDelta(String),
    #[error("rewriting did not reach a fixpoint after {0} rounds")]
    NoFixpoint(usize),
}

/// A canonical sum of kernel products with graded coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct DistExpr(pub(crate) LinComb);

/// One rewrite pass recorded by [`DistExpr::normalize_traced`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RewriteStep {
    pub round: usize,
    pub rule: &'static str,
    pub result: DistExpr,
}

/// Borrowed view of one term.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistTerm<'a> {
    pub coeff: ScalarCoeff,
    pub kernels: &'a [Kernel],
}

impl DistExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: ScalarCoeff) -> Self {
        Self::term(c, Vec::new())
    }

    pub fn term(c: ScalarCoeff, kernels: Vec<Kernel>) -> Self {
        let key = TermKey { hbar: c.hbar_power, mass2: c.mass2_power, kernels, fields: Vec::new() };
        Self(LinComb::single(key, c.value))
    }

    pub fn kernel(k: Kernel) -> Self {
        Self::term(ScalarCoeff::one(), vec![k])
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

    pub fn terms(&self) -> impl Iterator<Item = DistTerm<'_>> {
        self.0.terms.iter().map(|(k, c)| DistTerm {
            coeff: ScalarCoeff::new(*c, k.hbar, k.mass2),
            kernels: &k.kernels,
        })
    }

    pub(crate) fn raw_terms(&self) -> impl Iterator<Item = (&TermKey, &Number)> {
        self.0.terms.iter()
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

    pub fn scale_coeff(&self, c: &ScalarCoeff) -> Self {
        self.multiply(&Self::constant(c.clone()))
    }

    pub fn multiply(&self, other: &Self) -> Self {
        Self(self.0.multiply(&other.0))
    }

    /// Rebuilds every term from scratch; a no-op on values built through this API.
    pub fn canonicalize(&self) -> Self {
        Self(LinComb::from_raw(self.0.terms.iter().map(|(k, c)| (k.clone(), *c))))
    }

    /// Indices left free in some term.
    pub fn free_indices(&self) -> BTreeSet<Index> {
        self.0.terms.keys().flat_map(|k| k.free_indices()).collect()
    }

    pub fn labels(&self) -> BTreeSet<Label> {
        self.0.terms.keys().flat_map(|k| k.labels()).collect()
    }

    /// Highest power of ħ present.
    pub fn max_hbar(&self) -> Option<u32> {
        self.0.terms.keys().map(|k| k.hbar).max()
    }

    pub fn relabel(&self, from: &Label, to: &Label) -> Self {
        Self(LinComb::from_raw(self.0.terms.iter().map(|(k, c)| (k.relabel(from, to), *c))))
    }

    /// `∂^{index}` with respect to `label`, by the product rule.
    pub fn differentiate(&self, label: &Label, index: &Index) -> Self {
        Self(differentiate_lc(&self.0, label, index))
    }

    /// Resolves every `□` using `(□ + m²)K = c·δ` (`c = 0` for Δ⁺ and Δ).
    pub fn apply_klein_gordon(&self, rules: &RewriteRules) -> Result<Self, KernelError> {
        let mut out = LinComb::default();
        let mut work: Vec<(TermKey, Number)> =
            self.0.terms.iter().map(|(k, c)| (k.clone(), *c)).collect();
        while let Some((key, coeff)) = work.pop() {
            let Some(pos) = key.kernels.iter().position(|k| k.box_count() > 0) else {
                out.add_term(key, coeff);
                continue;
            };
            let kernel = &key.kernels[pos];
            let reduced = kernel.take_box().expect("box present");
            if kernel.kind == KernelKind::Dirac {
                return Err(KernelError::BoxOnDelta(kernel.to_string()));
            }
            let mut massive = key.clone();
            massive.kernels[pos] = reduced.clone();
            massive.mass2 += 1;
            work.push((massive, -coeff));
            if kernel.kind == KernelKind::Feynman {
                let mut contact = key.clone();
                contact.kernels[pos] = Kernel { kind: KernelKind::Dirac, ..reduced };
                work.push((contact, coeff * rules.feynman_contact));
            }
        }
        Ok(Self(out))
    }

    /// Uses the support of `δ(contact − x)` to move every other occurrence
    /// of `contact` onto `x`, integrating derivatives on the δ by parts.
    /// δ factors not touching `contact`, or pinning it to two different
    /// points, vanish at non-coincident points.
    pub fn delta_support_reduce(&self, contact: &Label) -> Self {
        let mut out = LinComb::default();
        for (key, coeff) in &self.0.terms {
            out.add_assign(&reduce_term(key, coeff, contact));
        }
        Self(out)
    }

    /// Iterates Klein-Gordon resolution and δ-support reduction to a fixpoint.
    pub fn normalize(&self, contact: &Label, rules: &RewriteRules) -> Result<Self, KernelError> {
        const ROUNDS: usize = 32;
        let mut cur = self.clone();
        for _ in 0..ROUNDS {
            let next = cur.apply_klein_gordon(rules)?.delta_support_reduce(contact);
            if next == cur {
                return Ok(next);
            }
            cur = next;
        }
        Err(KernelError::NoFixpoint(ROUNDS))
    }

    /// Like [`DistExpr::normalize`], also returning every intermediate form.
    pub fn normalize_traced(&self, contact: &Label, rules: &RewriteRules) -> Result<(Self, Vec<RewriteStep>), KernelError> {
        const ROUNDS: usize = 32;
        let mut steps = Vec::new();
        let mut cur = self.clone();
        for round in 1..=ROUNDS {
            let kg = cur.apply_klein_gordon(rules)?;
            if kg != cur {
                steps.push(RewriteStep { round, rule: "klein-gordon", result: kg.clone() });
            }
            let next = kg.delta_support_reduce(contact);
            if next != kg {
                steps.push(RewriteStep { round, rule: "delta-support", result: next.clone() });
            }
            if next == cur {
                return Ok((next, steps));
            }
            cur = next;
        }
        Err(KernelError::NoFixpoint(ROUNDS))
    }

    /// The subexpression whose terms contain a `δ` factor.
    pub fn contact_part(&self) -> Self {
        self.filter(|k| k.kernels.iter().any(|k| k.kind == KernelKind::Dirac))
    }

    pub fn is_local(&self) -> bool {
        self.0.terms.keys().all(|k| k.kernels.iter().any(|k| k.kind == KernelKind::Dirac))
    }

    pub(crate) fn filter(&self, keep: impl Fn(&TermKey) -> bool) -> Self {
        let mut lc = LinComb::default();
        for (k, c) in &self.0.terms {
            if keep(k) {
                lc.add_canonical(k.clone(), *c);
            }
        }
        Self(lc)
    }
}

pub(crate) fn differentiate_lc(lc: &LinComb, label: &Label, index: &Index) -> LinComb {
    let mut raw = Vec::new();
    for (key, coeff) in lc.terms.iter() {
        for (pos, k) in key.kernels.iter().enumerate() {
            let sign = match (&k.a == label, &k.b == label) {
                (true, false) => 1,
                (false, true) => -1,
                _ => continue,
            };
            let mut next = key.clone();
            next.kernels[pos].derivs.push(index.clone());
            raw.push((next, coeff * int(sign)));
        }
        for (pos, f) in key.fields.iter().enumerate() {
            if &f.label == label {
                let mut next = key.clone();
                next.fields[pos].field.derivs.push(index.clone());
                raw.push((next, *coeff));
            }
        }
    }
    LinComb::from_raw(raw)
}

fn reduce_term(key: &TermKey, coeff: &Number, contact: &Label) -> LinComb {
    let deltas: Vec<usize> = key
        .kernels
        .iter()
        .enumerate()
        .filter(|(_, k)| k.kind == KernelKind::Dirac)
        .map(|(p, _)| p)
        .collect();
    if deltas.is_empty() {
        return LinComb::single(key.clone(), *coeff);
    }
    if deltas.iter().any(|&p| !key.kernels[p].involves(contact) && !key.kernels[p].is_coincident()) {
        return LinComb::default();
    }
    let partners: BTreeSet<&Label> =
        deltas.iter().filter_map(|&p| key.kernels[p].partner(contact)).collect();
    if partners.len() > 1 {
        return LinComb::default();
    }
    if deltas.len() != 1 {
        return LinComb::single(key.clone(), *coeff);
    }
    let delta = &key.kernels[deltas[0]];
    let Some(x) = delta.partner(contact).cloned() else {
        return LinComb::single(key.clone(), *coeff);
    };
    if &x == contact {
        return LinComb::single(key.clone(), *coeff);
    }
    // Rewrite the δ factor as s · ∂_y^D δ(y − x).
    let d = delta.derivs.clone();
    let s: i128 = if &delta.a == contact || d.len() % 2 == 0 { 1 } else { -1 };

    let mut rest = key.clone();
    rest.kernels.remove(deltas[0]);
    if !rest.kernels.iter().any(|k| k.involves(contact)) && !rest.fields.iter().any(|f| &f.label == contact) {
        return LinComb::single(key.clone(), *coeff);
    }
    let rest = LinComb::single(rest, *coeff * int(s));

    let mut out = LinComb::default();
    for mask in 0u32..(1 << d.len()) {
        let mut g = rest.clone();
        let mut kept = Vec::new();
        for (pos, idx) in d.iter().enumerate() {
            if mask & (1 << pos) != 0 {
                g = differentiate_lc(&g, contact, idx);
            } else {
                kept.push(idx.clone());
            }
        }
        let sign = if mask.count_ones() % 2 == 0 { 1 } else { -1 };
        let delta = Kernel::new(KernelKind::Dirac, contact.clone(), x.clone(), kept);
        let delta_lc = LinComb::single(TermKey { kernels: vec![delta], ..Default::default() }, int(sign));
        let moved = LinComb::from_raw(g.terms.iter().map(|(k, c)| (k.relabel(contact, &x), *c)));
        out.add_assign(&moved.multiply(&delta_lc));
    }
    out
}

impl fmt::Display for DistExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.render())
    }
}

impl Serialize for DistExpr {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}
