//! Terms `c · ħ^k (m²)^j · Π kernels · Π fields` and their canonical form.

use std::collections::{BTreeMap, BTreeSet};

use itertools::Itertools;

use crate::coeff::{int, is_zero, Number};
use crate::field::{fmt_factors, fmt_product, fmt_sum, FieldAt};
use crate::kernel::Kernel;
use crate::symbols::{Index, Label};

/// Everything in a term except its numerical coefficient.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TermKey {
    pub hbar: u32,
    pub mass2: u32,
    pub kernels: Vec<Kernel>,
    pub fields: Vec<FieldAt>,
}

impl TermKey {
    pub fn index_counts(&self) -> BTreeMap<Index, usize> {
        let mut counts = BTreeMap::new();
        let all = self
            .kernels
            .iter()
            .flat_map(|k| k.derivs.iter())
            .chain(self.fields.iter().flat_map(|f| f.field.derivs.iter()));
        for idx in all {
            *counts.entry(idx.clone()).or_insert(0) += 1;
        }
        counts
    }

    /// Indices that occur exactly once.
    pub fn free_indices(&self) -> BTreeSet<Index> {
        self.index_counts().into_iter().filter(|(_, n)| *n == 1).map(|(i, _)| i).collect()
    }

    pub fn labels(&self) -> BTreeSet<Label> {
        self.kernels
            .iter()
            .flat_map(|k| [k.a.clone(), k.b.clone()])
            .chain(self.fields.iter().map(|f| f.label.clone()))
            .collect()
    }

    fn rename(&self, map: &BTreeMap<Index, Index>) -> TermKey {
        let sub = |v: &[Index]| -> Vec<Index> {
            v.iter().map(|i| map.get(i).unwrap_or(i).clone()).sorted().collect()
        };
        let mut kernels: Vec<Kernel> =
            self.kernels.iter().map(|k| Kernel { derivs: sub(&k.derivs), ..k.clone() }).collect();
        kernels.sort();
        let mut fields: Vec<FieldAt> = self
            .fields
            .iter()
            .map(|f| {
                let mut f = f.clone();
                f.field.derivs = sub(&f.field.derivs);
                f
            })
            .collect();
        fields.sort();
        TermKey { hbar: self.hbar, mass2: self.mass2, kernels, fields }
    }

    /// Renames summed index pairs so that the two keys of a product can be
    /// concatenated without accidental contractions.
    pub(crate) fn shift_dummies(&self, offset: usize) -> TermKey {
        let map = self
            .index_counts()
            .into_iter()
            .filter(|(i, n)| *n >= 2 && i.is_dummy())
            .map(|(i, _)| {
                let k: usize = i.as_str()[1..].parse().unwrap_or(0);
                (i, Index::dummy(k + offset))
            })
            .collect();
        self.rename(&map)
    }

    pub(crate) fn dummy_bound(&self) -> usize {
        self.index_counts()
            .keys()
            .filter(|i| i.is_dummy())
            .filter_map(|i| i.as_str()[1..].parse::<usize>().ok())
            .map(|k| k + 1)
            .max()
            .unwrap_or(0)
    }

    /// Product of two keys, with dummies of `other` moved out of the way.
    pub(crate) fn product(&self, other: &TermKey) -> TermKey {
        let other = other.shift_dummies(self.dummy_bound());
        TermKey {
            hbar: self.hbar + other.hbar,
            mass2: self.mass2 + other.mass2,
            kernels: self.kernels.iter().chain(&other.kernels).cloned().collect(),
            fields: self.fields.iter().chain(&other.fields).cloned().collect(),
        }
    }

    pub(crate) fn relabel(&self, from: &Label, to: &Label) -> TermKey {
        TermKey {
            hbar: self.hbar,
            mass2: self.mass2,
            kernels: self.kernels.iter().map(|k| k.relabel(from, to)).collect(),
            fields: self
                .fields
                .iter()
                .map(|f| {
                    let label = if &f.label == from { to.clone() } else { f.label.clone() };
                    FieldAt::new(label, f.field.clone())
                })
                .collect(),
        }
    }

    pub(crate) fn render(&self, coeff: &Number) -> String {
        let mut parts = Vec::new();
        match self.hbar {
            0 => {}
            1 => parts.push("hbar".to_string()),
            k => parts.push(format!("hbar^{k}")),
        }
        match self.mass2 {
            0 => {}
            1 => parts.push("m2".to_string()),
            k => parts.push(format!("m2^{k}")),
        }
        for (n, k) in self.kernels.iter().dedup_with_count() {
            if n == 1 {
                parts.push(k.to_string());
            } else {
                parts.push(format!("{k}^{n}"));
            }
        }
        if !self.fields.is_empty() {
            parts.push(fmt_factors(&self.fields));
        }
        fmt_product(coeff, &parts)
    }
}

const PERMUTATION_LIMIT: usize = 6;

/// Orients kernels, applies parity zeros, sorts, and renames summed indices
/// to the least choice of canonical dummy names.
pub(crate) fn canonical_term(key: TermKey, coeff: Number) -> Option<(TermKey, Number)> {
    if is_zero(&coeff) {
        return None;
    }
    let mut coeff = coeff;
    let mut kernels = Vec::with_capacity(key.kernels.len());
    for k in &key.kernels {
        let (k, sign) = k.oriented()?;
        if sign < 0 {
            coeff = -coeff;
        }
        kernels.push(k);
    }
    let fields = key
        .fields
        .into_iter()
        .map(|mut f| {
            f.field.derivs.sort();
            f
        })
        .collect();
    let key = TermKey { hbar: key.hbar, mass2: key.mass2, kernels, fields };

    let counts = key.index_counts();
    let free: BTreeSet<&Index> = counts.iter().filter(|(_, n)| **n == 1).map(|(i, _)| i).collect();
    let dummies: Vec<Index> = counts.iter().filter(|(_, n)| **n >= 2).map(|(i, _)| i.clone()).collect();
    let names: Vec<Index> = (0..)
        .map(Index::dummy)
        .filter(|n| !free.contains(n))
        .take(dummies.len())
        .collect();

    let best = if dummies.is_empty() {
        key.rename(&BTreeMap::new())
    } else if dummies.len() <= PERMUTATION_LIMIT {
        names
            .iter()
            .permutations(names.len())
            .map(|perm| {
                let map = dummies.iter().cloned().zip(perm.into_iter().cloned()).collect();
                key.rename(&map)
            })
            .min()
            .expect("at least one permutation")
    } else {
        let order: Vec<Index> = key
            .kernels
            .iter()
            .flat_map(|k| k.derivs.iter())
            .chain(key.fields.iter().flat_map(|f| f.field.derivs.iter()))
            .filter(|i| dummies.contains(i))
            .unique()
            .cloned()
            .collect();
        key.rename(&order.into_iter().zip(names).collect())
    };
    Some((best, coeff))
}

/// Like-term-collected linear combination of canonical terms.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub(crate) struct LinComb {
    pub(crate) terms: BTreeMap<TermKey, Number>,
}

impl LinComb {
    pub(crate) fn add_term(&mut self, key: TermKey, coeff: Number) {
        let Some((key, coeff)) = canonical_term(key, coeff) else { return };
        self.add_canonical(key, coeff);
    }

    pub(crate) fn add_canonical(&mut self, key: TermKey, coeff: Number) {
        use std::collections::btree_map::Entry;
        match self.terms.entry(key) {
            Entry::Vacant(v) => {
                v.insert(coeff);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += coeff;
                if is_zero(o.get()) {
                    o.remove();
                }
            }
        }
    }

    pub(crate) fn single(key: TermKey, coeff: Number) -> Self {
        let mut out = Self::default();
        out.add_term(key, coeff);
        out
    }

    pub(crate) fn add(&self, other: &Self) -> Self {
        let (mut out, small) =
            if self.terms.len() >= other.terms.len() { (self.clone(), other) } else { (other.clone(), self) };
        for (k, c) in &small.terms {
            out.add_canonical(k.clone(), *c);
        }
        out
    }

    pub(crate) fn add_assign(&mut self, other: &Self) {
        for (k, c) in &other.terms {
            self.add_canonical(k.clone(), *c);
        }
    }

    pub(crate) fn scale(&self, c: &Number) -> Self {
        if is_zero(c) {
            return Self::default();
        }
        Self { terms: self.terms.iter().map(|(k, v)| (k.clone(), v * c)).collect() }
    }

    pub(crate) fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&int(-1)))
    }

    pub(crate) fn multiply(&self, other: &Self) -> Self {
        let mut out = Self::default();
        for (ka, ca) in &self.terms {
            for (kb, cb) in &other.terms {
                out.add_term(ka.product(kb), ca * cb);
            }
        }
        out
    }

    /// Re-canonicalizes every term; used after operations that edit keys in place.
    pub(crate) fn from_raw<I: IntoIterator<Item = (TermKey, Number)>>(raw: I) -> Self {
        let mut out = Self::default();
        for (k, c) in raw {
            out.add_term(k, c);
        }
        out
    }

    pub(crate) fn render(&self) -> String {
        fmt_sum(self.terms.iter().map(|(k, c)| k.render(c)))
    }
}
