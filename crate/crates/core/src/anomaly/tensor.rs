//! Constant Lorentz-invariant tensors built from `g^{μν}` and `ε^{αβγδ}`.
//!
//! Structures are kept in abstract-index form for reporting. Linear
//! independence and symmetry are decided on explicit components in d = 4
//! with exact arithmetic.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use itertools::Itertools;
use num_integer::Integer;
use serde::Serialize;

use crate::coeff::Rational;
use crate::linalg;
use crate::symbols::Index;

const DIM: usize = 4;

/// A product of metrics and at most one Levi-Civita symbol.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct TensorStructure {
    pub metric_pairs: Vec<(Index, Index)>,
    pub epsilon_blocks: Vec<[Index; 4]>,
    pub free_indices: BTreeSet<Index>,
}

impl TensorStructure {
    pub fn metric(a: &Index, b: &Index) -> Self {
        Self::from_parts(vec![(a.clone(), b.clone())], Vec::new()).1
    }

    /// Builds a structure in canonical order and returns the sign picked up
    /// by sorting ε blocks.
    pub fn from_parts(pairs: Vec<(Index, Index)>, blocks: Vec<[Index; 4]>) -> (i64, Self) {
        let mut sign = 1;
        let mut metric_pairs: Vec<(Index, Index)> =
            pairs.into_iter().map(|(a, b)| if a <= b { (a, b) } else { (b, a) }).collect();
        metric_pairs.sort();
        let mut epsilon_blocks: Vec<[Index; 4]> = blocks
            .into_iter()
            .map(|mut b| {
                sign *= permutation_sign_sorting(&mut b);
                b
            })
            .collect();
        epsilon_blocks.sort();
        let free_indices = metric_pairs
            .iter()
            .flat_map(|(a, b)| [a.clone(), b.clone()])
            .chain(epsilon_blocks.iter().flatten().cloned())
            .collect();
        (sign, Self { metric_pairs, epsilon_blocks, free_indices })
    }

    pub fn has_epsilon(&self) -> bool {
        !self.epsilon_blocks.is_empty()
    }

    /// Component for the given index values, with `g = diag(+1,−1,−1,−1)`
    /// and `ε^{0123} = +1`.
    pub fn component(&self, values: &BTreeMap<Index, usize>) -> i64 {
        let mut out = 1;
        for (a, b) in &self.metric_pairs {
            let (va, vb) = (values[a], values[b]);
            if va != vb {
                return 0;
            }
            if va != 0 {
                out = -out;
            }
        }
        for block in &self.epsilon_blocks {
            let mut vals: Vec<usize> = block.iter().map(|i| values[i]).collect();
            if !vals.iter().all_unique() {
                return 0;
            }
            out *= permutation_sign_sorting(&mut vals);
        }
        out
    }

    fn relabel(&self, map: &BTreeMap<Index, Index>) -> (i64, Self) {
        let sub = |i: &Index| map.get(i).unwrap_or(i).clone();
        Self::from_parts(
            self.metric_pairs.iter().map(|(a, b)| (sub(a), sub(b))).collect(),
            self.epsilon_blocks.iter().map(|b| b.clone().map(|i| sub(&i))).collect(),
        )
    }
}

impl fmt::Display for TensorStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .metric_pairs
            .iter()
            .map(|(a, b)| format!("g[{a},{b}]"))
            .chain(self.epsilon_blocks.iter().map(|b| format!("eps[{}]", b.iter().join(","))))
            .collect();
        if parts.is_empty() {
            f.write_str("1")
        } else {
            f.write_str(&parts.join("*"))
        }
    }
}

/// Sorts `v` in place and returns the sign of the sorting permutation.
fn permutation_sign_sorting<T: Ord>(v: &mut [T]) -> i64 {
    let mut sign = 1;
    for i in 0..v.len() {
        for j in 0..v.len() - 1 - i {
            if v[j] > v[j + 1] {
                v.swap(j, j + 1);
                sign = -sign;
            }
        }
    }
    sign
}

/// Integer combination of structures, like terms collected.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize)]
pub struct InvariantTensor {
    pub terms: Vec<(i64, TensorStructure)>,
}

impl InvariantTensor {
    pub fn single(s: TensorStructure) -> Self {
        Self { terms: vec![(1, s)] }
    }

    fn from_map(map: BTreeMap<TensorStructure, i64>) -> Self {
        let mut terms: Vec<(i64, TensorStructure)> =
            map.into_iter().filter(|(_, c)| *c != 0).map(|(s, c)| (c, s)).collect();
        let g = terms.iter().fold(0i64, |g, (c, _)| g.gcd(c));
        if g > 1 {
            for (c, _) in &mut terms {
                *c /= g;
            }
        }
        Self { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn has_epsilon(&self) -> bool {
        self.terms.iter().any(|(_, s)| s.has_epsilon())
    }

    /// Components over all `4^r` assignments of `indices`, in lexicographic order.
    pub fn components(&self, indices: &[Index]) -> Vec<Rational> {
        (0..indices.len())
            .map(|_| 0..DIM)
            .multi_cartesian_product()
            .map(|vals| {
                let values: BTreeMap<Index, usize> = indices.iter().cloned().zip(vals).collect();
                let total: i64 = self.terms.iter().map(|(c, s)| c * s.component(&values)).sum();
                Rational::from_integer(total as i128)
            })
            .collect()
    }

    /// Sum over the images of `self` under a set of index permutations.
    fn symmetrize(&self, indices: &[Index], group: &[Vec<usize>]) -> Self {
        let mut acc: BTreeMap<TensorStructure, i64> = BTreeMap::new();
        for perm in group {
            let map: BTreeMap<Index, Index> =
                indices.iter().cloned().zip(perm.iter().map(|&p| indices[p].clone())).collect();
            for (c, s) in &self.terms {
                let (sign, t) = s.relabel(&map);
                *acc.entry(t).or_insert(0) += c * sign;
            }
        }
        Self::from_map(acc)
    }

    /// Whether every permutation of `group` leaves the components unchanged.
    pub fn is_invariant(&self, indices: &[Index], group: &[Vec<usize>]) -> bool {
        let base = self.components(indices);
        group.iter().all(|perm| {
            let map: BTreeMap<Index, Index> =
                indices.iter().cloned().zip(perm.iter().map(|&p| indices[p].clone())).collect();
            let mut acc = BTreeMap::new();
            for (c, s) in &self.terms {
                let (sign, t) = s.relabel(&map);
                *acc.entry(t).or_insert(0) += c * sign;
            }
            Self { terms: acc.into_iter().map(|(s, c)| (c, s)).collect() }.components(indices) == base
        })
    }
}

impl fmt::Display for InvariantTensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self.terms.iter().map(|(c, s)| match c {
            1 => s.to_string(),
            -1 => format!("-{s}"),
            c => format!("{c}*{s}"),
        });
        f.write_str(&crate::field::fmt_sum(terms))
    }
}

/// A permutation group on index positions, given by generators.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IndexSymmetry {
    pub generators: Vec<Vec<usize>>,
}

impl IndexSymmetry {
    pub fn none() -> Self {
        Self { generators: Vec::new() }
    }

    /// Full symmetric group on all `rank` positions.
    pub fn total(rank: usize) -> Self {
        Self::symmetric_in(rank, &(0..rank).collect::<Vec<_>>())
    }

    /// Symmetric group acting on the listed positions, identity elsewhere.
    pub fn symmetric_in(rank: usize, positions: &[usize]) -> Self {
        let generators = positions
            .windows(2)
            .map(|w| {
                let mut p: Vec<usize> = (0..rank).collect();
                p.swap(w[0], w[1]);
                p
            })
            .collect();
        Self { generators }
    }

    /// All group elements, identity first.
    pub fn elements(&self, rank: usize) -> Vec<Vec<usize>> {
        let id: Vec<usize> = (0..rank).collect();
        let mut seen: BTreeSet<Vec<usize>> = BTreeSet::from([id.clone()]);
        let mut out = vec![id];
        let mut k = 0;
        while k < out.len() {
            let current = out[k].clone();
            for g in &self.generators {
                let next: Vec<usize> = g.iter().map(|&i| current[i]).collect();
                if seen.insert(next.clone()) {
                    out.push(next);
                }
            }
            k += 1;
        }
        out
    }
}

/// Result of enumerating invariant tensors of a given rank and symmetry.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TensorBasis {
    pub indices: Vec<Index>,
    pub basis: Vec<InvariantTensor>,
    /// Candidates whose symmetrization vanishes identically.
    pub rejected: Vec<TensorStructure>,
    /// Rank of the component matrix of `basis`, computed in d = 4.
    pub component_rank: usize,
}

impl TensorBasis {
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }
}

/// `mu`, then `nu` for rank 2 or `nu1, nu2, …` for higher ranks.
pub fn default_indices(rank: usize) -> Vec<Index> {
    match rank {
        0 => Vec::new(),
        1 => vec![Index::new("mu")],
        2 => vec![Index::new("mu"), Index::new("nu")],
        r => std::iter::once(Index::new("mu")).chain((1..r).map(|k| Index::new(format!("nu{k}")))).collect(),
    }
}

fn matchings(items: &[usize]) -> Vec<Vec<(usize, usize)>> {
    match items {
        [] => vec![Vec::new()],
        [first, rest @ ..] => {
            let mut out = Vec::new();
            for (k, &partner) in rest.iter().enumerate() {
                let remaining: Vec<usize> =
                    rest.iter().enumerate().filter(|(j, _)| *j != k).map(|(_, &x)| x).collect();
                for mut m in matchings(&remaining) {
                    m.insert(0, (*first, partner));
                    out.push(m);
                }
            }
            out
        }
    }
}

/// Products of metrics, and of one ε with metrics when `allow_epsilon`, on
/// `rank` indices. In d = 4 a product of two ε's reduces to metrics, so
/// no candidate carries more than one.
pub fn candidate_structures(indices: &[Index], allow_epsilon: bool) -> Vec<TensorStructure> {
    let rank = indices.len();
    let positions: Vec<usize> = (0..rank).collect();
    let mut out = Vec::new();
    if rank % 2 == 0 {
        for m in matchings(&positions) {
            let pairs = m.iter().map(|&(a, b)| (indices[a].clone(), indices[b].clone())).collect();
            out.push(TensorStructure::from_parts(pairs, Vec::new()).1);
        }
        if allow_epsilon && rank >= 4 {
            for block in positions.iter().copied().combinations(4) {
                let rest: Vec<usize> = positions.iter().copied().filter(|p| !block.contains(p)).collect();
                let eps = [0, 1, 2, 3].map(|k| indices[block[k]].clone());
                for m in matchings(&rest) {
                    let pairs = m.iter().map(|&(a, b)| (indices[a].clone(), indices[b].clone())).collect();
                    out.push(TensorStructure::from_parts(pairs, vec![eps.clone()]).1);
                }
            }
        }
    }
    out
}

/// Spanning set of constant invariant tensors of the given rank that are
/// invariant under `symmetry`, reduced to a basis by exact component rank.
/// Odd rank yields an empty basis.
pub fn invariant_tensor_basis(rank: usize, symmetry: &IndexSymmetry, allow_epsilon: bool) -> TensorBasis {
    let indices = default_indices(rank);
    let group = symmetry.elements(rank);
    let mut basis = Vec::new();
    let mut rejected = Vec::new();
    let mut rows: Vec<Vec<Rational>> = Vec::new();
    for candidate in candidate_structures(&indices, allow_epsilon) {
        let sym = InvariantTensor::single(candidate.clone()).symmetrize(&indices, &group);
        if sym.is_zero() {
            rejected.push(candidate);
            continue;
        }
        let comps = sym.components(&indices);
        rows.push(comps);
        if linalg::rank(&rows) > basis.len() {
            basis.push(sym);
        } else {
            rows.pop();
        }
    }
    let component_rank = linalg::rank(&rows);
    TensorBasis { indices, basis, rejected, component_rank }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metric_components() {
        let g = TensorStructure::metric(&Index::new("mu"), &Index::new("nu"));
        let idx = default_indices(2);
        let comps = InvariantTensor::single(g).components(&idx);
        assert_eq!(comps.iter().filter(|c| **c != Rational::from_integer(0)).count(), 4);
        assert_eq!(comps[0], Rational::from_integer(1));
        assert_eq!(comps[5], Rational::from_integer(-1));
    }

    #[test]
    fn epsilon_is_antisymmetric() {
        let idx = default_indices(4);
        let (s, e) = TensorStructure::from_parts(Vec::new(), vec![[1, 0, 2, 3].map(|k| idx[k].clone())]);
        assert_eq!(s, -1);
        let values: BTreeMap<Index, usize> = idx.iter().cloned().zip([0, 1, 2, 3]).collect();
        assert_eq!(e.component(&values), 1);
    }

    #[test]
    fn group_closure_sizes() {
        assert_eq!(IndexSymmetry::none().elements(3).len(), 1);
        assert_eq!(IndexSymmetry::total(4).elements(4).len(), 24);
        assert_eq!(IndexSymmetry::symmetric_in(4, &[1, 2, 3]).elements(4).len(), 6);
    }

    #[test]
    fn matchings_count() {
        assert_eq!(matchings(&[0, 1, 2, 3]).len(), 3);
        assert_eq!(matchings(&[0, 1, 2, 3, 4, 5]).len(), 15);
    }

    #[test]
    fn rendering() {
        let b = invariant_tensor_basis(4, &IndexSymmetry::total(4), false);
        assert_eq!(b.basis[0].to_string(), "g[mu,nu1]*g[nu2,nu3] + g[mu,nu2]*g[nu1,nu3] + g[mu,nu3]*g[nu1,nu2]");
    }
}
