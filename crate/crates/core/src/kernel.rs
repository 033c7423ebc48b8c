//! Symbolic two-point kernels `Δ⁺`, `Δ_F`, `Δ`, `δ` with derivative decorations.

use std::fmt;

use serde::Serialize;

use crate::coeff::{imag, Number};
use crate::symbols::{fmt_indices, Index, Label};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum KernelKind {
    DeltaPlus,
    Feynman,
    Commutator,
    Dirac,
}

impl KernelKind {
    pub fn name(self) -> &'static str {
        match self {
            KernelKind::DeltaPlus => "DP",
            KernelKind::Feynman => "DF",
            KernelKind::Commutator => "D",
            KernelKind::Dirac => "delta",
        }
    }

    /// Sign picked up under `z ↦ −z`; `None` for `Δ⁺`, which has no parity.
    pub fn parity(self) -> Option<i64> {
        match self {
            KernelKind::DeltaPlus => None,
            KernelKind::Feynman | KernelKind::Dirac => Some(1),
            KernelKind::Commutator => Some(-1),
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        [Self::DeltaPlus, Self::Feynman, Self::Commutator, Self::Dirac]
            .into_iter()
            .find(|k| k.name() == name)
    }
}

/// `∂^{derivs} K(a − b)`: derivatives are taken with respect to the
/// difference argument, so a derivative at `a` appends an index and a
/// derivative at `b` appends an index together with a factor −1.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Kernel {
    pub kind: KernelKind,
    pub a: Label,
    pub b: Label,
    pub derivs: Vec<Index>,
}

impl Kernel {
    pub fn new(kind: KernelKind, a: Label, b: Label, mut derivs: Vec<Index>) -> Self {
        derivs.sort();
        Self { kind, a, b, derivs }
    }

    pub fn plain(kind: KernelKind, a: &Label, b: &Label) -> Self {
        Self::new(kind, a.clone(), b.clone(), Vec::new())
    }

    pub fn order(&self) -> usize {
        self.derivs.len()
    }

    pub fn involves(&self, label: &Label) -> bool {
        &self.a == label || &self.b == label
    }

    pub fn is_coincident(&self) -> bool {
        self.a == self.b
    }

    /// The other endpoint, when `label` is one of them.
    pub fn partner(&self, label: &Label) -> Option<&Label> {
        if &self.a == label {
            Some(&self.b)
        } else if &self.b == label {
            Some(&self.a)
        } else {
            None
        }
    }

    /// Number of index pairs contracted inside this one kernel, i.e. pending `□`s.
    pub fn box_count(&self) -> usize {
        let mut n = 0;
        let mut k = 0;
        while k + 1 < self.derivs.len() {
            if self.derivs[k] == self.derivs[k + 1] {
                n += 1;
                k += 2;
            } else {
                k += 1;
            }
        }
        n
    }

    /// Removes one contracted index pair, if any.
    pub(crate) fn take_box(&self) -> Option<Kernel> {
        let pos = self.derivs.windows(2).position(|w| w[0] == w[1])?;
        let mut derivs = self.derivs.clone();
        derivs.drain(pos..pos + 2);
        Some(Kernel { derivs, ..self.clone() })
    }

    /// Canonical orientation and sign. `None` when the kernel vanishes by
    /// parity at coincident arguments.
    pub fn oriented(&self) -> Option<(Kernel, i64)> {
        let mut k = self.clone();
        k.derivs.sort();
        let Some(parity) = k.kind.parity() else {
            return Some((k, 1));
        };
        let odd = k.derivs.len() % 2 == 1;
        if k.a == k.b {
            let vanishes = (parity == 1 && odd) || (parity == -1 && !odd);
            return (!vanishes).then_some((k, 1));
        }
        if k.a > k.b {
            std::mem::swap(&mut k.a, &mut k.b);
            let sign = if odd { -parity } else { parity };
            return Some((k, sign));
        }
        Some((k, 1))
    }

    /// Same kernel with argument reversed, without any sign bookkeeping.
    #[cfg(test)]
    pub(crate) fn reversed(&self) -> Kernel {
        Kernel { a: self.b.clone(), b: self.a.clone(), ..self.clone() }
    }

    pub(crate) fn relabel(&self, from: &Label, to: &Label) -> Kernel {
        let swap = |l: &Label| if l == from { to.clone() } else { l.clone() };
        Kernel { a: swap(&self.a), b: swap(&self.b), ..self.clone() }
    }
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.derivs.is_empty() {
            write!(f, "d{}", fmt_indices(&self.derivs))?;
        }
        write!(f, "{}({}-{})", self.kind.name(), self.a, self.b)
    }
}

/// Normalizations used when resolving `□` on a kernel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RewriteRules {
    /// `c` in `(□ + m²)Δ_F = c·δ`.
    pub feynman_contact: Number,
}

impl Default for RewriteRules {
    fn default() -> Self {
        Self { feynman_contact: imag(-1) }
    }
}

/// Scaling degree of `∂^a δ` on `ℝ^k`: `k + |a|`.
pub fn scaling_degree_delta(order: u32, k: u32) -> Option<u32> {
    (k >= 1).then_some(k + order)
}

/// Scaling degree of a nonzero constant distribution.
pub fn scaling_degree_constant() -> u32 {
    0
}
