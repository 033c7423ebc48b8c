//! Local polynomials in the basic fields φ, φ* and their derivatives.
//!
//! Monomials are stored as sorted factor lists; a factor is a basic field
//! symbol attached to a spacetime label. Ordering is label-major, then
//! species (φ before φ*), then derivative indices, which makes structural
//! equality of canonical monomials decidable.

use std::collections::BTreeMap;
use std::fmt;

use itertools::Itertools;
use num_traits::Zero;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::coeff::{format_number, int, is_unit_modulus, is_zero, rat, Number, Rational};
use crate::symbols::{fmt_indices, Index, Label};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("factor `{0}` has derivative order above one; the charge operators act on P^(1) only")]
    NotFirstOrder(String),
    #[error("polynomial is not homogeneous in mass dimension: {0}")]
    Inhomogeneous(String),
    #[error("polynomial `{0}` is not localized at a single point")]
    NotLocal(String),
    #[error("charge conjugation phase must have unit modulus, got {0}")]
    PhaseNotUnit(String),
    #[error("spacetime dimension must be at least 3, got {0}")]
    DimensionTooSmall(u32),
    #[error("`{0}` is not an eigenvector of {1}")]
    NotEigenvector(String, &'static str),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Species {
    #[serde(rename = "phi")]
    Phi,
    #[serde(rename = "phis")]
    PhiStar,
}

impl Species {
    pub fn conjugate(self) -> Self {
        match self {
            Species::Phi => Species::PhiStar,
            Species::PhiStar => Species::Phi,
        }
    }

    /// +1 for φ, −1 for φ*.
    pub fn charge(self) -> i64 {
        match self {
            Species::Phi => 1,
            Species::PhiStar => -1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Species::Phi => "phi",
            Species::PhiStar => "phis",
        }
    }
}

/// `∂^{μ₁…μₖ} φ` or `∂^{μ₁…μₖ} φ*`; derivative indices are kept sorted.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BasicField {
    pub species: Species,
    pub derivs: Vec<Index>,
}

impl BasicField {
    pub fn new(species: Species, mut derivs: Vec<Index>) -> Self {
        derivs.sort();
        Self { species, derivs }
    }

    pub fn plain(species: Species) -> Self {
        Self { species, derivs: Vec::new() }
    }

    pub fn order(&self) -> usize {
        self.derivs.len()
    }
}

impl fmt::Display for BasicField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.derivs.is_empty() {
            write!(f, "d{}", fmt_indices(&self.derivs))?;
        }
        f.write_str(self.species.name())
    }
}

/// A basic field evaluated at a spacetime label.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FieldAt {
    pub label: Label,
    pub field: BasicField,
}

impl FieldAt {
    pub fn new(label: Label, field: BasicField) -> Self {
        Self { label, field }
    }
}

/// Renders a sorted factor list, collecting repeated factors into powers:
/// `phi^2(x1)*d[mu]phis(x1)*phi(x2)`.
pub(crate) fn fmt_factors(factors: &[FieldAt]) -> String {
    factors
        .iter()
        .dedup_with_count()
        .map(|(n, fa)| {
            if n == 1 {
                format!("{}({})", fa.field, fa.label)
            } else {
                format!("{}^{}({})", fa.field, n, fa.label)
            }
        })
        .join("*")
}

/// Joins `coefficient` and a list of already-rendered factors as a product.
pub(crate) fn fmt_product(coeff: &Number, factors: &[String]) -> String {
    if factors.is_empty() {
        return format_number(coeff);
    }
    let body = factors.join(" * ");
    if *coeff == int(1) {
        body
    } else if *coeff == int(-1) {
        format!("-{body}")
    } else {
        format!("{} * {body}", format_number(coeff))
    }
}

/// Renders a signed sum of rendered terms.
pub(crate) fn fmt_sum<I: IntoIterator<Item = String>>(terms: I) -> String {
    let mut out = String::new();
    for (k, t) in terms.into_iter().enumerate() {
        if k == 0 {
            out.push_str(&t);
        } else if let Some(rest) = t.strip_prefix('-') {
            out.push_str(" - ");
            out.push_str(rest);
        } else {
            out.push_str(" + ");
            out.push_str(&t);
        }
    }
    if out.is_empty() {
        "0".into()
    } else {
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FieldMonomial {
    pub coeff: Number,
    pub factors: Vec<FieldAt>,
}

impl FieldMonomial {
    pub fn new(coeff: Number, mut factors: Vec<FieldAt>) -> Self {
        for f in &mut factors {
            f.field.derivs.sort();
        }
        factors.sort();
        Self { coeff, factors }
    }

    pub fn constant(coeff: Number) -> Self {
        Self { coeff, factors: Vec::new() }
    }

    /// The common label of all factors; `None` for constants and for
    /// products spread over several points.
    pub fn point(&self) -> Option<&Label> {
        let first = &self.factors.first()?.label;
        self.factors.iter().all(|f| &f.label == first).then_some(first)
    }

    pub fn is_constant(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.factors.len()
    }

    pub fn in_p1(&self) -> bool {
        self.factors.iter().all(|f| f.field.order() <= 1)
    }

    pub fn multiply(&self, other: &FieldMonomial) -> FieldMonomial {
        let factors = self.factors.iter().chain(&other.factors).cloned().collect();
        FieldMonomial::new(self.coeff * other.coeff, factors)
    }

    pub fn unit(&self) -> FieldMonomial {
        FieldMonomial { coeff: int(1), factors: self.factors.clone() }
    }
}

impl fmt::Display for FieldMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let body = if self.factors.is_empty() { Vec::new() } else { vec![fmt_factors(&self.factors)] };
        f.write_str(&fmt_product(&self.coeff, &body))
    }
}

/// Like-term-collected sum of monomials.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct FieldPolynomial {
    terms: BTreeMap<Vec<FieldAt>, Number>,
}

impl FieldPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Number) -> Self {
        Self::from_monomial(FieldMonomial::constant(c))
    }

    pub fn one() -> Self {
        Self::constant(int(1))
    }

    pub fn from_monomial(m: FieldMonomial) -> Self {
        let mut p = Self::zero();
        p.add_monomial(m);
        p
    }

    pub fn from_monomials<I: IntoIterator<Item = FieldMonomial>>(ms: I) -> Self {
        let mut p = Self::zero();
        for m in ms {
            p.add_monomial(m);
        }
        p
    }

    pub fn basic(label: &Label, species: Species, derivs: Vec<Index>) -> Self {
        Self::from_monomial(FieldMonomial::new(
            int(1),
            vec![FieldAt::new(label.clone(), BasicField::new(species, derivs))],
        ))
    }

    pub fn phi(label: &Label) -> Self {
        Self::basic(label, Species::Phi, Vec::new())
    }

    pub fn phi_star(label: &Label) -> Self {
        Self::basic(label, Species::PhiStar, Vec::new())
    }

    /// `(φ)^a (φ*)^b` at `label`.
    pub fn phi_power(label: &Label, a: usize, b: usize) -> Self {
        let mut factors = vec![FieldAt::new(label.clone(), BasicField::plain(Species::Phi)); a];
        factors.extend(vec![FieldAt::new(label.clone(), BasicField::plain(Species::PhiStar)); b]);
        Self::from_monomial(FieldMonomial::new(int(1), factors))
    }

    /// The quartic interaction `L = (φ*φ)²`.
    pub fn lagrangian(label: &Label) -> Self {
        Self::phi_power(label, 2, 2)
    }

    /// The U(1) Noether current `j^μ = i(φ ∂^μφ* − φ* ∂^μφ)`.
    pub fn current(index: &Index, label: &Label) -> Self {
        let phi = FieldAt::new(label.clone(), BasicField::plain(Species::Phi));
        let phis = FieldAt::new(label.clone(), BasicField::plain(Species::PhiStar));
        let dphi = FieldAt::new(label.clone(), BasicField::new(Species::Phi, vec![index.clone()]));
        let dphis = FieldAt::new(label.clone(), BasicField::new(Species::PhiStar, vec![index.clone()]));
        Self::from_monomials([
            FieldMonomial::new(crate::coeff::imag(1), vec![phi, dphis]),
            FieldMonomial::new(crate::coeff::imag(-1), vec![phis, dphi]),
        ])
    }

    /// The symmetry generator `Q = iφ`.
    pub fn charge_generator(label: &Label) -> Self {
        Self::phi(label).scale(&crate::coeff::imag(1))
    }

    pub fn add_monomial(&mut self, m: FieldMonomial) {
        if is_zero(&m.coeff) {
            return;
        }
        let FieldMonomial { coeff, factors } = FieldMonomial::new(m.coeff, m.factors);
        let entry = self.terms.entry(factors).or_insert_with(Number::zero);
        *entry += coeff;
        if is_zero(entry) {
            let key = self.terms.iter().find(|(_, v)| is_zero(v)).map(|(k, _)| k.clone());
            if let Some(k) = key {
                self.terms.remove(&k);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn monomials(&self) -> impl Iterator<Item = FieldMonomial> + '_ {
        self.terms.iter().map(|(f, c)| FieldMonomial { coeff: *c, factors: f.clone() })
    }

    /// The single monomial of a one-term polynomial.
    pub fn as_monomial(&self) -> Option<FieldMonomial> {
        (self.terms.len() == 1).then(|| self.monomials().next().unwrap())
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for m in other.monomials() {
            out.add_monomial(m);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&int(-1)))
    }

    pub fn scale(&self, c: &Number) -> Self {
        Self::from_monomials(self.monomials().map(|m| FieldMonomial { coeff: m.coeff * c, ..m }))
    }

    /// Pointwise product; factors at a common label merge into one local monomial.
    pub fn multiply(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for a in self.monomials() {
            for b in other.monomials() {
                out.add_monomial(a.multiply(&b));
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::one(), |acc, _| acc.multiply(self))
    }

    /// Common label of every non-constant term, if there is exactly one.
    pub fn point(&self) -> Option<Label> {
        let mut labels = self.terms.keys().flatten().map(|f| &f.label).dedup();
        let first = labels.next()?.clone();
        let all_same = self.terms.keys().flatten().all(|f| f.label == first);
        all_same.then_some(first)
    }

    /// Localized at one point, or constant.
    pub fn is_local(&self) -> bool {
        self.point().is_some() || self.terms.keys().all(|k| k.is_empty())
    }

    pub fn in_p1(&self) -> bool {
        self.monomials().all(|m| m.in_p1())
    }

    /// Moves every factor to `label`.
    pub fn at(&self, label: &Label) -> Self {
        Self::from_monomials(self.monomials().map(|m| {
            let factors = m.factors.into_iter().map(|f| FieldAt::new(label.clone(), f.field)).collect();
            FieldMonomial::new(m.coeff, factors)
        }))
    }

    pub fn indices(&self) -> Vec<Index> {
        self.terms
            .keys()
            .flatten()
            .flat_map(|f| f.field.derivs.iter().cloned())
            .sorted()
            .dedup()
            .collect()
    }

    fn require_p1(&self) -> Result<(), FieldError> {
        for f in self.terms.keys().flatten() {
            if f.field.order() > 1 {
                return Err(FieldError::NotFirstOrder(format!("{}({})", f.field, f.label)));
            }
        }
        Ok(())
    }
}

impl fmt::Display for FieldPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&fmt_sum(self.monomials().map(|m| m.to_string())))
    }
}

impl Serialize for FieldPolynomial {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl Serialize for FieldMonomial {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Pointwise product of field polynomials.
pub fn multiply(a: &FieldPolynomial, b: &FieldPolynomial) -> FieldPolynomial {
    a.multiply(b)
}

/// `a − b`: number of φ-type factors minus number of φ*-type factors.
pub fn charge_number(m: &FieldMonomial) -> i64 {
    m.factors.iter().map(|f| f.field.species.charge()).sum()
}

/// Charge number of a polynomial whose terms all share one value.
pub fn polynomial_charge(p: &FieldPolynomial) -> Result<i64, FieldError> {
    let charges: Vec<i64> = p.monomials().map(|m| charge_number(&m)).dedup().collect();
    match charges.as_slice() {
        [] => Ok(0),
        [c] => Ok(*c),
        _ => Err(FieldError::NotEigenvector(p.to_string(), "the charge number operator")),
    }
}

/// `dim ∂^a φ = (d−2)/2 + |a|`, summed over factors.
pub fn mass_dimension(m: &FieldMonomial, d: u32) -> Result<Rational, FieldError> {
    if d < 3 {
        return Err(FieldError::DimensionTooSmall(d));
    }
    let base = rat(d as i128 - 2, 2);
    Ok(m.factors
        .iter()
        .map(|f| base + Rational::from_integer(f.field.order() as i128))
        .sum())
}

/// Mass dimension of a homogeneous polynomial; constants and zero have dimension 0.
pub fn polynomial_dimension(p: &FieldPolynomial, d: u32) -> Result<Rational, FieldError> {
    let dims: Vec<Rational> = p
        .monomials()
        .map(|m| mass_dimension(&m, d))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .dedup()
        .collect();
    match dims.as_slice() {
        [] => {
            if d < 3 {
                Err(FieldError::DimensionTooSmall(d))
            } else {
                Ok(Rational::zero())
            }
        }
        [x] => Ok(*x),
        _ => Err(FieldError::Inhomogeneous(p.to_string())),
    }
}

/// Charge number operator θ on P^(1).
pub fn theta(p: &FieldPolynomial) -> Result<FieldPolynomial, FieldError> {
    p.require_p1()?;
    Ok(FieldPolynomial::from_monomials(p.monomials().map(|m| {
        let q = charge_number(&m);
        FieldMonomial { coeff: m.coeff * int(q as i128), ..m }
    })))
}

/// `Σ_ρ δ_μ^ρ · parts[ρ]`: a polynomial carrying one free index `free`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexedPolynomial {
    pub free: Index,
    pub parts: BTreeMap<Index, FieldPolynomial>,
}

impl IndexedPolynomial {
    pub fn is_zero(&self) -> bool {
        self.parts.values().all(FieldPolynomial::is_zero)
    }
}

impl fmt::Display for IndexedPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self
            .parts
            .iter()
            .filter(|(_, p)| !p.is_zero())
            .map(|(rho, p)| format!("delta[{},{}] * ({})", self.free, rho, p));
        f.write_str(&fmt_sum(terms))
    }
}

/// `θ_μ = φ ∂/∂(∂^μφ) − φ* ∂/∂(∂^μφ*)`, acting factor by factor (Leibniz).
pub fn theta_mu(p: &FieldPolynomial, mu: &Index) -> Result<IndexedPolynomial, FieldError> {
    p.require_p1()?;
    let mut parts: BTreeMap<Index, FieldPolynomial> = BTreeMap::new();
    for m in p.monomials() {
        for (k, fa) in m.factors.iter().enumerate() {
            let Some(rho) = fa.field.derivs.first() else { continue };
            let mut factors = m.factors.clone();
            factors[k] = FieldAt::new(fa.label.clone(), BasicField::plain(fa.field.species));
            let coeff = m.coeff * int(fa.field.species.charge() as i128);
            parts
                .entry(rho.clone())
                .or_default()
                .add_monomial(FieldMonomial::new(coeff, factors));
        }
    }
    parts.retain(|_, p| !p.is_zero());
    Ok(IndexedPolynomial { free: mu.clone(), parts })
}

/// β_C: φ ↦ η φ*, φ* ↦ η* φ, extended multiplicatively.
pub fn charge_conjugate(p: &FieldPolynomial, eta: &Number) -> Result<FieldPolynomial, FieldError> {
    if !is_unit_modulus(eta) {
        return Err(FieldError::PhaseNotUnit(format_number(eta)));
    }
    Ok(FieldPolynomial::from_monomials(p.monomials().map(|m| conjugate_monomial(&m, eta))))
}

pub(crate) fn conjugate_factors(factors: &[FieldAt], eta: &Number) -> (Number, Vec<FieldAt>) {
    let eta_bar = eta.conj();
    let mut coeff = int(1);
    let mut out = Vec::with_capacity(factors.len());
    for f in factors {
        coeff *= match f.field.species {
            Species::Phi => *eta,
            Species::PhiStar => eta_bar,
        };
        out.push(FieldAt::new(
            f.label.clone(),
            BasicField::new(f.field.species.conjugate(), f.field.derivs.clone()),
        ));
    }
    out.sort();
    (coeff, out)
}

fn conjugate_monomial(m: &FieldMonomial, eta: &Number) -> FieldMonomial {
    let (phase, factors) = conjugate_factors(&m.factors, eta);
    FieldMonomial::new(m.coeff * phase, factors)
}

/// ±1 when `β_C p = ±p`, `None` otherwise (zero counts as even).
pub fn charge_parity(p: &FieldPolynomial, eta: &Number) -> Result<Option<i64>, FieldError> {
    let c = charge_conjugate(p, eta)?;
    if c == *p {
        Ok(Some(1))
    } else if c == p.scale(&int(-1)) {
        Ok(Some(-1))
    } else {
        Ok(None)
    }
}

/// One split of a monomial into a contracted part and a spectator part.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Submonomial {
    /// Contracted factors, unit coefficient.
    pub underline: FieldMonomial,
    /// Spectator factors, carrying the original coefficient.
    pub overline: FieldMonomial,
    /// Number of ways to pick `underline` out of the factor multiset.
    pub factor: u64,
}

fn binomial(n: usize, k: usize) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i as u64 + 1))
}

/// All splits of the factor multiset of `m`; identical factors are grouped,
/// so each split appears once with its binomial multiplicity.
pub fn submonomials(m: &FieldMonomial) -> Vec<Submonomial> {
    let groups: Vec<(usize, FieldAt)> =
        m.factors.iter().dedup_with_count().map(|(n, f)| (n, f.clone())).collect();
    if groups.is_empty() {
        return vec![Submonomial {
            underline: FieldMonomial::constant(int(1)),
            overline: m.clone(),
            factor: 1,
        }];
    }
    groups
        .iter()
        .map(|(n, _)| 0..=*n)
        .multi_cartesian_product()
        .map(|picks| {
            let mut under = Vec::new();
            let mut over = Vec::new();
            let mut factor = 1u64;
            for ((n, f), k) in groups.iter().zip(&picks) {
                under.extend(std::iter::repeat_n(f.clone(), *k));
                over.extend(std::iter::repeat_n(f.clone(), n - k));
                factor *= binomial(*n, *k);
            }
            Submonomial {
                underline: FieldMonomial::new(int(1), under),
                overline: FieldMonomial::new(m.coeff, over),
                factor,
            }
        })
        .collect()
}

/// The basis of polynomials spanned by `L = (φ*φ)²`, `j^ν` and their
/// submonomials, at one point: `φ^a φ*^b` for `0 < a + b`, `a, b ≤ 2`,
/// then `∂^νφ`, `∂^νφ*`, `φ ∂^νφ*`, `∂^νφ φ*` and `j^ν`.
pub fn quartic_basis(label: &Label, nu: &Index) -> Vec<FieldPolynomial> {
    let mut out: Vec<FieldPolynomial> = (0..=2)
        .flat_map(|a| (0..=2).map(move |b| (a, b)))
        .filter(|&(a, b)| a + b > 0)
        .map(|(a, b)| FieldPolynomial::phi_power(label, a, b))
        .collect();
    let d = |s: Species| FieldPolynomial::basic(label, s, vec![nu.clone()]);
    out.push(d(Species::Phi));
    out.push(d(Species::PhiStar));
    out.push(FieldPolynomial::phi(label).multiply(&d(Species::PhiStar)));
    out.push(d(Species::Phi).multiply(&FieldPolynomial::phi_star(label)));
    out.push(FieldPolynomial::current(nu, label));
    out
}

/// `true` when `p` equals `j^ν` at its own label for some index `ν`.
pub fn as_current(p: &FieldPolynomial) -> Option<Index> {
    let label = p.point()?;
    let idx = p.indices();
    match idx.as_slice() {
        [nu] if *p == FieldPolynomial::current(nu, &label) => Some(nu.clone()),
        _ => None,
    }
}
