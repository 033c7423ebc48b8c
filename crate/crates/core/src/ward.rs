//! The U(1) Master Ward Identity at the level of vacuum expectation values.
//!
//! For local arguments `P₁(x₁),…,Pₙ(xₙ)` and a current insertion at `y`,
//!
//! ```text
//! ∂_μ^y t(P₁,…,Pₙ, j^μ(y))
//!   = ħ Σ_l δ(y−x_l) t(…, θP_l, …) − ħ Σ_l ∂_μ^y [δ(y−x_l) t(…, θ^μ P_l, …)]
//! ```
//!
//! Both sides are brought to the normal form in which `y` only appears in
//! δ factors, and their difference is the residual.

use std::collections::BTreeSet;

use num_integer::Integer;
use num_traits::{Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::coeff::{int, Number, ScalarCoeff};
use crate::contract::{diagrams, vev_tproduct, Diagram};
use crate::dist::{DistExpr, KernelError};
use crate::field::{charge_parity, polynomial_charge, theta, theta_mu, FieldError, FieldPolynomial};
use crate::kernel::{Kernel, KernelKind, RewriteRules};
use crate::symbols::{Index, Label};
use crate::wick::{argument_labels, WickError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WardError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Wick(#[from] WickError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("argument `{0}` is not localized at a point")]
    Unlocalized(String),
    #[error("current label `{0}` coincides with an argument label")]
    ContactLabelInUse(Label),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Verified,
    AnomalyCandidate,
}

/// Whether a structural argument forces a vacuum expectation value to vanish.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Exclusion {
    ForcedZero,
    NotApplicable,
}

/// Which operator produced a contact term.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ContactKind {
    /// `ħ c δ(y − x_l) t(…)` from θ.
    Charge,
    /// `ħ c ∂_y^ρ δ(y − x_l) t(…)` from θ_μ, with the derivative index ρ.
    Divergence { index: Index },
}

/// One contact term of the right-hand side, split as
/// `prefactor · [∂_y^ρ] δ(y − label) · t(args)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ContactTerm {
    pub label: Label,
    #[serde(flatten)]
    pub kind: ContactKind,
    pub prefactor: ScalarCoeff,
    pub args: Vec<FieldPolynomial>,
    pub t: DistExpr,
    /// Integer weights of the diagrams of `t` times the prefactor value,
    /// in units of the diagram normalization of the left-hand side.
    pub normalized_weights: Vec<ScalarCoeff>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MwiReport {
    pub args: Vec<FieldPolynomial>,
    pub current_label: Label,
    pub current_index: Index,
    pub lhs: DistExpr,
    pub rhs: DistExpr,
    pub residual: DistExpr,
    pub verdict: Verdict,
    pub contact_terms: Vec<ContactTerm>,
    /// Diagrams of `t(P₁,…,Pₙ, j^μ(y))` before the divergence is taken.
    pub lhs_diagrams: Vec<Diagram>,
    /// Greatest common divisor of the integer diagram weights above.
    pub diagram_unit: i128,
    /// Whether the residual consists only of δ-supported terms.
    pub residual_is_local: bool,
    /// Whether every residual term contains a kernel at coincident points,
    /// i.e. a product that is only defined after renormalization.
    pub residual_coincident_only: bool,
}

/// A Lorentz index not used anywhere in `args`, preferring `mu`.
pub fn fresh_index(args: &[FieldPolynomial], stem: &str) -> Index {
    let used: BTreeSet<Index> = args.iter().flat_map(FieldPolynomial::indices).collect();
    std::iter::once(Index::new(stem))
        .chain((1..).map(|k| Index::new(format!("{stem}{k}"))))
        .find(|i| !used.contains(i))
        .expect("unbounded supply of names")
}

fn validate(args: &[FieldPolynomial], y: &Label) -> Result<Vec<Label>, WardError> {
    let labels = argument_labels(args)?;
    let mut out = Vec::with_capacity(args.len());
    for (p, l) in args.iter().zip(labels) {
        let Some(l) = l else {
            return Err(WardError::Unlocalized(p.to_string()));
        };
        if &l == y {
            return Err(WardError::ContactLabelInUse(l));
        }
        theta(p)?;
        out.push(l);
    }
    Ok(out)
}

/// `∂_μ^y ω₀(T(P₁,…,Pₙ, j^μ(y)))` in normal form.
pub fn build_mwi_lhs(args: &[FieldPolynomial], y: &Label, rules: &RewriteRules) -> Result<DistExpr, WardError> {
    validate(args, y)?;
    let mu = fresh_index(args, "mu");
    Ok(lhs_with_index(args, y, &mu, rules)?)
}

fn lhs_with_index(args: &[FieldPolynomial], y: &Label, mu: &Index, rules: &RewriteRules) -> Result<DistExpr, WardError> {
    let mut all = args.to_vec();
    all.push(FieldPolynomial::current(mu, y));
    let t = vev_tproduct(&all)?;
    Ok(t.differentiate(y, mu).normalize(y, rules)?)
}

fn leading_coefficient(p: &FieldPolynomial) -> Option<Number> {
    p.monomials().next().map(|m| m.coeff)
}

fn contact_terms(args: &[FieldPolynomial], labels: &[Label]) -> Result<Vec<ContactTerm>, WardError> {
    let mut out = Vec::new();
    for (l, (p, x)) in args.iter().zip(labels).enumerate() {
        let th = theta(p)?;
        if let Some(c) = leading_coefficient(&th) {
            let mut inner = args.to_vec();
            inner[l] = th.scale(&(int(1) / c));
            out.push(ContactTerm {
                label: x.clone(),
                kind: ContactKind::Charge,
                prefactor: ScalarCoeff::new(c, 1, 0),
                t: vev_tproduct(&inner)?,
                args: inner,
                normalized_weights: Vec::new(),
            });
        }
        let mu = fresh_index(args, "mu");
        let thm = theta_mu(p, &mu)?;
        for (rho, part) in &thm.parts {
            let Some(c) = leading_coefficient(part) else { continue };
            let mut inner = args.to_vec();
            inner[l] = part.scale(&(int(1) / c));
            out.push(ContactTerm {
                label: x.clone(),
                kind: ContactKind::Divergence { index: rho.clone() },
                prefactor: ScalarCoeff::new(-c, 1, 0),
                t: vev_tproduct(&inner)?,
                args: inner,
                normalized_weights: Vec::new(),
            });
        }
    }
    Ok(out)
}

fn contact_expr(term: &ContactTerm, y: &Label) -> DistExpr {
    let delta = DistExpr::kernel(Kernel::plain(KernelKind::Dirac, y, &term.label));
    let delta = match &term.kind {
        ContactKind::Charge => delta,
        ContactKind::Divergence { index } => delta.differentiate(y, index),
    };
    delta.multiply(&term.t).scale_coeff(&term.prefactor)
}

/// Right-hand side built from θ and θ_μ contact terms, in normal form.
pub fn build_mwi_rhs(args: &[FieldPolynomial], y: &Label, rules: &RewriteRules) -> Result<DistExpr, WardError> {
    let labels = validate(args, y)?;
    let terms = contact_terms(args, &labels)?;
    let sum = terms.iter().fold(DistExpr::zero(), |acc, t| acc.add(&contact_expr(t, y)));
    Ok(sum.normalize(y, rules)?)
}

fn gaussian_content(values: impl Iterator<Item = Number>) -> i128 {
    let mut g = 0i128;
    for v in values {
        for part in [v.re, v.im] {
            if !part.is_zero() && part.is_integer() {
                g = g.gcd(&part.numer().abs());
            }
        }
    }
    g.max(1)
}

/// Builds both sides, their residual, and the contact-term breakdown.
pub fn check_mwi(args: &[FieldPolynomial], y: &Label, rules: &RewriteRules) -> Result<MwiReport, WardError> {
    let labels = validate(args, y)?;
    let mu = fresh_index(args, "mu");
    let lhs = lhs_with_index(args, y, &mu, rules)?;
    let mut terms = contact_terms(args, &labels)?;
    let rhs = terms
        .iter()
        .fold(DistExpr::zero(), |acc, t| acc.add(&contact_expr(t, y)))
        .normalize(y, rules)?;
    let residual = lhs.sub(&rhs);

    let mut with_current = args.to_vec();
    with_current.push(FieldPolynomial::current(&mu, y));
    let lhs_diagrams = diagrams(&with_current)?;
    let unit = gaussian_content(lhs_diagrams.iter().map(|d| d.coefficient.value));
    for t in &mut terms {
        t.normalized_weights = diagrams(&t.args)?
            .iter()
            .map(|d| ScalarCoeff::number(d.coefficient.value * t.prefactor.value / int(unit)))
            .collect();
    }

    let residual_coincident_only = residual.raw_terms().all(|(k, _)| k.kernels.iter().any(Kernel::is_coincident));
    Ok(MwiReport {
        args: args.to_vec(),
        current_label: y.clone(),
        current_index: mu,
        verdict: if residual.is_zero() { Verdict::Verified } else { Verdict::AnomalyCandidate },
        residual_is_local: residual.is_local(),
        residual_coincident_only,
        lhs,
        rhs,
        residual,
        contact_terms: terms,
        lhs_diagrams,
        diagram_unit: unit,
    })
}

/// Furry's theorem: an odd number of β_C-odd arguments forces a zero VEV.
pub fn furry_check(args: &[FieldPolynomial], eta: &Number) -> Result<Exclusion, FieldError> {
    let mut odd = 0;
    for p in args {
        match charge_parity(p, eta)? {
            Some(-1) => odd += 1,
            Some(_) => {}
            None => return Err(FieldError::NotEigenvector(p.to_string(), "charge conjugation")),
        }
    }
    Ok(if odd % 2 == 1 { Exclusion::ForcedZero } else { Exclusion::NotApplicable })
}

/// A nonzero total charge number forces a zero VEV.
pub fn charge_conservation_check(args: &[FieldPolynomial]) -> Result<Exclusion, FieldError> {
    let mut total = 0;
    for p in args {
        total += polynomial_charge(p)?;
    }
    Ok(if total != 0 { Exclusion::ForcedZero } else { Exclusion::NotApplicable })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::imag;

    fn l(s: &str) -> Label {
        Label::new(s)
    }

    #[test]
    fn example_one_closes() {
        let args = [FieldPolynomial::phi_power(&l("x1"), 2, 0), FieldPolynomial::phi_power(&l("x2"), 0, 2)];
        let r = check_mwi(&args, &l("y"), &RewriteRules::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Verified, "residual {}", r.residual);
        assert!(!r.lhs.is_zero());
        let prefactors: Vec<_> = r.contact_terms.iter().map(|t| t.prefactor.value).collect();
        assert_eq!(prefactors, vec![int(2), int(-2)]);
    }

    #[test]
    fn wrong_contact_normalization_is_detected() {
        let args = [FieldPolynomial::phi_power(&l("x1"), 2, 0), FieldPolynomial::phi_power(&l("x2"), 0, 2)];
        let rules = RewriteRules { feynman_contact: imag(1) };
        let r = check_mwi(&args, &l("y"), &rules).unwrap();
        assert_eq!(r.verdict, Verdict::AnomalyCandidate);
        assert!(r.residual.is_local());
    }

    #[test]
    fn single_charged_field_is_trivial() {
        let r = check_mwi(&[FieldPolynomial::phi(&l("x1"))], &l("y"), &RewriteRules::default()).unwrap();
        assert!(r.lhs.is_zero());
        assert_eq!(r.verdict, Verdict::Verified);
    }

    #[test]
    fn exclusion_checks() {
        let eta = int(1);
        let j = |x: &str, i: &str| FieldPolynomial::current(&Index::new(i), &l(x));
        let lag = |x: &str| FieldPolynomial::lagrangian(&l(x));
        assert_eq!(furry_check(&[j("x1", "mu"), lag("x2"), lag("x3")], &eta).unwrap(), Exclusion::ForcedZero);
        assert_eq!(furry_check(&[j("x1", "mu"), j("x2", "nu"), lag("x3")], &eta).unwrap(), Exclusion::NotApplicable);
        assert!(furry_check(&[FieldPolynomial::phi(&l("x"))], &eta).is_err());
        let q = [FieldPolynomial::phi_power(&l("x1"), 2, 0), FieldPolynomial::phi_star(&l("x2"))];
        assert_eq!(charge_conservation_check(&q).unwrap(), Exclusion::ForcedZero);
        assert_eq!(charge_conservation_check(&[lag("x1"), j("x2", "mu")]).unwrap(), Exclusion::NotApplicable);
    }
}
