//! Power counting and case analysis for possible anomalies of the Ward identity.
//!
//! Given local arguments `P₁,…,Pₙ`, the anomaly of the current-inserted
//! product is a sum of `∂^a δ` with `|a| ≤ ω`. [`classify`] decides whether
//! it vanishes by power counting, charge-number conservation or charge
//! conjugation, and otherwise matches one of three remaining patterns, for
//! which [`admissible_u`] describes the allowed renormalization.

mod case1;
mod tensor;

use std::fmt;

use itertools::Itertools;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::coeff::{int, Number};
use crate::field::{as_current, polynomial_dimension, theta, theta_mu, FieldError, FieldPolynomial};
use crate::symbols::{Index, Label};
use crate::ward::{charge_conservation_check, fresh_index, furry_check, Exclusion};

pub use case1::{case1_reduce, case1_reduce_with, Case1Report, DerivStructure};
pub use tensor::{
    candidate_structures, default_indices, invariant_tensor_basis, IndexSymmetry, InvariantTensor, TensorBasis,
    TensorStructure,
};

const DIMENSION: u32 = 4;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AnomalyError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("mass dimension of `{0}` is not an integer")]
    FractionalDimension(String),
    #[error("classification {0} has no renormalization freedom to describe")]
    NotACase(Classification),
    #[error("table needs n >= 4, got {0}")]
    TableTooSmall(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Classification {
    ZeroByPowerCounting,
    ZeroByFurry,
    ZeroByChargeNumber,
    CaseI,
    CaseII,
    CaseIII,
    /// No current among the arguments.
    NoCurrent,
    /// Positive ω with no exclusion and no matching pattern.
    Unclassified,
}

impl Classification {
    pub fn is_case(self) -> bool {
        matches!(self, Classification::CaseI | Classification::CaseII | Classification::CaseIII)
    }

    pub fn label(self) -> &'static str {
        match self {
            Classification::ZeroByPowerCounting => "power counting",
            Classification::ZeroByFurry => "Furry",
            Classification::ZeroByChargeNumber => "charge number",
            Classification::CaseI => "case I",
            Classification::CaseII => "case II",
            Classification::CaseIII => "case III",
            Classification::NoCurrent => "no current",
            Classification::Unclassified => "unclassified",
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Renormalization freedom left after imposing the argument symmetries.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "case")]
pub enum AdmissibleU {
    CaseI {
        max_derivative_order: usize,
        zero_derivative: InvariantTensor,
        one_derivative_structures: usize,
        /// Two-derivative structures already symmetric in `(y,μ) ↔ (x₂,ν)`.
        symmetric_structures: Vec<String>,
        constraint: String,
        /// How each remaining group (3) combination is removed.
        removals: Vec<String>,
        removable: bool,
    },
    CaseII {
        structure: InvariantTensor,
        free_coefficients: usize,
        support: String,
        symmetric: bool,
    },
    CaseIII {
        structure: InvariantTensor,
        free_coefficients: usize,
        support: String,
        symmetric: bool,
    },
}

impl AdmissibleU {
    /// Whether the described `u` has the symmetry required of the product.
    pub fn is_symmetric(&self) -> bool {
        match self {
            AdmissibleU::CaseI { removable, .. } => *removable,
            AdmissibleU::CaseII { symmetric, .. } | AdmissibleU::CaseIII { symmetric, .. } => *symmetric,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AnomalyVerdict {
    pub args: Vec<FieldPolynomial>,
    pub omega: i64,
    pub classification: Classification,
    pub admissible_u: Option<AdmissibleU>,
}

/// `ω(P₁,…,Pₙ) = Σ dim P_j + 4 − 4n` in four dimensions.
pub fn omega(args: &[FieldPolynomial]) -> Result<i64, AnomalyError> {
    let mut total = 4 - 4 * args.len() as i64;
    for p in args {
        let d = polynomial_dimension(p, DIMENSION)?;
        if !d.is_integer() {
            return Err(AnomalyError::FractionalDimension(p.to_string()));
        }
        total += *d.numer() as i64;
    }
    Ok(total)
}

/// Every argument tuple whose VEV enters the Ward identity for `args`:
/// the current-inserted product and all θ and θ_μ contact tuples.
pub fn ward_tuples(args: &[FieldPolynomial]) -> Result<Vec<Vec<FieldPolynomial>>, AnomalyError> {
    let mu = fresh_index(args, "mu");
    let used: Vec<Label> = args.iter().filter_map(FieldPolynomial::point).collect();
    let y = std::iter::once(Label::new("y"))
        .chain((1..).map(|k| Label::new(format!("y{k}"))))
        .find(|l| !used.contains(l))
        .expect("unbounded supply of labels");
    let mut out = vec![args.iter().cloned().chain([FieldPolynomial::current(&mu, &y)]).collect()];
    for (l, p) in args.iter().enumerate() {
        let replace = |q: FieldPolynomial| {
            let mut t = args.to_vec();
            t[l] = q;
            t
        };
        let th = theta(p)?;
        if !th.is_zero() {
            out.push(replace(th));
        }
        for part in theta_mu(p, &mu)?.parts.into_values() {
            out.push(replace(part));
        }
    }
    Ok(out)
}

fn all_forced(
    tuples: &[Vec<FieldPolynomial>],
    check: impl Fn(&[FieldPolynomial]) -> Result<Exclusion, FieldError>,
) -> bool {
    tuples.iter().all(|t| matches!(check(t), Ok(Exclusion::ForcedZero)))
}

fn match_case(args: &[FieldPolynomial], omega: i64) -> Classification {
    let mut currents = 0;
    let mut pairs = 0;
    let mut other = 0;
    for p in args {
        let Some(label) = p.point() else {
            other += 1;
            continue;
        };
        if as_current(p).is_some() {
            currents += 1;
        } else if *p == FieldPolynomial::phi_power(&label, 1, 1) {
            pairs += 1;
        } else if *p != FieldPolynomial::lagrangian(&label) {
            other += 1;
        }
    }
    match (currents, pairs, other, omega) {
        (0, _, _, _) => Classification::NoCurrent,
        (1, 0, 0, 3) => Classification::CaseI,
        (3, 0, 0, 1) => Classification::CaseII,
        (1, 1, 0, 1) => Classification::CaseIII,
        _ => Classification::Unclassified,
    }
}

/// Classification without the renormalization description.
pub fn classification(args: &[FieldPolynomial]) -> Result<(i64, Classification), AnomalyError> {
    let w = omega(args)?;
    if w <= 0 {
        return Ok((w, Classification::ZeroByPowerCounting));
    }
    let tuples = ward_tuples(args)?;
    if all_forced(&tuples, charge_conservation_check) {
        return Ok((w, Classification::ZeroByChargeNumber));
    }
    let eta: Number = int(1);
    if all_forced(&tuples, |t| furry_check(t, &eta)) {
        return Ok((w, Classification::ZeroByFurry));
    }
    Ok((w, match_case(args, w)))
}

pub fn classify(args: &[FieldPolynomial]) -> Result<AnomalyVerdict, AnomalyError> {
    let (omega, classification) = classification(args)?;
    let mut verdict = AnomalyVerdict { args: args.to_vec(), omega, classification, admissible_u: None };
    if classification.is_case() {
        verdict.admissible_u = Some(admissible_u(&verdict)?);
    }
    Ok(verdict)
}

/// [`classify`] over many tuples in parallel; output order follows input order.
pub fn classify_all(tuples: &[Vec<FieldPolynomial>]) -> Vec<Result<AnomalyVerdict, AnomalyError>> {
    tuples.par_iter().map(|t| classify(t)).collect()
}

fn support(args: &[FieldPolynomial]) -> String {
    let labels: Vec<String> = args.iter().filter_map(FieldPolynomial::point).map(|l| format!("{l}-y")).collect();
    format!("delta({})", labels.join(","))
}

pub fn admissible_u(verdict: &AnomalyVerdict) -> Result<AdmissibleU, AnomalyError> {
    match verdict.classification {
        Classification::CaseI => {
            let report = case1_reduce();
            let zero = invariant_tensor_basis(2, &IndexSymmetry::none(), true);
            let mut symmetric_structures: Vec<String> =
                report.basis2_groups[..2].iter().flatten().cloned().collect();
            symmetric_structures.push("g^{mu nu} box_y + g^{mu nu} box_2".into());
            Ok(AdmissibleU::CaseI {
                max_derivative_order: (verdict.omega - 1).max(0) as usize,
                zero_derivative: zero.basis[0].clone(),
                one_derivative_structures: report.one_derivative_structures,
                symmetric_structures,
                constraint: report.constraint_display.clone(),
                removals: vec![
                    "C4 (d_y^mu d_y^nu + g^{mu nu} box_2): same divergence as the C2 structure".into(),
                    "C3 (d_2^mu d_2^nu - g^{mu nu} box_2): add d_y^mu d_y^nu - g^{mu nu} box_y, which has zero divergence"
                        .into(),
                ],
                removable: report.certified,
            })
        }
        Classification::CaseII => {
            let basis = invariant_tensor_basis(4, &IndexSymmetry::symmetric_in(4, &[1, 2, 3]), true);
            let structure = basis.basis[0].clone();
            let symmetric = basis.dimension() == 1
                && structure.is_invariant(&basis.indices, &IndexSymmetry::total(4).elements(4));
            Ok(AdmissibleU::CaseII {
                structure,
                free_coefficients: basis.dimension(),
                support: support(&verdict.args),
                symmetric,
            })
        }
        Classification::CaseIII => {
            let basis = invariant_tensor_basis(2, &IndexSymmetry::none(), true);
            let structure = basis.basis[0].clone();
            let symmetric = structure.is_invariant(&basis.indices, &IndexSymmetry::total(2).elements(2));
            Ok(AdmissibleU::CaseIII {
                structure,
                free_coefficients: basis.dimension(),
                support: support(&verdict.args),
                symmetric,
            })
        }
        c => Err(AnomalyError::NotACase(c)),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Table1Row {
    pub row: usize,
    /// Pattern such as `L^{n-2}, phi^2 phis, j`.
    pub pattern: String,
    pub args: Vec<FieldPolynomial>,
    pub omega: i64,
    pub classification: Classification,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Table1 {
    pub n: usize,
    pub rows: Vec<Table1Row>,
}

/// `count` copies of `L`, then the listed extra arguments, labelled
/// `x1, x2, …` in order; currents get indices `nu1, nu2, …`.
fn build_row(count: usize, extras: &[(usize, usize)], currents: usize) -> Vec<FieldPolynomial> {
    let mut out = Vec::new();
    let mut k = 0;
    let mut next = || {
        k += 1;
        Label::new(format!("x{k}"))
    };
    for _ in 0..count {
        out.push(FieldPolynomial::lagrangian(&next()));
    }
    for &(a, b) in extras {
        out.push(FieldPolynomial::phi_power(&next(), a, b));
    }
    for c in 1..=currents {
        out.push(FieldPolynomial::current(&Index::new(format!("nu{c}")), &next()));
    }
    out
}

/// The eight explicit rows of the case table for `n` arguments (`n ≥ 4`).
pub fn table1(n: usize) -> Result<Table1, AnomalyError> {
    if n < 4 {
        return Err(AnomalyError::TableTooSmall(n));
    }
    let specs: [(&str, usize, &[(usize, usize)], usize); 8] = [
        ("L^{n-1}, j", n - 1, &[], 1),
        ("L^{n-2}, j, j", n - 2, &[], 2),
        ("L^{n-3}, j, j, j", n - 3, &[], 3),
        ("L^{n-4}, j, j, j, j", n - 4, &[], 4),
        ("L^{n-2}, phis phi^2, j", n - 2, &[(2, 1)], 1),
        ("L^{n-2}, phis^2 phi, j", n - 2, &[(1, 2)], 1),
        ("L^{n-2}, phis phi, j", n - 2, &[(1, 1)], 1),
        ("L^{n-3}, phi^2 phis, phi phis, j", n - 3, &[(2, 1), (1, 1)], 1),
    ];
    let rows = specs
        .par_iter()
        .enumerate()
        .map(|(k, (pattern, count, extras, currents))| {
            let args = build_row(*count, extras, *currents);
            let (omega, classification) = classification(&args)?;
            Ok(Table1Row { row: k + 1, pattern: pattern.to_string(), args, omega, classification })
        })
        .collect::<Result<Vec<_>, AnomalyError>>()?;
    Ok(Table1 { n, rows })
}

/// Every tuple of `n ≤ max_n` arguments built from copies of `L`, at most
/// two proper submonomials `φ^a φ*^b` (`a, b ≤ 2`) and between one and four
/// currents, labelled `x1, x2, …` in that order.
pub fn scan_tuples(max_n: usize) -> Vec<Vec<FieldPolynomial>> {
    let shapes: Vec<(usize, usize)> =
        (0..=2).flat_map(|a| (0..=2).map(move |b| (a, b))).filter(|&(a, b)| a + b > 0 && a + b < 4).collect();
    let mut out = Vec::new();
    for n in 1..=max_n {
        for currents in 1..=n.min(4) {
            for extra in 0..=(n - currents).min(2) {
                for picks in shapes.iter().copied().combinations_with_replacement(extra) {
                    out.push(build_row(n - currents - extra, &picks, currents));
                }
            }
        }
    }
    out
}
