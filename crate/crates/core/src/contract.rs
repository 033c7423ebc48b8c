//! Exact enumeration of Wick contractions.
//!
//! Identical legs are grouped into classes, and contractions are enumerated
//! as integer matrices between φ-classes and φ*-classes. Each matrix stands
//! for a whole family of leg-level pairings whose size is the multiplicity.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use itertools::Itertools;
use rayon::prelude::*;
use serde::Serialize;

use crate::coeff::{format_number, int, Number, ScalarCoeff};
use crate::dist::DistExpr;
use crate::field::{submonomials, FieldAt, FieldMonomial, FieldPolynomial, Species};
use crate::kernel::KernelKind;
use crate::symbols::{Index, Label};
use crate::term::{LinComb, TermKey};
use crate::wick::{argument_labels, edge_kernel, OperatorExpr, WickError};

/// A group of identical legs of one argument.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct LegClass {
    pub(crate) position: usize,
    pub(crate) field: FieldAt,
    pub(crate) count: usize,
}

/// Splits sorted field factors into φ-type and φ*-type classes.
pub(crate) fn leg_classes(fields: &[FieldAt]) -> (Vec<LegClass>, Vec<LegClass>) {
    let mut phi = Vec::new();
    let mut phis = Vec::new();
    for (count, f) in fields.iter().sorted().dedup_with_count() {
        let class = LegClass { position: 0, field: f.clone(), count };
        match f.field.species {
            Species::Phi => phi.push(class),
            Species::PhiStar => phis.push(class),
        }
    }
    (phi, phis)
}

/// All non-negative integer matrices with row sums bounded by (or, when
/// `full`, equal to) `rows` and column sums likewise bounded by `cols`;
/// cells rejected by `allowed` stay zero.
pub(crate) fn transport_matrices(
    rows: &[usize],
    cols: &[usize],
    allowed: &dyn Fn(usize, usize) -> bool,
    full: bool,
) -> Vec<Vec<Vec<usize>>> {
    if full && rows.iter().sum::<usize>() != cols.iter().sum::<usize>() {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(rows.len());
    let mut remaining = cols.to_vec();
    fill_rows(rows, &mut remaining, allowed, full, &mut current, &mut out);
    out
}

fn fill_rows(
    rows: &[usize],
    remaining: &mut Vec<usize>,
    allowed: &dyn Fn(usize, usize) -> bool,
    full: bool,
    current: &mut Vec<Vec<usize>>,
    out: &mut Vec<Vec<Vec<usize>>>,
) {
    let i = current.len();
    if i == rows.len() {
        if !full || remaining.iter().all(|&r| r == 0) {
            out.push(current.clone());
        }
        return;
    }
    if full {
        let left: usize = rows[i..].iter().sum();
        if left != remaining.iter().sum::<usize>() {
            return;
        }
    }
    let mut row = vec![0; remaining.len()];
    fill_cells(rows, i, 0, rows[i], remaining, allowed, full, &mut row, current, out);
}

#[allow(clippy::too_many_arguments)]
fn fill_cells(
    rows: &[usize],
    i: usize,
    j: usize,
    budget: usize,
    remaining: &mut Vec<usize>,
    allowed: &dyn Fn(usize, usize) -> bool,
    full: bool,
    row: &mut Vec<usize>,
    current: &mut Vec<Vec<usize>>,
    out: &mut Vec<Vec<Vec<usize>>>,
) {
    if j == remaining.len() {
        if full && budget != 0 {
            return;
        }
        current.push(row.clone());
        fill_rows(rows, remaining, allowed, full, current, out);
        current.pop();
        return;
    }
    let cap = if allowed(i, j) { budget.min(remaining[j]) } else { 0 };
    for v in 0..=cap {
        row[j] = v;
        remaining[j] -= v;
        fill_cells(rows, i, j + 1, budget - v, remaining, allowed, full, row, current, out);
        remaining[j] += v;
    }
    row[j] = 0;
}

fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

/// One leg type in a contraction scheme.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LegRef {
    pub position: usize,
    pub label: Label,
    pub derivs: Vec<Index>,
}

/// `count` propagators between one φ-leg type and one φ*-leg type.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SchemeEdge {
    pub phi: LegRef,
    pub phi_star: LegRef,
    pub count: usize,
}

/// A class of complete cross-pairings together with its leg-level count.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ContractionScheme {
    pub edges: Vec<SchemeEdge>,
    pub multiplicity: u64,
}

fn positioned_classes(args: &[FieldMonomial]) -> (Vec<LegClass>, Vec<LegClass>) {
    let mut phi = Vec::new();
    let mut phis = Vec::new();
    for (pos, m) in args.iter().enumerate() {
        let (p, s) = leg_classes(&m.factors);
        phi.extend(p.into_iter().map(|c| LegClass { position: pos, ..c }));
        phis.extend(s.into_iter().map(|c| LegClass { position: pos, ..c }));
    }
    (phi, phis)
}

fn check_monomial_labels(args: &[FieldMonomial]) -> Result<(), WickError> {
    let polys: Vec<FieldPolynomial> =
        args.iter().map(|m| FieldPolynomial::from_monomial(m.unit())).collect();
    argument_labels(&polys).map(|_| ())
}

/// Every perfect matching of φ-legs onto φ*-legs across distinct arguments,
/// grouped into schemes, each with its contribution to `ω₀(T(args))`.
pub fn enumerate_full_contractions(
    args: &[FieldMonomial],
) -> Result<Vec<(ContractionScheme, DistExpr)>, WickError> {
    check_monomial_labels(args)?;
    let (phi, phis) = positioned_classes(args);
    let rows: Vec<usize> = phi.iter().map(|c| c.count).collect();
    let cols: Vec<usize> = phis.iter().map(|c| c.count).collect();
    let allowed = |i: usize, j: usize| phi[i].position != phis[j].position;
    let prefactor: Number = args.iter().map(|m| m.coeff).product();
    let legs_factor: u128 = rows.iter().chain(&cols).map(|&c| factorial(c)).product();

    let mut out = Vec::new();
    for n in transport_matrices(&rows, &cols, &allowed, true) {
        let mut edges = Vec::new();
        let mut kernels = Vec::new();
        let mut sign = 1i64;
        let mut den = 1u128;
        let mut hbar = 0u32;
        for (i, row) in n.iter().enumerate() {
            for (j, &k) in row.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                den *= factorial(k);
                hbar += k as u32;
                let (left, right) = if phi[i].position < phis[j].position {
                    (&phi[i], &phis[j])
                } else {
                    (&phis[j], &phi[i])
                };
                let (kernel, s) = edge_kernel(KernelKind::Feynman, left, right);
                for _ in 0..k {
                    kernels.push(kernel.clone());
                    sign *= s;
                }
                edges.push(SchemeEdge {
                    phi: leg_ref(&phi[i]),
                    phi_star: leg_ref(&phis[j]),
                    count: k,
                });
            }
        }
        let multiplicity = legs_factor / den;
        let coeff = prefactor * int(multiplicity as i128 * sign as i128);
        let term = DistExpr::term(ScalarCoeff::new(coeff, hbar, 0), kernels);
        out.push((ContractionScheme { edges, multiplicity: multiplicity as u64 }, term));
    }
    Ok(out)
}

fn leg_ref(c: &LegClass) -> LegRef {
    LegRef { position: c.position, label: c.field.label.clone(), derivs: c.field.field.derivs.clone() }
}

/// `ω₀(T(args))` by contraction enumeration; arguments may be polynomials
/// and are expanded multilinearly.
pub fn vev_tproduct(args: &[FieldPolynomial]) -> Result<DistExpr, WickError> {
    argument_labels(args)?;
    let combos: Vec<Vec<FieldMonomial>> =
        args.iter().map(|p| p.monomials().collect::<Vec<_>>()).multi_cartesian_product().collect();
    if args.is_empty() {
        return Ok(DistExpr::constant(ScalarCoeff::one()));
    }
    let parts = combos
        .par_iter()
        .map(|combo| -> Result<DistExpr, WickError> {
            let mut sum = DistExpr::zero();
            for (_, t) in enumerate_full_contractions(combo)? {
                sum = sum.add(&t);
            }
            Ok(sum)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(parts.iter().fold(DistExpr::zero(), |acc, d| acc.add(d)))
}

/// A propagator-level diagram: the kernel product shared by a group of schemes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Diagram {
    pub vertices: Vec<Label>,
    pub edges: Vec<DiagramEdge>,
    pub coefficient: ScalarCoeff,
    pub multiplicity: u64,
    pub schemes: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DiagramEdge {
    pub from: Label,
    pub to: Label,
    pub kind: &'static str,
    pub derivs: Vec<Index>,
    pub multiplicity: usize,
}

/// Full contractions of `args` grouped by propagator structure.
pub fn diagrams(args: &[FieldPolynomial]) -> Result<Vec<Diagram>, WickError> {
    argument_labels(args)?;
    let vertices: Vec<Label> = args.iter().filter_map(FieldPolynomial::point).collect();
    let mut groups: BTreeMap<TermKey, (Number, u64, usize)> = BTreeMap::new();
    for combo in args.iter().map(|p| p.monomials().collect::<Vec<_>>()).multi_cartesian_product() {
        for (scheme, term) in enumerate_full_contractions(&combo)? {
            for (key, c) in term.raw_terms() {
                let entry = groups.entry(key.clone()).or_insert((int(0), 0, 0));
                entry.0 += c;
                entry.1 += scheme.multiplicity;
                entry.2 += 1;
            }
        }
    }
    Ok(groups
        .into_iter()
        .filter(|(_, (c, _, _))| !crate::coeff::is_zero(c))
        .map(|(key, (c, mult, schemes))| Diagram {
            vertices: vertices.clone(),
            edges: key
                .kernels
                .iter()
                .dedup_with_count()
                .map(|(n, k)| DiagramEdge {
                    from: k.a.clone(),
                    to: k.b.clone(),
                    kind: k.kind.name(),
                    derivs: k.derivs.clone(),
                    multiplicity: n,
                })
                .collect(),
            coefficient: ScalarCoeff::new(c, key.hbar, key.mass2),
            multiplicity: mult,
            schemes,
        })
        .collect())
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Renders diagrams as DOT graphs, one `graph` block per diagram.
pub fn diagrams_to_dot(diagrams: &[Diagram]) -> String {
    let mut out = String::new();
    for (n, d) in diagrams.iter().enumerate() {
        let _ = writeln!(out, "graph diagram_{n} {{");
        let _ = writeln!(
            out,
            "  graph [coefficient=\"{}\", multiplicity={}];",
            dot_escape(&d.coefficient.to_string()),
            d.multiplicity
        );
        for v in &d.vertices {
            let _ = writeln!(out, "  \"{}\";", dot_escape(v.as_str()));
        }
        for e in &d.edges {
            let derivs = e.derivs.iter().map(Index::as_str).join(",");
            let _ = writeln!(
                out,
                "  \"{}\" -- \"{}\" [kind=\"{}\", derivs=\"{}\", multiplicity={}];",
                dot_escape(e.from.as_str()),
                dot_escape(e.to.as_str()),
                e.kind,
                dot_escape(&derivs),
                e.multiplicity
            );
        }
        out.push_str("}\n");
    }
    out
}

/// Source of vacuum expectation values for the causal Wick expansion.
pub trait VevProvider {
    fn vev(&self, args: &[FieldMonomial]) -> Result<DistExpr, WickError>;
}

/// `ω₀ ∘ T` computed by full contraction enumeration.
#[derive(Clone, Copy, Debug, Default)]
pub struct ContractionOracle;

impl VevProvider for ContractionOracle {
    fn vev(&self, args: &[FieldMonomial]) -> Result<DistExpr, WickError> {
        let mut sum = DistExpr::zero();
        for (_, t) in enumerate_full_contractions(args)? {
            sum = sum.add(&t);
        }
        Ok(sum)
    }
}

/// `Σ t(A̲₁,…,A̲ₙ) · A̅₁(x₁)⋯A̅ₙ(xₙ)` over all submonomial choices.
pub fn causal_wick_expand(args: &[FieldMonomial], oracle: &dyn VevProvider) -> Result<OperatorExpr, WickError> {
    check_monomial_labels(args)?;
    let splits: Vec<_> = args.iter().map(submonomials).collect();
    let mut out = LinComb::default();
    for choice in splits.iter().map(|s| s.iter()).multi_cartesian_product() {
        let under: Vec<FieldMonomial> = choice.iter().map(|s| s.underline.clone()).collect();
        let t = oracle.vev(&under)?;
        if t.is_zero() {
            continue;
        }
        let factor: u64 = choice.iter().map(|s| s.factor).product();
        let spectator = choice
            .iter()
            .fold(FieldMonomial::constant(int(factor as i128)), |acc, s| acc.multiply(&s.overline));
        let spec = OperatorExpr::from_monomial(&spectator);
        out.add_assign(&OperatorExpr::from_dist(&t).multiply(&spec).0);
    }
    Ok(OperatorExpr(out))
}

/// [`causal_wick_expand`] extended multilinearly to polynomial arguments.
pub fn causal_wick_expand_polynomials(
    args: &[FieldPolynomial],
    oracle: &dyn VevProvider,
) -> Result<OperatorExpr, WickError> {
    if args.is_empty() {
        return causal_wick_expand(&[], oracle);
    }
    let mut out = OperatorExpr::zero();
    for choice in args.iter().map(|p| p.monomials().collect::<Vec<_>>()).multi_cartesian_product() {
        out = out.add(&causal_wick_expand(&choice, oracle)?);
    }
    Ok(out)
}

/// Renders a scheme as a one-line description, e.g. `2 x [phi(x1) - phis(x2)]^2`.
pub fn describe_scheme(s: &ContractionScheme) -> String {
    let edges = s
        .edges
        .iter()
        .map(|e| {
            let leg = |species: &str, l: &LegRef| {
                if l.derivs.is_empty() {
                    format!("{species}({})", l.label)
                } else {
                    format!("d[{}]{species}({})", l.derivs.iter().map(Index::as_str).join(","), l.label)
                }
            };
            let body = format!("[{} - {}]", leg("phi", &e.phi), leg("phis", &e.phi_star));
            if e.count == 1 {
                body
            } else {
                format!("{body}^{}", e.count)
            }
        })
        .join(" ");
    format!("{} x {}", format_number(&int(s.multiplicity as i128)), edges)
}
