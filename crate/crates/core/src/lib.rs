//! Symbolic Wick calculus for the free complex scalar field.
//!
//! The crate computes star products, unrenormalized time-ordered products
//! and vacuum expectation values by exact contraction enumeration, checks
//! the Master Ward Identity for the U(1) current at VEV level, and
//! mechanizes the power-counting and tensor-structure analysis of possible
//! anomalies.

pub mod anomaly;
pub mod coeff;
pub mod contract;
pub mod dist;
pub mod dsl;
pub mod field;
pub mod kernel;
pub mod linalg;
pub mod symbols;
mod term;
pub mod ward;
pub mod wick;

pub use coeff::{Number, Rational, ScalarCoeff};
pub use dist::{DistExpr, DistTerm, KernelError, RewriteStep};
pub use field::{BasicField, FieldAt, FieldError, FieldMonomial, FieldPolynomial, IndexedPolynomial, Species};
pub use kernel::{Kernel, KernelKind, RewriteRules};
pub use symbols::{Index, Label};
pub use term::TermKey;
pub use contract::{
    causal_wick_expand, causal_wick_expand_polynomials, diagrams, diagrams_to_dot, enumerate_full_contractions, vev_tproduct, ContractionOracle,
    ContractionScheme, Diagram, VevProvider,
};
pub use wick::{unrenormalized_tproduct, OperatorExpr, WickError};
pub use ward::{check_mwi, charge_conservation_check, furry_check, Exclusion, MwiReport, Verdict};
pub use anomaly::{
    admissible_u, case1_reduce, classify, invariant_tensor_basis, omega, scan_tuples, table1, AdmissibleU, AnomalyVerdict,
    Case1Report, Classification, IndexSymmetry, TensorStructure,
};
