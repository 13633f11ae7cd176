//! Variable polynomial families, van der Corput reduction to the linear
//! case, and certificates for the resulting correlation polynomials.

pub mod certificate;
pub mod coef;
pub mod family;
pub mod profile;
pub mod reduce;
pub mod vdc;

pub use certificate::{verify_certificate, CertMode, ReductionCertificate, VerificationReport};
pub use coef::{AsymptoticCoefficient, Basis, Coef, LimitClass, MPoly, Tag};
pub use family::{family_type, leading_vector, LeadingVector, PolyFamily, ShiftArg, TypeVector, VariablePolynomial};
pub use profile::{change_of_variables, sp_profile, ChangeOfVariables, SPProfile};
pub use reduce::{inductive_shape, pet_reduce, pet_reduce_full, Reduction, VdcStep};
pub use vdc::{bad_shifts, choose_pivot, lemma_form_check, vdc_apply, BadShifts, Form, Pivot, PivotCase};

use crate::lefun::LeError;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum PetError {
    #[error("family is not nice: leading coefficient of {what} is {coefficient}, which tends to zero")]
    NotNice { what: String, coefficient: String },
    #[error("members {0} and {1} are not essentially distinct")]
    NotEssentiallyDistinct(usize, usize),
    #[error("family is constant")]
    Constant,
    #[error("family is not ordered by non-increasing degree with a maximal-degree first member")]
    NotOrdered,
    #[error("index {0} out of range")]
    BadIndex(usize),
    #[error("all members are constant after the van der Corput step; residual constants: {residual:?}")]
    EmptyFamily { residual: Vec<String> },
    #[error("leading-vector form violation: {0}")]
    FormViolation(String),
    #[error("type did not decrease: {before} -> {after}")]
    TypeNotDecreasing { before: String, after: String },
    #[error("reduction abandoned after {steps} steps with {size} members")]
    NonTermination { steps: usize, size: usize },
    #[error("certificate item {item} fails: {witness}")]
    VerificationFailure { item: String, witness: String },
    #[error("unsupported coefficient {0}: expected a sum of rational multiples of t^a log(t)^b")]
    UnsupportedCoefficient(String),
    #[error("format error: {0}")]
    Format(String),
    #[error(transparent)]
    Le(#[from] LeError),
}
