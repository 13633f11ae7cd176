//! Symbolic calculus for logarithmico-exponential functions.

pub mod decompose;
pub mod expr;
pub mod growth;
pub mod monomial;
pub mod num;
pub mod taylor;
pub mod window;

pub use decompose::{decompose, Decomposition};
pub use expr::{Expr, LEFunction};
pub use growth::{
    compare_growth, growth_degree, is_one_good, is_strongly_nonpolynomial, GrowthComparison,
    GrowthDegree, OneGood, Verdict, Witness,
};
pub use taylor::{taylor_poly, TaylorData};
pub use window::{class_index, find_window, property_q, WindowClass, WindowChoice};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum LeError {
    #[error("domain error at t = {t}: {reason}")]
    Domain { t: f64, reason: String },
    #[error("inconclusive growth comparison between {f} and {g}")]
    Inconclusive { f: String, g: String },
    #[error("{0} does not have polynomial growth (no t^D with D <= 32 dominates it)")]
    NotPolynomialGrowth(String),
    #[error("{0} is not a finite sum of generalized monomials")]
    NormalForm(String),
    #[error("cannot decide whether {0} is rational")]
    IrrationalityUndecided(String),
    #[error("no window t^(p/q) found: {0}")]
    NoWindowFound(String),
}
