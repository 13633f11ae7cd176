//! Computational laboratory for Hardy-field iterates: symbolic growth
//! calculus, PET reduction of variable polynomial families and numerics for
//! multiple ergodic averages.

pub mod ergolab;
pub mod lefun;
pub mod petlab;
pub mod scalar;
pub mod xcli;

pub use scalar::{Hp, Real};

/// Extended precision used for certified floors.
pub type Hp256 = scalar::Hp<256>;
pub type Rational = num::BigRational;
pub type Complex64 = num::complex::Complex64;
