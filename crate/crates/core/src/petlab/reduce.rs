//! PET type reduction down to linear families, and the linear base case.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::certificate::{unit, CertMode, ReductionCertificate, EXPLICIT_MAX_S};
use super::coef::{Coef, MPoly};
use super::family::{family_type, leading_vector, PolyFamily, ShiftArg, TypeVector};
use super::vdc::{bad_shifts_of, choose_pivot, lemma_form_check, Form, PivotCase};
use super::PetError;

pub const MAX_STEPS: usize = 64;
/// Family size at which the reduction is abandoned.
pub const MAX_MEMBERS: usize = 256;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VdcStep {
    /// 0-based pivot index in the family before the step.
    pub pivot: usize,
    pub case: PivotCase,
    /// Certificate variable carrying the shift of this step.
    pub variable: u16,
    pub type_before: TypeVector,
    pub type_after: TypeVector,
    pub bad_shifts: Vec<i64>,
    pub symbolic_conditions: usize,
    pub forms: Vec<Form>,
    /// Number of members after the step.
    pub size: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Reduction {
    pub certificate: ReductionCertificate,
    /// Leading vector of the input family with respect to its first member.
    pub leading: Vec<Coef>,
    /// The linear family reached.
    pub base: PolyFamily,
    /// Row `i` expresses the `i`-th leading-vector entry of the base family
    /// as `Σ_ℓ C[i][ℓ] u_ℓ`.
    pub matrix: Vec<Vec<MPoly>>,
}

pub fn pet_reduce(fam: &PolyFamily) -> Result<ReductionCertificate, PetError> {
    Ok(pet_reduce_full(fam)?.certificate)
}

pub fn pet_reduce_full(fam: &PolyFamily) -> Result<Reduction, PetError> {
    if fam.is_empty() || fam.degree() == 0 {
        return Err(PetError::Constant);
    }
    if !fam.is_ordered() {
        return Err(PetError::NotOrdered);
    }
    if let Some((i, j)) = fam.essentially_equal_pair() {
        return Err(PetError::NotEssentiallyDistinct(i, j));
    }
    let mut ty = family_type(fam)?;
    let leading = leading_vector(fam, 0)?.entries;
    let k = fam.len();
    // shift variables of the input (if any) are part of the coefficients;
    // certificate variables start after them
    let v0 = fam.var_bound();
    let mut matrix: Vec<Vec<MPoly>> =
        (0..k).map(|i| (0..k).map(|l| MPoly::constant((i == l) as i64)).collect()).collect();
    let mut cur = fam.clone();
    let mut trace = Vec::new();
    while cur.degree() > 1 {
        if trace.len() >= MAX_STEPS {
            return Err(PetError::NonTermination { steps: trace.len(), size: cur.len() });
        }
        let pivot = choose_pivot(&cur)?;
        let step = trace.len() as u16;
        let v = v0 + step;
        let rep = lemma_form_check(&cur, pivot.index, ShiftArg::Var(v))?;
        let next = rep.outcome.family;
        if next.len() > MAX_MEMBERS {
            return Err(PetError::NonTermination { steps: trace.len() + 1, size: next.len() });
        }
        let after = family_type(&next)?;
        if after >= ty {
            return Err(PetError::TypeNotDecreasing { before: ty.to_string(), after: after.to_string() });
        }
        let bad = bad_shifts_of(&next, v);
        matrix = rep
            .entries
            .iter()
            .map(|e| match e.form {
                Form::Existing(i) => matrix[i].clone(),
                Form::Shifted { r } => matrix[0].iter().map(|c| c.mul_var(step).scale(r as i64)).collect(),
                Form::Sum { r, index } => matrix[0]
                    .iter()
                    .zip(&matrix[index])
                    .map(|(a, b)| a.mul_var(step).scale(r as i64).add(b))
                    .collect(),
            })
            .collect();
        trace.push(VdcStep {
            pivot: pivot.index,
            case: pivot.case,
            variable: step,
            type_before: ty,
            type_after: after.clone(),
            bad_shifts: bad.values.into_iter().collect(),
            symbolic_conditions: bad.symbolic,
            forms: rep.entries.iter().map(|e| e.form).collect(),
            size: next.len(),
        });
        ty = after;
        cur = next;
    }
    let certificate = linear_base(&matrix, k, trace);
    Ok(Reduction { certificate, leading, base: cur, matrix })
}

/// Linear base case: `A_ε = Σ_{i∈ε} m_{b_i} v_i` for the base leading
/// vector `v`, rewritten through `matrix` in the original `u_ℓ`.
fn linear_base(matrix: &[Vec<MPoly>], k: usize, trace: Vec<VdcStep>) -> ReductionCertificate {
    let steps = trace.len();
    let s = matrix.len();
    let t = steps + s;
    let units: Vec<Vec<MPoly>> = matrix
        .iter()
        .enumerate()
        .map(|(i, row)| row.iter().map(|c| c.mul_var((steps + i) as u16)).collect())
        .collect();
    let y_max = 2 * s as i64 - 1;
    let mut cert = ReductionCertificate {
        s,
        t,
        y: (-y_max..=y_max).collect(),
        k,
        mode: CertMode::EpsLinear,
        p: units.into_iter().enumerate().map(|(i, row)| (unit(s, i), row)).collect::<BTreeMap<_, _>>(),
        trace,
    };
    if s <= EXPLICIT_MAX_S {
        cert = cert.to_explicit();
    }
    cert
}

/// The form used in the inductive step for `k` linear polynomials: the
/// coordinate `i0` enters as `m_{i0}` when `ε_{i0} = 0` and not at all
/// otherwise.  Obtained from the certificate by the translation
/// `A_ε ↦ A_ε + (1 - 2ε_{i0}) A_{e_{i0}}`.
pub fn inductive_shape(cert: &ReductionCertificate, i0: usize) -> BTreeMap<Vec<u8>, Vec<MPoly>> {
    let base = cert.polys(&unit(cert.s, i0));
    let mut out = BTreeMap::new();
    for bits in 0u64..1 << cert.s {
        let e: Vec<u8> = (0..cert.s).map(|i| ((bits >> i) & 1) as u8).collect();
        let sign = 1 - 2 * e[i0] as i64;
        let row: Vec<MPoly> = cert.polys(&e).iter().zip(&base).map(|(a, b)| a.add(&b.scale(sign))).collect();
        out.insert(e, row);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::petlab::certificate::verify_certificate;
    use crate::petlab::family::VariablePolynomial as VP;

    fn fam(ps: &[&[i64]]) -> PolyFamily {
        PolyFamily::new(ps.iter().map(|c| VP::from_ints(c)).collect())
    }

    #[test]
    fn single_linear() {
        let c = pet_reduce(&PolyFamily::new(vec![VP::parse(&["1", "t^(1/2)"]).unwrap()])).unwrap();
        assert_eq!((c.s, c.t), (1, 1));
        assert_eq!(c.y, vec![-1, 0, 1]);
        assert_eq!(c.polys(&[1]), vec![MPoly::var(0)]);
        assert_eq!(c.polys(&[0]), vec![MPoly::zero()]);
        assert!(verify_certificate(&c).passed());
    }

    #[test]
    fn square_gives_two_m_m() {
        let c = pet_reduce(&fam(&[&[0, 0, 1]])).unwrap();
        assert_eq!((c.s, c.t), (1, 2));
        assert_eq!(c.polys(&[1]), vec![MPoly::var(0).mul_var(1).scale(2)]);
        assert!(verify_certificate(&c).passed());
    }

    #[test]
    fn linear_family_shape() {
        let c = pet_reduce(&fam(&[&[0, 3], &[1, 2], &[0, 1]])).unwrap();
        assert_eq!((c.s, c.t), (3, 3));
        assert_eq!(c.y, (-5..=5).collect::<Vec<_>>());
        for (e, row) in &c.p {
            for (j, q) in row.iter().enumerate() {
                let want = if e[j] == 1 { MPoly::var(j as u16) } else { MPoly::zero() };
                assert_eq!(q, &want);
            }
        }
        let ind = inductive_shape(&c, 0);
        for (e, row) in &ind {
            let want = if e[0] == 0 { MPoly::var(0) } else { MPoly::zero() };
            assert_eq!(row[0], want);
            assert_eq!(row[1], if e[1] == 1 { MPoly::var(1) } else { MPoly::zero() });
        }
    }

    #[test]
    fn mixed_family_reduces_and_verifies() {
        let f = PolyFamily::new(vec![
            VP::parse(&["0", "1", "t^(1/2)"]).unwrap(),
            VP::parse(&["0", "2", "1"]).unwrap(),
            VP::parse(&["0", "log(t)"]).unwrap(),
        ]);
        let r = pet_reduce_full(&f).unwrap();
        let c = &r.certificate;
        assert!(c.trace.windows(2).all(|w| w[1].type_before < w[0].type_before));
        assert!(c.trace.iter().all(|s| s.type_after < s.type_before));
        let rep = verify_certificate(c);
        assert!(rep.passed(), "{rep:?}");
    }

    #[test]
    fn not_ordered_rejected() {
        assert_eq!(pet_reduce(&fam(&[&[0, 1], &[0, 0, 1]])), Err(PetError::NotOrdered));
    }
}
