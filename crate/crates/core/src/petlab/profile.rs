//! Degree/type/size profile of the polynomial parts of `S + P` functions,
//! and the change of variables on short windows.

use num::{BigRational, Zero};
use serde::Serialize;

use super::coef::{Basis, Coef, LimitClass};
use super::family::{family_type, leading_vector, LeadingVector, PolyFamily, TypeVector, VariablePolynomial};
use super::PetError;
use crate::lefun::growth::{compare_growth, leading_monomial, Verdict};
use crate::lefun::num::{Num, NumHp};
use crate::lefun::{decompose, Expr, LEFunction, LeError};
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq)]
pub struct SPProfile {
    pub degree: usize,
    pub family_type: Option<TypeVector>,
    pub size: usize,
    pub leading: Option<LeadingVector>,
    /// Input indices of the selected polynomials.
    pub selected: Vec<usize>,
    pub family: PolyFamily,
}

fn poly_of(p: &[Num]) -> Result<VariablePolynomial, PetError> {
    let coeffs = p
        .iter()
        .map(|c| Coef::from_expr(&Expr::Const(c.clone())))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(VariablePolynomial::new(coeffs))
}

/// Greedy maximal subfamily of non-constant, essentially distinct
/// polynomial parts, taken in input order so the first polynomial is kept
/// whenever it is non-constant.
pub fn sp_profile(fs: &[LEFunction]) -> Result<SPProfile, PetError> {
    let dec = decompose(fs)?;
    let mut selected = Vec::new();
    let mut members: Vec<VariablePolynomial> = Vec::new();
    for (i, p) in dec.p.iter().enumerate() {
        let q = poly_of(p)?;
        if q.deg0() == 0 {
            continue;
        }
        if members.iter().all(|m| m.lead_diff(&q).is_some()) {
            members.push(q);
            selected.push(i);
        }
    }
    let family = PolyFamily::new(members);
    if family.is_empty() {
        return Ok(SPProfile { degree: 0, family_type: None, size: 0, leading: None, selected, family });
    }
    Ok(SPProfile {
        degree: family.degree(),
        family_type: Some(family_type(&family)?),
        size: family.len(),
        leading: Some(leading_vector(&family, 0)?),
        selected,
        family,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CovSample {
    pub r: f64,
    pub u: f64,
    pub c: Vec<f64>,
    pub d: Vec<f64>,
    pub gap: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChangeOfVariables {
    /// `u(t) = |k̃! / g̃^{(k̃)}(t)|^{1/k̃}`.
    pub u: LEFunction,
    /// `d_g(t) = g^{(k_g)}(t)/k_g! · u(t)^{k_g}`.
    pub d: Vec<LEFunction>,
    pub classes: Vec<LimitClass>,
    pub samples: Vec<CovSample>,
}

fn factorial(k: u32) -> i64 {
    (1..=k as i64).product()
}

fn class_of(f: &LEFunction) -> Result<LimitClass, PetError> {
    let one = LEFunction::new(Expr::int(1))?;
    let cmp = compare_growth(f, &one)?;
    Ok(match cmp.verdict {
        Verdict::Dominated => LimitClass::Zero,
        Verdict::SameRate(c) if c.is_zero() => LimitClass::Zero,
        Verdict::SameRate(_) => LimitClass::NonzeroConstant,
        Verdict::Dominates => match leading_monomial(&f.expr) {
            Some((_, m)) if m.t.signum() > 0 => match m.t.exact() {
                Some(q) => LimitClass::FractionalPowerDominant(q.clone()),
                None => LimitClass::FractionalPowerDominant(BigRational::zero()),
            },
            _ => LimitClass::LogDivergent,
        },
        Verdict::Inconclusive => {
            return Err(LeError::Inconclusive { f: f.to_string(), g: "1".into() }.into())
        }
    })
}

/// Leading coefficients after writing `h = w⌊u(r)⌋ + v`, their smooth
/// proxies `d_g` and the gap `|c_g(r) - d_g(r)|` on `ladder`.
pub fn change_of_variables(
    fs: &[LEFunction],
    orders: &[u32],
    special: usize,
    ladder: &[f64],
) -> Result<ChangeOfVariables, PetError> {
    if fs.len() != orders.len() || special >= fs.len() {
        return Err(PetError::Format("functions, orders and special index disagree".into()));
    }
    let kt = orders[special];
    let gk = fs[special].derivative(kt);
    let sign = match leading_monomial(&gk.expr) {
        Some((c, _)) if c.signum() != 0 => c.signum() as i64,
        _ => return Err(LeError::Inconclusive { f: gk.to_string(), g: "0".into() }.into()),
    };
    // k̃! / |g̃^{(k̃)}|
    let base = Expr::div(Expr::int(factorial(kt) * sign), gk.expr.clone());
    let u = LEFunction::new(Expr::pow(base.clone(), 1, kt as i64).simplify())?;
    let mut d = Vec::new();
    let mut classes = Vec::new();
    for (g, &k) in fs.iter().zip(orders) {
        let e = Expr::mul(
            Expr::div(g.derivative(k).expr, Expr::int(factorial(k))),
            Expr::pow(base.clone(), k as i64, kt as i64),
        );
        let dg = LEFunction::new(e.simplify())?;
        classes.push(class_of(&dg)?);
        d.push(dg);
    }
    let mut samples = Vec::new();
    for &r in ladder {
        let x = NumHp::from_f64(r);
        let uv = u.eval(&x)?;
        let fl = uv.floor();
        let mut c = Vec::new();
        let mut dv = Vec::new();
        let mut gap = Vec::new();
        for ((g, &k), dg) in fs.iter().zip(orders).zip(&d) {
            let coef = g.derivative(k).eval(&x)? / NumHp::from_i64(factorial(k));
            let cg = coef * fl.powi(k as i64);
            let dgv = dg.eval(&x)?;
            gap.push((cg.clone() - dgv.clone()).abs().to_f64());
            c.push(cg.to_f64());
            dv.push(dgv.to_f64());
        }
        samples.push(CovSample { r, u: uv.to_f64(), c, d: dv, gap });
    }
    Ok(ChangeOfVariables { u, d, classes, samples })
}

/// `d_g` as an exact coefficient when it is a sum of power-log terms.
pub fn d_coefficient(cov: &ChangeOfVariables, i: usize) -> Result<Coef, PetError> {
    Coef::from_lefun(&cov.d[i])
}

pub fn basis_of(f: &LEFunction) -> Option<Basis> {
    let (_, m) = leading_monomial(&f.expr)?;
    Some(Basis { n: m.t.exact()?.clone(), log: m.log.exact()?.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lefun::property_q;
    use crate::lefun::window::endpoint;

    fn f(s: &str) -> LEFunction {
        LEFunction::parse(s).unwrap()
    }

    #[test]
    fn sp_profiles() {
        let p = sp_profile(&[f("t + log(t)^3"), f("t"), f("log(t)^2")]).unwrap();
        assert_eq!((p.size, p.degree), (1, 1));
        assert_eq!(p.selected, vec![0]);
        assert_eq!(sp_profile(&[f("t^2"), f("t^2")]).unwrap().size, 1);
        let p = sp_profile(&[f("t^2 + sqrt(t)"), f("t + log(t)")]).unwrap();
        assert_eq!((p.size, p.degree), (2, 2));
        assert_eq!(p.family_type, Some(TypeVector { d: 2, w: vec![1, 1] }));
    }

    #[test]
    fn three_halves_second_order() {
        let cov = change_of_variables(&[f("t^(3/2)")], &[2], 0, &[1e4, 1e6, 1e8]).unwrap();
        assert_eq!(cov.classes, vec![LimitClass::NonzeroConstant]);
        // u ∝ r^{1/4}
        let s = &cov.samples;
        let ratio = s[2].u / s[1].u;
        assert!((ratio - 100f64.powf(0.25)).abs() < 1e-9);
        assert!(s.iter().all(|x| (x.d[0] - 1.0).abs() < 1e-12));
        assert!(s[2].gap[0] < s[0].gap[0]);
    }

    #[test]
    fn t_log_t_second_order() {
        let cov = change_of_variables(&[f("t*log(t)")], &[2], 0, &[1e3, 1e6, 1e9, 1e12]).unwrap();
        assert_eq!(cov.classes, vec![LimitClass::NonzeroConstant]);
        assert_eq!(d_coefficient(&cov, 0).unwrap(), Coef::int(1));
        let last = cov.samples.last().unwrap();
        assert!((last.u - (2e12f64).sqrt()).abs() < 1e-3);
        assert!(last.gap[0] < 1e-5);
    }

    #[test]
    fn property_q_examples() {
        let lower = |s: &str| LEFunction::new(endpoint(&f(s), 2).unwrap().1.to_expr()).unwrap();
        assert!(property_q(&lower("t^(3/2)"), &lower("t*log(t)")).unwrap());
        assert!(!property_q(&lower("t*log(t)"), &lower("t*log(log(t))")).unwrap());
    }
}
