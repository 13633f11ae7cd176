//! The van der Corput operation, pivot choice, bad shifts and the
//! classification of new leading-vector entries.

use std::collections::{BTreeMap, BTreeSet};

use num::{BigInt, BigRational, Integer, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::coef::{Coef, ShiftMono, Tag};
use super::family::{leading_vector, PolyFamily, ShiftArg, VariablePolynomial};
use super::PetError;

#[derive(Clone, Debug, PartialEq)]
pub struct VdcOutcome {
    pub family: PolyFamily,
    /// `(i, shifted)` for each kept member: `p_i(n+h) - p(n)` or `p_i(n) - p(n)`.
    pub sources: Vec<(usize, bool)>,
    /// Nonzero constants that were dropped.
    pub residual: Vec<Coef>,
}

/// `(p, h)^* P`: shifted and unshifted differences against `p = P[pivot]`,
/// members of degree 0 removed.
pub fn vdc_apply(fam: &PolyFamily, pivot: usize, h: ShiftArg) -> Result<VdcOutcome, PetError> {
    let p = fam.members.get(pivot).ok_or(PetError::BadIndex(pivot))?;
    let mut members = Vec::new();
    let mut sources = Vec::new();
    let mut residual = Vec::new();
    for shifted in [true, false] {
        for (i, q) in fam.members.iter().enumerate() {
            let base = if shifted { q.shift(&h) } else { q.clone() };
            let d = base.sub(p);
            if d.deg0() == 0 {
                if !d.is_zero() {
                    residual.push(d.lead());
                }
                continue;
            }
            members.push(d);
            sources.push((i, shifted));
        }
    }
    if members.is_empty() {
        return Err(PetError::EmptyFamily { residual: residual.iter().map(|c| c.to_string()).collect() });
    }
    Ok(VdcOutcome { family: PolyFamily::new(members), sources, residual })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PivotCase {
    /// `p_1` and the last member have different degrees.
    A,
    /// Same degree, not all leading coefficients equal.
    B,
    /// Same degree and leading coefficient throughout.
    C,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Pivot {
    pub index: usize,
    pub case: PivotCase,
}

/// Minimal-degree member, lowest index first.  The leading polynomial
/// `p_1` is only used when it is alone, and in case b the pivot must have a
/// leading coefficient different from that of `p_1`.
pub fn choose_pivot(fam: &PolyFamily) -> Result<Pivot, PetError> {
    if fam.is_empty() {
        return Err(PetError::Constant);
    }
    if !fam.is_ordered() {
        return Err(PetError::NotOrdered);
    }
    let k = fam.len();
    if k == 1 {
        return Ok(Pivot { index: 0, case: PivotCase::C });
    }
    let degs: Vec<usize> = fam.members.iter().map(VariablePolynomial::deg0).collect();
    let dmin = *degs.iter().min().unwrap();
    if degs[0] != dmin {
        let index = (1..k).find(|&i| degs[i] == dmin).unwrap();
        return Ok(Pivot { index, case: PivotCase::A });
    }
    let lead = fam.members[0].lead();
    match (1..k).find(|&i| fam.members[i].lead() != lead) {
        Some(index) => Ok(Pivot { index, case: PivotCase::B }),
        None => Ok(Pivot { index: 1, case: PivotCase::C }),
    }
}

/// Drops later members that differ from an earlier one by a constant and
/// moves the rest into non-increasing degree order, keeping member 0 first.
pub fn normalize(out: &VdcOutcome) -> VdcOutcome {
    let mut keep: Vec<usize> = Vec::new();
    for i in 0..out.family.len() {
        let p = &out.family.members[i];
        if keep.iter().all(|&j| out.family.members[j].lead_diff(p).is_some()) {
            keep.push(i);
        }
    }
    let first = keep[0];
    let mut rest: Vec<usize> = keep[1..].to_vec();
    rest.sort_by_key(|&i| std::cmp::Reverse(out.family.members[i].deg0()));
    let order: Vec<usize> = std::iter::once(first).chain(rest).collect();
    VdcOutcome {
        family: PolyFamily::new(order.iter().map(|&i| out.family.members[i].clone()).collect()),
        sources: order.iter().map(|&i| out.sources[i]).collect(),
        residual: out.residual.clone(),
    }
}

/// Shape of a leading-vector entry of the new family, in terms of the old
/// leading vector `(u_1, …, u_k)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Form {
    /// `u_i` (0-based index into the old leading vector).
    Existing(usize),
    /// `r · h · u_1`.
    Shifted { r: u32 },
    /// `r · h · u_1 + u_i`.
    Sum { r: u32, index: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct FormEntry {
    pub form: Form,
    pub value: Coef,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LemmaReport {
    pub outcome: VdcOutcome,
    pub entries: Vec<FormEntry>,
}

fn times_h(c: &Coef, h: ShiftArg) -> Coef {
    match h {
        ShiftArg::Int(x) => c.scale_int(x),
        ShiftArg::Var(v) => c.mul_var(v),
    }
}

fn form_value(form: Form, u: &[Coef], h: ShiftArg) -> Coef {
    match form {
        Form::Existing(i) => u[i].clone(),
        Form::Shifted { r } => times_h(&u[0], h).scale_int(r as i64),
        Form::Sum { r, index } => times_h(&u[0], h).scale_int(r as i64).add(&u[index]),
    }
}

/// Applies the vdC step with the leading polynomial `p_1(n+h) - p(n)` and
/// classifies every entry of the new leading vector.  Requires `p_1` to
/// have maximal degree.
pub fn lemma_form_check(fam: &PolyFamily, pivot: usize, h: ShiftArg) -> Result<LemmaReport, PetError> {
    let d = fam.members.first().ok_or(PetError::Constant)?.deg0();
    if fam.degree() != d {
        return Err(PetError::NotOrdered);
    }
    let old = leading_vector(fam, 0)?;
    // position in the old leading vector of member i
    let pos = |i: usize| old.members.iter().position(|&m| m == i).unwrap();
    let raw = vdc_apply(fam, pivot, h)?;
    if raw.sources.first() != Some(&(0, true)) {
        return Err(PetError::FormViolation(format!(
            "p1(n+h) - p{}(n) is constant",
            pivot + 1
        )));
    }
    let out = normalize(&raw);
    let new = leading_vector(&out.family, 0)?;
    let r = d as u32;
    // p1(n+h) - p1(n) has degree d-1 and leading coefficient d·h·u_1
    let against = |i: usize| -> Form {
        if i == 0 {
            return Form::Shifted { r };
        }
        let e = old.degrees[pos(i)];
        match e.cmp(&(d - 1)) {
            std::cmp::Ordering::Greater => Form::Existing(pos(i)),
            std::cmp::Ordering::Less => Form::Shifted { r },
            std::cmp::Ordering::Equal => Form::Sum { r, index: pos(i) },
        }
    };
    let mut entries = Vec::with_capacity(new.entries.len());
    for (slot, value) in new.entries.iter().enumerate() {
        let (i, shifted) = out.sources[new.members[slot]];
        let mut predicted = if slot == 0 {
            against(pivot)
        } else if shifted {
            Form::Existing(pos(i))
        } else {
            against(i)
        };
        if h == ShiftArg::Int(0) {
            if let Form::Sum { index, .. } = predicted {
                predicted = Form::Existing(index);
            }
        }
        let form = if &form_value(predicted, &old.entries, h) == value {
            predicted
        } else {
            search_form(value, &old.entries, r, h).ok_or_else(|| {
                PetError::FormViolation(format!("entry {} = {} matches no form", slot + 1, value))
            })?
        };
        entries.push(FormEntry { form, value: value.clone() });
    }
    Ok(LemmaReport { outcome: out, entries })
}

fn search_form(value: &Coef, u: &[Coef], r: u32, h: ShiftArg) -> Option<Form> {
    let cands = (1..u.len())
        .map(Form::Existing)
        .chain(std::iter::once(Form::Shifted { r }))
        .chain((1..u.len()).map(|index| Form::Sum { r, index }));
    cands.into_iter().find(|f| &form_value(*f, u, h) == value)
}

#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct BadShifts {
    /// Integer shifts at which some leading coefficient of the new family or
    /// of a difference degenerates; always contains 0.
    pub values: BTreeSet<i64>,
    /// Degenerations that depend on earlier shift variables as well; these
    /// are excised as side conditions.
    pub symbolic: usize,
}

/// Integer values of `v` at which the top-growth part of `c` vanishes
/// identically.  The second component is true when vanishing also depends
/// on other variables.
pub fn vanishing_shifts(c: &Coef, v: u16) -> (BTreeSet<i64>, bool) {
    let mut out = BTreeSet::new();
    let Some(top) = c.top_basis().cloned() else { return (out, false) };
    // group by the monomial in the other variables; each group is a
    // polynomial in v
    let mut groups: BTreeMap<(ShiftMono, Tag), BTreeMap<u8, BigRational>> = BTreeMap::new();
    for ((s, tag), q) in c.component(&top) {
        let e = s.iter().find(|(w, _)| *w == v).map(|p| p.1).unwrap_or(0);
        let rest: ShiftMono = s.iter().copied().filter(|(w, _)| *w != v).collect();
        *groups.entry((rest, tag)).or_default().entry(e).or_insert_with(BigRational::zero) += q;
    }
    if groups.values().any(|g| g.keys().all(|&e| e == 0)) {
        return (out, false);
    }
    let symbolic = groups.len() > 1;
    let first = groups.values().next().unwrap();
    for x in integer_roots(first) {
        let ok = groups.values().all(|g| {
            g.iter()
                .map(|(e, q)| q * BigRational::from_integer(BigInt::from(x).pow(*e as u32)))
                .fold(BigRational::zero(), |a, b| a + b)
                .is_zero()
        });
        if ok {
            out.insert(x);
        }
    }
    (out, symbolic)
}

/// Integer roots of `Σ q_e x^e` (rational root theorem on the cleared form).
fn integer_roots(p: &BTreeMap<u8, BigRational>) -> Vec<i64> {
    let mut roots = Vec::new();
    let den = p.values().fold(BigInt::one(), |a, q| a.lcm(q.denom()));
    let ints: BTreeMap<u8, BigInt> = p
        .iter()
        .filter(|(_, q)| !q.is_zero())
        .map(|(e, q)| (*e, (q * BigRational::from_integer(den.clone())).to_integer()))
        .collect();
    let Some((&low, a0)) = ints.iter().next() else { return roots };
    if low > 0 {
        roots.push(0);
    }
    if ints.len() == 1 {
        return roots;
    }
    let Some(a) = a0.abs().to_u64() else { return roots };
    let eval = |x: i64| -> bool {
        ints.iter()
            .map(|(e, c)| c * BigInt::from(x).pow((*e - low) as u32))
            .fold(BigInt::zero(), |s, t| s + t)
            .is_zero()
    };
    let mut div = 1u64;
    while div.saturating_mul(div) <= a && div <= 1 << 31 {
        if a % div == 0 {
            for c in [div, a / div] {
                for x in [c as i64, -(c as i64)] {
                    if !roots.contains(&x) && eval(x) {
                        roots.push(x);
                    }
                }
            }
        }
        div += 1;
    }
    roots.sort_unstable();
    roots
}

/// Bad shifts of the step with pivot `pivot`: the symbolic step is formed
/// with a fresh variable and every leading coefficient that decides degrees
/// and type is tested for integer zeros.
pub fn bad_shifts(fam: &PolyFamily, pivot: usize) -> Result<BadShifts, PetError> {
    let v = fam.var_bound();
    let out = vdc_apply(fam, pivot, ShiftArg::Var(v))?;
    Ok(bad_shifts_of(&out.family, v))
}

pub(crate) fn bad_shifts_of(new: &PolyFamily, v: u16) -> BadShifts {
    let mut bad = BadShifts::default();
    bad.values.insert(0);
    let mut visit = |c: &Coef| {
        let (vals, sym) = vanishing_shifts(c, v);
        bad.values.extend(vals);
        bad.symbolic += sym as usize;
    };
    for (i, p) in new.members.iter().enumerate() {
        visit(&p.lead());
        for q in &new.members[i + 1..] {
            if let Some((_, c)) = p.lead_diff(q) {
                visit(&c);
            }
        }
    }
    bad
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::petlab::family::{family_type, VariablePolynomial as VP};

    fn fam(ps: &[&[i64]]) -> PolyFamily {
        PolyFamily::new(ps.iter().map(|c| VP::from_ints(c)).collect())
    }

    #[test]
    fn linear_single_is_empty() {
        let f = PolyFamily::new(vec![VP::parse(&["t", "t^(1/2)"]).unwrap()]);
        match vdc_apply(&f, 0, ShiftArg::Var(0)) {
            Err(PetError::EmptyFamily { residual }) => assert_eq!(residual, vec!["m0*N^(1/2)"]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn square_gives_linear() {
        let out = vdc_apply(&fam(&[&[0, 0, 1]]), 0, ShiftArg::Var(0)).unwrap();
        assert_eq!(out.family.len(), 1);
        let p = &out.family.members[0];
        assert_eq!(p.coeff(1), Coef::int(2).mul_var(0));
        assert_eq!(p.coeff(0), Coef::int(1).mul_shift(&vec![(0, 2)]));
    }

    #[test]
    fn square_and_line_with_minimal_pivot() {
        let out = vdc_apply(&fam(&[&[0, 0, 1], &[0, 1]]), 1, ShiftArg::Int(3)).unwrap();
        assert_eq!(out.family, fam(&[&[9, 5, 1], &[0, -1, 1]]));
        assert_eq!(out.residual, vec![Coef::int(3)]);
    }

    #[test]
    fn pivots() {
        assert_eq!(choose_pivot(&fam(&[&[0, 0, 1], &[0, 1]])).unwrap(), Pivot { index: 1, case: PivotCase::A });
        assert_eq!(choose_pivot(&fam(&[&[0, 0, 1], &[0, 1, 1]])).unwrap(), Pivot { index: 1, case: PivotCase::C });
        assert_eq!(choose_pivot(&fam(&[&[0, 0, 2], &[0, 0, 1]])).unwrap(), Pivot { index: 1, case: PivotCase::B });
        assert_eq!(choose_pivot(&fam(&[&[0, 1], &[0, 0, 1]])), Err(PetError::NotOrdered));
    }

    #[test]
    fn forms_single_square() {
        let r = lemma_form_check(&fam(&[&[0, 0, 1]]), 0, ShiftArg::Var(0)).unwrap();
        assert_eq!(r.entries.len(), 1);
        assert_eq!(r.entries[0].form, Form::Shifted { r: 2 });
        assert_eq!(r.entries[0].value, Coef::int(2).mul_var(0));
    }

    #[test]
    fn forms_linear_pair_zero_shift() {
        let f = PolyFamily::new(vec![
            VP::parse(&["0", "0", "t^(1/2)"]).unwrap(),
            VP::parse(&["0", "0", "1"]).unwrap(),
        ]);
        let r = lemma_form_check(&f, 1, ShiftArg::Int(0)).unwrap();
        assert!(r.entries.iter().all(|e| matches!(e.form, Form::Existing(_))));
    }

    #[test]
    fn forms_mixed_degrees() {
        // {n^3, n^3 + n^2, n}: pivot n
        let f = fam(&[&[0, 0, 0, 1], &[0, 0, 1, 1], &[0, 1]]);
        let p = choose_pivot(&f).unwrap();
        assert_eq!(p.index, 2);
        let r = lemma_form_check(&f, p.index, ShiftArg::Var(0)).unwrap();
        assert_eq!(r.entries[0].form, Form::Existing(2));
        assert!(r.entries.iter().any(|e| e.form == Form::Sum { r: 3, index: 1 }));
        let before = family_type(&f).unwrap();
        let after = family_type(&r.outcome.family).unwrap();
        assert!(after < before, "{before} -> {after}");
    }

    #[test]
    fn bad_shift_cancellation() {
        // {n^2, n^2 + 4n}: p1(n+h) - p2(n) = 2hn - 4n + h^2 has top coefficient 2h - 4
        let f = fam(&[&[0, 0, 1], &[0, 4, 1]]);
        let b = bad_shifts(&f, 1).unwrap();
        assert!(b.values.contains(&2));
        assert!(b.values.len() <= 2 * 2 * 2 + 1);
        let lin = fam(&[&[0, 1], &[0, 2]]);
        assert_eq!(bad_shifts(&lin, 1).unwrap().values, BTreeSet::from([0]));
        let mixed = PolyFamily::new(vec![VP::parse(&["0", "t^(1/2)", "1"]).unwrap(), VP::from_ints(&[0, 0, 1])]);
        assert_eq!(bad_shifts(&mixed, 1).unwrap().values, BTreeSet::from([0]));
    }

    #[test]
    fn roots() {
        let p: BTreeMap<u8, BigRational> = [(0u8, -6), (1, 1), (2, 1)]
            .iter()
            .map(|(e, c)| (*e, BigRational::from_integer((*c).into())))
            .collect();
        assert_eq!(integer_roots(&p), vec![-3, 2]);
    }
}
