//! Variable polynomials `p_N(n) = Σ_j c_j(N) n^j`, families, types and
//! leading vectors.

use std::cmp::Ordering;
use std::fmt;

use num::{BigInt, BigRational, One};
use serde::{Deserialize, Serialize};

use super::coef::Coef;
use super::PetError;

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct VariablePolynomial {
    /// Coefficients by degree in the averaging variable; no trailing zeros.
    coeffs: Vec<Coef>,
}

impl VariablePolynomial {
    pub fn new(mut coeffs: Vec<Coef>) -> Self {
        while coeffs.last().is_some_and(Coef::is_zero) {
            coeffs.pop();
        }
        VariablePolynomial { coeffs }
    }

    /// `Σ c_j n^j` from rational constants.
    pub fn from_ints(c: &[i64]) -> Self {
        VariablePolynomial::new(c.iter().map(|&x| Coef::int(x)).collect())
    }

    pub fn parse(coeffs: &[&str]) -> Result<Self, PetError> {
        Ok(VariablePolynomial::new(coeffs.iter().map(|s| Coef::parse(s)).collect::<Result<_, _>>()?))
    }

    pub fn coeffs(&self) -> &[Coef] {
        &self.coeffs
    }

    pub fn coeff(&self, j: usize) -> Coef {
        self.coeffs.get(j).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Degree, with `0` for the zero polynomial.
    pub fn deg0(&self) -> usize {
        self.degree().unwrap_or(0)
    }

    pub fn lead(&self) -> Coef {
        self.coeffs.last().cloned().unwrap_or_default()
    }

    /// Degree and leading coefficient of `self - o`, or `None` when the
    /// difference is constant.  Scans from the top without forming it.
    pub fn lead_diff(&self, o: &Self) -> Option<(usize, Coef)> {
        let n = self.coeffs.len().max(o.coeffs.len());
        (1..n).rev().find_map(|j| {
            let (a, b) = (self.coeffs.get(j), o.coeffs.get(j));
            if a == b {
                return None;
            }
            let zero = Coef::zero();
            Some((j, a.unwrap_or(&zero).sub(b.unwrap_or(&zero))))
        })
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        VariablePolynomial::new((0..n).map(|j| self.coeff(j).add(&o.coeff(j))).collect())
    }

    pub fn sub(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        VariablePolynomial::new((0..n).map(|j| self.coeff(j).sub(&o.coeff(j))).collect())
    }

    /// `p(n + h)` with the binomial expansion done exactly.
    pub fn shift(&self, h: &ShiftArg) -> Self {
        let d = self.coeffs.len();
        let mut out = vec![Coef::zero(); d];
        for (j, c) in self.coeffs.iter().enumerate() {
            let mut binom = BigInt::one();
            for i in (0..=j).rev() {
                // term C(j, i) c h^{j-i} n^i
                let e = (j - i) as u8;
                let t = match h {
                    ShiftArg::Int(x) => c.scale(&BigRational::from_integer(BigInt::from(*x).pow(e as u32))),
                    ShiftArg::Var(v) if e > 0 => c.mul_shift(&vec![(*v, e)]),
                    ShiftArg::Var(_) => c.clone(),
                };
                out[i] = out[i].add(&t.scale(&BigRational::from_integer(binom.clone())));
                if i > 0 {
                    binom = binom * BigInt::from(i) / BigInt::from(j - i + 1);
                }
            }
        }
        VariablePolynomial::new(out)
    }

    pub fn var_bound(&self) -> u16 {
        self.coeffs.iter().map(Coef::var_bound).max().unwrap_or(0)
    }

    pub fn eval_f64(&self, n_big: f64, x: f64, m: &[f64]) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c.eval_f64(n_big, m))
    }
}

impl fmt::Display for VariablePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (j, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match j {
                0 => write!(f, "({c})")?,
                1 => write!(f, "({c})*n")?,
                _ => write!(f, "({c})*n^{j}")?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for VariablePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "VariablePolynomial({self})")
    }
}

/// Shift in a van der Corput step: a concrete integer or a fresh symbol.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShiftArg {
    Int(i64),
    Var(u16),
}

#[derive(Clone, PartialEq, Eq, Default)]
pub struct PolyFamily {
    pub members: Vec<VariablePolynomial>,
}

impl PolyFamily {
    pub fn new(members: Vec<VariablePolynomial>) -> Self {
        PolyFamily { members }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.members.iter().map(VariablePolynomial::deg0).max().unwrap_or(0)
    }

    /// First free shift-variable index.
    pub fn var_bound(&self) -> u16 {
        self.members.iter().map(VariablePolynomial::var_bound).max().unwrap_or(0)
    }

    /// Non-increasing degrees.
    pub fn is_ordered(&self) -> bool {
        self.members.windows(2).all(|w| w[0].deg0() >= w[1].deg0())
    }

    /// Index pairs whose difference is constant.
    pub fn essentially_equal_pair(&self) -> Option<(usize, usize)> {
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                if self.members[i].lead_diff(&self.members[j]).is_none() {
                    return Some((i, j));
                }
            }
        }
        None
    }

    pub fn from_json(text: &str) -> Result<PolyFamily, PetError> {
        let spec: FamilySpec =
            serde_json::from_str(text).map_err(|e| PetError::Format(e.to_string()))?;
        spec.to_family()
    }
}

impl fmt::Display for PolyFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, p) in self.members.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Debug for PolyFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PolyFamily{self}")
    }
}

/// JSON form of a family: coefficient expressions in `t` (standing for `N`),
/// listed by increasing degree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub polynomials: Vec<Vec<String>>,
}

impl FamilySpec {
    pub fn to_family(&self) -> Result<PolyFamily, PetError> {
        let members = self
            .polynomials
            .iter()
            .map(|p| VariablePolynomial::parse(&p.iter().map(String::as_str).collect::<Vec<_>>()))
            .collect::<Result<_, _>>()?;
        Ok(PolyFamily::new(members))
    }
}

/// `(d, w_d, …, w_1)`, ordered by `d` and then lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TypeVector {
    pub d: usize,
    /// `w[0] = w_d`, …, `w[d-1] = w_1`.
    pub w: Vec<usize>,
}

impl TypeVector {
    pub fn w_at(&self, degree: usize) -> usize {
        if degree == 0 || degree > self.d {
            0
        } else {
            self.w[self.d - degree]
        }
    }
}

impl Ord for TypeVector {
    fn cmp(&self, o: &Self) -> Ordering {
        self.d.cmp(&o.d).then_with(|| self.w.cmp(&o.w))
    }
}

impl PartialOrd for TypeVector {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl fmt::Display for TypeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.d)?;
        for w in &self.w {
            write!(f, ", {w}")?;
        }
        write!(f, ")")
    }
}

/// Checks that every member and pairwise difference has a good leading
/// coefficient.
pub fn check_nice(fam: &PolyFamily) -> Result<(), PetError> {
    let bad = |what: String, c: &Coef| PetError::NotNice { what, coefficient: c.to_string() };
    for (i, p) in fam.members.iter().enumerate() {
        if p.deg0() > 0 && !p.lead().is_good() {
            return Err(bad(format!("p{}", i + 1), &p.lead()));
        }
    }
    for i in 0..fam.len() {
        for j in i + 1..fam.len() {
            if let Some((_, c)) = fam.members[i].lead_diff(&fam.members[j]) {
                if !c.is_good() {
                    return Err(bad(format!("p{} - p{}", i + 1, j + 1), &c));
                }
            }
        }
    }
    Ok(())
}

pub fn family_type(fam: &PolyFamily) -> Result<TypeVector, PetError> {
    check_nice(fam)?;
    let d = fam.degree();
    if d == 0 {
        return Err(PetError::Constant);
    }
    let mut leads: Vec<Vec<Coef>> = vec![Vec::new(); d + 1];
    for p in &fam.members {
        let k = p.deg0();
        if k == 0 {
            continue;
        }
        let l = p.lead();
        if !leads[k].contains(&l) {
            leads[k].push(l);
        }
    }
    Ok(TypeVector { d, w: (1..=d).rev().map(|k| leads[k].len()).collect() })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LeadingVector {
    /// Index of the reference polynomial.
    pub reference: usize,
    /// Leading coefficient of the reference, then of each difference with
    /// the other members in family order.
    pub entries: Vec<Coef>,
    /// Degree of the polynomial each entry is the leading coefficient of.
    pub degrees: Vec<usize>,
    /// Family index each entry refers to (`reference` for the first).
    pub members: Vec<usize>,
}

pub fn leading_vector(fam: &PolyFamily, i: usize) -> Result<LeadingVector, PetError> {
    let p = fam.members.get(i).ok_or(PetError::BadIndex(i))?;
    let mut entries = vec![p.lead()];
    let mut degrees = vec![p.deg0()];
    let mut members = vec![i];
    for (j, q) in fam.members.iter().enumerate() {
        if j == i {
            continue;
        }
        let (deg, lead) = p.lead_diff(q).ok_or(PetError::NotEssentiallyDistinct(i, j))?;
        entries.push(lead);
        degrees.push(deg);
        members.push(j);
    }
    Ok(LeadingVector { reference: i, entries, degrees, members })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fam(ps: &[&[i64]]) -> PolyFamily {
        PolyFamily::new(ps.iter().map(|c| VariablePolynomial::from_ints(c)).collect())
    }

    #[test]
    fn types() {
        let t = family_type(&fam(&[&[0, 0, 1], &[0, 1, 1], &[0, 1]])).unwrap();
        assert_eq!(t, TypeVector { d: 2, w: vec![1, 1] });
        let f = PolyFamily::new(vec![
            VariablePolynomial::parse(&["0", "0", "sqrt(t)"]).unwrap(),
            VariablePolynomial::from_ints(&[0, 0, 1]),
        ]);
        assert_eq!(family_type(&f).unwrap(), TypeVector { d: 2, w: vec![2, 0] });
        let lin = PolyFamily::new(vec![VariablePolynomial::parse(&["t^(1/3)", "2"]).unwrap()]);
        assert_eq!(family_type(&lin).unwrap(), TypeVector { d: 1, w: vec![1] });
    }

    #[test]
    fn type_order() {
        let a = TypeVector { d: 2, w: vec![1, 3] };
        let b = TypeVector { d: 2, w: vec![2, 0] };
        let c = TypeVector { d: 1, w: vec![9] };
        assert!(a < b && c < a);
    }

    #[test]
    fn leading_vectors() {
        let lv = leading_vector(&fam(&[&[0, 0, 1], &[0, 1]]), 0).unwrap();
        assert_eq!(lv.entries, vec![Coef::int(1), Coef::int(1)]);
        let lv = leading_vector(&fam(&[&[0, 1, 1], &[0, 0, 1]]), 0).unwrap();
        assert_eq!(lv.entries, vec![Coef::int(1), Coef::int(1)]);
        assert_eq!(lv.degrees, vec![2, 1]);
        let f = PolyFamily::new(vec![
            VariablePolynomial::parse(&["1", "t^(1/2)"]).unwrap(),
            VariablePolynomial::parse(&["3", "2"]).unwrap(),
        ]);
        let lv = leading_vector(&f, 0).unwrap();
        assert_eq!(lv.entries[1], Coef::parse("t^(1/2) - 2").unwrap());
        assert!(matches!(
            leading_vector(&fam(&[&[0, 1], &[5, 1]]), 0),
            Err(PetError::NotEssentiallyDistinct(0, 1))
        ));
    }

    #[test]
    fn shift_expansion() {
        let p = VariablePolynomial::from_ints(&[0, 0, 0, 1]);
        assert_eq!(p.shift(&ShiftArg::Int(2)), VariablePolynomial::from_ints(&[8, 12, 6, 1]));
        let s = p.shift(&ShiftArg::Var(0));
        assert_eq!(s.coeff(1), Coef::int(3).mul_shift(&vec![(0, 2)]));
        assert_eq!(s.coeff(0), Coef::int(1).mul_shift(&vec![(0, 3)]));
    }

    #[test]
    fn not_nice_is_rejected() {
        let f = PolyFamily::new(vec![VariablePolynomial::parse(&["0", "1/t"]).unwrap()]);
        assert!(matches!(family_type(&f), Err(PetError::NotNice { .. })));
    }
}
