//! Exact coefficient ring for variable polynomials.
//!
//! A coefficient is a finite sum of terms `q · tag · Π m_v^{e_v} · N^a (log N)^b`
//! with `q` rational, `tag` one of a few named reals and the `m_v` shift
//! variables introduced by van der Corput steps.  Equality is term-wise,
//! so it is exact.

use std::collections::BTreeMap;
use std::fmt;

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};

use super::PetError;
use crate::lefun::monomial::{to_monosum, Monomial};
use crate::lefun::num::{Named, Num};
use crate::lefun::{Expr, LEFunction};

/// `N^n (log N)^log`.  The derived order is the growth order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Basis {
    pub n: BigRational,
    pub log: BigRational,
}

impl Basis {
    pub fn one() -> Self {
        Basis { n: BigRational::zero(), log: BigRational::zero() }
    }

    pub fn power(n: BigRational) -> Self {
        Basis { n, log: BigRational::zero() }
    }

    pub fn is_one(&self) -> bool {
        self.n.is_zero() && self.log.is_zero()
    }

    /// `+1` diverging, `0` constant, `-1` vanishing.
    pub fn growth_sign(&self) -> i32 {
        if !self.n.is_zero() {
            return if self.n.is_positive() { 1 } else { -1 };
        }
        if self.log.is_zero() {
            0
        } else if self.log.is_positive() {
            1
        } else {
            -1
        }
    }

    pub fn to_lefun(&self) -> LEFunction {
        let m = Monomial {
            t: Num::from_rational(self.n.clone()),
            log: Num::from_rational(self.log.clone()),
            loglog: Num::zero(),
            exp: Vec::new(),
        };
        LEFunction::new(m.to_expr()).expect("power-log monomials are defined for t > 1")
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if !self.n.is_zero() {
            parts.push(if self.n.is_one() { "N".to_string() } else { format!("N^({})", self.n) });
        }
        if !self.log.is_zero() {
            parts.push(if self.log.is_one() {
                "log(N)".to_string()
            } else {
                format!("log(N)^({})", self.log)
            });
        }
        if parts.is_empty() {
            write!(f, "1")
        } else {
            write!(f, "{}", parts.join("*"))
        }
    }
}

/// Named irrational factor of a coefficient.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Tag {
    One,
    Sqrt2,
    Pi,
    E,
}

impl Tag {
    fn from_named(n: Named) -> Tag {
        match n {
            Named::Sqrt2 => Tag::Sqrt2,
            Named::Pi => Tag::Pi,
            Named::E => Tag::E,
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Tag::One => 1.0,
            Tag::Sqrt2 => std::f64::consts::SQRT_2,
            Tag::Pi => std::f64::consts::PI,
            Tag::E => std::f64::consts::E,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            Tag::One => "",
            Tag::Sqrt2 => "sqrt2",
            Tag::Pi => "pi",
            Tag::E => "e",
        }
    }
}

/// Monomial in the shift variables: sorted `(variable, exponent)` pairs.
pub type ShiftMono = Vec<(u16, u8)>;

pub fn shift_mul(a: &ShiftMono, b: &ShiftMono) -> ShiftMono {
    let mut out: ShiftMono = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
            out.push(a[i]);
            i += 1;
        } else if i == a.len() || b[j].0 < a[i].0 {
            out.push(b[j]);
            j += 1;
        } else {
            out.push((a[i].0, a[i].1 + b[j].1));
            i += 1;
            j += 1;
        }
    }
    out
}

fn shift_display(s: &ShiftMono) -> String {
    s.iter()
        .map(|&(v, e)| if e == 1 { format!("m{v}") } else { format!("m{v}^{e}") })
        .collect::<Vec<_>>()
        .join("*")
}

type Key = (Basis, ShiftMono, Tag);

/// Growth class of a coefficient sequence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LimitClass {
    /// Identically zero, or tends to zero.
    Zero,
    NonzeroConstant,
    /// Dominated by a power `N^δ`, `δ > 0`, up to logarithms.
    FractionalPowerDominant(BigRational),
    /// Diverges slower than every power (powers of `log N`).
    LogDivergent,
}

impl LimitClass {
    /// Good sequences have a nonzero (possibly infinite) limit.
    pub fn is_good(&self) -> bool {
        !matches!(self, LimitClass::Zero)
    }
}

/// Exact asymptotic coefficient, possibly polynomial in shift variables.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Coef {
    terms: BTreeMap<Key, BigRational>,
}

pub type AsymptoticCoefficient = Coef;

impl Coef {
    pub fn zero() -> Self {
        Coef::default()
    }

    pub fn term(q: BigRational, basis: Basis, shift: ShiftMono, tag: Tag) -> Self {
        let mut c = Coef::zero();
        c.push(q, (basis, shift, tag));
        c
    }

    pub fn rational(q: BigRational) -> Self {
        Coef::term(q, Basis::one(), Vec::new(), Tag::One)
    }

    pub fn int(i: i64) -> Self {
        Coef::rational(BigRational::from_integer(i.into()))
    }

    pub fn basis(q: BigRational, b: Basis) -> Self {
        Coef::term(q, b, Vec::new(), Tag::One)
    }

    pub fn var(v: u16) -> Self {
        Coef::term(BigRational::one(), Basis::one(), vec![(v, 1)], Tag::One)
    }

    fn push(&mut self, q: BigRational, k: Key) {
        if q.is_zero() {
            return;
        }
        let e = self.terms.entry(k.clone()).or_insert_with(BigRational::zero);
        *e += q;
        if e.is_zero() {
            self.terms.remove(&k);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Basis, &ShiftMono, Tag, &BigRational)> {
        self.terms.iter().map(|((b, s, t), q)| (b, s, *t, q))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, o: &Coef) -> Coef {
        let mut out = self.clone();
        for (k, q) in &o.terms {
            let e = out.terms.entry(k.clone()).or_insert_with(BigRational::zero);
            *e += q;
        }
        out.terms.retain(|_, v| !v.is_zero());
        out
    }

    pub fn neg(&self) -> Coef {
        Coef { terms: self.terms.iter().map(|(k, q)| (k.clone(), -q)).collect() }
    }

    pub fn sub(&self, o: &Coef) -> Coef {
        self.add(&o.neg())
    }

    pub fn scale(&self, q: &BigRational) -> Coef {
        if q.is_zero() {
            return Coef::zero();
        }
        Coef { terms: self.terms.iter().map(|(k, v)| (k.clone(), v * q)).collect() }
    }

    pub fn scale_int(&self, i: i64) -> Coef {
        self.scale(&BigRational::from_integer(i.into()))
    }

    /// Multiply by `Π m_v^{e_v}`.
    pub fn mul_shift(&self, s: &ShiftMono) -> Coef {
        Coef {
            terms: self
                .terms
                .iter()
                .map(|((b, sh, t), q)| ((b.clone(), shift_mul(sh, s), *t), q.clone()))
                .collect(),
        }
    }

    pub fn mul_var(&self, v: u16) -> Coef {
        self.mul_shift(&vec![(v, 1)])
    }

    /// Largest basis carrying a nonzero term.
    pub fn top_basis(&self) -> Option<&Basis> {
        self.terms.keys().map(|k| &k.0).max()
    }

    /// Terms at basis `b`, keyed by `(shift, tag)`.
    pub fn component(&self, b: &Basis) -> BTreeMap<(ShiftMono, Tag), BigRational> {
        self.terms
            .iter()
            .filter(|(k, _)| &k.0 == b)
            .map(|((_, s, t), q)| ((s.clone(), *t), q.clone()))
            .collect()
    }

    /// Class of the coefficient for generic values of the shift variables.
    pub fn limit_class(&self) -> LimitClass {
        match self.top_basis() {
            None => LimitClass::Zero,
            Some(b) => match b.growth_sign() {
                -1 => LimitClass::Zero,
                0 => LimitClass::NonzeroConstant,
                _ if b.n.is_positive() => LimitClass::FractionalPowerDominant(b.n.clone()),
                _ if b.n.is_zero() => LimitClass::LogDivergent,
                // N^{-a} log^b N with a > 0 vanishes; handled by growth_sign.
                _ => LimitClass::Zero,
            },
        }
    }

    pub fn is_good(&self) -> bool {
        self.limit_class().is_good()
    }

    /// Highest variable index used, plus one.
    pub fn var_bound(&self) -> u16 {
        self.terms
            .keys()
            .flat_map(|k| k.1.iter().map(|&(v, _)| v + 1))
            .max()
            .unwrap_or(0)
    }

    pub fn depends_on(&self, v: u16) -> bool {
        self.terms.keys().any(|k| k.1.iter().any(|&(w, _)| w == v))
    }

    pub fn has_shift_vars(&self) -> bool {
        self.terms.keys().any(|k| !k.1.is_empty())
    }

    /// Substitute the integer `x` for the variable `v`.
    pub fn subs(&self, v: u16, x: i64) -> Coef {
        let mut out = Coef::zero();
        for ((b, s, t), q) in &self.terms {
            let mut factor = BigInt::one();
            let mut rest = Vec::with_capacity(s.len());
            for &(w, e) in s {
                if w == v {
                    factor *= BigInt::from(x).pow(e as u32);
                } else {
                    rest.push((w, e));
                }
            }
            let e = out.terms.entry((b.clone(), rest, *t)).or_insert_with(BigRational::zero);
            *e += q * BigRational::from_integer(factor);
        }
        out.terms.retain(|_, v| !v.is_zero());
        out
    }

    /// Numeric value at `N` with all shift variables set to `m`.
    pub fn eval_f64(&self, n: f64, m: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|((b, s, t), q)| {
                let mut x = q.to_f64().unwrap_or(f64::NAN) * t.value();
                x *= n.powf(b.n.to_f64().unwrap_or(0.0)) * n.ln().powf(b.log.to_f64().unwrap_or(0.0));
                for &(v, e) in s {
                    x *= m.get(v as usize).copied().unwrap_or(0.0).powi(e as i32);
                }
                x
            })
            .sum()
    }

    /// Reads a sum of `q · N^a (log N)^b` terms, with `t` standing for `N`.
    pub fn from_lefun(f: &LEFunction) -> Result<Coef, PetError> {
        Coef::from_expr(&f.expr)
    }

    pub fn from_expr(e: &Expr) -> Result<Coef, PetError> {
        let bad = || PetError::UnsupportedCoefficient(e.to_string());
        let s = to_monosum(e).ok_or_else(bad)?;
        let mut out = Coef::zero();
        for (c, m) in &s.terms {
            if !m.loglog.is_zero() || !m.exp.is_empty() {
                return Err(bad());
            }
            let n = m.t.exact().ok_or_else(bad)?.clone();
            let log = m.log.exact().ok_or_else(bad)?.clone();
            let (q, tag) = num_scalar(c).ok_or_else(bad)?;
            out.push(q, (Basis { n, log }, Vec::new(), tag));
        }
        Ok(out)
    }

    pub fn parse(text: &str) -> Result<Coef, PetError> {
        let f = LEFunction::parse(text).map_err(|e| PetError::UnsupportedCoefficient(format!("{text}: {e}")))?;
        Coef::from_lefun(&f)
    }

    /// Generic value as an LE function of `N`; fails with shift variables.
    pub fn to_lefun(&self) -> Option<LEFunction> {
        if self.has_shift_vars() {
            return None;
        }
        let mut e: Option<Expr> = None;
        for ((b, _, t), q) in self.terms.iter().rev() {
            let scalar = match t {
                Tag::One => Num::from_rational(q.clone()),
                Tag::Sqrt2 => Num::from_rational(q.clone()).mul(&Num::named(Named::Sqrt2)),
                Tag::Pi => Num::from_rational(q.clone()).mul(&Num::named(Named::Pi)),
                Tag::E => Num::from_rational(q.clone()).mul(&Num::named(Named::E)),
            };
            let term = Expr::mul(Expr::Const(scalar), b.to_lefun().expr);
            e = Some(match e {
                None => term,
                Some(acc) => Expr::add(acc, term),
            });
        }
        LEFunction::new(e.unwrap_or(Expr::int(0)).simplify()).ok()
    }
}

fn num_scalar(c: &Num) -> Option<(BigRational, Tag)> {
    if let Some(q) = c.exact() {
        return Some((q.clone(), Tag::One));
    }
    c.symbolic().map(|(q, n)| (q.clone(), Tag::from_named(n)))
}

impl fmt::Display for Coef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, ((b, s, t), q)) in self.terms.iter().rev().enumerate() {
            let neg = q.is_negative();
            if i > 0 {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            } else if neg {
                write!(f, "-")?;
            }
            let a = q.abs();
            let mut parts = Vec::new();
            if !a.is_one() {
                parts.push(a.to_string());
            }
            if *t != Tag::One {
                parts.push(t.symbol().to_string());
            }
            if !s.is_empty() {
                parts.push(shift_display(s));
            }
            if !b.is_one() {
                parts.push(b.to_string());
            }
            if parts.is_empty() {
                parts.push("1".into());
            }
            write!(f, "{}", parts.join("*"))?;
        }
        Ok(())
    }
}

impl fmt::Debug for Coef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Coef({self})")
    }
}

/// Integer polynomial in the shift variables.
#[derive(Clone, PartialEq, Eq, Hash, Default, Debug)]
pub struct MPoly {
    pub terms: BTreeMap<ShiftMono, BigInt>,
}

impl MPoly {
    pub fn zero() -> Self {
        MPoly::default()
    }

    pub fn constant(c: i64) -> Self {
        let mut p = MPoly::zero();
        if c != 0 {
            p.terms.insert(Vec::new(), c.into());
        }
        p
    }

    pub fn var(v: u16) -> Self {
        let mut p = MPoly::zero();
        p.terms.insert(vec![(v, 1)], BigInt::one());
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, o: &MPoly) -> MPoly {
        let mut out = self.clone();
        for (k, c) in &o.terms {
            let e = out.terms.entry(k.clone()).or_insert_with(BigInt::zero);
            *e += c;
        }
        out.terms.retain(|_, v| !v.is_zero());
        out
    }

    pub fn neg(&self) -> MPoly {
        MPoly { terms: self.terms.iter().map(|(k, c)| (k.clone(), -c)).collect() }
    }

    pub fn sub(&self, o: &MPoly) -> MPoly {
        self.add(&o.neg())
    }

    pub fn scale(&self, c: i64) -> MPoly {
        if c == 0 {
            return MPoly::zero();
        }
        MPoly { terms: self.terms.iter().map(|(k, v)| (k.clone(), v * c)).collect() }
    }

    pub fn mul_var(&self, v: u16) -> MPoly {
        MPoly {
            terms: self.terms.iter().map(|(k, c)| (shift_mul(k, &vec![(v, 1)]), c.clone())).collect(),
        }
    }

    /// Degree ≤ 1 in every variable separately.
    pub fn is_multilinear(&self) -> bool {
        self.terms.keys().all(|k| k.iter().all(|&(_, e)| e <= 1))
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|k| k.is_empty())
    }

    pub fn to_coef(&self) -> Coef {
        let mut c = Coef::zero();
        for (k, v) in &self.terms {
            c = c.add(&Coef::term(BigRational::from_integer(v.clone()), Basis::one(), k.clone(), Tag::One));
        }
        c
    }

    pub fn eval_i128(&self, m: &[i64]) -> Option<i128> {
        let mut s: i128 = 0;
        for (k, c) in &self.terms {
            let mut x = c.to_i128()?;
            for &(v, e) in k {
                x = x.checked_mul((*m.get(v as usize)? as i128).checked_pow(e as u32)?)?;
            }
            s = s.checked_add(x)?;
        }
        Some(s)
    }
}

impl fmt::Display for MPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (k, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            if i > 0 {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            } else if neg {
                write!(f, "-")?;
            }
            let a = c.abs();
            match (a.is_one(), k.is_empty()) {
                (_, true) => write!(f, "{a}")?,
                (true, false) => write!(f, "{}", shift_display(k))?,
                (false, false) => write!(f, "{a}*{}", shift_display(k))?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn parse_and_classes() {
        let c = Coef::parse("2*t^(1/2) + 3").unwrap();
        assert_eq!(c.limit_class(), LimitClass::FractionalPowerDominant(q(1, 2)));
        assert_eq!(Coef::parse("5").unwrap().limit_class(), LimitClass::NonzeroConstant);
        assert_eq!(Coef::parse("log(t)^2").unwrap().limit_class(), LimitClass::LogDivergent);
        assert_eq!(Coef::parse("1/t").unwrap().limit_class(), LimitClass::Zero);
        assert_eq!(Coef::zero().limit_class(), LimitClass::Zero);
        let s = Coef::parse("sqrt2*t").unwrap();
        assert_eq!(s.terms().next().unwrap().2, Tag::Sqrt2);
        assert!(Coef::parse("exp(t)").is_err());
    }

    #[test]
    fn cancellation_is_exact() {
        let a = Coef::parse("t^(1/3) + 1").unwrap();
        let b = Coef::parse("t^(1/3)").unwrap();
        assert_eq!(a.sub(&b), Coef::int(1));
        assert!(a.sub(&a).is_zero());
        let h = Coef::int(3).mul_var(0);
        assert_eq!(h.subs(0, 2), Coef::int(6));
        assert_eq!(h.add(&Coef::int(-6)).subs(0, 2), Coef::zero());
    }

    #[test]
    fn round_trip_through_lefun() {
        let c = Coef::parse("2*t^(2/3)*log(t) - 1/2").unwrap();
        let back = Coef::from_lefun(&c.to_lefun().unwrap()).unwrap();
        assert_eq!(c, back);
    }

    #[test]
    fn mpoly_basics() {
        let p = MPoly::var(0).mul_var(1).scale(2);
        assert!(p.is_multilinear());
        assert_eq!(p.to_string(), "2*m0*m1");
        assert!(!p.mul_var(1).is_multilinear());
        assert_eq!(p.eval_i128(&[3, 5]), Some(30));
    }
}
