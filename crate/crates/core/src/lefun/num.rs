//! Constants of LE expressions: exact rationals when possible, otherwise a
//! high-precision real carried at [`NUM_BITS`] bits.

use std::cmp::Ordering;
use std::fmt;

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};

use crate::scalar::{Hp, Real};

pub const NUM_BITS: usize = 320;
pub type NumHp = Hp<NUM_BITS>;

/// Two inexact values closer than this (relative) are the same constant.
const EQ_REL: f64 = 1e-70;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Named {
    Pi,
    E,
    Sqrt2,
}

impl Named {
    pub fn symbol(self) -> &'static str {
        match self {
            Named::Pi => "pi",
            Named::E => "e",
            Named::Sqrt2 => "sqrt2",
        }
    }
}

#[derive(Clone)]
pub struct Num {
    exact: Option<BigRational>,
    approx: NumHp,
    /// `value = scale·named` when the constant is a rational multiple of a
    /// named one.
    name: Option<(BigRational, Named)>,
}

impl Num {
    pub fn from_rational(q: BigRational) -> Self {
        let approx = NumHp::from_ratio(&q);
        Num { exact: Some(q), approx, name: None }
    }

    pub fn from_int(i: i64) -> Self {
        Num::from_rational(BigRational::from_integer(BigInt::from(i)))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        Num::from_rational(BigRational::new(n.into(), d.into()))
    }

    pub fn zero() -> Self {
        Num::from_int(0)
    }

    pub fn one() -> Self {
        Num::from_int(1)
    }

    pub fn from_real(x: NumHp) -> Self {
        Num { exact: None, approx: x, name: None }
    }

    pub fn named(n: Named) -> Self {
        let approx = match n {
            Named::Pi => NumHp::pi(),
            Named::E => NumHp::euler(),
            Named::Sqrt2 => NumHp::from_i64(2).sqrt(),
        };
        Num { exact: None, approx, name: Some((BigRational::one(), n)) }
    }

    /// Decimal literal; always exact.
    pub fn parse_decimal(s: &str) -> Option<Self> {
        let (mant, exp) = match s.find(['e', 'E']) {
            Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
            None => (s, 0),
        };
        let (int_part, frac_part) = match mant.find('.') {
            Some(i) => (&mant[..i], &mant[i + 1..]),
            None => (mant, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return None;
        }
        let digits = format!("{int_part}{frac_part}");
        let digits = if digits.is_empty() { "0".to_string() } else { digits };
        let n: BigInt = digits.parse().ok()?;
        let scale = exp - frac_part.len() as i32;
        let ten = BigInt::from(10);
        let q = if scale >= 0 {
            BigRational::from_integer(n * num::pow(ten, scale as usize))
        } else {
            BigRational::new(n, num::pow(ten, (-scale) as usize))
        };
        Some(Num::from_rational(q))
    }

    pub fn exact(&self) -> Option<&BigRational> {
        self.exact.as_ref()
    }

    /// The named constant, when the value is exactly that constant.
    pub fn name(&self) -> Option<Named> {
        self.name.as_ref().filter(|(s, _)| s.is_one()).map(|(_, n)| *n)
    }

    /// `(scale, name)` with `value = scale·name`.
    pub fn symbolic(&self) -> Option<(&BigRational, Named)> {
        self.name.as_ref().map(|(s, n)| (s, *n))
    }

    fn scaled(q: BigRational, n: Named, approx: NumHp) -> Num {
        if q.is_zero() {
            return Num::zero();
        }
        Num { exact: None, approx, name: Some((q, n)) }
    }

    pub fn approx(&self) -> &NumHp {
        &self.approx
    }

    pub fn to_f64(&self) -> f64 {
        match &self.exact {
            Some(q) => q.to_f64().unwrap_or(f64::NAN),
            None => self.approx.to_f64(),
        }
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    pub fn is_zero(&self) -> bool {
        match &self.exact {
            Some(q) => q.is_zero(),
            None => self.approx.to_f64().abs() < EQ_REL,
        }
    }

    pub fn is_one(&self) -> bool {
        match &self.exact {
            Some(q) => q.is_one(),
            None => (self.approx.clone() - NumHp::one()).to_f64().abs() < EQ_REL,
        }
    }

    pub fn signum(&self) -> i32 {
        if self.is_zero() {
            0
        } else if self.to_f64() > 0.0 || self.approx.signum_i() > 0 {
            1
        } else {
            -1
        }
    }

    pub fn is_integer(&self) -> bool {
        self.exact.as_ref().map(|q| q.is_integer()).unwrap_or(false)
    }

    pub fn as_integer(&self) -> Option<i64> {
        self.exact.as_ref().filter(|q| q.is_integer()).and_then(|q| q.to_integer().to_i64())
    }

    fn lift(exact: Option<BigRational>, approx: NumHp) -> Num {
        match exact {
            Some(q) => Num::from_rational(q),
            None => Num { exact: None, approx, name: None },
        }
    }

    pub fn add(&self, o: &Num) -> Num {
        let e = match (&self.exact, &o.exact) {
            (Some(a), Some(b)) => Some(a + b),
            (Some(a), _) if a.is_zero() => return o.clone(),
            (_, Some(b)) if b.is_zero() => return self.clone(),
            _ => None,
        };
        let approx = self.approx.clone() + o.approx.clone();
        if let (Some((s1, n1)), Some((s2, n2))) = (&self.name, &o.name) {
            if n1 == n2 {
                return Num::scaled(s1 + s2, *n1, approx);
            }
        }
        Num::lift(e, approx)
    }

    pub fn sub(&self, o: &Num) -> Num {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Num) -> Num {
        let e = match (&self.exact, &o.exact) {
            (Some(a), Some(b)) => Some(a * b),
            (Some(a), _) | (_, Some(a)) if a.is_zero() => Some(BigRational::zero()),
            _ => None,
        };
        let approx = self.approx.clone() * o.approx.clone();
        match (&self.exact, &o.name, &o.exact, &self.name) {
            (Some(q), Some((s, n)), _, _) | (_, _, Some(q), Some((s, n))) if e.is_none() => {
                Num::scaled(q * s, *n, approx)
            }
            _ => Num::lift(e, approx),
        }
    }

    pub fn div(&self, o: &Num) -> Option<Num> {
        if o.is_zero() {
            return None;
        }
        let e = match (&self.exact, &o.exact) {
            (Some(a), Some(b)) => Some(a / b),
            (Some(a), _) if a.is_zero() => Some(BigRational::zero()),
            _ => None,
        };
        let approx = self.approx.clone() / o.approx.clone();
        match (&self.name, &o.exact, &self.name, &o.name) {
            (Some((s, n)), Some(q), _, _) => return Some(Num::scaled(s / q, *n, approx)),
            (_, _, Some((s1, n1)), Some((s2, n2))) if n1 == n2 => {
                return Some(Num::from_rational(s1 / s2));
            }
            _ => {}
        }
        Some(Num::lift(e, approx))
    }

    pub fn neg(&self) -> Num {
        Num {
            exact: self.exact.as_ref().map(|q| -q),
            approx: -self.approx.clone(),
            name: self.name.as_ref().map(|(s, n)| (-s, *n)),
        }
    }

    pub fn abs(&self) -> Num {
        if self.signum() < 0 {
            self.neg()
        } else {
            self.clone()
        }
    }

    /// `self^r` for rational `r`; `None` outside the real domain.
    pub fn pow_rational(&self, r: &BigRational) -> Option<Num> {
        if r.is_integer() {
            let n = r.to_integer().to_i64()?;
            if n < 0 && self.is_zero() {
                return None;
            }
            let e = self.exact.as_ref().map(|q| {
                let p = num::pow(q.clone(), n.unsigned_abs() as usize);
                if n < 0 {
                    p.recip()
                } else {
                    p
                }
            });
            return Some(Num::lift(e, self.approx.powi(n)));
        }
        match self.signum() {
            0 => return if r.is_positive() { Some(Num::zero()) } else { None },
            s if s < 0 => return None,
            _ => {}
        }
        if let Some(q) = &self.exact {
            if let Some(root) = exact_root(q, r.denom()) {
                let p = r.numer().to_i64()?;
                let v = num::pow(root, p.unsigned_abs() as usize);
                return Some(Num::from_rational(if p < 0 { v.recip() } else { v }));
            }
        }
        let ex = NumHp::from_ratio(r);
        Some(Num::from_real(self.approx.pow(&ex)))
    }

    /// `self^e` for a general real exponent; requires `self > 0`.
    pub fn pow_num(&self, e: &Num) -> Option<Num> {
        if let Some(q) = &e.exact {
            return self.pow_rational(q);
        }
        if self.signum() <= 0 {
            return None;
        }
        if self.is_one() {
            return Some(Num::one());
        }
        Some(Num::from_real(self.approx.pow(&e.approx)))
    }

    pub fn ln(&self) -> Option<Num> {
        if self.signum() <= 0 {
            return None;
        }
        if self.is_one() && self.is_exact() {
            return Some(Num::zero());
        }
        if self.name() == Some(Named::E) {
            return Some(Num::one());
        }
        Some(Num::from_real(self.approx.ln()))
    }

    pub fn exp(&self) -> Num {
        if self.is_exact() && self.is_zero() {
            return Num::one();
        }
        if self.is_exact() && self.is_one() {
            return Num::named(Named::E);
        }
        Num::from_real(self.approx.exp())
    }

    pub fn cmp_value(&self, o: &Num) -> Ordering {
        if let (Some(a), Some(b)) = (&self.exact, &o.exact) {
            return a.cmp(b);
        }
        if self == o {
            return Ordering::Equal;
        }
        if self.approx < o.approx {
            Ordering::Less
        } else {
            Ordering::Greater
        }
    }

    pub fn max_abs_f64(&self, o: &Num) -> f64 {
        self.to_f64().abs().max(o.to_f64().abs()).max(1.0)
    }

    /// Decimal digits used when a non-rational constant is printed.
    pub fn to_decimal(&self, digits: usize) -> String {
        self.approx.to_decimal(digits)
    }
}

/// Exact `q^(1/d)` when it is rational.
fn exact_root(q: &BigRational, d: &BigInt) -> Option<BigRational> {
    let d = d.to_u32()?;
    if q.is_negative() {
        return None;
    }
    let n = q.numer().nth_root(d);
    let m = q.denom().nth_root(d);
    if num::pow(n.clone(), d as usize) == *q.numer() && num::pow(m.clone(), d as usize) == *q.denom()
    {
        Some(BigRational::new(n, m))
    } else {
        None
    }
}

impl PartialEq for Num {
    fn eq(&self, o: &Num) -> bool {
        if let (Some(a), Some(b)) = (&self.exact, &o.exact) {
            return a == b;
        }
        let diff = (self.approx.clone() - o.approx.clone()).to_f64().abs();
        diff <= EQ_REL * self.max_abs_f64(o)
    }
}

impl PartialOrd for Num {
    fn partial_cmp(&self, o: &Num) -> Option<Ordering> {
        Some(self.cmp_value(o))
    }
}

impl fmt::Debug for Num {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Num {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some((s, n)) = &self.name {
            return if s.is_one() {
                f.write_str(n.symbol())
            } else if *s == -BigRational::one() {
                write!(f, "-{}", n.symbol())
            } else if s.is_integer() {
                write!(f, "{}*{}", s.numer(), n.symbol())
            } else {
                write!(f, "{}/{}*{}", s.numer(), s.denom(), n.symbol())
            };
        }
        match &self.exact {
            Some(q) if q.is_integer() => write!(f, "{}", q.numer()),
            Some(q) => write!(f, "{}/{}", q.numer(), q.denom()),
            None => f.write_str(&self.to_decimal(90)),
        }
    }
}

impl From<i64> for Num {
    fn from(i: i64) -> Self {
        Num::from_int(i)
    }
}

impl From<BigRational> for Num {
    fn from(q: BigRational) -> Self {
        Num::from_rational(q)
    }
}

/// Best rational approximation with denominator at most `max_den`
/// (continued-fraction convergents and semiconvergents).
pub fn best_rational(x: &NumHp, max_den: u64) -> Option<BigRational> {
    let v = x.clone();
    let sign = if v.signum_i() < 0 { -1 } else { 1 };
    let mut y = v.abs();
    let (mut p0, mut q0, mut p1, mut q1) =
        (BigInt::zero(), BigInt::one(), BigInt::one(), BigInt::zero());
    let max = BigInt::from(max_den);
    let mut best: Option<BigRational> = None;
    for _ in 0..96 {
        let a = y.floor_int()?;
        let p2 = &a * &p1 + &p0;
        let q2 = &a * &q1 + &q0;
        if q2 > max {
            // Semiconvergent between the last two convergents.
            let kmax = (&max - &q0) / &q1;
            if kmax > BigInt::zero() {
                let ps = &kmax * &p1 + &p0;
                let qs = &kmax * &q1 + &q0;
                let cand = BigRational::new(ps, qs);
                let cur = best.clone().unwrap_or_else(|| cand.clone());
                let x = x.abs();
                let dc = (NumHp::from_ratio(&cand) - x.clone()).abs();
                let db = (NumHp::from_ratio(&cur) - x).abs();
                if dc < db {
                    best = Some(cand);
                }
            }
            break;
        }
        best = Some(BigRational::new(p2.clone(), q2.clone()));
        p0 = std::mem::replace(&mut p1, p2);
        q0 = std::mem::replace(&mut q1, q2);
        let frac = y.clone() - NumHp::from_bigint(&a);
        if frac.is_zero_value() || frac.to_f64() < 1e-90 {
            break;
        }
        y = NumHp::one() / frac;
    }
    best.map(|b| if sign < 0 { -b } else { b })
}
