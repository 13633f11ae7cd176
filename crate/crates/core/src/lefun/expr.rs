//! Expression trees for logarithmico-exponential functions of `t`.

use std::fmt;

use num::{BigRational, One, Signed, ToPrimitive, Zero};

use super::monomial::to_monosum;
use super::num::{Named, Num};
use super::LeError;
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Var,
    Const(Num),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, BigRational),
    Exp(Box<Expr>),
    Log(Box<Expr>),
}

impl Expr {
    pub fn int(i: i64) -> Expr {
        Expr::Const(Num::from_int(i))
    }
    pub fn add(a: Expr, b: Expr) -> Expr {
        Expr::Add(Box::new(a), Box::new(b))
    }
    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::Sub(Box::new(a), Box::new(b))
    }
    pub fn mul(a: Expr, b: Expr) -> Expr {
        Expr::Mul(Box::new(a), Box::new(b))
    }
    pub fn div(a: Expr, b: Expr) -> Expr {
        Expr::Div(Box::new(a), Box::new(b))
    }
    pub fn pow(a: Expr, n: i64, d: i64) -> Expr {
        Expr::Pow(Box::new(a), BigRational::new(n.into(), d.into()))
    }
    pub fn exp(a: Expr) -> Expr {
        Expr::Exp(Box::new(a))
    }
    pub fn log(a: Expr) -> Expr {
        Expr::Log(Box::new(a))
    }

    pub fn size(&self) -> usize {
        match self {
            Expr::Var | Expr::Const(_) => 1,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                1 + a.size() + b.size()
            }
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Exp(a) | Expr::Log(a) => 1 + a.size(),
        }
    }

    fn as_const(&self) -> Option<&Num> {
        match self {
            Expr::Const(c) => Some(c),
            _ => None,
        }
    }

    /// Symbolic derivative, not simplified.
    fn raw_derivative(&self) -> Expr {
        use Expr::*;
        match self {
            Var => Expr::int(1),
            Const(_) => Expr::int(0),
            Add(a, b) => Expr::add(a.raw_derivative(), b.raw_derivative()),
            Sub(a, b) => Expr::sub(a.raw_derivative(), b.raw_derivative()),
            Neg(a) => Neg(Box::new(a.raw_derivative())),
            Mul(a, b) => Expr::add(
                Expr::mul(a.raw_derivative(), (**b).clone()),
                Expr::mul((**a).clone(), b.raw_derivative()),
            ),
            Div(a, b) => Expr::div(
                Expr::sub(
                    Expr::mul(a.raw_derivative(), (**b).clone()),
                    Expr::mul((**a).clone(), b.raw_derivative()),
                ),
                Pow(b.clone(), BigRational::from_integer(2.into())),
            ),
            Pow(a, r) => Expr::mul(
                Expr::mul(
                    Const(Num::from_rational(r.clone())),
                    Pow(a.clone(), r - BigRational::one()),
                ),
                a.raw_derivative(),
            ),
            Exp(a) => Expr::mul(self.clone(), a.raw_derivative()),
            Log(a) => Expr::div(a.raw_derivative(), (**a).clone()),
        }
    }

    /// Canonical form. Expressions with a monomial-sum normal form are
    /// rebuilt from it; everything else is folded bottom-up.
    pub fn simplify(&self) -> Expr {
        if let Some(s) = to_monosum(self) {
            return s.to_expr();
        }
        use Expr::*;
        let out = match self {
            Var | Const(_) => self.clone(),
            Add(a, b) => {
                let (a, b) = (a.simplify(), b.simplify());
                match (a.as_const(), b.as_const()) {
                    (Some(x), _) if x.is_zero() => b,
                    (_, Some(y)) if y.is_zero() => a,
                    _ => Expr::add(a, b),
                }
            }
            Sub(a, b) => {
                let (a, b) = (a.simplify(), b.simplify());
                match b.as_const() {
                    Some(y) if y.is_zero() => a,
                    _ if a == b => Expr::int(0),
                    _ => Expr::sub(a, b),
                }
            }
            Mul(a, b) => {
                let (a, b) = (a.simplify(), b.simplify());
                match (a.as_const(), b.as_const()) {
                    (Some(x), _) | (_, Some(x)) if x.is_zero() => Expr::int(0),
                    (Some(x), _) if x.is_one() => b,
                    (_, Some(y)) if y.is_one() => a,
                    _ => Expr::mul(a, b),
                }
            }
            Div(a, b) => {
                let (a, b) = (a.simplify(), b.simplify());
                match (a.as_const(), b.as_const()) {
                    (Some(x), _) if x.is_zero() => Expr::int(0),
                    (_, Some(y)) if y.is_one() => a,
                    _ if a == b => Expr::int(1),
                    _ => Expr::div(a, b),
                }
            }
            Neg(a) => match a.simplify() {
                Const(c) => Const(c.neg()),
                Neg(inner) => *inner,
                other => Neg(Box::new(other)),
            },
            Pow(a, r) => {
                let a = a.simplify();
                if r.is_zero() {
                    Expr::int(1)
                } else if r.is_one() {
                    a
                } else if let Pow(inner, r2) = &a {
                    if r.is_integer() {
                        Pow(inner.clone(), r * r2)
                    } else {
                        Pow(Box::new(a.clone()), r.clone())
                    }
                } else {
                    Pow(Box::new(a), r.clone())
                }
            }
            Exp(a) => match a.simplify() {
                Log(inner) => *inner,
                other => Exp(Box::new(other)),
            },
            Log(a) => match a.simplify() {
                Exp(inner) => *inner,
                other => Log(Box::new(other)),
            },
        };
        match to_monosum(&out) {
            Some(s) => s.to_expr(),
            None => out,
        }
    }

    pub fn derivative(&self, k: u32) -> Expr {
        if let Some(mut s) = to_monosum(self) {
            for _ in 0..k {
                s = s.derivative();
            }
            return s.to_expr();
        }
        let mut e = self.simplify();
        for _ in 0..k {
            e = e.raw_derivative().simplify();
        }
        e
    }

    /// Evaluation in the scalar type `S`.
    pub fn eval<S: Real>(&self, t: &S) -> Result<S, LeError> {
        use Expr::*;
        let v = match self {
            Var => t.clone(),
            Const(c) => num_to_real::<S>(c),
            Add(a, b) => a.eval(t)? + b.eval(t)?,
            Sub(a, b) => a.eval(t)? - b.eval(t)?,
            Mul(a, b) => a.eval(t)? * b.eval(t)?,
            Neg(a) => -a.eval(t)?,
            Div(a, b) => {
                let d = b.eval(t)?;
                if d.is_zero() {
                    return Err(domain(t, "division by zero"));
                }
                a.eval(t)? / d
            }
            Pow(a, r) => {
                let x = a.eval(t)?;
                if r.is_integer() {
                    let n = r.to_integer().to_i64().ok_or_else(|| domain(t, "exponent"))?;
                    if n < 0 && x.is_zero() {
                        return Err(domain(t, "zero to a negative power"));
                    }
                    x.powi(n)
                } else if x > S::zero() {
                    if *r == BigRational::new(1.into(), 2.into()) {
                        x.sqrt()
                    } else {
                        x.pow(&S::from_ratio(r))
                    }
                } else if x.is_zero() && r.is_positive() && matches!(**a, Var) {
                    S::zero()
                } else {
                    return Err(domain(t, "nonpositive base of a fractional power"));
                }
            }
            Exp(a) => a.eval(t)?.exp(),
            Log(a) => {
                let x = a.eval(t)?;
                if x <= S::zero() {
                    return Err(domain(t, "nonpositive logarithm argument"));
                }
                x.ln()
            }
        };
        Ok(v)
    }

    /// `f64` evaluation with a running absolute error bound.
    pub fn eval_f64_err(&self, t: f64) -> Result<(f64, f64), LeError> {
        use Expr::*;
        const U: f64 = f64::EPSILON;
        let ulp = |v: f64| 2.0 * U * v.abs();
        let r = match self {
            Var => (t, 0.0),
            Const(c) => {
                let v = c.to_f64();
                (v, if c.is_exact() && v.fract() == 0.0 && v.abs() < 9e15 { 0.0 } else { ulp(v) })
            }
            Add(a, b) | Sub(a, b) => {
                let (x, ex) = a.eval_f64_err(t)?;
                let (y, ey) = b.eval_f64_err(t)?;
                let v = if matches!(self, Add(..)) { x + y } else { x - y };
                (v, ex + ey + ulp(v))
            }
            Mul(a, b) => {
                let (x, ex) = a.eval_f64_err(t)?;
                let (y, ey) = b.eval_f64_err(t)?;
                let v = x * y;
                (v, x.abs() * ey + y.abs() * ex + ex * ey + ulp(v))
            }
            Div(a, b) => {
                let (x, ex) = a.eval_f64_err(t)?;
                let (y, ey) = b.eval_f64_err(t)?;
                if y.abs() <= ey {
                    return Err(domain(&t, "division by a value indistinguishable from zero"));
                }
                let v = x / y;
                (v, (ex + v.abs() * ey) / (y.abs() - ey) + ulp(v))
            }
            Neg(a) => {
                let (x, ex) = a.eval_f64_err(t)?;
                (-x, ex)
            }
            Pow(a, r) => {
                let (x, ex) = a.eval_f64_err(t)?;
                let rf = r.to_f64().unwrap_or(f64::NAN);
                if r.is_integer() {
                    let n = rf as i32;
                    let v = x.powi(n);
                    let rel = if x != 0.0 { ex / x.abs() } else { 0.0 };
                    (v, v.abs() * (rf.abs() * rel * 1.01 + (rf.abs() + 1.0) * U) + ulp(v))
                } else if x > ex {
                    let v = x.powf(rf);
                    (v, v.abs() * rf.abs() * (ex / (x - ex)) * 1.01 + 2.0 * ulp(v))
                } else if x == 0.0 && ex == 0.0 && rf > 0.0 {
                    (0.0, 0.0)
                } else {
                    return Err(domain(&t, "nonpositive base of a fractional power"));
                }
            }
            Exp(a) => {
                let (x, ex) = a.eval_f64_err(t)?;
                let v = x.exp();
                (v, v * (ex.exp_m1()).abs() + 2.0 * ulp(v))
            }
            Log(a) => {
                let (x, ex) = a.eval_f64_err(t)?;
                if x <= ex {
                    return Err(domain(&t, "nonpositive logarithm argument"));
                }
                let v = x.ln();
                (v, ex / (x - ex) + 2.0 * ulp(v) + U)
            }
        };
        Ok(r)
    }

    /// Exact value at a rational point, when every operation stays rational.
    pub fn eval_exact(&self, t: &BigRational) -> Option<BigRational> {
        use Expr::*;
        match self {
            Var => Some(t.clone()),
            Const(c) => c.exact().cloned(),
            Add(a, b) => Some(a.eval_exact(t)? + b.eval_exact(t)?),
            Sub(a, b) => Some(a.eval_exact(t)? - b.eval_exact(t)?),
            Mul(a, b) => Some(a.eval_exact(t)? * b.eval_exact(t)?),
            Div(a, b) => {
                let d = b.eval_exact(t)?;
                (!d.is_zero()).then(|| a.eval_exact(t)).flatten().map(|n| n / d)
            }
            Neg(a) => Some(-a.eval_exact(t)?),
            Pow(a, r) => {
                let x = Num::from_rational(a.eval_exact(t)?);
                x.pow_rational(r)?.exact().cloned()
            }
            Exp(a) => {
                let x = a.eval_exact(t)?;
                x.is_zero().then(BigRational::one)
            }
            Log(a) => {
                let x = a.eval_exact(t)?;
                x.is_one().then(BigRational::zero)
            }
        }
    }
}

fn domain<S: Real>(t: &S, reason: &str) -> LeError {
    LeError::Domain { t: t.to_f64(), reason: reason.to_string() }
}

pub fn num_to_real<S: Real>(c: &Num) -> S {
    if let Some(q) = c.exact() {
        return S::from_ratio(q);
    }
    match c.symbolic() {
        Some((s, n)) => {
            let v = match n {
                Named::Pi => S::pi(),
                Named::E => S::euler(),
                Named::Sqrt2 => S::from_i64(2).sqrt(),
            };
            if s.is_one() {
                v
            } else {
                S::from_ratio(s) * v
            }
        }
        None => S::from_big(c.approx().inner()),
    }
}

const PREC_SUM: u8 = 1;
const PREC_PROD: u8 = 2;
const PREC_NEG: u8 = 3;
const PREC_ATOM: u8 = 5;

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Add(..) | Expr::Sub(..) => PREC_SUM,
        Expr::Mul(..) | Expr::Div(..) => PREC_PROD,
        Expr::Neg(_) => PREC_NEG,
        Expr::Const(c) => {
            if c.signum() < 0 {
                PREC_NEG
            } else if c.exact().map(|q| !q.is_integer()).unwrap_or(false)
                || c.symbolic().map(|(s, _)| !s.is_one()).unwrap_or(false)
            {
                PREC_PROD
            } else {
                PREC_ATOM
            }
        }
        Expr::Pow(_, r) if *r == BigRational::new(1.into(), 2.into()) => PREC_ATOM,
        Expr::Pow(..) => 4,
        _ => PREC_ATOM,
    }
}

fn write_at(f: &mut fmt::Formatter<'_>, e: &Expr, min: u8) -> fmt::Result {
    if prec(e) < min {
        write!(f, "(")?;
        write!(f, "{e}")?;
        write!(f, ")")
    } else {
        write!(f, "{e}")
    }
}

fn write_rational(f: &mut fmt::Formatter<'_>, r: &BigRational) -> fmt::Result {
    if r.is_integer() && !r.is_negative() {
        write!(f, "{}", r.numer())
    } else if r.is_integer() {
        write!(f, "({})", r.numer())
    } else {
        write!(f, "({}/{})", r.numer(), r.denom())
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Var => write!(f, "t"),
            Expr::Const(c) => {
                if c.exact().is_none() && c.symbolic().is_none() && c.signum() < 0 {
                    write!(f, "-{}", c.neg())
                } else {
                    write!(f, "{c}")
                }
            }
            Expr::Add(a, b) => {
                write_at(f, a, PREC_SUM)?;
                write!(f, " + ")?;
                write_at(f, b, PREC_PROD)
            }
            Expr::Sub(a, b) => {
                write_at(f, a, PREC_SUM)?;
                write!(f, " - ")?;
                write_at(f, b, PREC_PROD)
            }
            Expr::Mul(a, b) => {
                write_at(f, a, PREC_PROD)?;
                write!(f, "*")?;
                write_at(f, b, PREC_NEG + 1)
            }
            Expr::Div(a, b) => {
                write_at(f, a, PREC_PROD)?;
                write!(f, "/")?;
                write_at(f, b, PREC_NEG + 1)
            }
            Expr::Neg(a) => {
                write!(f, "-")?;
                write_at(f, a, PREC_NEG + 1)
            }
            Expr::Pow(a, r) if *r == BigRational::new(1.into(), 2.into()) => {
                write!(f, "sqrt({a})")
            }
            Expr::Pow(a, r) => {
                write_at(f, a, PREC_ATOM)?;
                write!(f, "^")?;
                write_rational(f, r)
            }
            Expr::Exp(a) => write!(f, "exp({a})"),
            Expr::Log(a) => write!(f, "log({a})"),
        }
    }
}

/// An LE function: an expression together with the point beyond which it
/// is defined.
#[derive(Clone, Debug, PartialEq)]
pub struct LEFunction {
    pub expr: Expr,
    pub domain_floor: f64,
}

/// Candidate left endpoints of the domain, tried in increasing order.
const FLOOR_CANDIDATES: [f64; 10] = [
    0.0,
    1.0,
    std::f64::consts::E,
    3.0,
    10.0,
    15.154262241479262, // e^e
    100.0,
    1e3,
    1e4,
    1e6,
];

impl LEFunction {
    /// Wraps an expression, simplifying it and inferring its domain floor.
    pub fn new(expr: Expr) -> Result<Self, LeError> {
        let expr = expr.simplify();
        let floor = infer_domain_floor(&expr)
            .ok_or_else(|| LeError::Domain { t: f64::INFINITY, reason: format!("{expr} is undefined on every tail") })?;
        Ok(LEFunction { expr, domain_floor: floor })
    }

    pub fn parse(text: &str) -> Result<Self, crate::xcli::parse::ParseError> {
        crate::xcli::parse::parse_lefun(text)
    }

    pub fn eval<S: Real>(&self, t: &S) -> Result<S, LeError> {
        if t.to_f64() < self.domain_floor {
            return Err(LeError::Domain {
                t: t.to_f64(),
                reason: format!("below the domain floor {}", self.domain_floor),
            });
        }
        let v = self.expr.eval(t)?;
        if !v.is_finite() {
            return Err(LeError::Domain { t: t.to_f64(), reason: "non-finite value".into() });
        }
        Ok(v)
    }

    pub fn derivative(&self, k: u32) -> LEFunction {
        let expr = self.expr.derivative(k);
        let floor = infer_domain_floor(&expr).unwrap_or(self.domain_floor).max(self.domain_floor);
        LEFunction { expr, domain_floor: floor }
    }

    pub fn simplify(&self) -> LEFunction {
        LEFunction { expr: self.expr.simplify(), domain_floor: self.domain_floor }
    }
}

impl fmt::Display for LEFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.expr)
    }
}

fn defined_at(e: &Expr, t: f64) -> bool {
    e.eval::<f64>(&t).is_ok()
}

fn infer_domain_floor(e: &Expr) -> Option<f64> {
    'cand: for &c in FLOOR_CANDIDATES.iter() {
        if !defined_at(e, c) {
            continue;
        }
        let mut x = c.max(1e-3);
        while x < 1e15 {
            x *= 1.37;
            if !defined_at(e, c + x) {
                continue 'cand;
            }
        }
        return Some(c);
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Hp;
    use crate::xcli::parse::parse_expr;

    fn simp(s: &str) -> Expr {
        parse_expr(s).unwrap().simplify()
    }

    #[test]
    fn eval_examples() {
        let f = LEFunction::parse("t*log(t)").unwrap();
        let e = Hp::<256>::euler();
        let v = f.eval(&e).unwrap();
        assert!((v - e.clone()).abs().to_f64() < 1e-70);
        let g = LEFunction::parse("t^(3/2)").unwrap();
        assert_eq!(g.eval(&4.0f64).unwrap(), 8.0);
        let h = LEFunction::parse("exp(sqrt(log(t)))").unwrap();
        let v = h.eval(&e).unwrap();
        assert!((v - e).abs().to_f64() < 1e-70);
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(simp("t^(3/2)").derivative(1), simp("3/2*t^(1/2)"));
        assert_eq!(simp("t*log(t)").derivative(2), simp("1/t"));
        assert_eq!(simp("log(t)^3").derivative(1), simp("3*log(t)^2/t"));
        let f = simp("exp(t)");
        assert_eq!(f.derivative(0), f);
    }

    #[test]
    fn simplify_is_idempotent_on_non_monomial_trees() {
        for s in ["log(t^2 + 1)", "sqrt(t^2 + t)", "exp(t)/(t + 1)", "log(log(t) + 1)*t"] {
            let a = simp(s);
            assert_eq!(a.simplify(), a, "{s}");
        }
    }

    #[test]
    fn domain_floors() {
        assert_eq!(LEFunction::parse("t^(3/2)").unwrap().domain_floor, 0.0);
        assert!(LEFunction::parse("exp(sqrt(log(t)))").unwrap().domain_floor > 1.0);
        assert!(LEFunction::parse("t*log(log(t))").unwrap().domain_floor > 1.0);
    }

    #[test]
    fn exact_evaluation() {
        let g = parse_expr("t^(3/2) + log(t/4)").unwrap();
        let four = BigRational::from_integer(4.into());
        assert_eq!(g.eval_exact(&four), Some(BigRational::from_integer(8.into())));
    }
}
