//! Generalized monomials `t^a (log t)^b (log log t)^c exp(Σ κ (log t)^γ)`
//! with `0 < γ < 1`, and finite sums of them.
//!
//! Growth of a monomial is decided lexicographically: the power of `t`
//! first, then the sub-polynomial exponential part (largest `γ` first),
//! then the power of `log t`, then the power of `log log t`.

use std::cmp::Ordering;

use num::{BigRational, One, Zero};

use super::expr::Expr;
use super::num::Num;

const MAX_TERMS: usize = 512;

#[derive(Clone, Debug, PartialEq)]
pub struct Monomial {
    pub t: Num,
    pub log: Num,
    pub loglog: Num,
    /// `(γ, κ)` pairs, `γ` strictly decreasing in `(0,1)`, `κ ≠ 0`.
    pub exp: Vec<(Num, Num)>,
}

impl Monomial {
    pub fn one() -> Self {
        Monomial { t: Num::zero(), log: Num::zero(), loglog: Num::zero(), exp: Vec::new() }
    }

    pub fn power(a: Num) -> Self {
        Monomial { t: a, ..Monomial::one() }
    }

    pub fn log_power(b: Num) -> Self {
        Monomial { log: b, ..Monomial::one() }
    }

    pub fn is_one(&self) -> bool {
        self.t.is_zero() && self.log.is_zero() && self.loglog.is_zero() && self.exp.is_empty()
    }

    /// True when the monomial is `t^n` for an integer `n ≥ 0`.
    pub fn polynomial_degree(&self) -> Option<u32> {
        if self.log.is_zero() && self.loglog.is_zero() && self.exp.is_empty() {
            self.t.as_integer().filter(|n| *n >= 0).map(|n| n as u32)
        } else {
            None
        }
    }

    pub fn mul(&self, o: &Monomial) -> Monomial {
        let mut exp = self.exp.clone();
        for (g, k) in &o.exp {
            match exp.iter_mut().find(|(g2, _)| g2 == g) {
                Some((_, k2)) => *k2 = k2.add(k),
                None => exp.push((g.clone(), k.clone())),
            }
        }
        exp.retain(|(_, k)| !k.is_zero());
        exp.sort_by(|a, b| b.0.cmp_value(&a.0));
        Monomial {
            t: self.t.add(&o.t),
            log: self.log.add(&o.log),
            loglog: self.loglog.add(&o.loglog),
            exp,
        }
    }

    pub fn pow(&self, r: &Num) -> Monomial {
        let mut exp: Vec<(Num, Num)> =
            self.exp.iter().map(|(g, k)| (g.clone(), k.mul(r))).collect();
        exp.retain(|(_, k)| !k.is_zero());
        Monomial {
            t: self.t.mul(r),
            log: self.log.mul(r),
            loglog: self.loglog.mul(r),
            exp,
        }
    }

    pub fn inv(&self) -> Monomial {
        self.pow(&Num::from_int(-1))
    }

    /// Sign of the limit of `log` of the monomial: `+1` if it tends to
    /// infinity, `-1` if it tends to zero, `0` if it is identically one.
    pub fn growth_sign(&self) -> i32 {
        let s = self.t.signum();
        if s != 0 {
            return s;
        }
        if let Some((_, k)) = self.exp.first() {
            return k.signum();
        }
        let s = self.log.signum();
        if s != 0 {
            return s;
        }
        self.loglog.signum()
    }

    /// Growth comparison: `Greater` means `self/o → ∞`.
    pub fn cmp_growth(&self, o: &Monomial) -> Ordering {
        match self.mul(&o.inv()).growth_sign() {
            1 => Ordering::Greater,
            -1 => Ordering::Less,
            _ => Ordering::Equal,
        }
    }

    pub fn derivative(&self, c: &Num) -> MonoSum {
        let base = Monomial { t: self.t.sub(&Num::one()), ..self.clone() };
        let mut terms = vec![(c.mul(&self.t), base.clone())];
        let m1 = Monomial { log: self.log.sub(&Num::one()), ..base.clone() };
        terms.push((c.mul(&self.log), m1.clone()));
        terms.push((
            c.mul(&self.loglog),
            Monomial { loglog: self.loglog.sub(&Num::one()), ..m1.clone() },
        ));
        for (g, k) in &self.exp {
            let m = Monomial { log: base.log.add(g).sub(&Num::one()), ..base.clone() };
            terms.push((c.mul(k).mul(g), m));
        }
        MonoSum::from_terms(terms)
    }

    /// `log(c·M)` as a sum of monomials; fails for a `log log` factor.
    pub fn log_of(&self, c: &Num) -> Option<MonoSum> {
        if !self.loglog.is_zero() {
            return None;
        }
        let mut terms = vec![(c.ln()?, Monomial::one())];
        terms.push((self.t.clone(), Monomial::log_power(Num::one())));
        terms.push((
            self.log.clone(),
            Monomial { loglog: Num::one(), ..Monomial::one() },
        ));
        for (g, k) in &self.exp {
            terms.push((k.clone(), Monomial::log_power(g.clone())));
        }
        Some(MonoSum::from_terms(terms))
    }

    /// Renders the monomial (coefficient one) as an expression.
    pub fn to_expr(&self) -> Expr {
        let mut factors: Vec<Expr> = Vec::new();
        if !self.t.is_zero() {
            factors.push(power_expr(Expr::Var, &self.t));
        }
        if !self.log.is_zero() {
            factors.push(power_expr(Expr::log(Expr::Var), &self.log));
        }
        if !self.loglog.is_zero() {
            factors.push(power_expr(Expr::log(Expr::log(Expr::Var)), &self.loglog));
        }
        if !self.exp.is_empty() {
            let mut inner: Option<Expr> = None;
            for (g, k) in &self.exp {
                let term = scaled(k, power_expr(Expr::log(Expr::Var), g));
                inner = Some(match inner {
                    None => term,
                    Some(acc) => join_sum(acc, k, power_expr(Expr::log(Expr::Var), g)),
                });
            }
            factors.push(Expr::exp(inner.expect("nonempty")));
        }
        let mut it = factors.into_iter();
        match it.next() {
            None => Expr::Const(Num::one()),
            Some(first) => it.fold(first, Expr::mul),
        }
    }
}

fn power_expr(base: Expr, x: &Num) -> Expr {
    if x.is_one() && x.is_exact() {
        return base;
    }
    match x.exact() {
        Some(q) => Expr::Pow(Box::new(base), q.clone()),
        None => Expr::exp(Expr::mul(Expr::Const(x.clone()), Expr::log(base))),
    }
}

fn scaled(c: &Num, m: Expr) -> Expr {
    if c.is_one() {
        m
    } else if c.neg().is_one() {
        Expr::Neg(Box::new(m))
    } else if matches!(m, Expr::Const(_)) {
        Expr::Const(c.clone())
    } else {
        Expr::mul(Expr::Const(c.clone()), m)
    }
}

fn join_sum(acc: Expr, c: &Num, m: Expr) -> Expr {
    if c.signum() < 0 {
        Expr::sub(acc, scaled(&c.neg(), m))
    } else {
        Expr::add(acc, scaled(c, m))
    }
}

/// Finite sum of monomials with nonzero coefficients, sorted by
/// decreasing growth; distinct monomials have distinct growth.
#[derive(Clone, Debug, PartialEq)]
pub struct MonoSum {
    pub terms: Vec<(Num, Monomial)>,
}

impl MonoSum {
    pub fn zero() -> Self {
        MonoSum { terms: Vec::new() }
    }

    pub fn constant(c: Num) -> Self {
        MonoSum::from_terms(vec![(c, Monomial::one())])
    }

    pub fn monomial(c: Num, m: Monomial) -> Self {
        MonoSum::from_terms(vec![(c, m)])
    }

    pub fn from_terms(mut terms: Vec<(Num, Monomial)>) -> Self {
        terms.retain(|(c, _)| !c.is_zero());
        terms.sort_by(|a, b| b.1.cmp_growth(&a.1));
        let mut out: Vec<(Num, Monomial)> = Vec::with_capacity(terms.len());
        for (c, m) in terms {
            match out.last_mut() {
                Some((c0, m0)) if m0.cmp_growth(&m) == Ordering::Equal => *c0 = c0.add(&c),
                _ => out.push((c, m)),
            }
        }
        out.retain(|(c, _)| !c.is_zero());
        MonoSum { terms: out }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn lead(&self) -> Option<&(Num, Monomial)> {
        self.terms.first()
    }

    pub fn single(&self) -> Option<&(Num, Monomial)> {
        if self.terms.len() == 1 {
            self.terms.first()
        } else {
            None
        }
    }

    pub fn add(&self, o: &MonoSum) -> MonoSum {
        let mut t = self.terms.clone();
        t.extend(o.terms.iter().cloned());
        MonoSum::from_terms(t)
    }

    pub fn neg(&self) -> MonoSum {
        MonoSum { terms: self.terms.iter().map(|(c, m)| (c.neg(), m.clone())).collect() }
    }

    pub fn scale(&self, c: &Num) -> MonoSum {
        MonoSum::from_terms(self.terms.iter().map(|(a, m)| (a.mul(c), m.clone())).collect())
    }

    pub fn mul(&self, o: &MonoSum) -> Option<MonoSum> {
        if self.terms.len() * o.terms.len() > MAX_TERMS {
            return None;
        }
        let mut t = Vec::with_capacity(self.terms.len() * o.terms.len());
        for (a, m) in &self.terms {
            for (b, n) in &o.terms {
                t.push((a.mul(b), m.mul(n)));
            }
        }
        let out = MonoSum::from_terms(t);
        (out.terms.len() <= MAX_TERMS).then_some(out)
    }

    pub fn pow_int(&self, n: u32) -> Option<MonoSum> {
        let mut acc = MonoSum::constant(Num::one());
        for _ in 0..n {
            acc = acc.mul(self)?;
        }
        Some(acc)
    }

    pub fn derivative(&self) -> MonoSum {
        let mut out = MonoSum::zero();
        for (c, m) in &self.terms {
            out = out.add(&m.derivative(c));
        }
        out
    }

    /// `exp` of the sum, when it is again a single monomial.
    pub fn exp(&self) -> Option<(Num, Monomial)> {
        let mut coef = Num::one();
        let mut mono = Monomial::one();
        let one = Num::one();
        for (c, m) in &self.terms {
            if m.is_one() {
                coef = coef.mul(&c.exp());
            } else if m.t.is_zero() && m.exp.is_empty() && m.loglog.is_zero() && m.log == one {
                mono.t = mono.t.add(c);
            } else if m.t.is_zero() && m.exp.is_empty() && m.log.is_zero() && m.loglog == one {
                mono.log = mono.log.add(c);
            } else if m.t.is_zero()
                && m.exp.is_empty()
                && m.loglog.is_zero()
                && m.log.signum() > 0
                && m.log.cmp_value(&one) == Ordering::Less
            {
                mono = mono.mul(&Monomial {
                    exp: vec![(m.log.clone(), c.clone())],
                    ..Monomial::one()
                });
            } else {
                return None;
            }
        }
        Some((coef, mono))
    }

    /// `self^r`; exact for single monomials and small integer powers.
    pub fn pow(&self, r: &BigRational) -> Option<MonoSum> {
        if self.is_zero() {
            return if r > &BigRational::zero() { Some(MonoSum::zero()) } else { None };
        }
        if let Some((c, m)) = self.single() {
            let cr = c.pow_rational(r)?;
            return Some(MonoSum::monomial(cr, m.pow(&Num::from_rational(r.clone()))));
        }
        if r.is_integer() && r >= &BigRational::zero() && r <= &BigRational::from_integer(16.into())
        {
            let n: u32 = r.to_integer().try_into().ok()?;
            return self.pow_int(n);
        }
        None
    }

    pub fn inv(&self) -> Option<MonoSum> {
        self.pow(&-BigRational::one())
    }

    pub fn to_expr(&self) -> Expr {
        let mut acc: Option<Expr> = None;
        for (c, m) in &self.terms {
            let me = m.to_expr();
            acc = Some(match acc {
                None => {
                    if m.is_one() {
                        Expr::Const(c.clone())
                    } else {
                        scaled(c, me)
                    }
                }
                Some(a) => {
                    if m.is_one() {
                        if c.signum() < 0 {
                            Expr::sub(a, Expr::Const(c.neg()))
                        } else {
                            Expr::add(a, Expr::Const(c.clone()))
                        }
                    } else {
                        join_sum(a, c, me)
                    }
                }
            });
        }
        acc.unwrap_or_else(|| Expr::Const(Num::zero()))
    }
}

/// Exact conversion of an expression to a sum of monomials, if it has one.
pub fn to_monosum(e: &Expr) -> Option<MonoSum> {
    match e {
        Expr::Var => Some(MonoSum::monomial(Num::one(), Monomial::power(Num::one()))),
        Expr::Const(c) => Some(MonoSum::constant(c.clone())),
        Expr::Add(a, b) => Some(to_monosum(a)?.add(&to_monosum(b)?)),
        Expr::Sub(a, b) => Some(to_monosum(a)?.add(&to_monosum(b)?.neg())),
        Expr::Neg(a) => Some(to_monosum(a)?.neg()),
        Expr::Mul(a, b) => to_monosum(a)?.mul(&to_monosum(b)?),
        Expr::Div(a, b) => {
            let den = to_monosum(b)?;
            let (c, m) = den.single()?;
            let inv = MonoSum::monomial(Num::one().div(c)?, m.inv());
            to_monosum(a)?.mul(&inv)
        }
        Expr::Pow(a, r) => to_monosum(a)?.pow(r),
        Expr::Log(a) => {
            let inner = to_monosum(a)?;
            let (c, m) = inner.single()?;
            m.log_of(c)
        }
        Expr::Exp(a) => {
            let (c, m) = to_monosum(a)?.exp()?;
            Some(MonoSum::monomial(c, m))
        }
    }
}

/// Leading asymptotic term of an expression.
#[derive(Clone, Debug, PartialEq)]
pub enum Asym {
    Zero,
    Lead(Num, Monomial),
}

impl Asym {
    pub fn mul(&self, o: &Asym) -> Asym {
        match (self, o) {
            (Asym::Lead(a, m), Asym::Lead(b, n)) => Asym::Lead(a.mul(b), m.mul(n)),
            _ => Asym::Zero,
        }
    }
}

fn asym_of_sum(s: &MonoSum) -> Asym {
    match s.lead() {
        None => Asym::Zero,
        Some((c, m)) => Asym::Lead(c.clone(), m.clone()),
    }
}

fn asym_add(a: Asym, b: Asym) -> Option<Asym> {
    match (a, b) {
        (Asym::Zero, x) | (x, Asym::Zero) => Some(x),
        (Asym::Lead(c1, m1), Asym::Lead(c2, m2)) => match m1.cmp_growth(&m2) {
            Ordering::Greater => Some(Asym::Lead(c1, m1)),
            Ordering::Less => Some(Asym::Lead(c2, m2)),
            Ordering::Equal => {
                let c = c1.add(&c2);
                // Cancellation of leading terms needs the next order.
                (!c.is_zero()).then_some(Asym::Lead(c, m1))
            }
        },
    }
}

/// Leading term of `e` at `+∞`, derived structurally; `None` when the
/// structural rules cannot decide it.
pub fn asym_lead(e: &Expr) -> Option<Asym> {
    if let Some(s) = to_monosum(e) {
        return Some(asym_of_sum(&s));
    }
    match e {
        Expr::Var | Expr::Const(_) => unreachable!("handled by to_monosum"),
        Expr::Add(a, b) => asym_add(asym_lead(a)?, asym_lead(b)?),
        Expr::Sub(a, b) => asym_add(asym_lead(a)?, neg(asym_lead(b)?)),
        Expr::Neg(a) => Some(neg(asym_lead(a)?)),
        Expr::Mul(a, b) => Some(asym_lead(a)?.mul(&asym_lead(b)?)),
        Expr::Div(a, b) => match asym_lead(b)? {
            Asym::Zero => None,
            Asym::Lead(c, m) => Some(asym_lead(a)?.mul(&Asym::Lead(Num::one().div(&c)?, m.inv()))),
        },
        Expr::Pow(a, r) => match asym_lead(a)? {
            Asym::Zero => (r > &BigRational::zero()).then_some(Asym::Zero),
            Asym::Lead(c, m) => {
                Some(Asym::Lead(c.pow_rational(r)?, m.pow(&Num::from_rational(r.clone()))))
            }
        },
        Expr::Log(a) => match asym_lead(a)? {
            Asym::Zero => None,
            Asym::Lead(c, m) => {
                if c.signum() <= 0 {
                    return None;
                }
                if m.is_one() {
                    // log(c + o(1)) = log c + o(1).
                    let l = c.ln()?;
                    return (!l.is_zero()).then_some(Asym::Lead(l, Monomial::one()));
                }
                let dominant_known = !m.t.is_zero() || !m.exp.is_empty() || !m.log.is_zero();
                if !m.loglog.is_zero() && !dominant_known {
                    return None;
                }
                let stripped = Monomial { loglog: Num::zero(), ..m.clone() };
                let s = stripped.log_of(&c)?;
                let lead = s.terms.iter().find(|(_, mm)| !mm.is_one()).cloned();
                lead.map(|(k, mm)| Asym::Lead(k, mm))
            }
        },
        Expr::Exp(_) => None,
    }
}

fn neg(a: Asym) -> Asym {
    match a {
        Asym::Zero => Asym::Zero,
        Asym::Lead(c, m) => Asym::Lead(c.neg(), m),
    }
}
