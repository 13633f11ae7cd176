//! Growth comparison, growth degree and the 1-good test.

use std::cmp::Ordering;

use num::{BigInt, BigRational, Integer, One, Zero};

use super::decompose::decompose;
use super::expr::{Expr, LEFunction};
use super::monomial::{asym_lead, Asym, Monomial};
use super::num::{best_rational, Num, NumHp};
use super::LeError;
use crate::scalar::Real;

/// Sample points of the numeric tier.
pub const LADDER: [f64; 4] = [1e3, 1e6, 1e9, 1e12];

#[derive(Clone, Debug, PartialEq)]
pub enum Verdict {
    Dominates,
    Dominated,
    SameRate(Num),
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GrowthComparison {
    pub verdict: Verdict,
    /// `(t, log|f(t)/g(t)|)` on the ladder; points where either side is
    /// undefined or zero are left out.
    pub evidence: Vec<(f64, f64)>,
    /// True when the verdict came from the structural rules.
    pub structural: bool,
}

impl GrowthComparison {
    pub fn is_inconclusive(&self) -> bool {
        self.verdict == Verdict::Inconclusive
    }
}

/// `t^q` as an LE function.
pub fn power_fn(q: BigRational) -> LEFunction {
    let expr = if q.is_zero() {
        Expr::Const(Num::one())
    } else if q.is_one() {
        Expr::Var
    } else {
        Expr::Pow(Box::new(Expr::Var), q)
    };
    LEFunction { expr, domain_floor: 0.0 }
}

pub fn power_int(d: i64) -> LEFunction {
    power_fn(BigRational::from_integer(d.into()))
}

pub fn log_fn() -> LEFunction {
    LEFunction { expr: Expr::log(Expr::Var), domain_floor: 1.0 }
}

fn log_abs(e: &Expr, t: f64) -> Option<NumHp> {
    let v = e.eval::<NumHp>(&NumHp::from_f64(t)).ok()?;
    let a = v.abs();
    if a.is_zero_value() {
        return None;
    }
    Some(a.ln())
}

fn evidence(f: &Expr, g: &Expr, floor: f64) -> Vec<(f64, f64)> {
    LADDER
        .iter()
        .filter(|t| **t >= floor)
        .filter_map(|&t| Some((t, (log_abs(f, t)? - log_abs(g, t)?).to_f64())))
        .filter(|(_, v)| v.is_finite())
        .collect()
}

fn structural(f: &Expr, g: &Expr) -> Option<Verdict> {
    match (asym_lead(f)?, asym_lead(g)?) {
        (Asym::Zero, Asym::Zero) => None,
        (Asym::Zero, Asym::Lead(..)) => Some(Verdict::Dominated),
        (Asym::Lead(..), Asym::Zero) => Some(Verdict::Dominates),
        (Asym::Lead(cf, mf), Asym::Lead(cg, mg)) => Some(match mf.cmp_growth(&mg) {
            Ordering::Greater => Verdict::Dominates,
            Ordering::Less => Verdict::Dominated,
            Ordering::Equal => Verdict::SameRate(cf.div(&cg)?),
        }),
    }
}

/// Trend detection on the log-ratio ladder.
fn numeric(ev: &[(f64, f64)], f: &Expr, g: &Expr) -> Verdict {
    if ev.len() < 3 || ev.iter().any(|(_, v)| !v.is_finite()) {
        return Verdict::Inconclusive;
    }
    let d: Vec<f64> = ev.windows(2).map(|w| w[1].1 - w[0].1).collect();
    let n = d.len();
    let (last, prev) = (d[n - 1], d[n - 2]);
    if last.abs() < 1e-3 && prev.abs() < 1e-3 {
        let t = ev[ev.len() - 1].0;
        let x = NumHp::from_f64(t);
        let (Ok(a), Ok(b)) = (f.eval::<NumHp>(&x), g.eval::<NumHp>(&x)) else {
            return Verdict::Inconclusive;
        };
        if b.is_zero_value() {
            return Verdict::Inconclusive;
        }
        let r = a / b;
        return if r.is_zero_value() { Verdict::Inconclusive } else { Verdict::SameRate(Num::from_real(r)) };
    }
    let up = d.iter().all(|x| *x > 0.0);
    let down = d.iter().all(|x| *x < 0.0);
    if up && last >= 0.05 {
        Verdict::Dominates
    } else if down && last <= -0.05 {
        Verdict::Dominated
    } else {
        Verdict::Inconclusive
    }
}

/// Classifies `lim |f/g|` at infinity: structural rules first, then the
/// numeric ladder. `Inconclusive` is returned rather than guessed.
pub fn compare_growth(f: &LEFunction, g: &LEFunction) -> Result<GrowthComparison, LeError> {
    let floor = f.domain_floor.max(g.domain_floor);
    let ev = evidence(&f.expr, &g.expr, floor);
    if let Some(v) = structural(&f.expr, &g.expr) {
        return Ok(GrowthComparison { verdict: v, evidence: ev, structural: true });
    }
    if ev.is_empty() {
        return Err(LeError::Domain {
            t: LADDER[LADDER.len() - 1],
            reason: format!("neither {f} nor {g} can be sampled on the ladder"),
        });
    }
    let verdict = numeric(&ev, &f.expr, &g.expr);
    Ok(GrowthComparison { verdict, evidence: ev, structural: false })
}

fn decided(f: &LEFunction, g: &LEFunction) -> Result<Verdict, LeError> {
    let c = compare_growth(f, g)?;
    if c.is_inconclusive() {
        return Err(LeError::Inconclusive { f: f.to_string(), g: g.to_string() });
    }
    Ok(c.verdict)
}

/// Result of [`growth_degree`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GrowthDegree {
    pub d: u32,
    /// `f ≺ t^δ` for every sampled `δ`.
    pub sub_fractional: bool,
}

const SUB_FRACTIONAL_PROBES: [(i64, i64); 4] = [(1, 2), (1, 10), (1, 100), (1, 1000)];

/// The `d ≥ 0` with `t^d ⪯ f ≺ t^{d+1}`.
pub fn growth_degree(f: &LEFunction) -> Result<GrowthDegree, LeError> {
    for big_d in 0..=32i64 {
        if decided(f, &power_int(big_d))? != Verdict::Dominated {
            continue;
        }
        let d = (big_d - 1).max(0) as u32;
        let mut sub = big_d == 0;
        if d == 0 && !sub {
            sub = true;
            for (p, q) in SUB_FRACTIONAL_PROBES {
                let tp = power_fn(BigRational::new(p.into(), q.into()));
                if decided(f, &tp)? != Verdict::Dominated {
                    sub = false;
                    break;
                }
            }
        }
        return Ok(GrowthDegree { d, sub_fractional: sub });
    }
    Err(LeError::NotPolynomialGrowth(f.to_string()))
}

/// `Some(d)` when `t^d ≺ f ≺ t^{d+1}` strictly.
pub fn is_strongly_nonpolynomial(f: &LEFunction) -> Result<Option<u32>, LeError> {
    let gd = growth_degree(f)?;
    let v = decided(f, &power_int(gd.d as i64))?;
    Ok((v == Verdict::Dominates).then_some(gd.d))
}

#[derive(Clone, Debug, PartialEq)]
pub enum Witness {
    /// The non-polynomial part grows faster than `log t`; `term` is its
    /// dominant basis function.
    DominatingTerm { term: LEFunction },
    /// The non-constant polynomial part is not a real multiple of an
    /// integer polynomial, so every `a - p` with `p ∈ CZ[t]` keeps a
    /// non-constant polynomial part.
    NonIntegerPolynomial { coeffs: Vec<Num> },
    /// `p = scale·q` with `q ∈ Z[t]` stays within `O(log t)` of `a`.
    CzPolynomial { scale: Num, integer_poly: Vec<BigInt> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct OneGood {
    pub good: bool,
    pub witness: Witness,
}

/// Rational reconstruction tolerance for coefficient ratios.
pub const CZ_TOL: f64 = 1e-24;
/// Ratios further than this from every small-denominator rational are
/// irrational; in between the test is undecided.
pub const CZ_IRRATIONAL: f64 = 1e-18;
pub const CZ_MAX_DEN: u64 = 1_000_000;

fn rational_ratio(a: &Num, b: &Num) -> Result<Option<BigRational>, LeError> {
    if let (Some(x), Some(y)) = (a.exact(), b.exact()) {
        return Ok(Some(x / y));
    }
    let r = a.approx().clone() / b.approx().clone();
    let Some(q) = best_rational(&r, CZ_MAX_DEN) else {
        return Ok(None);
    };
    let err = (r.clone() - NumHp::from_ratio(&q)).abs().to_f64();
    let scale = r.abs().to_f64().max(1.0);
    if err <= CZ_TOL * scale {
        Ok(Some(q))
    } else if err > CZ_IRRATIONAL * scale {
        Ok(None)
    } else {
        Err(LeError::IrrationalityUndecided(format!("{a}/{b}")))
    }
}

/// Writes `p(t) - p(0)` as `scale·q(t)` with `q` an integer polynomial,
/// if possible.
pub fn cz_form(p: &[Num]) -> Result<Option<(Num, Vec<BigInt>)>, LeError> {
    let top = p.iter().enumerate().skip(1).rev().find(|(_, c)| !c.is_zero());
    let Some((_, top)) = top else {
        return Ok(Some((Num::zero(), Vec::new())));
    };
    let mut ratios = vec![BigRational::zero()];
    for c in &p[1..] {
        if c.is_zero() {
            ratios.push(BigRational::zero());
            continue;
        }
        match rational_ratio(c, top)? {
            Some(r) => ratios.push(r),
            None => return Ok(None),
        }
    }
    let lcm = ratios.iter().fold(BigInt::one(), |l, r| l.lcm(r.denom()));
    let ints: Vec<BigInt> = ratios.iter().map(|r| (r * &lcm).to_integer()).collect();
    let scale = top.div(&Num::from_rational(BigRational::from_integer(lcm))).expect("lcm > 0");
    Ok(Some((scale, ints)))
}

/// Condition (A): `|a(t) - p(t)| / log t → ∞` for every `p ∈ CZ[t]`.
///
/// Constant terms never matter, so only the non-constant polynomial part
/// is tested for membership in `CZ[t]`. When it is a member, the answer
/// hinges on whether the fastest non-polynomial term beats `log t`.
pub fn is_one_good(a: &LEFunction) -> Result<OneGood, LeError> {
    growth_degree(a)?;
    let dec = decompose(std::slice::from_ref(a))?;
    let p = &dec.p[0];
    let Some((scale, q)) = cz_form(p)? else {
        return Ok(OneGood { good: true, witness: Witness::NonIntegerPolynomial { coeffs: p.clone() } });
    };
    let dominant = dec.g.iter().zip(&dec.c[0]).rev().find(|(_, c)| !c.is_zero()).map(|(g, _)| g);
    if let Some(g) = dominant {
        if decided(g, &log_fn())? == Verdict::Dominates {
            return Ok(OneGood { good: true, witness: Witness::DominatingTerm { term: g.clone() } });
        }
    }
    Ok(OneGood { good: false, witness: Witness::CzPolynomial { scale, integer_poly: q } })
}

/// Leading generalized monomial of `f`, when the structural rules find it.
pub fn leading_monomial(f: &Expr) -> Option<(Num, Monomial)> {
    match asym_lead(f)? {
        Asym::Zero => None,
        Asym::Lead(c, m) => Some((c, m)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(s: &str) -> LEFunction {
        LEFunction::parse(s).unwrap()
    }

    #[test]
    fn compare_examples() {
        assert_eq!(compare_growth(&f("t*log(t)"), &f("t^(3/2)")).unwrap().verdict, Verdict::Dominated);
        assert_eq!(
            compare_growth(&f("2*t^2 + t"), &f("t^2")).unwrap().verdict,
            Verdict::SameRate(Num::from_int(2))
        );
        assert_eq!(
            compare_growth(&f("exp(sqrt(log(t)))"), &f("t^(1/10)")).unwrap().verdict,
            Verdict::Dominated
        );
    }

    #[test]
    fn numeric_tier_on_non_monomial_trees() {
        let c = compare_growth(&f("log(t^2 + 1)"), &f("log(t)")).unwrap();
        match c.verdict {
            Verdict::SameRate(x) => assert!((x.to_f64() - 2.0).abs() < 1e-5),
            v => panic!("{v:?}"),
        }
        let c = compare_growth(&f("sqrt(t^2 + t) - t"), &f("1")).unwrap();
        assert!(!c.structural);
        match c.verdict {
            Verdict::SameRate(x) => assert!((x.to_f64() - 0.5).abs() < 1e-5),
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn degrees() {
        assert_eq!(growth_degree(&f("t^(5/2)")).unwrap(), GrowthDegree { d: 2, sub_fractional: false });
        assert_eq!(growth_degree(&f("t^2 + sqrt(t)")).unwrap().d, 2);
        assert_eq!(growth_degree(&f("log(t)^3")).unwrap(), GrowthDegree { d: 0, sub_fractional: true });
        assert!(matches!(growth_degree(&f("exp(t)")), Err(LeError::NotPolynomialGrowth(_))));
    }

    #[test]
    fn strongly_nonpolynomial_examples() {
        assert_eq!(is_strongly_nonpolynomial(&f("t^(3/2)")).unwrap(), Some(1));
        assert_eq!(is_strongly_nonpolynomial(&f("t^2 + sqrt(t)")).unwrap(), None);
        assert_eq!(is_strongly_nonpolynomial(&f("log(t)^3")).unwrap(), Some(0));
    }

    #[test]
    fn cz_membership() {
        let (s, q) = cz_form(&[Num::zero(), Num::ratio(1, 2), Num::ratio(3, 4)]).unwrap().unwrap();
        assert_eq!(q, vec![BigInt::from(0), BigInt::from(2), BigInt::from(3)]);
        assert_eq!(s, Num::ratio(1, 4));
        let sqrt2 = Num::named(super::super::num::Named::Sqrt2);
        assert!(cz_form(&[Num::zero(), Num::one(), sqrt2]).unwrap().is_none());
    }

    #[test]
    fn one_good_needs_more_than_log_growth() {
        let r = is_one_good(&f("t^2 + log(log(t))")).unwrap();
        assert!(!r.good);
        let r = is_one_good(&f("t + log(t)^2")).unwrap();
        assert!(r.good);
        let r = is_one_good(&f("t + 3*log(t)")).unwrap();
        assert!(!r.good);
        // The dominant term decides, not the slowest one.
        let r = is_one_good(&f("t^(3/2) + log(log(t))")).unwrap();
        assert!(r.good);
    }
}
