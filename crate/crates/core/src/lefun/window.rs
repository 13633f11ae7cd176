//! Window classes `S(f,k)` and the choice of a common sub-linear window.

use std::cmp::Ordering;

use num::{BigInt, BigRational, One, Zero};

use super::expr::{Expr, LEFunction};
use super::growth::{compare_growth, growth_degree, leading_monomial, Verdict};
use super::monomial::{to_monosum, Monomial, MonoSum};
use super::num::Num;
use super::LeError;

/// Largest order tried by [`class_index`].
pub const MAX_ORDER: u32 = 64;
/// Largest denominator of the window exponent grid.
pub const GRID_MAX_DEN: i64 = 64;

/// `S(f,k) = { g : lower ⪯ g ≺ upper }`.
#[derive(Clone, Debug, PartialEq)]
pub struct WindowClass {
    pub base: LEFunction,
    pub order: u32,
    /// `|f^{(k)}|^{-1/k}`
    pub lower: LEFunction,
    /// `|f^{(k+1)}|^{-1/(k+1)}`
    pub upper: LEFunction,
}

impl WindowClass {
    pub fn new(f: &LEFunction, k: u32) -> Result<Self, LeError> {
        let (cl, ml) = endpoint(f, k)?;
        let (cu, mu) = endpoint(f, k + 1)?;
        Ok(WindowClass {
            base: f.clone(),
            order: k,
            lower: mono_fn(&cl, &ml),
            upper: mono_fn(&cu, &mu),
        })
    }

    /// Whether `t^c` lies in the class.
    pub fn contains_power(&self, c: &BigRational) -> bool {
        let m = Monomial::power(Num::from_rational(c.clone()));
        let lo = leading_monomial(&self.lower.expr).map(|x| x.1);
        let hi = leading_monomial(&self.upper.expr).map(|x| x.1);
        match (lo, hi) {
            (Some(lo), Some(hi)) => {
                m.cmp_growth(&lo) != Ordering::Less && m.cmp_growth(&hi) == Ordering::Less
            }
            _ => false,
        }
    }
}

fn mono_fn(c: &Num, m: &Monomial) -> LEFunction {
    LEFunction { expr: MonoSum::monomial(c.clone(), m.clone()).to_expr(), domain_floor: 1.0 }
}

/// Leading term of `|f^{(k)}|^{-1/k}`.
pub fn endpoint(f: &LEFunction, k: u32) -> Result<(Num, Monomial), LeError> {
    Endpoints::new(f, k).current()
}

/// `|f^{(k)}|^{-1/k}` for increasing `k`, differentiating once per step.
struct Endpoints<'a> {
    f: &'a LEFunction,
    sum: Option<MonoSum>,
    k: u32,
}

impl<'a> Endpoints<'a> {
    fn new(f: &'a LEFunction, k: u32) -> Self {
        let sum = to_monosum(&f.expr).map(|mut s| {
            for _ in 0..k {
                s = s.derivative();
            }
            s
        });
        Endpoints { f, sum, k }
    }

    fn current(&self) -> Result<(Num, Monomial), LeError> {
        let (f, k) = (self.f, self.k);
        let lead = match &self.sum {
            Some(s) => s.lead().cloned(),
            None => leading_monomial(&f.expr.derivative(k)),
        };
        let inconclusive =
            || LeError::Inconclusive { f: format!("|({f})^({k})|^(-1/{k})"), g: "its leading term".into() };
        let (c, m) = lead.ok_or_else(inconclusive)?;
        let r = BigRational::new(BigInt::from(-1), BigInt::from(k));
        let c = c.abs().pow_rational(&r).ok_or_else(inconclusive)?;
        Ok((c, m.pow(&Num::from_rational(r))))
    }

    fn advance(&mut self) {
        self.k += 1;
        if let Some(s) = &mut self.sum {
            *s = s.derivative();
        }
    }
}

fn first_order(f: &LEFunction) -> Result<u32, LeError> {
    Ok(growth_degree(f)?.d + 1)
}

/// Growth of `g` against a monomial, structurally when possible.
fn cmp_to(g: &LEFunction, g_lead: Option<&Monomial>, c: &Num, m: &Monomial) -> Result<Ordering, LeError> {
    if let Some(gm) = g_lead {
        return Ok(gm.cmp_growth(m));
    }
    let other = mono_fn(c, m);
    match compare_growth(g, &other)?.verdict {
        Verdict::Dominates => Ok(Ordering::Greater),
        Verdict::Dominated => Ok(Ordering::Less),
        Verdict::SameRate(_) => Ok(Ordering::Equal),
        Verdict::Inconclusive => Err(LeError::Inconclusive { f: g.to_string(), g: other.to_string() }),
    }
}

/// The `k` with `g ∈ S(f,k)`, scanning `k` from the first order at which
/// `f^{(k)} → 0` up to [`MAX_ORDER`].
pub fn class_index(g: &LEFunction, f: &LEFunction) -> Result<Option<u32>, LeError> {
    let g_lead = leading_monomial(&g.expr).map(|x| x.1);
    let start = first_order(f)?;
    let mut ends = Endpoints::new(f, start);
    let (mut cl, mut ml) = ends.current()?;
    for k in start..=MAX_ORDER {
        ends.advance();
        let (cu, mu) = ends.current()?;
        let lo = cmp_to(g, g_lead.as_ref(), &cl, &ml)?;
        if lo == Ordering::Less {
            // Lower endpoints increase with k.
            return Ok(None);
        }
        if cmp_to(g, g_lead.as_ref(), &cu, &mu)? == Ordering::Less {
            return Ok(Some(k));
        }
        (cl, ml) = (cu, mu);
    }
    Ok(None)
}

fn ratio_has_q(a: &Monomial, b: &Monomial) -> bool {
    let r = b.mul(&a.inv());
    r.growth_sign() == 0 || !r.t.is_zero()
}

/// Property Q: same growth rate, or the ratio of the larger to the
/// smaller dominates a fractional power.
pub fn property_q(a: &LEFunction, b: &LEFunction) -> Result<bool, LeError> {
    match (leading_monomial(&a.expr), leading_monomial(&b.expr)) {
        (Some((_, ma)), Some((_, mb))) => Ok(ratio_has_q(&ma, &mb)),
        _ => Err(LeError::Inconclusive { f: a.to_string(), g: b.to_string() }),
    }
}

/// Exponents `p/q` with `q ≤ 64` in `(1/2, 1)`, descending.
pub fn window_grid() -> Vec<BigRational> {
    let half = BigRational::new(1.into(), 2.into());
    let mut v: Vec<BigRational> = (2..=GRID_MAX_DEN)
        .flat_map(|q| (1..q).map(move |p| BigRational::new(p.into(), q.into())))
        .filter(|c| *c > half)
        .collect();
    v.sort_by(|a, b| b.cmp(a));
    v.dedup();
    v
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WindowCase {
    /// Every endpoint has property Q against the anchor.
    A,
    /// Some endpoints fail property Q; their orders were adjusted.
    B,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WindowChoice {
    pub l: LEFunction,
    pub exponent: BigRational,
    /// The order `d` of the fastest function that produced the window.
    pub d: u32,
    /// `k_g` per input, after adjustment.
    pub orders: Vec<u32>,
    /// Index of the special function.
    pub special: usize,
    pub case: WindowCase,
    /// Inputs whose order was decremented.
    pub decremented: Vec<bool>,
}

struct Prepared {
    lead: Monomial,
    start: u32,
}

fn attempt(fs: &[LEFunction], prep: &[Prepared], top: usize, d: u32, grid: &[BigRational]) -> Result<Option<WindowChoice>, LeError> {
    if d < prep[top].start {
        return Ok(None);
    }
    let (ca, anchor) = endpoint(&fs[top], d)?;
    let anchor_fn = mono_fn(&ca, &anchor);
    let mut k = Vec::with_capacity(fs.len());
    for f in fs {
        match class_index(&anchor_fn, f)? {
            Some(x) => k.push(x),
            None => return Ok(None),
        }
    }
    let ends: Vec<Monomial> =
        fs.iter().zip(&k).map(|(f, &kk)| endpoint(f, kk).map(|x| x.1)).collect::<Result<_, _>>()?;
    let failing: Vec<usize> = (0..fs.len()).filter(|&i| i != top && !ratio_has_q(&ends[i], &anchor)).collect();
    let mut decremented = vec![false; fs.len()];
    let (case, special) = if failing.is_empty() {
        (WindowCase::A, top)
    } else {
        let special = *failing
            .iter()
            .min_by(|&&a, &&b| ends[a].cmp_growth(&ends[b]))
            .expect("nonempty");
        for &i in &failing {
            if ends[i].cmp_growth(&ends[special]) != Ordering::Equal {
                if k[i] <= prep[i].start {
                    return Ok(None);
                }
                k[i] -= 1;
                decremented[i] = true;
            }
        }
        (WindowCase::B, special)
    };
    let classes: Vec<WindowClass> =
        fs.iter().zip(&k).map(|(f, &kk)| WindowClass::new(f, kk)).collect::<Result<_, _>>()?;
    let bounds: Vec<(Monomial, Monomial)> = classes
        .iter()
        .map(|w| match (leading_monomial(&w.lower.expr), leading_monomial(&w.upper.expr)) {
            (Some(lo), Some(hi)) => Ok((lo.1, hi.1)),
            _ => Err(LeError::Inconclusive { f: w.base.to_string(), g: "its window endpoints".into() }),
        })
        .collect::<Result<_, _>>()?;
    for c in grid {
        let m = Monomial::power(Num::from_rational(c.clone()));
        let inside = |(lo, hi): &(Monomial, Monomial)| {
            m.cmp_growth(lo) != Ordering::Less && m.cmp_growth(hi) == Ordering::Less
        };
        if bounds.iter().all(inside) {
            return Ok(Some(WindowChoice {
                l: super::growth::power_fn(c.clone()),
                exponent: c.clone(),
                d,
                orders: k,
                special,
                case,
                decremented,
            }));
        }
    }
    Ok(None)
}

/// Number of orders tried above the requested one.
pub const ORDER_SEARCH: u32 = 24;

/// Common window `L = t^c` for strongly non-polynomial `fs`, starting from
/// order `d` for the fastest function and increasing it until the grid
/// admits a window.
pub fn find_window(fs: &[LEFunction], d: u32) -> Result<WindowChoice, LeError> {
    if fs.is_empty() {
        return Err(LeError::NoWindowFound("empty family".into()));
    }
    let mut prep = Vec::new();
    for f in fs {
        let lead = leading_monomial(&f.expr)
            .ok_or_else(|| LeError::Inconclusive { f: f.to_string(), g: "its leading term".into() })?
            .1;
        prep.push(Prepared { lead, start: first_order(f)? });
    }
    if let Some(i) = (0..fs.len()).find(|&i| prep[i].lead.t.is_zero()) {
        // endpoints of a sub-fractional function dominate every t^c, c < 1
        return Err(LeError::NoWindowFound(format!("{} is sub-fractional", fs[i])));
    }
    let top = (0..fs.len())
        .reduce(|a, b| if prep[b].lead.cmp_growth(&prep[a].lead) == Ordering::Greater { b } else { a })
        .expect("nonempty");
    let grid = window_grid();
    for dd in d.max(1)..=d.max(1) + ORDER_SEARCH {
        if let Some(w) = attempt(fs, &prep, top, dd, &grid)? {
            return Ok(w);
        }
    }
    Err(LeError::NoWindowFound(format!(
        "orders {}..={} for {}",
        d,
        d + ORDER_SEARCH,
        fs.iter().map(|f| f.to_string()).collect::<Vec<_>>().join(", ")
    )))
}

/// `t^e` exponent of a pure power function.
pub fn power_exponent(f: &LEFunction) -> Option<BigRational> {
    match &f.expr {
        Expr::Var => Some(BigRational::one()),
        Expr::Pow(b, r) if matches!(**b, Expr::Var) => Some(r.clone()),
        Expr::Const(c) if !c.is_zero() => Some(BigRational::zero()),
        _ => {
            let (_, m) = leading_monomial(&f.expr)?;
            let pure = m.log.is_zero() && m.loglog.is_zero() && m.exp.is_empty();
            pure.then(|| m.t.exact().cloned()).flatten()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(s: &str) -> LEFunction {
        LEFunction::parse(s).unwrap()
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    /// Exponent of `|f^{(k)}|^{-1/k}` for `f = t^a`: `(k - a)/k`.
    fn oracle(a: BigRational, k: i64) -> BigRational {
        (BigRational::from_integer(k.into()) - a) / BigRational::from_integer(k.into())
    }

    #[test]
    fn endpoints_match_hand_exponents() {
        let g = f("t^(3/2)");
        for k in 2..10 {
            let w = WindowClass::new(&g, k).unwrap();
            assert_eq!(power_exponent(&w.lower), Some(oracle(q(3, 2), k as i64)));
            assert_eq!(power_exponent(&w.upper), Some(oracle(q(3, 2), k as i64 + 1)));
        }
    }

    #[test]
    fn class_index_examples() {
        let base = f("t^(3/2)");
        assert_eq!(class_index(&f("sqrt(t)"), &base).unwrap(), Some(3));
        assert_eq!(class_index(&f("t/log(t)"), &base).unwrap(), None);
        assert_eq!(class_index(&f("t^(9/10)"), &base).unwrap(), Some(15));
        assert_eq!(class_index(&f("t^(3/5)"), &base).unwrap(), Some(3));
    }

    #[test]
    fn single_power_window() {
        let w = find_window(&[f("t^(3/2)")], 2).unwrap();
        // S(t^(3/2), 2) = [t^(1/4), t^(1/2)) lies below the grid.
        assert_eq!(w.d, 3);
        assert_eq!(w.orders, vec![3]);
        assert!(w.exponent >= q(1, 2) && w.exponent < q(5, 8));
    }

    #[test]
    fn t_log_t_window_between_half_and_two_thirds() {
        let w = find_window(&[f("t*log(t)")], 2).unwrap();
        assert_eq!(w.orders, vec![2]);
        assert!(w.exponent > q(1, 2) && w.exponent < q(2, 3));
    }

    #[test]
    fn worked_triple_admits_three_fifths() {
        let fs = [f("t*log(t)"), f("sqrt(t)")];
        let w = find_window(&fs, 2).unwrap();
        assert_eq!(w.case, WindowCase::A);
        assert_eq!(w.orders, vec![2, 1]);
        for (g, k) in fs.iter().zip(&w.orders) {
            assert!(WindowClass::new(g, *k).unwrap().contains_power(&q(3, 5)));
        }
    }

    #[test]
    fn property_q_examples() {
        let a = WindowClass::new(&f("t^(3/2)"), 2).unwrap().lower;
        let b = WindowClass::new(&f("t*log(t)"), 2).unwrap().lower;
        assert!(property_q(&a, &b).unwrap());
        let c = WindowClass::new(&f("t*log(log(t))"), 2).unwrap().lower;
        assert!(!property_q(&b, &c).unwrap());
    }

    #[test]
    fn case_b_adjusts_orders() {
        let fs = [f("t^(5/2)"), f("t^(3/2)*log(t)")];
        let w = find_window(&fs, 10).unwrap();
        assert_eq!(w.case, WindowCase::B);
        for (g, k) in fs.iter().zip(&w.orders) {
            assert!(WindowClass::new(g, *k).unwrap().contains_power(&w.exponent));
        }
    }
}
