//! Splitting functions into strongly non-polynomial parts, polynomials and
//! vanishing remainders.

use std::cmp::Ordering;

use super::expr::{Expr, LEFunction};
use super::growth::LADDER;
use super::monomial::{to_monosum, Monomial, MonoSum};
use super::num::{Num, NumHp};
use super::LeError;
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition {
    /// Basis functions, slowest first.
    pub g: Vec<LEFunction>,
    /// `l_j` with `t^{l_j} ≺ g_j ≺ t^{l_j+1}`.
    pub levels: Vec<u32>,
    /// `c[i][j]` is the coefficient of `g_j` in `a_i`.
    pub c: Vec<Vec<Num>>,
    /// Polynomial parts, coefficients by increasing degree.
    pub p: Vec<Vec<Num>>,
    /// `(t, max_i |a_i(t) - Σ_j c_ij g_j(t) - p_i(t)|)` on the ladder.
    pub residual_bound: Vec<(f64, f64)>,
    /// Terms tending to zero, per input.
    pub residual: Vec<LEFunction>,
}

impl Decomposition {
    pub fn polynomial(&self, i: usize) -> LEFunction {
        poly_function(&self.p[i])
    }
}

/// `Σ c_n t^n` as an LE function.
pub fn poly_function(p: &[Num]) -> LEFunction {
    let terms = p
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(n, c)| (c.clone(), Monomial::power(Num::from_int(n as i64))))
        .collect();
    LEFunction { expr: MonoSum::from_terms(terms).to_expr(), domain_floor: 0.0 }
}

fn monomial_level(m: &Monomial) -> u32 {
    match m.t.as_integer() {
        Some(n) => {
            let rest = Monomial { t: Num::zero(), ..m.clone() };
            if rest.growth_sign() > 0 {
                n as u32
            } else {
                (n - 1).max(0) as u32
            }
        }
        None => m.t.to_f64().floor().max(0.0) as u32,
    }
}

pub fn decompose(a: &[LEFunction]) -> Result<Decomposition, LeError> {
    let mut basis: Vec<Monomial> = Vec::new();
    let mut rows: Vec<Vec<(Monomial, Num)>> = Vec::new();
    let mut p: Vec<Vec<Num>> = Vec::new();
    let mut residual = Vec::new();
    for f in a {
        let s = to_monosum(&f.expr).ok_or_else(|| LeError::NormalForm(f.to_string()))?;
        let mut row = Vec::new();
        let mut poly: Vec<Num> = Vec::new();
        let mut small = Vec::new();
        for (c, m) in &s.terms {
            if m.growth_sign() < 0 {
                small.push((c.clone(), m.clone()));
            } else if let Some(n) = m.polynomial_degree() {
                let n = n as usize;
                if poly.len() <= n {
                    poly.resize(n + 1, Num::zero());
                }
                poly[n] = poly[n].add(c);
            } else {
                if !basis.contains(m) {
                    basis.push(m.clone());
                }
                row.push((m.clone(), c.clone()));
            }
        }
        if poly.is_empty() {
            poly.push(Num::zero());
        }
        rows.push(row);
        p.push(poly);
        residual.push(LEFunction {
            expr: MonoSum::from_terms(small).to_expr(),
            domain_floor: f.domain_floor,
        });
    }
    basis.sort_by(|x, y| x.cmp_growth(y));
    let c: Vec<Vec<Num>> = rows
        .iter()
        .map(|row| {
            basis
                .iter()
                .map(|m| row.iter().find(|(mm, _)| mm == m).map(|(_, c)| c.clone()).unwrap_or_else(Num::zero))
                .collect()
        })
        .collect();
    debug_assert!(basis.windows(2).all(|w| w[0].cmp_growth(&w[1]) == Ordering::Less));
    let levels = basis.iter().map(monomial_level).collect();
    let g: Vec<LEFunction> = basis
        .iter()
        .map(|m| LEFunction::new(m.to_expr()))
        .collect::<Result<_, _>>()?;
    let mut dec = Decomposition { g, levels, c, p, residual_bound: Vec::new(), residual };
    dec.residual_bound = residual_ladder(a, &dec);
    Ok(dec)
}

/// Reconstruction error sampled on the ladder, computed from the inputs
/// rather than from the discarded terms.
fn residual_ladder(a: &[LEFunction], dec: &Decomposition) -> Vec<(f64, f64)> {
    let floor = a.iter().map(|f| f.domain_floor).fold(0.0, f64::max);
    let mut out = Vec::new();
    for &t in LADDER.iter().filter(|t| **t >= floor) {
        let x = NumHp::from_f64(t);
        let mut worst = 0.0f64;
        for (i, f) in a.iter().enumerate() {
            let Ok(mut r) = f.expr.eval::<NumHp>(&x) else { continue };
            for (g, c) in dec.g.iter().zip(&dec.c[i]) {
                if c.is_zero() {
                    continue;
                }
                if let Ok(v) = g.expr.eval::<NumHp>(&x) {
                    r = r - c.approx().clone() * v;
                }
            }
            if let Ok(v) = poly_function(&dec.p[i]).expr.eval::<NumHp>(&x) {
                r = r - v;
            }
            worst = worst.max(r.abs().to_f64());
        }
        out.push((t, worst));
    }
    out
}

/// The non-polynomial part `Σ_j c_ij g_j` of input `i`.
pub fn nonpolynomial_part(dec: &Decomposition, i: usize) -> LEFunction {
    let mut e: Option<Expr> = None;
    for (g, c) in dec.g.iter().zip(&dec.c[i]) {
        if c.is_zero() {
            continue;
        }
        let term = Expr::mul(Expr::Const(c.clone()), g.expr.clone());
        e = Some(match e {
            None => term,
            Some(acc) => Expr::add(acc, term),
        });
    }
    let expr = e.map(|e| e.simplify()).unwrap_or(Expr::Const(Num::zero()));
    let floor = dec.g.iter().map(|g| g.domain_floor).fold(0.0, f64::max);
    LEFunction { expr, domain_floor: floor }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fs(v: &[&str]) -> Vec<LEFunction> {
        v.iter().map(|s| LEFunction::parse(s).unwrap()).collect()
    }

    #[test]
    fn mixed_pair() {
        let d = decompose(&fs(&["t + t^(3/2)", "t^2 + t^(5/2)"])).unwrap();
        assert_eq!(d.g, fs(&["t^(3/2)", "t^(5/2)"]));
        assert_eq!(d.levels, vec![1, 2]);
        assert_eq!(d.polynomial(0), fs(&["t"])[0]);
        assert_eq!(d.polynomial(1), fs(&["t^2"])[0]);
        assert_eq!(d.c, vec![vec![Num::one(), Num::zero()], vec![Num::zero(), Num::one()]]);
    }

    #[test]
    fn coefficient_matrix_and_pure_polynomial() {
        let d = decompose(&fs(&["t^(3/2) + 2*t^(5/2)", "3*t^(5/2)"])).unwrap();
        assert_eq!(d.c[0], vec![Num::one(), Num::from_int(2)]);
        assert_eq!(d.c[1], vec![Num::zero(), Num::from_int(3)]);
        assert!(d.p.iter().all(|p| p.iter().all(|c| c.is_zero())));
        let d = decompose(&fs(&["t^2"])).unwrap();
        assert!(d.g.is_empty());
        assert_eq!(d.polynomial(0), fs(&["t^2"])[0]);
    }

    #[test]
    fn residual_is_vanishing_part() {
        let d = decompose(&fs(&["t^(3/2) + 1/t + 4"])).unwrap();
        assert_eq!(d.residual[0], fs(&["1/t"])[0]);
        let r: Vec<f64> = d.residual_bound.iter().map(|x| x.1).collect();
        assert!(r.windows(2).all(|w| w[1] <= w[0]));
        assert!(r[r.len() - 1] < 1e-3);
    }

    #[test]
    fn non_sum_input_is_rejected() {
        assert!(matches!(decompose(&fs(&["log(t^2 + 1)"])), Err(LeError::NormalForm(_))));
    }
}
