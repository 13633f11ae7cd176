//! Local Taylor models on windows `[r, r + L(r)]`.

use super::expr::LEFunction;
use super::LeError;
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq)]
pub struct TaylorData<S> {
    /// `f^{(j)}(r) / j!` for `0 ≤ j ≤ k`.
    pub coeffs: Vec<S>,
    /// Bound on `|f^{(k+1)}| L^{k+1} / (k+1)!` over the window, taking the
    /// larger endpoint value of the eventually monotone derivative.
    pub remainder_bound: S,
}

pub fn taylor_poly<S: Real>(f: &LEFunction, r: &S, k: u32, l: &S) -> Result<TaylorData<S>, LeError> {
    if k == 0 {
        return Err(LeError::Domain { t: r.to_f64(), reason: "Taylor order must be at least 1".into() });
    }
    let mut coeffs = Vec::with_capacity(k as usize + 1);
    let mut fact = S::one();
    let mut d = f.clone();
    for j in 0..=k {
        if j > 0 {
            fact = fact * S::from_i64(j as i64);
            d = f.derivative(j);
        }
        coeffs.push(d.eval(r)? / fact.clone());
    }
    let next = f.derivative(k + 1);
    let fact = fact * S::from_i64(k as i64 + 1);
    let end = r.clone() + l.clone();
    let a = next.eval(r)?.abs();
    let b = next.eval(&end)?.abs();
    let sup = if a > b { a } else { b };
    let remainder_bound = sup * l.powi(k as i64 + 1) / fact;
    Ok(TaylorData { coeffs, remainder_bound })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Hp;
    use num::One;

    fn f(s: &str) -> LEFunction {
        LEFunction::parse(s).unwrap()
    }

    #[test]
    fn square_root() {
        let r = 1e6f64;
        let l = r.powf(0.6);
        let t = taylor_poly(&f("sqrt(t)"), &r, 1, &l).unwrap();
        assert!((t.coeffs[0] - 1000.0).abs() < 1e-9);
        assert!((t.coeffs[1] - 1.0 / 2000.0).abs() < 1e-15);
        let expect = l * l / (8.0 * r.powf(1.5));
        assert!((t.remainder_bound / expect - 1.0).abs() < 1e-12);
    }

    #[test]
    fn t_log_t_second_order() {
        let r = Hp::<256>::from_f64(1e5);
        let l = Hp::<256>::from_f64(1e3);
        let t = taylor_poly(&f("t*log(t)"), &r, 2, &l).unwrap();
        let lr = r.ln();
        assert!((t.coeffs[0].clone() - r.clone() * lr.clone()).abs().to_f64() < 1e-60);
        assert!((t.coeffs[1].clone() - (lr + Hp::one())).abs().to_f64() < 1e-60);
        let half_inv = Hp::one() / (Hp::from_i64(2) * r);
        assert!((t.coeffs[2].clone() - half_inv).abs().to_f64() < 1e-70);
    }

    #[test]
    fn polynomial_is_exact() {
        let t = taylor_poly(&f("t^2"), &7.0f64, 2, &100.0).unwrap();
        assert_eq!(t.coeffs, vec![49.0, 14.0, 1.0]);
        assert_eq!(t.remainder_bound, 0.0);
    }
}
