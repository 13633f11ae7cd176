//! Measure-preserving systems on tori, their powers, and trigonometric
//! polynomial observables.

use std::f64::consts::TAU;

use num::complex::Complex64;
use num::{BigInt, BigRational, Integer, One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use super::iterate::constant;
use super::ErgoError;
use crate::lefun::num::{best_rational, NumHp};
use crate::scalar::Real;

/// Default prime denominator for automorphism orbits.
pub const ORBIT_PRIME: u64 = 2_147_483_647;
/// Denominator bound used when testing rotation numbers for rationality.
pub const RATIONAL_BOUND: u64 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SystemSpec {
    TorusRotation { alpha: Vec<String> },
    /// `(x, y) ↦ (x + α, y + 2x + α)` on `T²`.
    SkewProduct { alpha: String },
    ToralAutomorphism { matrix: [[i64; 2]; 2] },
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Seed {
    #[default]
    Origin,
    /// Constant expressions, or `p/q` fractions for automorphisms.
    Coordinates(Vec<String>),
    Random(u64),
}

/// A point of the torus.  Real tori use 128-bit fixed point (units of
/// `2^-128`); automorphism orbits use exact fractions `num / q`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Point {
    Fixed(Vec<u128>),
    Rational { num: Vec<u64>, q: u64 },
}

#[derive(Clone, Debug)]
enum Kind {
    Rotation,
    Skew,
    Automorphism([[i64; 2]; 2]),
}

/// A compiled [`SystemSpec`].
#[derive(Clone, Debug)]
pub struct System {
    pub spec: SystemSpec,
    kind: Kind,
    pub dim: usize,
    alpha_hp: Vec<NumHp>,
    alpha: Vec<u128>,
    pub ergodic: bool,
}

/// `frac(x) · 2^128`.
pub fn to_fixed(x: &NumHp) -> u128 {
    let fl = NumHp::from_bigint(&x.floor_int().unwrap_or_default());
    let scale = NumHp::from_bigint(&(BigInt::one() << 128));
    let v = ((x.clone() - fl) * scale).floor_int().unwrap_or_default();
    v.to_u128().unwrap_or(0)
}

/// Fraction in `[0, 1)` of a fixed-point value.
pub fn fixed_to_f64(x: u128) -> f64 {
    (x >> 64) as u64 as f64 / 18_446_744_073_709_551_616.0
}

/// `e(x) = exp(2πi x)` of a fixed-point phase; quarter turns are exact.
pub fn e_fixed(x: u128) -> Complex64 {
    const Q: u128 = 1 << 126;
    match x {
        0 => Complex64::new(1.0, 0.0),
        Q => Complex64::new(0.0, 1.0),
        _ if x == 2 * Q => Complex64::new(-1.0, 0.0),
        _ if x == 3 * Q => Complex64::new(0.0, -1.0),
        _ => {
            // signed fraction in [-1/2, 1/2)
            let s = x as i128 as f64 / 3.402_823_669_209_385e38;
            Complex64::from_polar(1.0, TAU * s)
        }
    }
}

/// `e(num / q)` with exact quarter turns.
pub fn e_ratio(num: u64, q: u64) -> Complex64 {
    let r = num % q;
    if r == 0 {
        return Complex64::new(1.0, 0.0);
    }
    if 4 * r as u128 % q as u128 == 0 {
        return match 4 * r as u128 / q as u128 {
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
    }
    Complex64::from_polar(1.0, TAU * (r as f64 / q as f64))
}

fn wrap(m: i128) -> u128 {
    m as u128
}

type Mat = [[i128; 2]; 2];

fn mat_mul_mod(a: &Mat, b: &Mat, q: i128) -> Mat {
    let mut c = [[0i128; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = (a[i][0] * b[0][j] + a[i][1] * b[1][j]).rem_euclid(q);
        }
    }
    c
}

fn mat_mul_checked(a: &Mat, b: &Mat) -> Option<Mat> {
    let mut c = [[0i128; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0].checked_mul(b[0][j])?.checked_add(a[i][1].checked_mul(b[1][j])?)?;
        }
    }
    Some(c)
}

const IDENTITY: Mat = [[1, 0], [0, 1]];

impl System {
    pub fn new(spec: &SystemSpec) -> Result<System, ErgoError> {
        let (kind, dim, alpha_hp) = match spec {
            SystemSpec::TorusRotation { alpha } => {
                if alpha.is_empty() {
                    return Err(ErgoError::Format("rotation needs at least one angle".into()));
                }
                (Kind::Rotation, alpha.len(), alpha.iter().map(|a| constant(a)).collect::<Result<Vec<_>, _>>()?)
            }
            SystemSpec::SkewProduct { alpha } => (Kind::Skew, 2, vec![constant(alpha)?]),
            SystemSpec::ToralAutomorphism { matrix } => {
                let det = matrix[0][0] * matrix[1][1] - matrix[0][1] * matrix[1][0];
                if det.abs() != 1 {
                    return Err(ErgoError::Format(format!("determinant {det} is not ±1")));
                }
                (Kind::Automorphism(*matrix), 2, Vec::new())
            }
        };
        let alpha = alpha_hp.iter().map(to_fixed).collect();
        let mut sys = System { spec: spec.clone(), kind, dim, alpha_hp, alpha, ergodic: false };
        sys.ergodic = match &sys.kind {
            Kind::Rotation => sys.rotation_independent(),
            Kind::Skew => sys.rational_part(&sys.alpha_hp[0]).is_none(),
            Kind::Automorphism(_) => sys.hyperbolic(),
        };
        Ok(sys)
    }

    fn rational_part(&self, x: &NumHp) -> Option<BigRational> {
        let q = best_rational(x, RATIONAL_BOUND)?;
        ((NumHp::from_ratio(&q) - x.clone()).abs().to_f64() < 1e-60).then_some(q)
    }

    /// Rationality of each angle up to [`RATIONAL_BOUND`] and absence of
    /// small integer relations between them.
    fn rotation_independent(&self) -> bool {
        if self.alpha_hp.iter().any(|a| self.rational_part(a).is_some()) {
            return false;
        }
        let d = self.dim;
        if d == 1 || d > 3 {
            return true;
        }
        const B: i64 = 8;
        let mut k = vec![-B; d];
        loop {
            if k.iter().any(|&x| x != 0) && self.resonant(&k.iter().map(|&x| x as i128).collect::<Vec<_>>()) {
                return false;
            }
            let mut i = 0;
            while i < d && k[i] == B {
                k[i] = -B;
                i += 1;
            }
            if i == d {
                return true;
            }
            k[i] += 1;
        }
    }

    pub fn is_rotation(&self) -> bool {
        matches!(self.kind, Kind::Rotation)
    }

    /// No eigenvalue on the unit circle.
    pub fn hyperbolic(&self) -> bool {
        match self.kind {
            Kind::Automorphism(m) => {
                let tr = m[0][0] + m[1][1];
                let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
                if det == 1 {
                    tr.abs() > 2
                } else {
                    tr != 0
                }
            }
            _ => false,
        }
    }

    /// `k · α ∈ Z` for a rotation: the character is invariant.
    pub fn resonant(&self, k: &[i128]) -> bool {
        match self.kind {
            Kind::Rotation => {
                // the fixed-point phase is accurate to |k| 2^-128
                let th = k.iter().zip(&self.alpha).fold(0u128, |acc, (&ki, a)| acc.wrapping_add(wrap(ki).wrapping_mul(*a)));
                let dist = th.min(th.wrapping_neg());
                let slack = k.iter().map(|x| x.unsigned_abs()).sum::<u128>().saturating_add(1).saturating_mul(4);
                if dist > slack {
                    return false;
                }
                let s = k
                    .iter()
                    .zip(&self.alpha_hp)
                    .fold(NumHp::from_i64(0), |acc, (&ki, a)| acc + NumHp::from_bigint(&BigInt::from(ki)) * a.clone());
                s.frac_distance() < 1e-60
            }
            Kind::Skew => k[1] == 0 && (k[0] == 0 || self.rational_part(&self.alpha_hp[0]).is_some_and(|q| {
                (BigRational::from_integer(k[0].into()) * q).is_integer()
            })),
            Kind::Automorphism(_) => k.iter().all(|&x| x == 0),
        }
    }

    fn matrix(&self) -> Option<Mat> {
        match self.kind {
            Kind::Automorphism(m) => Some([[m[0][0] as i128, m[0][1] as i128], [m[1][0] as i128, m[1][1] as i128]]),
            _ => None,
        }
    }

    /// `A^m` (or its inverse power) reduced mod `q`.
    fn matrix_pow_mod(&self, m: i128, q: u64) -> Mat {
        let a = self.matrix().expect("automorphism");
        let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        let base = if m < 0 { [[det * a[1][1], -det * a[0][1]], [-det * a[1][0], det * a[0][0]]] } else { a };
        let q = q as i128;
        let mut b = [[base[0][0].rem_euclid(q), base[0][1].rem_euclid(q)], [base[1][0].rem_euclid(q), base[1][1].rem_euclid(q)]];
        let mut e = m.unsigned_abs();
        let mut acc = [[1 % q, 0], [0, 1 % q]];
        while e > 0 {
            if e & 1 == 1 {
                acc = mat_mul_mod(&acc, &b, q);
            }
            e >>= 1;
            b = mat_mul_mod(&b, &b, q);
        }
        acc
    }

    /// `(A^T)^m` over the integers, when it fits.
    fn transpose_pow(&self, m: i128) -> Option<Mat> {
        let a = self.matrix()?;
        let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        let t = [[a[0][0], a[1][0]], [a[0][1], a[1][1]]];
        let base = if m < 0 { [[det * t[1][1], -det * t[0][1]], [-det * t[1][0], det * t[0][0]]] } else { t };
        let mut acc = IDENTITY;
        for _ in 0..m.unsigned_abs() {
            acc = mat_mul_checked(&acc, &base)?;
        }
        Some(acc)
    }

    pub fn seed_point(&self, seed: &Seed) -> Result<Point, ErgoError> {
        match (&self.kind, seed) {
            (Kind::Automorphism(_), Seed::Origin) => Ok(Point::Rational { num: vec![0, 0], q: ORBIT_PRIME }),
            (Kind::Automorphism(_), Seed::Random(s)) => {
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(*s);
                Ok(Point::Rational { num: (0..2).map(|_| rng.gen_range(0..ORBIT_PRIME)).collect(), q: ORBIT_PRIME })
            }
            (Kind::Automorphism(_), Seed::Coordinates(c)) => {
                let qs: Vec<BigRational> = c
                    .iter()
                    .map(|s| parse_fraction(s))
                    .collect::<Result<_, _>>()?;
                if qs.len() != 2 {
                    return Err(ErgoError::Format("automorphism points have two coordinates".into()));
                }
                let q = qs.iter().fold(BigInt::one(), |l, x| l.lcm(x.denom()));
                let qv = q.to_u64().ok_or_else(|| ErgoError::Format("denominator too large".into()))?;
                let num = qs
                    .iter()
                    .map(|x| (x * BigRational::from_integer(q.clone())).to_integer().mod_floor(&q).to_u64().unwrap())
                    .collect();
                Ok(Point::Rational { num, q: qv })
            }
            (_, Seed::Origin) => Ok(Point::Fixed(vec![0; self.dim])),
            (_, Seed::Random(s)) => {
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(*s);
                Ok(Point::Fixed((0..self.dim).map(|_| rng.gen()).collect()))
            }
            (_, Seed::Coordinates(c)) => {
                if c.len() != self.dim {
                    return Err(ErgoError::Format(format!("expected {} coordinates", self.dim)));
                }
                Ok(Point::Fixed(c.iter().map(|s| constant(s).map(|x| to_fixed(&x))).collect::<Result<_, _>>()?))
            }
        }
    }

    /// `T^m x`, exact in the point representation.
    pub fn power_map(&self, m: i128, x: &Point) -> Point {
        match (&self.kind, x) {
            (Kind::Rotation, Point::Fixed(v)) => {
                Point::Fixed(v.iter().zip(&self.alpha).map(|(xi, a)| xi.wrapping_add(wrap(m).wrapping_mul(*a))).collect())
            }
            (Kind::Skew, Point::Fixed(v)) => {
                let (mu, a) = (wrap(m), self.alpha[0]);
                let x1 = v[0].wrapping_add(mu.wrapping_mul(a));
                let y1 = v[1]
                    .wrapping_add(mu.wrapping_mul(v[0]).wrapping_mul(2))
                    .wrapping_add(mu.wrapping_mul(mu).wrapping_mul(a));
                Point::Fixed(vec![x1, y1])
            }
            (Kind::Automorphism(_), Point::Rational { num, q }) => {
                let p = self.matrix_pow_mod(m, *q);
                let qi = *q as i128;
                let (a, b) = (num[0] as i128, num[1] as i128);
                Point::Rational {
                    num: vec![
                        ((p[0][0] * a + p[0][1] * b).rem_euclid(qi)) as u64,
                        ((p[1][0] * a + p[1][1] * b).rem_euclid(qi)) as u64,
                    ],
                    q: *q,
                }
            }
            _ => panic!("point representation does not match the system"),
        }
    }

    /// One application of the defining map, computed step by step.
    pub fn step(&self, x: &Point) -> Point {
        match (&self.kind, x) {
            (Kind::Skew, Point::Fixed(v)) => {
                let a = self.alpha[0];
                Point::Fixed(vec![v[0].wrapping_add(a), v[1].wrapping_add(v[0].wrapping_mul(2)).wrapping_add(a)])
            }
            _ => self.power_map(1, x),
        }
    }

    /// `e(k · T^m x) = phase · e(k' · x)`: returns `(k', phase)`.
    pub fn transport(&self, k: &[i128], m: i128) -> Result<(Vec<i128>, u128), ErgoError> {
        let overflow = || ErgoError::ComplexityRefusal { cost: f64::INFINITY, limit: i128::MAX as f64 };
        match self.kind {
            Kind::Rotation => {
                let mut ph = 0u128;
                for (ki, a) in k.iter().zip(&self.alpha) {
                    ph = ph.wrapping_add(wrap(ki.checked_mul(m).ok_or_else(overflow)?).wrapping_mul(*a));
                }
                Ok((k.to_vec(), ph))
            }
            Kind::Skew => {
                let k1 = k[0].checked_add(k[1].checked_mul(m).and_then(|x| x.checked_mul(2)).ok_or_else(overflow)?);
                let c = wrap(k[0]).wrapping_mul(wrap(m)).wrapping_add(wrap(k[1]).wrapping_mul(wrap(m)).wrapping_mul(wrap(m)));
                Ok((vec![k1.ok_or_else(overflow)?, k[1]], c.wrapping_mul(self.alpha[0])))
            }
            Kind::Automorphism(_) => {
                let p = self.transpose_pow(m).ok_or_else(overflow)?;
                let f = |r: usize| p[r][0].checked_mul(k[0])?.checked_add(p[r][1].checked_mul(k[1])?);
                Ok((vec![f(0).ok_or_else(overflow)?, f(1).ok_or_else(overflow)?], 0))
            }
        }
    }

    /// `(A^T)^m k` modulo a prime, for automorphisms.
    pub fn transport_mod(&self, k: &[i128], m: i128, p: u64) -> [u64; 2] {
        let t = self.matrix_pow_mod(m, p);
        let pi = p as i128;
        let (a, b) = (k[0].rem_euclid(pi), k[1].rem_euclid(pi));
        // (A^m)^T k
        [((t[0][0] * a + t[1][0] * b).rem_euclid(pi)) as u64, ((t[0][1] * a + t[1][1] * b).rem_euclid(pi)) as u64]
    }

    pub fn is_automorphism(&self) -> bool {
        matches!(self.kind, Kind::Automorphism(_))
    }

    /// Fixed-point angle `α_i`.
    pub fn alpha_fixed(&self, i: usize) -> u128 {
        self.alpha[i]
    }
}

pub fn parse_fraction(s: &str) -> Result<BigRational, ErgoError> {
    let s = s.trim();
    let bad = || ErgoError::Format(format!("{s} is not a fraction p/q"));
    match s.split_once('/') {
        Some((a, b)) => {
            let (a, b): (BigInt, BigInt) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
            if b.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(a, b))
        }
        None => Ok(BigRational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

/// Finite trigonometric polynomial `Σ c_k e(k · x)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CharacterObservable {
    pub dim: usize,
    pub terms: Vec<(Vec<i64>, Complex64)>,
}

impl CharacterObservable {
    pub fn new(dim: usize, terms: Vec<(Vec<i64>, Complex64)>) -> Result<Self, ErgoError> {
        if terms.iter().any(|(k, _)| k.len() != dim) {
            return Err(ErgoError::Format(format!("frequency vectors must have length {dim}")));
        }
        let mut merged: Vec<(Vec<i64>, Complex64)> = Vec::new();
        for (k, c) in terms {
            match merged.iter_mut().find(|(k2, _)| *k2 == k) {
                Some(e) => e.1 += c,
                None => merged.push((k, c)),
            }
        }
        merged.retain(|(_, c)| *c != Complex64::new(0.0, 0.0));
        merged.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(CharacterObservable { dim, terms: merged })
    }

    pub fn constant(dim: usize, c: Complex64) -> Self {
        CharacterObservable::new(dim, vec![(vec![0; dim], c)]).unwrap()
    }

    /// `e(k · x)`.
    pub fn character(k: Vec<i64>) -> Self {
        let dim = k.len();
        CharacterObservable::new(dim, vec![(k, Complex64::new(1.0, 0.0))]).unwrap()
    }

    /// `∫ f dμ`, the zero coefficient.
    pub fn integral(&self) -> Complex64 {
        self.terms.iter().find(|(k, _)| k.iter().all(|&x| x == 0)).map(|t| t.1).unwrap_or_default()
    }

    /// Bound `Σ |c_k|` for the sup norm.
    pub fn sup_bound(&self) -> f64 {
        self.terms.iter().map(|(_, c)| c.norm()).sum()
    }

    pub fn conj(&self) -> Self {
        CharacterObservable {
            dim: self.dim,
            terms: self.terms.iter().map(|(k, c)| (k.iter().map(|x| -x).collect(), c.conj())).collect(),
        }
    }

    /// `f ⊗ g` on the product torus.
    pub fn tensor(&self, g: &Self) -> Self {
        let mut terms = Vec::new();
        for (k, c) in &self.terms {
            for (l, d) in &g.terms {
                terms.push((k.iter().chain(l).copied().collect(), c * d));
            }
        }
        CharacterObservable::new(self.dim + g.dim, terms).unwrap()
    }

    pub fn eval(&self, x: &Point) -> Complex64 {
        let mut s = Complex64::new(0.0, 0.0);
        for (k, c) in &self.terms {
            let e = match x {
                Point::Fixed(v) => {
                    e_fixed(k.iter().zip(v).fold(0u128, |acc, (ki, xi)| acc.wrapping_add(wrap(*ki as i128).wrapping_mul(*xi))))
                }
                Point::Rational { num, q } => {
                    let qi = *q as i128;
                    let r = k.iter().zip(num).fold(0i128, |acc, (ki, xi)| (acc + (*ki as i128).rem_euclid(qi) * *xi as i128).rem_euclid(qi));
                    e_ratio(r as u64, *q)
                }
            };
            s += c * e;
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rot(a: &str) -> System {
        System::new(&SystemSpec::TorusRotation { alpha: vec![a.into()] }).unwrap()
    }

    #[test]
    fn rotation_powers() {
        let s = rot("sqrt(2) - 1");
        assert!(s.ergodic);
        let x = s.seed_point(&Seed::Random(3)).unwrap();
        assert_eq!(s.power_map(0, &x), x);
        assert_eq!(s.power_map(-17, &s.power_map(17, &x)), x);
        assert_eq!(s.power_map(5, &s.power_map(7, &x)), s.power_map(12, &x));
        assert!(!rot("3/7").ergodic);
    }

    #[test]
    fn skew_closed_form() {
        let s = System::new(&SystemSpec::SkewProduct { alpha: "sqrt(2)".into() }).unwrap();
        let x = s.seed_point(&Seed::Random(1)).unwrap();
        assert_eq!(s.power_map(1, &x), s.step(&x));
        let mut y = x.clone();
        for _ in 0..25 {
            y = s.step(&y);
        }
        assert_eq!(s.power_map(25, &x), y);
        assert_eq!(s.power_map(-25, &y), x);
    }

    #[test]
    fn cat_map_rational_orbit() {
        let s = System::new(&SystemSpec::ToralAutomorphism { matrix: [[2, 1], [1, 1]] }).unwrap();
        assert!(s.hyperbolic() && s.ergodic);
        let x = s.seed_point(&Seed::Coordinates(vec!["1/5".into(), "2/5".into()])).unwrap();
        assert_eq!(x, Point::Rational { num: vec![1, 2], q: 5 });
        let three = s.step(&s.step(&s.step(&x)));
        assert_eq!(s.power_map(3, &x), three);
        // (2 1;1 1)(1,2) = (4,3) → (4·2+3, 4+3) = (11,7) ≡ (1,2) → (4,3)
        assert_eq!(three, Point::Rational { num: vec![4, 3], q: 5 });
        assert_eq!(s.power_map(-3, &three), x);
        let big = s.seed_point(&Seed::Random(9)).unwrap();
        assert_eq!(s.power_map(-1000, &s.power_map(1000, &big)), big);
        let rot = System::new(&SystemSpec::ToralAutomorphism { matrix: [[0, -1], [1, 0]] }).unwrap();
        assert!(!rot.hyperbolic());
    }

    #[test]
    fn transport_matches_evaluation() {
        for spec in [
            SystemSpec::TorusRotation { alpha: vec!["sqrt(2)".into(), "sqrt(3)".into()] },
            SystemSpec::SkewProduct { alpha: "sqrt(5)".into() },
        ] {
            let s = System::new(&spec).unwrap();
            let x = s.seed_point(&Seed::Random(4)).unwrap();
            for m in [-3i128, 0, 1, 7] {
                let k = vec![2i128, -1];
                let (k2, ph) = s.transport(&k, m).unwrap();
                let lhs = CharacterObservable::character(k.iter().map(|&v| v as i64).collect()).eval(&s.power_map(m, &x));
                let rhs = e_fixed(ph) * CharacterObservable::character(k2.iter().map(|&v| v as i64).collect()).eval(&x);
                assert!((lhs - rhs).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn observables() {
        let f = CharacterObservable::new(1, vec![(vec![0], Complex64::new(0.5, 0.0)), (vec![1], Complex64::new(0.25, 0.0))]).unwrap();
        assert_eq!(f.integral(), Complex64::new(0.5, 0.0));
        assert_eq!(f.sup_bound(), 0.75);
        assert_eq!(e_ratio(2, 4), Complex64::new(-1.0, 0.0));
        assert_eq!(e_fixed(1 << 127), Complex64::new(-1.0, 0.0));
    }
}
