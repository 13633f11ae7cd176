//! Finite approximations of Host–Kra seminorms of trigonometric
//! polynomials, and the closed form for rotations.

use std::collections::BTreeMap;

use num::complex::Complex64;
use serde::{Deserialize, Serialize};

use super::system::{e_fixed, CharacterObservable, System, SystemSpec};
use super::ErgoError;

pub const DEFAULT_H: u64 = 512;
/// Largest enumeration accepted by [`hk_character_oracle`].
pub const ORACLE_LIMIT: f64 = 1e7;
/// Relative change under doubling above which the schedule is flagged.
pub const DOUBLING_TOL: f64 = 0.10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    /// `H_j` for the averaging levels, outermost last; missing levels use
    /// the last entry.
    pub h: Vec<u64>,
    /// Recompute with the outermost `H` doubled.
    #[serde(default = "yes")]
    pub doubling: bool,
}

fn yes() -> bool {
    true
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule { h: vec![DEFAULT_H], doubling: true }
    }
}

impl Schedule {
    pub fn uniform(h: u64) -> Self {
        Schedule { h: vec![h], doubling: true }
    }

    fn at(&self, level: usize) -> u64 {
        *self.h.get(level).or(self.h.last()).unwrap_or(&DEFAULT_H)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeminormEstimate {
    pub s: u32,
    pub schedule: Vec<u64>,
    pub value: f64,
    pub oracle: Option<f64>,
    /// Value with the outermost `H` doubled.
    pub doubled: Option<f64>,
    pub schedule_too_small: bool,
}

/// Trigonometric polynomial with exact integer frequencies.
type Poly = BTreeMap<Vec<i128>, Complex64>;

fn poly_of(f: &CharacterObservable) -> Poly {
    f.terms.iter().map(|(k, c)| (k.iter().map(|&x| x as i128).collect(), *c)).collect()
}

/// `ḡ · T^h g`.
fn difference(sys: &System, g: &Poly, h: i128) -> Result<Poly, ErgoError> {
    let moved: Vec<(Vec<i128>, Complex64)> = g
        .iter()
        .map(|(k, c)| sys.transport(k, h).map(|(k2, ph)| (k2, c * e_fixed(ph))))
        .collect::<Result<_, _>>()?;
    let mut out = Poly::new();
    for (k, c) in g {
        let cc = c.conj();
        for (k2, d) in &moved {
            let f: Vec<i128> = k2.iter().zip(k).map(|(a, b)| a - b).collect();
            *out.entry(f).or_default() += cc * d;
        }
    }
    Ok(out)
}

/// `‖E(g | invariant)‖²`.
fn level1(sys: &System, g: &Poly) -> f64 {
    g.iter().filter(|(k, _)| sys.resonant(k)).map(|(_, c)| c.norm_sqr()).sum()
}

/// `E_{0≤h<H} e(hθ)`.
fn dirichlet(theta: u128, h: u64) -> Complex64 {
    if theta == 0 {
        return Complex64::new(1.0, 0.0);
    }
    let one = Complex64::new(1.0, 0.0);
    let den = one - e_fixed(theta);
    if den.norm() < 1e-12 {
        let s: Complex64 = (0..h).map(|j| e_fixed((j as u128).wrapping_mul(theta))).sum();
        return s / h as f64;
    }
    (one - e_fixed((h as u128).wrapping_mul(theta))) / (den * h as f64)
}

/// `E_{0≤h<H} ‖E(ḡ T^h g | invariant)‖²` for a rotation, in closed form:
/// the coefficient at an invariant frequency `j` is
/// `Σ_{k'-k=j} ḡ_k g_{k'} e(h k'·α)`.
fn level2_rotation(sys: &System, g: &Poly, h: u64) -> f64 {
    let mut groups: BTreeMap<Vec<i128>, BTreeMap<u128, Complex64>> = BTreeMap::new();
    let mut phases: BTreeMap<&Vec<i128>, u128> = BTreeMap::new();
    for k2 in g.keys() {
        let th = k2.iter().enumerate().fold(0u128, |acc, (i, &x)| acc.wrapping_add((x as u128).wrapping_mul(sys.alpha_fixed(i))));
        phases.insert(k2, th);
    }
    for (k, c) in g {
        for (k2, d) in g {
            let j: Vec<i128> = k2.iter().zip(k).map(|(a, b)| a - b).collect();
            if !sys.resonant(&j) {
                continue;
            }
            *groups.entry(j).or_default().entry(phases[k2]).or_default() += c.conj() * d;
        }
    }
    let mut total = 0.0;
    for terms in groups.values() {
        let v: Vec<(u128, Complex64)> = terms.iter().map(|(t, c)| (*t, *c)).collect();
        for (ta, ca) in &v {
            for (tb, cb) in &v {
                total += (ca * cb.conj() * dirichlet(ta.wrapping_sub(*tb), h)).re;
            }
        }
    }
    total.max(0.0)
}

/// `⟦g⟧_s^{2^s}` at the finite schedule.
fn power(sys: &System, g: &Poly, s: u32, sched: &Schedule) -> Result<f64, ErgoError> {
    if s == 1 {
        return Ok(level1(sys, g));
    }
    let h = sched.at(s as usize - 2);
    if s == 2 && sys.is_rotation() {
        return Ok(level2_rotation(sys, g, h));
    }
    let mut acc = 0.0;
    for j in 0..h {
        let d = difference(sys, g, j as i128)?;
        acc += power(sys, &d, s - 1, sched)?;
    }
    Ok(acc / h as f64)
}

fn root(x: f64, s: u32) -> f64 {
    x.max(0.0).powf(1.0 / (1u64 << s) as f64)
}

/// Finite nested average for `⟦f⟧_s`, `1 ≤ s ≤ 4`.  The innermost level
/// `⟦g⟧_1 = ‖E(g | invariant)‖` is exact; for ergodic systems it is `|∫g|`.
pub fn hk_seminorm_approx(
    sys: &System,
    f: &CharacterObservable,
    s: u32,
    schedule: &Schedule,
) -> Result<SeminormEstimate, ErgoError> {
    if !(1..=4).contains(&s) {
        return Err(ErgoError::Format(format!("seminorm order {s} outside 1..=4")));
    }
    if f.dim != sys.dim {
        return Err(ErgoError::Format("observable and system dimensions differ".into()));
    }
    let g = poly_of(f);
    let value = root(power(sys, &g, s, schedule)?, s);
    let levels: Vec<u64> = (0..s.saturating_sub(1) as usize).map(|l| schedule.at(l)).collect();
    let mut doubled = None;
    if schedule.doubling && s >= 2 {
        let mut h = levels.clone();
        *h.last_mut().unwrap() *= 2;
        let d = root(power(sys, &g, s, &Schedule { h, doubling: false })?, s);
        doubled = Some(d);
    }
    let too_small = doubled.is_some_and(|d| (d - value).abs() > DOUBLING_TOL * value.abs().max(1e-300));
    let oracle = if sys.is_rotation() && sys.ergodic && s >= 2 { hk_character_oracle(sys, f, s).ok() } else { None };
    Ok(SeminormEstimate { s, schedule: levels, value, oracle, doubled, schedule_too_small: too_small })
}

/// Limit value of `⟦f⟧_s` on an ergodic rotation: the sum of
/// `Π_ω C^{|ω|} c_{k_ω}` over cubes `(k_ω)_{ω∈{0,1}^s}` in the support with
/// `Σ_ω (-1)^{|ω|} k_ω = 0` and, for each direction `i`,
/// `Σ_{ω_i = 1} (-1)^{|ω|} k_ω · α ∈ Z`.
pub fn hk_character_oracle(sys: &System, f: &CharacterObservable, s: u32) -> Result<f64, ErgoError> {
    if !sys.is_rotation() || !sys.ergodic {
        return Err(ErgoError::NotErgodic);
    }
    if s == 0 {
        return Err(ErgoError::Format("s must be positive".into()));
    }
    let verts = 1usize << s;
    let terms: Vec<(Vec<i128>, Complex64)> =
        f.terms.iter().map(|(k, c)| (k.iter().map(|&x| x as i128).collect(), *c)).collect();
    let cost = (terms.len() as f64).powi(verts as i32);
    if cost > ORACLE_LIMIT {
        return Err(ErgoError::ComplexityRefusal { cost, limit: ORACLE_LIMIT });
    }
    if terms.is_empty() {
        return Ok(0.0);
    }
    let dim = f.dim;
    let mut choice = vec![0usize; verts];
    let mut total = Complex64::new(0.0, 0.0);
    loop {
        let mut sum = vec![0i128; dim];
        let mut dirs = vec![vec![0i128; dim]; s as usize];
        let mut coef = Complex64::new(1.0, 0.0);
        for (w, &c) in choice.iter().enumerate() {
            let odd = w.count_ones() % 2 == 1;
            let (k, v) = &terms[c];
            coef *= if odd { v.conj() } else { *v };
            for d in 0..dim {
                let x = if odd { -k[d] } else { k[d] };
                sum[d] += x;
                for (i, dir) in dirs.iter_mut().enumerate() {
                    if w >> i & 1 == 1 {
                        dir[d] += x;
                    }
                }
            }
        }
        if sum.iter().all(|&x| x == 0) && dirs.iter().all(|d| sys.resonant(d)) {
            total += coef;
        }
        let mut i = 0;
        while i < verts && choice[i] + 1 == terms.len() {
            choice[i] = 0;
            i += 1;
        }
        if i == verts {
            break;
        }
        choice[i] += 1;
    }
    Ok(root(total.re, s))
}

/// The rotation `T × T` on the doubled torus.
pub fn product_system(sys: &System) -> Result<System, ErgoError> {
    match &sys.spec {
        SystemSpec::TorusRotation { alpha } => {
            System::new(&SystemSpec::TorusRotation { alpha: alpha.iter().chain(alpha).cloned().collect() })
        }
        _ => Err(ErgoError::UnsupportedSystem("products are formed for rotations".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rot() -> System {
        System::new(&SystemSpec::TorusRotation { alpha: vec!["sqrt(2) - 1".into()] }).unwrap()
    }

    fn obs(t: &[(i64, f64)]) -> CharacterObservable {
        CharacterObservable::new(1, t.iter().map(|&(k, c)| (vec![k], Complex64::new(c, 0.0))).collect()).unwrap()
    }

    #[test]
    fn characters_and_constants() {
        let s = rot();
        let e = obs(&[(1, 1.0)]);
        assert_eq!(hk_seminorm_approx(&s, &e, 1, &Schedule::default()).unwrap().value, 0.0);
        let v = hk_seminorm_approx(&s, &e, 2, &Schedule::default()).unwrap();
        assert!((v.value - 1.0).abs() < 0.05);
        assert!(!v.schedule_too_small);
        let c = obs(&[(0, 0.3)]);
        for k in 1..=3 {
            let v = hk_seminorm_approx(&s, &c, k, &Schedule::uniform(16)).unwrap().value;
            assert!((v - 0.3).abs() < 1e-12);
        }
    }

    #[test]
    fn oracle_values() {
        let s = rot();
        let e = obs(&[(1, 1.0)]);
        for k in 2..=4 {
            assert!((hk_character_oracle(&s, &e, k).unwrap() - 1.0).abs() < 1e-12);
        }
        let two = obs(&[(1, 0.5), (2, 0.5)]);
        let s2 = hk_character_oracle(&s, &two, 2).unwrap();
        assert!((s2 - (2.0 * 0.5f64.powi(4)).powf(0.25)).abs() < 1e-12);
        // order three counts additive quadruples as well
        let s3 = hk_character_oracle(&s, &two, 3).unwrap();
        assert!((s3 - (1.0f64 / 32.0).powf(0.125)).abs() < 1e-12);
        assert!(hk_character_oracle(&System::new(&SystemSpec::TorusRotation { alpha: vec!["1/3".into()] }).unwrap(), &e, 2).is_err());
    }

    #[test]
    fn approximation_tracks_oracle() {
        let s = rot();
        let two = obs(&[(1, 0.5), (2, 0.5)]);
        for k in 2..=3 {
            let est = hk_seminorm_approx(&s, &two, k, &Schedule::uniform(128)).unwrap();
            let o = est.oracle.unwrap();
            assert!((est.value - o).abs() < 0.03, "s={k}: {} vs {o}", est.value);
        }
    }

    #[test]
    fn product_rotation_is_not_ergodic() {
        let p = product_system(&rot()).unwrap();
        assert!(!p.ergodic);
        assert!(p.resonant(&[1, -1]));
    }
}
