//! Multiple ergodic averages along floor-Hardy iterates, Weyl sums,
//! short-interval averages and recurrence.

use std::collections::HashMap;

use num::complex::Complex64;
use num::{BigRational, Integer, One, ToPrimitive};
use serde::{Deserialize, Serialize};

use super::iterate::{iterate_sequence, IterateSequence};
use super::sum::{par_sum, CSum, Neumaier};
use super::system::{e_fixed, e_ratio, to_fixed, CharacterObservable, Point, System};
use super::ErgoError;
use crate::lefun::growth::{compare_growth, Verdict};
use crate::lefun::num::NumHp;
use crate::lefun::{Expr, LEFunction, LeError};
use crate::scalar::Real;

/// Work limit for pair-sum L² computations, `N² · terms`.
pub const PAIR_LIMIT: f64 = 1e10;
/// Work limit for the per-window fallback of the short-interval average.
pub const WINDOW_LIMIT: f64 = 1e9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Pointwise,
    ExactCharacterL2,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Pointwise => "pointwise",
            Mode::ExactCharacterL2 => "exact-character-L2",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LadderPoint {
    pub n: u64,
    pub value: Complex64,
    pub target: Complex64,
    pub gap: f64,
}

impl LadderPoint {
    pub fn new(n: u64, value: Complex64, target: Complex64) -> Self {
        LadderPoint { n, value, target, gap: (value - target).norm() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AverageReport {
    pub mode: Mode,
    pub points: Vec<LadderPoint>,
    /// Frequency merges in automorphism L² mode that were matched modulo
    /// primes only.
    pub unverified_merges: usize,
}

impl AverageReport {
    /// Recomputes every gap from the stored value and target.
    pub fn consistent(&self) -> bool {
        self.points.iter().all(|p| p.gap == (p.value - p.target).norm())
    }

    pub fn gaps(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.gap).collect()
    }
}

fn check_ladder(ladder: &[u64]) -> Result<u64, ErgoError> {
    if ladder.is_empty() || ladder[0] == 0 || ladder.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ErgoError::Format("ladder must be positive and strictly increasing".into()));
    }
    Ok(*ladder.last().unwrap())
}

fn sequences(a: &[LEFunction], n: u64) -> Result<Vec<IterateSequence>, ErgoError> {
    a.iter().map(|f| iterate_sequence(f, n)).collect()
}

fn product_target(fs: &[CharacterObservable]) -> Complex64 {
    fs.iter().fold(Complex64::new(1.0, 0.0), |acc, f| acc * f.integral())
}

/// `(1/N) Σ_n Π_i f_i(T^{⌊a_i(n)⌋} x)`.
pub fn multiple_average_pointwise(
    sys: &System,
    fs: &[CharacterObservable],
    a: &[LEFunction],
    n: u64,
    x: &Point,
) -> Result<Complex64, ErgoError> {
    Ok(pointwise_ladder(sys, fs, a, &[n], x)?.points[0].value)
}

pub fn pointwise_ladder(
    sys: &System,
    fs: &[CharacterObservable],
    a: &[LEFunction],
    ladder: &[u64],
    x: &Point,
) -> Result<AverageReport, ErgoError> {
    if fs.len() != a.len() {
        return Err(ErgoError::Format("observables and iterates differ in number".into()));
    }
    let n_max = check_ladder(ladder)?;
    let seqs = sequences(a, n_max)?;
    let term = |i: usize| -> Complex64 {
        fs.iter()
            .zip(&seqs)
            .fold(Complex64::new(1.0, 0.0), |acc, (f, s)| acc * f.eval(&sys.power_map(s.values[i] as i128, x)))
    };
    let target = product_target(fs);
    let points = ladder
        .iter()
        .map(|&n| LadderPoint::new(n, par_sum(n as usize, term) / n as f64, target))
        .collect();
    Ok(AverageReport { mode: Mode::Pointwise, points, unverified_merges: 0 })
}

/// One product term: choice of a character from each observable.
struct Tuple {
    ks: Vec<Vec<i128>>,
    coef: Complex64,
}

fn tuples(fs: &[CharacterObservable]) -> Vec<Tuple> {
    let mut out = vec![Tuple { ks: Vec::new(), coef: Complex64::new(1.0, 0.0) }];
    for f in fs {
        let mut next = Vec::with_capacity(out.len() * f.terms.len());
        for t in &out {
            for (k, c) in &f.terms {
                let mut ks = t.ks.clone();
                ks.push(k.iter().map(|&v| v as i128).collect());
                next.push(Tuple { ks, coef: t.coef * c });
            }
        }
        out = next;
    }
    out
}

const PRIMES: [u64; 2] = [2_305_843_009_213_693_951, 2_305_843_009_213_693_921];

#[derive(Clone, PartialEq, Eq, Hash)]
enum Key {
    Exact(Vec<i128>),
    Modular([u64; 4]),
}

/// Frequency and phase of `Π_i e(k_i · T^{m_i} x)`.
fn term_key(sys: &System, ks: &[Vec<i128>], ms: &[i128]) -> Result<(Key, u128, Option<Vec<i128>>), ErgoError> {
    if sys.is_automorphism() {
        let mut r = [0u64; 4];
        for (j, p) in PRIMES.iter().enumerate() {
            let mut acc = [0u128; 2];
            for (k, &m) in ks.iter().zip(ms) {
                let v = sys.transport_mod(k, m, *p);
                acc[0] = (acc[0] + v[0] as u128) % *p as u128;
                acc[1] = (acc[1] + v[1] as u128) % *p as u128;
            }
            r[2 * j] = acc[0] as u64;
            r[2 * j + 1] = acc[1] as u64;
        }
        let exact = ks
            .iter()
            .zip(ms)
            .map(|(k, &m)| sys.transport(k, m).ok().map(|t| t.0))
            .try_fold(vec![0i128; 2], |acc, v| {
                let v = v?;
                Some(vec![acc[0].checked_add(v[0])?, acc[1].checked_add(v[1])?])
            });
        return Ok((Key::Modular(r), 0, exact));
    }
    let mut freq = vec![0i128; sys.dim];
    let mut phase = 0u128;
    for (k, &m) in ks.iter().zip(ms) {
        let (k2, ph) = sys.transport(k, m)?;
        for (a, b) in freq.iter_mut().zip(k2) {
            *a = a.checked_add(b).ok_or(ErgoError::ComplexityRefusal { cost: f64::INFINITY, limit: 0.0 })?;
        }
        phase = phase.wrapping_add(ph);
    }
    Ok((Key::Exact(freq), phase, None))
}

fn is_zero_key(k: &Key) -> bool {
    match k {
        Key::Exact(v) => v.iter().all(|&x| x == 0),
        Key::Modular(r) => r.iter().all(|&x| x == 0),
    }
}

/// `‖(1/N) Σ_n Π_i T^{⌊a_i(n)⌋} f_i − Π_i ∫ f_i‖_{L²(μ)}` computed in the
/// character algebra.  Terms are grouped by their frequency, so that
/// the pair sum over `(n, n')` collapses to Parseval's identity.
pub fn multiple_average_l2(
    sys: &System,
    fs: &[CharacterObservable],
    a: &[LEFunction],
    n: u64,
) -> Result<f64, ErgoError> {
    Ok(l2_ladder(sys, fs, a, &[n])?.points[0].value.re)
}

pub fn l2_ladder(
    sys: &System,
    fs: &[CharacterObservable],
    a: &[LEFunction],
    ladder: &[u64],
) -> Result<AverageReport, ErgoError> {
    if fs.len() != a.len() {
        return Err(ErgoError::Format("observables and iterates differ in number".into()));
    }
    let n_max = check_ladder(ladder)?;
    let ts = tuples(fs);
    let cost = (n_max as f64).powi(2) * ts.len() as f64;
    if cost > PAIR_LIMIT {
        return Err(ErgoError::ComplexityRefusal { cost, limit: PAIR_LIMIT });
    }
    let target = product_target(fs);
    let seqs = sequences(a, n_max)?;
    let mut acc: HashMap<Key, (CSum, Option<Vec<i128>>)> = HashMap::new();
    let mut order: Vec<Key> = Vec::new();
    let mut unverified = 0;
    let mut points = Vec::new();
    let mut next = 0;
    for i in 0..n_max as usize {
        let ms: Vec<i128> = seqs.iter().map(|s| s.values[i] as i128).collect();
        for t in &ts {
            let (key, phase, exact) = term_key(sys, &t.ks, &ms)?;
            let entry = acc.entry(key.clone()).or_insert_with(|| {
                order.push(key);
                (CSum::default(), exact.clone())
            });
            if sys.is_automorphism() && entry.1 != exact {
                unverified += 1;
            }
            entry.0.add(t.coef * e_fixed(phase));
        }
        if i as u64 + 1 == ladder[next] {
            let nf = ladder[next] as f64;
            let mut s = Neumaier::default();
            for k in &order {
                let mut c = acc[k].0.value() / nf;
                if is_zero_key(k) {
                    c -= target;
                }
                s.add(c.norm_sqr());
            }
            let zero_seen = order.iter().any(is_zero_key);
            if !zero_seen {
                s.add(target.norm_sqr());
            }
            let d = s.value().max(0.0).sqrt();
            points.push(LadderPoint::new(ladder[next], Complex64::new(d, 0.0), Complex64::new(0.0, 0.0)));
            next += 1;
        }
    }
    Ok(AverageReport { mode: Mode::ExactCharacterL2, points, unverified_merges: unverified })
}

/// A frequency `t ∈ [0, 1)` of a Weyl sum, exact when rational.
#[derive(Clone, Debug, PartialEq)]
pub struct WeylFreq(pub BigRational);

impl WeylFreq {
    pub fn ratio(p: i64, q: i64) -> Self {
        WeylFreq(BigRational::new(p.into(), q.into()))
    }

    pub fn from_f64(x: f64) -> Option<Self> {
        BigRational::from_float(x).map(WeylFreq)
    }

    pub fn parse(s: &str) -> Result<Self, ErgoError> {
        if let Ok(q) = super::system::parse_fraction(s) {
            return Ok(WeylFreq(q));
        }
        s.trim().parse::<f64>().ok().and_then(Self::from_f64).ok_or_else(|| ErgoError::Format(format!("bad frequency {s}")))
    }
}

/// `(1/N) Σ_n e(Σ_i t_i ⌊a_i(n)⌋)`.
pub fn weyl_sum(a: &[LEFunction], ts: &[WeylFreq], n: u64) -> Result<Complex64, ErgoError> {
    Ok(weyl_ladder(a, ts, &[n])?.points[0].value)
}

pub fn weyl_ladder(a: &[LEFunction], ts: &[WeylFreq], ladder: &[u64]) -> Result<AverageReport, ErgoError> {
    if a.len() != ts.len() {
        return Err(ErgoError::Format("iterates and frequencies differ in number".into()));
    }
    let n_max = check_ladder(ladder)?;
    let one = Complex64::new(1.0, 0.0);
    let target = if ts.iter().all(|t| (t.0.clone() - t.0.floor()).is_integer()) { one } else { Complex64::new(0.0, 0.0) };
    let active: Vec<usize> = (0..a.len()).filter(|&i| !ts[i].0.is_integer()).collect();
    if active.is_empty() {
        let points = ladder.iter().map(|&n| LadderPoint::new(n, one, target)).collect();
        return Ok(AverageReport { mode: Mode::Pointwise, points, unverified_merges: 0 });
    }
    let seqs: Vec<IterateSequence> = active.iter().map(|&i| iterate_sequence(&a[i], n_max)).collect::<Result<_, _>>()?;
    let den = active.iter().fold(num::BigInt::one(), |l, &i| l.lcm(ts[i].0.denom()));
    let phase: Box<dyn Fn(usize) -> Complex64 + Sync> = match den.to_u64().filter(|&d| d < 1 << 40) {
        Some(q) => {
            let nums: Vec<i128> = active
                .iter()
                .map(|&i| (ts[i].0.clone() * BigRational::from_integer(den.clone())).to_integer().to_i128().unwrap())
                .collect();
            Box::new(move |j: usize| {
                let qi = q as i128;
                let r = nums.iter().zip(&seqs).fold(0i128, |acc, (p, s)| {
                    (acc + p.rem_euclid(qi) * (s.values[j] as i128).rem_euclid(qi)).rem_euclid(qi)
                });
                e_ratio(r as u64, q)
            })
        }
        None => {
            let fx: Vec<u128> = active.iter().map(|&i| to_fixed(&NumHp::from_ratio(&ts[i].0))).collect();
            Box::new(move |j: usize| {
                e_fixed(fx.iter().zip(&seqs).fold(0u128, |acc, (t, s)| {
                    acc.wrapping_add((s.values[j] as i128 as u128).wrapping_mul(*t))
                }))
            })
        }
    };
    let points = ladder
        .iter()
        .map(|&n| LadderPoint::new(n, par_sum(n as usize, &phase) / n as f64, target))
        .collect();
    Ok(AverageReport { mode: Mode::Pointwise, points, unverified_merges: 0 })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntervalCheck {
    pub r: u64,
    pub d: u32,
    /// `‖E_{1≤n≤R} A_{R,n}‖`.
    pub lhs: f64,
    /// `E_{1≤r≤R} ‖E_{r≤n≤r+L(r)} A_{R,n}‖^d`.
    pub rhs: f64,
}

impl IntervalCheck {
    pub fn holds(&self, tol: f64) -> bool {
        self.lhs <= self.rhs.powf(1.0 / self.d as f64) + tol
    }
}

fn window_len(l: &LEFunction, r: u64) -> Result<u64, ErgoError> {
    let (v, _) = l.expr.eval_f64_err(r as f64)?;
    Ok(v.max(0.0).floor() as u64)
}

/// Both sides of the short-interval inequality at a finite `R`, with
/// `A_{R,n} = Π_i T^{⌊a_i(n)⌋} f_i` taken in the character algebra.
pub fn short_interval_double_average(
    sys: &System,
    fs: &[CharacterObservable],
    a: &[LEFunction],
    r_max: u64,
    l: &LEFunction,
    d: u32,
) -> Result<IntervalCheck, ErgoError> {
    if fs.len() != a.len() || d == 0 {
        return Err(ErgoError::Format("bad arguments to the short-interval average".into()));
    }
    let one = LEFunction::new(Expr::int(1))?;
    let t = LEFunction::new(Expr::Var)?;
    let lo = compare_growth(l, &one)?.verdict;
    let hi = compare_growth(l, &t)?.verdict;
    if lo != Verdict::Dominates || hi != Verdict::Dominated {
        return Err(ErgoError::Le(LeError::Domain { t: f64::NAN, reason: format!("window {l} must satisfy 1 ≺ L ≺ t") }));
    }
    let lens: Vec<u64> = (1..=r_max).map(|r| window_len(l, r)).collect::<Result<_, _>>()?;
    let n_top = (1..=r_max).zip(&lens).map(|(r, w)| r + w).max().unwrap_or(1).max(r_max);
    let seqs = sequences(a, n_top)?;
    let ts = tuples(fs);
    // keys of A_n as a trigonometric polynomial; prefix sums per key
    let mut index: HashMap<Key, usize> = HashMap::new();
    let mut rows: Vec<Vec<(usize, Complex64)>> = Vec::with_capacity(n_top as usize);
    for i in 0..n_top as usize {
        let ms: Vec<i128> = seqs.iter().map(|s| s.values[i] as i128).collect();
        let mut row = Vec::with_capacity(ts.len());
        for tup in &ts {
            let (key, phase, _) = term_key(sys, &tup.ks, &ms)?;
            let len = index.len();
            let slot = *index.entry(key).or_insert(len);
            row.push((slot, tup.coef * e_fixed(phase)));
        }
        rows.push(row);
    }
    let nk = index.len();
    let norm_of = |from: usize, to: usize, prefix: &dyn Fn(usize, usize) -> Complex64| -> f64 {
        let cnt = (to - from) as f64;
        (0..nk).map(|k| ((prefix(to, k) - prefix(from, k)) / cnt).norm_sqr()).sum::<f64>().sqrt()
    };
    if (n_top as f64) * (nk as f64) <= 2e8 {
        // prefix[n][k] = Σ_{i<n} coefficient of key k in A_{i+1}
        let mut prefix = vec![Complex64::new(0.0, 0.0); (n_top as usize + 1) * nk];
        for (i, row) in rows.iter().enumerate() {
            let (done, rest) = prefix.split_at_mut((i + 1) * nk);
            rest[..nk].copy_from_slice(&done[i * nk..]);
            for &(k, c) in row {
                rest[k] += c;
            }
        }
        let p = |n: usize, k: usize| prefix[n * nk + k];
        let lhs = norm_of(0, r_max as usize, &p);
        let mut s = Neumaier::default();
        for r in 1..=r_max as usize {
            s.add(norm_of(r - 1, r + lens[r - 1] as usize, &p).powi(d as i32));
        }
        return Ok(IntervalCheck { r: r_max, d, lhs, rhs: s.value() / r_max as f64 });
    }
    let work: f64 = lens.iter().map(|&w| (w + 1) as f64).sum::<f64>() * ts.len() as f64;
    if work > WINDOW_LIMIT {
        return Err(ErgoError::ComplexityRefusal { cost: work, limit: WINDOW_LIMIT });
    }
    let window = |from: usize, to: usize| -> f64 {
        let mut m: HashMap<usize, CSum> = HashMap::new();
        for row in &rows[from..to] {
            for &(k, c) in row {
                m.entry(k).or_default().add(c);
            }
        }
        let cnt = (to - from) as f64;
        m.values().map(|c| (c.value() / cnt).norm_sqr()).sum::<f64>().sqrt()
    };
    let lhs = window(0, r_max as usize);
    let mut s = Neumaier::default();
    for r in 1..=r_max as usize {
        s.add(window(r - 1, r + lens[r - 1] as usize).powi(d as i32));
    }
    Ok(IntervalCheck { r: r_max, d, lhs, rhs: s.value() / r_max as f64 })
}

/// Axis-aligned box `Π [lo_j, hi_j)` in the torus.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusBox {
    pub sides: Vec<(f64, f64)>,
}

impl TorusBox {
    pub fn measure(&self) -> f64 {
        self.sides.iter().map(|(a, b)| (b - a).clamp(0.0, 1.0)).product()
    }
}

/// Fixed-point length of the arc `[lo, hi)`; `None` is the full circle.
/// Intersections only depend on the length, so the start is dropped.
fn arc_len(lo: f64, hi: f64) -> Option<u128> {
    if hi - lo >= 1.0 {
        return None;
    }
    let s = to_fixed(&NumHp::from_f64(lo));
    let e = to_fixed(&NumHp::from_f64(hi));
    Some(e.wrapping_sub(s))
}

/// Exact measure, in units of `2^-128`, of `∩_j (A - s_j)` for an arc `A`
/// of length `len` and shifts `s_j`.
fn arc_intersection(len: u128, shifts: &[u128]) -> u128 {
    let mut cur: Vec<(u128, u128)> = vec![(0, len)];
    for &s in shifts {
        // A - s relative to the start of A begins at -s
        let st = s.wrapping_neg();
        let mut pieces = Vec::with_capacity(2);
        match st.checked_add(len) {
            Some(end) => pieces.push((st, end)),
            None => {
                pieces.push((st, u128::MAX));
                pieces.push((0, st.wrapping_add(len)));
            }
        }
        let mut next = Vec::new();
        for &(a, b) in &cur {
            for &(c, d) in &pieces {
                let (lo, hi) = (a.max(c), b.min(d));
                if lo < hi {
                    next.push((lo, hi));
                }
            }
        }
        cur = next;
    }
    cur.iter().map(|(a, b)| b - a).sum()
}

/// `(1/N) Σ_n μ(A ∩ T^{-⌊a_1(n)⌋}A ∩ ⋯ ∩ T^{-⌊a_k(n)⌋}A)` for rotations.
pub fn recurrence_average(sys: &System, bx: &TorusBox, a: &[LEFunction], n: u64) -> Result<f64, ErgoError> {
    Ok(recurrence_ladder(sys, bx, a, &[n])?[0])
}

pub fn recurrence_ladder(sys: &System, bx: &TorusBox, a: &[LEFunction], ladder: &[u64]) -> Result<Vec<f64>, ErgoError> {
    if !sys.is_rotation() {
        return Err(ErgoError::UnsupportedSystem("recurrence averages need a rotation".into()));
    }
    if bx.sides.len() != sys.dim {
        return Err(ErgoError::Format(format!("box must have {} sides", sys.dim)));
    }
    let n_max = check_ladder(ladder)?;
    let arcs: Vec<Option<u128>> = bx.sides.iter().map(|&(lo, hi)| arc_len(lo, hi)).collect();
    if a.is_empty() {
        return Ok(ladder.iter().map(|_| bx.measure()).collect());
    }
    let seqs = sequences(a, n_max)?;
    const SCALE: f64 = 3.402_823_669_209_385e38;
    let term = |i: usize| -> f64 {
        let mut m = 1.0;
        for (j, arc) in arcs.iter().enumerate() {
            let Some(len) = *arc else { continue };
            let shifts: Vec<u128> = seqs
                .iter()
                .map(|s| (s.values[i] as i128 as u128).wrapping_mul(sys.alpha_fixed(j)))
                .collect();
            m *= arc_intersection(len, &shifts) as f64 / SCALE;
        }
        m
    };
    Ok(ladder.iter().map(|&n| super::sum::par_sum_real(n as usize, term) / n as f64).collect())
}

/// Both sides of van der Corput's inequality
/// `‖(1/N) Σ u_n‖² ≤ (N+H-1)/(H² N²) Σ_{|m|<H} (H-|m|) Re Σ_n ⟨u_{n+m}, u_n⟩`
/// for a finite sequence of real vectors.
pub fn vdc_check(u: &[Vec<f64>], h: usize) -> (f64, f64) {
    let n = u.len();
    let dim = u.first().map_or(0, Vec::len);
    let mut mean = vec![Neumaier::default(); dim];
    for v in u {
        for (m, x) in mean.iter_mut().zip(v) {
            m.add(*x);
        }
    }
    let nf = n as f64;
    let lhs: f64 = mean.iter().map(|m| (m.value() / nf).powi(2)).sum();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut s = Neumaier::default();
    for m in -(h as i64 - 1)..h as i64 {
        let w = (h as i64 - m.abs()) as f64;
        let mut c = Neumaier::default();
        for i in 0..n as i64 {
            let j = i + m;
            if j >= 0 && j < n as i64 {
                c.add(dot(&u[j as usize], &u[i as usize]));
            }
        }
        s.add(w * c.value());
    }
    let hf = h as f64;
    let rhs = (nf + hf - 1.0) / (hf * hf * nf * nf) * s.value();
    (lhs, rhs)
}
