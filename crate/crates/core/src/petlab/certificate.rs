//! Reduction certificates: the integer polynomials `p_{ε,j}`, their exact
//! verification and the JSON form.

use std::collections::BTreeMap;

use num::{BigInt, BigRational, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::coef::{MPoly, ShiftMono};
use super::reduce::VdcStep;
use super::PetError;

/// Largest `s` for which every `ε ∈ {0,1}^s` is stored.
pub const EXPLICIT_MAX_S: usize = 12;
/// Largest `s` for which checks fall back to enumerating all `ε`.
pub const ENUMERATE_MAX_S: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertMode {
    /// `p` lists every `ε`.
    Explicit,
    /// `p` lists the unit vectors; `p_ε = Σ_{i∈ε} p_{e_i}`.
    EpsLinear,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReductionCertificate {
    pub s: usize,
    pub t: usize,
    pub y: Vec<i64>,
    /// Length of the original leading vector.
    pub k: usize,
    pub mode: CertMode,
    /// `ε ↦ (p_{ε,1}, …, p_{ε,k})`; absent keys are zero.
    pub p: BTreeMap<Vec<u8>, Vec<MPoly>>,
    pub trace: Vec<VdcStep>,
}

/// `A_ε` with the `u_j` as indeterminates: `(m-monomial, j) ↦ coefficient`.
pub type APoly = BTreeMap<(ShiftMono, usize), BigInt>;

pub fn unit(s: usize, i: usize) -> Vec<u8> {
    let mut e = vec![0u8; s];
    e[i] = 1;
    e
}

fn all_eps(s: usize) -> impl Iterator<Item = Vec<u8>> {
    (0u64..1 << s).map(move |bits| (0..s).map(|i| ((bits >> i) & 1) as u8).collect())
}

impl ReductionCertificate {
    /// Whether `A_ε` carries the conjugation `C^{|ε|}`.
    pub fn conj(eps: &[u8]) -> bool {
        eps.iter().filter(|&&e| e == 1).count() % 2 == 1
    }

    pub fn polys(&self, eps: &[u8]) -> Vec<MPoly> {
        match self.mode {
            CertMode::Explicit => self.p.get(eps).cloned().unwrap_or_else(|| vec![MPoly::zero(); self.k]),
            CertMode::EpsLinear => {
                let mut out = vec![MPoly::zero(); self.k];
                for (i, _) in eps.iter().enumerate().filter(|(_, &e)| e == 1) {
                    if let Some(ps) = self.p.get(&unit(self.s, i)) {
                        for (o, q) in out.iter_mut().zip(ps) {
                            *o = o.add(q);
                        }
                    }
                }
                out
            }
        }
    }

    pub fn a_poly(&self, eps: &[u8]) -> APoly {
        a_of(&self.polys(eps))
    }

    /// Switches to the explicit form (all `ε` listed).
    pub fn to_explicit(&self) -> ReductionCertificate {
        let mut p = BTreeMap::new();
        for eps in all_eps(self.s) {
            let ps = self.polys(&eps);
            if ps.iter().any(|q| !q.is_zero()) {
                p.insert(eps, ps);
            }
        }
        ReductionCertificate { mode: CertMode::Explicit, p, ..self.clone() }
    }
}

fn a_of(ps: &[MPoly]) -> APoly {
    let mut a = APoly::new();
    for (j, q) in ps.iter().enumerate() {
        for (m, c) in &q.terms {
            a.insert((m.clone(), j), c.clone());
        }
    }
    a
}

fn nonconstant(a: &APoly) -> Vec<((ShiftMono, usize), BigInt)> {
    a.iter().filter(|((m, _), _)| !m.is_empty()).map(|(k, v)| (k.clone(), v.clone())).collect()
}

fn add_a(x: &APoly, y: &APoly) -> APoly {
    let mut out = x.clone();
    for (k, v) in y {
        *out.entry(k.clone()).or_insert_with(BigInt::zero) += v;
    }
    out.retain(|_, v| !v.is_zero());
    out
}

/// Rank over the rationals of sparse vectors.
pub fn rank<K: Ord + Clone>(vs: &[BTreeMap<K, BigRational>]) -> usize {
    let mut basis: Vec<(K, BTreeMap<K, BigRational>)> = Vec::new();
    for v in vs {
        let mut v = v.clone();
        for (p, b) in &basis {
            if let Some(c) = v.get(p).cloned() {
                for (k, x) in b {
                    *v.entry(k.clone()).or_insert_with(BigRational::zero) -= &c * x;
                }
                v.retain(|_, x| !x.is_zero());
            }
        }
        let Some((p, c)) = v.iter().next_back().map(|(k, c)| (k.clone(), c.clone())) else { continue };
        for x in v.values_mut() {
            *x /= &c;
        }
        for (_, b) in basis.iter_mut() {
            if let Some(c) = b.get(&p).cloned() {
                for (k, x) in &v {
                    *b.entry(k.clone()).or_insert_with(BigRational::zero) -= &c * x;
                }
                b.retain(|_, x| !x.is_zero());
            }
        }
        basis.push((p, v));
    }
    basis.len()
}

fn to_rational<K: Ord + Clone>(v: impl IntoIterator<Item = (K, BigInt)>) -> BTreeMap<K, BigRational> {
    v.into_iter().map(|(k, c)| (k, BigRational::from_integer(c))).collect()
}

fn independent(ps: &[MPoly]) -> bool {
    let vs: Vec<BTreeMap<ShiftMono, BigRational>> = ps
        .iter()
        .filter(|q| !q.is_zero())
        .map(|q| to_rational(q.terms.clone()))
        .collect();
    rank(&vs) == vs.len()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckResult {
    pub item: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub checks: Vec<CheckResult>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn item(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.item == name)
    }

    pub fn into_result(self) -> Result<VerificationReport, PetError> {
        match self.checks.iter().find(|c| !c.passed) {
            Some(c) => Err(PetError::VerificationFailure { item: c.item.to_string(), witness: c.detail.clone() }),
            None => Ok(self),
        }
    }
}

fn eps_str(e: &[u8]) -> String {
    e.iter().map(|b| char::from(b'0' + b)).collect()
}

/// Exact checks of the certificate invariants: multilinearity, then items
/// i (non-constancy), ii (essential distinctness), iii (additivity) and iv
/// (linear independence of the nonzero `p_{ε,j}` for each `ε`).
pub fn verify_certificate(cert: &ReductionCertificate) -> VerificationReport {
    let mut checks = Vec::new();
    let mut push = |item, r: Result<String, String>| {
        let (passed, detail) = match r {
            Ok(d) => (true, d),
            Err(d) => (false, d),
        };
        checks.push(CheckResult { item, passed, detail });
    };
    push("shape", check_shape(cert));
    push("multilinear", check_multilinear(cert));
    let explicit = cert.mode == CertMode::Explicit || cert.s <= ENUMERATE_MAX_S;
    if explicit {
        let (i, ii) = check_distinct_enumerated(cert);
        push("i", i);
        push("ii", ii);
        push("iii", check_additive_enumerated(cert));
        push("iv", check_independent_enumerated(cert));
    } else {
        let units: Vec<APoly> = (0..cert.s).map(|i| cert.a_poly(&unit(cert.s, i))).collect();
        let vs: Vec<_> = units.iter().map(|a| to_rational(nonconstant(a))).collect();
        let free = rank(&vs) == vs.len();
        let r = if free {
            Ok("nonconstant parts of A_{e_i} are linearly independent".to_string())
        } else {
            Err(format!("s = {} too large to enumerate and A_(e_i) are dependent", cert.s))
        };
        push("i", r.clone());
        push("ii", r);
        push("iii", Ok("A_eps is defined additively from unit vectors".into()));
        push("iv", check_independent_blocks(cert));
    }
    VerificationReport { checks }
}

fn check_shape(cert: &ReductionCertificate) -> Result<String, String> {
    for (e, ps) in &cert.p {
        if e.len() != cert.s || e.iter().any(|&b| b > 1) {
            return Err(format!("epsilon {e:?} is not in {{0,1}}^{}", cert.s));
        }
        if ps.len() != cert.k {
            return Err(format!("epsilon {} has {} polynomials, expected {}", eps_str(e), ps.len(), cert.k));
        }
        for q in ps {
            if let Some(v) = q.terms.keys().flatten().map(|p| p.0).find(|&v| v as usize >= cert.t) {
                return Err(format!("variable m{v} outside 0..{}", cert.t));
            }
        }
    }
    if cert.mode == CertMode::EpsLinear && cert.p.keys().any(|e| e.iter().filter(|&&b| b == 1).count() != 1) {
        return Err("eps-linear certificate lists a non-unit epsilon".into());
    }
    Ok(format!("s = {}, t = {}, k = {}", cert.s, cert.t, cert.k))
}

fn check_multilinear(cert: &ReductionCertificate) -> Result<String, String> {
    for (e, ps) in &cert.p {
        for (j, q) in ps.iter().enumerate() {
            if !q.is_multilinear() {
                return Err(format!("p[{}][{}] = {} has degree > 1 in a variable", eps_str(e), j + 1, q));
            }
        }
    }
    Ok("all p are at most linear in each variable".into())
}

fn check_distinct_enumerated(cert: &ReductionCertificate) -> (Result<String, String>, Result<String, String>) {
    let mut seen: BTreeMap<Vec<((ShiftMono, usize), BigInt)>, Vec<u8>> = BTreeMap::new();
    let mut i_res = Ok(format!("A_eps nonconstant for all {} nonzero eps", (1u64 << cert.s) - 1));
    let mut ii_res = Ok("A_eps pairwise essentially distinct".to_string());
    for e in all_eps(cert.s) {
        let nc = nonconstant(&cert.a_poly(&e));
        if nc.is_empty() && e.iter().any(|&b| b == 1) && i_res.is_ok() {
            i_res = Err(format!("A_{} is constant", eps_str(&e)));
        }
        if let Some(prev) = seen.insert(nc, e.clone()) {
            if ii_res.is_ok() {
                ii_res = Err(format!("A_{} - A_{} is constant", eps_str(&prev), eps_str(&e)));
            }
        }
    }
    (i_res, ii_res)
}

/// Additivity over disjoint pairs is equivalent to `A_0 = 0` together with
/// `A_ε = Σ_{i∈ε} A_{e_i}`, which is what is checked.
fn check_additive_enumerated(cert: &ReductionCertificate) -> Result<String, String> {
    let s = cert.s;
    let zero = cert.a_poly(&vec![0; s]);
    if !zero.is_empty() {
        return Err(format!("A_{} is not zero", eps_str(&vec![0; s])));
    }
    let units: Vec<APoly> = (0..s).map(|i| cert.a_poly(&unit(s, i))).collect();
    for e in all_eps(s) {
        let sum = e
            .iter()
            .enumerate()
            .filter(|(_, &b)| b == 1)
            .fold(APoly::new(), |acc, (i, _)| add_a(&acc, &units[i]));
        if sum != cert.a_poly(&e) {
            let c: Vec<u8> = e.iter().map(|b| 1 - b).collect();
            return Err(format!("A_{} + A_{} != A_1...1", eps_str(&e), eps_str(&c)));
        }
    }
    Ok("A_eps + A_eps' = A_(eps+eps') for all disjoint pairs".into())
}

fn check_independent_enumerated(cert: &ReductionCertificate) -> Result<String, String> {
    for e in all_eps(cert.s) {
        let ps = cert.polys(&e);
        if !independent(&ps) {
            return Err(format!("nonzero p_({},j) are linearly dependent", eps_str(&e)));
        }
    }
    Ok("nonzero p_(eps,j) linearly independent for every eps".into())
}

/// For large `s`: if every `p_{e_i,j}` is divisible by a variable owned by
/// `i` alone and the unit rows are independent, every `ε` is independent.
fn check_independent_blocks(cert: &ReductionCertificate) -> Result<String, String> {
    let s = cert.s;
    let rows: Vec<Vec<MPoly>> = (0..s).map(|i| cert.polys(&unit(s, i))).collect();
    let mut owners: Vec<Option<u16>> = Vec::with_capacity(s);
    for (i, row) in rows.iter().enumerate() {
        let monos: Vec<&ShiftMono> = row.iter().flat_map(|q| q.terms.keys()).collect();
        let own = monos.first().and_then(|m0| {
            m0.iter().map(|p| p.0).find(|&v| {
                monos.iter().all(|m| m.iter().any(|p| p.0 == v))
                    && rows
                        .iter()
                        .enumerate()
                        .filter(|(i2, _)| *i2 != i)
                        .all(|(_, r)| r.iter().all(|q| q.terms.keys().all(|m| m.iter().all(|p| p.0 != v))))
            })
        });
        owners.push(own);
        if !independent(row) {
            return Err(format!("nonzero p_(e_{},j) are linearly dependent", i + 1));
        }
    }
    if owners.iter().all(Option::is_some) {
        Ok("block structure: each unit row owns a variable and is independent".into())
    } else {
        Err(format!("s = {s} too large to enumerate and no block structure"))
    }
}

// JSON

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum CoeffJson {
    Int(i64),
    Big(String),
}

#[derive(Serialize, Deserialize)]
struct MonoJson {
    vars: Vec<u16>,
    coeff: CoeffJson,
}

#[derive(Serialize, Deserialize)]
struct PJson {
    epsilon: Vec<u8>,
    j: usize,
    monomials: Vec<MonoJson>,
}

#[derive(Serialize, Deserialize)]
struct CertJson {
    s: usize,
    t: usize,
    #[serde(rename = "Y")]
    y: Vec<i64>,
    k: usize,
    mode: CertMode,
    p: Vec<PJson>,
    #[serde(default)]
    trace: Vec<VdcStep>,
}

impl ReductionCertificate {
    pub fn to_json(&self) -> String {
        let mut p = Vec::new();
        for (e, ps) in &self.p {
            for (j, q) in ps.iter().enumerate() {
                if q.is_zero() {
                    continue;
                }
                let monomials = q
                    .terms
                    .iter()
                    .map(|(m, c)| MonoJson {
                        vars: m.iter().flat_map(|&(v, e)| std::iter::repeat(v).take(e as usize)).collect(),
                        coeff: match c.to_i64() {
                            Some(x) => CoeffJson::Int(x),
                            None => CoeffJson::Big(c.to_string()),
                        },
                    })
                    .collect();
                p.push(PJson { epsilon: e.clone(), j: j + 1, monomials });
            }
        }
        let j = CertJson {
            s: self.s,
            t: self.t,
            y: self.y.clone(),
            k: self.k,
            mode: self.mode,
            p,
            trace: self.trace.clone(),
        };
        serde_json::to_string_pretty(&j).expect("certificate serializes")
    }

    pub fn from_json(text: &str) -> Result<ReductionCertificate, PetError> {
        let j: CertJson = serde_json::from_str(text).map_err(|e| PetError::Format(e.to_string()))?;
        let mut p: BTreeMap<Vec<u8>, Vec<MPoly>> = BTreeMap::new();
        for e in j.p {
            if e.j == 0 || e.j > j.k {
                return Err(PetError::Format(format!("j = {} outside 1..={}", e.j, j.k)));
            }
            let row = p.entry(e.epsilon).or_insert_with(|| vec![MPoly::zero(); j.k]);
            for m in e.monomials {
                let c: BigInt = match m.coeff {
                    CoeffJson::Int(x) => x.into(),
                    CoeffJson::Big(s) => s.parse().map_err(|_| PetError::Format(format!("bad integer {s}")))?,
                };
                let mut key: ShiftMono = Vec::new();
                let mut vars = m.vars;
                vars.sort_unstable();
                for v in vars {
                    match key.last_mut() {
                        Some((w, e)) if *w == v => *e += 1,
                        _ => key.push((v, 1)),
                    }
                }
                let mut single = MPoly::zero();
                single.terms.insert(key, c);
                row[e.j - 1] = row[e.j - 1].add(&single);
            }
        }
        Ok(ReductionCertificate { s: j.s, t: j.t, y: j.y, k: j.k, mode: j.mode, p, trace: j.trace })
    }
}
