#![allow(dead_code)]

use hardylab::lefun::LEFunction;
use hardylab::petlab::{Basis, Coef, PolyFamily, VariablePolynomial};
use num::BigRational;
use rand::Rng;

pub fn f(s: &str) -> LEFunction {
    LEFunction::parse(s).unwrap_or_else(|e| panic!("{s}: {e}"))
}

/// Coefficient bases `N^a (log N)^b` used for random nice families.
pub fn bases() -> Vec<Basis> {
    let b = |n: (i64, i64), log: i64| Basis { n: BigRational::new(n.0.into(), n.1.into()), log: BigRational::from_integer(log.into()) };
    vec![
        b((0, 1), 0),
        b((1, 3), 0),
        b((1, 2), 0),
        b((2, 3), 0),
        b((0, 1), 1),
        b((1, 2), 1),
        b((1, 3), -1),
    ]
}

/// A nonzero combination of one or two bases with small integer weights.
pub fn random_coef<R: Rng>(rng: &mut R, bases: &[Basis]) -> Coef {
    loop {
        let mut c = Coef::zero();
        for _ in 0..rng.gen_range(1..=2) {
            let q = rng.gen_range(-3i64..=3);
            let b = bases[rng.gen_range(0..bases.len())].clone();
            c = c.add(&Coef::basis(BigRational::from_integer(q.into()), b));
        }
        if !c.is_zero() {
            return c;
        }
    }
}

/// Random nice, ordered, essentially distinct family with `k` members of
/// degree at most `d`; the first member has degree exactly `d`.
pub fn random_family<R: Rng>(rng: &mut R, k: usize, d: usize) -> PolyFamily {
    let bases = bases();
    loop {
        let mut members: Vec<VariablePolynomial> = (0..k)
            .map(|i| {
                let deg = if i == 0 { d } else { rng.gen_range(1..=d) };
                let mut cs: Vec<Coef> = (0..deg).map(|_| {
                    if rng.gen_bool(0.5) { Coef::zero() } else { random_coef(rng, &bases) }
                }).collect();
                cs.push(random_coef(rng, &bases));
                VariablePolynomial::new(cs)
            })
            .collect();
        members[1..].sort_by_key(|p| std::cmp::Reverse(p.deg0()));
        let fam = PolyFamily::new(members);
        if fam.essentially_equal_pair().is_none() && hardylab::petlab::family::check_nice(&fam).is_ok() {
            return fam;
        }
    }
}

/// Linear families with up to four members or quadratic pairs; the
/// reduction stays small on these.
pub fn small_family<R: Rng>(rng: &mut R) -> PolyFamily {
    let d = rng.gen_range(1..=2);
    let k = if d == 1 { rng.gen_range(1..=4) } else { rng.gen_range(1..=2) };
    random_family(rng, k, d)
}
