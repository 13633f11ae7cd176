//! One test per acceptance criterion.  Each prints a single
//! `criterion N: PASS|FAIL ...` line before asserting.

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use common::{f, random_family};
use hardylab::ergolab::{
    hk_seminorm_approx, l2_ladder, product_system, recurrence_average, short_interval_double_average, vdc_check,
    weyl_ladder, weyl_sum, CharacterObservable, Schedule, System, SystemSpec, TorusBox, WeylFreq,
};
use hardylab::lefun::growth::power_fn;
use hardylab::lefun::num::Num;
use hardylab::lefun::{
    class_index, compare_growth, decompose, find_window, growth_degree, is_one_good, Expr, LEFunction, LeError,
    Verdict, WindowClass,
};
use hardylab::petlab::{
    inductive_shape, pet_reduce, pet_reduce_full, verify_certificate, MPoly, PetError, PolyFamily, VariablePolynomial,
};
use num::complex::Complex64;
use num::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(n: u32, ok: bool, detail: String) {
    println!("criterion {n}: {} {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {n}: {detail}");
}

fn rotation(alpha: &str) -> System {
    System::new(&SystemSpec::TorusRotation { alpha: vec![alpha.into()] }).unwrap()
}

fn obs(dim: usize, terms: &[(&[i64], f64, f64)]) -> CharacterObservable {
    CharacterObservable::new(dim, terms.iter().map(|(k, re, im)| (k.to_vec(), Complex64::new(*re, *im))).collect())
        .unwrap()
}

#[test]
fn criterion_01_one_good_table() {
    let t0 = Instant::now();
    let table = [
        ("t^(3/2)", true),
        ("t*log(t)", true),
        ("exp(sqrt(log(t)))", true),
        ("exp(sqrt2*log(t))/log(t)^2", true),
        ("sqrt2*t^2", false),
        ("t^2 + log(log(t))", false),
    ];
    let mut wrong = Vec::new();
    for (s, want) in table {
        if is_one_good(&f(s)).unwrap().good != want {
            wrong.push(s);
        }
    }
    let el = t0.elapsed();
    report(1, wrong.is_empty() && el < Duration::from_secs(5), format!("mismatches {wrong:?}, {el:?}"));
}

#[test]
fn criterion_02_decomposition() {
    let t0 = Instant::now();
    let d = decompose(&[f("t + t^(3/2)"), f("t^2 + t^(5/2)")]).unwrap();
    let el = t0.elapsed();
    let n = |v: &[i64]| v.iter().map(|&x| Num::from_int(x)).collect::<Vec<_>>();
    let ok = d.g == vec![f("t^(3/2)"), f("t^(5/2)")]
        && d.p == vec![n(&[0, 1]), n(&[0, 0, 1])]
        && d.c == vec![n(&[1, 0]), n(&[0, 1])]
        && el < Duration::from_secs(1);
    let g: Vec<String> = d.g.iter().map(|x| x.to_string()).collect();
    report(2, ok, format!("g = {g:?}, p = ({}, {}), {el:?}", d.polynomial(0), d.polynomial(1)));
}

#[test]
fn criterion_03_pet_property_suite() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let total = 200;
    let mut slow = 0;
    let mut failures: Vec<String> = Vec::new();
    let mut nontermination = 0;
    let mut worst = Duration::ZERO;
    for case in 0..total {
        let d = rng.gen_range(1..=4);
        let k = rng.gen_range(1..=4);
        let fam = random_family(&mut rng, k, d);
        let t0 = Instant::now();
        let r = pet_reduce_full(&fam);
        let el = t0.elapsed();
        worst = worst.max(el);
        if el >= Duration::from_secs(10) {
            slow += 1;
        }
        match r {
            Ok(red) => {
                let c = &red.certificate;
                if !c.trace.iter().all(|s| s.type_after < s.type_before) {
                    failures.push(format!("#{case}: type did not decrease"));
                }
                let rep = verify_certificate(c);
                if !rep.passed() {
                    failures.push(format!("#{case}: verification {:?}", rep.checks.iter().find(|x| !x.passed)));
                }
            }
            Err(PetError::NonTermination { .. }) => nontermination += 1,
            Err(e) => failures.push(format!("#{case} (d={d}, k={k}): {e}")),
        }
    }
    let ok = slow == 0 && nontermination == 0 && failures.is_empty();
    report(
        3,
        ok,
        format!(
            "{total} families: {nontermination} hit the member cap, {slow} over 10 s, worst {worst:?}, other failures {failures:?}"
        ),
    );
}

#[test]
fn criterion_04_linear_base_case() {
    let single = pet_reduce(&PolyFamily::new(vec![VariablePolynomial::from_ints(&[0, 1])])).unwrap();
    let mut ok = (single.s, single.t) == (1, 1)
        && single.y == vec![-1, 0, 1]
        && single.polys(&[1]) == vec![MPoly::var(0)]
        && single.polys(&[0]) == vec![MPoly::zero()];
    for k in 2..=4usize {
        let fam = PolyFamily::new(
            (0..k).map(|i| VariablePolynomial::from_ints(&[i as i64, (k - i) as i64])).collect(),
        );
        let c = pet_reduce(&fam).unwrap();
        ok &= (c.s, c.t) == (k, k) && verify_certificate(&c).passed();
        // the inductive form: p'_{ε,1} = m when ε_1 = 0 and zero otherwise,
        // every other coordinate keeps p_{ε,j} = ε_j m_j
        for (e, row) in inductive_shape(&c, 0) {
            ok &= row[0] == if e[0] == 0 { MPoly::var(0) } else { MPoly::zero() };
            for j in 1..k {
                ok &= row[j] == if e[j] == 1 { MPoly::var(j as u16) } else { MPoly::zero() };
            }
        }
    }
    report(4, ok, format!("single: s={} t={} Y={:?}", single.s, single.t, single.y));
}

#[test]
fn criterion_05_quadratic_vignette() {
    // h²/(2r) with the window r replaced by the basis N^{1/3}: a quadratic
    // in the shift with a slowly growing coefficient
    let fams = [
        PolyFamily::new(vec![VariablePolynomial::parse(&["0", "0", "1/2*t^(1/3)"]).unwrap()]),
        PolyFamily::new(vec![
            VariablePolynomial::parse(&["0", "0", "1/2*t^(1/3)"]).unwrap(),
            VariablePolynomial::parse(&["0", "t^(1/2)"]).unwrap(),
        ]),
    ];
    // 2·m_a·m_b for some pair of distinct certificate variables
    let matches = |p: &MPoly, t: u16| {
        (0..t).any(|a| (a + 1..t).any(|b| *p == MPoly::var(a).mul_var(b).scale(2)))
    };
    let mut ok = true;
    let mut shown = String::new();
    for fam in &fams {
        let c = pet_reduce(fam).unwrap();
        let e: Vec<u8> = (0..c.s).map(|i| (i == 0) as u8).collect();
        let p = c.polys(&e);
        shown = format!("{shown} [{}]", p[0]);
        ok &= matches(&p[0], c.t as u16) && verify_certificate(&c).passed();
    }
    report(5, ok, format!("p_(e1,1) per family:{shown}"));
}

#[test]
fn criterion_06_joint_ergodicity_ladder() {
    let t0 = Instant::now();
    let sys = rotation("sqrt(2) - 1");
    let e = CharacterObservable::character(vec![1]);
    let r = l2_ladder(&sys, &[e.clone(), e], &[f("t^(3/2)"), f("t*log(t)")], &[1_000, 10_000, 100_000]).unwrap();
    let g = r.gaps();
    let el = t0.elapsed();
    let ok = g.windows(2).all(|w| w[1] < w[0]) && g[2] <= 0.05 && el < Duration::from_secs(300);
    report(6, ok, format!("gaps {g:?}, {el:?}"));
}

#[test]
fn criterion_07_equidistribution() {
    let a = [f("t^(3/2)"), f("t*log(t)")];
    let grid = [(0, 1), (1, 4), (1, 3), (1, 2)];
    let mut worst: f64 = 0.0;
    for x in grid {
        for y in grid {
            if x.0 == 0 && y.0 == 0 {
                continue;
            }
            let v = weyl_sum(&a, &[WeylFreq::ratio(x.0, x.1), WeylFreq::ratio(y.0, y.1)], 1_000_000).unwrap();
            worst = worst.max(v.norm());
        }
    }
    let control = weyl_ladder(&[f("2*t")], &[WeylFreq::ratio(1, 2)], &[10, 1_000, 100_000, 1_000_000]).unwrap();
    let exact = control.points.iter().all(|p| p.value == Complex64::new(1.0, 0.0));
    report(7, worst <= 0.05 && exact, format!("max |weyl| {worst:.4}, control exact {exact}"));
}

#[test]
fn criterion_08_host_kra_suite() {
    let sys1 = rotation("sqrt(2) - 1");
    let sys2 = System::new(&SystemSpec::TorusRotation { alpha: vec!["sqrt(2)".into(), "sqrt(3)".into()] }).unwrap();
    let e1 = CharacterObservable::character(vec![1]);
    let sched = Schedule { h: vec![512], doubling: false };
    let s1 = hk_seminorm_approx(&sys1, &e1, 1, &sched).unwrap().value;
    let s2 = hk_seminorm_approx(&sys1, &e1, 2, &Schedule::uniform(512)).unwrap().value;
    let mut ok = s1 == 0.0 && (s2 - 1.0).abs() <= 0.05;
    let corpus: Vec<(&System, CharacterObservable)> = vec![
        (&sys1, e1.clone()),
        (&sys1, obs(1, &[(&[1], 0.5, 0.0), (&[2], 0.5, 0.0)])),
        (&sys1, obs(1, &[(&[0], 0.5, 0.0), (&[1], 0.5, 0.0)])),
        (&sys1, obs(1, &[(&[1], 0.6, 0.0), (&[-1], 0.0, 0.4)])),
        (&sys1, obs(1, &[(&[3], 1.0, 0.0)])),
        (&sys1, obs(1, &[(&[1], 0.3, 0.0), (&[2], 0.3, 0.0), (&[5], 0.4, 0.0)])),
        (&sys2, CharacterObservable::character(vec![1, 1])),
        (&sys2, obs(2, &[(&[1, 0], 0.5, 0.0), (&[0, 1], 0.5, 0.0)])),
        (&sys2, obs(2, &[(&[0, 0], 0.3, 0.0), (&[2, -1], 0.7, 0.0)])),
        (&sys2, obs(2, &[(&[1, 0], 0.25, 0.25), (&[1, 1], 0.5, 0.0)])),
    ];
    let mut worst_mono = f64::NEG_INFINITY;
    let mut worst_tensor = f64::NEG_INFINITY;
    for (sys, g) in &corpus {
        let vals: Vec<f64> = (1..=4).map(|s| hk_seminorm_approx(sys, g, s, &sched).unwrap().value).collect();
        for s in 0..3 {
            worst_mono = worst_mono.max(vals[s] - vals[s + 1]);
        }
        let prod = product_system(sys).unwrap();
        let gg = g.conj().tensor(g);
        for s in 1..=2u32 {
            let lhs = hk_seminorm_approx(&prod, &gg, s, &sched).unwrap().value;
            worst_tensor = worst_tensor.max(lhs - vals[s as usize].powi(2));
        }
    }
    ok &= worst_mono <= 0.02 && worst_tensor <= 0.02;
    report(
        8,
        ok,
        format!("|e(x)|_1 = {s1}, |e(x)|_2 = {s2:.4}, max monotonicity excess {worst_mono:.2e}, max tensor excess {worst_tensor:.2e}"),
    );
}

#[test]
fn criterion_09_short_interval_ladder() {
    let sys = rotation("sqrt(2) - 1");
    let e = CharacterObservable::character(vec![1]);
    let a = [f("t*log(t) + log(t)^3"), f("t*log(t)"), f("sqrt(t)")];
    let l = f("t^(3/5)");
    let mut ok = true;
    let mut rows = Vec::new();
    for r in [1_000u64, 10_000, 100_000] {
        let c = short_interval_double_average(&sys, &[e.clone(), e.clone(), e.clone()], &a, r, &l, 2).unwrap();
        ok &= c.holds(0.02);
        rows.push(format!("R={r}: {:.4} <= {:.4}", c.lhs, c.rhs.sqrt()));
    }
    report(9, ok, rows.join(", "));
}

#[test]
fn criterion_10_van_der_corput() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..50 {
        let n = rng.gen_range(64..400);
        let dim = rng.gen_range(1..=4);
        let u: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
                v.into_iter().map(|x| x / norm).collect()
            })
            .collect();
        for m in [4, 16, 64] {
            let (lhs, rhs) = vdc_check(&u, m);
            worst = worst.max(lhs - rhs);
        }
    }
    report(10, worst <= 1e-9, format!("max lhs - rhs {worst:.3e}"));
}

#[test]
fn criterion_11_recurrence() {
    let sys = rotation("sqrt(2) - 1");
    let bx = TorusBox { sides: vec![(0.0, 0.2)] };
    let v = recurrence_average(&sys, &bx, &[f("t^(3/2)"), f("t*log(t)")], 100_000).unwrap();
    let bound = 0.2f64.powi(3) - 0.01;
    report(11, v >= bound, format!("average {v:.5} vs {bound:.5}"));
}

/// Decided verdict, or a recorded failure.
fn verdict(a: &LEFunction, b: &LEFunction, undecided: &mut Vec<String>) -> Option<Verdict> {
    match compare_growth(a, b) {
        Ok(c) if !c.is_inconclusive() => Some(c.verdict),
        Ok(_) | Err(LeError::Inconclusive { .. }) => {
            undecided.push(format!("{a} vs {b}"));
            None
        }
        Err(e) => {
            undecided.push(format!("{a} vs {b}: {e}"));
            None
        }
    }
}

fn ratio(a: &LEFunction, b: &LEFunction) -> LEFunction {
    LEFunction::new(Expr::div(a.expr.clone(), b.expr.clone())).unwrap()
}

fn t_pow(p: i64, q: i64) -> LEFunction {
    power_fn(BigRational::new(p.into(), q.into()))
}

#[test]
fn criterion_12_growth_suite() {
    // (function, δ with f ≫ t^δ when there is one)
    let corpus: [(&str, Option<(i64, i64)>); 12] = [
        ("t^(3/2)", Some((1, 2))),
        ("t*log(t)", Some((1, 2))),
        ("exp(sqrt(log(t)))", None),
        ("t^(5/2)", Some((1, 2))),
        ("3*t^(3/2) + t", Some((1, 2))),
        ("t^(3/2)*log(t)", Some((1, 2))),
        ("t^(1/2)", Some((1, 2))),
        ("log(t)^3", None),
        ("t^(7/3)", Some((1, 2))),
        ("t^2*log(t)", Some((1, 2))),
        ("exp(sqrt2*log(t))/log(t)^2", Some((1, 2))),
        ("t^(5/2) + t^(4/3)", Some((1, 2))),
    ];
    let fs: Vec<LEFunction> = corpus.iter().map(|(s, _)| f(s)).collect();
    let one = f("1");
    let t = f("t");
    let mut undecided = Vec::new();
    let mut failed: Vec<String> = Vec::new();
    let mut check = |ok: bool, what: String| {
        if !ok {
            failed.push(what);
        }
    };

    for (i, g) in fs.iter().enumerate() {
        let delta = corpus[i].1;
        // basic bounds: t^k |g^(k)| ⪯ |g|, and t g'/g → c ≠ 0 above a power
        for k in 1..=6u32 {
            let tk = LEFunction::new(Expr::mul(Expr::pow(Expr::Var, k as i64, 1), g.derivative(k).expr)).unwrap();
            let v = verdict(&tk, g, &mut undecided);
            check(v.is_none() || v != Some(Verdict::Dominates), format!("{g}: t^{k} g^({k}) dominates g"));
        }
        if delta.is_some() {
            let tg = LEFunction::new(Expr::mul(Expr::Var, g.derivative(1).expr)).unwrap();
            let v = verdict(&tg, g, &mut undecided);
            let limit = match &v {
                None => true,
                Some(Verdict::SameRate(c)) => !c.is_zero(),
                Some(_) => false,
            };
            check(limit, format!("{g}: t g'/g has no nonzero limit ({v:?})"));
        }

        // endpoint chain 1 ≺ lower ≺ upper ≺ t
        let d = growth_degree(g).unwrap().d;
        for k in d + 1..=d + 3 {
            let w = WindowClass::new(g, k).unwrap();
            for (a, b) in [(&one, &w.lower), (&w.lower, &w.upper), (&w.upper, &t)] {
                let v = verdict(a, b, &mut undecided);
                check(v.is_none() || v == Some(Verdict::Dominated), format!("{g}, k={k}: {a} ≺ {b} fails"));
            }
            if let Some((p, q)) = delta {
                // endpoints differ by a fractional power
                let r = ratio(&w.upper, &w.lower);
                let pw = t_pow(p, q * (k * (k + 1)) as i64);
                let v = verdict(&r, &pw, &mut undecided);
                check(
                    v.is_none() || matches!(v, Some(Verdict::Dominates | Verdict::SameRate(_))),
                    format!("{g}, k={k}: upper/lower below t^(δ/(k(k+1)))"),
                );
            }
        }

        if delta.is_some() {
            // the classes are nonempty, cover powers near 1, and no single class covers them all
            check(find_window(std::slice::from_ref(g), 1).is_ok(), format!("{g}: no window"));
            let near: Vec<Option<u32>> =
                [(3, 4), (5, 6), (9, 10), (19, 20)].iter().map(|&(p, q)| class_index(&t_pow(p, q), g).unwrap()).collect();
            check(near.iter().all(|k| k.is_some()), format!("{g}: powers near 1 outside every class {near:?}"));
            let distinct: BTreeSet<_> = near.iter().flatten().collect();
            check(distinct.len() >= 2, format!("{g}: one class holds every power near 1"));
        }
    }

    // pairs g ≪ f above a power
    let above: Vec<&LEFunction> = fs.iter().zip(&corpus).filter(|(_, c)| c.1.is_some()).map(|(g, _)| g).collect();
    for (i, a) in above.iter().enumerate() {
        for b in &above[i + 1..] {
            let (f_big, g_small) = match verdict(a, b, &mut undecided) {
                Some(Verdict::Dominated) => (*b, *a),
                Some(_) => (*a, *b),
                None => continue,
            };
            let same = matches!(verdict(f_big, g_small, &mut undecided), Some(Verdict::SameRate(_)));
            // S(f,k) = S(g,k) for some k iff f ~ g
            let mut coincide = false;
            for k in 1..=6 {
                let (wf, wg) = (WindowClass::new(f_big, k).unwrap(), WindowClass::new(g_small, k).unwrap());
                let lo = verdict(&wf.lower, &wg.lower, &mut undecided);
                let hi = verdict(&wf.upper, &wg.upper, &mut undecided);
                coincide |= matches!(lo, Some(Verdict::SameRate(_))) && matches!(hi, Some(Verdict::SameRate(_)));
            }
            check(coincide == same, format!("{f_big} / {g_small}: equal classes {coincide}, same rate {same}"));

            // intersecting classes have k ≥ ℓ; infinitely many such pairs
            let mut pairs = BTreeSet::new();
            for (p, q) in [(3, 5), (2, 3), (3, 4), (5, 6), (9, 10), (19, 20), (49, 50), (99, 100)] {
                let c = t_pow(p, q);
                if let (Some(k), Some(l)) = (class_index(&c, f_big).unwrap(), class_index(&c, g_small).unwrap()) {
                    check(k >= l, format!("{f_big} / {g_small}: k={k} < l={l} at t^({p}/{q})"));
                    pairs.insert((k, l));
                    let lower = WindowClass::new(f_big, k).unwrap().lower;
                    if !same {
                        if let Some(l2) = class_index(&lower, g_small).unwrap() {
                            check(k > l2, format!("{f_big} / {g_small}: lower endpoint of S(f,{k}) in S(g,{l2})"));
                        }
                    }
                }
            }
            check(pairs.len() >= 3, format!("{f_big} / {g_small}: only {} intersecting pairs", pairs.len()));
        }
    }

    let ok = failed.is_empty() && undecided.is_empty();
    report(12, ok, format!("failed {failed:?}, inconclusive {undecided:?}"));
}
