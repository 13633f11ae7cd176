mod common;

use common::{f, small_family};
use hardylab::ergolab::{CharacterObservable, Point, Schedule, Seed, System, SystemSpec};
use hardylab::petlab::{pet_reduce_full, verify_certificate, ReductionCertificate};
use hardylab::xcli::config::{ObservableSpec, TermSpec};
use hardylab::xcli::{parse_lefun, print_lefun, Command, ExperimentConfig};
use num::complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rotation() -> System {
    System::new(&SystemSpec::TorusRotation { alpha: vec!["sqrt(2) - 1".into(), "sqrt(3)".into()] }).unwrap()
}

fn systems() -> Vec<System> {
    vec![
        rotation(),
        System::new(&SystemSpec::SkewProduct { alpha: "sqrt(5)".into() }).unwrap(),
        System::new(&SystemSpec::ToralAutomorphism { matrix: [[2, 1], [1, 1]] }).unwrap(),
    ]
}

fn close(a: Complex64, b: Complex64) -> bool {
    (a - b).norm() < 1e-9
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn reduction_certificates_verify(seed in any::<u64>()) {
        let fam = small_family(&mut ChaCha8Rng::seed_from_u64(seed));
        let r = pet_reduce_full(&fam).unwrap();
        let c = &r.certificate;
        prop_assert!(c.trace.iter().all(|s| s.type_after < s.type_before));
        prop_assert_eq!(r.base.degree(), 1);
        let rep = verify_certificate(c);
        prop_assert!(rep.passed(), "{:?}", rep);
        let back = ReductionCertificate::from_json(&c.to_json()).unwrap();
        prop_assert_eq!(&back, c);
    }

    #[test]
    fn powers_compose_and_invert(seed in any::<u64>(), a in -5000i128..5000, b in -5000i128..5000) {
        for sys in systems() {
            let x = sys.seed_point(&Seed::Random(seed)).unwrap();
            let y = sys.power_map(b, &sys.power_map(a, &x));
            prop_assert_eq!(&y, &sys.power_map(a + b, &x));
            prop_assert_eq!(&sys.power_map(-a, &sys.power_map(a, &x)), &x);
        }
    }

    #[test]
    fn transport_matches_orbit(seed in any::<u64>(), m in 0i128..80, k1 in -4i64..=4, k2 in -4i64..=4) {
        for sys in systems() {
            let x = sys.seed_point(&Seed::Random(seed)).unwrap();
            let k = vec![k1, k2];
            let (mut kk, phase) = sys.transport(&[k1 as i128, k2 as i128], m).unwrap();
            // on (1/q)Z² only k mod q matters
            if let Point::Rational { q, .. } = &x {
                kk.iter_mut().for_each(|v| *v = v.rem_euclid(*q as i128));
            }
            let lhs = CharacterObservable::character(k).eval(&sys.power_map(m, &x));
            let moved = CharacterObservable::character(kk.iter().map(|&v| v as i64).collect()).eval(&x);
            let rhs = hardylab::ergolab::system::e_fixed(phase) * moved;
            prop_assert!(close(lhs, rhs), "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn integrals_are_invariant(seed in any::<u64>(), c in -2.0f64..2.0) {
        // constants average to themselves along any orbit
        let sys = rotation();
        let one = CharacterObservable::constant(2, Complex64::new(c, 0.0));
        let x = sys.seed_point(&Seed::Random(seed)).unwrap();
        let mut y: Point = x;
        for _ in 0..20 {
            prop_assert!(close(one.eval(&y), one.integral()));
            y = sys.step(&y);
        }
    }

    #[test]
    fn seminorm_of_constant_is_modulus(c in 0.1f64..2.0) {
        let sys = System::new(&SystemSpec::TorusRotation { alpha: vec!["sqrt(2) - 1".into()] }).unwrap();
        let g = CharacterObservable::constant(1, Complex64::new(0.0, c));
        let s = Schedule { h: vec![16], doubling: false };
        for order in 1..=3 {
            let v = hardylab::ergolab::hk_seminorm_approx(&sys, &g, order, &s).unwrap().value;
            prop_assert!((v - c).abs() < 1e-9, "{v} {c}");
        }
    }

    #[test]
    fn parse_print_round_trip(e in expr(3)) {
        let g = parse_lefun(&e).unwrap();
        let back = parse_lefun(&print_lefun(&g)).unwrap();
        prop_assert_eq!(back, g);
    }

    #[test]
    fn config_round_trip(
        name in "[a-z][a-z0-9_]{0,8}",
        ladder in proptest::collection::btree_set(1u64..1_000_000, 0..5),
        ks in proptest::collection::vec(-3i64..=3, 1..4),
        h in 1u64..1024,
        doubling in any::<bool>(),
    ) {
        let mut c = ExperimentConfig::new(&name, Command::Seminorm);
        c.functions = vec!["t^(3/2)".into(), "t*log(t)".into()];
        c.system = Some(SystemSpec::TorusRotation { alpha: vec!["sqrt(2) - 1".into()] });
        c.ladder = ladder.into_iter().collect();
        c.schedule = Some(Schedule { h: vec![h, h + 1], doubling });
        c.observables = vec![ObservableSpec {
            terms: ks.iter().map(|&k| TermSpec { k: vec![k], c: [0.5, -0.25] }).collect(),
        }];
        c.orders = vec![1, 2];
        let back = ExperimentConfig::from_json(&c.to_json()).unwrap();
        prop_assert_eq!(back, c);
    }
}

fn expr(depth: u32) -> BoxedStrategy<String> {
    let leaf = prop_oneof![
        Just("t".to_string()),
        (1i64..20).prop_map(|n| n.to_string()),
        (1i64..6, 2i64..5).prop_map(|(p, q)| format!("t^({p}/{q})")),
    ];
    leaf.prop_recursive(depth, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("{a} + {b}")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a})*({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a})/(t + {b})")),
            inner.clone().prop_map(|a| format!("log(t + {a})")),
            inner.clone().prop_map(|a| format!("sqrt(t + {a})")),
            inner.prop_map(|a| format!("({a})^2")),
        ]
    })
    .boxed()
}

#[test]
fn corpus_functions_parse() {
    for s in ["t^(3/2)", "t*log(t) + log(t)^3", "exp(sqrt(log(t)))"] {
        assert!(f(s).domain_floor >= 0.0);
    }
}
