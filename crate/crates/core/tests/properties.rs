mod common;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use proptest::prelude::*;
use tower_limits::dynamics::least_exponent;
use tower_limits::limits::literal_tower_mod;
use tower_limits::periods::verify_certificate;
use tower_limits::{
    alpha, analyze_map, closed_form_linear_iterate, digit_stream, factorize, iterate_reduced, lambda_exact,
    lambda_multiple, orbit, orbit_shape, parse_poly, profinite_limit_mod, tower_sequence_mod, Config, Polynomial,
};

use common::{gcd, lcm, walk_shape};

fn poly_strategy(max_degree: usize, bound: i64) -> impl Strategy<Value = Polynomial> {
    prop::collection::vec(-bound..=bound, 1..=max_degree + 1).prop_map(|c| Polynomial::from_i64s(&c))
}

fn residue(x: i64, m: u64) -> u64 {
    (x as i128).rem_euclid(m as i128) as u64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn modular_evaluation_matches_exact(f in poly_strategy(6, 1_000_000), x in any::<i64>(), m in 1u64..) {
        let exact = f.eval(&BigInt::from(x)).mod_floor(&BigInt::from(m));
        prop_assert_eq!(BigInt::from(f.eval_mod(residue(x, m), m).unwrap()), exact.clone());
        let big_m = BigUint::from(m);
        prop_assert_eq!(BigInt::from(f.eval_mod_big(&BigInt::from(x), &big_m).unwrap()), exact);
    }

    #[test]
    fn rendering_parses_back(f in poly_strategy(8, 1000)) {
        let text = f.to_string();
        prop_assert_eq!(parse_poly(&text).unwrap(), f);
    }

    #[test]
    fn derivative_is_linear(f in poly_strategy(6, 50), g in poly_strategy(6, 50), k in -5i64..=5) {
        let kf = &Polynomial::constant(k) * &f;
        prop_assert_eq!((&kf + &g).derivative(), &(&Polynomial::constant(k) * &f.derivative()) + &g.derivative());
    }

    #[test]
    fn congruences_are_preserved(f in poly_strategy(5, 100), x in -10_000i64..10_000, t in -50i64..50, m in 1u64..5000) {
        let y = x + t * m as i64;
        let fx = f.eval(&BigInt::from(x));
        let fy = f.eval(&BigInt::from(y));
        prop_assert!((fx - fy).is_multiple_of(&BigInt::from(m)));
    }

    #[test]
    fn alpha_is_the_largest_prime_power(a in 1u64..100_000, b in 1u64..100_000) {
        let al = alpha(a).unwrap();
        prop_assert_eq!(a % al, 0);
        prop_assert!(factorize(al).unwrap().factors().len() <= 1);
        for &(q, e) in factorize(a).unwrap().factors() {
            prop_assert!(q.pow(e) <= al);
        }
        prop_assert_eq!(alpha(lcm(a, b)).unwrap(), alpha(a).unwrap().max(alpha(b).unwrap()));
    }

    #[test]
    fn orbit_shapes_agree_with_the_graph(f in poly_strategy(4, 9), m in 1u64..=300) {
        let g = analyze_map(&f, m, &Config::default()).unwrap();
        for a in 0..m {
            let s = orbit_shape(&f, a, m, 1000).unwrap();
            prop_assert_eq!((s.tail, s.cycle), (g.tail(a), g.cycle(a)));
            prop_assert_eq!((s.tail, s.cycle), walk_shape(&f, a, m));
        }
        prop_assert!(g.preperiod + g.max_cycle() <= m);
    }

    #[test]
    fn rho_shape_characterizes_all_repeats(f in poly_strategy(4, 9), a in 0u64..200, m in 1u64..=200) {
        // f^k'(a) = f^(k'+l')(a) exactly when k' >= tail and cycle | l'
        let s = orbit_shape(&f, a, m, 1000).unwrap();
        let map = f.reduce(m).unwrap();
        for k2 in 0..(s.tail + 3) {
            for l2 in 1..=(2 * s.cycle + 2) {
                let holds = map.iterate(a, k2) == map.iterate(a, k2 + l2);
                prop_assert_eq!(holds, k2 >= s.tail && l2 % s.cycle == 0);
            }
        }
    }

    #[test]
    fn reduced_iteration_matches_brute_force(
        f in poly_strategy(4, 9),
        a in 0u64..1000,
        m in 1u64..=2000,
        e in 0u64..5000,
        mult in 1u64..4,
    ) {
        let o = orbit(&f, a, m, 10_000, 10_000).unwrap();
        let period = BigUint::from(o.cycle() * mult);
        let floor = BigUint::from(o.tail());
        let r = BigUint::from(e);
        let got = iterate_reduced(&o, &r, &period, &floor).unwrap();
        let exp = least_exponent(&r, &period, &floor).to_u64().unwrap();
        prop_assert!(exp >= o.tail() && (exp - e % (o.cycle() * mult)).is_multiple_of(o.cycle() * mult));
        prop_assert_eq!(got, f.reduce(m).unwrap().iterate(a, exp));
        if e >= o.tail() {
            prop_assert_eq!(got, f.reduce(m).unwrap().iterate(a, e));
        }
    }

    #[test]
    fn composition_commutes_with_reduction(f in poly_strategy(3, 20), g in poly_strategy(3, 20), x in 0u64..10_000, m in 1u64..10_000) {
        let fg = f.compose(&g);
        let inner = g.eval_mod(x, m).unwrap();
        prop_assert_eq!(fg.eval_mod(x, m).unwrap(), f.eval_mod(inner, m).unwrap());
    }

    #[test]
    fn composite_periods_divide_lcm(f in poly_strategy(3, 9), m in 1u64..=400) {
        // every cycle of f∘f has length dividing λ_f(m)
        let cfg = Config::default();
        let ff = f.compose(&f);
        let lf = lambda_exact(&f, m, &cfg).unwrap().period_multiple;
        let lff = lambda_exact(&ff, m, &cfg).unwrap().period_multiple;
        prop_assert!((&lf % &lff).is_zero());
    }

    #[test]
    fn certificates_verify(f in poly_strategy(4, 9), exps in prop::collection::vec(0u32..4, 5), a in -50i64..50) {
        // moduli built from primes under the ceiling so that lifting is exercised
        let m: u64 = [2u64, 3, 5, 7, 11].iter().zip(&exps).map(|(p, &e)| p.pow(e)).product();
        prop_assume!((2..=200_000).contains(&m));
        let cfg = Config { enumeration_ceiling: 50, ..Config::default() };
        let exact = Config::default();
        let global = lambda_multiple(&f, m, None, &cfg).unwrap();
        prop_assert!(verify_certificate(&f, &global, &exact).unwrap());
        let g = analyze_map(&f, m, &exact).unwrap();
        prop_assert!((&global.period_multiple % &g.period).is_zero());
        prop_assert!(global.tail_bound >= BigUint::from(g.preperiod));
        let per_start = lambda_multiple(&f, m, Some(a), &cfg).unwrap();
        prop_assert!(verify_certificate(&f, &per_start, &exact).unwrap());
    }

    #[test]
    fn closed_form_matches_iteration(b in -50i64..50, c in -50i64..50, x0 in -100i64..100, e in 0u64..300, m in 1u64..5000) {
        let f = Polynomial::linear(b, c);
        let want = f.reduce(m).unwrap().iterate(residue(x0, m), e);
        let got = closed_form_linear_iterate(
            &BigInt::from(b), &BigInt::from(c), &BigInt::from(x0), &BigUint::from(e), &BigUint::from(m),
        ).unwrap();
        prop_assert_eq!(got, BigUint::from(want));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn limits_agree_across_moduli(i in 0usize..4, m1 in 1u64..200_000, m2 in 1u64..200_000) {
        let cases = [("x^2+x+3", 0i64), ("7x", 1), ("2x", 1), ("x^3+x^2+4", 2)];
        let (text, a) = cases[i];
        let f = parse_poly(text).unwrap();
        let cfg = Config::default();
        let t1 = profinite_limit_mod(&f, a, &BigUint::from(m1), &cfg).unwrap();
        let t2 = profinite_limit_mod(&f, a, &BigUint::from(m2), &cfg).unwrap();
        let d = BigUint::from(gcd(m1, m2));
        prop_assert_eq!(&t1 % &d, &t2 % &d);
        // the tower itself settles on the same residue
        let trace = tower_sequence_mod(&f, a, &BigUint::from(1u32), &BigUint::from(m1), 48, &cfg).unwrap();
        prop_assert_eq!(trace.limit(), Some(&t1));
    }

    #[test]
    fn digit_prefixes_are_stable(i in 0usize..3, base in 2u64..=12, n in 1u32..=5) {
        let cases = [("x^2+x+3", 0i64), ("7x", 1), ("2x", 1)];
        let (text, a) = cases[i];
        let f = parse_poly(text).unwrap();
        let cfg = Config::default();
        let s = match digit_stream(&f, a, base, n, &cfg) {
            Ok(s) => s,
            // some bases meet a prime at which f is a single cycle
            Err(tower_limits::Error::Unstable { .. }) => return Ok(()),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        let b = BigUint::from(base);
        for k in 1..n as usize {
            let lower = s.partial_sum(k).unwrap();
            let upper = s.partial_sum(k + 1).unwrap();
            prop_assert_eq!(upper % b.pow(k as u32), lower.clone());
        }
        prop_assert!(s.digits.iter().all(|&d| d < base));
    }

    #[test]
    fn tower_trace_matches_literal_tower(m in 1u64..1_000_000, seed in 1u64..=3) {
        // 2x from 1: the exact tower stays small enough for literal iteration
        let f = parse_poly("2x").unwrap();
        let cfg = Config::default();
        let steps = if seed == 1 { 5 } else { 3 };
        let lit = literal_tower_mod(&f, 1, seed, &BigUint::from(m), steps, 1 << 17).unwrap();
        let t = tower_sequence_mod(&f, 1, &BigUint::from(seed), &BigUint::from(m), steps, &cfg).unwrap();
        prop_assert_eq!(t.values, lit);
    }
}

#[test]
fn next_level_periods_divide_the_base_power() {
    // λ(10^(n+1)) = 8 * 5^(n-1) for x^2+x+3, which divides 10^n once n >= 3
    let f = parse_poly("x^2+x+3").unwrap();
    let cfg = Config::default();
    for n in 1..=5u32 {
        let lam = lambda_exact(&f, 10u64.pow(n + 1), &cfg).unwrap().period_multiple;
        assert_eq!(lam, BigUint::from(8u32) * BigUint::from(5u32).pow(n - 1));
        assert_eq!((BigUint::from(10u32).pow(n) % &lam).is_zero(), n >= 3, "n = {n}: λ = {lam}");
    }
}
