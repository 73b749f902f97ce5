#![allow(dead_code)]

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tower_limits::Polynomial;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Degree 1..=max_degree, coefficients in [-bound, bound], nonzero leading term.
pub fn random_poly(rng: &mut impl Rng, max_degree: usize, bound: i64) -> Polynomial {
    let d = rng.gen_range(1..=max_degree);
    let mut c: Vec<i64> = (0..=d).map(|_| rng.gen_range(-bound..=bound)).collect();
    while c[d] == 0 {
        c[d] = rng.gen_range(-bound..=bound);
    }
    Polynomial::from_i64s(&c)
}

pub fn corpus(seed: u64, count: usize) -> Vec<Polynomial> {
    let mut r = rng(seed);
    (0..count).map(|_| random_poly(&mut r, 4, 9)).collect()
}

/// `(tail, cycle)` of `a` under `f mod m` by a plain hash-map walk.
pub fn walk_shape(f: &Polynomial, a: u64, m: u64) -> (u64, u64) {
    let g = f.reduce(m).unwrap();
    let mut seen = HashMap::new();
    let mut x = a % m;
    let mut i = 0u64;
    while let std::collections::hash_map::Entry::Vacant(e) = seen.entry(x) {
        e.insert(i);
        x = g.eval(x);
        i += 1;
    }
    let k = seen[&x];
    (k, i - k)
}

pub fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}
