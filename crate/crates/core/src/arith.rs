//! Factorization, primality and prime-power helpers.

use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Prime factorization `Π p^e` with primes strictly ascending.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Factorization {
    factors: Vec<(u64, u32)>,
}

impl Factorization {
    pub fn one() -> Self {
        Self::default()
    }

    pub fn prime_power(p: u64, e: u32) -> Self {
        let mut f = Self::one();
        if e > 0 {
            f.factors.push((p, e));
        }
        f
    }

    /// Builds from `(prime, exponent)` pairs in any order; repeated primes add up.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (u64, u32)>) -> Self {
        let mut factors: Vec<(u64, u32)> = pairs.into_iter().filter(|&(_, e)| e > 0).collect();
        factors.sort_unstable();
        let mut merged: Vec<(u64, u32)> = Vec::with_capacity(factors.len());
        for (p, e) in factors {
            match merged.last_mut() {
                Some((q, f)) if *q == p => *f += e,
                _ => merged.push((p, e)),
            }
        }
        Self { factors: merged }
    }

    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }

    pub fn is_one(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn is_square_free(&self) -> bool {
        self.factors.iter().all(|&(_, e)| e == 1)
    }

    pub fn exponent_of(&self, p: u64) -> u32 {
        self.factors
            .iter()
            .find(|&&(q, _)| q == p)
            .map_or(0, |&(_, e)| e)
    }

    pub fn value(&self) -> BigUint {
        self.factors
            .iter()
            .fold(BigUint::one(), |acc, &(p, e)| acc * BigUint::from(p).pow(e))
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self::from_pairs(self.factors.iter().chain(other.factors.iter()).copied())
    }

    /// `self^k`.
    pub fn pow(&self, k: u32) -> Self {
        Self {
            factors: self.factors.iter().map(|&(p, e)| (p, e * k)).collect(),
        }
    }

    pub fn lcm(&self, other: &Self) -> Self {
        let mut out = self.factors.clone();
        for &(p, e) in &other.factors {
            match out.iter_mut().find(|(q, _)| *q == p) {
                Some((_, f)) => *f = (*f).max(e),
                None => out.push((p, e)),
            }
        }
        Self::from_pairs(out)
    }

    /// Whether `self` divides `other`.
    pub fn divides(&self, other: &Self) -> bool {
        self.factors.iter().all(|&(p, e)| other.exponent_of(p) >= e)
    }

    /// The largest prime power in the factorization; 1 for the empty product.
    pub fn alpha(&self) -> BigUint {
        self.factors
            .iter()
            .map(|&(p, e)| BigUint::from(p).pow(e))
            .max()
            .unwrap_or_else(BigUint::one)
    }
}

impl fmt::Display for Factorization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return f.write_str("1");
        }
        for (i, &(p, e)) in self.factors.iter().enumerate() {
            if i > 0 {
                f.write_str(" * ")?;
            }
            if e == 1 {
                write!(f, "{p}")?;
            } else {
                write!(f, "{p}^{e}")?;
            }
        }
        Ok(())
    }
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub(crate) fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin for 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &BASES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Exact factorization by trial division on a 2-3-5 wheel, stopping early
/// once the cofactor is prime.
pub fn factorize(n: u64) -> Result<Factorization> {
    if n == 0 {
        return Err(Error::InvalidArgument("cannot factorize 0".into()));
    }
    let mut n = n;
    let mut pairs = Vec::new();
    for p in [2u64, 3, 5] {
        let mut e = 0;
        while n.is_multiple_of(p) {
            n /= p;
            e += 1;
        }
        if e > 0 {
            pairs.push((p, e));
        }
    }
    const GAPS: [u64; 8] = [4, 2, 4, 2, 4, 6, 2, 6];
    let mut d = 7u64;
    let mut gap = 0;
    let mut cofactor_prime = is_prime(n);
    while n > 1 {
        if cofactor_prime || d.checked_mul(d).is_none_or(|sq| sq > n) {
            pairs.push((n, 1));
            break;
        }
        let mut e = 0;
        while n.is_multiple_of(d) {
            n /= d;
            e += 1;
        }
        if e > 0 {
            pairs.push((d, e));
            cofactor_prime = is_prime(n);
        }
        d += GAPS[gap];
        gap = (gap + 1) % GAPS.len();
    }
    Ok(Factorization::from_pairs(pairs))
}

/// Factorizes an arbitrary-size integer that must fit in 64 bits.
pub fn factorize_big(n: &BigUint) -> Result<Factorization> {
    let small = n.to_u64().ok_or_else(|| Error::AboveCeiling {
        what: "factorization input",
        value: n.to_string(),
        ceiling: u64::MAX.to_string(),
    })?;
    factorize(small)
}

/// The largest prime power dividing `n`; `alpha(1) = 1`.
pub fn alpha(n: u64) -> Result<u64> {
    Ok(factorize(n)?
        .factors()
        .iter()
        .map(|&(p, e)| p.pow(e))
        .max()
        .unwrap_or(1))
}

pub fn lcm_all<'a>(values: impl IntoIterator<Item = &'a BigUint>) -> Result<BigUint> {
    let mut it = values.into_iter();
    let first = it
        .next()
        .ok_or_else(|| Error::InvalidArgument("lcm of an empty list".into()))?;
    Ok(it.fold(first.clone(), |acc, v| acc.lcm(v)))
}

/// `lcm(1, 2, ..., n)`.
pub fn lcm_upto(n: u64) -> BigUint {
    (2..=n).fold(BigUint::one(), |acc, k| acc.lcm(&BigUint::from(k)))
}

/// Factorization of `lcm(1, ..., n)`: every prime `q <= n` to the largest power `<= n`.
pub fn lcm_upto_factorization(n: u64) -> Factorization {
    Factorization::from_pairs((2..=n).filter(|&q| is_prime(q)).map(|q| {
        let mut e = 1;
        let mut pk = q;
        while pk.checked_mul(q).is_some_and(|v| v <= n) {
            pk *= q;
            e += 1;
        }
        (q, e)
    }))
}

pub fn primes_upto(n: u64) -> Vec<u64> {
    (2..=n).filter(|&k| is_prime(k)).collect()
}
