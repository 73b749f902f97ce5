//! Tower-stability: no prime `p` at which `f mod p` cycles through all of `Z/pZ`.
//!
//! A prime sweep alone can never clear every prime. Two integer witnesses do:
//! a fixed point `f(c) = c` survives modulo every prime, and a collision
//! `f(c) = f(c')` makes every reduction mod `p ∤ c - c'` non-injective.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{factorize, is_prime, primes_upto};
use crate::config::Config;
use crate::error::{Error, Result};
use crate::periods::lambda_exact;
use crate::polyparse::Polynomial;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Verdict {
    /// Every prime is covered by a certificate or an explicit check.
    StableCertified,
    /// Only primes up to the bound were checked.
    StableUpToBound { bound: u64 },
    Unstable { prime: u64 },
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::StableCertified => f.write_str("stable-certified"),
            Verdict::StableUpToBound { bound } => write!(f, "stable-up-to-bound (p <= {bound})"),
            Verdict::Unstable { prime } => write!(f, "unstable (p = {prime})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeVerdict {
    pub prime: u64,
    pub is_p_cycle: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub polynomial: Polynomial,
    pub prime_bound: u64,
    pub search_bound: i64,
    pub per_prime: Vec<PrimeVerdict>,
    pub collision: Option<(i64, i64)>,
    pub fixed_point: Option<i64>,
    pub verdict: Verdict,
}

impl StabilityReport {
    pub fn is_stable(&self) -> bool {
        !matches!(self.verdict, Verdict::Unstable { .. })
    }
}

/// Window of integers scanned for certificates: `[-B, B]` plus `±B` around
/// the axis `-c_(d-1) / (d·c_d)` where even-degree collisions cluster.
fn search_points(f: &Polynomial, bound: i64) -> Vec<i64> {
    let mut pts: Vec<i64> = (-bound..=bound).collect();
    let d = f.degree();
    if d >= 2 {
        let denom = f.leading() * BigInt::from(d);
        let axis = (-f.coeff(d - 1)).div_floor(&denom);
        if let Some(axis) = axis.to_i64() {
            if axis.unsigned_abs() > bound as u64 {
                pts.extend((axis.saturating_sub(bound))..=(axis.saturating_add(bound)));
            }
        }
    }
    pts
}

fn find_certificates(f: &Polynomial, bound: i64) -> (Option<(i64, i64)>, Option<i64>) {
    let mut seen: HashMap<BigInt, i64> = HashMap::new();
    let mut collision: Option<(i64, i64)> = None;
    let mut fixed = None;
    for c in search_points(f, bound) {
        let x = BigInt::from(c);
        let v = f.eval(&x);
        if fixed.is_none() && v == x {
            fixed = Some(c);
        }
        match seen.get(&v) {
            Some(&c0) if c0 != c => {
                // prefer the pair with the fewest residual primes
                let better = collision.is_none_or(|(a, b)| (c - c0).abs() < (b - a).abs());
                if better {
                    collision = Some((c0.min(c), c0.max(c)));
                }
            }
            Some(_) => {}
            None => {
                seen.insert(v, c);
            }
        }
    }
    (collision, fixed)
}

/// Decides tower-stability up to the given bounds, with certificates when found.
pub fn tower_stability_report(f: &Polynomial, prime_bound: u64, search_bound: i64) -> Result<StabilityReport> {
    let (collision, fixed_point) = find_certificates(f, search_bound.max(0));
    let mut per_prime = Vec::new();

    let verdict = if fixed_point.is_some() {
        Verdict::StableCertified
    } else {
        let (primes, covered) = match collision {
            Some((c, c2)) => {
                let diff = (c2 - c).unsigned_abs();
                (factorize(diff)?.primes().collect::<Vec<_>>(), true)
            }
            None => (primes_upto(prime_bound), false),
        };
        let mut unstable = None;
        for p in primes {
            let cyc = is_p_cycle(f, p)?;
            per_prime.push(PrimeVerdict { prime: p, is_p_cycle: cyc });
            if cyc && unstable.is_none() {
                unstable = Some(p);
            }
        }
        match (unstable, covered) {
            (Some(prime), _) => Verdict::Unstable { prime },
            (None, true) => Verdict::StableCertified,
            (None, false) => Verdict::StableUpToBound { bound: prime_bound },
        }
    };
    Ok(StabilityReport {
        polynomial: f.clone(),
        prime_bound,
        search_bound,
        per_prime,
        collision,
        fixed_point,
        verdict,
    })
}

/// Whether `f mod p` is one cycle through all of `Z/pZ`.
pub fn is_p_cycle(f: &Polynomial, p: u64) -> Result<bool> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let map = f.reduce(p)?;
    let mut x = 0u64;
    for i in 1..=p {
        x = map.eval(x);
        if x == 0 {
            return Ok(i == p);
        }
    }
    Ok(false)
}

/// Every prime `q` dividing `p - 1` for a prime `p | b` also divides `b`.
pub fn is_valid_base(b: u64) -> Result<bool> {
    if b == 0 {
        return Err(Error::InvalidArgument("base must be positive".into()));
    }
    let fb = factorize(b)?;
    for p in fb.primes() {
        if p == 2 {
            continue;
        }
        if !factorize(p - 1)?.primes().all(|q| b.is_multiple_of(q)) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Square-free, valid, and every prime of `λ_f(p)` for `p | b` divides `b`.
pub fn is_f_valid_base(f: &Polynomial, b: u64, config: &Config) -> Result<bool> {
    if b == 0 {
        return Err(Error::InvalidArgument("base must be positive".into()));
    }
    let fb = factorize(b)?;
    for p in fb.primes() {
        if is_p_cycle(f, p)? {
            return Err(Error::Unstable { prime: p });
        }
    }
    if !fb.is_square_free() || !is_valid_base(b)? {
        return Ok(false);
    }
    for p in fb.primes() {
        let lambda = lambda_exact(f, p, config)?;
        if !lambda.period_factors.primes().all(|q| b.is_multiple_of(q)) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `Π_{p <= bound} (1 - (p-1)!/p^p)`, with each `(p-1)!/p^p` built as a
/// product of factors `j/p` so nothing overflows.
pub fn ctow_partial(prime_bound: u64) -> f64 {
    primes_upto(prime_bound)
        .into_iter()
        .map(|p| 1.0 - ctow_factor_defect(p))
        .product()
}

/// `(p-1)!/p^p`, the chance that a random map on `Z/pZ` is a single `p`-cycle.
pub fn ctow_factor_defect(p: u64) -> f64 {
    let pf = p as f64;
    (1..p).fold(1.0 / pf, |acc, j| acc * (j as f64 / pf))
}

pub fn collision_is_sound(f: &Polynomial, collision: (i64, i64)) -> bool {
    let (c, c2) = collision;
    c != c2 && f.eval(&BigInt::from(c)) == f.eval(&BigInt::from(c2))
}

pub fn residual_primes(collision: (i64, i64)) -> Result<Vec<u64>> {
    let diff = BigInt::from(collision.1) - BigInt::from(collision.0);
    let d = diff.abs().to_u64().filter(|d| !d.is_zero()).ok_or_else(|| {
        Error::InvalidArgument("collision points must differ".into())
    })?;
    Ok(factorize(d)?.primes().collect())
}
