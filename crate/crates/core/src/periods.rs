//! Period maps of polynomial reductions.
//!
//! A [`PeriodCertificate`] states that `f^Θ(x) ≡ f^(Θ+Λ)(x) (mod m)` either
//! for every residue `x` (a global certificate, `start == None`) or for the
//! orbit of one start point. `Λ` is the exact period when `exact` is set and
//! a multiple of it otherwise; both are safe for exponent reduction.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{self, factorize, is_prime, Factorization};
use crate::config::Config;
use crate::dynamics::{analyze_map, orbit};
use crate::error::{Error, Result};
use crate::polyparse::Polynomial;
use crate::stability::is_p_cycle;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    /// Exhaustive enumeration of the reduction (or of one orbit).
    Enumeration,
    /// Lift from the prime to the prime power through the mod-p multiplier.
    MultiplierLift,
    /// `λ(p^(a+1)) | lcm(1..p)·λ(p^a)` iterated from the largest enumerable power.
    LcmChain,
    /// Least common multiple of coprime parts.
    CrtCombine,
    /// Case split for maps `x -> b*x + c`.
    LinearClosedForm,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodCertificate {
    #[serde(with = "crate::serde_big::biguint")]
    pub modulus: BigUint,
    /// `Some(a)` when the certificate covers only the orbit of `a`.
    pub start: Option<i64>,
    #[serde(with = "crate::serde_big::biguint")]
    pub period_multiple: BigUint,
    pub period_factors: Factorization,
    pub exact: bool,
    #[serde(with = "crate::serde_big::biguint")]
    pub tail_bound: BigUint,
    pub provenance: Provenance,
}

impl PeriodCertificate {
    pub(crate) fn new(
        modulus: BigUint,
        start: Option<i64>,
        period_factors: Factorization,
        exact: bool,
        tail_bound: BigUint,
        provenance: Provenance,
    ) -> Self {
        Self {
            modulus,
            start,
            period_multiple: period_factors.value(),
            period_factors,
            exact,
            tail_bound,
            provenance,
        }
    }

    fn trivial(start: Option<i64>) -> Self {
        Self::new(
            BigUint::one(),
            start,
            Factorization::one(),
            true,
            BigUint::zero(),
            Provenance::Enumeration,
        )
    }
}

/// The mod-p multiplier of `f` along the orbit of `start`: the derivative of
/// `f^cycle` at the cycle entry, reduced mod `p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Multiplier {
    pub prime: u64,
    pub value: u64,
    pub start: i64,
    pub tail: u64,
    pub cycle: u64,
}

impl Multiplier {
    pub fn vanishes(&self) -> bool {
        self.value == 0
    }
}

pub(crate) fn residue(a: i64, m: u64) -> u64 {
    (a as i128).rem_euclid(m as i128) as u64
}

/// Exact `λ_f(m)` and preperiod by enumerating `Z/mZ`.
pub fn lambda_exact(f: &Polynomial, m: u64, config: &Config) -> Result<PeriodCertificate> {
    let graph = analyze_map(f, m, config)?;
    let mut factors = Factorization::one();
    for &(_, len) in &graph.cycle_inventory {
        factors = factors.lcm(&factorize(len)?);
    }
    Ok(PeriodCertificate::new(
        BigUint::from(m),
        None,
        factors,
        true,
        BigUint::from(graph.preperiod),
        Provenance::Enumeration,
    ))
}

/// Exact tail and cycle of the orbit of `a` modulo `m`, as a certificate.
pub fn orbit_certificate(f: &Polynomial, a: i64, m: u64, config: &Config) -> Result<PeriodCertificate> {
    let o = orbit(f, residue(a, m), m, config.max_orbit_steps, 0)?;
    Ok(PeriodCertificate::new(
        BigUint::from(m),
        Some(a),
        factorize(o.cycle())?,
        true,
        BigUint::from(o.tail()),
        Provenance::Enumeration,
    ))
}

pub fn multiplier(f: &Polynomial, a: i64, p: u64, config: &Config) -> Result<Multiplier> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let map = f.reduce(p)?;
    let deriv = f.derivative().reduce(p)?;
    let o = orbit(f, residue(a, p), p, config.max_orbit_steps, 0)?;
    let mut x = o.shape().entry;
    let mut value = 1u64 % p;
    for _ in 0..o.cycle() {
        value = ((value as u128 * deriv.eval(x) as u128) % p as u128) as u64;
        x = map.eval(x);
    }
    Ok(Multiplier {
        prime: p,
        value,
        start: a,
        tail: o.tail(),
        cycle: o.cycle(),
    })
}

/// Tail bound and period multiple for the orbit of `a` modulo `p^k`, from
/// the exact data modulo `p` and the multiplier.
///
/// A vanishing multiplier keeps the cycle length and lets the tail grow by
/// one cycle per level; otherwise the tail is fixed and the cycle divides
/// `λ(p)·(p-1)·p^(k-1)`.
pub fn lift_prime_power(f: &Polynomial, a: i64, p: u64, k: u32, config: &Config) -> Result<PeriodCertificate> {
    if k == 0 {
        return Err(Error::InvalidArgument("prime power exponent must be positive".into()));
    }
    let mu = multiplier(f, a, p, config)?;
    let modulus = BigUint::from(p).pow(k);
    let cycle = factorize(mu.cycle)?;
    if k == 1 {
        return Ok(PeriodCertificate::new(
            modulus,
            Some(a),
            cycle,
            true,
            BigUint::from(mu.tail),
            Provenance::Enumeration,
        ));
    }
    let cert = if mu.vanishes() {
        let tail = BigUint::from(mu.tail) + BigUint::from(k - 1) * BigUint::from(mu.cycle);
        PeriodCertificate::new(modulus, Some(a), cycle, true, tail, Provenance::MultiplierLift)
    } else {
        let factors = cycle
            .mul(&factorize(p - 1)?)
            .mul(&Factorization::prime_power(p, k - 1));
        PeriodCertificate::new(
            modulus,
            Some(a),
            factors,
            false,
            BigUint::from(mu.tail),
            Provenance::MultiplierLift,
        )
    };
    Ok(cert)
}

/// Global certificate for `p^k` above the enumeration ceiling, iterating
/// `Θ -> Θ + p·Λ`, `Λ -> lcm(1..p)·Λ` from the largest enumerable power.
fn lcm_chain_certificate(f: &Polynomial, p: u64, k: u32, config: &Config) -> Result<PeriodCertificate> {
    if p > config.enumeration_ceiling {
        return Err(Error::AboveCeiling {
            what: "prime",
            value: p.to_string(),
            ceiling: config.enumeration_ceiling.to_string(),
        });
    }
    let mut j = 1u32;
    let mut pj = p;
    while j < k && pj.checked_mul(p).is_some_and(|v| v <= config.enumeration_ceiling) {
        pj *= p;
        j += 1;
    }
    let base = lambda_exact(f, pj, config)?;
    if j == k {
        return Ok(base);
    }
    let step = arith::lcm_upto_factorization(p);
    let big_p = BigUint::from(p);
    let mut tail = base.tail_bound;
    let mut factors = base.period_factors;
    for _ in j..k {
        tail += &big_p * factors.value();
        factors = factors.mul(&step);
    }
    Ok(PeriodCertificate::new(
        big_p.pow(k),
        None,
        factors,
        false,
        tail,
        Provenance::LcmChain,
    ))
}

/// Combines certificates for pairwise coprime moduli into one for their product.
pub fn crt_combine(parts: Vec<PeriodCertificate>) -> PeriodCertificate {
    let start = parts.first().and_then(|c| c.start);
    let mut it = parts.into_iter();
    let Some(first) = it.next() else {
        return PeriodCertificate::trivial(start);
    };
    let mut acc = first;
    let mut combined = false;
    for c in it {
        combined = true;
        acc.modulus *= c.modulus;
        acc.period_factors = acc.period_factors.lcm(&c.period_factors);
        acc.exact &= c.exact;
        if c.tail_bound > acc.tail_bound {
            acc.tail_bound = c.tail_bound;
        }
        if c.start != acc.start {
            acc.start = None;
        }
    }
    acc.period_multiple = acc.period_factors.value();
    if combined {
        acc.provenance = Provenance::CrtCombine;
    }
    acc
}

/// A certificate for `m` assembled from its prime-power parts.
///
/// With a start point each part is the exact orbit data (enumerable powers)
/// or the multiplier lift; without one, exact `λ_f` or the lcm chain.
pub fn lambda_multiple_factored(
    f: &Polynomial,
    m: &Factorization,
    start: Option<i64>,
    config: &Config,
) -> Result<PeriodCertificate> {
    let mut parts = Vec::with_capacity(m.factors().len());
    for &(p, e) in m.factors() {
        let pe = p.checked_pow(e).filter(|&v| v <= config.enumeration_ceiling);
        let part = match (pe, start) {
            (Some(pe), None) => lambda_exact(f, pe, config)?,
            (Some(pe), Some(a)) => orbit_certificate(f, a, pe, config)?,
            (None, Some(a)) => lift_prime_power(f, a, p, e, config)?,
            (None, None) => lcm_chain_certificate(f, p, e, config)?,
        };
        parts.push(part);
    }
    let mut cert = crt_combine(parts);
    cert.start = start;
    Ok(cert)
}

pub fn lambda_multiple(f: &Polynomial, m: u64, start: Option<i64>, config: &Config) -> Result<PeriodCertificate> {
    if m == 0 {
        return Err(Error::ZeroModulus);
    }
    lambda_multiple_factored(f, &factorize(m)?, start, config)
}

/// The descending chain `m, Λ(m), Λ(Λ(m)), ...` down to 1.
///
/// Fails with [`Error::Unstable`] when a modulus in the chain has a prime at
/// which `f` is a full cycle, since then the chain need not reach 1.
pub fn lambda_chain(f: &Polynomial, m: u64, max_depth: usize, config: &Config) -> Result<Vec<PeriodCertificate>> {
    if m == 0 {
        return Err(Error::ZeroModulus);
    }
    let mut links = Vec::new();
    let mut current = factorize(m)?;
    while !current.is_one() {
        if links.len() >= max_depth {
            return Err(Error::DepthExceeded(max_depth));
        }
        for p in current.primes() {
            if p > config.enumeration_ceiling {
                return Err(Error::AboveCeiling {
                    what: "prime",
                    value: p.to_string(),
                    ceiling: config.enumeration_ceiling.to_string(),
                });
            }
            if is_p_cycle(f, p)? {
                return Err(Error::Unstable { prime: p });
            }
        }
        let cert = lambda_multiple_factored(f, &current, None, config)?;
        current = cert.period_factors.clone();
        links.push(cert);
    }
    Ok(links)
}

/// Moduli visited by a chain, ending with 1.
pub fn chain_moduli(links: &[PeriodCertificate]) -> Vec<BigUint> {
    let mut out: Vec<BigUint> = links.iter().map(|c| c.modulus.clone()).collect();
    out.push(links.last().map_or_else(BigUint::one, |c| c.period_multiple.clone()));
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LinearCase {
    /// `b ≡ 0`: the map is constant mod p.
    Collapsing,
    /// `b ≡ 1`: a translation, a permutation of `Z/pZ`.
    Translation,
    /// Anything else, resolved by walking the orbit.
    Enumerated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearBounds {
    pub case: LinearCase,
    /// The tail of the orbit is at most this.
    pub tail_bound: u64,
    /// The cycle length divides this.
    pub period_divisor: u64,
}

/// Tail and cycle bounds for the orbit of `s` under `x -> b*x + c` modulo `p`.
pub fn linear_cycle_bounds(b: i64, c: i64, s: i64, p: u64, config: &Config) -> Result<LinearBounds> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    Ok(match residue(b, p) {
        0 => LinearBounds {
            case: LinearCase::Collapsing,
            tail_bound: 1,
            period_divisor: 1,
        },
        1 => LinearBounds {
            case: LinearCase::Translation,
            tail_bound: 0,
            period_divisor: p,
        },
        _ => {
            let o = orbit(&Polynomial::linear(b, c), residue(s, p), p, config.max_orbit_steps, 0)?;
            LinearBounds {
                case: LinearCase::Enumerated,
                tail_bound: o.tail(),
                period_divisor: o.cycle(),
            }
        }
    })
}

/// `f^e(x0) mod m` for `f(x) = b*x + c`, by repeated squaring of the affine map.
pub fn closed_form_linear_iterate(b: &BigInt, c: &BigInt, x0: &BigInt, e: &BigUint, m: &BigUint) -> Result<BigUint> {
    if m.is_zero() {
        return Err(Error::ZeroModulus);
    }
    let mi = BigInt::from(m.clone());
    let red = |v: &BigInt| v.mod_floor(&mi).to_biguint().expect("non-negative residue");
    // (mul, add) represents x -> mul*x + add
    let mut base = (red(b), red(c));
    let mut acc = (BigUint::one() % m, BigUint::zero());
    let compose = |(a1, b1): &(BigUint, BigUint), (a2, b2): &(BigUint, BigUint)| {
        ((a1 * a2) % m, (a1 * b2 + b1) % m)
    };
    for i in 0..e.bits() {
        if e.bit(i) {
            acc = compose(&base, &acc);
        }
        base = compose(&base, &base);
    }
    Ok((acc.0 * red(x0) + acc.1) % m)
}

/// [`closed_form_linear_iterate`] for a polynomial of degree at most one.
pub fn iterate_linear(f: &Polynomial, x0: &BigInt, e: &BigUint, m: &BigUint) -> Result<BigUint> {
    let (b, c) = f.as_linear().ok_or(Error::NotLinear(f.degree()))?;
    closed_form_linear_iterate(&b, &c, x0, e, m)
}

/// Checks `f^Θ(x) ≡ f^(Θ+Λ)(x) (mod m)`: for the start point of a
/// per-start certificate, for every residue below the enumeration ceiling,
/// and for 64 sampled residues above it.
pub fn verify_certificate(f: &Polynomial, cert: &PeriodCertificate, config: &Config) -> Result<bool> {
    let m = cert.modulus.to_u64().ok_or_else(|| Error::AboveCeiling {
        what: "modulus",
        value: cert.modulus.to_string(),
        ceiling: u64::MAX.to_string(),
    })?;
    let holds = |x: u64| -> Result<bool> {
        let o = orbit(f, x, m, config.max_orbit_steps, 0)?;
        Ok(BigUint::from(o.tail()) <= cert.tail_bound
            && (&cert.period_multiple % BigUint::from(o.cycle())).is_zero())
    };
    if let Some(a) = cert.start {
        return holds(residue(a, m));
    }
    if m <= config.enumeration_ceiling {
        let g = analyze_map(f, m, config)?;
        return Ok(BigUint::from(g.preperiod) <= cert.tail_bound
            && (&cert.period_multiple % &g.period).is_zero());
    }
    let mut state = 0x9E37_79B9_7F4A_7C15u64 ^ m;
    for _ in 0..64 {
        state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
        if !holds(z % m)? {
            return Ok(false);
        }
    }
    Ok(true)
}
