//! Profinite limits of tower sequences `y_0 = b`, `y_(n+1) = f^(y_n)(a)`.
//!
//! Modulo `m` the limit is `f^e(a)` for any `e` past the tail of the orbit
//! of `a` with `e` congruent to the limit modulo the cycle length, so it is
//! computed down the chain of moduli `m, Λ(m), Λ(Λ(m)), ...` ending at 1 and
//! then read back up.

use std::collections::HashMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{factorize, factorize_big, Factorization};
use crate::config::Config;
use crate::dynamics::{least_exponent, orbit, Orbit};
use crate::error::{Error, Result};
use crate::periods::{closed_form_linear_iterate, crt_combine, lift_prime_power, residue, PeriodCertificate, Provenance};
use crate::polyparse::Polynomial;
use crate::stability::is_f_valid_base;

/// `f^tail(start) = f^(tail+cycle)(start)` as exact integers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreperiodicWitness {
    pub start: i64,
    pub tail: u64,
    pub cycle: u64,
    /// The first repeated value, `f^tail(start)`.
    #[serde(with = "crate::serde_big::bigint")]
    pub value: BigInt,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OrbitFate {
    Preperiodic(PreperiodicWitness),
    /// `|f^i(a)|` strictly increases from index `from` on; `upward` when the
    /// values also end up positive, so the orbit tends to `+∞`.
    Diverges { from: u64, upward: bool },
}

/// A bound `T` with `|f(x)| > |x|` whenever `|x| > T`, when one exists.
///
/// For degree `d >= 2` and `S = Σ_(i<d) |c_i|`, `|f(x)| >= |x|^(d-1)(|x| - S)`,
/// which exceeds `|x|` once `|x| > S + 1`. For `bx + c` with `|b| >= 2` it is `|c|`.
fn growth_threshold(f: &Polynomial) -> Option<BigInt> {
    let d = f.degree();
    if d >= 2 {
        let s: BigInt = f.coeffs()[..d].iter().map(|c| c.abs()).sum();
        Some(s + 1)
    } else if d == 1 && f.coeff(1).abs() >= BigInt::from(2) {
        Some(f.coeff(0).abs())
    } else {
        None
    }
}

/// Walks the exact integer orbit of `a` until it repeats or provably diverges.
pub fn orbit_fate(f: &Polynomial, a: i64, budget: u64) -> Result<OrbitFate> {
    if let Some((b, c)) = f.as_linear() {
        if b.is_one() && !c.is_zero() {
            return Ok(OrbitFate::Diverges {
                from: 0,
                upward: c.is_positive(),
            });
        }
    }
    let threshold = growth_threshold(f);
    let mut seen: HashMap<BigInt, u64> = HashMap::new();
    let mut x = BigInt::from(a);
    for i in 0..=budget {
        if let Some(&j) = seen.get(&x) {
            return Ok(OrbitFate::Preperiodic(PreperiodicWitness {
                start: a,
                tail: j,
                cycle: i - j,
                value: x,
            }));
        }
        if let Some(t) = &threshold {
            if x.abs() > *t {
                // past the threshold the sign of f(x) is that of its leading term
                let next = f.eval(&x);
                return Ok(OrbitFate::Diverges {
                    from: i,
                    upward: next.is_positive() && f.leading().is_positive(),
                });
            }
        }
        let next = f.eval(&x);
        seen.insert(x, i);
        x = next;
    }
    Err(Error::Inconclusive { steps: budget })
}

/// The witness when `a` is preperiodic, `None` when the orbit provably diverges.
pub fn detect_preperiodic(f: &Polynomial, a: i64, budget: u64) -> Result<Option<PreperiodicWitness>> {
    Ok(match orbit_fate(f, a, budget)? {
        OrbitFate::Preperiodic(w) => Some(w),
        OrbitFate::Diverges { .. } => None,
    })
}

/// Tower values beyond this are only tracked modulo the chain moduli.
fn exact_ceiling() -> BigInt {
    BigInt::one() << 64
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum TowerValue {
    Exact(BigUint),
    /// Larger than the engine's lower bound for large values.
    Large,
}

/// Limit computations for one polynomial and start point, with the orbit,
/// certificate and stability data shared between moduli.
pub struct LimitEngine {
    f: Polynomial,
    start: i64,
    config: Config,
    linear: Option<(BigInt, BigInt)>,
    divergence_index: u64,
    orbits: HashMap<u64, Orbit>,
    links: HashMap<Factorization, PeriodCertificate>,
    cycling: HashMap<u64, bool>,
    exact_orbit: Option<Vec<BigInt>>,
}

impl LimitEngine {
    /// Fails unless the orbit of `a` tends to `+∞`.
    pub fn new(f: &Polynomial, a: i64, config: Config) -> Result<Self> {
        let divergence_index = match orbit_fate(f, a, config.preperiodic_budget)? {
            OrbitFate::Preperiodic(w) => return Err(Error::Preperiodic(Box::new(w))),
            OrbitFate::Diverges { upward: false, .. } => return Err(Error::NotDivergent(a)),
            OrbitFate::Diverges { from, .. } => from,
        };
        Ok(Self {
            f: f.clone(),
            start: a,
            config,
            linear: f.as_linear(),
            divergence_index,
            orbits: HashMap::new(),
            links: HashMap::new(),
            cycling: HashMap::new(),
            exact_orbit: None,
        })
    }

    pub fn polynomial(&self) -> &Polynomial {
        &self.f
    }

    pub fn start(&self) -> i64 {
        self.start
    }

    /// Whether `f mod p` is a single `p`-cycle.
    fn full_cycle(&mut self, p: u64) -> Result<bool> {
        if let Some(&v) = self.cycling.get(&p) {
            return Ok(v);
        }
        let v = match &self.linear {
            // a translation by a nonzero constant, or else it has a fixed point
            Some((b, c)) => {
                let pb = BigInt::from(p);
                (b - 1u32).is_multiple_of(&pb) && !c.is_multiple_of(&pb)
            }
            None => {
                let o = orbit(&self.f, residue(self.start, p), p, self.config.max_orbit_steps, 0)?;
                o.tail() == 0 && o.cycle() == p
            }
        };
        self.cycling.insert(p, v);
        Ok(v)
    }

    fn check_primes(&mut self, m: &Factorization) -> Result<()> {
        for p in m.primes() {
            if self.full_cycle(p)? {
                return Err(Error::Unstable { prime: p });
            }
        }
        Ok(())
    }

    fn orbit_mod(&mut self, m: u64) -> Result<&Orbit> {
        if !self.orbits.contains_key(&m) {
            let o = orbit(
                &self.f,
                residue(self.start, m),
                m,
                self.config.max_orbit_steps,
                self.config.orbit_cache_bound,
            )?;
            self.orbits.insert(m, o);
        }
        Ok(&self.orbits[&m])
    }

    /// Tail bound and period multiple for the orbit of `a` modulo `m`.
    pub fn link(&mut self, m: &Factorization) -> Result<PeriodCertificate> {
        if let Some(c) = self.links.get(m) {
            return Ok(c.clone());
        }
        self.check_primes(m)?;
        let cert = if self.linear.is_some() {
            let mut parts = Vec::new();
            for &(p, e) in m.factors() {
                parts.push(lift_prime_power(&self.f, self.start, p, e, &self.config)?);
            }
            let mut c = crt_combine(parts);
            c.start = Some(self.start);
            c
        } else {
            let mv = word_modulus(m)?;
            let o = self.orbit_mod(mv)?;
            let (tail, cycle) = (o.tail(), o.cycle());
            PeriodCertificate::new(
                m.value(),
                Some(self.start),
                factorize(cycle)?,
                true,
                BigUint::from(tail),
                Provenance::Enumeration,
            )
        };
        self.links.insert(m.clone(), cert.clone());
        Ok(cert)
    }

    /// The certificates along `m, Λ(m), ...` down to 1, and the moduli visited.
    pub fn chain(&mut self, m: &Factorization) -> Result<Vec<PeriodCertificate>> {
        let mut links = Vec::new();
        let mut current = m.clone();
        while !current.is_one() {
            if links.len() >= self.config.max_depth {
                return Err(Error::DepthExceeded(self.config.max_depth));
            }
            let c = self.link(&current)?;
            current = c.period_factors.clone();
            links.push(c);
        }
        Ok(links)
    }

    /// `f^e(a) mod m`, never by `e` literal steps.
    pub fn iterate_mod(&mut self, e: &BigUint, m: &Factorization) -> Result<BigUint> {
        if m.is_one() {
            return Ok(BigUint::zero());
        }
        if let Some((b, c)) = self.linear.clone() {
            return closed_form_linear_iterate(&b, &c, &BigInt::from(self.start), e, &m.value());
        }
        let mv = word_modulus(m)?;
        Ok(BigUint::from(self.orbit_mod(mv)?.value_at_big(e)))
    }

    /// Whether `f^x(a) ≡ x (mod m)`.
    pub fn satisfies(&mut self, x: &BigUint, m: &Factorization) -> Result<bool> {
        let v = self.iterate_mod(x, m)?;
        Ok(v == x % m.value())
    }

    pub fn limit_mod(&mut self, m: &BigUint) -> Result<BigUint> {
        if m.is_zero() {
            return Err(Error::ZeroModulus);
        }
        self.limit_mod_factored(&factorize_big(m)?)
    }

    pub fn limit_mod_factored(&mut self, m: &Factorization) -> Result<BigUint> {
        let links = self.chain(m)?;
        let moduli = chain_moduli(m, &links);
        let mut r = BigUint::zero();
        for (i, link) in links.iter().enumerate().rev() {
            let e = least_exponent(&r, &link.period_multiple, &link.tail_bound);
            r = self.iterate_mod(&e, &moduli[i])?;
        }
        Ok(r)
    }

    /// `a, f(a), f^2(a), ...` exactly, until the values are increasing and
    /// past `2^64`, or the preperiodic budget runs out.
    fn exact_orbit(&mut self) -> &[BigInt] {
        if self.exact_orbit.is_none() {
            let ceiling = exact_ceiling();
            let must = self.divergence_index as usize + 2;
            let cap = (self.config.preperiodic_budget as usize).max(must);
            let mut v = vec![BigInt::from(self.start)];
            while v.len() < must || (v.len() < cap && v.last().is_some_and(|x| x <= &ceiling)) {
                let next = self.f.eval(v.last().expect("non-empty"));
                v.push(next);
            }
            self.exact_orbit = Some(v);
        }
        self.exact_orbit.as_deref().expect("just filled")
    }

    /// A lower bound for every [`TowerValue::Large`].
    fn large_lower_bound(&mut self) -> BigUint {
        let last = self.exact_orbit().last().expect("non-empty").clone();
        last.min(exact_ceiling())
            .to_biguint()
            .expect("orbit is positive past the divergence index")
    }

    fn next_tower_value(&mut self, y: &TowerValue) -> Result<TowerValue> {
        let TowerValue::Exact(y) = y else {
            return Ok(TowerValue::Large);
        };
        let table = self.exact_orbit();
        let Some(i) = y.to_usize().filter(|&i| i < table.len()) else {
            return Ok(TowerValue::Large);
        };
        let v = &table[i];
        if v.is_negative() {
            return Err(Error::NegativeIterationCount(v.to_string()));
        }
        Ok(if v > &exact_ceiling() {
            TowerValue::Large
        } else {
            TowerValue::Exact(v.to_biguint().expect("non-negative"))
        })
    }

    /// `y_0 = seed, y_(k+1) = f^(y_k)(a)` modulo `m` for `k < steps`.
    pub fn tower_trace(&mut self, seed: &BigUint, m: &Factorization, steps: usize) -> Result<TowerTrace> {
        if seed.is_zero() {
            return Err(Error::InvalidArgument("seed must be positive".into()));
        }
        let mut ys = vec![TowerValue::Exact(seed.clone())];
        for k in 0..steps {
            let next = self.next_tower_value(&ys[k])?;
            ys.push(next);
        }
        let links = self.chain(m)?;
        let moduli = chain_moduli(m, &links);
        let lower = self.large_lower_bound();

        let mut below = vec![BigUint::zero(); steps + 1];
        for (i, link) in links.iter().enumerate().rev() {
            let modulus = &moduli[i];
            let mut vals = Vec::with_capacity(steps + 1);
            vals.push(seed % modulus.value());
            for k in 0..steps {
                let v = match &ys[k] {
                    TowerValue::Exact(y) => self.iterate_mod(y, modulus)?,
                    TowerValue::Large => {
                        if lower < link.tail_bound {
                            return Err(Error::Inconclusive {
                                steps: self.config.preperiodic_budget,
                            });
                        }
                        let e = least_exponent(&below[k], &link.period_multiple, &link.tail_bound);
                        self.iterate_mod(&e, modulus)?
                    }
                };
                vals.push(v);
            }
            below = vals;
        }
        let values = if links.is_empty() { vec![BigUint::zero(); steps + 1] } else { below };
        Ok(TowerTrace::new(&self.f, self.start, seed.clone(), m.value(), values))
    }
}

fn word_modulus(m: &Factorization) -> Result<u64> {
    let v = m.value();
    v.to_u64().ok_or_else(|| Error::AboveCeiling {
        what: "modulus",
        value: v.to_string(),
        ceiling: u64::MAX.to_string(),
    })
}

/// `moduli[i]` is the modulus of `links[i]`; the last entry is 1.
fn chain_moduli(m: &Factorization, links: &[PeriodCertificate]) -> Vec<Factorization> {
    let mut out = vec![m.clone()];
    out.extend(links.iter().map(|c| c.period_factors.clone()));
    out
}

pub fn profinite_limit_mod(f: &Polynomial, a: i64, m: &BigUint, config: &Config) -> Result<BigUint> {
    LimitEngine::new(f, a, *config)?.limit_mod(m)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TowerTrace {
    pub polynomial: Polynomial,
    pub start: i64,
    #[serde(with = "crate::serde_big::biguint")]
    pub seed: BigUint,
    #[serde(with = "crate::serde_big::biguint")]
    pub modulus: BigUint,
    /// `y_k mod modulus` for `k = 0..=steps`.
    #[serde(with = "crate::serde_big::biguint_vec")]
    pub values: Vec<BigUint>,
    /// First index from which all later entries are equal, when at least
    /// two entries share that value.
    pub stabilization_index: Option<usize>,
}

impl TowerTrace {
    fn new(f: &Polynomial, start: i64, seed: BigUint, modulus: BigUint, values: Vec<BigUint>) -> Self {
        let stabilization_index = stabilization_index(&values);
        Self {
            polynomial: f.clone(),
            start,
            seed,
            modulus,
            values,
            stabilization_index,
        }
    }

    pub fn limit(&self) -> Option<&BigUint> {
        self.stabilization_index.map(|i| &self.values[i])
    }
}

pub fn stabilization_index<T: PartialEq>(values: &[T]) -> Option<usize> {
    let last = values.last()?;
    let i = values.iter().rposition(|v| v != last).map_or(0, |i| i + 1);
    (values.len() - i >= 2).then_some(i)
}

pub fn tower_sequence_mod(
    f: &Polynomial,
    a: i64,
    seed: &BigUint,
    m: &BigUint,
    steps: usize,
    config: &Config,
) -> Result<TowerTrace> {
    if m.is_zero() {
        return Err(Error::ZeroModulus);
    }
    let mf = factorize_big(m)?;
    LimitEngine::new(f, a, *config)?.tower_trace(seed, &mf, steps)
}

/// The tower `y_0 = seed, y_(k+1) = f^(y_k)(a)` as exact integers, by
/// literal iteration and with no stability check. `budget` caps every
/// single `y_k` used as an iteration count.
pub fn literal_tower(f: &Polynomial, a: i64, seed: u64, steps: usize, budget: u64) -> Result<Vec<BigInt>> {
    let mut ys = vec![BigInt::from(seed)];
    let a = BigInt::from(a);
    for k in 0..steps {
        let y = &ys[k];
        if y.is_negative() {
            return Err(Error::NegativeIterationCount(y.to_string()));
        }
        let n = y.to_u64().filter(|&n| n <= budget).ok_or_else(|| Error::LiteralBudgetExceeded {
            required: y.to_string(),
            budget,
        })?;
        let mut x = a.clone();
        for _ in 0..n {
            x = f.eval(&x);
        }
        ys.push(x);
    }
    Ok(ys)
}

pub fn literal_tower_mod(
    f: &Polynomial,
    a: i64,
    seed: u64,
    m: &BigUint,
    steps: usize,
    budget: u64,
) -> Result<Vec<BigUint>> {
    if m.is_zero() {
        return Err(Error::ZeroModulus);
    }
    let mi = BigInt::from(m.clone());
    Ok(literal_tower(f, a, seed, steps, budget)?
        .iter()
        .map(|y| y.mod_floor(&mi).to_biguint().expect("non-negative"))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Through the orbit's tail and cycle, or the closed form for degree one.
    Reduced,
    /// Exactly `x` applications of `f`.
    Literal,
}

/// Whether `f^x(a) ≡ x (mod m)`.
pub fn verify_selfref(f: &Polynomial, a: i64, x: &BigUint, m: &BigUint, mode: Mode, config: &Config) -> Result<bool> {
    if m.is_zero() {
        return Err(Error::ZeroModulus);
    }
    let target = x % m;
    let value = match mode {
        Mode::Reduced => match f.as_linear() {
            Some((b, c)) => closed_form_linear_iterate(&b, &c, &BigInt::from(a), x, m)?,
            None => {
                let mv = m.to_u64().ok_or_else(|| Error::AboveCeiling {
                    what: "modulus",
                    value: m.to_string(),
                    ceiling: u64::MAX.to_string(),
                })?;
                let o = orbit(f, residue(a, mv), mv, config.max_orbit_steps, 0)?;
                BigUint::from(o.value_at_big(x))
            }
        },
        Mode::Literal => {
            let n = x
                .to_u64()
                .filter(|&n| n <= config.literal_budget)
                .ok_or_else(|| Error::LiteralBudgetExceeded {
                    required: x.to_string(),
                    budget: config.literal_budget,
                })?;
            match m.to_u64() {
                Some(mv) => BigUint::from(f.reduce(mv)?.iterate(residue(a, mv), n)),
                None => {
                    let mut cur = BigInt::from(a).mod_floor(&BigInt::from(m.clone()));
                    for _ in 0..n {
                        cur = BigInt::from(f.eval_mod_big(&cur, m)?);
                    }
                    cur.to_biguint().expect("non-negative residue")
                }
            }
        }
    };
    Ok(value == target)
}

/// `f^λ(t) ≡ t (mod p^k)` for the limit `t` and the cycle length `λ` of the
/// orbit of `a` modulo `p`.
pub fn fixed_point_check(f: &Polynomial, a: i64, p: u64, k: u32, config: &Config) -> Result<bool> {
    if !crate::arith::is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if k == 0 {
        return Ok(true);
    }
    let m = Factorization::prime_power(p, k);
    let mut engine = LimitEngine::new(f, a, *config)?;
    let t = engine.limit_mod_factored(&m)?;
    let lambda = orbit(f, residue(a, p), p, config.max_orbit_steps, 0)?.cycle();
    let modulus = m.value();
    let mut x = t.clone();
    for _ in 0..lambda {
        x = f.eval_mod_big(&BigInt::from(x), &modulus)?;
    }
    Ok(x == t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LevelCheck {
    Verified,
    Failed,
    /// The check did not fit the orbit budget.
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DigitLevel {
    pub level: u32,
    /// `x_k`, the limit modulo `b^k` read as an integer in `[0, b^k)`.
    #[serde(with = "crate::serde_big::biguint")]
    pub partial_sum: BigUint,
    /// A positive solution of `f^x(a) ≡ x (mod b^k)`: `x_k`, or `x_k + b^k`
    /// when `x_k` is zero or fails while the shifted value holds.
    #[serde(with = "crate::serde_big::biguint")]
    pub solution: BigUint,
    pub replaced: bool,
    pub check: LevelCheck,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DigitStream {
    pub polynomial: Polynomial,
    pub start: i64,
    pub base: u64,
    /// Least significant first.
    pub digits: Vec<u64>,
    pub levels: Vec<DigitLevel>,
    /// Whether the base is f-valid; `None` when that could not be decided.
    pub f_valid: Option<bool>,
}

impl DigitStream {
    pub fn partial_sum(&self, k: usize) -> Option<&BigUint> {
        k.checked_sub(1).and_then(|i| self.levels.get(i)).map(|l| &l.partial_sum)
    }

    pub fn verified(&self) -> Vec<bool> {
        self.levels.iter().map(|l| l.check == LevelCheck::Verified).collect()
    }

    /// The digits most significant first, as the paper's window shows them.
    pub fn window(&self) -> String {
        let sep = if self.base > 36 { ":" } else { "" };
        self.digits
            .iter()
            .rev()
            .map(|&d| match char::from_digit(d as u32, self.base.min(36) as u32) {
                Some(c) if self.base <= 36 => c.to_string(),
                _ => d.to_string(),
            })
            .collect::<Vec<_>>()
            .join(sep)
    }
}

impl fmt::Display for DigitStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "…{}", self.window())
    }
}

pub fn digit_stream(f: &Polynomial, a: i64, base: u64, n: u32, config: &Config) -> Result<DigitStream> {
    if base < 2 {
        return Err(Error::InvalidArgument("base must be at least 2".into()));
    }
    let mut engine = LimitEngine::new(f, a, *config)?;
    let fb = factorize(base)?;
    let top = engine.limit_mod_factored(&fb.pow(n))?;

    let b = BigUint::from(base);
    let mut digits = Vec::with_capacity(n as usize);
    let mut rest = top.clone();
    for _ in 0..n {
        digits.push((&rest % &b).to_u64().expect("digit below base"));
        rest /= &b;
    }

    let mut levels = Vec::with_capacity(n as usize);
    let mut bk = BigUint::one();
    for k in 1..=n {
        bk *= &b;
        let modulus = fb.pow(k);
        let x = &top % &bk;
        let check = |engine: &mut LimitEngine, v: &BigUint| -> Result<LevelCheck> {
            match engine.satisfies(v, &modulus) {
                Ok(true) => Ok(LevelCheck::Verified),
                Ok(false) => Ok(LevelCheck::Failed),
                Err(Error::BudgetExceeded { .. }) | Err(Error::AboveCeiling { .. }) => Ok(LevelCheck::Skipped),
                Err(e) => Err(e),
            }
        };
        let (solution, replaced, result) = if x.is_zero() {
            let shifted = &x + &bk;
            let c = check(&mut engine, &shifted)?;
            (shifted, true, c)
        } else {
            match check(&mut engine, &x)? {
                LevelCheck::Failed => {
                    let shifted = &x + &bk;
                    match check(&mut engine, &shifted)? {
                        LevelCheck::Verified => (shifted, true, LevelCheck::Verified),
                        _ => (x.clone(), false, LevelCheck::Failed),
                    }
                }
                c => (x.clone(), false, c),
            }
        };
        levels.push(DigitLevel {
            level: k,
            partial_sum: x,
            solution,
            replaced,
            check: result,
        });
    }

    let f_valid = is_f_valid_base(f, base, config).ok();
    Ok(DigitStream {
        polynomial: f.clone(),
        start: a,
        base,
        digits,
        levels,
        f_valid,
    })
}
