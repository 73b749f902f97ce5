//! Finite dynamics of `f` modulo `m`: whole functional graphs for small
//! moduli, single orbits by Brent's cycle finder, and exponent reduction
//! through an orbit's tail and cycle.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::error::{Error, Result};
use crate::polyparse::{ModPoly, Polynomial};

/// Rho shape of the orbit of one residue: `f^tail(a) = f^(tail+cycle)(a)`
/// with both lengths minimal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OrbitShape {
    pub modulus: u64,
    pub start: u64,
    pub tail: u64,
    pub cycle: u64,
    /// `f^tail(start) mod modulus`, the first point on the cycle.
    pub entry: u64,
}

/// An orbit shape together with enough state to read `f^e(a)` for any `e`.
#[derive(Debug, Clone)]
pub struct Orbit {
    shape: OrbitShape,
    map: ModPoly,
    prefix: Option<Vec<u64>>,
}

impl Orbit {
    pub fn shape(&self) -> &OrbitShape {
        &self.shape
    }

    pub fn tail(&self) -> u64 {
        self.shape.tail
    }

    pub fn cycle(&self) -> u64 {
        self.shape.cycle
    }

    pub fn is_cached(&self) -> bool {
        self.prefix.is_some()
    }

    /// Index in `[0, tail + cycle)` holding the same value as index `e`.
    pub fn canonical_index(&self, e: u64) -> u64 {
        let OrbitShape { tail, cycle, .. } = self.shape;
        if e < tail {
            e
        } else {
            tail + (e - tail) % cycle
        }
    }

    pub fn canonical_index_big(&self, e: &BigUint) -> u64 {
        match e.to_u64() {
            Some(e) => self.canonical_index(e),
            None => {
                let OrbitShape { tail, cycle, .. } = self.shape;
                let r = (e - BigUint::from(tail)) % BigUint::from(cycle);
                tail + r.to_u64().expect("remainder below cycle length")
            }
        }
    }

    /// `f^e(start) mod m`.
    pub fn value_at(&self, e: u64) -> u64 {
        let i = self.canonical_index(e);
        match &self.prefix {
            Some(v) => v[i as usize],
            None => self.map.iterate(self.shape.start, i),
        }
    }

    pub fn value_at_big(&self, e: &BigUint) -> u64 {
        let i = self.canonical_index_big(e);
        match &self.prefix {
            Some(v) => v[i as usize],
            None => self.map.iterate(self.shape.start, i),
        }
    }
}

/// Computes the orbit of `a` modulo `m` with Brent's algorithm.
///
/// Fails with [`Error::BudgetExceeded`] exactly when `tail + cycle > max_steps`.
pub fn orbit(f: &Polynomial, a: u64, m: u64, max_steps: u64, cache_bound: u64) -> Result<Orbit> {
    let map = f.reduce(m)?;
    orbit_of_map(map, a, max_steps, cache_bound)
}

pub(crate) fn orbit_of_map(map: ModPoly, a: u64, max_steps: u64, cache_bound: u64) -> Result<Orbit> {
    let m = map.modulus();
    let a = a % m;
    let budget_error = || Error::BudgetExceeded {
        modulus: m.to_string(),
        budget: max_steps,
    };
    let hare_limit = max_steps.saturating_mul(5).saturating_add(5);

    // The hare visits x_0, x_1, ... in order, so its trail is the orbit prefix.
    let keep = cache_bound.saturating_add(1);
    let mut trail: Option<Vec<u64>> = (keep > 1).then(|| vec![a]);
    let mut power = 1u64;
    let mut lam = 1u64;
    let mut tortoise = a;
    let mut hare = map.eval(a);
    let mut steps = 1u64;
    push_trail(&mut trail, hare, keep);
    while tortoise != hare {
        if power == lam {
            tortoise = hare;
            power = power.saturating_mul(2);
            lam = 0;
        }
        hare = map.eval(hare);
        lam += 1;
        steps += 1;
        if steps > hare_limit {
            return Err(budget_error());
        }
        push_trail(&mut trail, hare, keep);
    }
    let cycle = lam;

    let tail = match &trail {
        Some(v) => (0..).find(|&i| v[i] == v[i + cycle as usize]).unwrap() as u64,
        None => {
            let mut t = a;
            let mut h = map.iterate(a, cycle);
            let mut mu = 0u64;
            while t != h {
                t = map.eval(t);
                h = map.eval(h);
                mu += 1;
            }
            mu
        }
    };
    let len = tail + cycle;
    if len > max_steps {
        return Err(budget_error());
    }

    let prefix = if len <= cache_bound {
        match trail {
            Some(mut v) if v.len() as u64 >= len => {
                v.truncate(len as usize);
                Some(v)
            }
            _ => {
                let mut v = Vec::with_capacity(len as usize);
                let mut x = a;
                for _ in 0..len {
                    v.push(x);
                    x = map.eval(x);
                }
                Some(v)
            }
        }
    } else {
        None
    };
    let entry = match &prefix {
        Some(v) => v[tail as usize],
        None => map.iterate(a, tail),
    };
    Ok(Orbit {
        shape: OrbitShape {
            modulus: m,
            start: a,
            tail,
            cycle,
            entry,
        },
        map,
        prefix,
    })
}

fn push_trail(trail: &mut Option<Vec<u64>>, x: u64, keep: u64) {
    if let Some(v) = trail {
        if (v.len() as u64) < keep {
            v.push(x);
        } else {
            *trail = None;
        }
    }
}

/// Tail and cycle length of the orbit of `a` modulo `m`.
pub fn orbit_shape(f: &Polynomial, a: u64, m: u64, max_steps: u64) -> Result<OrbitShape> {
    Ok(*orbit(f, a, m, max_steps, 0)?.shape())
}

/// `f^e(a) mod m` for the least `e >= max(floor, tail)` with `e ≡ r (mod period_multiple)`.
///
/// `period_multiple` must be a multiple of the orbit's cycle length. The
/// answer is read from the orbit, never by `e` literal iterations.
pub fn iterate_reduced(orbit: &Orbit, r: &BigUint, period_multiple: &BigUint, floor: &BigUint) -> Result<u64> {
    let cycle = BigUint::from(orbit.cycle());
    if !period_multiple.is_multiple_of(&cycle) {
        return Err(Error::PeriodMismatch {
            multiple: period_multiple.to_string(),
            cycle: orbit.cycle(),
        });
    }
    let tail = BigUint::from(orbit.tail());
    let lower = if floor > &tail { floor } else { &tail };
    let e = least_exponent(r, period_multiple, lower);
    Ok(orbit.value_at_big(&e))
}

/// The least `e >= floor` with `e ≡ r (mod modulus)`.
pub fn least_exponent(r: &BigUint, modulus: &BigUint, floor: &BigUint) -> BigUint {
    let r = r % modulus;
    if &r >= floor {
        return r;
    }
    let gap = floor - &r;
    r + Integer::div_ceil(&gap, modulus) * modulus
}

/// The functional graph of `f` modulo `m`, fully enumerated.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphSummary {
    pub modulus: u64,
    tails: Vec<u64>,
    cycles: Vec<u64>,
    entries: Vec<u64>,
    /// One representative per cycle, with its length, in discovery order.
    pub cycle_inventory: Vec<(u64, u64)>,
    /// Largest tail length over all residues.
    pub preperiod: u64,
    /// Least common multiple of all cycle lengths.
    #[serde(with = "crate::serde_big::biguint")]
    pub period: BigUint,
}

impl GraphSummary {
    pub fn shape(&self, a: u64) -> OrbitShape {
        let i = (a % self.modulus) as usize;
        OrbitShape {
            modulus: self.modulus,
            start: i as u64,
            tail: self.tails[i],
            cycle: self.cycles[i],
            entry: self.entries[i],
        }
    }

    pub fn shapes(&self) -> impl Iterator<Item = OrbitShape> + '_ {
        (0..self.modulus).map(|a| self.shape(a))
    }

    pub fn tail(&self, a: u64) -> u64 {
        self.tails[(a % self.modulus) as usize]
    }

    pub fn cycle(&self, a: u64) -> u64 {
        self.cycles[(a % self.modulus) as usize]
    }

    pub fn max_cycle(&self) -> u64 {
        self.cycle_inventory.iter().map(|&(_, l)| l).max().unwrap_or(1)
    }
}

/// Enumerates every residue modulo `m` and records its tail and cycle length.
pub fn analyze_map(f: &Polynomial, m: u64, config: &Config) -> Result<GraphSummary> {
    if m == 0 {
        return Err(Error::ZeroModulus);
    }
    if m > config.enumeration_ceiling {
        return Err(Error::AboveCeiling {
            what: "modulus",
            value: m.to_string(),
            ceiling: config.enumeration_ceiling.to_string(),
        });
    }
    let map = f.reduce(m)?;
    let n = m as usize;
    let next: Vec<usize> = (0..m).map(|x| map.eval(x) as usize).collect();

    const UNSET: u64 = u64::MAX;
    let mut tails = vec![UNSET; n];
    let mut cycles = vec![0u64; n];
    let mut entries = vec![0u64; n];
    let mut on_path = vec![usize::MAX; n];
    let mut path: Vec<usize> = Vec::new();
    let mut inventory = Vec::new();

    for s in 0..n {
        if tails[s] != UNSET {
            continue;
        }
        path.clear();
        let mut x = s;
        while tails[x] == UNSET && on_path[x] == usize::MAX {
            on_path[x] = path.len();
            path.push(x);
            x = next[x];
        }
        let mut resolved_from = path.len();
        if tails[x] == UNSET {
            // closed a new cycle on the current path
            let start = on_path[x];
            let len = (path.len() - start) as u64;
            for &y in &path[start..] {
                tails[y] = 0;
                cycles[y] = len;
                entries[y] = y as u64;
            }
            inventory.push((x as u64, len));
            resolved_from = start;
        }
        for &y in path[..resolved_from].iter().rev() {
            let z = next[y];
            tails[y] = tails[z] + 1;
            cycles[y] = cycles[z];
            entries[y] = entries[z];
        }
        for &y in &path {
            on_path[y] = usize::MAX;
        }
    }

    let preperiod = tails.iter().copied().max().unwrap_or(0);
    let period = inventory
        .iter()
        .fold(BigUint::from(1u32), |acc, &(_, l)| acc.lcm(&BigUint::from(l)));
    Ok(GraphSummary {
        modulus: m,
        tails,
        cycles,
        entries,
        cycle_inventory: inventory,
        preperiod,
        period,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyparse::parse_poly;

    fn p(s: &str) -> Polynomial {
        parse_poly(s).unwrap()
    }

    fn brute_shape(f: &Polynomial, a: u64, m: u64) -> (u64, u64) {
        let g = f.reduce(m).unwrap();
        let mut seen = std::collections::HashMap::new();
        let mut x = a % m;
        let mut i = 0;
        while let std::collections::hash_map::Entry::Vacant(e) = seen.entry(x) {
            e.insert(i);
            x = g.eval(x);
            i += 1;
        }
        let k = seen[&x];
        (k, i - k)
    }

    #[test]
    fn graph_mod_7() {
        let g = analyze_map(&p("x^2+x+3"), 7, &Config::default()).unwrap();
        assert_eq!(g.period, BigUint::from(1u32));
        assert_eq!(g.preperiod, 3);
        let mut fixed: Vec<u64> = g.cycle_inventory.iter().map(|&(x, _)| x).collect();
        fixed.sort();
        assert_eq!(fixed, vec![2, 5]);
        assert_eq!(g.tail(0), 3);
        assert_eq!(g.shape(0).entry, 5);
    }

    #[test]
    fn graph_mod_5() {
        let g = analyze_map(&p("x^2+x+3"), 5, &Config::default()).unwrap();
        assert_eq!(g.period, BigUint::from(2u32));
        assert_eq!(g.preperiod, 2);
        assert_eq!(g.cycle_inventory.len(), 1);
        assert_eq!(g.tail(2), 2);
    }

    #[test]
    fn identity_graph() {
        let g = analyze_map(&p("x"), 12, &Config::default()).unwrap();
        assert_eq!(g.preperiod, 0);
        assert_eq!(g.period, BigUint::from(1u32));
        assert!(g.shapes().all(|s| s.tail == 0 && s.cycle == 1));
    }

    #[test]
    fn modulus_one_is_a_single_fixed_point() {
        let g = analyze_map(&p("x^3+5"), 1, &Config::default()).unwrap();
        assert_eq!((g.preperiod, g.period.clone()), (0, BigUint::from(1u32)));
        let o = orbit(&p("x+1"), 9, 1, 10, 10).unwrap();
        assert_eq!((o.tail(), o.cycle(), o.value_at(1000)), (0, 1, 0));
    }

    #[test]
    fn analyze_rejects_large_moduli() {
        let cfg = Config {
            enumeration_ceiling: 100,
            ..Config::default()
        };
        assert!(matches!(
            analyze_map(&p("x"), 101, &cfg),
            Err(Error::AboveCeiling { .. })
        ));
        assert_eq!(analyze_map(&p("x"), 0, &cfg), Err(Error::ZeroModulus));
    }

    #[test]
    fn orbit_shapes() {
        let f = p("x^2+x+3");
        let s = orbit_shape(&f, 0, 10, 1000).unwrap();
        assert_eq!((s.tail, s.cycle, s.entry), (1, 2, 3));
        let o = orbit(&f, 0, 25, 1000, 1000).unwrap();
        assert_eq!((o.tail(), o.cycle()), (0, 8));
        let cyc: Vec<u64> = (0..8).map(|i| o.value_at(i)).collect();
        assert_eq!(cyc, vec![0, 3, 15, 18, 20, 23, 5, 8]);
        let s = orbit_shape(&p("x"), 9, 100, 10).unwrap();
        assert_eq!((s.tail, s.cycle), (0, 1));
    }

    #[test]
    fn orbit_budget_is_exact() {
        // x+1 mod 100 from 0: tail 0, cycle 100
        let f = p("x+1");
        assert!(orbit_shape(&f, 0, 100, 100).is_ok());
        assert!(matches!(
            orbit_shape(&f, 0, 100, 99),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn uncached_orbit_matches_cached() {
        let f = p("x^2+x+3");
        let cached = orbit(&f, 0, 10_007 * 13, 1 << 20, 1 << 20).unwrap();
        let walked = orbit(&f, 0, 10_007 * 13, 1 << 20, 0).unwrap();
        assert!(cached.is_cached() && !walked.is_cached());
        assert_eq!(cached.shape(), walked.shape());
        for e in [0u64, 1, 7, 500, 123_456, 9_999_999] {
            assert_eq!(cached.value_at(e), walked.value_at(e));
        }
    }

    #[test]
    fn brent_agrees_with_hash_walk() {
        let polys = ["x^2+1", "3x^3+x+7", "x^2", "5x+2", "x^4-x+11", "2"];
        for s in polys {
            let f = p(s);
            for m in [2u64, 9, 64, 97, 360, 1001] {
                for a in [0u64, 1, 5, 42] {
                    let shape = orbit_shape(&f, a, m, 10_000).unwrap();
                    assert_eq!((shape.tail, shape.cycle), brute_shape(&f, a, m), "{s} a={a} m={m}");
                }
            }
        }
    }

    #[test]
    fn reduced_iteration_examples() {
        let one = BigUint::from(1u32);
        let zero = BigUint::from(0u32);
        let f = p("x^2+x+3");
        let o = orbit(&f, 0, 10, 100, 100).unwrap();
        let l = BigUint::from(o.cycle());
        assert_eq!(iterate_reduced(&o, &BigUint::from(3u32), &l, &zero).unwrap(), 3);

        let g = p("7x");
        let o = orbit(&g, 1, 10, 100, 100).unwrap();
        let l = BigUint::from(o.cycle());
        assert_eq!(iterate_reduced(&o, &BigUint::from(3u32), &l, &zero).unwrap(), 3);

        let o = orbit(&f, 2, 5, 100, 100).unwrap();
        assert_eq!(o.tail(), 2);
        assert_eq!(iterate_reduced(&o, &zero, &BigUint::from(2u32), &zero).unwrap(), o.shape().entry);
        assert!(iterate_reduced(&o, &zero, &one, &zero).is_err());
    }

    #[test]
    fn reduced_iteration_rejects_bad_multiple() {
        let o = orbit(&p("x^2+x+3"), 0, 25, 100, 100).unwrap();
        let r = iterate_reduced(&o, &BigUint::from(1u32), &BigUint::from(12u32), &BigUint::from(0u32));
        assert!(matches!(r, Err(Error::PeriodMismatch { cycle: 8, .. })));
    }

    #[test]
    fn least_exponent_cases() {
        let b = |x: u64| BigUint::from(x);
        assert_eq!(least_exponent(&b(3), &b(10), &b(0)), b(3));
        assert_eq!(least_exponent(&b(3), &b(10), &b(4)), b(13));
        assert_eq!(least_exponent(&b(23), &b(10), &b(13)), b(13));
        assert_eq!(least_exponent(&b(0), &b(1), &b(7)), b(7));
    }
}
