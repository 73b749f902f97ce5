//! Report building behind the `tower-limits` binary.
//!
//! Every command yields a [`Report`] (the JSON form) and a human rendering.
//! The `result` field holds the serialized domain value, so JSON output
//! parses back into the library types.

use std::fmt::Write as _;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::Config;
use crate::dynamics::{analyze_map, orbit};
use crate::error::Error;
use crate::limits::{digit_stream, tower_sequence_mod, verify_selfref, LevelCheck, Mode};
use crate::periods::{chain_moduli, lambda_chain, lambda_multiple, residue, PeriodCertificate};
use crate::polyparse::Polynomial;
use crate::stability::{ctow_partial, is_f_valid_base, is_valid_base, tower_stability_report};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub inputs: Value,
    pub result: Value,
    pub certificates: Vec<PeriodCertificate>,
    pub warnings: Vec<String>,
}

/// A finished command: its report, the human text, and the boolean answer
/// for commands that have one.
#[derive(Debug, Clone)]
pub struct Output {
    pub report: Report,
    pub human: String,
    pub answer: Option<bool>,
}

impl Output {
    pub fn exit_code(&self) -> i32 {
        match self.answer {
            Some(false) => 1,
            _ => 0,
        }
    }
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Parse(_)
        | Error::ZeroModulus
        | Error::NotPrime(_)
        | Error::NotLinear(_)
        | Error::InvalidArgument(_)
        | Error::PeriodMismatch { .. }
        | Error::Overflow(_) => 2,
        Error::AboveCeiling { .. }
        | Error::BudgetExceeded { .. }
        | Error::LiteralBudgetExceeded { .. }
        | Error::Inconclusive { .. }
        | Error::DepthExceeded(_) => 3,
        Error::Unstable { .. } | Error::Preperiodic(_) | Error::NotDivergent(_) | Error::NegativeIterationCount(_) => 4,
    }
}

/// Stable machine name of an error.
pub fn error_kind(err: &Error) -> &'static str {
    match err {
        Error::Parse(_) => "parse",
        Error::ZeroModulus => "zero-modulus",
        Error::NotPrime(_) => "not-prime",
        Error::AboveCeiling { .. } => "above-ceiling",
        Error::BudgetExceeded { .. } => "budget-exceeded",
        Error::LiteralBudgetExceeded { .. } => "literal-budget-exceeded",
        Error::Unstable { .. } => "unstable",
        Error::Preperiodic(_) => "preperiodic",
        Error::NotDivergent(_) => "not-divergent",
        Error::Inconclusive { .. } => "inconclusive",
        Error::NegativeIterationCount(_) => "negative-iteration-count",
        Error::NotLinear(_) => "not-linear",
        Error::PeriodMismatch { .. } => "period-mismatch",
        Error::DepthExceeded(_) => "depth-exceeded",
        Error::Overflow(_) => "overflow",
        Error::InvalidArgument(_) => "invalid-argument",
    }
}

pub fn error_json(command: &str, inputs: Value, err: &Error) -> Value {
    let mut detail = json!({ "kind": error_kind(err), "message": err.to_string() });
    match err {
        Error::Unstable { prime } => detail["prime"] = json!(prime),
        Error::Preperiodic(w) => detail["witness"] = json!(w),
        Error::BudgetExceeded { budget, .. } => detail["budget"] = json!(budget),
        _ => {}
    }
    json!({ "command": command, "inputs": inputs, "error": detail })
}

fn report(command: &str, inputs: Value, result: Value) -> Report {
    Report {
        command: command.into(),
        inputs,
        result,
        certificates: Vec::new(),
        warnings: Vec::new(),
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("domain types serialize")
}

pub fn analyze(f: &Polynomial, m: u64, a: Option<i64>, config: &Config) -> Result<Output, Error> {
    let inputs = json!({ "polynomial": f, "modulus": m, "start": a });
    let g = analyze_map(f, m, config)?;
    let mut lengths: Vec<u64> = g.cycle_inventory.iter().map(|&(_, l)| l).collect();
    lengths.sort_unstable();

    let mut human = String::new();
    writeln!(human, "f = {f}, m = {m}").unwrap();
    writeln!(human, "preperiod K = {}", g.preperiod).unwrap();
    writeln!(human, "period L = {}", g.period).unwrap();
    writeln!(human, "cycles: {} (lengths {:?})", lengths.len(), lengths).unwrap();
    if let Some(a) = a {
        let s = g.shape(residue(a, m));
        writeln!(human, "orbit of {a}: tail {}, cycle {}", s.tail, s.cycle).unwrap();
    }
    if m <= 100 {
        let map = f.reduce(m)?;
        writeln!(human, "{:>5} {:>5} {:>5} {:>6}", "x", "f(x)", "tail", "cycle").unwrap();
        for s in g.shapes() {
            writeln!(human, "{:>5} {:>5} {:>5} {:>6}", s.start, map.eval(s.start), s.tail, s.cycle).unwrap();
        }
    }
    let mut r = report("analyze", inputs, to_value(&g));
    if let Some(a) = a {
        r.result["orbit"] = to_value(&g.shape(residue(a, m)));
    }
    Ok(Output {
        report: r,
        human,
        answer: None,
    })
}

pub fn period(f: &Polynomial, m: u64, a: Option<i64>, config: &Config) -> Result<Output, Error> {
    let inputs = json!({ "polynomial": f, "modulus": m, "start": a });
    let cert = lambda_multiple(f, m, a, config)?;
    let mut human = String::new();
    let what = if a.is_some() { "orbit period" } else { "λ" };
    let rel = if cert.exact { "=" } else { "divides" };
    writeln!(human, "{what}({m}) {rel} {} = {}", cert.period_multiple, cert.period_factors).unwrap();
    writeln!(human, "tail bound {}", cert.tail_bound).unwrap();
    writeln!(human, "provenance {:?}", cert.provenance).unwrap();
    let mut r = report("period", inputs, to_value(&cert));
    if !cert.exact {
        r.warnings.push("period is a certified multiple, not the exact value".into());
    }
    r.certificates.push(cert);
    Ok(Output {
        report: r,
        human,
        answer: None,
    })
}

pub fn chain(f: &Polynomial, m: u64, config: &Config) -> Result<Output, Error> {
    let inputs = json!({ "polynomial": f, "modulus": m });
    let links = lambda_chain(f, m, config.max_depth, config)?;
    let moduli = chain_moduli(&links);
    let shown: Vec<String> = moduli.iter().map(BigUint::to_string).collect();
    let human = format!("{}\n", shown.join(" -> "));
    let mut r = report("chain", inputs, json!(shown));
    r.certificates = links;
    Ok(Output {
        report: r,
        human,
        answer: None,
    })
}

pub fn stable(f: &Polynomial, prime_bound: u64, search_bound: i64) -> Result<Output, Error> {
    let inputs = json!({ "polynomial": f, "prime_bound": prime_bound, "search_bound": search_bound });
    let rep = tower_stability_report(f, prime_bound, search_bound)?;
    let mut human = format!("{}: {}\n", f, rep.verdict);
    if let Some(c) = rep.fixed_point {
        writeln!(human, "fixed point f({c}) = {c}").unwrap();
    } else if let Some((c, c2)) = rep.collision {
        writeln!(human, "collision f({c}) = f({c2})").unwrap();
    }
    for v in rep.per_prime.iter().filter(|v| v.is_p_cycle) {
        writeln!(human, "p = {} is a single cycle", v.prime).unwrap();
    }
    let answer = Some(rep.is_stable());
    let mut r = report("stable", inputs, to_value(&rep));
    if matches!(rep.verdict, crate::stability::Verdict::StableUpToBound { .. }) {
        r.warnings.push(format!("no certificate found; only primes up to {prime_bound} were checked"));
    }
    Ok(Output {
        report: r,
        human,
        answer,
    })
}

pub fn check_base(f: &Polynomial, b: u64, config: &Config) -> Result<Output, Error> {
    let inputs = json!({ "polynomial": f, "base": b });
    let valid = is_valid_base(b)?;
    let f_valid = is_f_valid_base(f, b, config)?;
    let human = format!("valid: {valid}\nf-valid: {f_valid}\n");
    Ok(Output {
        report: report("check-base", inputs, json!({ "valid": valid, "f_valid": f_valid })),
        human,
        answer: Some(f_valid),
    })
}

pub fn limit(f: &Polynomial, a: i64, b: u64, n: u32, config: &Config) -> Result<Output, Error> {
    let inputs = json!({ "polynomial": f, "start": a, "base": b, "levels": n });
    let s = digit_stream(f, a, b, n, config)?;
    let mut human = format!("{s}\n");
    let marks: String = s
        .levels
        .iter()
        .map(|l| match l.check {
            LevelCheck::Verified => '✓',
            LevelCheck::Failed => '✗',
            LevelCheck::Skipped => '?',
        })
        .collect();
    writeln!(human, "levels 1..{n}: {marks}").unwrap();
    for l in s.levels.iter().filter(|l| l.replaced) {
        writeln!(human, "level {}: x = {} replaced by {}", l.level, l.partial_sum, l.solution).unwrap();
    }
    let mut r = report("limit", inputs, to_value(&s));
    match s.f_valid {
        Some(false) => r.warnings.push(format!("base {b} is not f-valid")),
        None => r.warnings.push(format!("could not decide whether base {b} is f-valid")),
        Some(true) => {}
    }
    if s.levels.iter().any(|l| l.check == LevelCheck::Skipped) {
        r.warnings.push("some levels were not verified within the orbit budget".into());
    }
    let answer = Some(s.levels.iter().all(|l| l.check != LevelCheck::Failed));
    Ok(Output {
        report: r,
        human,
        answer,
    })
}

pub fn tower(f: &Polynomial, a: i64, seed: &BigUint, m: &BigUint, steps: usize, config: &Config) -> Result<Output, Error> {
    let inputs = json!({ "polynomial": f, "start": a, "seed": seed.to_string(), "modulus": m.to_string(), "steps": steps });
    let t = tower_sequence_mod(f, a, seed, m, steps, config)?;
    let vals: Vec<String> = t.values.iter().map(BigUint::to_string).collect();
    let mut human = format!("{}\n", vals.join(", "));
    match t.stabilization_index {
        Some(i) => writeln!(human, "stable from index {i} at {}", t.values[i]).unwrap(),
        None => writeln!(human, "not yet stable").unwrap(),
    }
    Ok(Output {
        report: report("tower", inputs, to_value(&t)),
        human,
        answer: None,
    })
}

pub fn verify(f: &Polynomial, a: i64, x: &BigUint, m: &BigUint, mode: Mode, config: &Config) -> Result<Output, Error> {
    let inputs = json!({ "polynomial": f, "start": a, "x": x.to_string(), "modulus": m.to_string(), "mode": mode });
    let holds = verify_selfref(f, a, x, m, mode, config)?;
    let rel = if holds { "≡" } else { "≢" };
    let human = format!("f^{x}({a}) {rel} {x} (mod {m})\n");
    Ok(Output {
        report: report("verify", inputs, json!(holds)),
        human,
        answer: Some(holds),
    })
}

pub fn ctow(prime_bound: u64) -> Output {
    let v = ctow_partial(prime_bound);
    Output {
        report: report("ctow", json!({ "prime_bound": prime_bound }), json!(v)),
        human: format!("{v:.6}\n"),
        answer: None,
    }
}

/// Orbit shape of one start point, for `analyze` above the enumeration ceiling.
pub fn orbit_only(f: &Polynomial, m: u64, a: i64, config: &Config) -> Result<Output, Error> {
    let inputs = json!({ "polynomial": f, "modulus": m, "start": a });
    let o = orbit(f, residue(a, m), m, config.max_orbit_steps, 0)?;
    let s = *o.shape();
    let human = format!("f = {f}, m = {m}\norbit of {a}: tail {}, cycle {}\n", s.tail, s.cycle);
    let mut r = report("analyze", inputs, json!({ "orbit": s }));
    r.warnings.push("modulus above the enumeration ceiling; only the orbit was computed".into());
    Ok(Output {
        report: r,
        human,
        answer: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::GraphSummary;
    use crate::limits::DigitStream;
    use crate::polyparse::parse_poly;
    use crate::stability::StabilityReport;

    fn p(s: &str) -> Polynomial {
        parse_poly(s).unwrap()
    }

    #[test]
    fn analyze_reports_round_trip() {
        let out = analyze(&p("x^2+x+3"), 5, None, &Config::default()).unwrap();
        assert!(out.human.contains("period L = 2"));
        let text = serde_json::to_string(&out.report).unwrap();
        let back: Report = serde_json::from_str(&text).unwrap();
        let g: GraphSummary = serde_json::from_value(back.result).unwrap();
        assert_eq!(g, analyze_map(&p("x^2+x+3"), 5, &Config::default()).unwrap());
    }

    #[test]
    fn limit_and_stable_round_trip() {
        let out = limit(&p("x^2+x+3"), 0, 10, 3, &Config::default()).unwrap();
        assert!(out.human.starts_with("…243"));
        let s: DigitStream = serde_json::from_value(out.report.result).unwrap();
        assert_eq!(s.digits, vec![3, 4, 2]);

        let out = stable(&p("x^2+x+3"), 100, 1000).unwrap();
        let r: StabilityReport = serde_json::from_value(out.report.result).unwrap();
        assert_eq!(r.collision, Some((-1, 0)));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Unstable { prime: 2 }), 4);
        assert_eq!(exit_code(&Error::ZeroModulus), 2);
        assert_eq!(exit_code(&Error::Inconclusive { steps: 1 }), 3);
        let v = verify(&p("x^2+x+3"), 0, &BigUint::from(44u32), &BigUint::from(100u32), Mode::Literal, &Config::default()).unwrap();
        assert_eq!(v.exit_code(), 1);
    }
}
