//! Dense integer polynomials: parsing, rendering, exact and modular evaluation.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, ParseError, ParseErrorKind, Result};

const MAX_EXPONENT: usize = 4096;

/// A univariate polynomial with integer coefficients, lowest degree first.
///
/// The coefficient list is never empty and its last entry is nonzero unless
/// the polynomial is the constant zero, which is stored as `[0]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct Polynomial {
    coeffs: Vec<BigInt>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.len() > 1 && coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(BigInt::zero());
        }
        Self { coeffs }
    }

    pub fn from_i64s(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero() -> Self {
        Self::new(vec![])
    }

    pub fn constant(c: impl Into<BigInt>) -> Self {
        Self::new(vec![c.into()])
    }

    /// The map `x -> b*x + c`.
    pub fn linear(b: impl Into<BigInt>, c: impl Into<BigInt>) -> Self {
        Self::new(vec![c.into(), b.into()])
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    /// Coefficient of `x^i`, zero past the degree.
    pub fn coeff(&self, i: usize) -> BigInt {
        self.coeffs.get(i).cloned().unwrap_or_default()
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> &BigInt {
        self.coeffs.last().expect("coefficient list is never empty")
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_zero()
    }

    /// `(b, c)` with `f(x) = b*x + c` when the degree is at most one.
    pub fn as_linear(&self) -> Option<(BigInt, BigInt)> {
        (self.degree() <= 1).then(|| (self.coeff(1), self.coeff(0)))
    }

    /// Exact value at an integer point.
    pub fn eval(&self, x: &BigInt) -> BigInt {
        let mut acc = BigInt::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// `f(x) mod m` for a residue `x`, by Horner with every step reduced.
    pub fn eval_mod(&self, x: u64, m: u64) -> Result<u64> {
        Ok(self.reduce(m)?.eval(x))
    }

    /// `f(x) mod m` for arbitrary-size arguments.
    pub fn eval_mod_big(&self, x: &BigInt, m: &BigUint) -> Result<BigUint> {
        if m.is_zero() {
            return Err(Error::ZeroModulus);
        }
        let m = BigInt::from(m.clone());
        let x = x.mod_floor(&m);
        let mut acc = BigInt::zero();
        for c in self.coeffs.iter().rev() {
            acc = (acc * &x + c).mod_floor(&m);
        }
        Ok(acc.to_biguint().expect("reduced value is non-negative"))
    }

    /// The reduction of `f` modulo `m`, ready for fast repeated evaluation.
    pub fn reduce(&self, m: u64) -> Result<ModPoly> {
        ModPoly::new(self, m)
    }

    pub fn derivative(&self) -> Self {
        if self.degree() == 0 {
            return Self::zero();
        }
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigInt::from(i))
                .collect(),
        )
    }

    /// `f(g(x))`.
    pub fn compose(&self, inner: &Polynomial) -> Polynomial {
        let mut acc = Polynomial::zero();
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * inner) + &Polynomial::constant(c.clone());
        }
        acc
    }

    /// Whether `f(n) >= 1` for every integer `n >= 1`.
    ///
    /// Past the Cauchy root bound of `f - 1` a polynomial with positive
    /// leading coefficient stays at least one, so only `1..=B` is checked.
    pub fn maps_naturals_into_naturals(&self) -> bool {
        let lead = self.leading();
        if lead.is_negative() || self.is_zero() {
            return false;
        }
        if self.degree() == 0 {
            return lead >= &BigInt::one();
        }
        let shifted = &self.coeffs[0] - BigInt::one();
        let mut ratio_ceil = BigInt::zero();
        for (i, c) in self.coeffs[..self.degree()].iter().enumerate() {
            let c = if i == 0 { &shifted } else { c };
            let r = Integer::div_ceil(&c.abs(), lead);
            if r > ratio_ceil {
                ratio_ceil = r;
            }
        }
        let bound = ratio_ceil + 1u32;
        let one = BigInt::one();
        let mut n = BigInt::one();
        while n <= bound {
            if self.eval(&n) < one {
                return false;
            }
            n += 1u32;
        }
        true
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if c.sign() == Sign::Minus {
                f.write_str("-")?;
            } else if !first {
                f.write_str("+")?;
            }
            first = false;
            let mag = c.magnitude();
            match i {
                0 => write!(f, "{mag}")?,
                _ => {
                    if !mag.is_one() {
                        write!(f, "{mag}*")?;
                    }
                    f.write_str("x")?;
                    if i > 1 {
                        write!(f, "^{i}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

impl From<Polynomial> for String {
    fn from(p: Polynomial) -> Self {
        p.to_string()
    }
}

impl TryFrom<String> for Polynomial {
    type Error = ParseError;

    fn try_from(s: String) -> std::result::Result<Self, Self::Error> {
        parse_poly(&s)
    }
}

impl FromStr for Polynomial {
    type Err = ParseError;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        parse_poly(s)
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;

    fn add(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;

    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self + &(-rhs)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;

    fn neg(self) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;

    fn mul(self, rhs: &Polynomial) -> Polynomial {
        let mut out = vec![BigInt::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }
}

/// A polynomial reduced modulo a machine-word modulus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModPoly {
    modulus: u64,
    coeffs: Vec<u64>,
}

impl ModPoly {
    fn new(f: &Polynomial, m: u64) -> Result<Self> {
        if m == 0 {
            return Err(Error::ZeroModulus);
        }
        let big_m = BigInt::from(m);
        let coeffs = f
            .coeffs
            .iter()
            .map(|c| c.mod_floor(&big_m).to_u64().expect("residue fits in u64"))
            .collect();
        Ok(Self { modulus: m, coeffs })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    #[inline]
    pub fn eval(&self, x: u64) -> u64 {
        let m = self.modulus as u128;
        let x = x as u128 % m;
        let mut acc: u128 = 0;
        for &c in self.coeffs.iter().rev() {
            acc = (acc * x + c as u128) % m;
        }
        acc as u64
    }

    /// `f^n(x)` by `n` literal applications.
    pub fn iterate(&self, x: u64, n: u64) -> u64 {
        let mut x = x % self.modulus;
        for _ in 0..n {
            x = self.eval(x);
        }
        x
    }
}

/// Parses the textual form of a polynomial in `x`.
///
/// Terms are an optional natural coefficient, an optional `*`, and an
/// optional `x` with an optional `^exponent`. `7x` and `7*x` are the same.
pub fn parse_poly(text: &str) -> std::result::Result<Polynomial, ParseError> {
    Parser::new(text).parse()
}

struct Parser {
    chars: Vec<(usize, char)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn new(text: &str) -> Self {
        let chars: Vec<(usize, char)> = text
            .char_indices()
            .filter(|(_, c)| !c.is_whitespace())
            .collect();
        Self {
            chars,
            pos: 0,
            end: text.len(),
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|&(_, c)| c)
    }

    fn offset(&self) -> usize {
        self.chars.get(self.pos).map_or(self.end, |&(i, _)| i)
    }

    fn error(&self, kind: ParseErrorKind) -> ParseError {
        ParseError {
            position: self.offset(),
            kind,
        }
    }

    fn unexpected(&self) -> ParseError {
        match self.peek() {
            None => self.error(ParseErrorKind::UnexpectedEnd),
            Some(c) if c.is_alphabetic() => self.error(ParseErrorKind::UnknownVariable(c)),
            Some('.') | Some('/') => self.error(ParseErrorKind::NonIntegerLiteral),
            Some(c) => self.error(ParseErrorKind::UnexpectedChar(c)),
        }
    }

    fn parse(mut self) -> std::result::Result<Polynomial, ParseError> {
        let mut coeffs: Vec<BigInt> = Vec::new();
        let mut negate = false;
        if self.peek() == Some('-') {
            negate = true;
            self.pos += 1;
        }
        loop {
            let (c, e) = self.term()?;
            if coeffs.len() <= e {
                coeffs.resize(e + 1, BigInt::zero());
            }
            if negate {
                coeffs[e] -= c;
            } else {
                coeffs[e] += c;
            }
            match self.peek() {
                None => break,
                Some('+') => negate = false,
                Some('-') => negate = true,
                Some(_) => return Err(self.unexpected()),
            }
            self.pos += 1;
        }
        Ok(Polynomial::new(coeffs))
    }

    fn term(&mut self) -> std::result::Result<(BigInt, usize), ParseError> {
        let start = self.pos;
        let coef = self.nat()?;
        let star = self.peek() == Some('*');
        if star {
            self.pos += 1;
        }
        let mut exponent = 0;
        if self.peek() == Some('x') {
            self.pos += 1;
            exponent = 1;
            if self.peek() == Some('^') {
                self.pos += 1;
                let e = self.nat()?.ok_or_else(|| self.unexpected())?;
                exponent = e
                    .to_usize()
                    .filter(|&e| e <= MAX_EXPONENT)
                    .ok_or_else(|| ParseError {
                        position: self.chars[start].0,
                        kind: ParseErrorKind::ExponentTooLarge,
                    })?;
            }
        } else if star || coef.is_none() {
            return Err(match self.peek() {
                Some('+') | Some('-') | None if self.pos == start => {
                    self.error(ParseErrorKind::EmptyTerm)
                }
                _ => self.unexpected(),
            });
        }
        Ok((BigInt::from(coef.unwrap_or_else(BigUint::one)), exponent))
    }

    fn nat(&mut self) -> std::result::Result<Option<BigUint>, ParseError> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == start {
            return Ok(None);
        }
        if self.peek() == Some('.') {
            return Err(self.error(ParseErrorKind::NonIntegerLiteral));
        }
        let digits: String = self.chars[start..self.pos].iter().map(|&(_, c)| c).collect();
        Ok(Some(digits.parse().expect("ascii digits")))
    }
}
