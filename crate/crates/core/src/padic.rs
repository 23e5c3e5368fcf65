//! Finite-precision p-adic numbers over `Q_p`.
//!
//! A [`PAdic`] stores the base-p digits of a number from its valuation
//! upward, together with the exponent of the first digit that is *not*
//! known (the absolute precision, or "cap"). Arithmetic never invents
//! digits: the cap of a result is the smallest cap the operands allow.
//! Values with finitely many nonzero digits (ball centers, coset
//! representatives) are simply numbers whose known high digits are zero.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, Sign};
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Exact rational numbers used for every measure-theoretic quantity.
pub type Rational = num_rational::BigRational;

pub const DEFAULT_PRECISION: usize = 32;

/// Largest prime accepted; literals use the digit alphabet `0-9a-z`.
pub const MAX_PRIME: u32 = 36;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PadicError {
    #[error("malformed p-adic literal {literal:?}: {reason}")]
    MalformedLiteral { literal: String, reason: String },
    #[error("incompatible fields: Q_{left} and Q_{right}")]
    IncompatibleField { left: u32, right: u32 },
    #[error("insufficient precision: digits known below p^{known}, p^{needed} required")]
    InsufficientPrecision { known: i64, needed: i64 },
    #[error("{0} is not a supported prime (must be prime and at most {MAX_PRIME})")]
    UnsupportedPrime(u32),
    #[error("precision must be positive")]
    ZeroPrecision,
}

pub fn is_prime(p: u32) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d))
}

pub fn check_prime(p: u32) -> Result<(), PadicError> {
    if is_prime(p) && p <= MAX_PRIME {
        Ok(())
    } else {
        Err(PadicError::UnsupportedPrime(p))
    }
}

/// `p^e` as an exact rational, for any integer `e`.
pub fn rational_pow(p: u32, e: i64) -> Rational {
    let base = BigInt::from(p);
    let mag = num_traits::pow(base, e.unsigned_abs() as usize);
    if e >= 0 {
        Rational::from_integer(mag)
    } else {
        Rational::new(BigInt::one(), mag)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Repr {
    /// Zero modulo `p^cap`; `None` is the exact zero.
    Zero { cap: Option<i64> },
    /// `digits[i]` is the coefficient of `p^(valuation + i)`; `digits[0] != 0`.
    Nonzero { valuation: i64, digits: Vec<u32> },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PAdic {
    prime: u32,
    repr: Repr,
}

/// A complex number of modulus one, the value of an additive character.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnitComplex {
    pub re: f64,
    pub im: f64,
}

impl UnitComplex {
    /// `exp(2πi t)`.
    pub fn from_turns(t: f64) -> Self {
        let (im, re) = (2.0 * std::f64::consts::PI * t).sin_cos();
        Self { re, im }
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

impl PAdic {
    pub fn zero(prime: u32) -> Self {
        Self { prime, repr: Repr::Zero { cap: None } }
    }

    /// The number `sum digits[i] p^(start + i)`, known modulo `p^cap`.
    ///
    /// Digits at exponents `>= cap` are discarded; exponents between the
    /// last supplied digit and `cap` are known zeros.
    pub fn finite(prime: u32, start: i64, digits: &[u32], cap: i64) -> Result<Self, PadicError> {
        check_prime(prime)?;
        let mut kept = Vec::new();
        let mut first = None;
        for (i, &d) in digits.iter().enumerate() {
            let e = start + i as i64;
            if e >= cap {
                break;
            }
            if d >= prime {
                return Err(PadicError::MalformedLiteral {
                    literal: format!("{digits:?}"),
                    reason: format!("digit {d} out of range for p = {prime}"),
                });
            }
            if first.is_none() {
                if d == 0 {
                    continue;
                }
                first = Some(e);
            }
            kept.push(d);
        }
        Ok(match first {
            None => Self { prime, repr: Repr::Zero { cap: Some(cap) } },
            Some(v) => {
                kept.resize((cap - v) as usize, 0);
                Self { prime, repr: Repr::Nonzero { valuation: v, digits: kept } }
            }
        })
    }

    /// Digits from `start` upward with relative precision `digits.len()`.
    pub fn from_digits(prime: u32, start: i64, digits: &[u32]) -> Result<Self, PadicError> {
        Self::finite(prime, start, digits, start + digits.len() as i64)
    }

    /// `p`, the uniformizer of `Q_p`.
    pub fn uniformizer(prime: u32, precision: usize) -> Result<Self, PadicError> {
        if precision == 0 {
            return Err(PadicError::ZeroPrecision);
        }
        Self::finite(prime, 1, &[1], 1 + precision as i64)
    }

    pub fn from_integer(n: i64, prime: u32, precision: usize) -> Result<Self, PadicError> {
        Self::from_rational(&Rational::from_integer(BigInt::from(n)), prime, precision)
    }

    /// Expansion of an arbitrary rational with `precision` significant digits.
    pub fn from_rational(r: &Rational, prime: u32, precision: usize) -> Result<Self, PadicError> {
        check_prime(prime)?;
        if precision == 0 {
            return Err(PadicError::ZeroPrecision);
        }
        if r.is_zero() {
            return Ok(Self::zero(prime));
        }
        let pb = BigInt::from(prime);
        let (mut num, mut den) = (r.numer().clone(), r.denom().clone());
        let mut v = 0i64;
        while num.is_multiple_of(&pb) {
            num /= &pb;
            v += 1;
        }
        while den.is_multiple_of(&pb) {
            den /= &pb;
            v -= 1;
        }
        let modulus = num_traits::pow(pb.clone(), precision);
        let inv = mod_inverse(&den.mod_floor(&modulus), &modulus)
            .expect("denominator coprime to p is invertible");
        let mut unit = (num * inv).mod_floor(&modulus);
        let mut digits = Vec::with_capacity(precision);
        for _ in 0..precision {
            let (q, rem) = unit.div_mod_floor(&pb);
            digits.push(rem.to_u32().unwrap());
            unit = q;
        }
        Self::from_digits(prime, v, &digits)
    }

    /// Parses the positional grammar `[-]digits[.digits]` in base `p`,
    /// most significant digit first; the last integer digit has exponent 0.
    pub fn parse(literal: &str, prime: u32, precision: usize) -> Result<Self, PadicError> {
        check_prime(prime)?;
        if precision == 0 {
            return Err(PadicError::ZeroPrecision);
        }
        let malformed = |reason: &str| PadicError::MalformedLiteral {
            literal: literal.to_string(),
            reason: reason.to_string(),
        };
        let trimmed = literal.trim();
        let (negative, body) = match trimmed.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, trimmed),
        };
        if body.is_empty() {
            return Err(malformed("empty literal"));
        }
        let (int_part, frac_part) = match body.split_once('.') {
            Some((i, f)) => {
                if f.is_empty() {
                    return Err(malformed("missing digits after '.'"));
                }
                (i, f)
            }
            None => (body, ""),
        };
        if int_part.is_empty() {
            return Err(malformed("missing integer digits"));
        }
        let decode = |c: char| -> Result<u32, PadicError> {
            c.to_digit(36)
                .filter(|&d| d < prime)
                .ok_or_else(|| malformed(&format!("digit {c:?} is not valid in base {prime}")))
        };
        // lowest exponent first
        let mut digits: Vec<u32> = Vec::with_capacity(int_part.len() + frac_part.len());
        for c in frac_part.chars().rev() {
            digits.push(decode(c)?);
        }
        for c in int_part.chars().rev() {
            digits.push(decode(c)?);
        }
        let start = -(frac_part.chars().count() as i64);
        let valuation = match digits.iter().position(|&d| d != 0) {
            None => return Ok(Self::zero(prime)),
            Some(i) => start + i as i64,
        };
        let value = Self::finite(prime, start, &digits, valuation + precision as i64)?;
        if negative {
            Self::zero(prime).sub(&value)
        } else {
            Ok(value)
        }
    }

    pub fn prime(&self) -> u32 {
        self.prime
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.repr, Repr::Zero { .. })
    }

    pub fn is_exact_zero(&self) -> bool {
        matches!(self.repr, Repr::Zero { cap: None })
    }

    /// `None` stands for `+∞` (a zero).
    pub fn valuation(&self) -> Option<i64> {
        match self.repr {
            Repr::Zero { .. } => None,
            Repr::Nonzero { valuation, .. } => Some(valuation),
        }
    }

    /// Number of stored significant digits.
    pub fn precision(&self) -> usize {
        match &self.repr {
            Repr::Zero { .. } => 0,
            Repr::Nonzero { digits, .. } => digits.len(),
        }
    }

    /// Exponent of the first unknown digit; `None` for the exact zero.
    pub fn abs_cap(&self) -> Option<i64> {
        match &self.repr {
            Repr::Zero { cap } => *cap,
            Repr::Nonzero { valuation, digits } => Some(valuation + digits.len() as i64),
        }
    }

    /// Digit at exponent `e`, or `None` if it lies beyond the precision cap.
    pub fn digit(&self, e: i64) -> Option<u32> {
        if self.abs_cap().is_some_and(|cap| e >= cap) {
            return None;
        }
        Some(match &self.repr {
            Repr::Zero { .. } => 0,
            Repr::Nonzero { valuation, digits } => {
                if e < *valuation {
                    0
                } else {
                    digits[(e - valuation) as usize]
                }
            }
        })
    }

    /// `(exponent, digit)` for every nonzero stored digit, lowest first.
    pub fn nonzero_digits(&self) -> impl Iterator<Item = (i64, u32)> + '_ {
        let (v, ds): (i64, &[u32]) = match &self.repr {
            Repr::Zero { .. } => (0, &[]),
            Repr::Nonzero { valuation, digits } => (*valuation, digits.as_slice()),
        };
        ds.iter().enumerate().filter(|(_, &d)| d != 0).map(move |(i, &d)| (v + i as i64, d))
    }

    fn same_field(&self, other: &Self) -> Result<(), PadicError> {
        if self.prime == other.prime {
            Ok(())
        } else {
            Err(PadicError::IncompatibleField { left: self.prime, right: other.prime })
        }
    }

    fn low_exponent(&self) -> Option<i64> {
        self.valuation()
    }

    fn from_window(prime: u32, start: i64, digits: Vec<u32>) -> Self {
        let cap = start + digits.len() as i64;
        match digits.iter().position(|&d| d != 0) {
            None => Self { prime, repr: Repr::Zero { cap: Some(cap) } },
            Some(i) => Self {
                prime,
                repr: Repr::Nonzero { valuation: start + i as i64, digits: digits[i..].to_vec() },
            },
        }
    }

    fn digitwise(&self, other: &Self, subtract: bool) -> Result<Self, PadicError> {
        self.same_field(other)?;
        let p = self.prime as i64;
        let cap = match (self.abs_cap(), other.abs_cap()) {
            (None, None) => return Ok(Self::zero(self.prime)),
            (Some(a), None) | (None, Some(a)) => a,
            (Some(a), Some(b)) => a.min(b),
        };
        let start = match (self.low_exponent(), other.low_exponent()) {
            (None, None) => cap,
            (Some(a), None) | (None, Some(a)) => a,
            (Some(a), Some(b)) => a.min(b),
        };
        if start >= cap {
            return Ok(Self { prime: self.prime, repr: Repr::Zero { cap: Some(cap) } });
        }
        let mut out = Vec::with_capacity((cap - start) as usize);
        let mut carry = 0i64;
        for e in start..cap {
            let a = self.digit(e).unwrap() as i64;
            let b = other.digit(e).unwrap() as i64;
            let mut s = if subtract { a - b - carry } else { a + b + carry };
            if subtract {
                carry = 0;
                if s < 0 {
                    s += p;
                    carry = 1;
                }
            } else {
                carry = s / p;
                s %= p;
            }
            out.push(s as u32);
        }
        Ok(Self::from_window(self.prime, start, out))
    }

    pub fn add(&self, other: &Self) -> Result<Self, PadicError> {
        self.digitwise(other, false)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, PadicError> {
        self.digitwise(other, true)
    }

    pub fn neg(&self) -> Self {
        Self::zero(self.prime).sub(self).expect("same field")
    }

    /// Schoolbook product on the significant digits.
    pub fn mul(&self, other: &Self) -> Result<Self, PadicError> {
        self.same_field(other)?;
        let prime = self.prime;
        match (&self.repr, &other.repr) {
            (Repr::Zero { cap: None }, _) | (_, Repr::Zero { cap: None }) => Ok(Self::zero(prime)),
            (Repr::Zero { cap: Some(a) }, Repr::Zero { cap: Some(b) }) => {
                Ok(Self { prime, repr: Repr::Zero { cap: Some(a + b) } })
            }
            (Repr::Zero { cap: Some(c) }, Repr::Nonzero { valuation, .. })
            | (Repr::Nonzero { valuation, .. }, Repr::Zero { cap: Some(c) }) => {
                Ok(Self { prime, repr: Repr::Zero { cap: Some(c + valuation) } })
            }
            (
                Repr::Nonzero { valuation: va, digits: da },
                Repr::Nonzero { valuation: vb, digits: db },
            ) => {
                let n = da.len().min(db.len());
                let p = prime as u64;
                let mut acc = vec![0u64; n];
                for (i, &x) in da.iter().take(n).enumerate() {
                    if x == 0 {
                        continue;
                    }
                    for (j, &y) in db.iter().take(n - i).enumerate() {
                        acc[i + j] += x as u64 * y as u64;
                    }
                }
                let mut carry = 0u64;
                let mut out = Vec::with_capacity(n);
                for a in acc {
                    let s = a + carry;
                    out.push((s % p) as u32);
                    carry = s / p;
                }
                Ok(Self::from_window(prime, va + vb, out))
            }
        }
    }

    /// Multiplication by `p^k`; exact, shifts every exponent.
    pub fn shift(&self, k: i64) -> Self {
        let repr = match &self.repr {
            Repr::Zero { cap } => Repr::Zero { cap: cap.map(|c| c + k) },
            Repr::Nonzero { valuation, digits } => {
                Repr::Nonzero { valuation: valuation + k, digits: digits.clone() }
            }
        };
        Self { prime: self.prime, repr }
    }

    /// `|x| = p^(-v)`, and `0` for zero.
    pub fn norm(&self) -> Rational {
        match self.valuation() {
            None => Rational::zero(),
            Some(v) => rational_pow(self.prime, -v),
        }
    }

    /// Whether `x ∈ p^r Z_p`, i.e. `|x| <= p^(-r)`.
    ///
    /// A nonzero digit below `r` settles the question; otherwise the digits
    /// up to `r` must be known.
    pub fn ord_at_least(&self, r: i64) -> Result<bool, PadicError> {
        match &self.repr {
            Repr::Nonzero { valuation, .. } if *valuation < r => Ok(false),
            Repr::Nonzero { valuation, digits } if valuation + digits.len() as i64 >= r => Ok(true),
            Repr::Zero { cap: None } => Ok(true),
            Repr::Zero { cap: Some(c) } if *c >= r => Ok(true),
            _ => Err(PadicError::InsufficientPrecision { known: self.abs_cap().unwrap(), needed: r }),
        }
    }

    /// Keeps the digits at exponents `< e`; the result is known modulo `p^e`.
    ///
    /// This is the canonical representative of the coset `x + p^e Z_p`.
    pub fn truncate_below(&self, e: i64) -> Result<Self, PadicError> {
        if let Some(cap) = self.abs_cap() {
            if cap < e {
                return Err(PadicError::InsufficientPrecision { known: cap, needed: e });
            }
        }
        Ok(match &self.repr {
            Repr::Zero { .. } => Self { prime: self.prime, repr: Repr::Zero { cap: Some(e) } },
            Repr::Nonzero { valuation, digits } => {
                let keep = (e - valuation).max(0) as usize;
                Self::from_window(self.prime, *valuation, {
                    let mut d = digits[..keep.min(digits.len())].to_vec();
                    d.resize(keep, 0);
                    d
                })
                .with_zero_cap(e)
            }
        })
    }

    fn with_zero_cap(self, e: i64) -> Self {
        match self.repr {
            Repr::Zero { .. } => Self { prime: self.prime, repr: Repr::Zero { cap: Some(e) } },
            other => Self { prime: self.prime, repr: other },
        }
    }

    /// Raises the cap to `cap`, declaring the extra digits zero.
    ///
    /// Only meaningful for values whose stored digits are the complete
    /// expansion (e.g. canonical representatives).
    pub fn extend_cap(&self, cap: i64) -> Self {
        match &self.repr {
            Repr::Zero { cap: None } => self.clone(),
            Repr::Zero { cap: Some(c) } => {
                Self { prime: self.prime, repr: Repr::Zero { cap: Some((*c).max(cap)) } }
            }
            Repr::Nonzero { valuation, digits } => {
                let mut d = digits.clone();
                let want = (cap - valuation).max(d.len() as i64) as usize;
                d.resize(want, 0);
                Self { prime: self.prime, repr: Repr::Nonzero { valuation: *valuation, digits: d } }
            }
        }
    }

    /// Value of the stored digits, `sum d_e p^e`, as an exact rational.
    pub fn stored_value(&self) -> Rational {
        self.nonzero_digits()
            .map(|(e, d)| rational_pow(self.prime, e) * BigInt::from(d))
            .fold(Rational::zero(), |a, b| a + b)
    }

    /// `{x}_p = sum_{e < 0} d_e p^e`, in `[0, 1)`.
    pub fn fractional_part(&self) -> Result<Rational, PadicError> {
        if let Some(cap) = self.abs_cap() {
            if cap < 0 {
                return Err(PadicError::InsufficientPrecision { known: cap, needed: 0 });
            }
        }
        Ok(self
            .nonzero_digits()
            .take_while(|(e, _)| *e < 0)
            .map(|(e, d)| rational_pow(self.prime, e) * BigInt::from(d))
            .fold(Rational::zero(), |a, b| a + b))
    }

    /// The standard character `χ(x) = exp(2πi {x}_p)`.
    pub fn character(&self) -> Result<UnitComplex, PadicError> {
        let frac = self.fractional_part()?;
        if frac.is_zero() {
            return Ok(UnitComplex { re: 1.0, im: 0.0 });
        }
        Ok(UnitComplex::from_turns(rational_to_f64(&frac)))
    }

    /// Total order on finite expansions by the value of their stored digits.
    pub fn cmp_stored(&self, other: &Self) -> Ordering {
        self.stored_value().cmp(&other.stored_value())
    }
}

/// Every finite expansion with digits at exponents `low..high`, each known
/// modulo `p^high`: the canonical representatives of `p^low Z_p / p^high Z_p`.
///
/// Ordered by value, i.e. digit-lexicographically from the top exponent.
pub fn residues(prime: u32, low: i64, high: i64) -> impl Iterator<Item = PAdic> {
    let width = (high - low).max(0) as u32;
    let count = (prime as u64).pow(width);
    (0..count).map(move |mut index| {
        let mut digits = Vec::with_capacity(width as usize);
        for _ in 0..width {
            digits.push((index % prime as u64) as u32);
            index /= prime as u64;
        }
        PAdic::finite(prime, low, &digits, high).expect("valid digits")
    })
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.extended_gcd(m);
    if e.gcd.is_one() {
        Some(e.x.mod_floor(m))
    } else {
        None
    }
}

fn digit_char(d: u32) -> char {
    std::char::from_digit(d, 36).expect("digit below 36")
}

impl fmt::Display for PAdic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits: Vec<(i64, u32)> = self.nonzero_digits().collect();
        let Some(&(top, _)) = digits.last() else {
            return f.write_str("0");
        };
        let low = digits[0].0;
        let mut s = String::new();
        for e in (0..=top.max(0)).rev() {
            s.push(digit_char(self.digit(e).unwrap_or(0)));
        }
        if low < 0 {
            s.push('.');
            for e in (low..0).rev() {
                s.push(digit_char(self.digit(e).unwrap_or(0)));
            }
        }
        // strip leading zeros of the integer part, keeping one
        let trimmed = match s.find('.') {
            Some(dot) => {
                let int = s[..dot].trim_start_matches('0');
                format!("{}{}", if int.is_empty() { "0" } else { int }, &s[dot..])
            }
            None => s.trim_start_matches('0').to_string(),
        };
        f.write_str(&trimmed)
    }
}

/// Canonical form of a literal without negative sign: no leading zeros in
/// the integer part and no trailing zeros in the fractional part.
pub fn canonical_literal(literal: &str) -> String {
    let (int, frac) = literal.split_once('.').unwrap_or((literal, ""));
    let int = int.trim_start_matches('0');
    let frac = frac.trim_end_matches('0');
    let int = if int.is_empty() { "0" } else { int };
    if frac.is_empty() {
        int.to_string()
    } else {
        format!("{int}.{frac}")
    }
}

/// Base-p digits of a non-negative integer, lowest first.
pub fn integer_digits(n: &BigInt, p: u32) -> Vec<u32> {
    assert!(n.sign() != Sign::Minus);
    let pb = BigInt::from(p);
    let mut n = n.clone();
    let mut out = Vec::new();
    while n.is_positive() {
        let (q, r) = n.div_mod_floor(&pb);
        out.push(r.to_u32().unwrap());
        n = q;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn parse_zero_is_exact() {
        let z = PAdic::parse("0", 2, 8).unwrap();
        assert!(z.is_exact_zero());
        assert_eq!(z.valuation(), None);
        assert_eq!(z.norm(), Rational::zero());
    }

    #[test]
    fn parse_fractional_literal() {
        let x = PAdic::parse("1.1", 2, 8).unwrap();
        assert_eq!(x.valuation(), Some(-1));
        assert_eq!(x.norm(), r(2, 1));
        assert_eq!(x.stored_value(), r(3, 2));
        assert_eq!(x.precision(), 8);
        assert_eq!(x.to_string(), "1.1");
    }

    #[test]
    fn parse_matches_integer_conversion() {
        let x = PAdic::parse("0100", 3, 8).unwrap();
        let expect = integer_digits(&BigInt::from(9), 3);
        let got: Vec<u32> = (0..expect.len() as i64).map(|e| x.digit(e).unwrap()).collect();
        assert_eq!(got, expect);
        assert_eq!(x.to_string(), "100");
    }

    #[test]
    fn parse_rejects_bad_literals() {
        assert!(matches!(PAdic::parse("", 2, 8), Err(PadicError::MalformedLiteral { .. })));
        assert!(matches!(PAdic::parse("102", 2, 8), Err(PadicError::MalformedLiteral { .. })));
        assert!(matches!(PAdic::parse("1.", 3, 8), Err(PadicError::MalformedLiteral { .. })));
        assert!(matches!(PAdic::parse("-", 3, 8), Err(PadicError::MalformedLiteral { .. })));
        assert!(matches!(PAdic::parse("1", 4, 8), Err(PadicError::UnsupportedPrime(4))));
    }

    #[test]
    fn negative_literal_reduces_to_digits() {
        let m1 = PAdic::parse("-1", 2, 6).unwrap();
        assert_eq!(m1.to_string(), "111111");
        let one = PAdic::parse("1", 2, 6).unwrap();
        assert!(m1.add(&one).unwrap().is_zero());
    }

    #[test]
    fn carry_propagates() {
        let one = PAdic::parse("1", 2, 8).unwrap();
        let two = one.add(&one).unwrap();
        assert_eq!(two.to_string(), "10");
        assert_eq!(two.valuation(), Some(1));
    }

    #[test]
    fn self_subtraction_is_zero() {
        let x = PAdic::parse("210.12", 3, 10).unwrap();
        let z = x.sub(&x).unwrap();
        assert!(z.is_zero());
        assert_eq!(z.abs_cap(), x.abs_cap());
    }

    #[test]
    fn mismatched_primes() {
        let a = PAdic::parse("1", 2, 4).unwrap();
        let b = PAdic::parse("1", 3, 4).unwrap();
        assert_eq!(a.add(&b), Err(PadicError::IncompatibleField { left: 2, right: 3 }));
        assert!(a.mul(&b).is_err());
    }

    #[test]
    fn norm_of_uniformizer() {
        for p in [2, 3, 5, 7] {
            let w = PAdic::uniformizer(p, 8).unwrap();
            assert_eq!(w.norm(), r(1, p as i64));
            let inv = PAdic::from_rational(&r(1, p as i64), p, 8).unwrap();
            assert_eq!(inv.norm(), r(p as i64, 1));
        }
    }

    #[test]
    fn fractional_parts() {
        assert_eq!(PAdic::from_integer(13, 2, 8).unwrap().fractional_part().unwrap(), r(0, 1));
        let half = PAdic::parse("0.1", 2, 8).unwrap();
        assert_eq!(half.fractional_part().unwrap(), r(1, 2));
        let three_quarters = PAdic::from_rational(&r(3, 4), 2, 8).unwrap();
        assert_eq!(three_quarters.nonzero_digits().collect::<Vec<_>>(), vec![(-2, 1), (-1, 1)]);
        assert_eq!(three_quarters.fractional_part().unwrap(), r(3, 4));
        // -1/2 = ...1111.1 in Q_2
        let mhalf = PAdic::from_rational(&r(-1, 2), 2, 8).unwrap();
        assert_eq!(mhalf.fractional_part().unwrap(), r(1, 2));
    }

    #[test]
    fn fractional_part_needs_digits_to_zero() {
        let x = PAdic::from_digits(2, -5, &[1, 0]).unwrap();
        assert!(matches!(x.fractional_part(), Err(PadicError::InsufficientPrecision { .. })));
    }

    #[test]
    fn character_values() {
        let c = PAdic::from_integer(5, 7, 8).unwrap().character().unwrap();
        assert_eq!((c.re, c.im), (1.0, 0.0));
        let c = PAdic::parse("0.1", 2, 8).unwrap().character().unwrap();
        assert!((c.re + 1.0).abs() < 1e-12 && c.im.abs() < 1e-12);
    }

    #[test]
    fn characters_sum_to_zero_over_cosets() {
        for p in [2u32, 3, 5, 7, 11] {
            let mut s = Complex64::new(0.0, 0.0);
            for k in 0..p {
                let x = PAdic::from_rational(&r(k as i64, p as i64), p, 8).unwrap();
                s += x.character().unwrap().to_complex();
            }
            assert!(s.norm() < 1e-12, "p = {p}: {s}");
        }
    }

    #[test]
    fn truncation_gives_coset_representative() {
        let x = PAdic::parse("1101.011", 2, 12).unwrap();
        let t = x.truncate_below(1).unwrap();
        assert_eq!(t.to_string(), "1.011");
        assert_eq!(t.abs_cap(), Some(1));
        assert!(t.truncate_below(-3).unwrap().is_zero());
        let low = PAdic::from_digits(2, 0, &[1]).unwrap();
        assert!(low.truncate_below(3).is_err());
    }

    #[test]
    fn ord_at_least_reports_unknown() {
        let z = PAdic::from_digits(3, 0, &[0, 0]).unwrap();
        assert!(z.ord_at_least(2).unwrap());
        assert!(z.ord_at_least(3).is_err());
        let x = PAdic::from_digits(3, 0, &[0, 2]).unwrap();
        assert!(!x.ord_at_least(5).unwrap());
    }
}
