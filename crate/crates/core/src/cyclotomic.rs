//! Exact arithmetic in the cyclotomic fields `Q(ζ_{p^J})`.
//!
//! Character values of `Q_p` at points with finite expansions are roots of
//! unity of p-power order, so every Fourier coefficient and coset integral
//! of a ball set is a rational combination of them. Elements are kept in a
//! reduced basis so that equality is structural.
//!
//! At level `J >= 1` the relation `sum_{i<p} ζ^(b + i p^(J-1)) = 0` holds for
//! every `b`; reduction eliminates exponents `>= (p-1) p^(J-1)`. The level
//! is then lowered while every exponent is divisible by `p`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use crate::padic::{rational_to_f64, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cyclotomic {
    prime: u32,
    level: u32,
    coeffs: BTreeMap<u64, Rational>,
}

impl Cyclotomic {
    pub fn zero(prime: u32) -> Self {
        Self { prime, level: 0, coeffs: BTreeMap::new() }
    }

    pub fn from_rational(prime: u32, r: Rational) -> Self {
        let mut coeffs = BTreeMap::new();
        if !r.is_zero() {
            coeffs.insert(0, r);
        }
        Self { prime, level: 0, coeffs }
    }

    /// `exp(2πi t)` for `t` with a p-power denominator (reduced mod 1).
    pub fn root(prime: u32, turns: &Rational) -> Self {
        let den = turns.denom();
        let mut level = 0u32;
        let mut d = den.clone();
        let pb = BigInt::from(prime);
        while d > BigInt::from(1) {
            let (q, r) = d.div_rem(&pb);
            assert!(r.is_zero(), "denominator {den} is not a power of {prime}");
            d = q;
            level += 1;
        }
        let a = turns.numer().mod_floor(den).to_u64().expect("exponent fits in u64");
        let mut coeffs = BTreeMap::new();
        coeffs.insert(a, Rational::from_integer(1.into()));
        let mut out = Self { prime, level, coeffs };
        out.normalize();
        out
    }

    pub fn prime(&self) -> u32 {
        self.prime
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn order(&self) -> u64 {
        (self.prime as u64).pow(self.level)
    }

    fn lift(&self, level: u32) -> BTreeMap<u64, Rational> {
        let f = (self.prime as u64).pow(level - self.level);
        self.coeffs.iter().map(|(a, c)| (a * f, c.clone())).collect()
    }

    fn normalize(&mut self) {
        let p = self.prime as u64;
        if self.level > 0 {
            let block = p.pow(self.level - 1);
            let threshold = (p - 1) * block;
            let high: Vec<u64> = self.coeffs.range(threshold..).map(|(a, _)| *a).collect();
            for a in high {
                let c = self.coeffs.remove(&a).unwrap();
                let b = a - threshold;
                for i in 0..p - 1 {
                    let e = self.coeffs.entry(b + i * block).or_insert_with(Rational::zero);
                    *e -= &c;
                }
            }
        }
        self.coeffs.retain(|_, c| !c.is_zero());
        while self.level > 0 && self.coeffs.keys().all(|a| a % p == 0) {
            self.coeffs = std::mem::take(&mut self.coeffs).into_iter().map(|(a, c)| (a / p, c)).collect();
            self.level -= 1;
        }
    }

    pub fn add_assign(&mut self, other: &Self) {
        assert_eq!(self.prime, other.prime, "cyclotomic fields of different primes");
        let level = self.level.max(other.level);
        let mut coeffs = self.lift(level);
        for (a, c) in other.lift(level) {
            *coeffs.entry(a).or_insert_with(Rational::zero) += c;
        }
        self.level = level;
        self.coeffs = coeffs;
        self.normalize();
    }

    /// `self += scale * ζ^turns`.
    pub fn add_scaled_root(&mut self, scale: &Rational, turns: &Rational) {
        let mut r = Self::root(self.prime, turns);
        r.scale_assign(scale);
        self.add_assign(&r);
    }

    pub fn scale_assign(&mut self, s: &Rational) {
        if s.is_zero() {
            self.coeffs.clear();
            self.level = 0;
            return;
        }
        for c in self.coeffs.values_mut() {
            *c *= s;
        }
    }

    pub fn scaled(&self, s: &Rational) -> Self {
        let mut out = self.clone();
        out.scale_assign(s);
        out
    }

    pub fn neg(&self) -> Self {
        self.scaled(&Rational::from_integer((-1).into()))
    }

    pub fn conj(&self) -> Self {
        let n = self.order();
        let coeffs = self.coeffs.iter().map(|(a, c)| ((n - a) % n, c.clone())).collect();
        let mut out = Self { prime: self.prime, level: self.level, coeffs };
        out.normalize();
        out
    }

    /// `Some(r)` when the element is the rational `r`.
    pub fn to_rational(&self) -> Option<Rational> {
        match (self.level, self.coeffs.len()) {
            (_, 0) => Some(Rational::zero()),
            (0, _) => self.coeffs.get(&0).cloned(),
            _ => None,
        }
    }

    pub fn is_real(&self) -> bool {
        *self == self.conj()
    }

    pub fn to_complex(&self) -> Complex64 {
        let n = self.order() as f64;
        self.coeffs
            .iter()
            .map(|(a, c)| {
                let t = 2.0 * std::f64::consts::PI * (*a as f64) / n;
                Complex64::from_polar(rational_to_f64(c), t)
            })
            .sum()
    }
}

impl std::fmt::Display for Cyclotomic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if let Some(r) = self.to_rational() {
            return write!(f, "{r}");
        }
        let n = self.order();
        let terms: Vec<String> = self.coeffs.iter().map(|(a, c)| format!("({c})*z{n}^{a}")).collect();
        f.write_str(&terms.join(" + "))
    }
}
