//! Fourier transforms of ball-set indicators and integrals of their squares.
//!
//! For a ball `B(c, p^k)` the transform is `p^k χ(c y) 1[|y| <= p^(-k)]`,
//! so `|FT(1_S)|^2` is a finite sum of characters `χ((c_i - c_j) y)` over
//! balls around the origin. Integrals of such a character over a ball are
//! either the ball's measure or zero, which makes every integral below a
//! finite exact sum.

use num_complex::Complex64;
use num_traits::Zero;
use thiserror::Error;

use crate::ball::{BallError, BallSet};
use crate::cyclotomic::Cyclotomic;
use crate::padic::{rational_pow, rational_to_f64, PAdic, PadicError, Rational};

#[derive(Debug, Error)]
pub enum FourierError {
    #[error(transparent)]
    Padic(#[from] PadicError),
    #[error(transparent)]
    Ball(#[from] BallError),
    #[error("Riemann sum at depth {depth} is not exact; depth {needed} required")]
    InsufficientDepth { depth: i64, needed: i64 },
    #[error("the kernel needs a set of positive measure")]
    EmptySet,
}

/// The correlation kernel `K_S(x, y) = FT(1_S)(x - y)`.
#[derive(Clone, Debug)]
pub struct KernelSpec {
    set: BallSet,
}

impl KernelSpec {
    pub fn new(set: BallSet) -> Result<Self, FourierError> {
        if set.is_empty() {
            return Err(FourierError::EmptySet);
        }
        Ok(Self { set })
    }

    pub fn set(&self) -> &BallSet {
        &self.set
    }

    pub fn eval(&self, x: &PAdic, y: &PAdic) -> Result<Complex64, FourierError> {
        kernel_eval(self, x, y)
    }
}

/// `FT(1_S)(y)` from the per-ball closed form, in floating point.
pub fn ft_indicator(set: &BallSet, y: &PAdic) -> Result<Complex64, FourierError> {
    let mut total = Complex64::zero();
    for b in set.balls() {
        if y.ord_at_least(b.radius_exp())? {
            let chi = b.center().mul(y)?.character()?;
            total += chi.to_complex() * rational_to_f64(&b.measure());
        }
    }
    Ok(total)
}

/// `FT(1_S)(y)` as an exact element of `Q(ζ_{p^J})`.
pub fn ft_indicator_exact(set: &BallSet, y: &PAdic) -> Result<Cyclotomic, FourierError> {
    let mut total = Cyclotomic::zero(set.prime());
    for b in set.balls() {
        if y.ord_at_least(b.radius_exp())? {
            total.add_scaled_root(&b.measure(), &b.center().mul(y)?.fractional_part()?);
        }
    }
    Ok(total)
}

pub fn kernel_eval(kernel: &KernelSpec, x: &PAdic, y: &PAdic) -> Result<Complex64, FourierError> {
    ft_indicator(&kernel.set, &x.sub(y)?)
}

/// One ordered pair `(i, j)` of balls in the expansion of `|FT(1_S)|^2`:
/// `weight * χ(diff * y)` supported on `|y| <= p^support`.
#[derive(Clone, Debug)]
struct PairTerm {
    weight: Rational,
    support: i64,
    diff: PAdic,
    /// `min(v(diff), support)`; `diff` is only known modulo `p^support`.
    diff_ord: i64,
}

/// `|FT(1_S)|^2` expanded over ordered pairs of balls, for repeated integration.
#[derive(Clone, Debug)]
pub struct PairTable {
    prime: u32,
    measure: Rational,
    finest: Option<i64>,
    terms: Vec<PairTerm>,
}

impl PairTable {
    pub fn new(set: &BallSet) -> Result<Self, FourierError> {
        let mut terms = Vec::with_capacity(set.balls().len().pow(2));
        for a in set.balls() {
            for b in set.balls() {
                let support = -a.radius_exp().max(b.radius_exp());
                let diff = a.center().sub(b.center())?;
                let diff_ord = diff.valuation().map_or(support, |v| v.min(support));
                terms.push(PairTerm { weight: a.measure() * b.measure(), support, diff, diff_ord });
            }
        }
        Ok(Self { prime: set.prime(), measure: set.measure(), finest: set.finest_level(), terms })
    }

    pub fn prime(&self) -> u32 {
        self.prime
    }

    /// Level below which `|FT(1_S)|` is the constant `m(S)`.
    pub fn flat_level(&self) -> i64 {
        self.terms.iter().map(|t| t.diff_ord).min().unwrap_or(0)
    }

    /// `∫_{B(0, p^n)} |FT(1_S)|^2 dm`.
    pub fn ball_integral(&self, n: i64) -> Rational {
        let mut total = Rational::zero();
        for t in &self.terms {
            let r = n.min(t.support);
            if t.diff_ord >= r {
                total += &t.weight * rational_pow(self.prime, r);
            }
        }
        total
    }

    /// `∫_{B(x, p^m)} |FT(1_S)|^2 dm`. Only `x` modulo `p^(-m)` matters.
    pub fn ball_integral_at(&self, x: &PAdic, m: i64) -> Result<Cyclotomic, FourierError> {
        let p = self.prime;
        let mut total = Cyclotomic::zero(p);
        for t in &self.terms {
            if m >= t.support {
                // B(0, p^K) is inside B(x, p^m) or disjoint from it
                if x.ord_at_least(-m)? && t.diff_ord >= t.support {
                    total.add_assign(&Cyclotomic::from_rational(p, &t.weight * rational_pow(p, t.support)));
                }
            } else if x.ord_at_least(-t.support)? && t.diff_ord >= m {
                let turns = t.diff.mul(x)?.fractional_part()?;
                total.add_scaled_root(&(&t.weight * rational_pow(p, m)), &turns);
            }
        }
        Ok(total)
    }

    /// `∫_{B(0, p^n)} |FT(1_S)|^2(y) χ(a y) dm(y)`; `a` must be known to `p^n`.
    pub fn shifted_ball_integral(&self, a: &PAdic, n: i64) -> Result<Rational, FourierError> {
        let mut total = Rational::zero();
        for t in &self.terms {
            let r = n.min(t.support);
            if t.diff.add(a)?.ord_at_least(r)? {
                total += &t.weight * rational_pow(self.prime, r);
            }
        }
        Ok(total)
    }

    /// `∫_{|y| = p^l} |FT(1_S)|^2 dm`.
    pub fn shell_integral(&self, l: i64) -> Rational {
        let mut total = Rational::zero();
        for t in self.terms.iter().filter(|t| l <= t.support) {
            if t.diff_ord >= l {
                total += &t.weight * rational_pow(self.prime, l);
            }
            if t.diff_ord >= l - 1 {
                total -= &t.weight * rational_pow(self.prime, l - 1);
            }
        }
        total
    }

    /// Flat core plus every shell up to the finest level.
    pub fn parseval_total(&self) -> Rational {
        let Some(finest) = self.finest else {
            return Rational::zero();
        };
        let flat = self.flat_level();
        let mut total = rational_pow(self.prime, flat) * &self.measure * &self.measure;
        for l in flat + 1..=finest {
            total += self.shell_integral(l);
        }
        total
    }

    /// `∫_{|y| > p^n} |FT(1_S)|^2 dm`.
    pub fn l2_tail(&self, n: i64) -> Rational {
        let Some(finest) = self.finest else {
            return Rational::zero();
        };
        let flat = self.flat_level();
        let mut total = Rational::zero();
        if n < flat {
            let m2 = &self.measure * &self.measure;
            total += (rational_pow(self.prime, flat) - rational_pow(self.prime, n)) * m2;
        }
        for l in (n + 1).max(flat + 1)..=finest {
            total += self.shell_integral(l);
        }
        total
    }
}

/// `∫_{B(0, p^n)} |FT(1_S)|^2 dm`, exact for every integer `n`.
pub fn ball_integral(set: &BallSet, n: i64) -> Result<Rational, FourierError> {
    Ok(PairTable::new(set)?.ball_integral(n))
}

pub fn ball_integral_at(set: &BallSet, x: &PAdic, m: i64) -> Result<Cyclotomic, FourierError> {
    PairTable::new(set)?.ball_integral_at(x, m)
}

/// `∫_{|y| = p^l} |FT(1_S)|^2 dm`.
pub fn shell_integral(set: &BallSet, l: i64) -> Result<Rational, FourierError> {
    Ok(PairTable::new(set)?.shell_integral(l))
}

/// `∫_F |FT(1_S)|^2 dm` summed shell by shell.
pub fn parseval_total(set: &BallSet) -> Result<Rational, FourierError> {
    Ok(PairTable::new(set)?.parseval_total())
}

/// `∫_{|y| > p^n} |FT(1_S)|^2 dm`; zero once `n` reaches the finest level.
pub fn l2_tail(set: &BallSet, n: i64) -> Result<Rational, FourierError> {
    Ok(PairTable::new(set)?.l2_tail(n))
}

/// Riemann sum of `χ(x y)` over the cells of radius `p^(-depth)` inside `S`.
///
/// The character is constant on every cell once `v(y) >= -depth`, so the
/// sum is the transform itself rather than an approximation.
pub fn brute_ft_oracle(set: &BallSet, y: &PAdic, depth: i64) -> Result<Cyclotomic, FourierError> {
    let p = set.prime();
    if let Some(finest) = set.finest_level() {
        if depth < finest {
            return Err(FourierError::InsufficientDepth { depth, needed: finest });
        }
    }
    if let Some(v) = y.valuation() {
        if v < -depth {
            return Err(FourierError::InsufficientDepth { depth, needed: -v });
        }
    }
    let cell = rational_pow(p, -depth);
    let mut total = Cyclotomic::zero(p);
    for b in set.balls() {
        let low = -b.radius_exp();
        let base = b.center().extend_cap(depth);
        for offset in crate::padic::residues(p, low, depth) {
            let x = base.add(&offset)?;
            total.add_scaled_root(&cell, &x.mul(y)?.fractional_part()?);
        }
    }
    Ok(total)
}
