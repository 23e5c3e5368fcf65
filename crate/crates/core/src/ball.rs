//! Finite unions of closed balls in `Q_p`.
//!
//! Two balls are either disjoint or nested, so a finite union has a unique
//! decomposition into maximal balls. [`BallSet`] always stores that
//! decomposition, which makes equality of sets structural.

use std::collections::BTreeMap;

use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::padic::{rational_pow, residues, PAdic, PadicError, Rational, DEFAULT_PRECISION};

/// Upper bound on the number of translation cosets enumerated at once.
pub const MAX_STRATA: u64 = 1 << 22;

#[derive(Debug, Error)]
pub enum BallError {
    #[error(transparent)]
    Padic(#[from] PadicError),
    #[error("balls over different primes ({0} and {1})")]
    MixedPrimes(u32, u32),
    #[error("malformed ball-set JSON: {0}")]
    Json(String),
    #[error("stratification needs {0} cosets, more than the limit {MAX_STRATA}")]
    StratificationTooLarge(u64),
}

/// The closed ball `{x : |x - center| <= p^radius_exp}`.
///
/// The center keeps only its digits below exponent `-radius_exp`, so every
/// ball has exactly one representation.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Ball {
    center: PAdic,
    radius_exp: i64,
}

impl Ball {
    pub fn new(center: PAdic, radius_exp: i64) -> Result<Self, PadicError> {
        Ok(Self { center: center.truncate_below(-radius_exp)?, radius_exp })
    }

    /// `B(0, p^radius_exp)`.
    pub fn centered(prime: u32, radius_exp: i64) -> Self {
        Self::new(PAdic::zero(prime), radius_exp).expect("zero has every digit")
    }

    pub fn from_literal(prime: u32, center: &str, radius_exp: i64) -> Result<Self, PadicError> {
        let precision = DEFAULT_PRECISION + center.len() + radius_exp.unsigned_abs() as usize;
        Self::new(PAdic::parse(center, prime, precision)?, radius_exp)
    }

    pub fn prime(&self) -> u32 {
        self.center.prime()
    }

    pub fn center(&self) -> &PAdic {
        &self.center
    }

    pub fn radius_exp(&self) -> i64 {
        self.radius_exp
    }

    /// The level `l` with radius `p^(-l)`.
    pub fn level(&self) -> i64 {
        -self.radius_exp
    }

    pub fn measure(&self) -> Rational {
        rational_pow(self.prime(), self.radius_exp)
    }

    pub fn contains_point(&self, x: &PAdic) -> Result<bool, PadicError> {
        x.sub(&self.center)?.ord_at_least(-self.radius_exp)
    }

    pub fn contains_ball(&self, other: &Ball) -> Result<bool, PadicError> {
        Ok(other.radius_exp <= self.radius_exp && self.contains_point(&other.center)?)
    }

    pub fn parent(&self) -> Ball {
        Ball::new(self.center.clone(), self.radius_exp + 1).expect("coarser truncation")
    }

    /// The `p` balls of radius `p^(radius_exp - 1)` partitioning this one.
    pub fn children(&self) -> Vec<Ball> {
        let p = self.prime();
        let e = -self.radius_exp;
        let base = self.center.extend_cap(e + 1);
        (0..p)
            .map(|d| {
                let shift = PAdic::finite(p, e, &[d], e + 1).expect("digit below p");
                Ball::new(base.add(&shift).expect("same prime"), self.radius_exp - 1)
                    .expect("cap covers the child")
            })
            .collect()
    }

    pub fn translate(&self, y: &PAdic) -> Result<Ball, PadicError> {
        Ball::new(self.center.add(y)?, self.radius_exp)
    }

    /// `sup_{x in ball} log_p |x|`.
    pub fn outer_exp(&self) -> i64 {
        match self.center.valuation() {
            Some(v) => self.radius_exp.max(-v),
            None => self.radius_exp,
        }
    }

    fn intersection_measure(&self, other: &Ball) -> Result<Rational, PadicError> {
        let (small, large) =
            if self.radius_exp <= other.radius_exp { (self, other) } else { (other, self) };
        Ok(if large.contains_point(&small.center)? { small.measure() } else { Rational::zero() })
    }

    fn sort_key(&self) -> (i64, Rational) {
        (-self.radius_exp, self.center.stored_value())
    }
}

/// A finite union of balls, held as its maximal-ball decomposition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BallSet {
    prime: u32,
    balls: Vec<Ball>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiplicityProfile {
    /// Smallest level `l` (largest ball) present.
    pub l0: i64,
    /// Number of maximal balls of radius `p^(-l)`.
    pub multiplicities: BTreeMap<i64, usize>,
    pub max_multiplicity: usize,
}

impl BallSet {
    pub fn empty(prime: u32) -> Self {
        Self { prime, balls: Vec::new() }
    }

    /// Maximal decomposition of the union of `balls`.
    pub fn canonicalize(prime: u32, balls: Vec<Ball>) -> Result<Self, BallError> {
        if let Some(b) = balls.iter().find(|b| b.prime() != prime) {
            return Err(BallError::MixedPrimes(prime, b.prime()));
        }
        let mut sorted = balls;
        sorted.sort_by_key(|b| std::cmp::Reverse(b.radius_exp));
        let mut kept: Vec<Ball> = Vec::with_capacity(sorted.len());
        for b in sorted {
            let mut covered = false;
            for k in &kept {
                if k.contains_ball(&b)? {
                    covered = true;
                    break;
                }
            }
            if !covered {
                kept.push(b);
            }
        }
        // merge complete sibling families, finest level first
        loop {
            let mut families: BTreeMap<(i64, Rational), Vec<usize>> = BTreeMap::new();
            for (i, b) in kept.iter().enumerate() {
                let parent = b.parent();
                families.entry(parent.sort_key()).or_default().push(i);
            }
            let full: Vec<Vec<usize>> =
                families.into_values().filter(|v| v.len() == prime as usize).collect();
            if full.is_empty() {
                break;
            }
            let mut drop = vec![false; kept.len()];
            let mut parents = Vec::new();
            for fam in full {
                parents.push(kept[fam[0]].parent());
                for i in fam {
                    drop[i] = true;
                }
            }
            kept = kept.into_iter().zip(drop).filter(|(_, d)| !d).map(|(b, _)| b).collect();
            kept.extend(parents);
        }
        kept.sort_by_cached_key(Ball::sort_key);
        Ok(Self { prime, balls: kept })
    }

    pub fn from_literals(prime: u32, balls: &[(&str, i64)]) -> Result<Self, BallError> {
        let balls = balls
            .iter()
            .map(|(c, k)| Ball::from_literal(prime, c, *k))
            .collect::<Result<Vec<_>, _>>()?;
        Self::canonicalize(prime, balls)
    }

    pub fn prime(&self) -> u32 {
        self.prime
    }

    pub fn balls(&self) -> &[Ball] {
        &self.balls
    }

    pub fn is_empty(&self) -> bool {
        self.balls.is_empty()
    }

    pub fn contains_point(&self, x: &PAdic) -> Result<bool, PadicError> {
        for b in &self.balls {
            if b.contains_point(x)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    pub fn measure(&self) -> Rational {
        self.balls.iter().map(Ball::measure).fold(Rational::zero(), |a, b| a + b)
    }

    /// Level of the finest ball, `max l`; the Fourier transform of the
    /// indicator vanishes beyond `|y| = p^finest_level`.
    pub fn finest_level(&self) -> Option<i64> {
        self.balls.iter().map(Ball::level).max()
    }

    pub fn coarsest_level(&self) -> Option<i64> {
        self.balls.iter().map(Ball::level).min()
    }

    /// Smallest `e` with the set inside `B(0, p^e)`.
    pub fn outer_exp(&self) -> Option<i64> {
        self.balls.iter().map(Ball::outer_exp).max()
    }

    pub fn translate(&self, y: &PAdic) -> Result<Self, BallError> {
        let moved = self.balls.iter().map(|b| b.translate(y)).collect::<Result<Vec<_>, _>>()?;
        Self::canonicalize(self.prime, moved)
    }

    pub fn intersect_measure(&self, other: &Self) -> Result<Rational, BallError> {
        if other.prime != self.prime {
            return Err(BallError::MixedPrimes(self.prime, other.prime));
        }
        let mut total = Rational::zero();
        for a in &self.balls {
            for b in &other.balls {
                total += a.intersection_measure(b)?;
            }
        }
        Ok(total)
    }

    /// `m(self \ other)`.
    pub fn diff_measure(&self, other: &Self) -> Result<Rational, BallError> {
        Ok(self.measure() - self.intersect_measure(other)?)
    }

    pub fn multiplicity_profile(&self) -> Option<MultiplicityProfile> {
        let l0 = self.coarsest_level()?;
        let mut multiplicities = BTreeMap::new();
        for b in &self.balls {
            *multiplicities.entry(b.level()).or_insert(0) += 1;
        }
        let max_multiplicity = multiplicities.values().copied().max().unwrap_or(0);
        Some(MultiplicityProfile { l0, multiplicities, max_multiplicity })
    }

    /// The normalized average of `m(S \ (S + y))` over `y ∈ B(0, p^(-n))`.
    ///
    /// The integrand is constant on cosets of the finest ball of `S`, so
    /// the average is a finite sum over those cosets.
    pub fn avg_translate_defect(&self, n: i64) -> Result<Rational, BallError> {
        let Some(finest) = self.finest_level() else {
            return Ok(Rational::zero());
        };
        if n >= finest {
            return Ok(Rational::zero());
        }
        let count = (self.prime as u64).checked_pow((finest - n) as u32).unwrap_or(u64::MAX);
        if count > MAX_STRATA {
            return Err(BallError::StratificationTooLarge(count));
        }
        let reps: Vec<PAdic> = residues(self.prime, n, finest).collect();
        let defects = reps
            .par_iter()
            .map(|y| self.diff_measure(&self.translate(y)?))
            .collect::<Result<Vec<_>, BallError>>()?;
        let total = defects.into_iter().fold(Rational::zero(), |a, b| a + b);
        Ok(total * rational_pow(self.prime, n - finest))
    }

    pub fn to_json_model(&self) -> BallSetJson {
        BallSetJson {
            p: self.prime,
            balls: self
                .balls
                .iter()
                .map(|b| BallJson { center: b.center.to_string(), radius_exp: b.radius_exp })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_json_model()).expect("serializable")
    }

    /// Parses the ball-set JSON schema; the flag reports whether the input
    /// was already in canonical form.
    pub fn from_json(text: &str) -> Result<(Self, bool), BallError> {
        let model: BallSetJson =
            serde_json::from_str(text).map_err(|e| BallError::Json(e.to_string()))?;
        Self::from_json_model(&model)
    }

    pub fn from_json_model(model: &BallSetJson) -> Result<(Self, bool), BallError> {
        crate::padic::check_prime(model.p)?;
        let balls = model
            .balls
            .iter()
            .map(|b| Ball::from_literal(model.p, &b.center, b.radius_exp))
            .collect::<Result<Vec<_>, _>>()?;
        let set = Self::canonicalize(model.p, balls)?;
        let canonical = set.to_json_model() == *model;
        Ok((set, canonical))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BallJson {
    pub center: String,
    pub radius_exp: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BallSetJson {
    pub p: u32,
    pub balls: Vec<BallJson>,
}

/// A possibly infinite union of balls described level by level.
pub trait BallFamily {
    fn prime(&self) -> u32;
    /// Balls of radius `p^(-l)` in the family.
    fn balls_at_level(&self, l: i64) -> Vec<Ball>;
    /// Smallest level carrying balls.
    fn first_level(&self) -> i64;
    /// Exact measure of the balls at levels `> l`.
    fn tail_measure(&self, l: i64) -> Rational;
}

/// `⊔_{l >= 1} B(p^(l-1), p^(-l))`: one ball per level, `M(S) = 1`.
#[derive(Clone, Copy, Debug)]
pub struct GeometricFamily {
    pub prime: u32,
}

impl BallFamily for GeometricFamily {
    fn prime(&self) -> u32 {
        self.prime
    }

    fn balls_at_level(&self, l: i64) -> Vec<Ball> {
        if l < 1 {
            return Vec::new();
        }
        let c = PAdic::finite(self.prime, l - 1, &[1], l).expect("digit 1");
        vec![Ball::new(c, -l).expect("cap matches")]
    }

    fn first_level(&self) -> i64 {
        1
    }

    fn tail_measure(&self, l: i64) -> Rational {
        let q = Rational::from_integer(self.prime.into());
        rational_pow(self.prime, -l.max(0)) / (q - Rational::from_integer(1.into()))
    }
}

/// A family cut off after level `cutoff`, with the measure left out.
#[derive(Clone, Debug)]
pub struct Truncation {
    pub set: BallSet,
    pub cutoff: i64,
    pub tail_measure: Rational,
}

pub fn truncate_family(family: &impl BallFamily, cutoff: i64) -> Result<Truncation, BallError> {
    let balls: Vec<Ball> =
        (family.first_level()..=cutoff).flat_map(|l| family.balls_at_level(l)).collect();
    Ok(Truncation {
        set: BallSet::canonicalize(family.prime(), balls)?,
        cutoff,
        tail_measure: family.tail_measure(cutoff),
    })
}
