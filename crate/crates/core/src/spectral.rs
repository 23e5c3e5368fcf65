//! The window counts `(N_x)` as a stationary process on `L_m`: spectral
//! density, its Lipschitz behavior at the origin, the inverse-density
//! integral, and finite-horizon linear prediction of `N_0`.
//!
//! Coset representatives `x` index characters of `O_F` through
//! `γ_x(h) = χ(p^(m + GAMMA_SCALE_OFFSET) x h)`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::ball::BallSet;
use crate::covariance::{covariance_table, representatives, CovarianceError, CovarianceTable};
use crate::fourier::{FourierError, PairTable};
use crate::padic::{rational_pow, rational_to_f64, residues, PAdic, PadicError, Rational};

/// Exponent shift in `x ↦ p^(m + offset) x` from `L_m` to the dual of `O_F`.
///
/// `1` follows the published isomorphism onto `F / p O_F`. With the
/// standard character this folds the innermost shell of `L_m` onto the
/// trivial character; `0` gives an injective indexing instead.
pub const GAMMA_SCALE_OFFSET: i64 = 1;

/// Relative eigenvalue cutoff of the pseudo-inverse in the normal equations.
pub const PSEUDO_INVERSE_RTOL: f64 = 1e-12;

const MAX_PREDICTORS: usize = 1 << 12;
const MAX_PROBES: u64 = 1 << 20;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error(transparent)]
    Covariance(#[from] CovarianceError),
    #[error(transparent)]
    Fourier(#[from] FourierError),
    #[error(transparent)]
    Padic(#[from] PadicError),
    #[error("spectral density is defined on |h| <= 1, got {0}")]
    Domain(String),
    #[error("horizon {horizon} must be at least the window exponent {m}")]
    HorizonTooSmall { horizon: i64, m: i64 },
    #[error("depth must be at least 1, got {0}")]
    InvalidDepth(i64),
    #[error("character sum has imaginary part {0:e}")]
    NotReal(f64),
    #[error("{0} cells requested, above the limit")]
    TooManyCells(u64),
}

#[derive(Clone, Debug)]
pub struct SpectralDensity {
    pairs: PairTable,
    table: CovarianceTable,
    offset: i64,
}

impl SpectralDensity {
    /// Density truncated to the characters with `|x| <= p^horizon`.
    pub fn new(set: &BallSet, m: i64, horizon: i64) -> Result<Self, SpectralError> {
        Self::with_offset(set, m, horizon, GAMMA_SCALE_OFFSET)
    }

    pub fn with_offset(set: &BallSet, m: i64, horizon: i64, offset: i64) -> Result<Self, SpectralError> {
        if horizon < m {
            return Err(SpectralError::HorizonTooSmall { horizon, m });
        }
        Ok(Self { pairs: PairTable::new(set)?, table: covariance_table(set, m, horizon)?, offset })
    }

    pub fn table(&self) -> &CovarianceTable {
        &self.table
    }

    pub fn prime(&self) -> u32 {
        self.table.set.prime()
    }

    pub fn m(&self) -> i64 {
        self.table.window.m
    }

    pub fn horizon(&self) -> i64 {
        self.table.horizon
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    fn scale(&self) -> i64 {
        self.m() + self.offset
    }

    /// The truncated density is constant on cosets of `p^R O_F`, `R` returned.
    pub fn resolution(&self) -> i64 {
        (self.horizon() - self.scale()).max(0)
    }

    /// `Σ_{|x| > p^horizon} |Cov|`, the error against the untruncated density.
    pub fn tail_bound(&self) -> Rational {
        rational_pow(self.prime(), self.m()) * self.pairs.l2_tail(self.horizon())
    }

    fn check_domain(&self, h: &PAdic) -> Result<(), SpectralError> {
        if !h.ord_at_least(0)? {
            return Err(SpectralError::Domain(h.to_string()));
        }
        Ok(())
    }

    /// The truncated character sum `Σ Cov(N_x, N_0) γ_x(h)`, numerically.
    pub fn eval(&self, h: &PAdic) -> Result<f64, SpectralError> {
        self.check_domain(h)?;
        let s = self.scale();
        let mut total = num_complex::Complex64::new(rational_to_f64(&self.table.variance), 0.0);
        for e in &self.table.entries {
            let chi = e.center.shift(s).mul(h)?.character()?.to_complex();
            total += e.value.to_complex() * chi;
        }
        let scale = rational_to_f64(&self.table.variance).max(1.0);
        if total.im.abs() > 1e-12 * scale {
            return Err(SpectralError::NotReal(total.im));
        }
        Ok(total.re)
    }

    /// The same truncated sum in closed form,
    /// `p^m (m(S) - ∫_{B(0, p^horizon)} |FT(1_S)|^2(y) χ(s y h) dy)`.
    pub fn eval_exact(&self, h: &PAdic) -> Result<Rational, SpectralError> {
        self.check_domain(h)?;
        let p = self.prime();
        let sh = h.shift(self.scale());
        let integral = self.pairs.shifted_ball_integral(&sh, self.horizon())?;
        Ok(rational_pow(p, self.m()) * (self.table.set.measure() - integral))
    }
}

/// `spectral_density_eval` in the numeric character-sum form.
pub fn spectral_density_eval(d: &SpectralDensity, h: &PAdic) -> Result<f64, SpectralError> {
    d.eval(h)
}

#[derive(Clone, Debug, Serialize)]
pub struct LipschitzRow {
    pub k: i64,
    pub max_ratio: f64,
    /// `2 p^m l2_tail(S, k) p^k`.
    pub bound: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LipschitzReport {
    pub depth: i64,
    pub max_ratio: f64,
    pub max_bound: f64,
    pub rows: Vec<LipschitzRow>,
    pub within_bound: bool,
}

fn probe_points(p: u32, low: i64, high: i64) -> Result<Vec<PAdic>, SpectralError> {
    let count = (p as u64).checked_pow((high - low).max(0) as u32).unwrap_or(u64::MAX);
    if count > MAX_PROBES {
        return Err(SpectralError::TooManyCells(count));
    }
    Ok(residues(p, low, high).collect())
}

/// Difference quotients `|f(x + h) - f(x)| / |h|` over `|h| = p^(-k)`,
/// `0 <= k <= depth`, with `x` on a grid resolving the density.
pub fn lipschitz_check(d: &SpectralDensity, depth: i64) -> Result<LipschitzReport, SpectralError> {
    if depth < 1 {
        return Err(SpectralError::InvalidDepth(depth));
    }
    let p = d.prime();
    let grid = d.resolution().min(3);
    let cap = d.resolution().max(depth + 1);
    let xs: Vec<PAdic> = probe_points(p, 0, grid)?.into_iter().map(|x| x.extend_cap(cap)).collect();
    let fx: Vec<Rational> = xs.iter().map(|x| d.eval_exact(x)).collect::<Result<_, _>>()?;
    let q_m = rational_pow(p, d.m());
    let two = Rational::from_integer(2.into());
    let mut rows = Vec::new();
    for k in 0..=depth {
        let mut best = Rational::zero();
        for unit in 1..p {
            let h = PAdic::finite(p, k, &[unit], cap)?;
            for (x, f0) in xs.iter().zip(&fx) {
                let diff = d.eval_exact(&x.add(&h)?)? - f0;
                let ratio = num_traits::Signed::abs(&diff) * rational_pow(p, k);
                if ratio > best {
                    best = ratio;
                }
            }
        }
        let bound = &two * &q_m * d.pairs.l2_tail(k) * rational_pow(p, k);
        rows.push(LipschitzRow { k, max_ratio: rational_to_f64(&best), bound: rational_to_f64(&bound) });
    }
    let max_ratio = rows.iter().map(|r| r.max_ratio).fold(0.0, f64::max);
    let max_bound = rows.iter().map(|r| r.bound).fold(0.0, f64::max);
    let within_bound = rows.iter().all(|r| r.max_ratio <= r.bound * (1.0 + 1e-12));
    Ok(LipschitzReport { depth, max_ratio, max_bound, rows, within_bound })
}

#[derive(Clone, Debug, Serialize)]
pub struct DivergenceReport {
    pub depth: i64,
    /// `∫_{p^(-depth) < |h| <= 1} f(h)^(-1) dm`, absent when infinite.
    pub value: Option<String>,
    pub value_f64: f64,
    /// Set when `f` vanishes on a cell of positive measure in the region.
    pub infinite: bool,
    /// `∫_{p^(-depth) < |h| <= 1} |h|^(-1) dm = depth (q - 1) / q`.
    pub reference: String,
    pub reference_f64: f64,
}

/// `Σ_{n < depth} p^n m(|h| = p^(-n))`.
pub fn reference_divergence(p: u32, depth: i64) -> Rational {
    let mut total = Rational::zero();
    for n in 0..depth.max(0) {
        let shell = rational_pow(p, -n) - rational_pow(p, -n - 1);
        total += rational_pow(p, n) * shell;
    }
    total
}

/// Inverse-density integral over the shells `|h| = p^(-n)`, `0 <= n < depth`.
///
/// Each shell is cut into cosets on which the truncated density is
/// constant, so the integral is a finite exact sum.
pub fn divergence_partial(d: &SpectralDensity, depth: i64) -> Result<DivergenceReport, SpectralError> {
    if depth < 1 {
        return Err(SpectralError::InvalidDepth(depth));
    }
    let p = d.prime();
    let r = d.resolution();
    let mut total = Rational::zero();
    let mut infinite = false;
    'shells: for n in 0..depth {
        let level = r.max(n + 1);
        let cell = rational_pow(p, -level);
        for h in probe_points(p, n, level)? {
            if h.valuation() != Some(n) {
                continue;
            }
            let f = d.eval_exact(&h)?;
            if f.is_zero() {
                infinite = true;
                break 'shells;
            }
            total += &cell / f;
        }
    }
    let reference = reference_divergence(p, depth);
    Ok(DivergenceReport {
        depth,
        value: (!infinite).then(|| total.to_string()),
        value_f64: if infinite { f64::INFINITY } else { rational_to_f64(&total) },
        infinite,
        reference_f64: rational_to_f64(&reference),
        reference: reference.to_string(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Coefficient {
    pub center: String,
    pub value: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PredictionSolution {
    pub m: i64,
    pub horizon: i64,
    pub variance: f64,
    pub residual_sd: f64,
    pub coefficients: Vec<Coefficient>,
    #[serde(skip)]
    pub centers: Vec<PAdic>,
}

impl PredictionSolution {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data")
    }

    /// `Σ c_x (N_x - E N_x)`, the predicted deviation of the center count.
    /// `count_at` gives the count of the coset represented by each center.
    pub fn predict_deviation(&self, mean: f64, mut count_at: impl FnMut(usize) -> f64) -> f64 {
        self.coefficients.iter().enumerate().map(|(i, c)| c.value * (count_at(i) - mean)).sum()
    }
}

/// Least-squares prediction of `N_0 - E N_0` from the centered counts of
/// the cosets `0 < |x| <= p^horizon`.
///
/// Normal equations are solved by a spectral pseudo-inverse, giving the
/// least-norm solution when the covariance matrix is singular.
pub fn linear_predictor(set: &BallSet, m: i64, horizon: i64) -> Result<PredictionSolution, SpectralError> {
    if horizon <= m {
        return Err(SpectralError::HorizonTooSmall { horizon, m });
    }
    let table = covariance_table(set, m, horizon)?;
    let variance = rational_to_f64(&table.variance);
    if table.variance.is_zero() {
        return Ok(PredictionSolution { m, horizon, variance, residual_sd: 0.0, coefficients: vec![], centers: vec![] });
    }
    let reps = representatives(set.prime(), m, horizon)?;
    let centers: Vec<PAdic> = reps[1..].to_vec();
    if centers.len() > MAX_PREDICTORS {
        return Err(SpectralError::TooManyCells(centers.len() as u64));
    }
    let n = centers.len();
    let cov = |x: &PAdic| -> Result<f64, SpectralError> {
        Ok(table.lookup(x)?.map_or(0.0, |c| c.to_complex().re))
    };
    let b = DVector::from_iterator(n, table.entries.iter().map(|e| e.value.to_complex().re));
    let mut sigma = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = cov(&centers[i].sub(&centers[j])?)?;
            sigma[(i, j)] = v;
            sigma[(j, i)] = v;
        }
    }
    let sigma_copy = sigma.clone();
    let eig = SymmetricEigen::new(sigma);
    let top = eig.eigenvalues.iter().fold(0.0f64, |a, &l| a.max(l.abs()));
    let mut c = DVector::zeros(n);
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda > PSEUDO_INVERSE_RTOL * top {
            let v = eig.eigenvectors.column(k);
            c += v * (v.dot(&b) / lambda);
        }
    }
    let residual_sd = residual_norm(variance, &b, &sigma_copy, &c);
    let coefficients =
        centers.iter().zip(c.iter()).map(|(x, &value)| Coefficient { center: x.to_string(), value }).collect();
    Ok(PredictionSolution { m, horizon, variance, residual_sd, coefficients, centers })
}

/// `sqrt(w^T Σ w)` for `w = (1, -c)` over the covariance of `(N_0, N_x...)`.
///
/// Evaluated through the spectrum of the augmented matrix, dropping
/// eigenvalues below the pseudo-inverse cutoff. `Var - c·b` would lose
/// everything below `sqrt(ε Var)` to cancellation, which is exactly the
/// regime of interest when the prediction is exact.
fn residual_norm(variance: f64, b: &DVector<f64>, sigma: &DMatrix<f64>, c: &DVector<f64>) -> f64 {
    let n = b.len();
    let mut full = DMatrix::zeros(n + 1, n + 1);
    full[(0, 0)] = variance;
    for i in 0..n {
        full[(0, i + 1)] = b[i];
        full[(i + 1, 0)] = b[i];
    }
    full.view_mut((1, 1), (n, n)).copy_from(sigma);
    let mut w = DVector::zeros(n + 1);
    w[0] = 1.0;
    for i in 0..n {
        w[i + 1] = -c[i];
    }
    let eig = SymmetricEigen::new(full);
    let top = eig.eigenvalues.iter().fold(0.0f64, |a, &l| a.max(l.abs()));
    let mut total = 0.0;
    for (k, &mu) in eig.eigenvalues.iter().enumerate() {
        if mu > PSEUDO_INVERSE_RTOL * top {
            total += mu * eig.eigenvectors.column(k).dot(&w).powi(2);
        }
    }
    total.sqrt()
}
