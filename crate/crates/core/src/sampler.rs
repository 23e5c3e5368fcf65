//! Discretized sampling of the process in a window ball and Monte Carlo
//! checks of the exact count statistics.
//!
//! Cells are the cosets of `p^r Z_p` in `B(0, p^m)`. When `S ⊂ B(0, p^r)`
//! the kernel is constant on pairs of cells, so the cell-count process of
//! the discrete DPP with matrix `K(x_i, x_j) p^(-r)` has exactly the law of
//! the continuum process restricted to the window.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::ball::BallSet;
use crate::covariance::{covariance, expected_count, representatives, variance_count, CovarianceError};
use crate::fourier::{ft_indicator, FourierError};
use crate::padic::{rational_to_f64, residues, PAdic, PadicError};
use crate::spectral::{linear_predictor, PredictionSolution, SpectralError};

/// Upper limit on the number of cells in a discretized window.
pub const MAX_CELLS: u64 = 1_000_000;
/// Upper limit on the side of a dense kernel matrix.
pub const MAX_MATRIX_CELLS: usize = 4096;
pub const HERMITIAN_TOL: f64 = 1e-12;
pub const EIGEN_CLAMP_TOL: f64 = 1e-9;
pub const TRACE_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum SamplerError {
    #[error(transparent)]
    Fourier(#[from] FourierError),
    #[error(transparent)]
    Covariance(#[from] CovarianceError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Padic(#[from] PadicError),
    #[error("window exponent must be at least 1, got {0}")]
    InvalidWindow(i64),
    #[error("resolution must be nonnegative, got {0}")]
    NegativeResolution(i64),
    #[error("resolution too fine: {0} cells requested")]
    ResolutionTooFine(u64),
    #[error("resolution {r} does not resolve the kernel; at least {needed} required")]
    ResolutionTooCoarse { r: i64, needed: i64 },
    #[error("matrix is not Hermitian (defect {0:e})")]
    NotHermitian(f64),
    #[error("eigenvalue {0} outside [0, 1]")]
    EigenvalueOutOfRange(f64),
    #[error("kernel trace {trace} differs from the expected count {expected}")]
    TraceMismatch { trace: f64, expected: f64 },
    #[error("inner window {inner} must be below the sampled window {m}")]
    InnerWindow { inner: i64, m: i64 },
    #[error("at least one trial is required")]
    NoTrials,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct DiscretizationSpec {
    pub prime: u32,
    pub m: i64,
    pub r: i64,
}

impl DiscretizationSpec {
    pub fn new(prime: u32, m: i64, r: i64) -> Result<Self, SamplerError> {
        if m < 1 {
            return Err(SamplerError::InvalidWindow(m));
        }
        if r < 0 {
            return Err(SamplerError::NegativeResolution(r));
        }
        let count = (prime as u64).checked_pow((m + r) as u32).unwrap_or(u64::MAX);
        if count > MAX_CELLS {
            return Err(SamplerError::ResolutionTooFine(count));
        }
        Ok(Self { prime, m, r })
    }

    /// Smallest resolution at which the kernel of `set` is cell-constant.
    pub fn minimal_resolution(set: &BallSet) -> i64 {
        set.outer_exp().unwrap_or(0).max(0)
    }

    pub fn cell_count(&self) -> usize {
        (self.prime as usize).pow((self.m + self.r) as u32)
    }

    pub fn cell_measure(&self) -> f64 {
        (self.prime as f64).powi(-(self.r as i32))
    }

    /// Index of the coset of `B(0, p^sub_m)` containing cell `i`.
    pub fn coset_of(&self, cell: usize, sub_m: i64) -> usize {
        cell % (self.prime as usize).pow((self.m - sub_m) as u32)
    }
}

/// Representatives of the cells of radius `p^(-r)` tiling `B(0, p^m)`.
///
/// Cell `i` is `i p^(-m)`, so the order is by value.
pub fn discretize_window(m: i64, r: i64, p: u32) -> Result<Vec<PAdic>, SamplerError> {
    DiscretizationSpec::new(p, m, r)?;
    Ok(residues(p, -m, r).collect())
}

/// Position of the cell or coset representative `x` in a window `B(0, p^m)`.
fn index_of(x: &PAdic, m: i64) -> usize {
    x.nonzero_digits().map(|(e, d)| d as usize * (x.prime() as usize).pow((e + m) as u32)).sum()
}

#[derive(Clone, Debug)]
pub struct KernelMatrix {
    pub spec: DiscretizationSpec,
    pub cells: Vec<PAdic>,
    pub entries: DMatrix<Complex64>,
}

impl KernelMatrix {
    pub fn trace(&self) -> f64 {
        self.entries.diagonal().iter().map(|z| z.re).sum()
    }
}

fn hermitian_defect(m: &DMatrix<Complex64>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in 0..=i {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn kernel_matrix(set: &BallSet, spec: &DiscretizationSpec) -> Result<KernelMatrix, SamplerError> {
    let needed = DiscretizationSpec::minimal_resolution(set);
    if spec.r < needed {
        return Err(SamplerError::ResolutionTooCoarse { r: spec.r, needed });
    }
    let n = spec.cell_count();
    if n > MAX_MATRIX_CELLS {
        return Err(SamplerError::ResolutionTooFine(n as u64));
    }
    let cells = discretize_window(spec.m, spec.r, spec.prime)?;
    // cell differences are cells again: x_i - x_j is cell (i - j) mod n
    let delta = spec.cell_measure();
    let values = cells
        .par_iter()
        .map(|y| Ok(ft_indicator(set, y)? * delta))
        .collect::<Result<Vec<_>, SamplerError>>()?;
    let entries = DMatrix::from_fn(n, n, |i, j| values[(i + n - j) % n]);
    let defect = hermitian_defect(&entries);
    if defect > HERMITIAN_TOL {
        return Err(SamplerError::NotHermitian(defect));
    }
    let k = KernelMatrix { spec: *spec, cells, entries };
    let expected = rational_to_f64(&expected_count(set, spec.m)?);
    if (k.trace() - expected).abs() > TRACE_TOL * expected.max(1.0) {
        return Err(SamplerError::TraceMismatch { trace: k.trace(), expected });
    }
    Ok(k)
}

#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    /// Sorted descending.
    pub values: Vec<f64>,
    /// Orthonormal columns matching `values`.
    pub vectors: DMatrix<Complex64>,
}

pub fn hermitian_eig(m: &DMatrix<Complex64>) -> Result<EigenDecomposition, SamplerError> {
    let scale = m.iter().fold(1.0f64, |a, z| a.max(z.norm()));
    let defect = hermitian_defect(m);
    if defect > HERMITIAN_TOL * scale {
        return Err(SamplerError::NotHermitian(defect));
    }
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(m.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(EigenDecomposition { values, vectors })
}

/// Eigen-decomposition of a kernel matrix with eigenvalues validated and
/// clamped into `[0, 1]`.
#[derive(Clone, Debug)]
pub struct DppSpectrum {
    pub spec: DiscretizationSpec,
    pub cells: Vec<PAdic>,
    pub eig: EigenDecomposition,
}

impl DppSpectrum {
    pub fn new(k: &KernelMatrix) -> Result<Self, SamplerError> {
        let mut eig = hermitian_eig(&k.entries)?;
        for v in &mut eig.values {
            if *v < -EIGEN_CLAMP_TOL || *v > 1.0 + EIGEN_CLAMP_TOL {
                return Err(SamplerError::EigenvalueOutOfRange(*v));
            }
            *v = v.clamp(0.0, 1.0);
        }
        Ok(Self { spec: k.spec, cells: k.cells.clone(), eig })
    }

    pub fn from_set(set: &BallSet, spec: &DiscretizationSpec) -> Result<Self, SamplerError> {
        Self::new(&kernel_matrix(set, spec)?)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PointConfiguration {
    pub prime: u32,
    pub m: i64,
    pub r: i64,
    pub seed: u64,
    pub trial: u64,
    /// Cell indices in increasing order.
    pub indices: Vec<usize>,
    #[serde(skip)]
    pub points: Vec<PAdic>,
}

impl PointConfiguration {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("point\n");
        for p in &self.points {
            out.push_str(&p.to_string());
            out.push('\n');
        }
        out
    }
}

/// The RNG stream of one trial.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Cell indices of one sample: Bernoulli selection of eigenvectors, then
/// sequential placement with deflation of the selected projection.
pub fn sample_indices(eig: &EigenDecomposition, rng: &mut impl Rng) -> Vec<usize> {
    let n = eig.vectors.nrows();
    let selected: Vec<usize> = eig.values.iter().enumerate().filter(|&(_, &l)| rng.random::<f64>() < l).map(|(i, _)| i).collect();
    let mut v: Vec<Vec<Complex64>> = selected.iter().map(|&c| eig.vectors.column(c).iter().copied().collect()).collect();
    let mut taken = vec![false; n];
    let mut out = Vec::with_capacity(v.len());
    while !v.is_empty() {
        let weights: Vec<f64> =
            (0..n).map(|i| if taken[i] { 0.0 } else { v.iter().map(|col| col[i].norm_sqr()).sum() }).collect();
        let total: f64 = weights.iter().sum();
        let u = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut pick = None;
        for (i, w) in weights.iter().enumerate() {
            if *w <= 0.0 {
                continue;
            }
            acc += w;
            pick = Some(i);
            if u < acc {
                break;
            }
        }
        let Some(i) = pick else { break };
        taken[i] = true;
        out.push(i);
        let j = (0..v.len()).max_by(|&a, &b| v[a][i].norm().total_cmp(&v[b][i].norm())).unwrap();
        let pivot = v.swap_remove(j);
        for col in &mut v {
            let f = col[i] / pivot[i];
            for (c, p) in col.iter_mut().zip(&pivot) {
                *c -= p * f;
            }
        }
        gram_schmidt(&mut v);
    }
    out.sort_unstable();
    out
}

fn gram_schmidt(v: &mut [Vec<Complex64>]) {
    for k in 0..v.len() {
        let (done, rest) = v.split_at_mut(k);
        let col = &mut rest[0];
        for q in done.iter() {
            let dot: Complex64 = q.iter().zip(col.iter()).map(|(a, b)| a.conj() * b).sum();
            for (c, a) in col.iter_mut().zip(q) {
                *c -= a * dot;
            }
        }
        let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for c in col.iter_mut() {
            *c /= norm;
        }
    }
}

pub fn sample_dpp(spectrum: &DppSpectrum, seed: u64, trial: u64) -> PointConfiguration {
    let indices = sample_indices(&spectrum.eig, &mut trial_rng(seed, trial));
    PointConfiguration {
        prime: spectrum.spec.prime,
        m: spectrum.spec.m,
        r: spectrum.spec.r,
        seed,
        trial,
        points: indices.iter().map(|&i| spectrum.cells[i].clone()).collect(),
        indices,
    }
}

/// Counts per coset of `B(0, p^sub_m)` for every trial, in trial order.
pub fn coset_counts(spectrum: &DppSpectrum, sub_m: i64, trials: u64, seed: u64) -> Vec<Vec<u32>> {
    let spec = spectrum.spec;
    let cosets = (spec.prime as usize).pow((spec.m - sub_m) as u32);
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut counts = vec![0u32; cosets];
            for i in sample_indices(&spectrum.eig, &mut trial_rng(seed, t)) {
                counts[spec.coset_of(i, sub_m)] += 1;
            }
            counts
        })
        .collect()
}

/// Mean, variance and their standard errors of a sample.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Moments {
    pub mean: f64,
    pub mean_se: f64,
    pub variance: f64,
    pub variance_se: f64,
}

impl Moments {
    pub fn of(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let m2 = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        let m4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
        let variance = if n > 1.0 { m2 * n / (n - 1.0) } else { 0.0 };
        Self { mean, mean_se: (variance / n).sqrt(), variance, variance_se: ((m4 - m2 * m2).max(0.0) / n).sqrt() }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CovarianceEstimate {
    pub center: String,
    pub empirical: f64,
    pub se: f64,
    pub exact: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct McCountStats {
    pub spec: DiscretizationSpec,
    pub sub_m: i64,
    pub trials: u64,
    pub seed: u64,
    pub moments: Moments,
    pub expected_mean: f64,
    pub expected_variance: f64,
    pub covariances: Vec<CovarianceEstimate>,
}

impl McCountStats {
    pub fn mean_within(&self, k: f64) -> bool {
        (self.moments.mean - self.expected_mean).abs() <= k * self.moments.mean_se + 1e-9
    }

    pub fn variance_within(&self, k: f64) -> bool {
        (self.moments.variance - self.expected_variance).abs() <= k * self.moments.variance_se + 1e-9
    }
}

fn check_trials(trials: u64) -> Result<(), SamplerError> {
    if trials == 0 {
        return Err(SamplerError::NoTrials);
    }
    Ok(())
}

/// Empirical statistics of the counts in the cosets of `B(0, p^sub_m)`.
pub fn mc_count_stats(
    set: &BallSet,
    spec: &DiscretizationSpec,
    sub_m: i64,
    trials: u64,
    seed: u64,
) -> Result<McCountStats, SamplerError> {
    check_trials(trials)?;
    if sub_m < 1 || sub_m > spec.m {
        return Err(SamplerError::InnerWindow { inner: sub_m, m: spec.m });
    }
    let spectrum = DppSpectrum::from_set(set, spec)?;
    let counts = coset_counts(&spectrum, sub_m, trials, seed);
    let n0: Vec<f64> = counts.iter().map(|c| c[0] as f64).collect();
    let moments = Moments::of(&n0);
    let mut covariances = Vec::new();
    for x in &representatives(set.prime(), sub_m, spec.m)?[1..] {
        let idx = index_of(x, spec.m);
        let nx: Vec<f64> = counts.iter().map(|c| c[idx] as f64).collect();
        let mx = nx.iter().sum::<f64>() / trials as f64;
        let prods: Vec<f64> = nx.iter().zip(&n0).map(|(a, b)| (a - mx) * (b - moments.mean)).collect();
        let pm = Moments::of(&prods);
        covariances.push(CovarianceEstimate {
            center: x.to_string(),
            empirical: pm.mean,
            se: pm.mean_se,
            exact: covariance(set, sub_m, x)?.to_complex().re,
        });
    }
    Ok(McCountStats {
        spec: *spec,
        sub_m,
        trials,
        seed,
        moments,
        expected_mean: rational_to_f64(&expected_count(set, sub_m)?),
        expected_variance: rational_to_f64(&variance_count(set, sub_m)?),
        covariances,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct RigidityExperiment {
    pub spec: DiscretizationSpec,
    pub inner_m: i64,
    pub trials: u64,
    pub seed: u64,
    pub prediction_rmse: f64,
    pub rmse_se: f64,
    pub baseline_sd: f64,
    /// Least residual predicted by the normal equations.
    pub residual_sd: f64,
    /// Fraction of trials where the rounded prediction equals the count.
    pub rounding_success: f64,
    /// Chebyshev lower bound `1 - 4 rmse^2` on that fraction.
    pub chebyshev_floor: f64,
    pub coefficients_used: PredictionSolution,
}

impl RigidityExperiment {
    pub fn rmse_matches_residual(&self, k: f64) -> bool {
        (self.prediction_rmse - self.residual_sd).abs() <= k * self.rmse_se + 1e-9
    }
}

/// Predict `N_0` of `B(0, p^inner_m)` from the other cosets of the window.
pub fn mc_rigidity_experiment(
    set: &BallSet,
    spec: &DiscretizationSpec,
    inner_m: i64,
    trials: u64,
    seed: u64,
) -> Result<RigidityExperiment, SamplerError> {
    check_trials(trials)?;
    if inner_m >= spec.m || inner_m < 1 {
        return Err(SamplerError::InnerWindow { inner: inner_m, m: spec.m });
    }
    let solution = linear_predictor(set, inner_m, spec.m)?;
    let mean = rational_to_f64(&expected_count(set, inner_m)?);
    let spectrum = DppSpectrum::from_set(set, spec)?;
    let counts = coset_counts(&spectrum, inner_m, trials, seed);
    let slots: Vec<usize> = solution.centers.iter().map(|x| index_of(x, spec.m)).collect();
    let mut sq_errors = Vec::with_capacity(counts.len());
    let mut rounded = 0u64;
    for c in &counts {
        let prediction = mean + solution.predict_deviation(mean, |i| c[slots[i]] as f64);
        let actual = c[0] as f64;
        if prediction.round() == actual {
            rounded += 1;
        }
        sq_errors.push((prediction - actual).powi(2));
    }
    let mse = Moments::of(&sq_errors);
    let rmse = mse.mean.sqrt();
    let rmse_se = if rmse > 0.0 { mse.mean_se / (2.0 * rmse) } else { 0.0 };
    Ok(RigidityExperiment {
        spec: *spec,
        inner_m,
        trials,
        seed,
        prediction_rmse: rmse,
        rmse_se,
        baseline_sd: solution.variance.sqrt(),
        residual_sd: solution.residual_sd,
        rounding_success: rounded as f64 / trials as f64,
        chebyshev_floor: (1.0 - 4.0 * mse.mean).max(0.0),
        coefficients_used: solution,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn worked() -> BallSet {
        BallSet::from_literals(2, &[("0", -1), ("1", -2)]).unwrap()
    }

    #[test]
    fn window_cells() {
        let cells = discretize_window(1, 0, 2).unwrap();
        let lits: Vec<String> = cells.iter().map(|c| c.to_string()).collect();
        assert_eq!(lits, ["0", "0.1"]);
        assert_eq!(discretize_window(1, 1, 2).unwrap().len(), 4);
        let cells = discretize_window(2, 1, 3).unwrap();
        for (i, a) in cells.iter().enumerate() {
            assert_eq!(index_of(a, 2), i);
            for b in &cells[..i] {
                assert!(a.sub(b).unwrap().norm() > crate::padic::rational_pow(3, -1));
            }
        }
        assert!(matches!(discretize_window(10, 10, 2), Err(SamplerError::ResolutionTooFine(_))));
        assert!(matches!(discretize_window(0, 1, 2), Err(SamplerError::InvalidWindow(0))));
    }

    #[test]
    fn resolution_must_cover_the_set() {
        let s = BallSet::from_literals(2, &[("0.1", 1)]).unwrap();
        assert_eq!(DiscretizationSpec::minimal_resolution(&s), 1);
        let spec = DiscretizationSpec::new(2, 2, 0).unwrap();
        assert!(matches!(kernel_matrix(&s, &spec), Err(SamplerError::ResolutionTooCoarse { .. })));
    }

    #[test]
    fn single_ball_kernel_is_block_projection() {
        let s = BallSet::from_literals(3, &[("0", -1)]).unwrap();
        let spec = DiscretizationSpec::new(3, 2, 0).unwrap();
        let k = kernel_matrix(&s, &spec).unwrap();
        assert!((k.trace() - 3.0).abs() < 1e-12);
        let eig = hermitian_eig(&k.entries).unwrap();
        for v in &eig.values {
            assert!(v.abs() < 1e-12 || (v - 1.0).abs() < 1e-12, "{v}");
        }
        assert_eq!(eig.values.iter().filter(|v| **v > 0.5).count(), 3);
    }

    #[test]
    fn eig_reconstructs() {
        let k = kernel_matrix(&worked(), &DiscretizationSpec::new(2, 3, 1).unwrap()).unwrap();
        let e = hermitian_eig(&k.entries).unwrap();
        assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
        let lambda = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            e.values.len(),
            e.values.iter().map(|&l| Complex64::new(l, 0.0)),
        ));
        let rebuilt = &e.vectors * lambda * e.vectors.adjoint();
        assert!((rebuilt - &k.entries).norm() < 1e-8);
        let gram = e.vectors.adjoint() * &e.vectors;
        assert!((gram - DMatrix::identity(e.values.len(), e.values.len())).norm() < 1e-10);
        assert!((e.values.iter().sum::<f64>() - k.trace()).abs() < 1e-10);
    }

    #[test]
    fn identity_has_flat_spectrum() {
        let e = hermitian_eig(&DMatrix::identity(5, 5)).unwrap();
        assert!(e.values.iter().all(|&v| (v - 1.0).abs() < 1e-15));
    }

    #[test]
    fn non_hermitian_rejected() {
        let mut m = DMatrix::<Complex64>::identity(2, 2);
        m[(0, 1)] = Complex64::new(0.0, 1.0);
        assert!(matches!(hermitian_eig(&m), Err(SamplerError::NotHermitian(_))));
    }

    #[test]
    fn deterministic_case_one_point_per_coset() {
        let s = BallSet::from_literals(2, &[("0", -1)]).unwrap();
        let spec = DiscretizationSpec::new(2, 3, 0).unwrap();
        let spectrum = DppSpectrum::from_set(&s, &spec).unwrap();
        for t in 0..200 {
            let c = sample_dpp(&spectrum, 1, t);
            assert_eq!(c.indices.len(), 4);
            let mut cosets: Vec<usize> = c.indices.iter().map(|i| spec.coset_of(*i, 1)).collect();
            cosets.sort_unstable();
            assert_eq!(cosets, [0, 1, 2, 3]);
        }
    }

    #[test]
    fn same_seed_same_sample() {
        let spec = DiscretizationSpec::new(2, 3, 1).unwrap();
        let spectrum = DppSpectrum::from_set(&worked(), &spec).unwrap();
        let a = sample_dpp(&spectrum, 0xDA7A, 3);
        let b = sample_dpp(&spectrum, 0xDA7A, 3);
        assert_eq!(a.indices, b.indices);
        assert_eq!(a.to_csv(), b.to_csv());
    }

    #[test]
    fn unit_ball_counts_are_deterministic() {
        let s = BallSet::from_literals(2, &[("0", 0)]).unwrap();
        let spec = DiscretizationSpec::new(2, 3, 0).unwrap();
        let stats = mc_count_stats(&s, &spec, 1, 200, 5).unwrap();
        assert_eq!(stats.moments.variance, 0.0);
        assert_eq!(stats.moments.mean, 2.0);
    }

    #[test]
    fn worked_example_moments() {
        let spec = DiscretizationSpec::new(2, 3, 0).unwrap();
        let stats = mc_count_stats(&worked(), &spec, 1, 4000, 11).unwrap();
        assert_eq!(stats.expected_mean, 1.5);
        assert_eq!(stats.expected_variance, 0.25);
        assert!(stats.mean_within(3.0) && stats.variance_within(3.0), "{stats:?}");
        let c = &stats.covariances[0];
        assert_eq!(c.exact, -0.25);
        assert!((c.empirical - c.exact).abs() <= 3.0 * c.se + 1e-9);
    }

    #[test]
    fn rigidity_experiment_on_worked_example() {
        let spec = DiscretizationSpec::new(2, 3, 0).unwrap();
        let e = mc_rigidity_experiment(&worked(), &spec, 1, 500, 2).unwrap();
        assert!(e.prediction_rmse < 1e-9);
        assert!(e.rmse_matches_residual(3.0));
        assert_eq!(e.rounding_success, 1.0);
        assert!(matches!(mc_rigidity_experiment(&worked(), &spec, 3, 10, 2), Err(SamplerError::InnerWindow { .. })));
    }
}
