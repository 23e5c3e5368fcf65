//! Acceptance run: one PASS/FAIL line per criterion, runtime included.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_traits::Zero;
use padic_dpp::ball::BallSet;
use padic_dpp::covariance::{
    cov_sum_zero_check, cov_tail_sum, covariance_table, prop_mul_constant, variance_count,
};
use padic_dpp::fourier::{ft_indicator_exact, PairTable};
use padic_dpp::padic::{rational_pow, rational_to_f64};
use padic_dpp::sampler::{
    coset_counts, hermitian_eig, kernel_matrix, mc_count_stats, mc_rigidity_experiment, DiscretizationSpec,
    DppSpectrum,
};
use padic_dpp::spectral::{divergence_partial, linear_predictor, reference_divergence, SpectralDensity};
use padic_dpp::{PAdic, Rational};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Number of standard errors allowed between Monte Carlo and exact values.
const SIGMAS: f64 = 3.0;
const MC_TRIALS: u64 = 10_000;
const MC_SEED: u64 = 0xDA7A;
const EIG_TOL: f64 = 1e-9;
const TRACE_TOL: f64 = 1e-10;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

fn criterion_1() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut probes = 0;
    let mut failures = 0;
    for p in [2u32, 3, 5] {
        for n in -2..=3i64 {
            let set = common::lattice(p, n);
            for i in 0..1000 {
                let y = if i == 0 {
                    PAdic::zero(p)
                } else {
                    let v: i64 = rng.random_range(-n - 3..=-n + 3);
                    let mut digits: Vec<u32> = (0..4).map(|_| rng.random_range(0..p)).collect();
                    digits[0] = rng.random_range(1..p);
                    PAdic::finite(p, v, &digits, 40).unwrap()
                };
                let expected = if y.ord_at_least(-n).unwrap() { rational_pow(p, -n) } else { Rational::zero() };
                probes += 1;
                if ft_indicator_exact(&set, &y).unwrap().to_rational() != Some(expected) {
                    failures += 1;
                }
            }
        }
    }
    verdict(failures == 0, format!("{probes} probes, {failures} mismatches (exact)"))
}

fn criterion_2(corpus: &[BallSet]) -> Verdict {
    let bad = corpus.iter().filter(|s| PairTable::new(s).unwrap().parseval_total() != s.measure()).count();
    verdict(bad == 0, format!("{} sets, {bad} mismatches (exact)", corpus.len()))
}

fn criterion_3(corpus: &[BallSet]) -> Verdict {
    let mut residual_bad = 0;
    let mut table_bad = 0;
    for s in corpus {
        for m in 1..=3 {
            if !cov_sum_zero_check(s, m).unwrap().is_zero() {
                residual_bad += 1;
            }
            let horizon = s.finest_level().unwrap().max(m);
            if !covariance_table(s, m, horizon).unwrap().partial_sum().is_zero() {
                table_bad += 1;
            }
        }
    }
    verdict(
        residual_bad == 0 && table_bad == 0,
        format!("300 (set, m) pairs, {residual_bad} nonzero residuals, {table_bad} nonzero table sums"),
    )
}

fn criterion_4(corpus: &[BallSet]) -> Verdict {
    let mut checks = 0;
    let mut bad = 0;
    for s in corpus {
        let pairs = PairTable::new(s).unwrap();
        let finest = s.finest_level().unwrap();
        for m in 1..=3 {
            let q_m = rational_pow(s.prime(), m);
            for n in m + 1..=finest + 2 {
                checks += 1;
                let tail = cov_tail_sum(s, m, n).unwrap();
                let l2 = &q_m * pairs.l2_tail(n);
                let defect = &q_m * s.avg_translate_defect(n).unwrap();
                if tail != l2 || l2 != defect {
                    bad += 1;
                }
            }
        }
    }
    verdict(bad == 0, format!("{checks} (set, m, n) triples, {bad} mismatches (exact)"))
}

fn criterion_5(corpus: &[BallSet]) -> Verdict {
    let mut checks = 0;
    let mut bad = 0;
    let mut tightest = 0.0f64;
    for s in corpus {
        let profile = s.multiplicity_profile().unwrap();
        let constant = prop_mul_constant(s.prime(), profile.max_multiplicity);
        for n in profile.l0.min(0)..=s.finest_level().unwrap() + 2 {
            checks += 1;
            let scaled = rational_pow(s.prime(), n) * s.avg_translate_defect(n).unwrap();
            tightest = tightest.max(rational_to_f64(&(&scaled / &constant)));
            if scaled > constant {
                bad += 1;
            }
        }
    }
    let worked = common::worked().avg_translate_defect(0).unwrap();
    verdict(
        bad == 0 && worked == q(3, 16),
        format!("{checks} levels, {bad} violations, max ratio to bound {tightest:.3}; worked defect(0) = {worked}"),
    )
}

fn criterion_6() -> Verdict {
    let mut bad = 0;
    for p in [2u32, 3, 5] {
        for depth in 1..=20i64 {
            let expected = q(depth * (p as i64 - 1), p as i64);
            if reference_divergence(p, depth) != expected {
                bad += 1;
            }
        }
    }
    // the report carries the same reference
    let d = SpectralDensity::new(&common::worked(), 1, 2).unwrap();
    let report = divergence_partial(&d, 10).unwrap();
    verdict(bad == 0 && report.reference == "5", format!("60 partial sums, {bad} mismatches; q=2 depth 10 -> {}", report.reference))
}

fn criterion_7() -> Verdict {
    let cases = [(2u32, -1i64), (2, 0), (2, 1), (2, 2), (2, 4), (2, 6), (3, -1), (3, 0), (3, 1), (3, 3), (5, -1), (5, 0)];
    let mut samples = 0u64;
    let mut failures = 0u64;
    let mut largest = 0;
    for (p, n) in cases {
        let set = common::lattice(p, n);
        let m = n + 2;
        let spec = DiscretizationSpec::new(p, m, DiscretizationSpec::minimal_resolution(&set)).unwrap();
        largest = largest.max(spec.cell_count());
        let spectrum = DppSpectrum::from_set(&set, &spec).unwrap();
        for counts in coset_counts(&spectrum, n, MC_TRIALS, MC_SEED) {
            samples += 1;
            if counts.iter().any(|&c| c != 1) {
                failures += 1;
            }
        }
    }
    verdict(
        failures == 0,
        format!("{} lattices, {samples} samples, up to {largest} cells, {failures} samples off one-per-coset", cases.len()),
    )
}

fn nondegenerate_sets() -> Vec<BallSet> {
    vec![
        common::worked(),
        BallSet::from_literals(2, &[("0", -1), ("1", -2), ("11", -3)]).unwrap(),
        BallSet::from_literals(3, &[("0", -1), ("1", -2), ("12", -3)]).unwrap(),
        BallSet::from_literals(3, &[("1", -1), ("2", -2)]).unwrap(),
        BallSet::from_literals(5, &[("0", -1), ("3", -2)]).unwrap(),
    ]
}

fn criterion_8() -> Verdict {
    let mut lines = Vec::new();
    let mut pass = true;
    for s in nondegenerate_sets() {
        assert!(variance_count(&s, 1).unwrap() > Rational::zero());
        let m = 2;
        let spec = DiscretizationSpec::new(s.prime(), m, DiscretizationSpec::minimal_resolution(&s)).unwrap();
        let stats = mc_count_stats(&s, &spec, 1, MC_TRIALS, MC_SEED).unwrap();
        let ok = stats.mean_within(SIGMAS) && stats.variance_within(SIGMAS);
        pass &= ok;
        lines.push(format!(
            "p={} mean {:.4}/{:.4} (se {:.4}) var {:.4}/{:.4} (se {:.4}){}",
            s.prime(),
            stats.moments.mean,
            stats.expected_mean,
            stats.moments.mean_se,
            stats.moments.variance,
            stats.expected_variance,
            stats.moments.variance_se,
            if ok { "" } else { " OUT" },
        ));
    }
    verdict(pass, lines.join("; "))
}

fn criterion_9() -> Verdict {
    let s = common::worked();
    let m = 1;
    let horizons: Vec<i64> = (m + 1..=m + 4).collect();
    let residuals: Vec<f64> = horizons.iter().map(|&h| linear_predictor(&s, m, h).unwrap().residual_sd).collect();
    let decreasing = residuals.windows(2).all(|w| w[1] < w[0]);
    let mut matches = true;
    let mut rmses = Vec::new();
    let mut last = None;
    for &h in &horizons {
        let spec = DiscretizationSpec::new(2, h, DiscretizationSpec::minimal_resolution(&s)).unwrap();
        let e = mc_rigidity_experiment(&s, &spec, m, MC_TRIALS, MC_SEED).unwrap();
        matches &= e.rmse_matches_residual(SIGMAS);
        rmses.push(format!("{:.2e}", e.prediction_rmse));
        last = Some(e);
    }
    let last = last.unwrap();
    let small = last.prediction_rmse <= 0.25 * last.baseline_sd;
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.2e}")).collect::<Vec<_>>().join(", ");
    verdict(
        decreasing && matches && small,
        format!(
            "residual_sd over horizons {horizons:?} = [{}] strictly decreasing: {decreasing}; \
             rmse [{}] within {SIGMAS} se: {matches}; final rmse <= 0.25 baseline {:.3}: {small}",
            fmt(&residuals),
            rmses.join(", "),
            last.baseline_sd,
        ),
    )
}

fn criterion_10(corpus: &[BallSet]) -> Verdict {
    let mut matrices = 0;
    let mut bad = 0;
    let mut worst_low = 0.0f64;
    let mut worst_high = 0.0f64;
    for s in corpus {
        let r0 = DiscretizationSpec::minimal_resolution(s);
        for m in 1..=2 {
            for r in r0..=r0 + 1 {
                let spec = DiscretizationSpec::new(s.prime(), m, r).unwrap();
                if spec.cell_count() > 256 {
                    continue;
                }
                matrices += 1;
                let k = kernel_matrix(s, &spec).unwrap();
                let eig = hermitian_eig(&k.entries).unwrap();
                let lo = *eig.values.last().unwrap();
                let hi = eig.values[0];
                worst_low = worst_low.min(lo);
                worst_high = worst_high.max(hi - 1.0);
                let expected = rational_to_f64(&(rational_pow(s.prime(), m) * s.measure()));
                if lo < -EIG_TOL || hi > 1.0 + EIG_TOL || (k.trace() - expected).abs() > TRACE_TOL {
                    bad += 1;
                }
            }
        }
    }
    verdict(
        bad == 0,
        format!("{matrices} matrices, {bad} out of tolerance; min eigenvalue {worst_low:.2e}, max excess {worst_high:.2e}"),
    )
}

/// Criterion number, runtime budget and check.
type Run<'a> = (u32, Duration, Box<dyn Fn() -> Verdict + 'a>);

fn main() -> ExitCode {
    let corpus = common::corpus();
    let runs: Vec<Run> = vec![
        (1, Duration::from_secs(1), Box::new(criterion_1)),
        (2, Duration::from_secs(5), Box::new(|| criterion_2(&corpus))),
        (3, Duration::from_secs(10), Box::new(|| criterion_3(&corpus))),
        (4, Duration::from_secs(30), Box::new(|| criterion_4(&corpus))),
        (5, Duration::from_secs(5), Box::new(|| criterion_5(&corpus))),
        (6, Duration::from_secs(1), Box::new(criterion_6)),
        (7, Duration::from_secs(60), Box::new(criterion_7)),
        (8, Duration::from_secs(300), Box::new(criterion_8)),
        (9, Duration::from_secs(300), Box::new(criterion_9)),
        (10, Duration::from_secs(30), Box::new(|| criterion_10(&corpus))),
    ];
    let mut failed = 0;
    for (id, budget, run) in runs {
        let start = Instant::now();
        let v = run();
        let elapsed = start.elapsed();
        let pass = v.pass && elapsed < budget;
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {id:>2} {}: {} [{:.2}s, budget {}s]",
            if pass { "PASS" } else { "FAIL" },
            v.detail,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    println!("{} of 10 criteria passed", 10 - failed);
    if failed > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
