use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use padic_dpp::ball::BallError;
use padic_dpp::covariance::{
    cov_sum_zero_check, cov_tail_sum, covariance_table, prop_mul_constant, rigidity_check, CovarianceError,
};
use padic_dpp::fourier::{brute_ft_oracle, ft_indicator, ft_indicator_exact, FourierError, PairTable};
use padic_dpp::padic::{rational_pow, residues};
use padic_dpp::sampler::{mc_rigidity_experiment, sample_dpp, DiscretizationSpec, DppSpectrum, SamplerError};
use padic_dpp::spectral::{divergence_partial, lipschitz_check, linear_predictor, SpectralDensity, SpectralError};
use padic_dpp::{BallSet, PAdic, PadicError, Rational};

const DEFAULT_SEED: u64 = 0xDA7A;
/// Digits kept on sample points when evaluating transforms.
const PROBE_CAP: i64 = 64;

#[derive(Parser)]
#[command(name = "padic-dpp", version, about = "Exact statistics of determinantal point processes on Q_p")]
struct Cli {
    /// Worker threads for parallel sections (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct SetArg {
    /// Ball set as inline JSON (`{"p":2,"balls":[{"center":"0","radius_exp":-1}]}`) or a path to a JSON file.
    #[arg(long = "set")]
    set: String,
}

#[derive(Args, Clone)]
struct OutArg {
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the Fourier transform of 1_S on a grid of shells (CSV).
    Ft {
        #[command(flatten)]
        set: SetArg,
        /// Digits per probe below the leading one.
        #[arg(long, allow_negative_numbers = true, default_value_t = 2)]
        depth: i64,
        #[command(flatten)]
        out: OutArg,
    },
    /// Covariance table of the window counts (CSV).
    Cov {
        #[command(flatten)]
        set: SetArg,
        #[arg(long, allow_negative_numbers = true)]
        m: i64,
        #[arg(long, allow_negative_numbers = true)]
        horizon: i64,
        #[command(flatten)]
        out: OutArg,
    },
    /// Rigidity report with the translate-defect table (JSON).
    CheckRigidity {
        #[command(flatten)]
        set: SetArg,
        #[command(flatten)]
        out: OutArg,
    },
    /// Spectral density probes, Lipschitz check and divergence partials (JSON).
    Spectral {
        #[command(flatten)]
        set: SetArg,
        #[arg(long, allow_negative_numbers = true)]
        m: i64,
        #[arg(long, allow_negative_numbers = true)]
        horizon: i64,
        #[arg(long, allow_negative_numbers = true, default_value_t = 8)]
        depth: i64,
        #[command(flatten)]
        out: OutArg,
    },
    /// Linear predictor of the center count (JSON).
    Predict {
        #[command(flatten)]
        set: SetArg,
        #[arg(long, allow_negative_numbers = true)]
        m: i64,
        #[arg(long, allow_negative_numbers = true)]
        horizon: i64,
        #[command(flatten)]
        out: OutArg,
    },
    /// One sampled configuration in B(0, p^m) (CSV, one point per row).
    Sample {
        #[command(flatten)]
        set: SetArg,
        #[arg(long, allow_negative_numbers = true)]
        m: i64,
        /// Cell resolution; defaults to the coarsest exact one.
        #[arg(long, allow_negative_numbers = true)]
        r: Option<i64>,
        /// Seed of the random stream.
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Stream index within the seed.
        #[arg(long, default_value_t = 0)]
        trial: u64,
        #[command(flatten)]
        out: OutArg,
    },
    /// Predict the count of B(0, p^m) from the other cosets of B(0, p^horizon) by Monte Carlo (JSON).
    Experiment {
        #[command(flatten)]
        set: SetArg,
        /// Exponent of the predicted ball.
        #[arg(long, allow_negative_numbers = true)]
        m: i64,
        /// Exponent of the sampled window.
        #[arg(long, allow_negative_numbers = true)]
        horizon: i64,
        #[arg(long, allow_negative_numbers = true)]
        r: Option<i64>,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        /// Seed of the random streams (default 0xDA7A = 55930).
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[command(flatten)]
        out: OutArg,
    },
    /// Run the exact identity suite and print one line per check.
    Identities {
        #[command(flatten)]
        set: SetArg,
        /// Largest window exponent checked.
        #[arg(long, allow_negative_numbers = true, default_value_t = 3)]
        m: i64,
    },
}

/// An input problem, reported with exit code 2.
#[derive(Debug)]
struct Invalid(String);

impl std::fmt::Display for Invalid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Invalid {}

fn invalid(msg: impl Into<String>) -> anyhow::Error {
    Invalid(msg.into()).into()
}

fn load_set(arg: &SetArg) -> Result<BallSet> {
    let text = if arg.set.trim_start().starts_with('{') {
        arg.set.clone()
    } else {
        std::fs::read_to_string(&arg.set).map_err(|e| invalid(format!("cannot read ball set {}: {e}", arg.set)))?
    };
    let (set, canonical) = BallSet::from_json(&text)?;
    if !canonical {
        eprintln!("note: ball set rewritten in canonical form {}", set.to_json());
    }
    Ok(set)
}

fn emit(out: &OutArg, text: &str) -> Result<()> {
    match &out.out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json(value: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data");
    s.push('\n');
    s
}

fn resolution(set: &BallSet, r: Option<i64>) -> i64 {
    r.unwrap_or_else(|| DiscretizationSpec::minimal_resolution(set))
}

fn ft_grid(set: &BallSet, depth: i64) -> Result<String> {
    if depth < 0 {
        return Err(invalid("--depth must be nonnegative"));
    }
    let p = set.prime();
    let pairs = PairTable::new(set)?;
    let finest = set.finest_level().unwrap_or(0);
    let mut csv = String::from("y,norm,re,im,exact\n");
    for l in pairs.flat_level() - 1..=finest + 1 {
        for y in residues(p, -l, -l + depth + 1).filter(|y| y.valuation() == Some(-l)) {
            let y = y.extend_cap(PROBE_CAP);
            let z = ft_indicator(set, &y)?;
            let exact = ft_indicator_exact(set, &y)?;
            writeln!(csv, "{y},{},{:e},{:e},{exact}", y.norm(), z.re, z.im).unwrap();
        }
    }
    Ok(csv)
}

fn spectral_report(set: &BallSet, m: i64, horizon: i64, depth: i64) -> Result<String> {
    let d = SpectralDensity::new(set, m, horizon)?;
    let p = set.prime();
    let cap = d.resolution().max(depth) + 1;
    let mut probes = Vec::new();
    let mut hs: Vec<PAdic> = residues(p, 0, d.resolution().min(3)).map(|h| h.extend_cap(cap)).collect();
    for k in 1..=depth {
        hs.push(PAdic::finite(p, k, &[1], cap)?);
    }
    for h in &hs {
        probes.push(json!({
            "h": h.to_string(),
            "value": d.eval(h)?,
            "exact": d.eval_exact(h)?.to_string(),
        }));
    }
    let divergence = (1..=depth).map(|k| divergence_partial(&d, k)).collect::<Result<Vec<_>, _>>()?;
    let report = json!({
        "m": m,
        "horizon": horizon,
        "scale_offset": d.offset(),
        "tail_bound": d.tail_bound().to_string(),
        "probes": probes,
        "lipschitz": lipschitz_check(&d, depth)?,
        "divergence": divergence,
    });
    Ok(to_json(&report))
}

struct Checks {
    lines: String,
    failures: usize,
}

impl Checks {
    fn record(&mut self, name: &str, ok: bool, detail: String) {
        if !ok {
            self.failures += 1;
        }
        writeln!(self.lines, "{} {name}: {detail}", if ok { "PASS" } else { "FAIL" }).unwrap();
    }
}

fn identities(set: &BallSet, max_m: i64) -> Result<Checks> {
    if max_m < 1 {
        return Err(invalid("--m must be at least 1"));
    }
    let p = set.prime();
    let pairs = PairTable::new(set)?;
    let measure = set.measure();
    let finest = set.finest_level().unwrap_or(0);
    let mut c = Checks { lines: String::new(), failures: 0 };

    let total = pairs.parseval_total();
    c.record("parseval", total == measure, format!("{total} vs measure {measure}"));

    let lo = set.coarsest_level().unwrap_or(0).min(0);
    let bad: Vec<i64> = (lo..=finest + 1)
        .filter(|&n| set.avg_translate_defect(n).map_or(true, |d| d != pairs.l2_tail(n)))
        .collect();
    c.record("l2 tail equals translate defect", bad.is_empty(), format!("n in {lo}..={}, mismatches {bad:?}", finest + 1));

    let profile = set.multiplicity_profile();
    let constant = prop_mul_constant(p, profile.as_ref().map_or(0, |pr| pr.max_multiplicity));
    let over: Vec<i64> = (lo..=finest + 1)
        .filter(|&n| set.avg_translate_defect(n).map_or(true, |d| rational_pow(p, n) * d > constant))
        .collect();
    c.record("multiplicity bound", over.is_empty(), format!("constant {constant}, violations {over:?}"));

    let mut oracle_ok = true;
    for l in pairs.flat_level()..=finest {
        for y in residues(p, -l, -l + 2).filter(|y| y.valuation() == Some(-l)) {
            let depth = finest.max(l).max(0);
            oracle_ok &= brute_ft_oracle(set, &y.extend_cap(PROBE_CAP), depth)? == ft_indicator_exact(set, &y.extend_cap(PROBE_CAP))?;
        }
    }
    c.record("transform matches Riemann sums", oracle_ok, format!("levels {}..={finest}", pairs.flat_level()));

    for m in 1..=max_m {
        let residual = cov_sum_zero_check(set, m)?;
        c.record(&format!("zero sum m={m}"), residual == Rational::from_integer(0.into()), format!("residual {residual}"));
        let table = covariance_table(set, m, finest.max(m))?;
        let partial = table.partial_sum();
        c.record(&format!("covariance table sums to zero m={m}"), partial.is_zero(), format!("sum {partial}"));
        let mut tail_ok = true;
        for n in m + 1..=finest + 2 {
            let q_m = rational_pow(p, m);
            let tail = cov_tail_sum(set, m, n)?;
            tail_ok &= tail == &q_m * pairs.l2_tail(n) && tail == q_m * set.avg_translate_defect(n)?;
        }
        c.record(&format!("tail identity m={m}"), tail_ok, format!("n in {}..={}", m + 1, finest + 2));
    }

    let mut last = f64::INFINITY;
    let mut monotone = true;
    let mut curve = Vec::new();
    for horizon in 2..=finest.max(1) + 3 {
        let sol = linear_predictor(set, 1, horizon)?;
        monotone &= sol.residual_sd <= last + 1e-12;
        last = sol.residual_sd;
        curve.push(format!("{:.3e}", sol.residual_sd));
    }
    c.record("prediction residual nonincreasing m=1", monotone, format!("[{}]", curve.join(", ")));
    Ok(c)
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring threads")?;
    }
    match cli.command {
        Command::Ft { set, depth, out } => emit(&out, &ft_grid(&load_set(&set)?, depth)?),
        Command::Cov { set, m, horizon, out } => {
            let s = load_set(&set)?;
            if horizon < m {
                return Err(invalid("--horizon must be at least --m"));
            }
            emit(&out, &covariance_table(&s, m, horizon)?.to_csv())
        }
        Command::CheckRigidity { set, out } => emit(&out, &to_json(&rigidity_check(&load_set(&set)?)?)),
        Command::Spectral { set, m, horizon, depth, out } => {
            emit(&out, &spectral_report(&load_set(&set)?, m, horizon, depth)?)
        }
        Command::Predict { set, m, horizon, out } => {
            emit(&out, &to_json(&linear_predictor(&load_set(&set)?, m, horizon)?))
        }
        Command::Sample { set, m, r, seed, trial, out } => {
            let s = load_set(&set)?;
            let spec = DiscretizationSpec::new(s.prime(), m, resolution(&s, r))?;
            let spectrum = DppSpectrum::from_set(&s, &spec)?;
            emit(&out, &sample_dpp(&spectrum, seed, trial).to_csv())
        }
        Command::Experiment { set, m, horizon, r, trials, seed, out } => {
            let s = load_set(&set)?;
            let spec = DiscretizationSpec::new(s.prime(), horizon, resolution(&s, r))?;
            emit(&out, &to_json(&mc_rigidity_experiment(&s, &spec, m, trials, seed)?))
        }
        Command::Identities { set, m } => {
            let checks = identities(&load_set(&set)?, m)?;
            print!("{}", checks.lines);
            if checks.failures > 0 {
                anyhow::bail!("{} identity checks failed", checks.failures);
            }
            Ok(())
        }
    }
}

/// Exit code for a failure: 2 for bad input or violated preconditions,
/// 1 for broken internal invariants and I/O failures.
fn exit_code(err: &anyhow::Error) -> u8 {
    if err.is::<Invalid>() || err.is::<BallError>() || err.is::<PadicError>() || err.is::<FourierError>() {
        return 2;
    }
    if let Some(e) = err.downcast_ref::<CovarianceError>() {
        return if matches!(e, CovarianceError::IrrationalSum(_)) { 1 } else { 2 };
    }
    if let Some(e) = err.downcast_ref::<SpectralError>() {
        return if matches!(e, SpectralError::NotReal(_)) { 1 } else { 2 };
    }
    if let Some(e) = err.downcast_ref::<SamplerError>() {
        return match e {
            SamplerError::NotHermitian(_) | SamplerError::EigenvalueOutOfRange(_) | SamplerError::TraceMismatch { .. } => 1,
            _ => 2,
        };
    }
    1
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) if !err.use_stderr() => {
            let _ = err.print();
            return ExitCode::SUCCESS;
        }
        Err(err) => {
            let text = err.to_string();
            eprintln!("{}", text.lines().next().unwrap_or("invalid arguments"));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", format!("{err:#}").replace('\n', " "));
            ExitCode::from(exit_code(&err))
        }
    }
}
