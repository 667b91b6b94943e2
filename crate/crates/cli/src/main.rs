//! `patstat`: count pattern occurrences, compute exact moments and
//! asymptotic constants, and run seeded normality simulations.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or validation error.

mod config;
mod output;

use std::fs;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use num_rational::BigRational;
use serde::Serialize;
use serde_json::{json, Value};

use patstat::asymptotics::{self, SigmaSource};
use patstat::count::{count_fast, count_naive, count_pruned};
use patstat::json::RationalRepr;
use patstat::moments::{self, MomentsConfig, BRUTE_FORCE_MAX_N, DEFAULT_MAX_K};
use patstat::montecarlo::{self, SimConfig, Standardization};
use patstat::{Pattern, Permutation, Seed};

use output::{envelope, render, Format};

#[derive(Debug)]
pub struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }

    fn verification(message: impl Into<String>) -> Self {
        Self { code: 1, message: message.into() }
    }
}

impl From<patstat::Error> for CliError {
    fn from(e: patstat::Error) -> Self {
        Self::usage(e.to_string())
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        Self::usage(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "patstat",
    version,
    about = "Occurrences of a permutation pattern q in uniform random permutations",
    long_about = "Occurrences of a permutation pattern q in uniform random permutations: \
        exact counts X_{n,q}, exact mean C(n,k)/k! and variance, the constants behind the \
        lower bound Var(X_{n,q}) >= c n^(2k-1), the dependency-criterion ratio, and seeded \
        Monte Carlo checks of asymptotic normality.\n\n\
        Patterns and permutations are 1-based one-line notation, quoted as one argument: \
        --pattern \"1 3 2\". Any flag can also come from --config FILE (a JSON object keyed \
        by flag name); explicit flags override the file.",
    args_override_self = true
)]
struct Cli {
    /// Output format; JSON is canonical, `table` is a derived view.
    /// Defaults to JSON, except `count`, which prints one bare count per line.
    #[arg(long, value_enum, global = true)]
    format: Option<Format>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Occurrence count of q in each input permutation (number of k-subsets of positions order-isomorphic to q).
    Count(CountArgs),
    /// Exact mean E(X_{n,q}) = C(n,k)/k!, from E(X_{n,i}) = 1/k! per subword.
    Expect(MomentArgs),
    /// Exact mean and variance Var(X_{n,q}) as rationals.
    Var(MomentArgs),
    /// Var(X_{n,q}) as an exact polynomial in the binomial basis C(n,k), C(n,2k-1), ..., C(n,k+1).
    VarPoly(PatternArgs),
    /// Check the closed-form variance against full enumeration of S_n for every n <= max-n.
    VerifyOracle(OracleArgs),
    /// Leading constant c_k = S_k/(2k-1)!^2 - k^2/k!^4 of the variance.
    Ck(KArgs),
    /// Identity table: S_k, the Vandermonde sum, the Cauchy-Schwarz gap, c_k and the n^(2k-1) cancellation term.
    Identities(KArgs),
    /// Dependency-graph degree bound C(n,k) - C(n-k,k) - 1.
    Delta(DeltaArgs),
    /// Dependency-criterion ratio N_n Delta_n^(m-1) (A_n/sigma_n)^m over doubling n, with its log-log slope.
    Janson(JansonArgs),
    /// Seeded Monte Carlo of X_{n,q}, standardized as (X - E X)/sqrt(Var X), with KS distance to N(0,1).
    Simulate(SimulateArgs),
}

const SUBCOMMANDS: &[&str] = &[
    "count", "expect", "var", "var-poly", "verify-oracle", "ck", "identities", "delta", "janson",
    "simulate",
];

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum CountMethod {
    /// Shape-based dispatch: monotone DP, length-3 decomposition, or pruned search.
    Auto,
    /// Exhaustive enumeration of all C(n,k) position subsets.
    Naive,
    /// Pruned depth-first search, valid for every pattern.
    Fast,
}

#[derive(Debug, Args, Serialize)]
struct CountArgs {
    /// Pattern q, e.g. "1 3 2".
    #[arg(long)]
    pattern: String,
    /// A single permutation; otherwise read one per line from --input or stdin.
    #[arg(long, conflicts_with = "input")]
    perm: Option<String>,
    /// File with one permutation per line.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "auto")]
    method: CountMethod,
    /// Longest accepted pattern.
    #[arg(long, default_value_t = 12)]
    max_k: usize,
}

#[derive(Debug, Args, Serialize)]
struct PatternArgs {
    #[arg(long)]
    pattern: String,
    /// Raise the pattern-length cap of the exact variance (slow above 5).
    #[arg(long, default_value_t = DEFAULT_MAX_K)]
    max_k: usize,
}

#[derive(Debug, Args, Serialize)]
struct MomentArgs {
    #[arg(long)]
    pattern: String,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = DEFAULT_MAX_K)]
    max_k: usize,
}

#[derive(Debug, Args, Serialize)]
struct OracleArgs {
    #[arg(long)]
    pattern: String,
    /// Largest n to enumerate (at most 8).
    #[arg(long)]
    max_n: usize,
}

#[derive(Debug, Args, Serialize)]
struct KArgs {
    /// Pattern length k (identities: table for 2..=k).
    #[arg(long)]
    k: usize,
}

#[derive(Debug, Args, Serialize)]
struct DeltaArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum SigmaKind {
    /// sqrt of the exact variance of the given pattern.
    Exact,
    /// scale-constant * n^(k - 1/2).
    Scaling,
}

#[derive(Debug, Args, Serialize)]
struct JansonArgs {
    #[arg(long)]
    pattern: String,
    /// Moment order m >= 1.
    #[arg(long)]
    m: u32,
    #[arg(long, default_value_t = 100)]
    n_start: usize,
    /// Number of doublings of n (at least 6).
    #[arg(long, default_value_t = 6)]
    doublings: u32,
    #[arg(long, value_enum, default_value = "exact")]
    sigma: SigmaKind,
    #[arg(long, default_value_t = 1.0)]
    scale_constant: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum StdKind {
    Exact,
    Empirical,
}

#[derive(Debug, Args, Serialize)]
struct SimulateArgs {
    #[arg(long)]
    pattern: String,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    samples: usize,
    /// Master seed; required, there is no default.
    #[arg(long)]
    seed: u64,
    /// Worker threads; results do not depend on this.
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Standardize by exact moments or by the sample's own moments.
    #[arg(long = "std", value_enum, default_value = "exact")]
    standardization: StdKind,
    #[arg(long, default_value_t = montecarlo::DEFAULT_BINS)]
    bins: usize,
    /// Histogram CSV (`bin_left,bin_right,count`); a manifest is written beside it.
    #[arg(long)]
    hist_out: Option<PathBuf>,
    /// Manifest path (default: <hist-out>.manifest.json).
    #[arg(long)]
    manifest_out: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_MAX_K)]
    max_k: usize,
}

fn parse_pattern(text: &str, cap: usize) -> CliResult<Pattern> {
    let q: Pattern = text
        .parse()
        .map_err(|e| CliError::usage(format!("invalid pattern {text:?}: {e}")))?;
    if q.is_empty() {
        return Err(CliError::usage("pattern must be non-empty"));
    }
    if q.len() > cap {
        return Err(CliError::usage(format!("pattern length {} exceeds the cap of {cap}", q.len())));
    }
    Ok(q)
}

fn rational(r: &BigRational) -> Value {
    serde_json::to_value(RationalRepr::from(r)).expect("rationals serialize")
}

fn moments_config(max_k: usize) -> MomentsConfig {
    MomentsConfig { max_k }
}

fn run_count(args: &CountArgs, format: Format) -> CliResult<String> {
    let q = parse_pattern(&args.pattern, args.max_k)?;
    let lines: Vec<String> = match (&args.perm, &args.input) {
        (Some(p), _) => vec![p.clone()],
        (None, Some(path)) => fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?
            .lines()
            .map(str::to_owned)
            .collect(),
        (None, None) => io::stdin().lock().lines().collect::<io::Result<_>>()?,
    };
    let mut counts = Vec::with_capacity(lines.len());
    for (i, line) in lines.iter().enumerate() {
        let p: Permutation = line
            .parse()
            .map_err(|e| CliError::usage(format!("line {}: malformed permutation: {e}", i + 1)))?;
        let result = match args.method {
            CountMethod::Auto => count_fast(&p, &q),
            CountMethod::Naive => count_naive(&p, &q),
            CountMethod::Fast => count_pruned(&p, &q),
        };
        counts.push(result.count);
    }
    Ok(match format {
        Format::Json => render(
            &envelope(&json!({
                "pattern": q,
                "method": args.method,
                "counts": counts.iter().map(BigUint::to_string).collect::<Vec<_>>(),
            })),
            format,
        ),
        Format::Table => counts.iter().map(|c| format!("{c}\n")).collect(),
    })
}

fn run_expect(args: &MomentArgs, format: Format) -> CliResult<String> {
    let q = parse_pattern(&args.pattern, usize::MAX)?;
    let mean = moments::expectation(args.n, q.len());
    Ok(render(
        &envelope(&json!({"n": args.n, "pattern": q, "mean": rational(&mean)})),
        format,
    ))
}

fn run_var(args: &MomentArgs, format: Format) -> CliResult<String> {
    let q = parse_pattern(&args.pattern, args.max_k)?;
    let vp = moments::variance_polynomial_with(&q, &moments_config(args.max_k))?;
    let report = moments::MomentReport {
        n: args.n,
        pattern: q.clone(),
        mean: moments::expectation(args.n, q.len()),
        variance: vp.evaluate(args.n),
    };
    Ok(render(&envelope(&report), format))
}

fn run_var_poly(args: &PatternArgs, format: Format) -> CliResult<String> {
    let q = parse_pattern(&args.pattern, args.max_k)?;
    let vp = moments::variance_polynomial_with(&q, &moments_config(args.max_k))?;
    let mut value = envelope(&vp);
    let power: Vec<Value> = vp.to_power_basis().coeffs().iter().map(rational).collect();
    value["power_basis"] = Value::Array(power);
    value["leading_coefficient"] = rational(&vp.leading_coefficient());
    value["c_k"] = rational(&asymptotics::c_k(q.len()));
    Ok(render(&value, format))
}

fn run_verify_oracle(args: &OracleArgs, format: Format) -> CliResult<String> {
    if args.max_n > BRUTE_FORCE_MAX_N {
        return Err(CliError::usage(format!(
            "--max-n {} exceeds the brute-force guard of {BRUTE_FORCE_MAX_N}",
            args.max_n
        )));
    }
    let q = parse_pattern(&args.pattern, DEFAULT_MAX_K)?;
    let vp = moments::variance_polynomial(&q)?;
    let mut checked = Vec::new();
    for n in 0..=args.max_n {
        let closed = vp.evaluate(n);
        let brute = moments::brute_force_moments(n, &q)?;
        if closed != brute.variance {
            let report = envelope(&json!({
                "pattern": q,
                "ok": false,
                "first_mismatch": {
                    "n": n,
                    "closed_form": rational(&closed),
                    "brute_force": rational(&brute.variance),
                },
            }));
            print!("{}", render(&report, format));
            return Err(CliError::verification(format!(
                "mismatch at n = {n}: closed form {closed}, brute force {}",
                brute.variance
            )));
        }
        checked.push(json!({"n": n, "variance": rational(&closed)}));
    }
    Ok(render(
        &envelope(&json!({"pattern": q, "max_n": args.max_n, "ok": true, "checked": checked})),
        format,
    ))
}

fn run_ck(args: &KArgs, format: Format) -> CliResult<String> {
    if args.k == 0 {
        return Err(CliError::usage("--k must be at least 1"));
    }
    Ok(render(
        &envelope(&json!({"k": args.k, "c_k": rational(&asymptotics::c_k(args.k))})),
        format,
    ))
}

fn run_identities(args: &KArgs, format: Format) -> CliResult<String> {
    if args.k < 2 {
        return Err(CliError::usage("--k must be at least 2"));
    }
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for k in 2..=args.k {
        let (lhs, rhs) = asymptotics::vandermonde_check(k);
        let gap = asymptotics::cauchy_gap(k)?;
        let c_k = asymptotics::c_k(k);
        let easy = asymptotics::easy_term_coefficient(k);
        let kf = BigRational::from_integer(asymptotics::factorial(k as u64).into());
        let easy_expected = -BigRational::from_integer((k * k).into()) / (&kf * &kf * &kf * &kf);
        let mut forms_agree = true;
        for a in 1..=k {
            for b in 1..=k {
                let (prod, simp) = asymptotics::one_overlap_probability_forms(k, a, b)?;
                forms_agree &= prod == simp;
            }
        }
        let zero = BigRational::from_integer(0.into());
        let checks = [
            ("vandermonde", lhs == rhs),
            ("cauchy_gap_positive", gap > zero),
            ("c_k_positive", c_k > zero),
            ("easy_term", easy == easy_expected),
            ("one_overlap_forms", forms_agree),
        ];
        for (name, ok) in checks {
            if !ok {
                failures.push(format!("k = {k}: {name}"));
            }
        }
        rows.push(json!({
            "k": k,
            "S_k": asymptotics::s_sum(k).to_string(),
            "vandermonde_lhs": lhs.to_string(),
            "vandermonde_rhs": rhs.to_string(),
            "cauchy_gap": rational(&gap),
            "c_k": rational(&c_k),
            "easy_term_coefficient": rational(&easy),
            "one_overlap_forms_agree": forms_agree,
        }));
    }
    let out = render(&envelope(&json!({"rows": rows, "ok": failures.is_empty()})), format);
    if failures.is_empty() {
        Ok(out)
    } else {
        print!("{out}");
        Err(CliError::verification(format!("identity failures: {}", failures.join("; "))))
    }
}

fn run_delta(args: &DeltaArgs, format: Format) -> CliResult<String> {
    let delta = asymptotics::delta_bound(args.n, args.k)?;
    Ok(render(
        &envelope(&json!({"n": args.n, "k": args.k, "delta_bound": delta.to_string()})),
        format,
    ))
}

fn run_janson(args: &JansonArgs, format: Format) -> CliResult<String> {
    let q = parse_pattern(&args.pattern, DEFAULT_MAX_K)?;
    let source = match args.sigma {
        SigmaKind::Exact => SigmaSource::Exact(q.clone()),
        SigmaKind::Scaling => SigmaSource::ScalingEstimate { constant: args.scale_constant },
    };
    let sweep = asymptotics::janson_sweep(q.len(), args.m, &source, args.n_start, args.doublings)?;
    let mut value = envelope(&sweep);
    value["pattern"] = json!(q);
    value["sigma"] = json!(args.sigma);
    value["note"] = Value::String(if sweep.vanishing_regime {
        format!("m = {}: exponent 1 - m/2 < 0, the ratio vanishes", args.m)
    } else {
        format!("m = {}: exponent 1 - m/2 >= 0, the ratio does not vanish", args.m)
    });
    Ok(render(&value, format))
}

fn simulate_config(args: &SimulateArgs) -> CliResult<SimConfig> {
    let q = parse_pattern(&args.pattern, usize::MAX)?;
    let mut cfg = SimConfig::new(q, args.n, args.samples, Seed(args.seed));
    cfg.workers = args.workers;
    cfg.bins = args.bins;
    cfg.moments = moments_config(args.max_k);
    cfg.standardization = match args.standardization {
        StdKind::Exact => Standardization::ExactMoments,
        StdKind::Empirical => Standardization::EmpiricalMoments,
    };
    if cfg.standardization == Standardization::ExactMoments && cfg.pattern.len() > args.max_k {
        return Err(CliError::usage(format!(
            "pattern length {} is above the exact-moment cap {}; use --std empirical",
            cfg.pattern.len(),
            args.max_k
        )));
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run_simulate(args: &SimulateArgs, format: Format) -> CliResult<String> {
    let cfg = simulate_config(args)?;
    let summary = montecarlo::simulate(&cfg)?;
    let out = render(&envelope(&summary), format);
    let mut outputs: Vec<(String, Vec<u8>)> = vec![("stdout".into(), out.clone().into_bytes())];
    if let Some(path) = &args.hist_out {
        let csv = summary.histogram.to_csv();
        fs::write(path, &csv)
            .map_err(|e| CliError::usage(format!("cannot write {}: {e}", path.display())))?;
        outputs.push((path.display().to_string(), csv.into_bytes()));
    }
    let manifest_path = args.manifest_out.clone().or_else(|| {
        args.hist_out.as_ref().map(|h| {
            let mut name = h.as_os_str().to_owned();
            name.push(".manifest.json");
            PathBuf::from(name)
        })
    });
    if let Some(path) = manifest_path {
        write_manifest(&path, "simulate", args, Some(args.seed), &outputs)?;
    }
    Ok(out)
}

fn write_manifest<P: Serialize>(
    path: &Path,
    subcommand: &str,
    params: &P,
    seed: Option<u64>,
    outputs: &[(String, Vec<u8>)],
) -> CliResult<()> {
    let params = serde_json::to_value(params).expect("arguments serialize");
    let borrowed: Vec<(String, &[u8])> =
        outputs.iter().map(|(n, b)| (n.clone(), b.as_slice())).collect();
    let value = output::manifest(subcommand, &params, seed, &borrowed);
    fs::write(path, render(&value, Format::Json))
        .map_err(|e| CliError::usage(format!("cannot write {}: {e}", path.display())))
}

fn run(cli: &Cli) -> CliResult<String> {
    let f = cli.format.unwrap_or(Format::Json);
    match &cli.command {
        Command::Count(a) => run_count(a, cli.format.unwrap_or(Format::Table)),
        Command::Expect(a) => run_expect(a, f),
        Command::Var(a) => run_var(a, f),
        Command::VarPoly(a) => run_var_poly(a, f),
        Command::VerifyOracle(a) => run_verify_oracle(a, f),
        Command::Ck(a) => run_ck(a, f),
        Command::Identities(a) => run_identities(a, f),
        Command::Delta(a) => run_delta(a, f),
        Command::Janson(a) => run_janson(a, f),
        Command::Simulate(a) => run_simulate(a, f),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = match config::expand_config(std::env::args_os().collect(), SUBCOMMANDS) {
        Ok(args) => args,
        Err(e) => {
            eprintln!("error: {}", e.message);
            return ExitCode::from(e.code);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(out) => {
            let mut stdout = io::stdout().lock();
            if stdout.write_all(out.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return ExitCode::from(2);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
