//! Command-line front end. Every subcommand prints one JSON (or text)
//! report on stdout and a run manifest on stderr; exit codes are 0 for
//! success, 1 for usage errors, 2 for documented infeasibility.

use std::io::Write as _;
use std::sync::Mutex;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use unitfrac::cleanup::lemma2_sum;
use unitfrac::dickman::RhoEvaluator;
use unitfrac::pipeline::{
    decompose, min_ratio_bruteforce, tightness_check, verify, PipelineConfig,
};
use unitfrac::rational::{format_rational, parse_rational, rational_to_f64};
use unitfrac::smooth::{count_bruteforce, count_representations, lemma4_check, SmoothInterval};
use unitfrac::{Error, FactorSieve};

const DEFAULT_SIEVE_LIMIT: u64 = 2_000_000;

#[derive(Parser)]
#[command(name = "unitfrac", version, about = "unit fraction sums over short intervals")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Args)]
struct DecomposeArgs {
    /// Target rational, "a/b" or integer.
    #[arg(long)]
    r: String,
    /// Smallest allowed denominator; with --n-end, the start of a batch range.
    #[arg(long = "N")]
    n: u64,
    /// Batch mode: run every N in [N, n_end].
    #[arg(long = "N-end")]
    n_end: Option<u64>,
    #[arg(long, default_value_t = 1.0 / 6.0)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.5)]
    delta: f64,
    #[arg(long = "max-ratio", default_value_t = 1000.0)]
    max_ratio: f64,
    #[arg(long = "large-threshold")]
    large_threshold: Option<u64>,
    #[arg(long = "small-bound")]
    small_bound: Option<u64>,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build a unit-fraction representation of r with denominators >= N.
    Decompose(DecomposeArgs),
    /// Re-check an explicit representation.
    Verify {
        #[arg(long)]
        r: String,
        #[arg(long = "N")]
        n: u64,
        /// Comma-separated denominators.
        #[arg(long, value_delimiter = ',')]
        terms: Vec<u64>,
        #[arg(long = "max-ratio")]
        max_ratio: Option<f64>,
        /// Also run the largest-prime tightness check at this slack.
        #[arg(long)]
        slack: Option<f64>,
    },
    /// Count exact subset representations over a smooth instance file.
    Count {
        /// Instance file: header "M hi y", one member per line.
        #[arg(long)]
        instance: std::path::PathBuf,
        #[arg(long)]
        target: String,
        /// Cross-check against brute-force enumeration (small instances).
        #[arg(long)]
        brute: bool,
    },
    /// Exact smooth counts and the de Bruijn comparison.
    Psi {
        #[arg(long)]
        x: u64,
        #[arg(long)]
        y: u64,
    },
    /// Dickman rho at a point.
    Rho {
        #[arg(long)]
        u: f64,
        #[arg(long, default_value_t = unitfrac::dickman::DEFAULT_STEP)]
        step: f64,
    },
    /// Exact large-prime-power reciprocal sum vs. its main term.
    Lemma2 {
        #[arg(long = "N")]
        n: u64,
        #[arg(long, default_value_t = 2.0)]
        c: f64,
        /// Defaults to N / log N.
        #[arg(long)]
        threshold: Option<u64>,
    },
    /// Short-interval divisibility dichotomy at desk scale.
    Lemma4 {
        #[arg(long = "M")]
        m: u64,
        #[arg(long)]
        h: f64,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.25)]
        kappa: f64,
    },
    /// Exhaustive minimal max/min denominator ratio.
    MinRatio {
        #[arg(long)]
        r: String,
        #[arg(long = "N")]
        n: u64,
        #[arg(long = "x-max")]
        x_max: u64,
    },
}

fn sieve_limit() -> u64 {
    std::env::var("UNITFRAC_SIEVE_LIMIT")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_SIEVE_LIMIT)
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // help/version land on stdout with exit 0; real usage errors exit 1
            if e.use_stderr() {
                let _ = writeln!(std::io::stderr(), "{e}");
                std::process::exit(1);
            }
            let _ = write!(std::io::stdout(), "{e}");
            std::process::exit(0);
        }
    };
    let start = Instant::now();
    let (cmd_name, result) = run(&cli.cmd);
    let manifest = json!({
        "command": cmd_name,
        "sieve_limit": sieve_limit(),
        "version": env!("CARGO_PKG_VERSION"),
        "wall_ms": start.elapsed().as_millis() as u64,
        "ok": result.is_ok(),
    });
    let _ = writeln!(std::io::stderr(), "{manifest}");
    match result {
        Ok(out) => {
            println!("{out}");
        }
        Err(e) => {
            let report = json!({ "error": e.to_string(), "reason": e.reason_code() });
            println!("{report}");
            std::process::exit(if e.is_usage() { 1 } else { 2 });
        }
    }
}

fn run(cmd: &Cmd) -> (&'static str, Result<String, Error>) {
    match cmd {
        Cmd::Decompose(a) => ("decompose", cmd_decompose(a)),
        Cmd::Verify {
            r,
            n,
            terms,
            max_ratio,
            slack,
        } => ("verify", cmd_verify(r, *n, terms, *max_ratio, *slack)),
        Cmd::Count {
            instance,
            target,
            brute,
        } => ("count", cmd_count(instance, target, *brute)),
        Cmd::Psi { x, y } => ("psi", cmd_psi(*x, *y)),
        Cmd::Rho { u, step } => ("rho", cmd_rho(*u, *step)),
        Cmd::Lemma2 { n, c, threshold } => ("lemma2", cmd_lemma2(*n, *c, *threshold)),
        Cmd::Lemma4 {
            m,
            h,
            epsilon,
            kappa,
        } => ("lemma4", cmd_lemma4(*m, *h, *epsilon, *kappa)),
        Cmd::MinRatio { r, n, x_max } => ("min-ratio", cmd_min_ratio(r, *n, *x_max)),
    }
}

fn decomposition_json(d: &unitfrac::Decomposition) -> serde_json::Value {
    json!({
        "r": format_rational(&d.r),
        "N": d.n,
        "terms": d.terms,
        "ratio": d.ratio,
        "k": d.k,
        "M": d.m,
        "max_term": d.max_term,
        "excess": d.excess,
        "interval_terms": d.interval_terms,
        "smooth_terms": d.smooth_terms,
    })
}

fn decomposition_text(d: &unitfrac::Decomposition) -> String {
    let terms = d
        .terms
        .iter()
        .map(|t| format!("1/{t}"))
        .collect::<Vec<_>>()
        .join(" + ");
    format!("{} = {terms}", format_rational(&d.r))
}

fn cmd_decompose(a: &DecomposeArgs) -> Result<String, Error> {
    let r = parse_rational(&a.r)?;
    if a.epsilon <= 0.0 || a.epsilon >= 0.25 {
        return Err(Error::InvalidInput("need 0 < epsilon < 1/4".into()));
    }
    let cfg = PipelineConfig {
        epsilon: a.epsilon,
        delta: a.delta,
        max_ratio: a.max_ratio,
        large_threshold: a.large_threshold,
        small_bound: a.small_bound,
        ..PipelineConfig::default()
    };
    let sieve = FactorSieve::new(sieve_limit());
    let n_end = a.n_end.unwrap_or(a.n);
    if n_end < a.n {
        return Err(Error::InvalidInput("--N-end must be >= --N".into()));
    }
    if n_end == a.n {
        let d = decompose(&sieve, &r, a.n, &cfg)?;
        return Ok(match a.format {
            Format::Json => decomposition_json(&d).to_string(),
            Format::Text => decomposition_text(&d),
        });
    }
    // batch mode: one JSON line per N, order fixed by N
    let ns: Vec<u64> = (a.n..=n_end).collect();
    let jobs = a.jobs.unwrap_or(1).max(1).min(ns.len());
    let results = Mutex::new(vec![None; ns.len()]);
    let next = std::sync::atomic::AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
                if i >= ns.len() {
                    break;
                }
                let out = match decompose(&sieve, &r, ns[i], &cfg) {
                    Ok(d) => decomposition_json(&d),
                    Err(e) => json!({"N": ns[i], "error": e.to_string(), "reason": e.reason_code()}),
                };
                results.lock().unwrap()[i] = Some(out);
            });
        }
    });
    let rows: Vec<serde_json::Value> = results
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|o| o.unwrap())
        .collect();
    Ok(serde_json::Value::Array(rows).to_string())
}

fn cmd_verify(
    r: &str,
    n: u64,
    terms: &[u64],
    max_ratio: Option<f64>,
    slack: Option<f64>,
) -> Result<String, Error> {
    let r = parse_rational(r)?;
    let mut sorted = terms.to_vec();
    sorted.sort_unstable();
    let report = verify(&r, n, &sorted, max_ratio);
    let mut out = serde_json::to_value(&report).unwrap();
    if let Some(slack) = slack {
        let sieve = FactorSieve::new(sorted.iter().copied().max().unwrap_or(2).max(2));
        let t = tightness_check(&sieve, &sorted, slack)?;
        out["tightness"] = serde_json::to_value(&t).unwrap();
    }
    Ok(out.to_string())
}

fn cmd_count(path: &std::path::Path, target: &str, brute: bool) -> Result<String, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
    let si = SmoothInterval::parse_instance(&text)?;
    let ab = parse_rational(target)?;
    let rep = count_representations(&si, &ab, None)?;
    let mut out = serde_json::to_value(&rep).unwrap();
    if brute {
        let b = count_bruteforce(&si, &ab)?;
        out["brute_count"] = json!(b.count);
        out["agreement"] = json!(b.count == rep.count);
    }
    Ok(out.to_string())
}

fn cmd_psi(x: u64, y: u64) -> Result<String, Error> {
    let sieve = FactorSieve::new(x.max(2));
    let psi_prime = sieve.psi_prime(x, y)?;
    let psi = sieve.psi(x, y)?;
    let rho = RhoEvaluator::new();
    let estimate = rho.debruijn_estimate(x, y)?;
    Ok(json!({
        "x": x,
        "y": y,
        "psi_prime": psi_prime,
        "psi": psi,
        "debruijn_estimate": estimate,
        "psi_prime_ratio": psi_prime as f64 / estimate,
    })
    .to_string())
}

fn cmd_rho(u: f64, step: f64) -> Result<String, Error> {
    if !(u >= 0.0) || !(step > 0.0 && step < 1.0) {
        return Err(Error::InvalidInput("need u >= 0 and 0 < step < 1".into()));
    }
    let rho = RhoEvaluator::with_params(step, (u + 2.0).max(32.0), 1e-9);
    Ok(json!({ "u": u, "rho": rho.rho(u), "step": step }).to_string())
}

fn cmd_lemma2(n: u64, c: f64, threshold: Option<u64>) -> Result<String, Error> {
    if n < 3 || c <= 1.0 {
        return Err(Error::InvalidInput("need N >= 3 and c > 1".into()));
    }
    let t = threshold.unwrap_or(((n as f64) / (n as f64).ln()) as u64).max(2);
    let hi = (c * n as f64).ceil() as u64 + 1;
    let sieve = FactorSieve::new(hi);
    let (exact, main) = lemma2_sum(&sieve, n, c, t)?;
    let exact_f = rational_to_f64(&exact);
    Ok(json!({
        "N": n,
        "c": c,
        "threshold": t,
        "exact": format_rational(&exact),
        "exact_float": exact_f,
        "main_term": main,
        "relative_error": (exact_f / main - 1.0).abs(),
    })
    .to_string())
}

fn cmd_lemma4(m: u64, h: f64, epsilon: f64, kappa: f64) -> Result<String, Error> {
    let hi = ((1.0 + 1.0 / (m as f64).ln().max(1.0)) * m as f64).ceil() as u64 + 1;
    let sieve = FactorSieve::new(hi);
    let rep = lemma4_check(&sieve, m, h, epsilon, kappa)?;
    Ok(serde_json::to_string(&rep).unwrap())
}

fn cmd_min_ratio(r: &str, n: u64, x_max: u64) -> Result<String, Error> {
    let r = parse_rational(r)?;
    let res = min_ratio_bruteforce(&r, n, x_max)?;
    Ok(serde_json::to_string(&res).unwrap())
}
