//! Command-line entry point: every experiment as a subcommand, with a flat
//! key=value config file (flags override), deterministic seeds, a tau disk
//! cache, and CSV/JSON reports written atomically.
//!
//! Exit codes: 0 all assertions passed, 1 an assertion failed, 2 invalid
//! configuration, 3 internal error.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use gl3sums::error::Error;
use gl3sums::gl3coeffs::{CoeffSource, CoeffTable};
use gl3sums::report::ReportEnvelope;
use gl3sums::suite::{self, Scale, SuiteConfig};

#[derive(Parser)]
#[command(
    name = "gl3sums",
    version,
    about = "Exact exponential-sum computations and desk-scale analytic number theory experiments"
)]
struct Cli {
    /// Seed for all randomized draws (counter-based generator).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for CSV/JSON reports.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Directory for the tau cache (env GL3SUMS_CACHE_DIR as fallback).
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    /// Flat key=value config file; command-line flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for parallel grids.
    #[arg(long, short = 'j', global = true)]
    parallelism: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Verify the delta-symbol identity over a window of n.
    DeltaCheck {
        #[arg(long = "C")]
        c: Option<f64>,
        #[arg(long)]
        nmax: Option<i64>,
    },
    /// Exhaustive twisted Weil bound scan over prime powers.
    WeilScan {
        #[arg(long)]
        pmax: Option<u64>,
        #[arg(long)]
        modcap: Option<u64>,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Closed-form vs brute-force Poisson-dual sums over a grid.
    ShatVerify {
        #[arg(long)]
        bmax: Option<u64>,
        #[arg(long)]
        nmax: Option<i64>,
    },
    /// Case-by-case H-bound scan.
    HboundScan {
        #[arg(long)]
        pmax: Option<u64>,
        #[arg(long)]
        gamma_max: Option<u32>,
        #[arg(long)]
        mu_max: Option<u32>,
        #[arg(long)]
        kappa_max: Option<u32>,
        #[arg(long)]
        qcap: Option<u64>,
    },
    /// Exact reciprocity witnesses over coprime pairs.
    ReciprocityCheck {
        #[arg(long)]
        cmax: Option<u64>,
        #[arg(long)]
        qmax: Option<u64>,
        #[arg(long)]
        amax: Option<i64>,
    },
    /// Build (and cache) a coefficient table and check its identities.
    Coeffs {
        #[arg(long)]
        source: Option<String>,
        #[arg(long)]
        limit: Option<u64>,
    },
    /// One shifted-convolution instance against the cancellation bound.
    ShiftedConv {
        #[arg(long = "N")]
        n: Option<u64>,
        #[arg(long = "H")]
        h: Option<u64>,
        #[arg(long)]
        source: Option<String>,
    },
    /// Rankin-Selberg error term on a geometric grid with exponent fit.
    RsError {
        #[arg(long)]
        xmax: Option<u64>,
    },
    /// Radical-sum ratio across decades.
    RadicalCheck {
        #[arg(long = "X")]
        x: Option<u64>,
        #[arg(long)]
        q: Option<u64>,
    },
    /// Bilinear norm of one instance, all routes and comparison bounds.
    NormEval {
        #[arg(long = "Nprime")]
        nprime: Option<usize>,
        #[arg(long = "Q")]
        q: Option<u64>,
        #[arg(long)]
        k: Option<u64>,
        #[arg(long = "Y")]
        y: Option<f64>,
        #[arg(long)]
        no_integral: bool,
    },
    /// Randomized hybrid large-sieve ratios.
    LargeSieve {
        #[arg(long)]
        d: Option<u64>,
        #[arg(long = "Y")]
        y: Option<f64>,
        #[arg(long = "N")]
        n: Option<usize>,
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Archimedean checks: ibp, statphase, mellin, or all.
    OscCheck {
        #[arg(long)]
        suite: Option<String>,
    },
    /// Run every experiment in dependency order.
    Suite {
        #[arg(long)]
        scale: Option<String>,
    },
}

/// Flat key=value config file; '#' starts a comment.
fn load_config(path: &PathBuf) -> Result<BTreeMap<String, String>, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::ConfigInvalid(format!("read {path:?}: {e}")))?;
    let mut map = BTreeMap::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            Error::ConfigInvalid(format!("{path:?}:{}: expected key=value", ln + 1))
        })?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

struct Params {
    file: BTreeMap<String, String>,
}

impl Params {
    fn get<T: std::str::FromStr>(
        &self,
        key: &str,
        flag: Option<T>,
        default: T,
    ) -> Result<T, Error> {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.file.get(key) {
            Some(s) => s
                .parse()
                .map_err(|_| Error::ConfigInvalid(format!("config key '{key}': bad value '{s}'"))),
            None => Ok(default),
        }
    }

    fn range_check<T: PartialOrd + std::fmt::Display>(
        name: &str,
        value: T,
        lo: T,
        hi: T,
    ) -> Result<T, Error> {
        if value < lo || value > hi {
            return Err(Error::ConfigInvalid(format!("{name} = {value} outside [{lo}, {hi}]")));
        }
        Ok(value)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::ConfigInvalid(_) | Error::ModulusTooLarge { .. } => ExitCode::from(2),
                Error::BoundViolation(_) => ExitCode::from(1),
                _ => ExitCode::from(3),
            }
        }
    }
}

fn run(cli: Cli) -> Result<bool, Error> {
    let file = match &cli.config {
        Some(p) => load_config(p)?,
        None => BTreeMap::new(),
    };
    let p = Params { file };
    let seed = p.get("seed", cli.seed, 2024)?;
    let out_dir = PathBuf::from(p.get(
        "out-dir",
        cli.out_dir.clone().map(|b| b.to_string_lossy().into_owned()),
        "reports".to_string(),
    )?);
    let cache_default = std::env::var("GL3SUMS_CACHE_DIR").unwrap_or_else(|_| "cache".into());
    let cache_dir = PathBuf::from(p.get(
        "cache-dir",
        cli.cache_dir.clone().map(|b| b.to_string_lossy().into_owned()),
        cache_default,
    )?);
    let parallelism = p.get("parallelism", cli.parallelism, num_threads_default())?;

    // The suite writes many reports; everything else writes one envelope.
    if let Cmd::Suite { scale } = &cli.cmd {
        let scale = Scale::parse(&p.get("scale", scale.clone(), "full".to_string())?)?;
        let cfg = SuiteConfig { seed, parallelism, scale, out_dir, cache_dir };
        let outcome = suite::run_suite(&cfg)?;
        let passed = suite::write_suite_reports(&cfg, &outcome)?;
        for r in &outcome.reports {
            print_assertions(r);
        }
        println!(
            "suite: {} experiments, {}",
            outcome.reports.len(),
            if passed { "all assertions passed" } else { "ASSERTION FAILURES" }
        );
        return Ok(passed);
    }

    let env = suite::with_pool(parallelism, || dispatch(&cli.cmd, &p, seed, &cache_dir))??;
    let (csv_path, _) = env.write_atomic(&out_dir)?;
    print_assertions(&env);
    println!("report: {}", csv_path.display());
    Ok(env.all_passed())
}

fn dispatch(
    cmd: &Cmd,
    p: &Params,
    seed: u64,
    cache_dir: &std::path::Path,
) -> Result<ReportEnvelope, Error> {
    match cmd {
        Cmd::DeltaCheck { c, nmax } => {
            let c = Params::range_check("C", p.get("C", *c, 20.0)?, 2.0, 1000.0)?;
            let nmax = Params::range_check("nmax", p.get("nmax", *nmax, 50)?, 0, 100_000)?;
            suite::run_delta_check(c, nmax)
        }
        Cmd::WeilScan { pmax, modcap, samples } => {
            let pmax = Params::range_check("pmax", p.get("pmax", *pmax, 97)?, 2, 100)?;
            let modcap =
                Params::range_check("modcap", p.get("modcap", *modcap, 3000)?, 2, 10_000)?;
            let samples =
                Params::range_check("samples", p.get("samples", *samples, 50)?, 1, 10_000)?;
            suite::run_weil_scan(pmax, modcap, samples, seed)
        }
        Cmd::ShatVerify { bmax, nmax } => {
            let bmax = Params::range_check("bmax", p.get("bmax", *bmax, 60)?, 1, 120)?;
            let nmax = Params::range_check("nmax", p.get("nmax", *nmax, 10)?, 0, 100)?;
            suite::run_shat_verify(bmax, &[1, 2, 3, 5], nmax)
        }
        Cmd::HboundScan { pmax, gamma_max, mu_max, kappa_max, qcap } => {
            let pmax = Params::range_check("pmax", p.get("pmax", *pmax, 13)?, 2, 50)?;
            let gamma_max =
                Params::range_check("gamma-max", p.get("gamma-max", *gamma_max, 4)?, 1, 6)?;
            let mu_max = Params::range_check("mu-max", p.get("mu-max", *mu_max, 3)?, 0, 6)?;
            let kappa_max =
                Params::range_check("kappa-max", p.get("kappa-max", *kappa_max, 3)?, 0, 6)?;
            let qcap = Params::range_check("qcap", p.get("qcap", *qcap, 30_000)?, 2, 30_000)?;
            let primes: Vec<u64> = (2..=pmax).filter(|&n| gl3sums::arith::is_prime(n)).collect();
            suite::run_hbound_scan(&primes, gamma_max, kappa_max, mu_max, qcap)
        }
        Cmd::ReciprocityCheck { cmax, qmax, amax } => {
            let cmax = Params::range_check("cmax", p.get("cmax", *cmax, 200)?, 1, 2000)?;
            let qmax = Params::range_check("qmax", p.get("qmax", *qmax, 200)?, 1, 2000)?;
            let amax = Params::range_check("amax", p.get("amax", *amax, 10)?, 1, 1000)?;
            suite::run_reciprocity(cmax, qmax, amax)
        }
        Cmd::Coeffs { source, limit } => {
            let source =
                CoeffSource::parse(&p.get("source", source.clone(), "sym2delta".into())?)?;
            let limit = Params::range_check(
                "limit",
                p.get("limit", *limit, 100_000)?,
                1,
                gl3sums::gl3coeffs::TAU_CAP,
            )?;
            suite::run_coeffs(source, limit, cache_dir)
        }
        Cmd::ShiftedConv { n, h, source } => {
            let n = Params::range_check("N", p.get("N", *n, 100_000)?, 10, 5_000_000)?;
            let default_h = (n as f64).powf(0.4).round() as u64;
            let h = Params::range_check("H", p.get("H", *h, default_h)?, 1, n)?;
            let source =
                CoeffSource::parse(&p.get("source", source.clone(), "sym2delta".into())?)?;
            let limit = 2 * n + 2 * h + 16;
            let table = CoeffTable::build_cached(source, limit, cache_dir)?;
            suite::run_shifted_conv(&[(n, h)], &[&table], 1_000)
        }
        Cmd::RsError { xmax } => {
            let xmax =
                Params::range_check("xmax", p.get("xmax", *xmax, 1_000_000)?, 2_000, 5_000_000)?;
            let table = CoeffTable::build_cached(CoeffSource::Sym2Delta, xmax, cache_dir)?;
            suite::run_rs_error(&table, (xmax / 1000).max(10), xmax, 48)
        }
        Cmd::RadicalCheck { x, q } => {
            let x = Params::range_check("X", p.get("X", *x, 1_000_000)?, 10, 10_000_000)?;
            let q = Params::range_check("q", p.get("q", *q, 1)?, 1, 1_000_000)?;
            let xs: Vec<u64> = [x / 100, x / 10, x].iter().copied().filter(|&v| v >= 10).collect();
            suite::run_radical_check(&xs, q)
        }
        Cmd::NormEval { nprime, q, k, y, no_integral } => {
            let nprime = Params::range_check("Nprime", p.get("Nprime", *nprime, 100)?, 1, 400)?;
            let q = Params::range_check("Q", p.get("Q", *q, 10)?, 1, 40)?;
            let k = Params::range_check("k", p.get("k", *k, 1)?, 1, q)?;
            let y = Params::range_check("Y", p.get("Y", *y, 5.0)?, 0.01, 100.0)?;
            suite::run_norm_eval(nprime, q, k, y, *no_integral, seed)
        }
        Cmd::LargeSieve { d, y, n, trials } => {
            let d = Params::range_check("d", p.get("d", *d, 500)?, 1, 500)?;
            let y = Params::range_check("Y", p.get("Y", *y, 100.0)?, 1.0, 100.0)?;
            let n = Params::range_check("N", p.get("N", *n, 2000)?, 1, 2000)?;
            let trials =
                Params::range_check("trials", p.get("trials", *trials, 500)?, 1, 100_000)?;
            suite::run_large_sieve(d, y, n, trials, seed)
        }
        Cmd::OscCheck { suite: which } => {
            let which = p.get("suite", which.clone(), "all".to_string())?;
            if !["ibp", "statphase", "mellin", "all"].contains(&which.as_str()) {
                return Err(Error::ConfigInvalid(format!(
                    "suite must be ibp|statphase|mellin|all, got '{which}'"
                )));
            }
            suite::run_osc_check(&which)
        }
        Cmd::Suite { .. } => unreachable!("handled by caller"),
    }
}

fn print_assertions(env: &ReportEnvelope) {
    for a in &env.assertions {
        println!(
            "[{}] {}/{}: {}",
            if a.passed { "pass" } else { "FAIL" },
            env.experiment,
            a.name,
            a.detail
        );
    }
}

fn num_threads_default() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}
