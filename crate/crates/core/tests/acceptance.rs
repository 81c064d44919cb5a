//! The acceptance suite: one test per criterion, each printing a pass/fail
//! line with its measured quantity. Criteria with stated runtime caps
//! measure wall time with margins generous enough for shared-core runs.
//!
//! Criterion 10's d3 half is a documented expected failure: the
//! square-root-cancellation bound for shifted convolutions is a statement
//! about cuspidal (mean-zero) coefficients, while d3 >= 1 everywhere, so
//! its main term provably exceeds the bound at any scale. The test asserts
//! the criterion as stated and therefore stays red; see the test body.

use std::path::PathBuf;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use gl3sums::arith::{gcd, gcd_i, is_prime};
use gl3sums::characters::char_group;
use gl3sums::deltasym::{delta_eval, DeltaWeights, MollifierKind};
use gl3sums::experiments::{
    exponent_fit, geometric_grid, rs_error_series, shifted_conv_bound, shifted_conv_literal,
    shifted_conv_sum, sign_changes, ShiftedConvInstance,
};
use gl3sums::gcharsums::{
    g_hat_all, g_sum, h_all, multiplicative_split, reciprocity_check, verify_hbound, GArgs,
};
use gl3sums::gl3coeffs::{hecke_double, rs_average_ratio, rs_weighted_sum, CoeffSource, CoeffTable};
use gl3sums::norms::{large_sieve_ratio, LargeSieveInstance};
use gl3sums::rng::StreamRng;
use gl3sums::suite::{
    norm_acceptance_grid, norm_dual_grid, run_norm_grid, run_suite, Scale, SuiteConfig,
    ACCEPTANCE_TABLE_LIMIT, HBOUND_ACCEPTANCE_PRIMES,
};

const SEED: u64 = 2024;

fn verdict(criterion: &str, passed: bool, detail: &str, elapsed: Duration) {
    println!(
        "criterion {criterion}: {} — {detail} ({:.1} s)",
        if passed { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    assert!(passed, "criterion {criterion}: {detail}");
}

fn cache_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../target/acceptance-cache")
}

fn sym2() -> &'static CoeffTable {
    static T: OnceLock<CoeffTable> = OnceLock::new();
    T.get_or_init(|| {
        CoeffTable::build_cached(CoeffSource::Sym2Delta, ACCEPTANCE_TABLE_LIMIT, &cache_dir())
            .expect("sym2 table")
    })
}

fn d3_table() -> &'static CoeffTable {
    static T: OnceLock<CoeffTable> = OnceLock::new();
    T.get_or_init(|| CoeffTable::build(CoeffSource::D3, ACCEPTANCE_TABLE_LIMIT).expect("d3 table"))
}

#[test]
fn criterion_01_delta_identity() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for kind in [MollifierKind::Standard, MollifierKind::Alternate] {
        for c_cap in [10.0, 20.0, 40.0] {
            let w = DeltaWeights::new(c_cap, kind);
            for n in -50i64..=50 {
                let expect = if n == 0 { 1.0 } else { 0.0 };
                worst = worst.max((delta_eval(n, &w) - expect).abs());
            }
        }
    }
    let elapsed = start.elapsed();
    verdict(
        "1 (delta identity)",
        worst < 1e-8 && elapsed < Duration::from_secs(5),
        &format!("max |delta - indicator| = {worst:.3e} over C in {{10,20,40}}, |n| <= 50, two mollifier pairs"),
        elapsed,
    );
}

#[test]
fn criterion_02_weil_case_scan_expected_defect() {
    // Criterion 2 demands zero violations of cases (1)-(4) with the stated
    // constants over all p^j <= 3000. Cases (1)-(3) hold throughout, and
    // case (4) holds up to 2^10, where its constant 4 is attained exactly.
    // At 2^11 (inside the required range) the constant is exceeded:
    // |S_chi(463, 689; 2048)| = 236.513 = 5.227 * 2^{11/2} for a character
    // of conductor 2^10, confirmed by an independent direct summation and
    // an exhaustive scan over all products mn mod 2^11. The criterion is
    // asserted as stated and therefore stays red on that one cell.
    let start = Instant::now();
    let report =
        gl3sums::expsums::verify_weil_cases(97, 3000, None, 50, SEED).expect("scan completes");
    let elapsed = start.elapsed();
    // All prime powers p^j <= 3000 with p <= 97.
    let expected_cells: usize = (2..=97u64)
        .filter(|&p| is_prime(p))
        .map(|p| {
            let mut c = p;
            let mut n = 0;
            while c <= 3000 {
                n += 1;
                c = match c.checked_mul(p) {
                    Some(v) => v,
                    None => break,
                };
            }
            n
        })
        .sum();
    assert_eq!(report.cells, expected_cells);
    assert!(elapsed < Duration::from_secs(600));
    // Cases (1)-(3) are clean; only case (4) at 2^11 exceeds.
    assert!(report.case_max[0] <= 1.0 + 1e-7, "case 1: {:?}", report.case_max);
    assert!(report.case_max[1] <= 1.0 + 1e-7, "case 2: {:?}", report.case_max);
    assert!(report.case_max[2] <= 1.0 + 1e-7, "case 3: {:?}", report.case_max);
    assert!(
        report.violations.iter().all(|v| v.contains(";2^11")),
        "violations outside the known 2^11 cell: {:?}",
        report.violations
    );
    verdict(
        "2 (Weil case scan — case (4) constant fails at 2^11, expected FAIL)",
        report.violations.is_empty(),
        &format!(
            "{} cells, {} checks, per-case max ratios {:?}; {} violations, first: {}",
            report.cells,
            report.checks,
            report.case_max,
            report.violations.len(),
            report.violations.first().map(String::as_str).unwrap_or("-")
        ),
        elapsed,
    );
}

#[test]
fn criterion_03_shat_oracle_equivalence() {
    let start = Instant::now();
    let env = gl3sums::suite::run_shat_verify(60, &[1, 2, 3, 5], 10).expect("grid runs");
    let elapsed = start.elapsed();
    let ok = env.all_passed();
    let detail = env
        .assertions
        .iter()
        .map(|a| format!("{}: {}", a.name, a.detail))
        .collect::<Vec<_>>()
        .join("; ");
    verdict("3 (S-hat oracle equivalence)", ok, &detail, elapsed);
}

#[test]
fn criterion_04_fourier_inversion() {
    let start = Instant::now();
    let g_pairs: [(u64, u64); 26] = [
        (1, 1), (2, 2), (2, 4), (4, 2), (4, 4), (8, 2), (2, 8), (8, 8), (3, 3), (3, 9), (9, 3),
        (9, 9), (27, 3), (6, 6), (6, 12), (12, 6), (12, 12), (18, 6), (6, 18), (5, 5), (25, 5),
        (5, 25), (10, 10), (15, 15), (7, 7), (14, 14),
    ];
    let mut cells = Vec::new();
    for &(g1, g2) in &g_pairs {
        for k in [1u64, 2, 3, 5, 7] {
            if gcd(g1 * g2, k) != 1 {
                continue;
            }
            for m in [1u64, 2, 3, 4, 5, 6] {
                let q = g1 * g2 * k * m;
                if q <= 2000 {
                    cells.push((g1, g2, k, m));
                }
            }
        }
    }
    assert!(cells.len() >= 200, "only {} cells", cells.len());
    use rayon::prelude::*;
    let worst = cells
        .par_iter()
        .map(|&(g1, g2, k, m)| {
            let q = g1 * g2 * k * m;
            let ghat = g_hat_all(g1, g2, k, m, 1, 1).expect("cell in range");
            let chars = char_group(q).expect("q under cap");
            let mut cell_worst = 0.0f64;
            for x in 1..q.max(2) {
                if gcd(x, q) != 1 {
                    continue;
                }
                let direct =
                    g_sum(&GArgs { x: x as i64, g1, g2, k, m, a1: 1, a2: 1 }).expect("unit x");
                let recon: num_complex::Complex64 =
                    chars.iter().map(|chi| ghat[chi.index()] * chi.eval_c64(x as i64)).sum();
                cell_worst = cell_worst.max((direct - recon).norm());
            }
            cell_worst
        })
        .reduce(|| 0.0, f64::max);
    let elapsed = start.elapsed();
    verdict(
        "4 (Fourier inversion)",
        worst < 1e-9,
        &format!("{} cells with q <= 2000, max |G - sum G-hat chi| = {worst:.3e}", cells.len()),
        elapsed,
    );
}

#[test]
fn criterion_05_hbound_scan() {
    let start = Instant::now();
    let report = verify_hbound(&HBOUND_ACCEPTANCE_PRIMES, 4, 3, 3, 30_000, 4.0)
        .expect("no violations: vanishing clauses and quantitative cases");
    let elapsed = start.elapsed();
    let quantitative_ok = report.case_max[0] <= 1.0 + 1e-7
        && report.case_max[1] <= 1.0 + 1e-7
        && report.case_max[2] <= 1.0 + 1e-7
        && report.case_max[3] <= 1.0 + 1e-7;
    let case4_ok = report.case_max[4] <= 4.0 + 1e-7;
    verdict(
        "5 (H-bound scan)",
        quantitative_ok && case4_ok && elapsed < Duration::from_secs(1800),
        &format!(
            "{} cells / {} character checks; case maxima 1:{:.3} 2a:{:.3} 2b:{:.3} 3:{:.3}, case 4 vs p^(-1/2): {:.3}",
            report.cells,
            report.checks,
            report.case_max[0],
            report.case_max[1],
            report.case_max[2],
            report.case_max[3],
            report.case_max[4]
        ),
        elapsed,
    );
}

#[test]
fn criterion_06_twisted_multiplicativity() {
    let start = Instant::now();
    // G splits: mixed-prime cells, split at the smallest prime of q.
    let g_pairs: [(u64, u64); 12] = [
        (6, 6), (6, 12), (12, 6), (12, 12), (18, 6), (6, 18), (10, 10), (15, 15), (2, 2),
        (3, 3), (4, 2), (9, 3),
    ];
    let mut g_splits = 0u64;
    let mut g_worst = 0.0f64;
    for &(g1, g2) in &g_pairs {
        for k in [1u64, 5, 7, 11] {
            if gcd(g1 * g2, k) != 1 {
                continue;
            }
            for m in [1u64, 2, 3, 6, 10] {
                let q = g1 * g2 * k * m;
                if q > 30_000 || gl3sums::arith::factorize(q).factors().len() < 2 {
                    continue;
                }
                let p0 = gl3sums::arith::factorize(q).factors()[0].0;
                let x = (1..q).find(|&x| gcd(x, q) == 1 && x > 1).unwrap_or(1) as i64;
                let pick = |md: u64, skip: u64| -> i64 {
                    (1..=md).find(|&a| gcd(a, md) == 1 && a != skip).unwrap_or(1) as i64
                };
                let a1 = pick(g1 * k * m, 0);
                let a2 = pick(g2 * k * m, 2);
                let args = GArgs { x, g1, g2, k, m, a1, a2 };
                if args.validate().is_err() {
                    continue;
                }
                let (first, second) = multiplicative_split(&args, &[p0]).expect("coprime split");
                let lhs = g_sum(&args).unwrap();
                let rhs = g_sum(&first).unwrap() * g_sum(&second).unwrap();
                g_worst = g_worst.max((lhs - rhs).norm() / (1.0 + lhs.norm()));
                g_splits += 1;
            }
        }
    }
    // H splits: small two-prime cells, every character.
    let mut h_cells = Vec::new();
    for &(g1, g2) in &[(1u64, 1u64), (2, 2), (3, 3), (4, 2), (2, 4), (4, 4), (9, 3), (3, 9)] {
        for k in [1u64, 2, 3, 5, 7, 11] {
            if gcd(g1 * g2, k) != 1 {
                continue;
            }
            for m in [1u64, 2, 3, 4, 5, 6, 9, 10] {
                let q = g1 * g2 * k * m;
                if q > 1 && q <= 1200 && gl3sums::arith::factorize(q).factors().len() >= 2 {
                    h_cells.push((g1, g2, k, m));
                }
            }
        }
    }
    h_cells.sort();
    h_cells.dedup();
    h_cells.truncate(110);
    assert!(h_cells.len() >= 100, "only {} H cells", h_cells.len());
    use rayon::prelude::*;
    let h_worst = h_cells
        .par_iter()
        .map(|&(g1, g2, k, m)| {
            let q = g1 * g2 * k * m;
            let p0 = gl3sums::arith::factorize(q).factors()[0].0;
            let part = |v: u64| -> (u64, u64) {
                let mut a = 1u64;
                let mut r = v;
                while r % p0 == 0 {
                    a *= p0;
                    r /= p0;
                }
                (a, r)
            };
            let (g1a, g1b) = part(g1);
            let (g2a, g2b) = part(g2);
            let (ka, kb) = part(k);
            let (ma, mb) = part(m);
            let qa = g1a * g2a * ka * ma;
            let qb = g1b * g2b * kb * mb;
            let h_full = h_all(g1, g2, k, m).unwrap();
            let ha = h_all(g1a, g2a, ka, ma).unwrap();
            let hb = h_all(g1b, g2b, kb, mb).unwrap();
            let mut worst = 0.0f64;
            for chi in char_group(q).unwrap() {
                let ca = chi.restrict(qa).unwrap();
                let cb = chi.restrict(qb).unwrap();
                let lhs = h_full[chi.index()];
                let rhs = ha[ca.index()] * hb[cb.index()];
                worst = worst.max((lhs - rhs).abs() / (1.0 + lhs));
            }
            worst
        })
        .reduce(|| 0.0, f64::max);
    let elapsed = start.elapsed();
    verdict(
        "6 (twisted multiplicativity)",
        g_splits >= 100 && g_worst < 1e-9 && h_worst < 1e-9,
        &format!(
            "G: {} splits, max defect {g_worst:.3e}; H: {} splits, max defect {h_worst:.3e}",
            g_splits,
            h_cells.len()
        ),
        elapsed,
    );
}

#[test]
fn criterion_07_reciprocity() {
    let start = Instant::now();
    let mut checked = 0u64;
    for c in 1..=200u64 {
        for q in 1..=200u64 {
            if gcd(c, q) != 1 {
                continue;
            }
            for a in 1..=10i64 {
                reciprocity_check(a, c, q).expect("integer witness");
                checked += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    verdict(
        "7 (reciprocity)",
        checked > 100_000,
        &format!("{checked} exact integer witnesses, zero tolerance"),
        elapsed,
    );
}

#[test]
fn criterion_08_coefficient_layer() {
    let start = Instant::now();
    let table = sym2();
    // q-expansion vs Hecke recursion, exact integers, p <= 50 and p^k <= 1e5.
    let mut recursion_ok = true;
    for p in (2..=50u64).filter(|&p| is_prime(p)) {
        let mut pk = p;
        while pk * p <= 100_000 {
            let lhs = table.tau(pk * p).unwrap();
            let rhs =
                table.tau(p).unwrap() * table.tau(pk).unwrap() - (p as i128).pow(11) * table.tau(pk / p).unwrap();
            recursion_ok &= lhs == rhs;
            pk *= p;
        }
    }
    // Deligne at desk scale.
    let mut deligne_ok = true;
    for p in (2..=100_000u64).filter(|&p| is_prime(p)) {
        deligne_ok &= table.lambda_g(p).unwrap().abs() <= 2.0;
    }
    // Hecke multiplicativity over all coprime pairs m, n <= 1000, both sources.
    let mut mult_worst = 0.0f64;
    for t in [sym2(), d3_table()] {
        for m in 1..=1000u64 {
            for n in m..=1000u64 {
                if gcd(m, n) != 1 {
                    continue;
                }
                let lhs = t.lambda(m * n).unwrap();
                let rhs = t.lambda(m).unwrap() * t.lambda(n).unwrap();
                mult_worst = mult_worst.max((lhs - rhs).abs() / (1.0 + lhs.abs()));
            }
        }
    }
    let elapsed = start.elapsed();
    verdict(
        "8 (coefficient layer)",
        recursion_ok && deligne_ok && mult_worst < 1e-10,
        &format!(
            "tau recursion exact: {recursion_ok}; |lambda(p)| <= 2 up to 1e5: {deligne_ok}; max multiplicativity defect {mult_worst:.3e}"
        ),
        elapsed,
    );
}

#[test]
fn criterion_09_rankin_selberg_averages() {
    let start = Instant::now();
    let table = sym2();
    let xs = [1_000u64, 10_000, 100_000, 1_000_000];
    let ratios: Vec<f64> = xs.iter().map(|&x| rs_average_ratio(x, table).unwrap()).collect();
    let base = ratios[0];
    let spread = ratios.iter().fold(0.0f64, |m, &r| m.max(r / base).max(base / r));
    let wxs = [1_000u64, 10_000, 100_000, 500_000];
    let weighted: Vec<f64> =
        wxs.iter().map(|&x| rs_weighted_sum(x, table).unwrap() * x as f64).collect();
    let wbase = weighted[0];
    let wspread = weighted.iter().fold(0.0f64, |m, &w| m.max(w / wbase).max(wbase / w));
    let elapsed = start.elapsed();
    verdict(
        "9 (Rankin-Selberg averages)",
        spread <= 10.0 && wspread <= 5.0,
        &format!(
            "average ratios {ratios:.4?} (spread {spread:.2} <= 10); X * dyadic sums {weighted:.4?} (spread {wspread:.2} <= 5)"
        ),
        elapsed,
    );
}

#[test]
fn criterion_10a_shifted_conv_sym2delta_and_oracle() {
    let start = Instant::now();
    let table = sym2();
    let mut max_ratio = 0.0f64;
    let mut detail = String::new();
    for (n, h) in gl3sums::suite::shifted_acceptance_cells() {
        let inst = ShiftedConvInstance::new(n, h).unwrap();
        let z = shifted_conv_sum(&inst, table).unwrap();
        let ratio = z.abs() / shifted_conv_bound(n, h);
        max_ratio = max_ratio.max(ratio);
        detail.push_str(&format!("(N={n},H={h}: {ratio:.2e}) "));
    }
    // Literal-loop oracle equality at N <= 1e3.
    let mut oracle_worst = 0.0f64;
    for (n, h) in [(200u64, 14u64), (500, 22), (1000, 31)] {
        let inst = ShiftedConvInstance::new(n, h).unwrap();
        let fast = shifted_conv_sum(&inst, table).unwrap();
        let lit = shifted_conv_literal(&inst, table).unwrap();
        oracle_worst = oracle_worst.max((fast - lit).abs() / (1.0 + lit.abs()));
    }
    let elapsed = start.elapsed();
    verdict(
        "10a (shifted convolution, sym2delta)",
        max_ratio <= 1.0 && oracle_worst < 1e-11 && elapsed < Duration::from_secs(300),
        &format!("|Z|/bound max {max_ratio:.3e} over 9 cells {detail}; literal-loop defect {oracle_worst:.3e}"),
        elapsed,
    );
}

#[test]
fn criterion_10b_shifted_conv_d3_bound_expected_defect() {
    // Criterion 10 requires the square-root cancellation bound with
    // constant 1 for BOTH coefficient sources. For d3 this is provably
    // unattainable: d3(n) >= 1 with mean ~ (log n)^2/2, so Z is a sum of
    // positive terms of size ~ 0.05 N H (log N)^4 / 4, while the bound is
    // N^{4/3}/H^{1/3} + sqrt(H) N. At N = 1e4, H = 16 the sum already
    // exceeds the bound by two orders of magnitude. The check below runs
    // the criterion as stated and documents the measured excess.
    let start = Instant::now();
    let table = d3_table();
    let mut max_ratio = 0.0f64;
    for (n, h) in gl3sums::suite::shifted_acceptance_cells() {
        let inst = ShiftedConvInstance::new(n, h).unwrap();
        let z = shifted_conv_sum(&inst, table).unwrap();
        max_ratio = max_ratio.max(z.abs() / shifted_conv_bound(n, h));
    }
    let elapsed = start.elapsed();
    verdict(
        "10b (shifted convolution, d3 — bound not applicable to positive coefficients, expected FAIL)",
        max_ratio <= 1.0,
        &format!(
            "|Z|/bound max {max_ratio:.3e}: the positive d3 main term exceeds the cuspidal bound"
        ),
        elapsed,
    );
}

#[test]
fn criterion_11_rs_error_surrogate() {
    let start = Instant::now();
    let table = sym2();
    let grid = geometric_grid(1_000, 1_000_000, 48);
    let series = rs_error_series(table, &grid).unwrap();
    let pts: Vec<(f64, f64)> =
        series.xs.iter().zip(&series.es).map(|(&x, &e)| (x as f64, e.abs())).collect();
    let fit = exponent_fit(&pts).unwrap();
    let changes = sign_changes(&series.es);
    let elapsed = start.elapsed();
    verdict(
        "11 (Rankin-Selberg error surrogate)",
        fit.slope <= 0.6 && changes >= 3,
        &format!(
            "log-log slope {:.4} <= 0.6 over x in [1e3, 1e6]; {} sign changes (c_g = {:.9})",
            fit.slope, changes, series.c_g
        ),
        elapsed,
    );
}

#[test]
fn criterion_12_large_sieve() {
    let start = Instant::now();
    let mut max_ratio = 0.0f64;
    for t in 0..500u64 {
        let mut rng = StreamRng::new(SEED, 0x51EE ^ t);
        let d = 1 + rng.below(500);
        let n = 1 + rng.below(2000) as usize;
        let y = 1.0 + 99.0 * rng.f64();
        let inst = LargeSieveInstance::random(d, y, n, SEED, 1_000_000 + t).unwrap();
        max_ratio = max_ratio.max(large_sieve_ratio(&inst));
    }
    // Spike example, analytically confirmed.
    let d = 12u64;
    let mut coeffs = vec![num_complex::Complex64::default(); 100];
    coeffs[34] = num_complex::Complex64::new(1.0, 0.0);
    let spike = LargeSieveInstance::new(d, 10.0, coeffs).unwrap();
    let spike_ratio = large_sieve_ratio(&spike);
    let spike_expect =
        2.0 * gl3sums::arith::euler_phi(d) as f64 * 10.0 / (d as f64 * 10.0 + 100.0);
    let elapsed = start.elapsed();
    verdict(
        "12 (large sieve)",
        max_ratio <= 10.0 && spike_ratio <= 2.0 && (spike_ratio - spike_expect).abs() < 1e-9,
        &format!(
            "max ratio {max_ratio:.4} over 500 instances; spike ratio {spike_ratio:.6} = 2 phi(d) Y / (dY + N)"
        ),
        elapsed,
    );
}

#[test]
fn criterion_13_norms() {
    let start = Instant::now();
    // 36-instance grid: dense vs power vs dual to 1e-6, large-sieve bound.
    let grid = norm_acceptance_grid();
    assert_eq!(grid.len(), 36);
    let env = run_norm_grid(&grid, SEED).unwrap();
    let routes_ok = env.assertions.iter().all(|a| a.passed);
    // Dual-norm regression ratios over the 54-instance grid.
    use rayon::prelude::*;
    let dual = norm_dual_grid();
    assert_eq!(dual.len(), 54);
    let max_dual = dual
        .par_iter()
        .map(|inst| gl3sums::norms::dual_bound_ratio(inst).unwrap())
        .reduce(|| 0.0, f64::max);
    let elapsed = start.elapsed();
    let detail_routes = env
        .assertions
        .iter()
        .map(|a| format!("{}: {}", a.name, a.detail))
        .collect::<Vec<_>>()
        .join("; ");
    verdict(
        "13 (norms)",
        routes_ok && max_dual <= 50.0 && elapsed < Duration::from_secs(600),
        &format!("{detail_routes}; dual-bound max ratio {max_dual:.3} over 54 instances"),
        elapsed,
    );
}

#[test]
fn criterion_14_oscillatory() {
    let start = Instant::now();
    let table = gl3sums::oscillatory::ibp_decay_check(&[10.0, 20.0, 40.0, 80.0]).unwrap();
    let total_decay = table[0].1 / table[3].1;
    let sp_err = gl3sums::oscillatory::stationary_phase_compare(1.5, 1e4).unwrap();
    let mellin =
        gl3sums::oscillatory::mellin_bound_check(&[100.0, 1000.0, 10_000.0], 128).unwrap();
    let mellin_ok =
        mellin.iter().all(|r| r.peak_scaled <= 5.0 && r.tail_rel <= 1e-6);
    let elapsed = start.elapsed();
    verdict(
        "14 (oscillatory)",
        total_decay >= 512.0 / 4.0 && sp_err <= 0.05 && mellin_ok,
        &format!(
            "ibp decay factor {total_decay:.0} >= 128; stationary-phase error {sp_err:.2e} <= 5%; mellin peaks {:?} tails {:?}",
            mellin.iter().map(|r| r.peak_scaled).collect::<Vec<_>>(),
            mellin.iter().map(|r| r.tail_rel).collect::<Vec<_>>()
        ),
        elapsed,
    );
}

#[test]
fn criterion_15_suite_determinism() {
    let start = Instant::now();
    let base = std::env::temp_dir().join(format!("gl3sums-accept-{}", std::process::id()));
    let mut bodies = Vec::new();
    for par in [1usize, 8] {
        let cfg = SuiteConfig {
            seed: SEED,
            parallelism: par,
            scale: Scale::Quick,
            out_dir: base.join(format!("out{par}")),
            cache_dir: base.join("cache"),
        };
        let outcome = run_suite(&cfg).unwrap();
        bodies.push(outcome.csv_bodies());
    }
    let identical = bodies[0] == bodies[1];
    std::fs::remove_dir_all(&base).ok();
    let elapsed = start.elapsed();
    verdict(
        "15 (suite determinism)",
        identical,
        &format!(
            "{} experiment CSV bodies byte-identical between parallelism 1 and 8",
            bodies[0].len()
        ),
        elapsed,
    );
}

// Supporting regression: the coefficient tables used above really are the
// acceptance-sized ones, and hecke_double feeds criterion 9 correctly.
#[test]
fn fixtures_cover_required_ranges() {
    assert!(sym2().limit() >= 1_000_000 + 1_500);
    assert!(d3_table().limit() >= 1_000_000 + 1_500);
    let v = hecke_double(2, 2, sym2()).unwrap();
    let l2 = sym2().lambda(2).unwrap();
    assert!((v - (l2 * l2 - 1.0)).abs() < 1e-12);
    // gcd_i sanity for the signed helper used across modules.
    assert_eq!(gcd_i(-4, 6), 2);
}
