//! Desk-scale experiments: the shifted convolution sum with its square-root
//! cancellation bound, the Rankin-Selberg error term E(x) with a fitted
//! log-log exponent, the value of L(sym^2, 1) by smoothed partial sums, and
//! the radical-sum estimate.

use crate::arith::{gcd, radical};
use crate::deltasym::bump;
use crate::error::{Error, Result};
use crate::gl3coeffs::CoeffTable;

/// A shifted-convolution problem: sum over n ~ N, k ~ H of
/// lambda(n) lambda(n+k) W(n/N, k/H) with W a product of inert bumps
/// supported on [1, 2]^2.
#[derive(Debug, Clone, Copy)]
pub struct ShiftedConvInstance {
    pub n_len: u64,
    pub h_len: u64,
}

impl ShiftedConvInstance {
    pub fn new(n_len: u64, h_len: u64) -> Result<Self> {
        if n_len == 0 || h_len == 0 || (h_len as f64) > (n_len as f64).sqrt() {
            return Err(Error::ConstraintViolation(format!(
                "need 1 <= H <= sqrt(N), got N={n_len} H={h_len}"
            )));
        }
        Ok(ShiftedConvInstance { n_len, h_len })
    }

    /// The inert weight W(u, v) = bump(2u-3) bump(2v-3), supported on [1,2]^2.
    pub fn weight(&self, u: f64, v: f64) -> f64 {
        bump(2.0 * u - 3.0) * bump(2.0 * v - 3.0)
    }
}

/// Z = sum_{n, k} lambda(n) lambda(n+k) W(n/N, k/H), looping exactly the
/// support window n in (N, 2N), k in (H, 2H).
pub fn shifted_conv_sum(inst: &ShiftedConvInstance, table: &CoeffTable) -> Result<f64> {
    let (n_len, h_len) = (inst.n_len, inst.h_len);
    let needed = 2 * n_len + 2 * h_len;
    if needed > table.limit() {
        return Err(Error::TableTooSmall { needed, limit: table.limit() });
    }
    let mut total = 0.0f64;
    for n in n_len..=2 * n_len {
        let wn = bump(2.0 * n as f64 / n_len as f64 - 3.0);
        if wn == 0.0 {
            continue;
        }
        let ln = table.lambda(n)?;
        if ln == 0.0 {
            continue;
        }
        let mut inner = 0.0;
        for k in h_len..=2 * h_len {
            let wk = bump(2.0 * k as f64 / h_len as f64 - 3.0);
            if wk == 0.0 {
                continue;
            }
            inner += table.lambda(n + k)? * wk;
        }
        total += ln * wn * inner;
    }
    Ok(total)
}

/// Literal-loop oracle: the same double sum ranged over the full rectangle
/// with no support shortcuts.
pub fn shifted_conv_literal(inst: &ShiftedConvInstance, table: &CoeffTable) -> Result<f64> {
    let (n_len, h_len) = (inst.n_len, inst.h_len);
    let needed = 3 * n_len + 3 * h_len;
    if needed > table.limit() {
        return Err(Error::TableTooSmall { needed, limit: table.limit() });
    }
    let mut total = 0.0f64;
    for n in 1..=3 * n_len {
        for k in 1..=3 * h_len {
            let w = inst.weight(n as f64 / n_len as f64, k as f64 / h_len as f64);
            if w != 0.0 {
                total += table.lambda(n)? * table.lambda(n + k)? * w;
            }
        }
    }
    Ok(total)
}

/// The square-root cancellation bound N^{4/3}/H^{1/3} + sqrt(H) N, with
/// constant 1 and no epsilon.
pub fn shifted_conv_bound(n_len: u64, h_len: u64) -> f64 {
    let n = n_len as f64;
    let h = h_len as f64;
    n.powf(4.0 / 3.0) / h.powf(1.0 / 3.0) + h.sqrt() * n
}

/// L(sym^2, 1) by exponentially smoothed partial sums with Richardson
/// elimination of the 1/X term, plus the leading constant c = (6/pi^2) L.
#[derive(Debug, Clone, Copy)]
pub struct LSym2Estimate {
    pub value: f64,
    pub error_estimate: f64,
    pub c_g: f64,
}

pub fn l_sym2_at_1(table: &CoeffTable, target: f64) -> Result<LSym2Estimate> {
    let limit = table.limit();
    if limit < 2_000 {
        return Err(Error::TableTooSmall { needed: 2_000, limit });
    }
    // One pass accumulates all three smoothed sums. The largest cutoff is
    // limit/18, so truncating the series at the table limit costs at most
    // ~e^{-18} relative.
    let x0 = limit as f64 / 36.0;
    let cutoffs = [x0 / 2.0, x0, 2.0 * x0];
    let mut sums = [0.0f64; 3];
    for n in 1..=limit {
        let a_over_n = table.lambda(n)? / n as f64;
        for (s, &x) in sums.iter_mut().zip(&cutoffs) {
            *s += a_over_n * (-(n as f64) / x).exp();
        }
    }
    // S(X) = L + c1/X + O(X^-2): 2 S(2X) - S(X) kills the 1/X term.
    let r_half = 2.0 * sums[1] - sums[0];
    let r_full = 2.0 * sums[2] - sums[1];
    let tail = (-(limit as f64) / cutoffs[2]).exp() * 20.0;
    let error_estimate = (r_full - r_half).abs() + tail;
    if error_estimate > target {
        return Err(Error::NotConverged(format!(
            "cutoff spread {error_estimate:.3e} exceeds target {target:.3e}"
        )));
    }
    let value = r_full;
    Ok(LSym2Estimate { value, error_estimate, c_g: 6.0 / std::f64::consts::PI.powi(2) * value })
}

/// The Rankin-Selberg error term E(x) = sum_{n <= x} lambda_g(n)^2 - c_g x
/// sampled on a grid.
#[derive(Debug, Clone)]
pub struct RSErrorSeries {
    pub xs: Vec<u64>,
    pub es: Vec<f64>,
    pub c_g: f64,
}

pub fn rs_error_series(table: &CoeffTable, grid: &[u64]) -> Result<RSErrorSeries> {
    let max_x = grid.iter().copied().max().unwrap_or(0);
    if max_x > table.limit() {
        return Err(Error::TableTooSmall { needed: max_x, limit: table.limit() });
    }
    let mut sorted: Vec<u64> = grid.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let c_g = l_sym2_at_1(table, 1e-4)?.c_g;
    let mut es = Vec::with_capacity(sorted.len());
    let mut prefix = 0.0f64;
    let mut next = 1u64;
    for &x in &sorted {
        while next <= x {
            let lg = table.lambda_g(next)?;
            prefix += lg * lg;
            next += 1;
        }
        es.push(prefix - c_g * x as f64);
    }
    Ok(RSErrorSeries { xs: sorted, es, c_g })
}

/// Geometric grid of integers from lo to hi inclusive.
pub fn geometric_grid(lo: u64, hi: u64, points: usize) -> Vec<u64> {
    assert!(lo >= 1 && hi >= lo && points >= 2);
    let ratio = (hi as f64 / lo as f64).powf(1.0 / (points - 1) as f64);
    let mut out: Vec<u64> = (0..points)
        .map(|i| ((lo as f64) * ratio.powi(i as i32)).round() as u64)
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// sum_{n <= x} rad(nq)^{-1/2} divided by rad(q)^{-1/2} x^{1/2}.
pub fn radical_sum_check(x: u64, q: u64) -> Result<f64> {
    if x == 0 || x > 10_000_000 || q == 0 || q > 1_000_000 {
        return Err(Error::ConfigInvalid(format!("x={x}, q={q} out of range")));
    }
    // Radical sieve: multiply each index by every prime dividing it.
    let mut rad = vec![1u32; x as usize + 1];
    for p in 2..=x as usize {
        if rad[p] == 1 {
            let mut m = p;
            while m <= x as usize {
                rad[m] *= p as u32;
                m += p;
            }
        }
    }
    let rad_q = radical(q);
    let mut sum = 0.0f64;
    for n in 1..=x as usize {
        let rn = rad[n] as u64;
        // rad(nq) = rad(n) rad(q) / rad(gcd): shared primes counted once.
        let rnq = rn / gcd(rn, rad_q) * rad_q;
        sum += 1.0 / (rnq as f64).sqrt();
    }
    Ok(sum * (rad_q as f64).sqrt() / (x as f64).sqrt())
}

/// Least-squares fit of log y against log x.
#[derive(Debug, Clone, Copy)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual in log space.
    pub residual: f64,
    /// Points dropped because y <= 0.
    pub dropped: usize,
}

pub fn exponent_fit(points: &[(f64, f64)]) -> Result<FitResult> {
    if points.len() < 4 {
        return Err(Error::DegenerateFit(format!("{} points < 4", points.len())));
    }
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|&&(x, y)| x > 0.0 && y > 0.0)
        .map(|&(x, y)| (x.ln(), y.ln()))
        .collect();
    let dropped = points.len() - usable.len();
    let n = usable.len() as f64;
    if usable.len() < 2 {
        return Err(Error::DegenerateFit("fewer than 2 positive points".into()));
    }
    let sx: f64 = usable.iter().map(|p| p.0).sum();
    let sy: f64 = usable.iter().map(|p| p.1).sum();
    let sxx: f64 = usable.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = usable.iter().map(|p| p.0 * p.1).sum();
    let det = n * sxx - sx * sx;
    if det.abs() < 1e-12 * n * sxx.max(1.0) {
        return Err(Error::DegenerateFit("identical x values".into()));
    }
    let slope = (n * sxy - sx * sy) / det;
    let intercept = (sy - slope * sx) / n;
    let residual = (usable
        .iter()
        .map(|&(x, y)| {
            let r = y - (slope * x + intercept);
            r * r
        })
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(FitResult { slope, intercept, residual, dropped })
}

/// Count strict sign changes in a series (zeros are skipped).
pub fn sign_changes(values: &[f64]) -> usize {
    let mut count = 0;
    let mut last = 0.0f64;
    for &v in values {
        if v == 0.0 {
            continue;
        }
        if last != 0.0 && v.signum() != last.signum() {
            count += 1;
        }
        last = v;
    }
    count
}
