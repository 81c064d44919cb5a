//! Hecke-Fourier coefficient tables for two concrete degree-3 objects: the
//! symmetric square of the discriminant form (coefficients exact from the
//! tau function) and the triple divisor function d3. The integer layer is
//! exact: tau is built from the q-expansion in checked 128-bit arithmetic
//! and only normalized to floating point at the boundary.

use std::io::Read as _;
use std::path::Path;

use crate::arith::{factorize, gcd};
use crate::error::{Error, Result};
use crate::report::write_atomic;

/// Hard cap on the tau table length.
pub const TAU_CAP: u64 = 10_000_000;

/// tau(n) for 1 <= n <= x, from the q-expansion
///   q prod (1-q^n)^24 = q * J^8,  J = sum_k (-1)^k (2k+1) q^{k(k+1)/2}.
/// Seven sparse multiplies in checked i128; errors rather than wrapping.
pub fn build_tau_table(x: u64) -> Result<Vec<i128>> {
    if x == 0 || x > TAU_CAP {
        return Err(Error::OverflowRisk { n: x });
    }
    let len = x as usize;
    // Sparse Jacobi factor: (offset, coefficient) with offsets < len.
    let mut sparse: Vec<(usize, i128)> = Vec::new();
    let mut k = 0usize;
    loop {
        let t = k * (k + 1) / 2;
        if t >= len {
            break;
        }
        let c = (2 * k + 1) as i128;
        sparse.push((t, if k % 2 == 0 { c } else { -c }));
        k += 1;
    }
    let mut dense = vec![0i128; len];
    for &(t, c) in &sparse {
        dense[t] = c;
    }
    for _pass in 0..7 {
        let mut next = vec![0i128; len];
        for &(t, c) in &sparse {
            for i in t..len {
                let term = c
                    .checked_mul(dense[i - t])
                    .ok_or(Error::OverflowRisk { n: i as u64 + 1 })?;
                next[i] = next[i]
                    .checked_add(term)
                    .ok_or(Error::OverflowRisk { n: i as u64 + 1 })?;
            }
        }
        dense = next;
    }
    // tau(n) is the coefficient of q^n = q^{1 + (n-1)}.
    Ok(dense)
}

/// Normalized eigenvalue lambda(p^j) = tau(p^j)/p^{11j/2} satisfies the
/// Chebyshev-style recursion l_{j+1} = l_1 l_j - l_{j-1}.
fn lambda_g_powers(lambda_p: f64, max_j: usize) -> Vec<f64> {
    let mut l = vec![0.0; max_j + 1];
    l[0] = 1.0;
    if max_j >= 1 {
        l[1] = lambda_p;
    }
    for j in 1..max_j {
        l[j + 1] = lambda_p * l[j] - l[j - 1];
    }
    l
}

/// Smallest-prime-factor sieve.
fn spf_sieve(limit: usize) -> Vec<u32> {
    let mut spf = vec![0u32; limit + 1];
    for i in 2..=limit {
        if spf[i] == 0 {
            let mut m = i;
            while m <= limit {
                if spf[m] == 0 {
                    spf[m] = i as u32;
                }
                m += i;
            }
        }
    }
    spf
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoeffSource {
    Sym2Delta,
    D3,
}

impl CoeffSource {
    pub fn name(&self) -> &'static str {
        match self {
            CoeffSource::Sym2Delta => "sym2delta",
            CoeffSource::D3 => "d3",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "sym2delta" => Ok(CoeffSource::Sym2Delta),
            "d3" => Ok(CoeffSource::D3),
            other => Err(Error::ConfigInvalid(format!("unknown source '{other}'"))),
        }
    }
}

/// lambda(1, n) for n up to the limit, with the exact tau cache kept for
/// the symmetric-square source.
#[derive(Debug, Clone)]
pub struct CoeffTable {
    source: CoeffSource,
    limit: u64,
    lambda: Vec<f64>,
    tau: Option<Vec<i128>>,
}

impl CoeffTable {
    pub fn build(source: CoeffSource, limit: u64) -> Result<Self> {
        match source {
            CoeffSource::Sym2Delta => {
                let tau = build_tau_table(limit)?;
                Ok(Self::from_tau(tau, limit))
            }
            CoeffSource::D3 => {
                let lambda = d3_table(limit as usize);
                Ok(CoeffTable { source, limit, lambda, tau: None })
            }
        }
    }

    /// Build reusing a disk cache for tau under `cache_dir`.
    pub fn build_cached(source: CoeffSource, limit: u64, cache_dir: &Path) -> Result<Self> {
        if source != CoeffSource::Sym2Delta {
            return Self::build(source, limit);
        }
        let path = cache_dir.join("tau.bin");
        if let Ok(tau) = read_tau_cache(&path, limit) {
            return Ok(Self::from_tau(tau, limit));
        }
        let tau = build_tau_table(limit)?;
        std::fs::create_dir_all(cache_dir)
            .map_err(|e| Error::ConfigInvalid(format!("create {cache_dir:?}: {e}")))?;
        write_tau_cache(&path, &tau)?;
        Ok(Self::from_tau(tau, limit))
    }

    fn from_tau(tau: Vec<i128>, limit: u64) -> Self {
        let lambda = sym2_lambda_table(&tau, limit as usize);
        CoeffTable { source: CoeffSource::Sym2Delta, limit, lambda, tau: Some(tau) }
    }

    pub fn source(&self) -> CoeffSource {
        self.source
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    /// lambda(1, n) = lambda_f(n).
    pub fn lambda(&self, n: u64) -> Result<f64> {
        if n == 0 || n > self.limit {
            return Err(Error::TableTooSmall { needed: n, limit: self.limit });
        }
        Ok(self.lambda[n as usize - 1])
    }

    /// Raw tau(n) (Sym2Delta only).
    pub fn tau(&self, n: u64) -> Result<i128> {
        let t = self
            .tau
            .as_ref()
            .ok_or_else(|| Error::ConfigInvalid("tau cache only exists for sym2delta".into()))?;
        if n == 0 || n > self.limit {
            return Err(Error::TableTooSmall { needed: n, limit: self.limit });
        }
        Ok(t[n as usize - 1])
    }

    /// Normalized GL(2) eigenvalue lambda_g(n) = tau(n)/n^{11/2}.
    pub fn lambda_g(&self, n: u64) -> Result<f64> {
        Ok(self.tau(n)? as f64 / (n as f64).powf(5.5))
    }
}

/// A(1, n) table for sym^2 of the discriminant form, filled multiplicatively
/// from A(1, p^e) = sum_{i <= e/2} lambda_g(p^{2(e-2i)}).
fn sym2_lambda_table(tau: &[i128], limit: usize) -> Vec<f64> {
    let spf = spf_sieve(limit);
    let mut lam = vec![0.0f64; limit];
    if limit >= 1 {
        lam[0] = 1.0;
    }
    let local = |p: usize, e: u32| -> f64 {
        let lp = tau[p - 1] as f64 / (p as f64).powf(5.5);
        let l = lambda_g_powers(lp, 2 * e as usize);
        let mut a = 0.0;
        let mut i = 0u32;
        while 2 * i <= e {
            a += l[2 * (e - 2 * i) as usize];
            i += 1;
        }
        a
    };
    for n in 2..=limit {
        let p = spf[n] as usize;
        let mut e = 0u32;
        let mut r = n;
        while r % p == 0 {
            r /= p;
            e += 1;
        }
        lam[n - 1] = lam[r - 1] * local(p, e);
    }
    lam
}

/// d3 table by two divisor convolutions.
fn d3_table(limit: usize) -> Vec<f64> {
    let mut d = vec![0u32; limit + 1];
    for a in 1..=limit {
        let mut m = a;
        while m <= limit {
            d[m] += 1;
            m += a;
        }
    }
    let mut d3 = vec![0u64; limit + 1];
    for a in 1..=limit {
        let mut m = a;
        while m <= limit {
            d3[m] += d[m / a] as u64;
            m += a;
        }
    }
    (1..=limit).map(|n| d3[n] as f64).collect()
}

/// A(1, n) by the literal divisor sum over d^2 m = n, with lambda_g(m^2)
/// computed through the Hecke recursion from the factorization of m.
/// Independent oracle for the multiplicative table fill.
pub fn sym2_coeff_divisor_sum(table: &CoeffTable, n: u64) -> Result<f64> {
    let mut acc = 0.0;
    let mut d = 1u64;
    while d * d <= n {
        if n % (d * d) == 0 {
            let m = n / (d * d);
            // lambda_g(m^2) multiplicatively from tau(p).
            let mut v = 1.0;
            for &(p, e) in factorize(m).factors() {
                let lp = table.tau(p)? as f64 / (p as f64).powf(5.5);
                let l = lambda_g_powers(lp, 2 * e as usize);
                v *= l[2 * e as usize];
            }
            acc += v;
        }
        d += 1;
    }
    Ok(acc)
}

/// lambda(1, n) for the chosen source; for Sym2Delta this is A(1, n).
pub fn sym2_coeff(table: &CoeffTable, n: u64) -> Result<f64> {
    if table.source() != CoeffSource::Sym2Delta {
        return Err(Error::ConfigInvalid("sym2_coeff requires the sym2delta source".into()));
    }
    table.lambda(n)
}

/// lambda(a, b) by the Hecke relation
///   lambda(a, b) = sum_{d | (a,b)} mu(d) lambda(a/d, 1) lambda(1, b/d),
/// using self-duality lambda(a, 1) = lambda(1, a).
pub fn hecke_double(a: u64, b: u64, table: &CoeffTable) -> Result<f64> {
    let mut acc = 0.0;
    for &d in factorize(gcd(a, b)).divisors().iter() {
        let mu = crate::arith::mobius(d);
        if mu == 0 {
            continue;
        }
        acc += mu as f64 * table.lambda(a / d)? * table.lambda(b / d)?;
    }
    Ok(acc)
}

/// (sum_{a^2 b <= x} lambda(a,b)^2) / x.
pub fn rs_average_ratio(x: u64, table: &CoeffTable) -> Result<f64> {
    if x == 0 || x > table.limit() {
        return Err(Error::TableTooSmall { needed: x, limit: table.limit() });
    }
    let mut acc = 0.0;
    let mut a = 1u64;
    while a * a <= x {
        let bmax = x / (a * a);
        for b in 1..=bmax {
            let v = hecke_double(a, b, table)?;
            acc += v * v;
        }
        a += 1;
    }
    Ok(acc / x as f64)
}

/// Dyadic-shell weighted sum: sum over x <= a^2 b < 2x of lambda(a,b)^2/(a^3 b^2).
pub fn rs_weighted_sum(x: u64, table: &CoeffTable) -> Result<f64> {
    if x == 0 || 2 * x - 1 > table.limit() {
        return Err(Error::TableTooSmall { needed: 2 * x - 1, limit: table.limit() });
    }
    let mut acc = 0.0;
    let mut a = 1u64;
    while a * a < 2 * x {
        let lo = x.div_ceil(a * a);
        let hi = (2 * x - 1) / (a * a);
        for b in lo..=hi {
            let v = hecke_double(a, b, table)?;
            acc += v * v / ((a as f64).powi(3) * (b as f64).powi(2));
        }
        a += 1;
    }
    Ok(acc)
}

/// d3(n): ordered triples (a, b, c) with a b c = n.
pub fn d3(n: u64) -> Result<u64> {
    if n == 0 || n > 100_000_000 {
        return Err(Error::TableTooSmall { needed: n, limit: 100_000_000 });
    }
    let mut out = 1u64;
    for &(_, e) in factorize(n).factors() {
        // Number of (i, j) with i + j <= e: C(e+2, 2).
        out *= (e as u64 + 1) * (e as u64 + 2) / 2;
    }
    Ok(out)
}

const TAU_MAGIC: &[u8; 4] = b"TAUC";
const TAU_VERSION: u32 = 1;

/// Binary tau cache: magic, version, length X, little-endian 128-bit values.
pub fn write_tau_cache(path: &Path, tau: &[i128]) -> Result<()> {
    let mut bytes = Vec::with_capacity(16 + tau.len() * 16);
    bytes.extend_from_slice(TAU_MAGIC);
    bytes.extend_from_slice(&TAU_VERSION.to_le_bytes());
    bytes.extend_from_slice(&(tau.len() as u64).to_le_bytes());
    for v in tau {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    write_atomic(path, &bytes)
}

/// Read at least `need` values from a tau cache, truncating to `need`.
pub fn read_tau_cache(path: &Path, need: u64) -> Result<Vec<i128>> {
    let err = |m: String| Error::ConfigInvalid(m);
    let mut f = std::fs::File::open(path).map_err(|e| err(format!("open {path:?}: {e}")))?;
    let mut head = [0u8; 16];
    f.read_exact(&mut head).map_err(|e| err(format!("read header: {e}")))?;
    if &head[0..4] != TAU_MAGIC {
        return Err(err("bad tau cache magic".into()));
    }
    if u32::from_le_bytes(head[4..8].try_into().unwrap()) != TAU_VERSION {
        return Err(err("bad tau cache version".into()));
    }
    let stored = u64::from_le_bytes(head[8..16].try_into().unwrap());
    if stored < need {
        return Err(Error::TableTooSmall { needed: need, limit: stored });
    }
    let mut buf = vec![0u8; need as usize * 16];
    f.read_exact(&mut buf).map_err(|e| err(format!("read body: {e}")))?;
    Ok(buf
        .chunks_exact(16)
        .map(|c| i128::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

/// CSV export of tau values (used by the coeffs subcommand).
pub fn tau_csv(table: &CoeffTable, up_to: u64) -> Result<crate::report::CsvTable> {
    let mut t = crate::report::CsvTable::new(vec!["n", "tau", "lambda_g", "sym2_a1n"]);
    for n in 1..=up_to.min(table.limit()) {
        t.push_row(vec![
            n.to_string(),
            table.tau(n)?.to_string(),
            crate::report::fmt_f64(table.lambda_g(n)?),
            crate::report::fmt_f64(table.lambda(n)?),
        ]);
    }
    Ok(t)
}
