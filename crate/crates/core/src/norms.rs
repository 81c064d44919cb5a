//! Bilinear norms: the operator norm of alpha -> sum_b int |sum_n alpha_n
//! S(kbar, n; b) n^{iy}|^2 dy over b in [Q, 2Q) coprime to k and y in
//! [Y, 2Y], evaluated two independent ways (dense Hermitian eigensolve and
//! power iteration), with the dyadic-max variant, the large-sieve and
//! dual-norm comparisons, and the hybrid large sieve ratio itself.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::arith::{euler_phi, gcd, inv_u64, radical};
use crate::error::{Error, Result};
use crate::rng::StreamRng;

/// A discretized norm problem. The y-integral over [Y, 2Y] uses a trapezoid
/// rule with step at most 1/(4 log 2N'), fine enough to resolve n^{iy}.
#[derive(Debug, Clone, Copy)]
pub struct NormInstance {
    pub n_prime: usize,
    pub q: u64,
    pub k: u64,
    pub y_len: f64,
    pub eta: i8,
    /// Extra grid refinement: the step is divided by 2^refine.
    pub refine: u32,
}

impl NormInstance {
    pub fn new(n_prime: usize, q: u64, k: u64, y_len: f64) -> Result<Self> {
        if n_prime == 0 || n_prime > 400 {
            return Err(Error::ConfigInvalid(format!("N' = {n_prime} out of (0, 400]")));
        }
        if q == 0 || q > 40 {
            return Err(Error::ConfigInvalid(format!("Q = {q} out of (0, 40]")));
        }
        if k == 0 || k > q {
            return Err(Error::ConfigInvalid(format!("k = {k} must satisfy 1 <= k <= Q = {q}")));
        }
        if !(y_len > 0.0) || y_len > 100.0 {
            return Err(Error::ConfigInvalid(format!("Y = {y_len} out of (0, 100]")));
        }
        let inst = NormInstance { n_prime, q, k, y_len, eta: 1, refine: 0 };
        if inst.grid_points() * n_prime > 1_000_000 {
            return Err(Error::ConfigInvalid("grid size x N' exceeds 1e6".into()));
        }
        Ok(inst)
    }

    pub fn with_refine(mut self, refine: u32) -> Self {
        self.refine = refine;
        self
    }

    fn step(&self) -> f64 {
        let base = 1.0 / (4.0 * (2.0 * self.n_prime as f64).ln());
        base / (1u64 << self.refine) as f64
    }

    pub fn grid_points(&self) -> usize {
        (self.y_len / self.step()).ceil() as usize + 1
    }

    /// Quadrature nodes and trapezoid weights covering [Y, 2Y].
    fn grid(&self) -> (Vec<f64>, Vec<f64>) {
        let pts = self.grid_points();
        let h = self.y_len / (pts - 1).max(1) as f64;
        let ys: Vec<f64> = (0..pts).map(|j| self.y_len + j as f64 * h).collect();
        let mut ws = vec![h; pts];
        ws[0] = h / 2.0;
        ws[pts - 1] = h / 2.0;
        (ys, ws)
    }

    /// Kloosterman rows: for each b in [Q, 2Q) with (b, k) = 1, the vector
    /// S(eta kbar, n; b) over n in [N', 2N').
    fn rows(&self) -> Vec<Vec<f64>> {
        let mut rows = Vec::new();
        for b in self.q..2 * self.q {
            if gcd(b, self.k) != 1 {
                continue;
            }
            let kbar = inv_u64(self.k % b, b).expect("(b, k) = 1") as i64;
            let m = self.eta as i64 * kbar;
            // S(m, n; b) depends on n mod b only.
            let mut by_residue = vec![0.0f64; b as usize];
            for (r, slot) in by_residue.iter_mut().enumerate() {
                *slot = crate::expsums::kloosterman(m, r as i64, b).expect("b small").re;
            }
            rows.push(
                (self.n_prime..2 * self.n_prime)
                    .map(|n| by_residue[(n as u64 % b) as usize])
                    .collect(),
            );
        }
        rows
    }

    /// The Gram matrix G[i][j] = K[i][j] * I[i][j] with
    /// K = sum_b S(kbar, n_i; b) S(kbar, n_j; b) and
    /// I[i][j] = int_Y^{2Y} (n_i/n_j)^{iy} dy (trapezoid weights).
    fn gram(&self) -> DMatrix<Complex64> {
        let n = self.n_prime;
        let rows = self.rows();
        let (ys, ws) = self.grid();
        let logs: Vec<f64> = (n..2 * n).map(|v| (v as f64).ln()).collect();
        let mut g = DMatrix::from_element(n, n, Complex64::default());
        for i in 0..n {
            for j in 0..=i {
                let k_sum: f64 = rows.iter().map(|r| r[i] * r[j]).sum();
                let dl = logs[i] - logs[j];
                let mut quad = Complex64::default();
                for (y, w) in ys.iter().zip(&ws) {
                    let th = y * dl;
                    quad += Complex64::new(th.cos() * w, th.sin() * w);
                }
                let v = quad * k_sum;
                g[(i, j)] = v;
                g[(j, i)] = v.conj();
            }
        }
        g
    }

    /// Y-free Gram: K alone.
    fn gram_nointegral(&self) -> DMatrix<f64> {
        let n = self.n_prime;
        let rows = self.rows();
        let mut g = DMatrix::from_element(n, n, 0.0f64);
        for i in 0..n {
            for j in 0..=i {
                let k_sum: f64 = rows.iter().map(|r| r[i] * r[j]).sum();
                g[(i, j)] = k_sum;
                g[(j, i)] = k_sum;
            }
        }
        g
    }
}

/// Largest eigenvalue of a Hermitian complex matrix via the real symmetric
/// embedding [[Re, -Im], [Im, Re]] (eigenvalues doubled in multiplicity).
fn hermitian_lambda_max(g: &DMatrix<Complex64>) -> f64 {
    let n = g.nrows();
    let mut m = DMatrix::from_element(2 * n, 2 * n, 0.0f64);
    for i in 0..n {
        for j in 0..n {
            let v = g[(i, j)];
            m[(i, j)] = v.re;
            m[(i + n, j + n)] = v.re;
            m[(i, j + n)] = -v.im;
            m[(i + n, j)] = v.im;
        }
    }
    let eig = m.symmetric_eigenvalues();
    eig.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
}

/// Power iteration for the largest eigenvalue of a Hermitian PSD matrix.
fn power_iteration(g: &DMatrix<Complex64>, seed: u64) -> Result<f64> {
    let n = g.nrows();
    let mut rng = StreamRng::new(seed, 0xa11ce);
    let mut v: Vec<Complex64> =
        (0..n).map(|_| Complex64::new(rng.f64() - 0.5, rng.f64() - 0.5)).collect();
    let norm = |v: &[Complex64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let nv = norm(&v);
    v.iter_mut().for_each(|z| *z /= nv);
    let mut lambda = 0.0f64;
    for _ in 0..20_000 {
        let mut w = vec![Complex64::default(); n];
        for i in 0..n {
            let mut acc = Complex64::default();
            for j in 0..n {
                acc += g[(i, j)] * v[j];
            }
            w[i] = acc;
        }
        // Rayleigh quotient <v, Gv>; v is unit.
        let rq: Complex64 = v.iter().zip(&w).map(|(a, b)| a.conj() * b).sum();
        let next = rq.re;
        let wn = norm(&w);
        if wn == 0.0 {
            return Ok(0.0);
        }
        w.iter_mut().for_each(|z| *z /= wn);
        v = w;
        if (next - lambda).abs() <= 1e-12 * next.abs().max(1.0) {
            return Ok(next);
        }
        lambda = next;
    }
    Err(Error::IterationDiverged(format!(
        "power iteration did not stabilize in 20000 steps (last {lambda})"
    )))
}

/// Both routes to the norm, plus the dual (operator applied the other way).
#[derive(Debug, Clone, Copy)]
pub struct NormEval {
    pub dense: f64,
    pub power: f64,
    pub dual_power: f64,
}

/// The norm as the largest eigenvalue of the Gram form, dense route.
pub fn norm_n1(inst: &NormInstance) -> Result<f64> {
    Ok(hermitian_lambda_max(&inst.gram()))
}

/// All three evaluation routes for one instance.
pub fn norm_n1_eval(inst: &NormInstance, seed: u64) -> Result<NormEval> {
    let g = inst.gram();
    let dense = hermitian_lambda_max(&g);
    let power = power_iteration(&g, seed)?;
    let dual_power = dual_norm_power(inst, seed)?;
    Ok(NormEval { dense, power, dual_power })
}

/// Dual route: power iteration on T T* acting on (b, y)-space, where
/// (T alpha)_{b,l} = sqrt(w_l) sum_n alpha_n S(kbar, n; b) n^{i y_l}.
/// lambda_max(T T*) = lambda_max(T* T), the norm itself.
pub fn dual_norm_power(inst: &NormInstance, seed: u64) -> Result<f64> {
    let rows = inst.rows();
    let (ys, ws) = inst.grid();
    let n = inst.n_prime;
    let b_count = rows.len();
    let g_count = ys.len();
    if b_count == 0 {
        return Ok(0.0);
    }
    let dim = b_count * g_count;
    let logs: Vec<f64> = (n..2 * n).map(|v| (v as f64).ln()).collect();
    let sqrt_w: Vec<f64> = ws.iter().map(|w| w.sqrt()).collect();
    // Phases n^{iy} cached per (grid, n).
    let phase: Vec<Vec<Complex64>> = ys
        .iter()
        .map(|y| logs.iter().map(|l| Complex64::new((y * l).cos(), (y * l).sin())).collect())
        .collect();
    let apply_t = |alpha: &[Complex64]| -> Vec<Complex64> {
        let mut out = vec![Complex64::default(); dim];
        for (bi, row) in rows.iter().enumerate() {
            for (li, ph) in phase.iter().enumerate() {
                let mut acc = Complex64::default();
                for j in 0..n {
                    acc += alpha[j] * row[j] * ph[j];
                }
                out[bi * g_count + li] = acc * sqrt_w[li];
            }
        }
        out
    };
    let apply_t_star = |beta: &[Complex64]| -> Vec<Complex64> {
        let mut out = vec![Complex64::default(); n];
        for (bi, row) in rows.iter().enumerate() {
            for (li, ph) in phase.iter().enumerate() {
                let b = beta[bi * g_count + li] * sqrt_w[li];
                for j in 0..n {
                    out[j] += b * row[j] * ph[j].conj();
                }
            }
        }
        out
    };
    let mut rng = StreamRng::new(seed, 0xd0a1);
    let mut v: Vec<Complex64> =
        (0..dim).map(|_| Complex64::new(rng.f64() - 0.5, rng.f64() - 0.5)).collect();
    let norm = |v: &[Complex64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let nv = norm(&v);
    v.iter_mut().for_each(|z| *z /= nv);
    let mut lambda = 0.0f64;
    for _ in 0..20_000 {
        let w = apply_t(&apply_t_star(&v));
        let rq: Complex64 = v.iter().zip(&w).map(|(a, b)| a.conj() * b).sum();
        let next = rq.re;
        let wn = norm(&w);
        if wn == 0.0 {
            return Ok(0.0);
        }
        v = w;
        v.iter_mut().for_each(|z| *z /= wn);
        if (next - lambda).abs() <= 1e-12 * next.abs().max(1.0) {
            return Ok(next);
        }
        lambda = next;
    }
    Err(Error::IterationDiverged("dual power iteration did not stabilize".into()))
}

/// The Y-free norm (no integral): largest eigenvalue of K.
pub fn norm_n1_nointegral(n_prime: usize, q: u64, k: u64) -> Result<f64> {
    let inst = NormInstance::new(n_prime, q, k, 1.0)?;
    let g = inst.gram_nointegral();
    let eig = g.symmetric_eigenvalues();
    Ok(eig.iter().cloned().fold(f64::NEG_INFINITY, f64::max))
}

/// The dyadic-max variant: max over X = 2^t with N'/X^2 >= 1 and Q/X >= 1
/// of X * norm_n1(N'/X^2, Q/X, k, Y).
pub fn norm_n(inst: &NormInstance) -> Result<f64> {
    let mut best: f64 = 0.0;
    let mut x = 1u64;
    loop {
        let np = inst.n_prime as u64 / (x * x);
        let qx = inst.q / x;
        if np == 0 {
            break;
        }
        if qx >= 1 {
            let sub = NormInstance {
                n_prime: np as usize,
                q: qx,
                k: inst.k,
                y_len: inst.y_len,
                eta: inst.eta,
                refine: inst.refine,
            };
            best = best.max(x as f64 * norm_n1(&sub)?);
        }
        x *= 2;
        if x * x > inst.n_prime as u64 {
            break;
        }
    }
    Ok(best)
}

/// norm_n divided by the dual-norm comparison quantity
/// Q (N' + k Q^2 Y^2 / sqrt(rad(k) N') + Q sqrt(N'/rad(k))).
pub fn dual_bound_ratio(inst: &NormInstance) -> Result<f64> {
    let v = norm_n(inst)?;
    let np = inst.n_prime as f64;
    let q = inst.q as f64;
    let k = inst.k as f64;
    let y = inst.y_len;
    let rad_k = radical(inst.k) as f64;
    let bound = q * (np + k * q * q * y * y / (rad_k * np).sqrt() + q * (np / rad_k).sqrt());
    Ok(v / bound)
}

/// norm_n1 divided by the large-sieve comparison Q (Q^2 Y + N').
pub fn large_sieve_bound_ratio(inst: &NormInstance) -> Result<f64> {
    let v = norm_n1(inst)?;
    let np = inst.n_prime as f64;
    let q = inst.q as f64;
    Ok(v / (q * (q * q * inst.y_len + np)))
}

/// Rayleigh quotient of the Gram form at the uniform unit vector; any unit
/// vector lower-bounds the operator norm.
pub fn uniform_vector_lower_bound(inst: &NormInstance) -> f64 {
    let g = inst.gram();
    let n = inst.n_prime;
    let mut acc = Complex64::default();
    for i in 0..n {
        for j in 0..n {
            acc += g[(i, j)];
        }
    }
    acc.re / n as f64
}

/// A hybrid large-sieve problem.
#[derive(Debug, Clone)]
pub struct LargeSieveInstance {
    pub d: u64,
    pub y_len: f64,
    pub coeffs: Vec<Complex64>,
}

impl LargeSieveInstance {
    pub fn new(d: u64, y_len: f64, coeffs: Vec<Complex64>) -> Result<Self> {
        if d == 0 || d > 500 {
            return Err(Error::ConfigInvalid(format!("d = {d} out of (0, 500]")));
        }
        if coeffs.is_empty() || coeffs.len() > 2000 {
            return Err(Error::ConfigInvalid("N out of (0, 2000]".into()));
        }
        if !(y_len >= 1.0) || y_len > 100.0 {
            return Err(Error::ConfigInvalid(format!("Y = {y_len} out of [1, 100]")));
        }
        Ok(LargeSieveInstance { d, y_len, coeffs })
    }

    /// Random unit-norm coefficients, deterministic in (seed, stream).
    pub fn random(d: u64, y_len: f64, n: usize, seed: u64, stream: u64) -> Result<Self> {
        let mut rng = StreamRng::new(seed, stream);
        let mut coeffs: Vec<Complex64> =
            (0..n).map(|_| Complex64::new(rng.f64() - 0.5, rng.f64() - 0.5)).collect();
        let norm = coeffs.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        coeffs.iter_mut().for_each(|z| *z /= norm);
        Self::new(d, y_len, coeffs)
    }
}

/// LHS of the hybrid large sieve: sum over all psi mod d of
/// int_{-Y}^{Y} |sum_n a_n psi(n) n^{iy}|^2 dy. Expanding the square and
/// summing over psi first gives phi(d) times the sum over n = m mod d
/// (both coprime to d) of a_n conj(a_m) K(n, m), with the y-integral in
/// closed form: K = 2Y for n = m, else 2 sin(Y log(n/m)) / log(n/m).
pub fn large_sieve_lhs(inst: &LargeSieveInstance) -> f64 {
    let d = inst.d;
    let n_len = inst.coeffs.len();
    let phi = euler_phi(d) as f64;
    let y = inst.y_len;
    let mut acc = 0.0f64;
    for r in 0..d.min(n_len as u64 + 1) {
        if gcd(r, d) != 1 && d > 1 {
            continue;
        }
        // All indices in this residue class.
        let mut idx = Vec::new();
        let mut n = if r == 0 { d } else { r };
        while n <= n_len as u64 {
            idx.push(n as usize);
            n += d;
        }
        for (a_pos, &i) in idx.iter().enumerate() {
            let ai = inst.coeffs[i - 1];
            acc += ai.norm_sqr() * 2.0 * y;
            for &j in &idx[a_pos + 1..] {
                let dl = (i as f64 / j as f64).ln();
                let kernel = 2.0 * (y * dl).sin() / dl;
                // Twice the real part covers (i, j) and (j, i).
                acc += 2.0 * kernel * (ai * inst.coeffs[j - 1].conj()).re;
            }
        }
    }
    phi * acc
}

/// Brute-force LHS: loop every character and integrate |...|^2 by Simpson
/// quadrature. Small-instance oracle for `large_sieve_lhs`.
pub fn large_sieve_lhs_bruteforce(inst: &LargeSieveInstance, quad_points: usize) -> Result<f64> {
    let chars = crate::characters::char_group(inst.d)?;
    let n_len = inst.coeffs.len();
    let pts = if quad_points % 2 == 0 { quad_points + 1 } else { quad_points };
    let h = 2.0 * inst.y_len / (pts - 1) as f64;
    let mut total = 0.0;
    for chi in &chars {
        let vals: Vec<Complex64> = (n_len.min(1)..=n_len).map(|n| chi.eval_c64(n as i64)).collect();
        for p in 0..pts {
            let yv = -inst.y_len + p as f64 * h;
            let mut s = Complex64::default();
            for n in 1..=n_len {
                let v = vals[n - 1];
                if v != Complex64::default() {
                    let th = yv * (n as f64).ln();
                    s += inst.coeffs[n - 1] * v * Complex64::new(th.cos(), th.sin());
                }
            }
            let w = if p == 0 || p == pts - 1 {
                1.0
            } else if p % 2 == 1 {
                4.0
            } else {
                2.0
            };
            total += w * s.norm_sqr();
        }
    }
    Ok(total * h / 3.0)
}

/// LHS / ((dY + N) ||a||^2).
pub fn large_sieve_ratio(inst: &LargeSieveInstance) -> f64 {
    let lhs = large_sieve_lhs(inst);
    let norm_sq: f64 = inst.coeffs.iter().map(|z| z.norm_sqr()).sum();
    let n = inst.coeffs.len() as f64;
    lhs / ((inst.d as f64 * inst.y_len + n) * norm_sq)
}
