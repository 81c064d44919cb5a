//! Dirichlet characters mod q, represented by exponents against fixed
//! generators of the unit group (CRT over prime powers; mod 2^j uses the
//! {-1, 5} basis). Discrete logs are precomputed per modulus so repeated
//! evaluation is a table lookup. Values are exact roots of unity.

use std::sync::Arc;

use num_complex::Complex64;

use crate::arith::{factorize, gcd, gcd_i, lcm, mod_mul, mod_pow, reduce};
use crate::error::{Error, Result};

/// Largest modulus for which we will build a character group.
pub const MODULUS_CAP: u64 = 1_000_000;

const NO_DLOG: u32 = u32::MAX;

/// One cyclic factor of the unit group: a generator of known order together
/// with discrete logs of every unit in its prime-power component.
#[derive(Debug)]
pub struct CyclicFactor {
    pub prime: u64,
    pub exponent: u32,
    /// p^exponent, the CRT component this factor lives in.
    pub component: u64,
    /// Generator residue mod `component`.
    pub generator: u64,
    pub order: u64,
    /// dlog[x mod component] = k with generator^k contributing x, or NO_DLOG.
    dlog: Vec<u32>,
}

/// Fixed generators for (Z/q)* with discrete-log tables.
#[derive(Debug)]
pub struct UnitGroupBasis {
    q: u64,
    phi: u64,
    /// Group exponent: lcm of the factor orders.
    exponent: u64,
    factors: Vec<CyclicFactor>,
}

/// Primitive root mod p (p an odd prime), found by trial against the
/// prime factors of p-1.
fn primitive_root(p: u64) -> u64 {
    if p == 2 {
        return 1;
    }
    let fac = factorize(p - 1);
    'cand: for g in 2..p {
        for &(r, _) in fac.factors() {
            if mod_pow(g, (p - 1) / r, p) == 1 {
                continue 'cand;
            }
        }
        return g;
    }
    unreachable!("every odd prime has a primitive root")
}

fn build_odd_factor(p: u64, e: u32) -> CyclicFactor {
    let pe = p.pow(e);
    let mut g = primitive_root(p);
    if e > 1 {
        // g must stay primitive mod p^2 to generate all higher levels.
        if mod_pow(g, p - 1, p * p) == 1 {
            g += p;
        }
    }
    let order = pe / p * (p - 1);
    let mut dlog = vec![NO_DLOG; pe as usize];
    let mut x = 1u64;
    for k in 0..order {
        debug_assert_eq!(dlog[x as usize], NO_DLOG);
        dlog[x as usize] = k as u32;
        x = mod_mul(x, g, pe);
    }
    debug_assert_eq!(x, 1);
    CyclicFactor { prime: p, exponent: e, component: pe, generator: g % pe, order, dlog }
}

/// Factors for the 2-part. Empty for 2^1; one factor {3} for 2^2; the
/// {-1, 5} pair for 2^e with e >= 3.
fn build_two_factors(e: u32) -> Vec<CyclicFactor> {
    match e {
        0 | 1 => Vec::new(),
        2 => {
            let mut dlog = vec![NO_DLOG; 4];
            dlog[1] = 0;
            dlog[3] = 1;
            vec![CyclicFactor {
                prime: 2,
                exponent: 2,
                component: 4,
                generator: 3,
                order: 2,
                dlog,
            }]
        }
        _ => {
            let m = 1u64 << e;
            let half = 1u64 << (e - 2);
            let mut dlog_sign = vec![NO_DLOG; m as usize];
            let mut dlog_five = vec![NO_DLOG; m as usize];
            for eps in 0..2u64 {
                let mut x = if eps == 0 { 1 } else { m - 1 };
                for k in 0..half {
                    debug_assert_eq!(dlog_five[x as usize], NO_DLOG);
                    dlog_sign[x as usize] = eps as u32;
                    dlog_five[x as usize] = k as u32;
                    x = mod_mul(x, 5, m);
                }
            }
            vec![
                CyclicFactor {
                    prime: 2,
                    exponent: e,
                    component: m,
                    generator: m - 1,
                    order: 2,
                    dlog: dlog_sign,
                },
                CyclicFactor {
                    prime: 2,
                    exponent: e,
                    component: m,
                    generator: 5,
                    order: half,
                    dlog: dlog_five,
                },
            ]
        }
    }
}

impl UnitGroupBasis {
    pub fn new(q: u64) -> Result<Self> {
        if q == 0 || q > MODULUS_CAP {
            return Err(Error::ModulusTooLarge { modulus: q, cap: MODULUS_CAP });
        }
        let mut factors = Vec::new();
        for &(p, e) in factorize(q).factors() {
            if p == 2 {
                factors.extend(build_two_factors(e));
            } else {
                factors.push(build_odd_factor(p, e));
            }
        }
        let phi = factors.iter().map(|f| f.order).product::<u64>().max(1);
        let exponent = factors.iter().fold(1u64, |acc, f| lcm(acc, f.order));
        debug_assert_eq!(phi, crate::arith::euler_phi(q));
        Ok(UnitGroupBasis { q, phi, exponent, factors })
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn phi(&self) -> u64 {
        self.phi
    }

    pub fn exponent(&self) -> u64 {
        self.exponent
    }

    pub fn factors(&self) -> &[CyclicFactor] {
        &self.factors
    }

    /// Discrete log tuple of x, or None when gcd(x, q) > 1.
    pub fn dlog_into(&self, x: i64, out: &mut [u32]) -> bool {
        debug_assert_eq!(out.len(), self.factors.len());
        let xr = reduce(x, self.q);
        if gcd(xr, self.q) != 1 {
            return false;
        }
        for (o, f) in out.iter_mut().zip(&self.factors) {
            let v = f.dlog[(xr % f.component) as usize];
            debug_assert_ne!(v, NO_DLOG);
            *o = v;
        }
        true
    }

    /// All units ordered row-major by generator-exponent tuple (last factor
    /// fastest), so index arithmetic matches the `char_group` enumeration.
    pub fn units_row_major(&self) -> Vec<u64> {
        let mut units = vec![1u64 % self.q];
        for f in &self.factors {
            let gen_lift = self.lift_to_q(f);
            let mut next = Vec::with_capacity(units.len() * f.order as usize);
            let mut pw = 1u64 % self.q;
            let mut powers = Vec::with_capacity(f.order as usize);
            for _ in 0..f.order {
                powers.push(pw);
                pw = mod_mul(pw, gen_lift, self.q);
            }
            for &u in &units {
                for &p in &powers {
                    next.push(mod_mul(u, p, self.q));
                }
            }
            units = next;
        }
        debug_assert_eq!(units.len(), self.phi as usize);
        units
    }

    /// Lift a factor generator from its component to a residue mod q that is
    /// 1 on every other component.
    fn lift_to_q(&self, f: &CyclicFactor) -> u64 {
        let rest = self.q / f.component;
        if rest == 1 {
            return f.generator % self.q;
        }
        crate::arith::crt_pair(f.generator % f.component, f.component, 1 % rest, rest)
    }

    /// Row-major index of a character exponent tuple.
    pub fn tuple_index(&self, exps: &[u64]) -> usize {
        let mut idx = 0usize;
        for (f, &a) in self.factors.iter().zip(exps) {
            idx = idx * f.order as usize + a as usize;
        }
        idx
    }
}

/// An exact root of unity e(num/den), kept in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RootOfUnity {
    num: u64,
    den: u64,
}

impl RootOfUnity {
    pub fn new(num: u64, den: u64) -> Self {
        assert!(den > 0);
        let n = num % den;
        let g = gcd(n, den).max(1);
        if n == 0 {
            return RootOfUnity { num: 0, den: 1 };
        }
        RootOfUnity { num: n / g, den: den / g }
    }

    pub fn num(&self) -> u64 {
        self.num
    }

    pub fn den(&self) -> u64 {
        self.den
    }

    pub fn is_one(&self) -> bool {
        self.num == 0
    }

    pub fn conj(&self) -> Self {
        if self.num == 0 {
            *self
        } else {
            RootOfUnity { num: self.den - self.num, den: self.den }
        }
    }

    pub fn value(&self) -> Complex64 {
        let theta = 2.0 * std::f64::consts::PI * self.num as f64 / self.den as f64;
        Complex64::new(theta.cos(), theta.sin())
    }
}

/// A Dirichlet character mod q: exponent tuple against the basis generators,
/// with conductor computed structurally at construction.
#[derive(Debug, Clone)]
pub struct DirichletChar {
    basis: Arc<UnitGroupBasis>,
    exps: Vec<u64>,
    conductor: u64,
    order: u64,
}

impl DirichletChar {
    pub fn from_exps(basis: Arc<UnitGroupBasis>, exps: Vec<u64>) -> Self {
        assert_eq!(exps.len(), basis.factors().len());
        for (f, &a) in basis.factors().iter().zip(&exps) {
            assert!(a < f.order);
        }
        let conductor = structural_conductor(&basis, &exps);
        let order = exps
            .iter()
            .zip(basis.factors())
            .fold(1u64, |acc, (&a, f)| lcm(acc, f.order / gcd(a, f.order)));
        DirichletChar { basis, exps, conductor, order }
    }

    pub fn q(&self) -> u64 {
        self.basis.q()
    }

    pub fn exps(&self) -> &[u64] {
        &self.exps
    }

    pub fn basis(&self) -> &Arc<UnitGroupBasis> {
        &self.basis
    }

    /// Smallest f | q such that the character is induced from level f.
    pub fn conductor(&self) -> u64 {
        self.conductor
    }

    /// Order in the character group.
    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn is_principal(&self) -> bool {
        self.exps.iter().all(|&a| a == 0)
    }

    /// Exact value as a root of unity; None when gcd(a, q) > 1.
    pub fn eval(&self, a: i64) -> Option<RootOfUnity> {
        let mut tuple = vec![0u32; self.exps.len()];
        if !self.basis.dlog_into(a, &mut tuple) {
            return None;
        }
        let ell = self.basis.exponent();
        let mut num = 0u64;
        for ((f, &e), &x) in self.basis.factors().iter().zip(&self.exps).zip(&tuple) {
            let scale = ell / f.order;
            let term = (e as u128 * x as u128 % ell as u128) * scale as u128 % ell as u128;
            num = ((num as u128 + term) % ell as u128) as u64;
        }
        Some(RootOfUnity::new(num, ell))
    }

    /// Complex value; 0 off the units.
    pub fn eval_c64(&self, a: i64) -> Complex64 {
        match self.eval(a) {
            Some(r) => r.value(),
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// Row-major index in the `char_group` ordering.
    pub fn index(&self) -> usize {
        self.basis.tuple_index(&self.exps)
    }

    /// Restriction to a unitary divisor q1 (gcd(q1, q/q1) = 1): the unique
    /// character mod q1 with chi = chi1 * chi2 under CRT.
    pub fn restrict(&self, q1: u64) -> Result<DirichletChar> {
        let q = self.q();
        if q % q1 != 0 || gcd(q1, q / q1) != 1 {
            return Err(Error::ConstraintViolation(format!(
                "{q1} is not a unitary divisor of {q}"
            )));
        }
        let sub = Arc::new(UnitGroupBasis::new(q1)?);
        let mut exps = Vec::with_capacity(sub.factors().len());
        for sf in sub.factors() {
            // Factors are keyed by (prime, generator slot); the construction
            // is deterministic so components match exactly.
            let src = self
                .basis
                .factors()
                .iter()
                .zip(&self.exps)
                .find(|(f, _)| {
                    f.prime == sf.prime && f.exponent == sf.exponent && f.order == sf.order
                        && f.generator % sf.component == sf.generator
                })
                .expect("matching factor in parent basis");
            exps.push(*src.1);
        }
        Ok(DirichletChar::from_exps(sub, exps))
    }
}

/// Local conductor of one factor given its character exponent.
fn local_conductor(f: &CyclicFactor, a: u64) -> u64 {
    if a == 0 {
        // The sign factor mod 2^e (generator -1) is handled jointly below.
        return 1;
    }
    let p = f.prime;
    if p == 2 && f.order == 2 && f.exponent >= 2 && f.generator != 5 {
        // Character nontrivial on {-1} (or on 3 mod 4): determined mod 4.
        return 4;
    }
    // v_p of a, capped at exponent-1.
    let mut v = 0u32;
    let mut aa = a;
    while aa % p == 0 {
        aa /= p;
        v += 1;
    }
    let e = f.exponent;
    let vmax = if p == 2 { e.saturating_sub(3) } else { e - 1 };
    let f_exp = e - v.min(vmax);
    p.pow(f_exp)
}

fn structural_conductor(basis: &UnitGroupBasis, exps: &[u64]) -> u64 {
    let mut cond = 1u64;
    let mut two_part = 1u64;
    for (f, &a) in basis.factors().iter().zip(exps) {
        let c = local_conductor(f, a);
        if f.prime == 2 {
            two_part = two_part.max(c);
        } else {
            cond *= c;
        }
    }
    cond * two_part
}

/// All phi(q) characters mod q, principal first, in a deterministic
/// row-major order over the generator exponents.
pub fn char_group(q: u64) -> Result<Vec<DirichletChar>> {
    let basis = Arc::new(UnitGroupBasis::new(q)?);
    let orders: Vec<u64> = basis.factors().iter().map(|f| f.order).collect();
    let total = basis.phi() as usize;
    let mut out = Vec::with_capacity(total);
    let mut exps = vec![0u64; orders.len()];
    for _ in 0..total {
        out.push(DirichletChar::from_exps(basis.clone(), exps.clone()));
        // Mixed-radix increment, last factor fastest.
        for j in (0..orders.len()).rev() {
            exps[j] += 1;
            if exps[j] < orders[j] {
                break;
            }
            exps[j] = 0;
        }
    }
    debug_assert!(out[0].is_principal());
    Ok(out)
}

/// Brute-force minimal inducing modulus: smallest f | q with chi(a) = 1 for
/// every unit a = 1 mod f. Test oracle for the structural conductor.
pub fn conductor_bruteforce(chi: &DirichletChar) -> u64 {
    let q = chi.q();
    let mut divs = factorize(q).divisors();
    divs.sort_unstable();
    'outer: for &f in &divs {
        let mut a = 1 + f;
        while a <= q {
            if gcd_i(a as i64, q) == 1 {
                if let Some(r) = chi.eval(a as i64) {
                    if !r.is_one() {
                        continue 'outer;
                    }
                }
            }
            a += f;
        }
        return f;
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::euler_phi;

    const TOL: f64 = 1e-10;

    #[test]
    fn char_group_sizes_and_orders() {
        let g1 = char_group(1).unwrap();
        assert_eq!(g1.len(), 1);
        assert!(g1[0].is_principal());
        assert_eq!(g1[0].eval_c64(7), Complex64::new(1.0, 0.0));

        let g5 = char_group(5).unwrap();
        assert_eq!(g5.len(), 4);
        assert_eq!(g5.iter().filter(|c| c.order() == 4).count(), 2);
        assert!(g5.iter().any(|c| c.order() == 4));

        let g24 = char_group(24).unwrap();
        assert_eq!(g24.len(), 8);
        assert!(g24.iter().all(|c| c.order() <= 2));
    }

    #[test]
    fn eval_examples() {
        let g5 = char_group(5).unwrap();
        let chi = g5.iter().find(|c| c.order() == 4).unwrap();
        // 2 generates (Z/5)*, so an order-4 character sends it to +-i.
        let v = chi.eval_c64(2);
        assert!((v.re).abs() < TOL && (v.im.abs() - 1.0).abs() < TOL);
        for c in &g5 {
            assert_eq!(c.eval(10), None);
            assert_eq!(c.eval_c64(10), Complex64::new(0.0, 0.0));
        }
        // Principal is 1 on units.
        assert!((g5[0].eval_c64(3) - Complex64::new(1.0, 0.0)).norm() < TOL);
    }

    #[test]
    fn multiplicativity_random() {
        for q in [7u64, 8, 12, 16, 45, 40, 96, 121] {
            let chars = char_group(q).unwrap();
            for chi in chars.iter().step_by(3) {
                for a in 1..q as i64 {
                    for b in [1i64, 2, 5, (q as i64) - 1] {
                        let lhs = chi.eval_c64((a * b).rem_euclid(q as i64));
                        let rhs = chi.eval_c64(a) * chi.eval_c64(b);
                        assert!((lhs - rhs).norm() < TOL, "q={q} a={a} b={b}");
                    }
                }
            }
        }
    }

    #[test]
    fn orthogonality_over_a_and_over_chi() {
        // Both orthogonality relations for every modulus up to 200.
        for q in 1..=200u64 {
            let chars = char_group(q).unwrap();
            let phi = euler_phi(q) as f64;
            // Precompute value rows: vals[i][a] = chi_i(a).
            let vals: Vec<Vec<Complex64>> = chars
                .iter()
                .map(|chi| (0..q.max(1) as i64).map(|a| chi.eval_c64(a)).collect())
                .collect();
            for (i, vi) in vals.iter().enumerate() {
                for (j, vj) in vals.iter().enumerate() {
                    let s: Complex64 = vi.iter().zip(vj).map(|(a, b)| a * b.conj()).sum();
                    let expect = if i == j { phi } else { 0.0 };
                    assert!((s - expect).norm() < TOL, "q={q} i={i} j={j} got {s}");
                }
            }
            // Second orthogonality over characters, all unit pairs.
            let units: Vec<usize> =
                (0..q.max(1) as usize).filter(|&a| gcd(a as u64, q) == 1 || q == 1).collect();
            for &a in &units {
                for &b in &units {
                    let s: Complex64 = vals.iter().map(|v| v[a] * v[b].conj()).sum();
                    let expect = if a == b { phi } else { 0.0 };
                    assert!((s - expect).norm() < TOL, "q={q} a={a} b={b}");
                }
            }
        }
    }

    #[test]
    fn conductor_examples() {
        let g12 = char_group(12).unwrap();
        assert_eq!(g12[0].conductor(), 1);
        // The nontrivial character mod 4 extended to mod 8 has conductor 4.
        let g8 = char_group(8).unwrap();
        let chi = g8
            .iter()
            .find(|c| !c.is_principal() && c.eval(5).map(|r| r.is_one()) == Some(true))
            .unwrap();
        assert_eq!(chi.conductor(), 4);
        // Any nonprincipal character mod p is primitive.
        for chi in char_group(13).unwrap().iter().skip(1) {
            assert_eq!(chi.conductor(), 13);
        }
    }

    #[test]
    fn conductor_structural_matches_bruteforce() {
        for q in 1..=120u64 {
            for chi in char_group(q).unwrap() {
                assert_eq!(
                    chi.conductor(),
                    conductor_bruteforce(&chi),
                    "q={q} exps={:?}",
                    chi.exps()
                );
            }
        }
        // A few larger composite moduli with nontrivial 2-part.
        for q in [128u64, 160, 243, 256, 288, 300] {
            for chi in char_group(q).unwrap().iter().step_by(5) {
                assert_eq!(chi.conductor(), conductor_bruteforce(chi), "q={q}");
            }
        }
    }

    #[test]
    fn gauss_sum_magnitude_for_primitive_chars() {
        // |sum_t chi(t) e_q(t)| = sqrt(q) for every primitive chi, q <= 500.
        for q in 2..=500u64 {
            let circle: Vec<Complex64> = (0..q)
                .map(|t| {
                    let theta = 2.0 * std::f64::consts::PI * t as f64 / q as f64;
                    Complex64::new(theta.cos(), theta.sin())
                })
                .collect();
            for chi in char_group(q).unwrap() {
                if chi.conductor() != q {
                    continue;
                }
                let mut g = Complex64::new(0.0, 0.0);
                for t in 0..q as i64 {
                    g += chi.eval_c64(t) * circle[t as usize];
                }
                assert!(
                    (g.norm() - (q as f64).sqrt()).abs() < 1e-8,
                    "q={q} exps={:?} |g|={}",
                    chi.exps(),
                    g.norm()
                );
            }
        }
    }

    #[test]
    fn units_row_major_matches_tuple_order() {
        for q in [5u64, 8, 16, 24, 45, 135] {
            let basis = Arc::new(UnitGroupBasis::new(q).unwrap());
            let units = basis.units_row_major();
            assert_eq!(units.len(), basis.phi() as usize);
            let mut seen = std::collections::HashSet::new();
            for &u in &units {
                assert_eq!(gcd(u, q.max(1)).min(q), gcd(u, q));
                assert!(seen.insert(u));
            }
            // Index of a unit's dlog tuple must recover its position.
            let mut tuple = vec![0u32; basis.factors().len()];
            for (i, &u) in units.iter().enumerate() {
                assert!(basis.dlog_into(u as i64, &mut tuple));
                let exps: Vec<u64> = tuple.iter().map(|&t| t as u64).collect();
                assert_eq!(basis.tuple_index(&exps), i, "q={q} unit={u}");
            }
        }
    }

    #[test]
    fn restrict_splits_characters() {
        let q1 = 8u64;
        let q2 = 9u64;
        let chars = char_group(q1 * q2).unwrap();
        for chi in chars.iter().step_by(7) {
            let c1 = chi.restrict(q1).unwrap();
            let c2 = chi.restrict(q2).unwrap();
            for a in 1..(q1 * q2) as i64 {
                let lhs = chi.eval_c64(a);
                let rhs = c1.eval_c64(a) * c2.eval_c64(a);
                assert!((lhs - rhs).norm() < TOL, "a={a}");
            }
            assert_eq!(chi.conductor(), c1.conductor() * c2.conductor());
        }
    }

    #[test]
    fn modulus_cap_enforced() {
        assert!(matches!(
            char_group(MODULUS_CAP + 1),
            Err(Error::ModulusTooLarge { .. })
        ));
    }
}
