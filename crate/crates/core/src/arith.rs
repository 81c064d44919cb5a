//! Exact integer and modular arithmetic. All modular products go through
//! u128 intermediates, so any modulus below 2^63 is safe.

use crate::error::{Error, Result};

/// Euclidean gcd on u64.
pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

/// gcd accepting a signed first argument.
pub fn gcd_i(a: i64, b: u64) -> u64 {
    gcd(a.unsigned_abs(), b)
}

/// Least common multiple.
pub fn lcm(a: u64, b: u64) -> u64 {
    if a == 0 || b == 0 {
        return 0;
    }
    a / gcd(a, b) * b
}

/// Extended GCD: returns (g, x, y) with a*x + b*y = g.
pub fn extended_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    let (mut r0, mut r1) = (a, b);
    let (mut x0, mut x1) = (1i128, 0i128);
    let (mut y0, mut y1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (x0, x1) = (x1, x0 - q * x1);
        (y0, y1) = (y1, y0 - q * y1);
    }
    (r0, x0, y0)
}

/// Reduce a signed integer into [0, m).
pub fn reduce(a: i64, m: u64) -> u64 {
    debug_assert!(m > 0);
    let r = a.rem_euclid(m as i64);
    r as u64
}

/// a*b mod m via u128.
pub fn mod_mul(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

/// base^exp mod m by binary exponentiation.
pub fn mod_pow(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    base %= m;
    let mut acc = 1u64;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mod_mul(acc, base, m);
        }
        base = mod_mul(base, base, m);
        exp >>= 1;
    }
    acc
}

/// A residue in [0, modulus).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Residue {
    value: u64,
    modulus: u64,
}

impl Residue {
    pub fn new(value: i64, modulus: u64) -> Self {
        assert!(modulus > 0, "modulus must be positive");
        Residue { value: reduce(value, modulus), modulus }
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }
}

/// Modular inverse of a mod m. Errors with NotInvertible when gcd(a, m) > 1.
pub fn mod_inv(a: i64, m: u64) -> Result<Residue> {
    assert!(m > 0, "modulus must be positive");
    let ar = reduce(a, m);
    let (g, x, _) = extended_gcd(ar as i128, m as i128);
    if g != 1 {
        return Err(Error::NotInvertible { a, modulus: m });
    }
    let v = x.rem_euclid(m as i128) as u64;
    Ok(Residue { value: v, modulus: m })
}

/// Inverse as a bare u64; same contract as `mod_inv`.
pub fn inv_u64(a: u64, m: u64) -> Result<u64> {
    mod_inv(a as i64, m).map(|r| r.value())
}

/// Deterministic Miller-Rabin, valid for all n < 2^64.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = mod_pow(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..s - 1 {
            x = mod_mul(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Pollard rho (Brent variant) for a nontrivial factor of composite odd n.
fn pollard_rho(n: u64) -> u64 {
    debug_assert!(n > 1 && !is_prime(n) && n % 2 == 1);
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mod_mul(x, x, n) + c) % n;
        let mut x = 2u64;
        let mut y = 2u64;
        let mut d = 1u64;
        let mut count = 0u64;
        while d == 1 {
            x = f(x);
            y = f(f(y));
            d = gcd(x.abs_diff(y), n);
            count += 1;
            if count > 4 * (n as f64).sqrt() as u64 + 1_000_000 {
                break;
            }
        }
        if d != n && d != 1 {
            return d;
        }
        c += 1;
    }
}

/// Prime-power decomposition of a positive integer, primes strictly increasing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    n: u64,
    factors: Vec<(u64, u32)>,
}

impl Factorization {
    pub fn n(&self) -> u64 {
        self.n
    }

    /// (prime, exponent) pairs, primes strictly increasing. Empty for n = 1.
    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    /// Product of the distinct primes.
    pub fn radical(&self) -> u64 {
        self.factors.iter().map(|&(p, _)| p).product()
    }

    /// Euler phi from the factorization.
    pub fn phi(&self) -> u64 {
        let mut out = 1u64;
        for &(p, e) in &self.factors {
            out *= p.pow(e - 1) * (p - 1);
        }
        out
    }

    /// Mobius mu: 0 when any exponent exceeds 1, else (-1)^(number of primes).
    pub fn mu(&self) -> i64 {
        if self.factors.iter().any(|&(_, e)| e > 1) {
            return 0;
        }
        if self.factors.len() % 2 == 0 {
            1
        } else {
            -1
        }
    }

    /// All divisors, unsorted.
    pub fn divisors(&self) -> Vec<u64> {
        let mut out = vec![1u64];
        for &(p, e) in &self.factors {
            let prev = out.clone();
            let mut pk = 1u64;
            for _ in 0..e {
                pk *= p;
                out.extend(prev.iter().map(|&d| d * pk));
            }
        }
        out
    }
}

/// Small primes for trial division, sieved once.
fn small_primes() -> &'static [u64] {
    use std::sync::OnceLock;
    static PRIMES: OnceLock<Vec<u64>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        let limit = 1usize << 12;
        let mut sieve = vec![true; limit + 1];
        let mut primes = Vec::new();
        for p in 2..=limit {
            if sieve[p] {
                primes.push(p as u64);
                let mut m = p * p;
                while m <= limit {
                    sieve[m] = false;
                    m += p;
                }
            }
        }
        primes
    })
}

/// Canonical factorization by trial division then Miller-Rabin + Pollard rho.
pub fn factorize(n: u64) -> Factorization {
    assert!(n >= 1, "factorize requires n >= 1");
    let mut rest = n;
    let mut factors: Vec<(u64, u32)> = Vec::new();
    for &p in small_primes() {
        if p * p > rest {
            break;
        }
        if rest % p == 0 {
            let mut e = 0u32;
            while rest % p == 0 {
                rest /= p;
                e += 1;
            }
            factors.push((p, e));
        }
    }
    if rest > 1 {
        let mut stack = vec![rest];
        while let Some(m) = stack.pop() {
            if is_prime(m) {
                match factors.iter_mut().find(|(p, _)| *p == m) {
                    Some((_, e)) => *e += 1,
                    None => factors.push((m, 1)),
                }
            } else {
                let d = pollard_rho(m);
                stack.push(d);
                stack.push(m / d);
            }
        }
    }
    factors.sort_unstable();
    Factorization { n, factors }
}

/// rad(n): product of distinct primes dividing n; rad(1) = 1.
pub fn radical(n: u64) -> u64 {
    factorize(n).radical()
}

/// Euler's totient.
pub fn euler_phi(n: u64) -> u64 {
    factorize(n).phi()
}

/// Mobius function.
pub fn mobius(n: u64) -> i64 {
    factorize(n).mu()
}

/// Combine x = r1 mod m1, x = r2 mod m2 for coprime moduli; result mod m1*m2.
pub fn crt_pair(r1: u64, m1: u64, r2: u64, m2: u64) -> u64 {
    debug_assert_eq!(gcd(m1, m2), 1);
    let m = m1 * m2;
    // x = r1 + m1 * t with t = (r2 - r1) / m1 mod m2
    let m1_inv = inv_u64(m1 % m2, m2).expect("coprime moduli");
    let diff = reduce(r2 as i64 - (r1 % m2) as i64, m2);
    let t = mod_mul(diff, m1_inv, m2);
    (r1 as u128 + m1 as u128 * t as u128) as u64 % m
}
