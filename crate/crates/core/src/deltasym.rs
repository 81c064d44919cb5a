//! The delta symbol: an exact expansion of the indicator delta(n = 0) into
//! Ramanujan sums weighted by a smooth two-variable kernel F. The identity
//! holds for any admissible mollifier pair (U, W), so two independent pairs
//! are shipped and cross-validated.

use crate::expsums::ramanujan;
use crate::report::{fmt_f64, CsvTable};

/// The canonical bump exp(-1/(1-u^2)) on (-1, 1).
pub fn bump(u: f64) -> f64 {
    if u.abs() < 1.0 {
        (-1.0 / (1.0 - u * u)).exp()
    } else {
        0.0
    }
}

/// Smooth cutoff built from B(u) = exp(-a/u): equals 1 at u <= 0 and 0 at
/// u >= 1, C-infinity throughout.
fn step_down(u: f64, a: f64) -> f64 {
    if u <= 0.0 {
        return 1.0;
    }
    if u >= 1.0 {
        return 0.0;
    }
    let b = |t: f64| (-a / t).exp();
    b(1.0 - u) / (b(u) + b(1.0 - u))
}

/// Two independent admissible mollifier pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MollifierKind {
    Standard,
    Alternate,
}

impl MollifierKind {
    /// U: smooth even, exactly 1 on [-2, 2], supported in [-3, 3].
    pub fn u(&self, x: f64) -> f64 {
        let a = match self {
            MollifierKind::Standard => 1.0,
            MollifierKind::Alternate => 2.0,
        };
        step_down(x.abs() - 2.0, a)
    }

    /// W: smooth nonnegative even, supported in [-2, -1] union [1, 2].
    pub fn w(&self, x: f64) -> f64 {
        let b = bump(2.0 * x.abs() - 3.0);
        match self {
            MollifierKind::Standard => b,
            MollifierKind::Alternate => b * b,
        }
    }
}

/// A mollifier pair with its modulus cap C and the normalization constant
/// C * (sum_c W(c/C))^{-1}.
#[derive(Debug, Clone)]
pub struct DeltaWeights {
    c_cap: f64,
    kind: MollifierKind,
    norm: f64,
}

impl DeltaWeights {
    pub fn new(c_cap: f64, kind: MollifierKind) -> Self {
        assert!(c_cap >= 2.0, "C must be at least 2");
        let mut sum = 0.0;
        let top = (2.0 * c_cap).ceil() as u64 + 1;
        for c in 1..=top {
            sum += kind.w(c as f64 / c_cap);
        }
        assert!(sum > 0.0, "W must see at least one lattice point in [C, 2C]");
        DeltaWeights { c_cap, kind, norm: c_cap / sum }
    }

    pub fn c_cap(&self) -> f64 {
        self.c_cap
    }

    pub fn kind(&self) -> MollifierKind {
        self.kind
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }
}

/// F(x, y) = norm * (W(x) - W(y)) * U(x) * U(y); vanishes once |x| or |y|
/// leaves the U support, which caps every sum below at cd <= 3C.
pub fn f_kernel(x: f64, y: f64, w: &DeltaWeights) -> f64 {
    let k = w.kind;
    w.norm * (k.w(x) - k.w(y)) * k.u(x) * k.u(y)
}

/// delta(n = 0) via (1/C) sum_{c,d} (1/cd) S(0,n;c) F(cd/C, n/(cdC)).
/// Equals 1 for n = 0 and 0 otherwise, up to f64 rounding.
pub fn delta_eval(n: i64, w: &DeltaWeights) -> f64 {
    let c_cap = w.c_cap;
    let top = (3.0 * c_cap).ceil() as u64 + 1;
    let mut total = 0.0f64;
    for c in 1..=top {
        let rs = ramanujan(n, c) as f64;
        if rs == 0.0 {
            continue;
        }
        let mut d = 1u64;
        while c * d <= top {
            let cd = (c * d) as f64;
            let f = f_kernel(cd / c_cap, n as f64 / (cd * c_cap), w);
            if f != 0.0 {
                total += rs * f / cd;
            }
            d += 1;
        }
    }
    total / c_cap
}

/// Max |F^{(i,j)}| over a grid covering the support, by iterated central
/// differences with step 1e-4. Orders up to 4 in each slot.
pub fn kernel_derivative_check(w: &DeltaWeights, i: u32, j: u32) -> f64 {
    assert!(i <= 4 && j <= 4);
    let h = 1e-4;
    let binom = |n: u32, k: u32| -> f64 {
        let mut v = 1.0f64;
        for t in 0..k {
            v = v * (n - t) as f64 / (t + 1) as f64;
        }
        v
    };
    let deriv = |x: f64, y: f64| -> f64 {
        // f^(i,j) ~ h^-(i+j) sum_{a,b} (-1)^{a+b} C(i,a) C(j,b) f(x+(i/2-a)h, y+(j/2-b)h)
        let mut acc = 0.0;
        for a in 0..=i {
            for b in 0..=j {
                let sign = if (a + b) % 2 == 0 { 1.0 } else { -1.0 };
                let xx = x + (i as f64 / 2.0 - a as f64) * h;
                let yy = y + (j as f64 / 2.0 - b as f64) * h;
                acc += sign * binom(i, a) * binom(j, b) * f_kernel(xx, yy, w);
            }
        }
        acc / h.powi((i + j) as i32)
    };
    let mut max = 0.0f64;
    let steps = 140;
    for xi in 0..=steps {
        let x = -3.5 + 7.0 * xi as f64 / steps as f64;
        for yi in 0..=steps {
            let y = -3.5 + 7.0 * yi as f64 / steps as f64;
            let v = deriv(x, y).abs();
            if v > max {
                max = v;
            }
        }
    }
    max
}

/// One row per n: (n, delta_eval(n), |value - indicator|).
pub fn delta_scan(c_cap: f64, n_max: i64, kind: MollifierKind) -> CsvTable {
    let w = DeltaWeights::new(c_cap, kind);
    let mut t = CsvTable::new(vec!["n", "value", "abs_error"]);
    for n in -n_max..=n_max {
        let v = delta_eval(n, &w);
        let expect = if n == 0 { 1.0 } else { 0.0 };
        t.push_row(vec![n.to_string(), fmt_f64(v), fmt_f64((v - expect).abs())]);
    }
    t
}
