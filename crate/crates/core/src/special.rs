//! Special functions and small numerical helpers shared by the quadrature code.

use std::f64::consts::PI;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = LANCZOS_COEF[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    ln_gamma(x).exp()
}

/// Surface measure of the unit sphere S^{n-1} in R^n, i.e. 2 pi^{n/2} / Gamma(n/2).
///
/// `sphere_area(1) == 2` counts the two points of S^0.
pub fn sphere_area(n: usize) -> f64 {
    match n {
        0 => 0.0,
        1 => 2.0,
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        _ => {
            let h = n as f64 / 2.0;
            2.0 * PI.powf(h) / gamma(h)
        }
    }
}

/// Running sum of `exp(l_i)` kept in log form so that huge or tiny
/// magnitudes never overflow.
#[derive(Debug, Clone, Copy)]
pub struct LogSum {
    max: f64,
    acc: f64,
}

impl Default for LogSum {
    fn default() -> Self {
        Self::new()
    }
}

impl LogSum {
    pub fn new() -> Self {
        LogSum { max: f64::NEG_INFINITY, acc: 0.0 }
    }

    pub fn add(&mut self, l: f64) {
        if l == f64::NEG_INFINITY || l.is_nan() {
            return;
        }
        if l <= self.max {
            self.acc += (l - self.max).exp();
        } else {
            self.acc = self.acc * (self.max - l).exp() + 1.0;
            self.max = l;
        }
    }

    pub fn merge(&mut self, other: &LogSum) {
        if other.max == f64::NEG_INFINITY {
            return;
        }
        self.add(other.max + other.acc.ln());
    }

    pub fn ln(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.acc.ln()
        }
    }
}

pub fn log_sum_exp(a: f64, b: f64) -> f64 {
    let mut s = LogSum::new();
    s.add(a);
    s.add(b);
    s.ln()
}

/// `(a^c - b^c) / c` from `ln a`, `ln b`, continuous at `c = 0` where it
/// becomes `ln(a / b)`.
pub fn pow_diff_over(c: f64, ln_a: f64, ln_b: f64) -> f64 {
    let d = ln_a - ln_b;
    if c == 0.0 {
        return d;
    }
    let z = c * d;
    if z.abs() < 1e-8 {
        // expm1(z)/c with a short series keeps full precision for tiny c
        (c * ln_b).exp() * d * (1.0 + z / 2.0 + z * z / 6.0)
    } else {
        (c * ln_b).exp() * z.exp_m1() / c
    }
}
