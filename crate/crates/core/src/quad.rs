//! Fixed Gauss-Legendre rules, geometrically graded panel integration and a
//! log-domain integrator for semi-infinite tails.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Mutex, OnceLock};

use crate::special::LogSum;

/// Gauss-Legendre nodes and weights on [-1, 1].
#[derive(Debug)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    fn compute(n: usize) -> GaussRule {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi initial guess, then Newton on P_n
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussRule { nodes, weights }
    }

    /// Integral of `f` over `[a, b]`.
    #[inline]
    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut s = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s += w * f(mid + half * x);
        }
        s * half
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Cached rule with `n` nodes.
pub fn gauss_legendre(n: usize) -> &'static GaussRule {
    static RULES: OnceLock<Mutex<HashMap<usize, &'static GaussRule>>> = OnceLock::new();
    let map = RULES.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = map.lock().expect("gauss rule cache poisoned");
    guard
        .entry(n)
        .or_insert_with(|| Box::leak(Box::new(GaussRule::compute(n))))
}

/// Options for [`integrate_away`].
#[derive(Debug, Clone, Copy)]
pub struct AwayOpts {
    /// Distances below this are not resolved by panels; the sliver
    /// `[0, z_min]` is closed with the local power-law remainder.
    pub z_min: f64,
    /// Local exponent of `f` at the singular point (`f ~ z^gamma`), used for
    /// the sliver remainder. Use 0 for bounded integrands.
    pub gamma: f64,
    /// Ratio between consecutive panel boundaries (distance from the point).
    pub growth: f64,
    /// Largest exponential rate the integrand can have away from the point;
    /// caps panel widths at `8 / rate`.
    pub rate: f64,
    /// Decay rate for an infinite end, `f ~ exp(-decay * z)`.
    pub decay: f64,
    /// Polynomial (log-power) factor multiplying the decay, for truncation.
    pub log_power: u32,
    /// Absolute scale of the log argument, for truncation of log factors.
    pub log_offset: f64,
    /// Largest allowed panel width regardless of rates.
    pub max_width: f64,
}

impl Default for AwayOpts {
    fn default() -> Self {
        AwayOpts {
            z_min: 1e-14,
            gamma: 0.0,
            growth: 4.0,
            rate: 1.0,
            decay: 1.0,
            log_power: 0,
            log_offset: 0.0,
            max_width: f64::INFINITY,
        }
    }
}

/// Truncation distance for an integrand bounded by `(c + z)^k exp(-decay z)`
/// such that the neglected tail is below `exp(-40)` of the scale at `z = 0`.
pub fn truncation_distance(decay: f64, log_power: u32, log_offset: f64) -> f64 {
    assert!(decay > 0.0, "truncation needs a positive decay rate");
    let k = log_power as f64;
    let c = 1.0 + log_offset.abs();
    let mut e = 40.0 / decay;
    for _ in 0..50 {
        e = (40.0 + k * (1.0 + e / c).ln()) / decay;
    }
    e
}

/// Integrate `f(x0 + dir * z)` for `z` in `[z_start, z_end]`, where `x0` is a
/// point at which `f` may be singular and `z_end` may be `+inf`.
///
/// Panels grow geometrically with distance from `x0`, so an algebraic or
/// logarithmic singularity at `x0` is integrated to near machine precision
/// by a fixed 16-point rule on each panel.
pub fn integrate_away(
    f: &dyn Fn(f64) -> f64,
    x0: f64,
    dir: f64,
    z_start: f64,
    z_end: f64,
    opts: &AwayOpts,
) -> f64 {
    let rule = gauss_legendre(16);
    let z_end = if z_end.is_infinite() {
        z_start.max(0.0) + truncation_distance(opts.decay, opts.log_power, opts.log_offset)
    } else {
        z_end
    };
    if z_end <= z_start {
        return 0.0;
    }
    let mut total = 0.0;
    let mut z = z_start;
    if z < opts.z_min {
        let zm = opts.z_min.min(z_end);
        let fz = f(x0 + dir * zm);
        total += fz * (zm - z.max(0.0)) / (1.0 + opts.gamma);
        z = zm;
    }
    let width_cap = (8.0 / opts.rate.max(1e-300)).min(opts.max_width);
    while z < z_end {
        let next = (z * opts.growth).min(z + width_cap).min(z_end).max(z + 1e-300);
        total += rule.integrate(z, next, |t| f(x0 + dir * t));
        z = next;
    }
    total
}

/// Integral of a smooth `f(start + dir * z)` over `z >= 0` that decays like
/// `exp(-decay * z)` times a polynomial in `z`: panel widths grow by 1.5
/// from 0.5 up to `8 / decay`.
pub fn integrate_tail(f: &dyn Fn(f64) -> f64, start: f64, dir: f64, decay: f64, log_power: u32, log_offset: f64) -> f64 {
    let rule = gauss_legendre(16);
    let end = truncation_distance(decay, log_power, log_offset);
    let cap = 8.0 / decay;
    let mut total = 0.0;
    let mut z = 0.0;
    let mut w: f64 = 0.5;
    while z < end {
        let next = (z + w.min(cap)).min(end);
        total += rule.integrate(z, next, |t| f(start + dir * t));
        z = next;
        w *= 1.5;
    }
    total
}

/// Integral of `f` over `[a, b]` (either end may be infinite, `a < b`), with
/// grading toward a possible singular point `x0`.
pub fn integrate_with_point(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    x0: f64,
    opts_left: &AwayOpts,
    opts_right: &AwayOpts,
) -> f64 {
    if b <= a {
        return 0.0;
    }
    if x0 <= a {
        integrate_away(f, x0, 1.0, a - x0, b - x0, opts_right)
    } else if x0 >= b {
        integrate_away(f, x0, -1.0, x0 - b, x0 - a, opts_left)
    } else {
        integrate_away(f, x0, -1.0, 0.0, x0 - a, opts_left)
            + integrate_away(f, x0, 1.0, 0.0, b - x0, opts_right)
    }
}

/// Panels covering the finite interval `[a, b]`, of width at most
/// `max_width`, graded geometrically (ratio 4) toward `x0` when `x0` is
/// finite; distances below 1e-16 from `x0` are dropped.
pub fn graded_bounds(a: f64, b: f64, x0: f64, max_width: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    if b <= a {
        return out;
    }
    let uniform = |lo: f64, hi: f64, out: &mut Vec<(f64, f64)>| {
        if hi <= lo {
            return;
        }
        let n = ((hi - lo) / max_width).ceil().max(1.0) as usize;
        let step = (hi - lo) / n as f64;
        out.extend((0..n).map(|i| (lo + i as f64 * step, lo + (i + 1) as f64 * step)));
    };
    if !x0.is_finite() {
        uniform(a, b, &mut out);
        return out;
    }
    // distances from x0 on each side, sweeping outward
    let sweep = |z0: f64, z1: f64, sign: f64, out: &mut Vec<(f64, f64)>| {
        let mut z = z0.max(1e-16);
        while z < z1 {
            let next = (4.0 * z).min(z + max_width).min(z1);
            out.push(if sign > 0.0 { (x0 + z, x0 + next) } else { (x0 - next, x0 - z) });
            z = next;
        }
    };
    if x0 <= a {
        sweep(a - x0, b - x0, 1.0, &mut out);
    } else if x0 >= b {
        sweep(x0 - b, x0 - a, -1.0, &mut out);
    } else {
        sweep(0.0, x0 - a, -1.0, &mut out);
        sweep(0.0, b - x0, 1.0, &mut out);
    }
    out.sort_by(|p, q| p.0.total_cmp(&q.0));
    out
}

/// `ln ∫ exp(lf(x)) dx` over `[start, +inf)` (`dir = 1`) or `(-inf, start]`
/// (`dir = -1`), for a unimodal log-integrand that eventually decreases.
///
/// Panel widths adapt to the local slope and curvature of `lf`, so integrands
/// like `t^q exp(-delta t)` with mass far from `start` are handled without
/// overflow.
pub fn ln_integral_semi_infinite(lf: &dyn Fn(f64) -> f64, start: f64, dir: f64) -> f64 {
    let rule = gauss_legendre(16);
    let g = |z: f64| lf(start + dir * z);
    let mut acc = LogSum::new();
    let mut z = 0.0;
    let mut w_prev: f64 = 1e-9;
    for _ in 0..1_000_000 {
        // probe slightly inside the panel so a vanishing start value is harmless
        let zp = z + 0.01 * w_prev;
        let l0 = g(zp);
        if l0 == f64::NEG_INFINITY {
            if acc.ln() > f64::NEG_INFINITY {
                break;
            }
            z += w_prev;
            continue;
        }
        // forward differences on the panel scale keep rounding noise small
        // when the log-integrand is large
        let e = 0.5 * w_prev;
        let l1 = g(zp + e);
        let l2 = g(zp + 2.0 * e);
        let slope = (l1 - l0) / e;
        let curv = (l2 - 2.0 * l1 + l0) / (e * e);
        let mut w = 2.0 * w_prev;
        if slope.abs() > 0.0 {
            w = w.min(20.0 / slope.abs());
        }
        if curv.abs() > 0.0 {
            w = w.min(3.0 / curv.abs().sqrt());
        }
        w = w.max(1e-12 * (1.0 + z));
        let mut panel = LogSum::new();
        let half = 0.5 * w;
        let mid = z + half;
        for (x, wt) in rule.nodes.iter().zip(&rule.weights) {
            panel.add(g(mid + half * x) + (wt * half).ln());
        }
        acc.merge(&panel);
        z += w;
        w_prev = w;
        let l_end = g(z);
        let decreasing = g(z + 1e-4 * (1.0 + z)) < l_end;
        if decreasing && (l_end < acc.ln() - 40.0 || l_end == f64::NEG_INFINITY) {
            // integrand has fallen far below the accumulated mass and keeps falling
            let slope_end = (g(z + 1e-4 * (1.0 + z)) - l_end) / (1e-4 * (1.0 + z));
            if slope_end < 0.0 {
                // exponential tail bound beyond z
                acc.add(l_end - (-slope_end).ln());
            }
            break;
        }
    }
    acc.ln()
}

/// Chebyshev interpolant on `[a, b]`.
#[derive(Debug, Clone)]
pub struct ChebPanel {
    pub a: f64,
    pub b: f64,
    coeffs: Vec<f64>,
}

impl ChebPanel {
    pub fn fit(a: f64, b: f64, degree: usize, f: impl Fn(f64) -> f64) -> ChebPanel {
        let n = degree + 1;
        let vals: Vec<f64> = (0..n)
            .map(|k| {
                let t = (PI * (k as f64 + 0.5) / n as f64).cos();
                f(0.5 * (a + b) + 0.5 * (b - a) * t)
            })
            .collect();
        let coeffs = (0..n)
            .map(|j| {
                let s: f64 = vals
                    .iter()
                    .enumerate()
                    .map(|(k, v)| v * (PI * j as f64 * (k as f64 + 0.5) / n as f64).cos())
                    .sum();
                let c = 2.0 * s / n as f64;
                if j == 0 {
                    0.5 * c
                } else {
                    c
                }
            })
            .collect();
        ChebPanel { a, b, coeffs }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        let t = (2.0 * x - self.a - self.b) / (self.b - self.a);
        let t2 = 2.0 * t;
        let mut b1 = 0.0;
        let mut b2 = 0.0;
        for c in self.coeffs.iter().skip(1).rev() {
            let b0 = c + t2 * b1 - b2;
            b2 = b1;
            b1 = b0;
        }
        self.coeffs[0] + t * b1 - b2
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::ln_gamma;

    #[test]
    fn gauss_rule_integrates_polynomials_exactly() {
        let r = gauss_legendre(16);
        let s: f64 = r.weights.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
        let v = r.integrate(0.0, 2.0, |x| x.powi(31));
        assert!((v - 2f64.powi(32) / 32.0).abs() < 1e-12 * v);
    }

    #[test]
    fn graded_panels_resolve_endpoint_singularity() {
        // ∫_0^1 x^{-1/2} (1 + x) dx = 2 + 2/3
        let f = |x: f64| x.powf(-0.5) * (1.0 + x);
        let opts = AwayOpts { gamma: -0.5, ..Default::default() };
        let v = integrate_away(&f, 0.0, 1.0, 0.0, 1.0, &opts);
        assert!((v - 8.0 / 3.0).abs() < 1e-12, "{v}");
        // log singularity: ∫_0^1 -ln x dx = 1
        let g = |x: f64| -x.ln();
        let v = integrate_away(&g, 0.0, 1.0, 0.0, 1.0, &AwayOpts::default());
        assert!((v - 1.0).abs() < 1e-12, "{v}");
    }

    #[test]
    fn semi_infinite_exponential_tail() {
        let f = |x: f64| (-0.01 * x).exp();
        let opts = AwayOpts { decay: 0.01, rate: 0.01, ..Default::default() };
        let v = integrate_away(&f, 0.0, 1.0, 1.0, f64::INFINITY, &opts);
        let exact = 100.0 * (-0.01f64).exp();
        assert!((v - exact).abs() < 1e-10 * exact, "{v} {exact}");
    }

    #[test]
    fn log_domain_gamma_integral() {
        // ∫_0^∞ t^q e^{-δ t} dt = Γ(q+1) / δ^{q+1}
        for &(q, delta) in &[(2.0, 0.003), (2000.0, 1.0), (10.0, 1e-3), (0.5, 3.0)] {
            let lf = |t: f64| if t <= 0.0 { f64::NEG_INFINITY } else { q * t.ln() - delta * t };
            let got = ln_integral_semi_infinite(&lf, 0.0, 1.0);
            let exact = ln_gamma(q + 1.0) - (q + 1.0) * delta.ln();
            assert!((got - exact).abs() < 1e-10 * exact.abs().max(1.0), "q={q}: {got} vs {exact}");
        }
    }

    #[test]
    fn log_domain_leftward() {
        // ∫_{-inf}^0 e^{2x} dx = 1/2
        let got = ln_integral_semi_infinite(&|x: f64| 2.0 * x, 0.0, -1.0);
        assert!((got - 0.5f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn chebyshev_panel_accuracy() {
        let p = ChebPanel::fit(0.5, 0.75, 16, |x| (1.0 - x).powf(-0.3));
        for &x in &[0.5, 0.6, 0.7, 0.75] {
            let exact = (1.0f64 - x).powf(-0.3);
            assert!((p.eval(x) - exact).abs() < 1e-9 * exact);
        }
    }
}
