//! The angular kernel `Φ(r, s) = ∫_{S^{d-1}} |r e_1 - s ω|^{-λ} dσ(ω)`, which
//! reduces the potential of a radial function to a one-dimensional integral.
//!
//! `Φ` is symmetric and homogeneous of degree `-λ`, so everything follows
//! from `φ(t) = Φ(1, t)` on `[0, 1]`. Dimensions 1 and 3 have closed forms;
//! other dimensions integrate over the polar angle.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Result, RieszError};
use crate::quad::{gauss_legendre, ChebPanel};
use crate::special::{pow_diff_over, sphere_area};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AngularKernelConfig {
    pub theta_rel_tol: f64,
    pub max_panels: usize,
    /// Ratios `min/max` above `1 - near_diagonal_band` use the graded path.
    pub near_diagonal_band: f64,
}

impl Default for AngularKernelConfig {
    fn default() -> Self {
        AngularKernelConfig { theta_rel_tol: 1e-9, max_panels: 200, near_diagonal_band: 0.05 }
    }
}

impl AngularKernelConfig {
    fn validate(&self) -> Result<()> {
        if !(self.theta_rel_tol > 0.0) || !(self.near_diagonal_band > 0.0 && self.near_diagonal_band < 1.0) {
            return Err(RieszError::Config(format!("bad angular kernel config {self:?}")));
        }
        Ok(())
    }
}

/// Behaviour of `Φ(r, s)` as `s -> r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DiagonalSingularity {
    Bounded,
    Logarithmic,
    /// `Φ ~ |r - s|^{exponent}` with `-1 < exponent < 0`.
    Power(f64),
}

impl DiagonalSingularity {
    /// Local exponent for remainder estimates (0 for bounded and log cases).
    pub fn exponent(&self) -> f64 {
        match self {
            DiagonalSingularity::Power(e) => *e,
            _ => 0.0,
        }
    }
}

pub fn kernel_diagonal_exponent(d: usize, lambda: f64) -> DiagonalSingularity {
    let e = d as f64 - 1.0 - lambda;
    if e.abs() < 1e-12 {
        DiagonalSingularity::Logarithmic
    } else if e < 0.0 {
        DiagonalSingularity::Power(e)
    } else {
        DiagonalSingularity::Bounded
    }
}

fn check_args(d: usize, lambda: f64, r: f64, s: f64) -> Result<()> {
    if d == 0 || !(lambda > 0.0 && lambda < d as f64) {
        return Err(RieszError::Config(format!("need 0 < lambda < d, got d={d}, lambda={lambda}")));
    }
    if !(r >= 0.0 && s >= 0.0) || (r == 0.0 && s == 0.0) || !r.is_finite() || !s.is_finite() {
        return Err(RieszError::Config(format!("bad radii r={r}, s={s}")));
    }
    if r == s && lambda >= d as f64 - 1.0 {
        return Err(RieszError::SingularArgument { d, lambda, r });
    }
    Ok(())
}

/// `Φ_{λ,d}(r, s)`: closed forms for `d = 1, 3`, polar-angle quadrature
/// otherwise.
pub fn angular_kernel(d: usize, lambda: f64, r: f64, s: f64, cfg: &AngularKernelConfig) -> Result<f64> {
    check_args(d, lambda, r, s)?;
    cfg.validate()?;
    let m = r.max(s);
    let t = r.min(s) / m;
    let phi = match d {
        1 | 3 => closed_phi(d, lambda, t, 1.0 - t),
        _ => quad_phi(d, lambda, t, 1.0 - t, cfg),
    };
    Ok(m.powf(-lambda) * phi)
}

/// The generic quadrature path for every `d >= 2` (for `d = 1` the sphere is
/// two points and the "quadrature" is their sum).
pub fn angular_kernel_quadrature(d: usize, lambda: f64, r: f64, s: f64, cfg: &AngularKernelConfig) -> Result<f64> {
    check_args(d, lambda, r, s)?;
    cfg.validate()?;
    let m = r.max(s);
    let t = r.min(s) / m;
    let phi = if d == 1 { closed_phi(1, lambda, t, 1.0 - t) } else { quad_phi(d, lambda, t, 1.0 - t, cfg) };
    Ok(m.powf(-lambda) * phi)
}

/// `φ(t)` in closed form for `d = 1, 3`; `y = 1 - t` is passed separately so
/// callers near the diagonal keep full relative precision.
fn closed_phi(d: usize, lambda: f64, t: f64, y: f64) -> f64 {
    match d {
        1 => y.powf(-lambda) + (1.0 + t).powf(-lambda),
        3 => {
            if t == 0.0 {
                return 4.0 * std::f64::consts::PI;
            }
            let c = 2.0 - lambda;
            if y == 0.0 {
                return 2.0 * std::f64::consts::PI * 2f64.powf(c) / c;
            }
            let ln_plus = t.ln_1p();
            let ln_minus = if t < 0.5 { (-t).ln_1p() } else { y.ln() };
            2.0 * std::f64::consts::PI * pow_diff_over(c, ln_plus, ln_minus) / t
        }
        _ => unreachable!("closed forms exist for d = 1 and d = 3 only"),
    }
}

/// `σ_{d-2} ∫_0^π ((1-t)^2 + 4 t sin^2(θ/2))^{-λ/2} sin^{d-2}θ dθ`, graded
/// toward θ = 0 when `t` is near one.
fn quad_phi(d: usize, lambda: f64, t: f64, y: f64, cfg: &AngularKernelConfig) -> f64 {
    let rule = gauss_legendre(20);
    let sigma = sphere_area(d - 1);
    let y2 = y * y;
    let k = (d - 2) as i32;
    let f = |th: f64| {
        let sh = (0.5 * th).sin();
        (y2 + 4.0 * t * sh * sh).powf(-0.5 * lambda) * th.sin().powi(k)
    };
    let pi = std::f64::consts::PI;
    let mut total = 0.0;
    if y >= cfg.near_diagonal_band.max(0.5) {
        for i in 0..4 {
            total += rule.integrate(pi * i as f64 / 4.0, pi * (i + 1) as f64 / 4.0, f);
        }
        return sigma * total;
    }
    // singular scale of the integrand near θ = 0
    let theta_star = y / t.sqrt();
    let floor = if y == 0.0 { cfg.theta_rel_tol.sqrt() * 1e-1 } else { theta_star / 8.0 };
    let mut hi = pi;
    let mut panels = 0;
    while hi > floor && panels < cfg.max_panels {
        let lo = (hi / 4.0).max(floor);
        total += rule.integrate(lo, hi, f);
        hi = lo;
        panels += 1;
    }
    if y == 0.0 {
        // θ^{d-2-λ} near the origin, integrated analytically
        let e = d as f64 - 1.0 - lambda;
        total += hi.powf(e) / e;
    } else {
        total += rule.integrate(0.0, hi, f);
    }
    sigma * total
}

type KernelCache = HashMap<(usize, u64), Arc<AngularKernel>>;

/// Tabulated `φ(t) = Φ(1, t)` for fast repeated evaluation, keyed by
/// `(d, λ)`; homogeneity and symmetry extend it to every pair of radii.
#[derive(Debug)]
pub struct AngularKernel {
    d: usize,
    lambda: f64,
    omega: f64,
    table: Option<Table>,
}

#[derive(Debug)]
struct Table {
    // t in [0, 0.25] and [0.25, 0.5]
    near_zero: [ChebPanel; 2],
    // y = 1 - t in [2^{-k-1}, 2^{-k}], k = 1..
    diag: Vec<ChebPanel>,
    // value at the smallest tabulated y, used for extrapolation below it
    y_last: f64,
    phi_last: f64,
}

const DIAG_PANELS: usize = 100;

impl AngularKernel {
    pub fn new(d: usize, lambda: f64) -> Result<AngularKernel> {
        if d == 0 || !(lambda > 0.0 && lambda < d as f64) {
            return Err(RieszError::Config(format!("need 0 < lambda < d, got d={d}, lambda={lambda}")));
        }
        let omega = sphere_area(d);
        let table = if d == 1 || d == 3 {
            None
        } else {
            let cfg = AngularKernelConfig::default();
            let near_zero = [
                ChebPanel::fit(0.0, 0.25, 24, |t| quad_phi(d, lambda, t, 1.0 - t, &cfg)),
                ChebPanel::fit(0.25, 0.5, 24, |t| quad_phi(d, lambda, t, 1.0 - t, &cfg)),
            ];
            let diag: Vec<ChebPanel> = (1..=DIAG_PANELS)
                .map(|k| {
                    let hi = 0.5f64.powi(k as i32);
                    ChebPanel::fit(0.5 * hi, hi, 16, |y| quad_phi(d, lambda, 1.0 - y, y, &cfg))
                })
                .collect();
            let y_last = 0.5f64.powi(DIAG_PANELS as i32 + 1);
            let phi_last = quad_phi(d, lambda, 1.0 - y_last, y_last, &cfg);
            Some(Table { near_zero, diag, y_last, phi_last })
        };
        Ok(AngularKernel { d, lambda, omega, table })
    }

    /// Process-wide instance for `(d, λ)`, built on first use.
    pub fn shared(d: usize, lambda: f64) -> Result<Arc<AngularKernel>> {
        static CACHE: OnceLock<Mutex<KernelCache>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let key = (d, lambda.to_bits());
        if let Some(k) = cache.lock().expect("kernel cache poisoned").get(&key) {
            return Ok(k.clone());
        }
        let k = Arc::new(AngularKernel::new(d, lambda)?);
        Ok(cache.lock().expect("kernel cache poisoned").entry(key).or_insert(k).clone())
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Surface area of the unit sphere in R^d, the `t -> 0` limit of `φ`.
    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn diagonal(&self) -> DiagonalSingularity {
        kernel_diagonal_exponent(self.d, self.lambda)
    }

    /// `φ(t)` for `t = 1 - y`, `0 <= t <= 1`.
    fn phi_ty(&self, t: f64, y: f64) -> f64 {
        let Some(tab) = &self.table else {
            return closed_phi(self.d, self.lambda, t, y);
        };
        if t <= 0.25 {
            return tab.near_zero[0].eval(t);
        }
        if t <= 0.5 {
            return tab.near_zero[1].eval(t);
        }
        if y >= tab.y_last {
            let k = ((-y.log2()).floor() as usize).clamp(1, DIAG_PANELS);
            // guard the panel choice against log2 rounding at panel edges
            let mut k = k;
            while k > 1 && y > tab.diag[k - 1].b {
                k -= 1;
            }
            while k < DIAG_PANELS && y < tab.diag[k - 1].a {
                k += 1;
            }
            return tab.diag[k - 1].eval(y);
        }
        match self.diagonal() {
            DiagonalSingularity::Bounded => tab.phi_last,
            DiagonalSingularity::Logarithmic => {
                // φ ≈ A ln(1/y) + B with A from the last panel
                let p = &tab.diag[DIAG_PANELS - 1];
                let slope = (p.eval(p.a) - p.eval(p.b)) / (p.b / p.a).ln();
                tab.phi_last + slope * (tab.y_last / y).ln()
            }
            DiagonalSingularity::Power(e) => tab.phi_last * (y / tab.y_last).powf(e),
        }
    }

    /// `Φ(1, e^x)`, i.e. the kernel at log-ratio `x = ln(s / r)` for `r = 1`.
    #[inline]
    pub fn at_log_ratio(&self, x: f64) -> f64 {
        if x <= 0.0 {
            let t = x.exp();
            let y = -x.exp_m1();
            self.phi_ty(t, y)
        } else {
            // Φ(1, T) = T^{-λ} Φ(1, 1/T)
            let t = (-x).exp();
            let y = -(-x).exp_m1();
            (-self.lambda * x).exp() * self.phi_ty(t, y)
        }
    }

    pub fn eval(&self, r: f64, s: f64) -> f64 {
        let m = r.max(s);
        let t = r.min(s) / m;
        m.powf(-self.lambda) * self.phi_ty(t, 1.0 - t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn cfg() -> AngularKernelConfig {
        AngularKernelConfig::default()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * a.abs().max(b.abs())
    }

    #[test]
    fn closed_form_examples() {
        let v = angular_kernel(1, 0.5, 2.0, 1.0, &cfg()).unwrap();
        assert!(close(v, 1.0 + 3f64.powf(-0.5), 1e-15));
        assert!((v - 1.577_350).abs() < 1e-6);
        let v = angular_kernel(2, 0.8, 2.0, 0.0, &cfg()).unwrap();
        assert!(close(v, 2.0 * PI * 2f64.powf(-0.8), 1e-12));
        assert!((v - 3.6087).abs() < 1e-4);
        let v = angular_kernel(3, 1.0, 2.0, 1.0, &cfg()).unwrap();
        assert!(close(v, 2.0 * PI, 1e-14));
    }

    #[test]
    fn diagonal_exponents() {
        assert_eq!(kernel_diagonal_exponent(2, 1.5), DiagonalSingularity::Power(-0.5));
        assert_eq!(kernel_diagonal_exponent(3, 1.0), DiagonalSingularity::Bounded);
        assert_eq!(kernel_diagonal_exponent(1, 0.5), DiagonalSingularity::Power(-0.5));
        assert_eq!(kernel_diagonal_exponent(2, 1.0), DiagonalSingularity::Logarithmic);
    }

    #[test]
    fn singular_diagonal_is_an_error() {
        assert!(matches!(angular_kernel(1, 0.5, 1.0, 1.0, &cfg()), Err(RieszError::SingularArgument { .. })));
        assert!(matches!(angular_kernel(2, 1.5, 2.0, 2.0, &cfg()), Err(RieszError::SingularArgument { .. })));
        // bounded diagonal: finite
        let v = angular_kernel(3, 1.0, 2.0, 2.0, &cfg()).unwrap();
        assert!(close(v, 2.0 * PI, 1e-14));
        let v = angular_kernel(2, 0.5, 1.0, 1.0, &cfg()).unwrap();
        assert!(v.is_finite() && v > 0.0);
    }

    #[test]
    fn generic_path_matches_d3_closed_form() {
        for &lambda in &[0.3, 1.0, 1.7, 2.0, 2.5] {
            for &(r, s) in &[(1.0, 0.3), (2.0, 1.9), (1.0, 1.0 - 1e-9), (5.0, 1e-3), (1.0, 0.999_999)] {
                let a = angular_kernel(3, lambda, r, s, &cfg()).unwrap();
                let b = angular_kernel_quadrature(3, lambda, r, s, &cfg()).unwrap();
                assert!(close(a, b, 1e-9), "λ={lambda} r={r} s={s}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn generic_path_matches_s_zero_limit() {
        for d in 2..=5 {
            for &lambda in &[0.2, 0.9, 1.5] {
                if lambda >= d as f64 {
                    continue;
                }
                let v = angular_kernel_quadrature(d, lambda, 3.0, 0.0, &cfg()).unwrap();
                let w = sphere_area(d) * 3f64.powf(-lambda);
                assert!(close(v, w, 1e-12));
            }
        }
    }

    #[test]
    fn table_matches_direct_quadrature() {
        for &(d, lambda) in &[(2usize, 0.8), (2, 1.0), (2, 1.5), (4, 2.5), (4, 3.5), (1, 0.5), (3, 1.0)] {
            let k = AngularKernel::new(d, lambda).unwrap();
            for &x in &[-30.0f64, -3.0, -0.7, -0.1, -1e-3, -1e-7, -1e-12, 1e-12, 1e-5, 0.2, 4.0, 40.0] {
                // direct evaluation with the exact gap 1 - t, as the table sees it
                let (t, y, scale) = if x <= 0.0 {
                    (x.exp(), -x.exp_m1(), 1.0)
                } else {
                    ((-x).exp(), -(-x).exp_m1(), (-lambda * x).exp())
                };
                let phi = if d == 1 || d == 3 { closed_phi(d, lambda, t, y) } else { quad_phi(d, lambda, t, y, &cfg()) };
                let direct = scale * phi;
                let fast = k.at_log_ratio(x);
                assert!(close(direct, fast, 1e-11), "d={d} λ={lambda} x={x}: {direct} vs {fast}");
            }
        }
    }

    #[test]
    fn symmetry_and_homogeneity() {
        let mut seed = 12345u64;
        let mut next = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (seed >> 11) as f64 / (1u64 << 53) as f64
        };
        for &(d, lambda) in &[(1usize, 0.5), (2, 0.8), (2, 1.5), (3, 1.0), (4, 2.0)] {
            for _ in 0..20 {
                let r = 10f64.powf(4.0 * next() - 2.0);
                let s = 10f64.powf(4.0 * next() - 2.0);
                let a = angular_kernel(d, lambda, r, s, &cfg()).unwrap();
                let b = angular_kernel(d, lambda, s, r, &cfg()).unwrap();
                assert!(close(a, b, 1e-10));
                for &t in &[0.5, 2.0, 10.0] {
                    let c = angular_kernel(d, lambda, t * r, t * s, &cfg()).unwrap();
                    assert!(close(c, t.powf(-lambda) * a, 1e-10));
                }
                assert!(a > 0.0);
            }
        }
    }
}
