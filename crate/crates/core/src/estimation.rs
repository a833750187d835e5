//! Sweeps of the Riesz ratio along the conjugate line, endpoint exponent
//! fits, and a nonlinear power method for the operator norm.
//!
//! The power method works in the scaled variables `F(σ) = f(e^σ) e^{dσ/p}`
//! and `U(ρ) = u(e^ρ) e^{dρ/q}`. On the conjugate line the operator becomes
//! a correlation `U(ρ) = ∫ F(σ) K(σ - ρ) dσ` with
//! `K(x) = e^{(d - α - d/p) x} φ(e^x)`, so on a uniform grid in `ln r` it is
//! a Toeplitz matrix, applied by FFT, whose transpose is exactly the
//! discretized adjoint. This makes the ratio trace monotone.

use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Result, RieszError};
use crate::exponents::{conjugate_q, exponent_chart, ExponentChart, RieszParams};
use crate::kernel::AngularKernel;
use crate::operator::{apply, ratio_from_potential, QuadratureConfig};
use crate::profile::{PowerLogPiece, RadialProfile};
use crate::quad::{gauss_legendre, integrate_with_point, AwayOpts};
use crate::special::sphere_area;

/// Header of the sweep CSV.
pub const SWEEP_HEADER: &str = "p,q,norm_f,norm_u,ratio,compensated";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub p: f64,
    pub q: f64,
    pub norm_f: f64,
    pub norm_u: f64,
    pub ratio: f64,
    pub compensated: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Endpoint {
    Lower,
    Upper,
}

impl std::str::FromStr for Endpoint {
    type Err = RieszError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lower" => Ok(Endpoint::Lower),
            "upper" => Ok(Endpoint::Upper),
            _ => Err(RieszError::Config(format!("endpoint must be 'lower' or 'upper', got '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitReport {
    pub endpoint: Endpoint,
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the fit in `ln(ratio)`.
    pub residual: f64,
    pub points_used: usize,
}

impl FitReport {
    /// Whether the slope equals `-kappa` within `tol`.
    pub fn matches_kappa(&self, kappa: f64, tol: f64) -> bool {
        (self.slope + kappa).abs() <= tol
    }
}

/// The `(p, endpoint)` evaluation points of a sweep, sorted by `p`.
pub fn sweep_points(chart: &ExponentChart, eps_grid: &[f64]) -> Result<Vec<(f64, Endpoint)>> {
    let w = chart.width();
    let mut pts = Vec::with_capacity(2 * eps_grid.len());
    for &e in eps_grid {
        if !(e > 0.0 && e < 0.5) {
            return Err(RieszError::Config(format!("eps values must lie in (0, 1/2), got {e}")));
        }
        pts.push((chart.p_minus + e * w, Endpoint::Lower));
        pts.push((chart.p_plus - e * w, Endpoint::Upper));
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(pts)
}

/// The geometric grid `{2^-k_lo, ..., 2^-k_hi}`.
pub fn dyadic_eps_grid(k_lo: i32, k_hi: i32) -> Vec<f64> {
    (k_lo..=k_hi).map(|k| 0.5f64.powi(k)).collect()
}

/// Riesz ratios of `f` at `p = p_- + ε(p_+ - p_-)` and `p = p_+ - ε(p_+ - p_-)`.
pub fn sweep(params: &RieszParams, f: &RadialProfile, eps_grid: &[f64], cfg: &QuadratureConfig) -> Result<Vec<SweepRow>> {
    let chart = exponent_chart(params);
    let pts = sweep_points(&chart, eps_grid)?;
    if pts.is_empty() {
        return Ok(Vec::new());
    }
    // the potential does not depend on p
    let u = apply(params, f, cfg)?;
    pts.par_iter()
        .map(|&(p, _)| {
            let r = ratio_from_potential(&u, f, params, p, cfg)?;
            Ok(SweepRow {
                p,
                q: r.q,
                norm_f: r.norm_f,
                norm_u: r.norm_u,
                ratio: r.ratio,
                compensated: r.ratio * chart.compensator(p),
            })
        })
        .collect()
}

/// Least-squares slope of `ln(ratio)` against `ln(p - p_-)` (lower) or
/// `ln(p_+ - p)` (upper), using the rows on that half of the interval.
pub fn fit_endpoint_exponent(rows: &[SweepRow], endpoint: Endpoint, chart: &ExponentChart) -> Result<FitReport> {
    let mid = 0.5 * (chart.p_minus + chart.p_plus);
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| match endpoint {
            Endpoint::Lower => r.p < mid,
            Endpoint::Upper => r.p > mid,
        })
        .map(|r| {
            let gap = match endpoint {
                Endpoint::Lower => r.p - chart.p_minus,
                Endpoint::Upper => chart.p_plus - r.p,
            };
            (gap.ln(), r.ratio.ln())
        })
        .collect();
    if pts.len() < 5 {
        return Err(RieszError::InsufficientData(format!(
            "slope fit needs at least 5 rows near the {endpoint:?} endpoint, got {}",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    Ok(FitReport { endpoint, slope, intercept, residual: (rss / n).sqrt(), points_used: pts.len() })
}

/// Smallest compensated ratio over the rows.
pub fn lower_bound_constant(rows: &[SweepRow]) -> Result<f64> {
    rows.iter()
        .map(|r| r.compensated)
        .reduce(f64::min)
        .ok_or_else(|| RieszError::InsufficientData("no sweep rows".into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Envelope {
    pub max_over_min: f64,
    pub min: f64,
    pub max: f64,
}

/// Spread of the compensated values. A consistency check on the upper bound
/// of the blow-up law, not a proof of it.
pub fn envelope_boundedness(rows: &[SweepRow]) -> Result<Envelope> {
    let min = lower_bound_constant(rows)?;
    let max = rows.iter().map(|r| r.compensated).fold(f64::NEG_INFINITY, f64::max);
    Ok(Envelope { max_over_min: max / min, min, max })
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{SWEEP_HEADER}")?;
    for r in rows {
        writeln!(w, "{},{},{},{},{},{}", r.p, r.q, r.norm_f, r.norm_u, r.ratio, r.compensated)?;
    }
    Ok(())
}

/// A smooth, compactly supported bump `exp(-r^2)` on `[0, 3)` as 24
/// constant pieces, used as an alternative start for the power method.
pub fn gaussian_bump() -> RadialProfile {
    let n = 24;
    let h = 3.0 / n as f64;
    let pieces = (0..n)
        .map(|i| {
            let mid = (i as f64 + 0.5) * h;
            PowerLogPiece::power_law((-mid * mid).exp(), 0.0, i as f64 * h, (i + 1) as f64 * h)
        })
        .collect();
    RadialProfile::new("bump", pieces).expect("bump pieces are disjoint")
}

/// Settings of the discretized power method.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PowerMethodConfig {
    pub max_iter: usize,
    /// Stop when successive ratios differ by less than this (relative).
    pub rel_change: f64,
    /// The window keeps all but `exp(-mass_cut)` of each function's mass.
    pub mass_cut: f64,
    /// Upper limit on the number of cells; the cell width grows to fit.
    pub max_cells: usize,
}

impl Default for PowerMethodConfig {
    fn default() -> Self {
        PowerMethodConfig { max_iter: 20, rel_change: 1e-6, mass_cut: 16.0, max_cells: 1 << 19 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerMethodResult {
    pub p: f64,
    pub q: f64,
    pub v_lower: f64,
    pub iterate_ratios: Vec<f64>,
    pub converged: bool,
    pub cells: usize,
    pub cell_width: f64,
}

impl PowerMethodResult {
    /// Largest drop between consecutive ratios (0 for a nondecreasing trace).
    pub fn max_decrease(&self) -> f64 {
        self.iterate_ratios.windows(2).map(|w| (w[0] - w[1]).max(0.0)).fold(0.0, f64::max)
    }
}

/// Uniform cells `[σ_lo + j h, σ_lo + (j+1) h)` in `σ = ln r`, with `σ_lo`
/// a multiple of `h` so that `r = 1` is a cell boundary.
struct CellGrid {
    sigma_lo: f64,
    h: f64,
    n: usize,
}

impl CellGrid {
    fn center(&self, j: usize) -> f64 {
        self.sigma_lo + (j as f64 + 0.5) * self.h
    }
}

/// Mass decay rates (per unit of `ln r`, left and right) of a profile's
/// `p`-th power in scaled variables; `inf` for bounded support.
fn profile_rates(f: &RadialProfile, p: f64, d: f64) -> (f64, f64) {
    let left = match f.head_piece() {
        Some(pc) if pc.touches_origin() => pc.power * p + d,
        _ => f64::INFINITY,
    };
    let right = match f.tail_piece() {
        Some(pc) if pc.unbounded() => -(pc.power * p + d),
        _ => f64::INFINITY,
    };
    (left, right)
}

fn choose_grid(params: &RieszParams, f: &RadialProfile, p: f64, q: f64, cfg: &QuadratureConfig, pm: &PowerMethodConfig) -> CellGrid {
    let chart = exponent_chart(params);
    let d = params.dim();
    let pd = p / (p - 1.0);
    let (fl, fr) = profile_rates(f, p, d);
    // iterates of f inherit the adjoint's decay, u its own
    let it_left = pd * (d / chart.p_minus - d / p);
    let it_right = pd * (d / p - d / chart.p_plus);
    let u_left = d - q * params.beta();
    let u_right = q * (params.beta() + params.lambda()) - d;
    let left_rate = fl.min(it_left).min(u_left);
    let right_rate = fr.min(it_right).min(u_right);
    let mut lo = -(pm.mass_cut / left_rate) - 8.0;
    let mut hi = pm.mass_cut / right_rate + 8.0;
    for b in f.breakpoints() {
        lo = lo.min(b.ln() - 8.0);
        hi = hi.max(b.ln() + 8.0);
    }
    let mut h = std::f64::consts::LN_10 / cfg.points_per_decade as f64;
    while ((hi - lo) / h).ceil() as usize > pm.max_cells {
        h *= 2.0;
    }
    let j_lo = (lo / h).floor();
    let j_hi = (hi / h).ceil();
    CellGrid { sigma_lo: j_lo * h, h, n: (j_hi - j_lo) as usize }
}

/// The Toeplitz operator `U_i = Σ_j W_{j-i} F_j` with its transpose.
struct ToeplitzOperator {
    n: usize,
    len: usize,
    kernel_hat: Vec<Complex<f64>>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl ToeplitzOperator {
    fn new(params: &RieszParams, p: f64, grid: &CellGrid) -> Result<Self> {
        let n = grid.n;
        let h = grid.h;
        let len = (2 * n - 1).next_power_of_two();
        let kernel = AngularKernel::shared(params.d(), params.lambda())?;
        let c = params.dim() - params.alpha() - params.dim() / p;
        let lambda = params.lambda();
        let omega = kernel.omega();
        let gamma = kernel.diagonal().exponent();
        let kk = &*kernel;
        let kfun = move |x: f64| (c * x).exp() * kk.at_log_ratio(x);
        // exact cell integral of ω e^{rate x} over [a, b]
        let exp_cell = |rate: f64, a: f64, b: f64| {
            let w = b - a;
            let t = rate * w;
            let factor = if t.abs() < 1e-8 { w * (1.0 + 0.5 * t) } else { t.exp_m1() / rate };
            omega * (rate * a).exp() * factor
        };
        let opts = AwayOpts { z_min: 1e-14, gamma, rate: c.abs().max((c - lambda).abs()).max(1e-3), max_width: h, ..AwayOpts::default() };
        let rule = gauss_legendre(16);
        let weight = |k: i64| -> f64 {
            let a = (k as f64 - 0.5) * h;
            let b = (k as f64 + 0.5) * h;
            if b < -19.0 {
                exp_cell(c, a, b)
            } else if a > 19.0 {
                exp_cell(c - lambda, a, b)
            } else if k.abs() <= 3 {
                integrate_with_point(&kfun, a, b, 0.0, &opts, &opts)
            } else {
                let m = 0.5 * (a + b);
                rule.integrate(a, m, kfun) + rule.integrate(m, b, kfun)
            }
        };
        // convolution form U_i = Σ_j A_{i-j} F_j with A_m = W_{-m}, stored
        // circularly
        let mut buf = vec![Complex::new(0.0, 0.0); len];
        let n_i = n as i64;
        let vals: Vec<(usize, f64)> = (-(n_i - 1)..n_i)
            .into_par_iter()
            .map(|m| {
                let idx = if m >= 0 { m as usize } else { (len as i64 + m) as usize };
                (idx, weight(-m))
            })
            .collect();
        for (idx, v) in vals {
            buf[idx] = Complex::new(v, 0.0);
        }
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(len);
        let inverse = planner.plan_fft_inverse(len);
        forward.process(&mut buf);
        Ok(ToeplitzOperator { n, len, kernel_hat: buf, forward, inverse })
    }

    fn apply_impl(&self, x: &[f64], transpose: bool) -> Vec<f64> {
        let mut buf = vec![Complex::new(0.0, 0.0); self.len];
        for (b, v) in buf.iter_mut().zip(x) {
            *b = Complex::new(*v, 0.0);
        }
        self.forward.process(&mut buf);
        for (b, k) in buf.iter_mut().zip(&self.kernel_hat) {
            // the transpose has the reversed kernel, whose transform is the
            // conjugate for real sequences
            *b *= if transpose { k.conj() } else { *k };
        }
        self.inverse.process(&mut buf);
        let scale = 1.0 / self.len as f64;
        buf[..self.n].iter().map(|c| c.re * scale).collect()
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.apply_impl(x, false)
    }

    fn apply_transpose(&self, x: &[f64]) -> Vec<f64> {
        self.apply_impl(x, true)
    }
}

/// `ln (ω h Σ |x_i|^e)^{1/e}` over the nonnegative part.
fn ln_discrete_norm(x: &[f64], e: f64, omega_h: f64) -> f64 {
    let m = x.iter().copied().fold(0.0, f64::max);
    if m <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let s: f64 = x.iter().filter(|v| **v > 0.0).map(|v| (v / m).powf(e)).sum();
    m.ln() + (omega_h * s).ln() / e
}

/// `(x / |x|)^{e}` elementwise on the nonnegative part, for the Hölder
/// extremal of the dual space.
fn dual_power(x: &[f64], e: f64, ln_norm: f64) -> Vec<f64> {
    x.iter().map(|v| if *v > 0.0 { (e * (v.ln() - ln_norm)).exp() } else { 0.0 }).collect()
}

/// Nonlinear power iteration for the `L_p -> L_q` norm of `I_{α,β,λ}` on
/// radial functions, started at `f_init`.
pub fn power_method_estimate(
    params: &RieszParams,
    p: f64,
    f_init: &RadialProfile,
    cfg: &QuadratureConfig,
    pm: &PowerMethodConfig,
) -> Result<PowerMethodResult> {
    cfg.validate()?;
    let chart = exponent_chart(params);
    let g = conjugate_q(&chart, p)?;
    let q = g.q;
    if f_init.is_zero() || !f_init.is_nonnegative() {
        return Err(RieszError::InvalidProfile(format!("'{}' must be nonnegative and nonzero", f_init.label())));
    }
    if !crate::profile::in_l_interval(f_init, chart.p_minus, chart.p_plus, params) {
        return Err(RieszError::NotInL(f_init.label().to_string()));
    }
    if pm.max_iter == 0 {
        return Err(RieszError::Config("max_iter must be at least 1".into()));
    }
    let grid = choose_grid(params, f_init, p, q, cfg, pm);
    let op = ToeplitzOperator::new(params, p, &grid)?;
    let omega_h = sphere_area(params.d()) * grid.h;
    let d = params.dim();
    let pd = p / (p - 1.0);

    // cell values preserving the p-th power mass of F on each cell
    let rule = gauss_legendre(8);
    let mut f: Vec<f64> = (0..grid.n)
        .into_par_iter()
        .map(|j| {
            let c = grid.center(j);
            let a = c - 0.5 * grid.h;
            let b = c + 0.5 * grid.h;
            // relative to the value at the centre, which keeps the powers in range
            let l0 = f_init.ln_abs_at_log(c) + d * c / p;
            let l_ref = if l0.is_finite() { l0 } else { 0.0 };
            let m = rule.integrate(a, b, |s| (p * (f_init.ln_abs_at_log(s) + d * s / p - l_ref)).exp());
            (l_ref + (m / grid.h).ln() / p).exp()
        })
        .collect();

    let mut ratios = Vec::with_capacity(pm.max_iter);
    let mut converged = false;
    for it in 0..pm.max_iter {
        let ln_nf = ln_discrete_norm(&f, p, omega_h);
        if ln_nf == f64::NEG_INFINITY {
            return Err(RieszError::NonPositiveIterate(it));
        }
        let u = op.apply(&f);
        let ln_nu = ln_discrete_norm(&u, q, omega_h);
        if ln_nu == f64::NEG_INFINITY {
            return Err(RieszError::NonPositiveIterate(it));
        }
        let ratio = (ln_nu - ln_nf).exp();
        if let Some(&prev) = ratios.last() {
            ratios.push(ratio);
            if ((ratio - prev) / ratio).abs() < pm.rel_change {
                converged = true;
                break;
            }
        } else {
            ratios.push(ratio);
        }
        if it + 1 == pm.max_iter {
            break;
        }
        let gstar = dual_power(&u, q - 1.0, ln_nu);
        let v = op.apply_transpose(&gstar);
        let ln_nv = ln_discrete_norm(&v, pd, omega_h);
        if ln_nv == f64::NEG_INFINITY {
            return Err(RieszError::NonPositiveIterate(it));
        }
        f = dual_power(&v, pd - 1.0, ln_nv);
    }
    Ok(PowerMethodResult {
        p,
        q,
        v_lower: *ratios.last().expect("at least one iteration"),
        iterate_ratios: ratios,
        converged,
        cells: grid.n,
        cell_width: grid.h,
    })
}

/// Power-method estimates across a sweep grid, as sweep rows (`norm_f = 1`,
/// `norm_u = ratio = v_lower`).
pub fn power_method_sweep(
    params: &RieszParams,
    f_init: &RadialProfile,
    eps_grid: &[f64],
    cfg: &QuadratureConfig,
    pm: &PowerMethodConfig,
) -> Result<Vec<(SweepRow, PowerMethodResult)>> {
    let chart = exponent_chart(params);
    let pts = sweep_points(&chart, eps_grid)?;
    pts.iter()
        .map(|&(p, _)| {
            let res = power_method_estimate(params, p, f_init, cfg, pm)?;
            let row = SweepRow {
                p,
                q: res.q,
                norm_f: 1.0,
                norm_u: res.v_lower,
                ratio: res.v_lower,
                compensated: res.v_lower * chart.compensator(p),
            };
            Ok((row, res))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponents::validate_params;
    use crate::operator::riesz_ratio;
    use crate::profile::make_h;

    fn config_a() -> RieszParams {
        validate_params(2, 0.3, 0.2, 0.8).unwrap()
    }

    #[test]
    fn empty_grid_gives_no_rows() {
        let a = config_a();
        let rows = sweep(&a, &make_h(&a), &[], &QuadratureConfig::default()).unwrap();
        assert!(rows.is_empty());
    }

    #[test]
    fn rejects_eps_outside_half_interval() {
        let a = config_a();
        assert!(sweep(&a, &make_h(&a), &[0.5], &QuadratureConfig::default()).is_err());
    }

    #[test]
    fn sweep_rows_sorted_and_on_line() {
        let a = config_a();
        let rows = sweep(&a, &make_h(&a), &dyadic_eps_grid(2, 5), &QuadratureConfig::default()).unwrap();
        assert_eq!(rows.len(), 8);
        assert!(rows.windows(2).all(|w| w[0].p < w[1].p));
        for r in &rows {
            assert!(crate::exponents::in_g(&a, r.p, r.q));
            assert!(r.compensated > 0.0);
        }
    }

    #[test]
    fn single_row_bound_and_envelope() {
        let row = SweepRow { p: 1.5, q: 3.0, norm_f: 1.0, norm_u: 2.0, ratio: 2.0, compensated: 0.7 };
        assert_eq!(lower_bound_constant(&[row]).unwrap(), 0.7);
        assert_eq!(envelope_boundedness(&[row]).unwrap().max_over_min, 1.0);
        assert!(lower_bound_constant(&[]).is_err());
    }

    #[test]
    fn fit_needs_five_rows() {
        let a = config_a();
        let chart = exponent_chart(&a);
        let rows = sweep(&a, &make_h(&a), &dyadic_eps_grid(2, 5), &QuadratureConfig::default()).unwrap();
        assert!(matches!(
            fit_endpoint_exponent(&rows, Endpoint::Lower, &chart),
            Err(RieszError::InsufficientData(_))
        ));
    }

    #[test]
    fn fit_recovers_synthetic_slope() {
        let a = config_a();
        let chart = exponent_chart(&a);
        let rows: Vec<SweepRow> = (2..10)
            .map(|k| {
                let gap = 0.5f64.powi(k) * chart.width();
                let p = chart.p_minus + gap;
                let ratio = 3.0 * gap.powf(-0.65);
                SweepRow { p, q: chart.q_of_p(p), norm_f: 1.0, norm_u: ratio, ratio, compensated: 1.0 }
            })
            .collect();
        let fit = fit_endpoint_exponent(&rows, Endpoint::Lower, &chart).unwrap();
        assert!((fit.slope + 0.65).abs() < 1e-12);
        assert!((fit.intercept - 3f64.ln()).abs() < 1e-12);
        assert_eq!(fit.points_used, 8);
    }

    #[test]
    fn csv_header_exact() {
        let mut out = Vec::new();
        write_sweep_csv(&[], &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "p,q,norm_f,norm_u,ratio,compensated\n");
    }

    #[test]
    fn power_method_monotone_and_dominant() {
        let a = config_a();
        let cfg = QuadratureConfig::default();
        let h = make_h(&a);
        let res = power_method_estimate(&a, 1.5, &h, &cfg, &PowerMethodConfig::default()).unwrap();
        assert!(res.max_decrease() <= 1e-6, "{:?}", res.iterate_ratios);
        let direct = riesz_ratio(&a, &h, 1.5, &cfg).unwrap().ratio;
        assert!(res.v_lower >= direct - 1e-4, "{} vs {direct}", res.v_lower);
        // the first iterate is h itself
        assert!((res.iterate_ratios[0] - direct).abs() < 1e-4 * direct, "{} vs {direct}", res.iterate_ratios[0]);
    }
}
