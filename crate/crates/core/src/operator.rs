//! The weighted Riesz potential on radial profiles.
//!
//! For `f(x) = H(|x|)` the potential is radial as well and
//!
//! ```text
//! u(r) = r^{-β} ∫_0^∞ H(s) s^{d-1-α} Φ(r, s) ds
//!      = r^{-β-λ} ∫ H(s) s^{d-α} φ(s / r) d(ln s),
//! ```
//!
//! which is integrated per piece in the variable `x = ln(s / r)`, with
//! geometric grading toward the diagonal `x = 0`. A [`SampledPotential`]
//! stores `u` on a logarithmic grid together with asymptotic models for
//! `r -> 0` and `r -> ∞`, so that `L_q` norms include the mass outside the
//! grid exactly.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, RieszError};
use crate::exponents::{conjugate_q, exponent_chart, RieszParams};
use crate::kernel::AngularKernel;
use crate::profile::{in_l_interval, ln_lp_integral, log_grid, PowerLogPiece, RadialProfile};
use crate::quad::{gauss_legendre, graded_bounds, integrate_tail, integrate_with_point, ln_integral_semi_infinite, AwayOpts};
use crate::special::{sphere_area, LogSum};

/// Exponents closer than this are treated as coincident (resonant), which
/// produces an extra logarithmic factor in the asymptotics.
const RESONANCE_TOL: f64 = 1e-9;

/// Grid and tolerance settings shared by the radial quadratures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub points_per_decade: usize,
    /// Largest panel width in `ln s` away from the diagonal.
    pub singular_split_width: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig { rel_tol: 1e-7, r_min: 1e-6, r_max: 1e6, points_per_decade: 64, singular_split_width: 4.0 }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.r_min > 0.0 && self.r_min < self.r_max && self.r_max.is_finite()) {
            return Err(RieszError::Config(format!("need 0 < r_min < r_max, got {} and {}", self.r_min, self.r_max)));
        }
        if !(self.rel_tol > 0.0) {
            return Err(RieszError::Config(format!("rel_tol must be positive, got {}", self.rel_tol)));
        }
        if self.points_per_decade < 4 {
            return Err(RieszError::Config("points_per_decade must be at least 4".into()));
        }
        if !(self.singular_split_width > 0.0) {
            return Err(RieszError::Config("singular_split_width must be positive".into()));
        }
        if (self.r_max / self.r_min).log10() < 2.0 {
            return Err(RieszError::Config("the grid must span at least two decades".into()));
        }
        Ok(())
    }
}

/// One term `coef * r^power * (ln r)^log_power` of an asymptotic expansion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelTerm {
    pub coef: f64,
    pub power: f64,
    pub log_power: u32,
}

/// `exp(ln_scale) * |Σ terms|^outer`, the analytic continuation of a sampled
/// function beyond its grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticModel {
    pub terms: Vec<ModelTerm>,
    pub outer: f64,
    pub ln_scale: f64,
}

impl AsymptoticModel {
    pub fn zero() -> Self {
        AsymptoticModel { terms: Vec::new(), outer: 1.0, ln_scale: 0.0 }
    }

    /// `ln` of the model at `ρ = ln r`; `-inf` where the inner sum is not
    /// positive.
    pub fn ln_value(&self, rho: f64) -> f64 {
        if self.terms.is_empty() {
            return f64::NEG_INFINITY;
        }
        let lead = self.terms.iter().map(|t| t.power * rho).fold(f64::NEG_INFINITY, f64::max);
        let mut s = 0.0;
        for t in &self.terms {
            let mut v = t.coef * (t.power * rho - lead).exp();
            if t.log_power > 0 {
                v *= rho.powi(t.log_power as i32);
            }
            s += v;
        }
        if !(s > 0.0) {
            return f64::NEG_INFINITY;
        }
        self.ln_scale + self.outer * (lead + s.ln())
    }

    pub fn value(&self, rho: f64) -> f64 {
        self.ln_value(rho).exp()
    }
}

/// `u = I f` sampled on a geometric grid, with head and tail models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledPotential {
    pub d: usize,
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    pub ln_r0: f64,
    pub log_step: f64,
    pub head: AsymptoticModel,
    pub tail: AsymptoticModel,
}

impl SampledPotential {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn rho(&self, i: usize) -> f64 {
        self.ln_r0 + i as f64 * self.log_step
    }

    /// Gregory-corrected trapezoid weights in `ln r` (fourth order).
    fn weight(&self, i: usize) -> f64 {
        let n = self.values.len();
        let edge = i.min(n - 1 - i);
        let w = match edge {
            0 => 3.0 / 8.0,
            1 => 7.0 / 6.0,
            2 => 23.0 / 24.0,
            _ => 1.0,
        };
        w * self.log_step
    }

    fn ln_value(&self, i: usize) -> f64 {
        let v = self.values[i];
        if v > 0.0 {
            v.ln()
        } else {
            f64::NEG_INFINITY
        }
    }

    /// `ln ∫_{R^d} |u|^q dx`, including both asymptotic regions.
    pub fn ln_lq_integral(&self, q: f64) -> f64 {
        let d = self.d as f64;
        let mut acc = LogSum::new();
        for i in 0..self.values.len() {
            let v = self.values[i].abs();
            if v > 0.0 {
                acc.add(q * v.ln() + d * self.rho(i) + self.weight(i).ln());
            }
        }
        let lo = self.rho(0);
        let hi = self.rho(self.values.len() - 1);
        if !self.head.terms.is_empty() {
            acc.add(ln_integral_semi_infinite(&|r: f64| q * self.head.ln_value(r) + d * r, lo, -1.0));
        }
        if !self.tail.terms.is_empty() {
            acc.add(ln_integral_semi_infinite(&|r: f64| q * self.tail.ln_value(r) + d * r, hi, 1.0));
        }
        acc.ln() + sphere_area(self.d).ln()
    }

    pub fn lq_norm(&self, q: f64) -> f64 {
        let l = self.ln_lq_integral(q);
        if l == f64::NEG_INFINITY {
            0.0
        } else {
            (l / q).exp()
        }
    }

    /// `ln ∫ u g dx` for two nonnegative sampled functions on the same grid.
    pub fn ln_pairing(&self, other: &SampledPotential) -> Result<f64> {
        if self.radii.len() != other.radii.len()
            || (self.ln_r0 - other.ln_r0).abs() > 1e-12
            || (self.log_step - other.log_step).abs() > 1e-15
            || self.d != other.d
        {
            return Err(RieszError::Config("pairing needs identical grids".into()));
        }
        let d = self.d as f64;
        let mut acc = LogSum::new();
        for i in 0..self.values.len() {
            acc.add(self.ln_value(i) + other.ln_value(i) + d * self.rho(i) + self.weight(i).ln());
        }
        let lo = self.rho(0);
        let hi = self.rho(self.values.len() - 1);
        if !self.head.terms.is_empty() && !other.head.terms.is_empty() {
            acc.add(ln_integral_semi_infinite(
                &|r: f64| self.head.ln_value(r) + other.head.ln_value(r) + d * r,
                lo,
                -1.0,
            ));
        }
        if !self.tail.terms.is_empty() && !other.tail.terms.is_empty() {
            acc.add(ln_integral_semi_infinite(
                &|r: f64| self.tail.ln_value(r) + other.tail.ln_value(r) + d * r,
                hi,
                1.0,
            ));
        }
        Ok(acc.ln() + sphere_area(self.d).ln())
    }

    /// `|u|^{q-1} / |u|_q^{q-1}`, the unit vector of `L_{q/(q-1)}` attaining
    /// the dual norm of `u`.
    pub fn dual_unit(&self, q: f64) -> SampledPotential {
        let ln_norm = self.ln_lq_integral(q) / q;
        let e = q - 1.0;
        let values = self
            .values
            .iter()
            .map(|v| if *v > 0.0 { (e * (v.ln() - ln_norm)).exp() } else { 0.0 })
            .collect();
        let map = |m: &AsymptoticModel| AsymptoticModel {
            terms: m.terms.clone(),
            outer: m.outer * e,
            ln_scale: m.ln_scale * e - e * ln_norm,
        };
        SampledPotential {
            d: self.d,
            radii: self.radii.clone(),
            values,
            ln_r0: self.ln_r0,
            log_step: self.log_step,
            head: map(&self.head),
            tail: map(&self.tail),
        }
    }

    /// CSV with columns `r,u`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "r,u")?;
        for (r, u) in self.radii.iter().zip(&self.values) {
            writeln!(w, "{r},{u}")?;
        }
        Ok(())
    }

    /// JSON sidecar with the extrapolation models.
    pub fn sidecar_json(&self) -> String {
        #[derive(Serialize)]
        struct Sidecar<'a> {
            d: usize,
            ln_r0: f64,
            log_step: f64,
            points: usize,
            head: &'a AsymptoticModel,
            tail: &'a AsymptoticModel,
        }
        serde_json::to_string_pretty(&Sidecar {
            d: self.d,
            ln_r0: self.ln_r0,
            log_step: self.log_step,
            points: self.values.len(),
            head: &self.head,
            tail: &self.tail,
        })
        .expect("sidecar serializes")
    }
}

/// Pointwise evaluator for `I_{α,β,λ}` on a fixed profile.
pub struct PotentialEvaluator<'a> {
    params: RieszParams,
    profile: &'a RadialProfile,
    kernel: std::sync::Arc<AngularKernel>,
    cfg: QuadratureConfig,
}

impl<'a> PotentialEvaluator<'a> {
    pub fn new(params: &RieszParams, profile: &'a RadialProfile, cfg: &QuadratureConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(PotentialEvaluator {
            params: *params,
            profile,
            kernel: AngularKernel::shared(params.d(), params.lambda())?,
            cfg: *cfg,
        })
    }

    /// `u(r)` for any `r > 0`.
    pub fn at(&self, r: f64) -> f64 {
        let rho = r.ln();
        self.profile.pieces().iter().map(|pc| self.piece_at(pc, rho)).sum()
    }

    fn piece_at(&self, pc: &PowerLogPiece, rho: f64) -> f64 {
        if pc.coef == 0.0 {
            return 0.0;
        }
        let p = &self.params;
        let lambda = p.lambda();
        let m = pc.power + p.dim() - p.alpha();
        let k = pc.log_power as i32;
        let kernel = &*self.kernel;
        let f = move |x: f64| {
            let mut v = (m * x).exp() * kernel.at_log_ratio(x);
            if k > 0 {
                v *= (rho + x).powi(k);
            }
            v
        };
        let a = if pc.r_lo == 0.0 { f64::NEG_INFINITY } else { pc.r_lo.ln() - rho };
        let b = if pc.r_hi.is_infinite() { f64::INFINITY } else { pc.r_hi.ln() - rho };
        let gamma = kernel.diagonal().exponent();
        let base = AwayOpts {
            z_min: 1e-14,
            gamma,
            growth: 4.0,
            log_power: pc.log_power,
            log_offset: rho,
            max_width: self.cfg.singular_split_width,
            ..AwayOpts::default()
        };
        let left = AwayOpts { rate: m.abs().max(1e-3), decay: m, ..base };
        let right = AwayOpts { rate: (m - lambda).abs().max(1e-3), decay: lambda - m, ..base };
        let integral = integrate_with_point(&f, a, b, 0.0, &left, &right);
        pc.coef * ((m - p.beta() - lambda) * rho).exp() * integral
    }
}

/// `u(r)` at a single radius.
pub fn potential_at(params: &RieszParams, f: &RadialProfile, r: f64, cfg: &QuadratureConfig) -> Result<f64> {
    Ok(PotentialEvaluator::new(params, f, cfg)?.at(r))
}

/// Asymptotic exponent candidates `(power, log_power)` of `I f` as `r -> ∞`
/// (`tail = true`) or `r -> 0`.
pub fn asymptotic_exponents(params: &RieszParams, f: &RadialProfile, tail: bool) -> Vec<(f64, u32)> {
    let (d, a, b, l) = (params.dim(), params.alpha(), params.beta(), params.lambda());
    let mut out: Vec<(f64, u32)> = Vec::new();
    if f.is_zero() {
        return out;
    }
    let base = if tail { -b - l } else { -b };
    out.push((base, 0));
    let piece = if tail { f.tail_piece() } else { f.head_piece() };
    if let Some(pc) = piece {
        let m = pc.power + d - a;
        let other = if tail { m - b - l } else { m - l - b };
        let k = pc.log_power;
        if (other - base).abs() < RESONANCE_TOL {
            for j in 1..=k + 1 {
                out.push((base, j));
            }
        } else {
            for j in 0..=k {
                out.push((other, j));
            }
        }
    }
    out
}

fn solve_least_squares(rows: &[Vec<f64>], rhs: &[f64]) -> Option<Vec<f64>> {
    let n = rows.first()?.len();
    // column scaling, then normal equations with partial pivoting
    let scale: Vec<f64> = (0..n)
        .map(|j| rows.iter().map(|r| r[j].abs()).fold(0.0, f64::max).max(1e-300))
        .collect();
    let mut ata = vec![vec![0.0; n + 1]; n];
    for (r, y) in rows.iter().zip(rhs) {
        for i in 0..n {
            let ri = r[i] / scale[i];
            for j in 0..n {
                ata[i][j] += ri * r[j] / scale[j];
            }
            ata[i][n] += ri * y;
        }
    }
    for c in 0..n {
        let piv = (c..n).max_by(|&i, &j| ata[i][c].abs().total_cmp(&ata[j][c].abs()))?;
        ata.swap(c, piv);
        let p = ata[c][c];
        if p.abs() < 1e-300 {
            return None;
        }
        let pivot_row = ata[c].clone();
        for (i, row) in ata.iter_mut().enumerate() {
            if i != c {
                let f = row[c] / p;
                for (x, y) in row[c..].iter_mut().zip(&pivot_row[c..]) {
                    *x -= f * y;
                }
            }
        }
    }
    Some((0..n).map(|i| ata[i][n] / ata[i][i] / scale[i]).collect())
}

/// Least-squares coefficients for the given exponents over grid samples.
fn fit_model(exps: &[(f64, u32)], rhos: &[f64], values: &[f64]) -> AsymptoticModel {
    if exps.is_empty() || values.iter().all(|v| *v == 0.0) {
        return AsymptoticModel::zero();
    }
    // divide out the leading exponent at the fit window for conditioning
    let rho_ref = rhos[rhos.len() / 2];
    let a0 = exps[0].0;
    let rows: Vec<Vec<f64>> = rhos
        .iter()
        .map(|&r| {
            exps.iter()
                .map(|&(a, k)| ((a - a0) * (r - rho_ref)).exp() * r.powi(k as i32))
                .collect()
        })
        .collect();
    let rhs: Vec<f64> = rhos.iter().zip(values).map(|(&r, &v)| v * (-a0 * (r - rho_ref)).exp()).collect();
    let Some(c) = solve_least_squares(&rows, &rhs) else {
        return AsymptoticModel::zero();
    };
    let terms = exps
        .iter()
        .zip(c)
        .map(|(&(a, k), c)| ModelTerm { coef: c * (-a * rho_ref).exp(), power: a, log_power: k })
        .collect();
    AsymptoticModel { terms, outer: 1.0, ln_scale: 0.0 }
}

/// Working grid: the configured window, widened by whole decades so every
/// finite breakpoint of `f` sits at least one decade inside it.
fn working_window(f: &RadialProfile, cfg: &QuadratureConfig) -> (f64, f64) {
    let mut lo = cfg.r_min;
    let mut hi = cfg.r_max;
    for b in f.breakpoints() {
        while b < lo * 10.0 {
            lo /= 10.0;
        }
        while b > hi / 10.0 {
            hi *= 10.0;
        }
    }
    (lo, hi)
}

/// Sample `I f` on the working grid and fit the asymptotic models.
pub fn apply(params: &RieszParams, f: &RadialProfile, cfg: &QuadratureConfig) -> Result<SampledPotential> {
    cfg.validate()?;
    let chart = exponent_chart(params);
    if !in_l_interval(f, chart.p_minus, chart.p_plus, params) {
        return Err(RieszError::NotInL(f.label().to_string()));
    }
    let (lo, hi) = working_window(f, cfg);
    let radii = log_grid(lo, hi, cfg.points_per_decade);
    let eval = PotentialEvaluator::new(params, f, cfg)?;
    let values: Vec<f64> = radii.par_iter().map(|&r| eval.at(r)).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(RieszError::Quadrature(format!("non-finite potential for '{}'", f.label())));
    }
    let log_step = std::f64::consts::LN_10 / cfg.points_per_decade as f64;
    let ln_r0 = lo.ln();
    let n = radii.len();
    let w = cfg.points_per_decade + 1;
    let rhos: Vec<f64> = (0..n).map(|i| ln_r0 + i as f64 * log_step).collect();
    let head = fit_model(&asymptotic_exponents(params, f, false), &rhos[..w], &values[..w]);
    let tail = fit_model(&asymptotic_exponents(params, f, true), &rhos[n - w..], &values[n - w..]);
    Ok(SampledPotential { d: params.d(), radii, values, ln_r0, log_step, head, tail })
}

/// Largest relative deviation between `I[f(t·)](r)` and
/// `t^{d(κ-1)} (I f)(t r)` over the grid.
pub fn dilation_identity_check(params: &RieszParams, f: &RadialProfile, t: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let ft = f.dilated(t)?;
    let lhs = apply(params, &ft, cfg)?;
    let eval = PotentialEvaluator::new(params, f, cfg)?;
    let factor = t.powf(params.dim() * (params.kappa() - 1.0));
    let dev = lhs
        .radii
        .par_iter()
        .zip(lhs.values.par_iter())
        .map(|(&r, &l)| {
            let rhs = factor * eval.at(t * r);
            let scale = l.abs().max(rhs.abs());
            if scale == 0.0 {
                0.0
            } else {
                (l - rhs).abs() / scale
            }
        })
        .reduce(|| 0.0, f64::max);
    Ok(dev)
}

/// `B(f, g) = ∫ (I f)(x) g(x) dx` for two analytic profiles, with `I f`
/// evaluated pointwise at the quadrature nodes of `g`.
pub fn bilinear(params: &RieszParams, f: &RadialProfile, g: &RadialProfile, cfg: &QuadratureConfig) -> Result<f64> {
    cfg.validate()?;
    let chart = exponent_chart(params);
    if !in_l_interval(f, chart.p_minus, chart.p_plus, params) {
        return Err(RieszError::NotInL(f.label().to_string()));
    }
    if f.is_zero() || g.is_zero() {
        return Ok(0.0);
    }
    let eval = PotentialEvaluator::new(params, f, cfg)?;
    let d = params.dim();
    let f_breaks: Vec<f64> = f.breakpoints().iter().map(|b| b.ln()).collect();
    // nearest breakpoint of f at or beyond `x` in direction `dir`, if within `reach`;
    // u has a cusp there, so panels are graded toward it even from outside
    let near_break = |x: f64, dir: f64, reach: f64| {
        f_breaks
            .iter()
            .copied()
            .filter(|b| (b - x) * dir >= -1e-14 * (1.0 + x.abs()) && (b - x).abs() <= reach)
            .min_by(|a, b| (a - x).abs().total_cmp(&(b - x).abs()))
    };
    let tail_rate = asymptotic_exponents(params, f, true).iter().map(|e| e.0).fold(f64::NEG_INFINITY, f64::max);
    let head_rate = asymptotic_exponents(params, f, false).iter().map(|e| e.0).fold(f64::INFINITY, f64::min);
    let rule = gauss_legendre(16);
    let mut total = 0.0;
    for pc in g.pieces() {
        if pc.coef == 0.0 {
            continue;
        }
        let integrand = |rho: f64| {
            let r = rho.exp();
            eval.at(r) * pc.value_unchecked(r) * (d * rho).exp()
        };
        let a = if pc.r_lo == 0.0 { f64::NEG_INFINITY } else { pc.r_lo.ln() };
        let b = if pc.r_hi.is_infinite() { f64::INFINITY } else { pc.r_hi.ln() };
        // finite part split at the breakpoints of f, where u is not smooth
        let lo_fin = if a.is_finite() { a } else { f_breaks.first().copied().unwrap_or(0.0).min(b) - 1.0 };
        let hi_fin = if b.is_finite() { b } else { f_breaks.last().copied().unwrap_or(0.0).max(a) + 1.0 };
        let mut cuts = vec![lo_fin];
        cuts.extend(f_breaks.iter().copied().filter(|&x| x > lo_fin && x < hi_fin));
        cuts.push(hi_fin);
        for w in cuts.windows(2) {
            let (l, h) = (w[0], w[1]);
            let mid = 0.5 * (l + h);
            let half = 0.5 * (h - l);
            let halves = [(l, mid, near_break(l, -1.0, half)), (mid, h, near_break(h, 1.0, half))];
            for (s, e, x0) in halves {
                for (p0, p1) in graded_bounds(s, e, x0.unwrap_or(f64::NAN), 1.0) {
                    total += rule.integrate(p0, p1, integrand);
                }
            }
        }
        if !a.is_finite() {
            let rate = head_rate + pc.power + d;
            if !(rate > 0.0) {
                return Err(RieszError::Quadrature(format!("pairing diverges at the origin for '{}'", g.label())));
            }
            total += integrate_tail(&integrand, lo_fin, -1.0, rate, pc.log_power + 2, lo_fin);
        }
        if !b.is_finite() {
            let rate = -(tail_rate + pc.power + d);
            if !(rate > 0.0) {
                return Err(RieszError::Quadrature(format!("pairing diverges at infinity for '{}'", g.label())));
            }
            total += integrate_tail(&integrand, hi_fin, 1.0, rate, pc.log_power + 2, hi_fin);
        }
    }
    Ok(sphere_area(params.d()) * total)
}

/// Norms entering the Riesz ratio `|I f|_q / |f|_p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatioFragment {
    pub p: f64,
    pub q: f64,
    pub norm_f: f64,
    pub norm_u: f64,
    pub ratio: f64,
}

/// Ratio with an explicit output exponent `q` (on or off the conjugate line).
pub fn ratio_with_exponents(
    u: &SampledPotential,
    f: &RadialProfile,
    params: &RieszParams,
    p: f64,
    q: f64,
    cfg: &QuadratureConfig,
) -> Result<RatioFragment> {
    let lf = ln_lp_integral(f, p, params.d(), cfg)?;
    if lf == f64::NEG_INFINITY {
        return Err(RieszError::InvalidProfile(format!("'{}' is the zero function", f.label())));
    }
    let ln_norm_f = lf / p;
    let ln_norm_u = u.ln_lq_integral(q) / q;
    Ok(RatioFragment {
        p,
        q,
        norm_f: ln_norm_f.exp(),
        norm_u: ln_norm_u.exp(),
        ratio: (ln_norm_u - ln_norm_f).exp(),
    })
}

/// Ratio at `p` with `q = q(p)`, reusing a computed potential.
pub fn ratio_from_potential(
    u: &SampledPotential,
    f: &RadialProfile,
    params: &RieszParams,
    p: f64,
    cfg: &QuadratureConfig,
) -> Result<RatioFragment> {
    let g = conjugate_q(&exponent_chart(params), p)?;
    ratio_with_exponents(u, f, params, p, g.q, cfg)
}

/// `|I f|_{q(p)} / |f|_p`, a lower bound for the operator norm at `p`.
pub fn riesz_ratio(params: &RieszParams, f: &RadialProfile, p: f64, cfg: &QuadratureConfig) -> Result<RatioFragment> {
    let chart = exponent_chart(params);
    conjugate_q(&chart, p)?;
    let u = apply(params, f, cfg)?;
    ratio_from_potential(&u, f, params, p, cfg)
}

#[derive(Debug, Clone)]
pub struct DualityWitness {
    pub g_star: SampledPotential,
    /// `|B(f, g*) - |I f|_q|`.
    pub gap: f64,
    pub norm_u: f64,
    pub pairing: f64,
}

/// The Hölder-extremal `g*` for `u = I f` and the gap between `B(f, g*)`
/// and `|I f|_q`.
pub fn duality_witness(params: &RieszParams, f: &RadialProfile, p: f64, cfg: &QuadratureConfig) -> Result<DualityWitness> {
    let g = conjugate_q(&exponent_chart(params), p)?;
    let u = apply(params, f, cfg)?;
    duality_witness_from(&u, g.q)
}

pub fn duality_witness_from(u: &SampledPotential, q: f64) -> Result<DualityWitness> {
    if u.values.iter().all(|v| *v == 0.0) {
        return Err(RieszError::InvalidProfile("duality witness needs a nonzero potential".into()));
    }
    let g_star = u.dual_unit(q);
    let norm_u = u.lq_norm(q);
    let pairing = u.ln_pairing(&g_star)?.exp();
    Ok(DualityWitness { g_star, gap: (pairing - norm_u).abs(), norm_u, pairing })
}
