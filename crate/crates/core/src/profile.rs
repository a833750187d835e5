//! Radial functions `f(x) = H(|x|)` built from power-log pieces, their
//! Lebesgue norms, and the extremal test profiles `f0`, `g0`, `h`.

use std::f64::consts::LN_10;

use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::error::{Result, RieszError};
use crate::exponents::RieszParams;
use crate::operator::QuadratureConfig;
use crate::quad::{gauss_legendre, graded_bounds, ln_integral_semi_infinite};
use crate::special::{sphere_area, LogSum};

/// Slack used when deciding integrability from exponents: a value of
/// `power * p + d` within this of zero counts as the divergent boundary.
pub const EXPONENT_SLACK: f64 = 1e-12;

/// Strict indicator of the open interval `(lo, hi)`; point values on the
/// boundary do not affect any integral.
#[derive(Debug, Clone, Copy, Default)]
pub struct IndicatorConvention;

impl IndicatorConvention {
    #[inline]
    pub fn indicator(lo: f64, hi: f64, r: f64) -> f64 {
        if r > lo && r < hi {
            1.0
        } else {
            0.0
        }
    }
}

/// `coef * r^power * (ln r)^log_power` on `(r_lo, r_hi)`, zero elsewhere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerLogPiece {
    pub coef: f64,
    pub power: f64,
    #[serde(default)]
    pub log_power: u32,
    pub r_lo: f64,
    #[serde(serialize_with = "ser_radius", deserialize_with = "de_radius")]
    pub r_hi: f64,
}

fn ser_radius<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_infinite() {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*v)
    }
}

fn de_radius<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Radius {
        Num(f64),
        Text(String),
    }
    match Radius::deserialize(d)? {
        Radius::Num(v) => Ok(v),
        Radius::Text(t) if t == "inf" || t == "+inf" || t == "infinity" => Ok(f64::INFINITY),
        Radius::Text(t) => Err(de::Error::custom(format!("bad radius '{t}', expected a number or \"inf\""))),
    }
}

impl PowerLogPiece {
    pub fn power_law(coef: f64, power: f64, r_lo: f64, r_hi: f64) -> Self {
        PowerLogPiece { coef, power, log_power: 0, r_lo, r_hi }
    }

    #[inline]
    pub fn value(&self, r: f64) -> f64 {
        if !(r > self.r_lo && r < self.r_hi) {
            return 0.0;
        }
        self.value_unchecked(r)
    }

    /// Value of the analytic form, ignoring the support.
    #[inline]
    pub fn value_unchecked(&self, r: f64) -> f64 {
        let base = self.coef * r.powf(self.power);
        match self.log_power {
            0 => base,
            k => base * r.ln().powi(k as i32),
        }
    }

    /// `ln |value|` at `r = e^s`, valid for any real `s`; `-inf` off the
    /// support.
    pub fn ln_abs_at_log(&self, s: f64) -> f64 {
        let lo = if self.r_lo == 0.0 { f64::NEG_INFINITY } else { self.r_lo.ln() };
        let hi = self.r_hi.ln();
        if !(s > lo && s < hi) || self.coef == 0.0 {
            return f64::NEG_INFINITY;
        }
        let mut l = self.coef.abs().ln() + self.power * s;
        if self.log_power > 0 {
            l += self.log_power as f64 * s.abs().ln();
        }
        l
    }

    pub fn touches_origin(&self) -> bool {
        self.r_lo == 0.0
    }

    pub fn unbounded(&self) -> bool {
        self.r_hi.is_infinite()
    }

    /// Whether `|piece|^p` is integrable against `r^{d-1} dr`.
    pub fn in_lp(&self, p: f64, d: f64) -> bool {
        if self.coef == 0.0 {
            return true;
        }
        let c = self.power * p + d;
        let slack = EXPONENT_SLACK * (1.0 + self.power.abs() * p);
        if self.touches_origin() && c <= slack {
            return false;
        }
        if self.unbounded() && c >= -slack {
            return false;
        }
        true
    }

    /// `ln ∫_{support} |piece(r)|^p r^{d-1} dr` (no sphere factor), by
    /// Gauss-Legendre panels in `ln r` inside the working window and
    /// analytically (pure powers) or by a log-domain tail integral beyond it.
    fn ln_pth_power_quad(&self, p: f64, d: f64, window: (f64, f64)) -> f64 {
        if self.coef == 0.0 {
            return f64::NEG_INFINITY;
        }
        let c = self.power * p + d;
        let kp = self.log_power as f64 * p;
        let ln_coef = p * self.coef.abs().ln();
        let lo = if self.r_lo == 0.0 { f64::NEG_INFINITY } else { self.r_lo.ln() };
        let hi = if self.r_hi.is_infinite() { f64::INFINITY } else { self.r_hi.ln() };
        let (w_lo, w_hi) = window;
        let lf = move |t: f64| {
            let mut v = ln_coef + c * t;
            if kp > 0.0 {
                v += kp * t.abs().ln();
            }
            v
        };
        let mut acc = LogSum::new();
        // inside the working window
        let a = lo.max(w_lo);
        let b = hi.min(w_hi);
        if a < b {
            acc.add(ln_panel_integral(&lf, a, b, kp > 0.0));
        }
        // head: below the window
        if lo < w_lo {
            let b = hi.min(w_lo);
            acc.add(self.ln_outside(&lf, c, ln_coef, kp, lo, b));
        }
        // tail: above the window
        if hi > w_hi {
            let a = lo.max(w_hi);
            acc.add(self.ln_outside(&lf, c, ln_coef, kp, a, hi));
        }
        acc.ln()
    }

    fn ln_outside(&self, lf: &dyn Fn(f64) -> f64, c: f64, ln_coef: f64, kp: f64, a: f64, b: f64) -> f64 {
        if a >= b {
            return f64::NEG_INFINITY;
        }
        if kp == 0.0 {
            // ∫_a^b e^{c t} dt in closed form
            return ln_coef + ln_exp_integral(c, a, b);
        }
        match (a.is_finite(), b.is_finite()) {
            (true, true) => ln_panel_integral(lf, a, b, true),
            (false, true) => ln_integral_semi_infinite(lf, b, -1.0),
            (true, false) => ln_integral_semi_infinite(lf, a, 1.0),
            (false, false) => log_sum2(
                ln_integral_semi_infinite(lf, 0.0, -1.0),
                ln_integral_semi_infinite(lf, 0.0, 1.0),
            ),
        }
    }
}

fn log_sum2(a: f64, b: f64) -> f64 {
    crate::special::log_sum_exp(a, b)
}

/// `ln ∫_a^b e^{c t} dt` with either end possibly infinite (when convergent).
pub fn ln_exp_integral(c: f64, a: f64, b: f64) -> f64 {
    if c == 0.0 {
        return (b - a).ln();
    }
    if c > 0.0 {
        // dominated by the upper end
        if b.is_infinite() {
            return f64::INFINITY;
        }
        let tail = if a.is_infinite() { 0.0 } else { (-(c * (b - a))).exp() };
        c * b + (-tail).ln_1p() - c.ln()
    } else {
        if a.is_infinite() {
            return f64::INFINITY;
        }
        let tail = if b.is_infinite() { 0.0 } else { (c * (b - a)).exp() };
        c * a + (-tail).ln_1p() - (-c).ln()
    }
}

/// `ln ∫_a^b exp(lf(t)) dt` for finite `a < b` by 16-point panels of width at
/// most one, graded toward `t = 0` when `log_grade` (for `|t|^k` factors).
fn ln_panel_integral(lf: &dyn Fn(f64) -> f64, a: f64, b: f64, log_grade: bool) -> f64 {
    let rule = gauss_legendre(16);
    // |t|^k is not smooth at t = 0: grade geometrically toward it
    let bounds = if log_grade { graded_bounds(a, b, 0.0, 1.0) } else { graded_bounds(a, b, f64::NAN, 1.0) };
    let mut acc = LogSum::new();
    for (lo, hi) in bounds {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            acc.add(lf(mid + half * x) + (w * half).ln());
        }
    }
    acc.ln()
}

/// A radial profile: ordered power-log pieces with pairwise disjoint supports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialProfile {
    pieces: Vec<PowerLogPiece>,
    label: String,
}

impl RadialProfile {
    pub fn new(label: impl Into<String>, mut pieces: Vec<PowerLogPiece>) -> Result<Self> {
        let label = label.into();
        for pc in &pieces {
            if !pc.coef.is_finite() || !pc.power.is_finite() {
                return Err(RieszError::InvalidProfile(format!("{label}: non-finite coefficient or power")));
            }
            if !(pc.r_lo >= 0.0 && pc.r_lo < pc.r_hi) || pc.r_lo.is_infinite() || pc.r_hi.is_nan() {
                return Err(RieszError::InvalidProfile(format!(
                    "{label}: bad support ({}, {})",
                    pc.r_lo, pc.r_hi
                )));
            }
        }
        pieces.sort_by(|a, b| a.r_lo.total_cmp(&b.r_lo));
        for w in pieces.windows(2) {
            if w[0].r_hi > w[1].r_lo {
                return Err(RieszError::InvalidProfile(format!(
                    "{label}: overlapping supports ({}, {}) and ({}, {})",
                    w[0].r_lo, w[0].r_hi, w[1].r_lo, w[1].r_hi
                )));
            }
        }
        Ok(RadialProfile { pieces, label })
    }

    pub fn zero(label: impl Into<String>) -> Self {
        RadialProfile { pieces: Vec::new(), label: label.into() }
    }

    pub fn pieces(&self) -> &[PowerLogPiece] {
        &self.pieces
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn is_zero(&self) -> bool {
        self.pieces.iter().all(|p| p.coef == 0.0)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.pieces.iter().all(|p| {
            // (ln r)^k is negative on r < 1 for odd k
            let log_sign_neg = p.log_power % 2 == 1 && p.r_hi <= 1.0;
            let log_sign_pos = p.log_power % 2 == 0 || p.r_lo >= 1.0;
            p.coef == 0.0 || (p.coef > 0.0 && log_sign_pos) || (p.coef < 0.0 && log_sign_neg)
        })
    }

    #[inline]
    pub fn value(&self, r: f64) -> f64 {
        // supports are disjoint and sorted
        let idx = self.pieces.partition_point(|p| p.r_hi <= r);
        match self.pieces.get(idx) {
            Some(p) => p.value(r),
            None => 0.0,
        }
    }

    /// `ln |H(e^s)|`, safe where `e^s` over- or underflows.
    pub fn ln_abs_at_log(&self, s: f64) -> f64 {
        self.pieces.iter().map(|p| p.ln_abs_at_log(s)).fold(f64::NEG_INFINITY, f64::max)
    }

    /// All finite, positive piece endpoints, sorted and deduplicated.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self
            .pieces
            .iter()
            .filter(|p| p.coef != 0.0)
            .flat_map(|p| [p.r_lo, p.r_hi])
            .filter(|r| r.is_finite() && *r > 0.0)
            .collect();
        v.sort_by(|a, b| a.total_cmp(b));
        v.dedup();
        v
    }

    /// The nonzero piece whose support reaches the origin, if any.
    pub fn head_piece(&self) -> Option<&PowerLogPiece> {
        self.pieces.iter().find(|p| p.coef != 0.0 && p.touches_origin())
    }

    /// The nonzero piece whose support is unbounded, if any.
    pub fn tail_piece(&self) -> Option<&PowerLogPiece> {
        self.pieces.iter().find(|p| p.coef != 0.0 && p.unbounded())
    }

    /// Multiply every coefficient by `c`.
    pub fn scaled(&self, c: f64) -> RadialProfile {
        let pieces = self.pieces.iter().map(|p| PowerLogPiece { coef: p.coef * c, ..p.clone() }).collect();
        RadialProfile { pieces, label: format!("{}*{c}", self.label) }
    }

    /// The dilation `x -> f(t x)`; only pure-power pieces are supported.
    pub fn dilated(&self, t: f64) -> Result<RadialProfile> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(RieszError::Config(format!("dilation factor must be positive, got {t}")));
        }
        let mut pieces = Vec::with_capacity(self.pieces.len());
        for p in &self.pieces {
            if p.log_power != 0 {
                return Err(RieszError::UnsupportedForm(
                    "dilation of log-power pieces is not implemented".into(),
                ));
            }
            pieces.push(PowerLogPiece {
                coef: p.coef * t.powf(p.power),
                power: p.power,
                log_power: 0,
                r_lo: p.r_lo / t,
                r_hi: p.r_hi / t,
            });
        }
        Ok(RadialProfile { pieces, label: format!("{}(t={t})", self.label) })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.pieces).expect("pieces serialize")
    }

    pub fn from_json(label: impl Into<String>, json: &str) -> Result<RadialProfile> {
        let pieces: Vec<PowerLogPiece> =
            serde_json::from_str(json).map_err(|e| RieszError::InvalidProfile(e.to_string()))?;
        RadialProfile::new(label, pieces)
    }

    pub fn in_lp(&self, p: f64, d: f64) -> bool {
        self.pieces.iter().all(|pc| pc.in_lp(p, d))
    }
}

/// First extremal profile: `|x|^{-(d-alpha)}` on `|x| > 1`.
pub fn make_f0(params: &RieszParams) -> RadialProfile {
    let power = -(params.dim() - params.alpha());
    RadialProfile {
        pieces: vec![PowerLogPiece::power_law(1.0, power, 1.0, f64::INFINITY)],
        label: "f0".into(),
    }
}

/// Second extremal profile: `|x|^{-(d-alpha-lambda)}` on `|x| < 1`.
pub fn make_g0(params: &RieszParams) -> RadialProfile {
    let power = -(params.dim() - params.alpha() - params.lambda());
    RadialProfile {
        pieces: vec![PowerLogPiece::power_law(1.0, power, 0.0, 1.0)],
        label: "g0".into(),
    }
}

/// `h = f0 + g0`; the supports are disjoint so this is a two-piece profile.
pub fn make_h(params: &RieszParams) -> RadialProfile {
    let mut pieces = make_g0(params).pieces;
    pieces.extend(make_f0(params).pieces);
    RadialProfile { pieces, label: "h".into() }
}

/// Exact `|f|_p` from antiderivatives of pure-power pieces, `None` when the
/// integral diverges.
pub fn lp_norm_closed(profile: &RadialProfile, p: f64, params: &RieszParams) -> Result<Option<f64>> {
    if !(p >= 1.0) {
        return Err(RieszError::Config(format!("p must be >= 1, got {p}")));
    }
    let d = params.dim();
    let mut acc = LogSum::new();
    for pc in profile.pieces() {
        if pc.coef == 0.0 {
            continue;
        }
        if pc.log_power != 0 {
            return Err(RieszError::UnsupportedForm(
                "closed-form norms cover pure powers only".into(),
            ));
        }
        if !pc.in_lp(p, d) {
            return Ok(None);
        }
        let c = pc.power * p + d;
        let lo = if pc.r_lo == 0.0 { f64::NEG_INFINITY } else { pc.r_lo.ln() };
        let hi = pc.r_hi.ln();
        acc.add(p * pc.coef.abs().ln() + ln_exp_integral(c, lo, hi));
    }
    let ln_pp = acc.ln() + sphere_area(params.d()).ln();
    Ok(Some(if ln_pp == f64::NEG_INFINITY { 0.0 } else { (ln_pp / p).exp() }))
}

/// `ln ∫ |f|^p dx` over R^d by quadrature.
pub fn ln_lp_integral(profile: &RadialProfile, p: f64, d: usize, quad: &QuadratureConfig) -> Result<f64> {
    if !profile.in_lp(p, d as f64) {
        return Err(RieszError::DivergentNorm { label: profile.label.clone(), p });
    }
    let window = (quad.r_min.ln(), quad.r_max.ln());
    let mut acc = LogSum::new();
    for pc in profile.pieces() {
        acc.add(pc.ln_pth_power_quad(p, d as f64, window));
    }
    Ok(acc.ln() + sphere_area(d).ln())
}

/// `|f|_p` by quadrature: Gauss-Legendre panels inside the working window,
/// exponents-based analytic contributions beyond it.
pub fn lp_norm_quad(profile: &RadialProfile, p: f64, params: &RieszParams, quad: &QuadratureConfig) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(RieszError::Config(format!("p must be >= 1, got {p}")));
    }
    let l = ln_lp_integral(profile, p, params.d(), quad)?;
    Ok(if l == f64::NEG_INFINITY { 0.0 } else { (l / p).exp() })
}

/// Whether `profile` lies in `L_p` for every `p` in the open interval `(a, b)`.
///
/// Decided from exponents: near the origin `r^s` needs `s p + d > 0`, near
/// infinity `s p + d < 0`; both are linear in `p`, so checking the closed
/// ends suffices. Log factors never change these strict verdicts.
pub fn in_l_interval(profile: &RadialProfile, a: f64, b: f64, params: &RieszParams) -> bool {
    let d = params.dim();
    profile.pieces().iter().filter(|pc| pc.coef != 0.0).all(|pc| {
        let s = pc.power;
        let at = |p: f64| s * p + d;
        let slack = EXPONENT_SLACK * (1.0 + s.abs() * a.max(if b.is_finite() { b } else { a }));
        let head_ok = !pc.touches_origin() || {
            at(a) >= -slack && if b.is_finite() { at(b) >= -slack } else { s >= 0.0 }
        };
        let tail_ok = !pc.unbounded() || {
            at(a) <= slack && if b.is_finite() { at(b) <= slack } else { s < 0.0 }
        };
        head_ok && tail_ok
    })
}

/// Logarithmically spaced radii `r_min * 10^{i/ppd}`.
pub fn log_grid(r_min: f64, r_max: f64, points_per_decade: usize) -> Vec<f64> {
    let decades = (r_max / r_min).log10();
    let n = (decades * points_per_decade as f64).round() as usize;
    let h = LN_10 / points_per_decade as f64;
    let l0 = r_min.ln();
    (0..=n).map(|i| (l0 + i as f64 * h).exp()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponents::{exponent_chart, validate_params};
    use std::f64::consts::PI;

    fn config_a() -> RieszParams {
        validate_params(2, 0.3, 0.2, 0.8).unwrap()
    }

    #[test]
    fn f0_and_g0_shapes() {
        let a = config_a();
        let f0 = make_f0(&a);
        assert_eq!(f0.pieces().len(), 1);
        assert!((f0.pieces()[0].power + 1.7).abs() < 1e-15);
        assert_eq!(f0.value(0.5), 0.0);
        assert_eq!(f0.value(1.0), 0.0);
        assert!((f0.value(2.0) - 2f64.powf(-1.7)).abs() < 1e-15);
        let g0 = make_g0(&a);
        assert!((g0.pieces()[0].power + 0.9).abs() < 1e-15);
        assert_eq!(g0.value(2.0), 0.0);
        assert!((g0.value(0.25) - 3.482_202_253).abs() < 1e-8);
        let h = make_h(&a);
        assert_eq!(h.pieces().len(), 2);
        for &r in &[0.01, 0.5, 0.999] {
            assert_eq!(h.value(r), g0.value(r));
        }
        for &r in &[1.001, 3.0, 1e5] {
            assert_eq!(h.value(r), f0.value(r));
        }
    }

    #[test]
    fn closed_form_examples() {
        let a = config_a();
        let n = lp_norm_closed(&make_f0(&a), 1.5, &a).unwrap().unwrap();
        let exact = (2.0 * PI / 0.55f64).powf(2.0 / 3.0);
        assert!((n - exact).abs() < 1e-13 * exact);
        assert!((n - 5.072_376).abs() < 1e-6);
        let n = lp_norm_closed(&make_g0(&a), 1.5, &a).unwrap().unwrap();
        let exact = (2.0 * PI / 0.65f64).powf(2.0 / 3.0);
        assert!((n - exact).abs() < 1e-13 * exact);
        assert!((n - 4.537_789).abs() < 1e-6);
        let c = exponent_chart(&a);
        assert_eq!(lp_norm_closed(&make_f0(&a), c.p_minus, &a).unwrap(), None);
        assert_eq!(lp_norm_closed(&make_g0(&a), c.p_plus, &a).unwrap(), None);
    }

    #[test]
    fn closed_form_rejects_log_pieces() {
        let a = config_a();
        let prof = RadialProfile::new(
            "log",
            vec![PowerLogPiece { coef: 1.0, power: 0.0, log_power: 1, r_lo: 1.0, r_hi: 2.0 }],
        )
        .unwrap();
        assert!(matches!(lp_norm_closed(&prof, 2.0, &a), Err(RieszError::UnsupportedForm(_))));
    }

    #[test]
    fn quadrature_matches_closed_form() {
        let a = config_a();
        let q = QuadratureConfig::default();
        let c = exponent_chart(&a);
        for prof in [make_f0(&a), make_g0(&a), make_h(&a)] {
            for &u in &[0.001, 0.1, 0.3, 0.5, 0.9, 0.999] {
                let p = c.p_minus + u * c.width();
                let exact = lp_norm_closed(&prof, p, &a).unwrap().unwrap();
                let got = lp_norm_quad(&prof, p, &a, &q).unwrap();
                assert!((got - exact).abs() < 1e-10 * exact, "{} p={p}: {got} vs {exact}", prof.label());
            }
        }
    }

    #[test]
    fn zero_profile_has_zero_norm() {
        let a = config_a();
        let z = RadialProfile::zero("zero");
        assert_eq!(lp_norm_quad(&z, 1.5, &a, &QuadratureConfig::default()).unwrap(), 0.0);
        assert_eq!(lp_norm_closed(&z, 1.5, &a).unwrap(), Some(0.0));
    }

    #[test]
    fn disjoint_additivity_for_h() {
        let a = config_a();
        let q = QuadratureConfig::default();
        let p = 1.5;
        let f = lp_norm_quad(&make_f0(&a), p, &a, &q).unwrap();
        let g = lp_norm_quad(&make_g0(&a), p, &a, &q).unwrap();
        let h = lp_norm_quad(&make_h(&a), p, &a, &q).unwrap();
        let expect = (f.powf(p) + g.powf(p)).powf(1.0 / p);
        assert!((h - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn divergent_norm_is_an_error() {
        let a = config_a();
        let c = exponent_chart(&a);
        let r = lp_norm_quad(&make_f0(&a), c.p_minus, &a, &QuadratureConfig::default());
        assert!(matches!(r, Err(RieszError::DivergentNorm { .. })));
    }

    #[test]
    fn log_piece_quadrature() {
        // ∫_1^∞ r^{-3} (ln r)^2 r dr with d = 2, p = 1: substitute t = ln r,
        // ∫_0^∞ t^2 e^{-t} dt = 2, times 2π
        let a = config_a();
        let prof = RadialProfile::new(
            "log",
            vec![PowerLogPiece { coef: 1.0, power: -3.0, log_power: 2, r_lo: 1.0, r_hi: f64::INFINITY }],
        )
        .unwrap();
        let n = lp_norm_quad(&prof, 1.0, &a, &QuadratureConfig::default()).unwrap();
        assert!((n - 4.0 * PI).abs() < 1e-10 * 4.0 * PI, "{n}");
        // the same piece on (0, 1) with power 0: ∫_0^1 (ln r)^2 r dr = 1/4
        let prof = RadialProfile::new(
            "log0",
            vec![PowerLogPiece { coef: 1.0, power: 0.0, log_power: 2, r_lo: 0.0, r_hi: 1.0 }],
        )
        .unwrap();
        let n = lp_norm_quad(&prof, 1.0, &a, &QuadratureConfig::default()).unwrap();
        assert!((n - PI / 2.0).abs() < 1e-10, "{n}");
    }

    #[test]
    fn interval_membership() {
        let a = config_a();
        let c = exponent_chart(&a);
        assert!(in_l_interval(&make_h(&a), c.p_minus, c.p_plus, &a));
        assert!(!in_l_interval(&make_f0(&a), 1.0, c.p_minus, &a));
        assert!(!in_l_interval(&make_h(&a), c.p_minus * 0.99, c.p_plus, &a));
        assert!(!in_l_interval(&make_h(&a), c.p_minus, c.p_plus * 1.01, &a));
        let bump = RadialProfile::new("bump", vec![PowerLogPiece::power_law(2.0, 0.0, 1.0, 2.0)]).unwrap();
        assert!(in_l_interval(&bump, 1.0, f64::INFINITY, &a));
        // h fails at both closed ends
        assert!(!make_h(&a).in_lp(c.p_minus, 2.0));
        assert!(!make_h(&a).in_lp(c.p_plus, 2.0));
    }

    #[test]
    fn overlapping_supports_rejected() {
        let r = RadialProfile::new(
            "bad",
            vec![PowerLogPiece::power_law(1.0, 0.0, 0.0, 2.0), PowerLogPiece::power_law(1.0, 0.0, 1.0, 3.0)],
        );
        assert!(matches!(r, Err(RieszError::InvalidProfile(_))));
    }

    #[test]
    fn json_uses_inf_for_unbounded() {
        let a = config_a();
        let j = make_h(&a).to_json();
        assert!(j.contains("\"r_hi\":\"inf\""), "{j}");
        let back = RadialProfile::from_json("h", &j).unwrap();
        assert_eq!(back, make_h(&a));
    }

    #[test]
    fn dilation_scaling_law() {
        let a = config_a();
        let q = QuadratureConfig::default();
        let h = make_h(&a);
        for &p in &[1.3, 1.5, 2.0] {
            let base = lp_norm_quad(&h, p, &a, &q).unwrap();
            for &t in &[0.25, 0.5, 2.0, 4.0] {
                let n = lp_norm_quad(&h.dilated(t).unwrap(), p, &a, &q).unwrap();
                let expect = t.powf(-2.0 / p) * base;
                assert!((n - expect).abs() < 1e-8 * expect);
            }
        }
    }

    #[test]
    fn endpoint_norm_asymptotics_stay_banded() {
        let a = config_a();
        let c = exponent_chart(&a);
        let q = QuadratureConfig::default();
        let mut lower = Vec::new();
        let mut upper = Vec::new();
        for k in 2..=14 {
            let e = 0.5f64.powi(k) * c.width();
            let n = lp_norm_quad(&make_f0(&a), c.p_minus + e, &a, &q).unwrap();
            lower.push(n * e.powf(1.0 - a.alpha() / 2.0));
            let n = lp_norm_quad(&make_g0(&a), c.p_plus - e, &a, &q).unwrap();
            upper.push(n * e.powf((2.0 - a.alpha() - a.lambda()) / 2.0));
        }
        for v in [lower, upper] {
            let max = v.iter().cloned().fold(0.0, f64::max);
            let min = v.iter().cloned().fold(f64::INFINITY, f64::min);
            assert!(min > 0.0 && max / min < 3.0, "{v:?}");
        }
    }
}
