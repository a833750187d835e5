//! Operator parameters and the exponent geometry they induce: the admissible
//! input interval `(p_-, p_+)`, the output interval `(q_-, q_+)`, the blow-up
//! exponent `kappa`, and the conjugate line `1 + 1/q = 1/p + kappa`.

use serde::{Deserialize, Serialize};

use crate::error::{Result, RieszError};

/// Relative tolerance for membership on the conjugate line.
pub const LINE_TOL: f64 = 1e-12;

/// The quadruple `(d, alpha, beta, lambda)` of a weighted Riesz operator.
///
/// Only constructible through [`validate_params`], so every value in the
/// program satisfies `alpha, beta >= 0`, `lambda > 0` and
/// `alpha + beta + lambda < d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RieszParams {
    d: usize,
    alpha: f64,
    beta: f64,
    lambda: f64,
}

impl RieszParams {
    pub fn d(&self) -> usize {
        self.d
    }
    pub fn dim(&self) -> f64 {
        self.d as f64
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    pub fn kappa(&self) -> f64 {
        (self.alpha + self.beta + self.lambda) / self.dim()
    }

    /// The formal adjoint has the two weights exchanged.
    pub fn adjoint(&self) -> RieszParams {
        RieszParams { d: self.d, alpha: self.beta, beta: self.alpha, lambda: self.lambda }
    }
}

impl<'de> Deserialize<'de> for RieszParams {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            d: i64,
            alpha: f64,
            beta: f64,
            lambda: f64,
        }
        let raw = Raw::deserialize(de)?;
        validate_params(raw.d, raw.alpha, raw.beta, raw.lambda).map_err(serde::de::Error::custom)
    }
}

pub fn validate_params(d: i64, alpha: f64, beta: f64, lambda: f64) -> Result<RieszParams> {
    if d < 1 {
        return Err(RieszError::Dimension(d));
    }
    for (name, v) in [("alpha", alpha), ("beta", beta), ("lambda", lambda)] {
        if !v.is_finite() {
            return Err(RieszError::Sign(format!("{name} = {v} is not finite")));
        }
    }
    if alpha < 0.0 {
        return Err(RieszError::Sign(format!("alpha = {alpha} must be >= 0")));
    }
    if beta < 0.0 {
        return Err(RieszError::Sign(format!("beta = {beta} must be >= 0")));
    }
    if lambda <= 0.0 {
        return Err(RieszError::Sign(format!("lambda = {lambda} must be > 0")));
    }
    let sum = alpha + beta + lambda;
    if sum >= d as f64 {
        return Err(RieszError::Subcriticality { sum, d: d as usize });
    }
    Ok(RieszParams { d: d as usize, alpha, beta, lambda })
}

/// Derived exponents of a parameter set. `q_plus` is `+inf` when `beta = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentChart {
    pub p_minus: f64,
    pub p_plus: f64,
    pub q_minus: f64,
    pub q_plus: f64,
    pub kappa: f64,
    beta_over_d: f64,
}

pub fn exponent_chart(params: &RieszParams) -> ExponentChart {
    let d = params.dim();
    let (a, b, l) = (params.alpha, params.beta, params.lambda);
    ExponentChart {
        p_minus: d / (d - a),
        p_plus: d / (d - a - l),
        q_minus: d / (b + l),
        q_plus: if b == 0.0 { f64::INFINITY } else { d / b },
        kappa: (a + b + l) / d,
        beta_over_d: b / d,
    }
}

impl ExponentChart {
    /// `1/q` on the conjugate line; valid (possibly zero) on the closed interval.
    pub fn inv_q(&self, p: f64) -> f64 {
        // 1/p + kappa - 1 rewritten as a sum of nonnegative terms; the naive
        // form cancels catastrophically near p_+ when beta is small
        (self.p_plus - p) / (p * self.p_plus) + self.beta_over_d
    }

    /// `q(p)` on the closed interval `[p_-, p_+]`, returning `+inf` where
    /// `1/q` vanishes.
    pub fn q_of_p(&self, p: f64) -> f64 {
        let iq = self.inv_q(p);
        if iq <= 0.0 {
            f64::INFINITY
        } else {
            1.0 / iq
        }
    }

    pub fn contains(&self, p: f64) -> bool {
        p > self.p_minus && p < self.p_plus
    }

    pub fn width(&self) -> f64 {
        self.p_plus - self.p_minus
    }

    /// `((p - p_-)(p_+ - p))^kappa`, the factor compensating the blow-up.
    pub fn compensator(&self, p: f64) -> f64 {
        ((p - self.p_minus) * (self.p_plus - p)).powf(self.kappa)
    }
}

/// A point `(p, q)` on the conjugate line together with the dual index
/// `q' = q / (q - 1)` of the bilinear form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GPoint {
    pub p: f64,
    pub q: f64,
    pub q_dual: f64,
}

pub fn conjugate_q(chart: &ExponentChart, p: f64) -> Result<GPoint> {
    if !(p.is_finite() && chart.contains(p)) {
        return Err(RieszError::OutOfRange { p, p_minus: chart.p_minus, p_plus: chart.p_plus });
    }
    let q = 1.0 / chart.inv_q(p);
    Ok(GPoint { p, q, q_dual: q / (q - 1.0) })
}

/// Whether `(p, q)` lies on the conjugate line (relative tolerance
/// [`LINE_TOL`]) with `p` strictly inside `(p_-, p_+)`.
pub fn in_g(params: &RieszParams, p: f64, q: f64) -> bool {
    let chart = exponent_chart(params);
    if !chart.contains(p) || !(q > 1.0) {
        return false;
    }
    let lhs = 1.0 + 1.0 / q;
    let rhs = 1.0 / p + chart.kappa;
    (lhs - rhs).abs() <= LINE_TOL * lhs.abs().max(rhs.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn config_a() -> RieszParams {
        validate_params(2, 0.3, 0.2, 0.8).unwrap()
    }

    fn classical() -> RieszParams {
        validate_params(1, 0.0, 0.0, 0.5).unwrap()
    }

    #[test]
    fn validation_examples() {
        assert!(validate_params(2, 0.3, 0.2, 0.8).is_ok());
        assert!(validate_params(1, 0.0, 0.0, 0.5).is_ok());
        assert!(matches!(
            validate_params(1, 0.4, 0.3, 0.3),
            Err(RieszError::Subcriticality { .. })
        ));
        assert!(matches!(validate_params(0, 0.1, 0.1, 0.1), Err(RieszError::Dimension(0))));
        assert!(matches!(validate_params(3, -0.1, 0.1, 0.1), Err(RieszError::Sign(_))));
        assert!(matches!(validate_params(3, 0.1, -0.1, 0.1), Err(RieszError::Sign(_))));
        assert!(matches!(validate_params(3, 0.1, 0.1, 0.0), Err(RieszError::Sign(_))));
        assert!(matches!(validate_params(3, f64::NAN, 0.1, 0.1), Err(RieszError::Sign(_))));
    }

    #[test]
    fn chart_config_a() {
        let c = exponent_chart(&config_a());
        assert!((c.p_minus - 2.0 / 1.7).abs() < 1e-15);
        assert!((c.p_minus - 1.176_470_588).abs() < 1e-9);
        assert!((c.p_plus - 2.222_222_222).abs() < 1e-9);
        assert!((c.q_minus - 2.0).abs() < 1e-15);
        assert!((c.q_plus - 10.0).abs() < 1e-14);
        assert!((c.kappa - 0.65).abs() < 1e-15);
    }

    #[test]
    fn chart_classical_has_infinite_q_plus() {
        let c = exponent_chart(&classical());
        assert_eq!(c.p_minus, 1.0);
        assert_eq!(c.p_plus, 2.0);
        assert_eq!(c.q_minus, 2.0);
        assert!(c.q_plus.is_infinite() && c.q_plus > 0.0);
        assert_eq!(c.kappa, 0.5);
        assert!(c.q_of_p(c.p_plus).is_infinite());
    }

    #[test]
    fn conjugate_examples() {
        let g = conjugate_q(&exponent_chart(&classical()), 4.0 / 3.0).unwrap();
        assert!((g.q - 4.0).abs() < 1e-14);
        assert!((g.q_dual - 4.0 / 3.0).abs() < 1e-14);
        let c = exponent_chart(&config_a());
        let g = conjugate_q(&c, 1.5).unwrap();
        assert!((g.q - 3.157_894_737).abs() < 1e-9);
        assert!(matches!(conjugate_q(&c, c.p_minus), Err(RieszError::OutOfRange { .. })));
        assert!(matches!(conjugate_q(&c, c.p_plus), Err(RieszError::OutOfRange { .. })));
        assert!(matches!(conjugate_q(&c, f64::NAN), Err(RieszError::OutOfRange { .. })));
    }

    #[test]
    fn membership_examples() {
        assert!(in_g(&classical(), 4.0 / 3.0, 4.0));
        assert!(!in_g(&classical(), 4.0 / 3.0, 5.0));
        assert!(in_g(&config_a(), 1.5, 60.0 / 19.0));
        assert!(in_g(&config_a(), 1.5, 3.157_894_736_842_105));
        // q from the printed 10-digit value is off the line at 1e-12
        assert!(!in_g(&config_a(), 1.5, 3.16));
        // outside the admissible interval
        assert!(!in_g(&classical(), 2.5, 1.0 / (0.4 + 0.5 - 1.0)));
    }

    #[test]
    fn q_plus_ordering_with_infinity() {
        let c = exponent_chart(&classical());
        let g = conjugate_q(&c, 1.999_999).unwrap();
        assert!(g.q < c.q_plus && g.q > c.q_minus);
    }

    fn any_params() -> impl Strategy<Value = RieszParams> {
        (1usize..=6, 0.0f64..1.0, 0.0f64..1.0, 0.001f64..1.0, 0.0f64..1.0).prop_filter_map(
            "subcritical",
            |(d, a, b, l, zero_beta)| {
                let s = d as f64 * 0.999;
                let (a, b, l) = (a * s / 3.0, if zero_beta < 0.2 { 0.0 } else { b * s / 3.0 }, l * s / 3.0);
                validate_params(d as i64, a, b, l).ok()
            },
        )
    }

    proptest! {
        #[test]
        fn chart_invariants(params in any_params()) {
            let c = exponent_chart(&params);
            prop_assert!(c.kappa > 0.0 && c.kappa < 1.0);
            prop_assert!(c.p_minus >= 1.0 && c.p_minus < c.p_plus);
            let qm = c.q_of_p(c.p_minus);
            prop_assert!((qm - c.q_minus).abs() <= 1e-12 * c.q_minus);
            let qp = c.q_of_p(c.p_plus);
            if c.q_plus.is_infinite() {
                prop_assert!(qp.is_infinite() || qp > 1e12);
            } else {
                prop_assert!((qp - c.q_plus).abs() <= 1e-12 * c.q_plus);
            }
        }

        #[test]
        fn q_strictly_increasing(params in any_params(), u in 0.01f64..0.98, v in 0.001f64..0.01) {
            let c = exponent_chart(&params);
            let p1 = c.p_minus + u * c.width();
            let p2 = p1 + v * c.width();
            let q1 = conjugate_q(&c, p1).unwrap().q;
            let q2 = conjugate_q(&c, p2).unwrap().q;
            prop_assert!(q2 > q1);
            prop_assert!(q1 > c.q_minus && q2 < c.q_plus);
            prop_assert!(in_g(&params, p1, q1));
        }

        #[test]
        fn chart_is_deterministic(params in any_params(), u in 0.01f64..0.99) {
            let c1 = exponent_chart(&params);
            let c2 = exponent_chart(&params);
            prop_assert_eq!(c1, c2);
            let p = c1.p_minus + u * c1.width();
            let a = conjugate_q(&c1, p).unwrap();
            let b = conjugate_q(&c2, p).unwrap();
            prop_assert_eq!(a.q.to_bits(), b.q.to_bits());
        }
    }
}
