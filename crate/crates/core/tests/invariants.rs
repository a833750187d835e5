use proptest::prelude::*;
use riesz_core::exponents::{conjugate_q, exponent_chart, in_g, validate_params, RieszParams};
use riesz_core::kernel::{angular_kernel, AngularKernelConfig};
use riesz_core::operator::{apply, bilinear, potential_at, riesz_ratio, QuadratureConfig};
use riesz_core::profile::{make_h, PowerLogPiece, RadialProfile};

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// Valid parameters with every exponent a comfortable distance from the
/// boundary of the admissible region.
fn params(max_d: i64) -> impl Strategy<Value = RieszParams> {
    (1..=max_d, 0.05..0.9f64, 0.0..0.9f64, 0.0..0.9f64).prop_map(|(d, fl, fa, fb)| {
        let df = d as f64;
        let lambda = fl * df;
        let alpha = fa * (df - lambda) * 0.9;
        let beta = fb * (df - lambda - alpha) * 0.9;
        validate_params(d, alpha, beta, lambda).unwrap()
    })
}

/// A nonnegative profile of one to three power pieces on disjoint bounded
/// shells inside `[0.05, 40]`.
fn bounded_profile() -> impl Strategy<Value = RadialProfile> {
    prop::collection::vec((0.2..3.0f64, -2.0..2.0f64, 0.05..0.95f64), 1..=3).prop_map(|raw| {
        let n = raw.len() as f64;
        let pieces = raw
            .iter()
            .enumerate()
            .map(|(i, &(c, pw, frac))| {
                // slot i of n equal log-width slots on [0.05, 40]
                let span = (40f64 / 0.05).ln() / n;
                let lo = 0.05 * (span * i as f64).exp();
                let hi = lo * (span * frac.max(0.1)).exp();
                PowerLogPiece::power_law(c, pw, lo, hi)
            })
            .collect();
        RadialProfile::new("random", pieces).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn chart_endpoints_map_to_q_endpoints(params in params(6)) {
        let c = exponent_chart(&params);
        prop_assert!(c.kappa > 0.0 && c.kappa < 1.0);
        prop_assert!(c.p_minus >= 1.0 && c.p_minus < c.p_plus);
        prop_assert!(rel(c.q_of_p(c.p_minus), c.q_minus) <= 1e-12);
        if c.q_plus.is_finite() {
            prop_assert!(rel(c.q_of_p(c.p_plus), c.q_plus) <= 1e-12);
        } else {
            prop_assert!(c.q_of_p(c.p_plus).is_infinite());
        }
    }

    #[test]
    fn interior_points_lie_on_the_line(params in params(6), s in 0.01..0.99f64) {
        let c = exponent_chart(&params);
        let p = c.p_minus + s * c.width();
        let g = conjugate_q(&c, p).unwrap();
        prop_assert!(g.q >= p);
        prop_assert!(in_g(&params, p, g.q));
        prop_assert!(!in_g(&params, p, 1.1 * g.q));
        prop_assert!(rel(1.0 / g.q + 1.0 / g.q_dual, 1.0) < 1e-12);
    }

    #[test]
    fn kernel_is_symmetric_and_homogeneous(
        d in 1usize..=4, fl in 0.05..0.95f64, r in 0.01..100.0f64, s in 0.01..100.0f64, t in 0.01..100.0f64,
    ) {
        let lambda = fl * d as f64;
        prop_assume!(rel(r, s) > 1e-6);
        let cfg = AngularKernelConfig::default();
        let a = angular_kernel(d, lambda, r, s, &cfg).unwrap();
        let b = angular_kernel(d, lambda, s, r, &cfg).unwrap();
        let scaled = angular_kernel(d, lambda, t * r, t * s, &cfg).unwrap();
        prop_assert!(a > 0.0);
        prop_assert!(rel(a, b) <= 1e-10);
        prop_assert!(rel(scaled, t.powf(-lambda) * a) <= 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn potential_is_positive_and_linear(params in params(3), f in bounded_profile(), c in 0.1..10.0f64, r in 0.01..100.0f64) {
        let cfg = QuadratureConfig::default();
        let u = potential_at(&params, &f, r, &cfg).unwrap();
        let uc = potential_at(&params, &f.scaled(c), r, &cfg).unwrap();
        prop_assert!(u > 0.0);
        prop_assert!(rel(uc, c * u) < 1e-12);
    }

    #[test]
    fn potential_decreases_monotonically_past_the_support(params in params(3), f in bounded_profile()) {
        let cfg = QuadratureConfig::default();
        let far: Vec<f64> = [50.0, 100.0, 1e3, 1e4]
            .iter()
            .map(|&r| potential_at(&params, &f, r, &cfg).unwrap())
            .collect();
        for w in far.windows(2) {
            prop_assert!(w[1] < w[0]);
        }
    }

    #[test]
    fn bilinear_form_is_adjoint_symmetric(params in params(3), f in bounded_profile(), g in bounded_profile()) {
        let cfg = QuadratureConfig::default();
        let b = bilinear(&params, &f, &g, &cfg).unwrap();
        let swapped = bilinear(&params.adjoint(), &g, &f, &cfg).unwrap();
        prop_assert!(b > 0.0);
        prop_assert!(rel(b, swapped) <= 1e-6, "{} vs {}", b, swapped);
    }

    #[test]
    fn ratio_on_the_line_ignores_dilation(params in params(3), s in 0.1..0.9f64, t in 0.05..20.0f64) {
        let cfg = QuadratureConfig::default();
        let c = exponent_chart(&params);
        let p = c.p_minus + s * c.width();
        let h = make_h(&params);
        let a = riesz_ratio(&params, &h, p, &cfg).unwrap();
        let b = riesz_ratio(&params, &h.dilated(t).unwrap(), p, &cfg).unwrap();
        prop_assert!(rel(a.ratio, b.ratio) <= 1e-3, "{} vs {}", a.ratio, b.ratio);
    }

    #[test]
    fn sampled_potential_agrees_with_pointwise_evaluation(params in params(3), f in bounded_profile(), k in 0usize..700) {
        let cfg = QuadratureConfig::default();
        let u = apply(&params, &f, &cfg).unwrap();
        let i = k * (u.radii.len() - 1) / 700;
        let direct = potential_at(&params, &f, u.radii[i], &cfg).unwrap();
        prop_assert!(rel(u.values[i], direct) < 1e-7, "r={}: {} vs {}", u.radii[i], u.values[i], direct);
    }
}
