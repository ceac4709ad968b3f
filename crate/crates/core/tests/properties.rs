use std::f64::consts::PI;

use proptest::prelude::*;

use liftline_core::chebyshev::u_raw;
use liftline_core::circulation::{
    induced_drag, lift_from_span, prandtl_family_coeffs, span_from_lift, ModeCoefficients, PrandtlFamily, WingConfig,
};
use liftline_core::moments::{
    moment_lift_only, moment_selfweight_closed, moment_selfweight_ode, moment_selfweight_profile,
    total_moment_lift_only, uniform_grid, DEFAULT_ODE_STEP,
};
use liftline_core::optimizer::prandtl_drag_of_mu;

fn coeffs() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, 1..6)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn drag_is_a_positive_quadratic_form(a in coeffs(), t in 0.1f64..10.0) {
        let c = ModeCoefficients::new(a).unwrap();
        let d = induced_drag(&c);
        prop_assert!(d >= 0.0);
        let scaled = induced_drag(&c.scaled(t));
        prop_assert!((scaled - t * t * d).abs() <= 1e-12 * scaled.max(1e-300));
    }

    #[test]
    fn unit_lift_span_round_trips(a0 in 0.01f64..2.0, a2 in -0.5f64..0.5) {
        let c = ModeCoefficients::two_mode(a0, a2).unwrap();
        let cfg = WingConfig::default();
        let b = span_from_lift(&c, &cfg).unwrap();
        prop_assert!((lift_from_span(&c, b, &cfg) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn chebyshev_u_matches_trigonometric_form(n in 0usize..20, theta in 0.01f64..3.13) {
        let want = ((n + 1) as f64 * theta).sin() / theta.sin();
        prop_assert!((u_raw(n, theta.cos()) - want).abs() < 1e-9 * (n + 1) as f64);
    }

    #[test]
    fn moments_are_linear_in_the_loading(
        a in prop::collection::vec(-1.0f64..1.0, 2),
        c in prop::collection::vec(-1.0f64..1.0, 2),
        b in 0.5f64..6.0,
        xi in 0.0f64..1.0,
    ) {
        let sum: Vec<f64> = a.iter().zip(&c).map(|(x, y)| x + y).collect();
        let (ma, mc, ms) = (
            ModeCoefficients::new(a).unwrap(),
            ModeCoefficients::new(c).unwrap(),
            ModeCoefficients::new(sum).unwrap(),
        );
        for f in [moment_lift_only, moment_selfweight_closed] {
            let lhs = f(&ms, b, xi).unwrap();
            let rhs = f(&ma, b, xi).unwrap() + f(&mc, b, xi).unwrap();
            prop_assert!((lhs - rhs).abs() < 1e-11);
        }
    }

    #[test]
    fn self_weight_relieves_the_lift_moment(a0 in 0.05f64..1.0, ratio in -0.3f64..0.3, b in 0.5f64..6.0, xi in 0.0f64..1.0) {
        // Gamma >= 0 and b < 2 pi keep the relief term non-negative
        let c = ModeCoefficients::two_mode(a0, ratio * a0).unwrap();
        let lift = moment_lift_only(&c, b, xi).unwrap();
        let sw = moment_selfweight_closed(&c, b, xi).unwrap();
        prop_assert!(sw <= lift + 1e-13);
        prop_assert!(sw >= -1e-13);
    }

    #[test]
    fn lift_only_total_has_closed_form(a0 in 0.02f64..0.6, s in -1.0f64 / 3.0..1.0) {
        let a2 = s * a0;
        let c = ModeCoefficients::two_mode(a0, a2).unwrap();
        let got = total_moment_lift_only(&c, 4.0 / (PI * a0)).unwrap();
        let want = (a0 + a2) / (2.0 * PI * PI * a0.powi(3));
        prop_assert!((got - want).abs() <= 1e-8 * want);
    }

    #[test]
    fn drag_of_mu_decreases_on_zero_to_two(m1 in 0.0f64..2.0, m2 in 0.0f64..2.0) {
        prop_assume!((m1 - m2).abs() > 1e-6);
        let (lo, hi) = if m1 < m2 { (m1, m2) } else { (m2, m1) };
        prop_assert!(prandtl_drag_of_mu(lo).unwrap() > prandtl_drag_of_mu(hi).unwrap());
    }

    #[test]
    fn prandtl_family_is_gamma0_times_the_shape(g0 in 0.1f64..2.0, mu in -1.0f64..1.0, xi in -1.0f64..1.0) {
        let c = prandtl_family_coeffs(PrandtlFamily::new(g0, mu));
        let want = g0 * (1.0 - mu * xi * xi) * (1.0 - xi * xi).sqrt();
        prop_assert!((c.gamma_raw(xi) - want).abs() < 1e-13);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn ode_and_closed_form_agree(a0 in 0.05f64..0.5, a2 in -0.2f64..0.2, b in 1.0f64..6.0) {
        let c = ModeCoefficients::two_mode(a0, a2).unwrap();
        let grid = uniform_grid(101);
        let closed = moment_selfweight_profile(&c, b, &grid).unwrap();
        let ode = moment_selfweight_ode(&c, b, &grid, DEFAULT_ODE_STEP).unwrap();
        // the ODE is forced by k^2 Gamma, so its RK4 error scales with it
        let scale = (1.0 + 0.25 * b * b) * (a0.abs() + a2.abs());
        prop_assert!(closed.sup_deviation(&ode).unwrap() < 1e-7 * scale);
        prop_assert!(closed.terminal_value().abs() < 1e-12);
    }
}
