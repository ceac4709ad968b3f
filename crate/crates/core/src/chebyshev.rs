//! Chebyshev polynomials of the first and second kind.
//!
//! Values come from the three-term recurrences
//! `T_{n+1} = 2x T_n - T_{n-1}` and `U_{n+1} = 2x U_n - U_{n-1}`
//! started from `T_0 = U_0 = 1`, `T_1 = x`, `U_1 = 2x`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature::{adaptive_integrate, AdaptiveOptions, QuadratureRule, RuleKind};

/// Slack allowed on `|x| <= 1` before a domain error is raised.
pub const DOMAIN_SLACK: f64 = 1e-12;

/// Order of a Chebyshev polynomial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ChebOrder(pub usize);

impl From<usize> for ChebOrder {
    fn from(n: usize) -> Self {
        ChebOrder(n)
    }
}

fn check_closed(x: f64) -> Result<()> {
    if x.is_nan() || x.abs() > 1.0 + DOMAIN_SLACK {
        Err(Error::Domain(format!("x = {x} lies outside [-1, 1]")))
    } else {
        Ok(())
    }
}

/// `T_n(x)` without the domain check.
#[inline]
pub fn t_raw(n: usize, x: f64) -> f64 {
    match n {
        0 => 1.0,
        1 => x,
        _ => {
            let (mut prev, mut cur) = (1.0, x);
            for _ in 1..n {
                let next = 2.0 * x * cur - prev;
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

/// `U_n(x)` without the domain check.
#[inline]
pub fn u_raw(n: usize, x: f64) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0 * x,
        _ => {
            let (mut prev, mut cur) = (1.0, 2.0 * x);
            for _ in 1..n {
                let next = 2.0 * x * cur - prev;
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

/// `(U_n(x), U_n'(x))` by differentiating the recurrence; finite at `x = ±1`.
pub fn u_with_derivative(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p, mut dp) = (1.0, 0.0);
    let (mut c, mut dc) = (2.0 * x, 2.0);
    for _ in 1..n {
        let next = 2.0 * x * c - p;
        let dnext = 2.0 * c + 2.0 * x * dc - dp;
        p = c;
        dp = dc;
        c = next;
        dc = dnext;
    }
    (c, dc)
}

pub fn eval_t(n: impl Into<ChebOrder>, x: f64) -> Result<f64> {
    check_closed(x)?;
    Ok(t_raw(n.into().0, x))
}

pub fn eval_u(n: impl Into<ChebOrder>, x: f64) -> Result<f64> {
    check_closed(x)?;
    Ok(u_raw(n.into().0, x))
}

/// `U_n'(x) = (x U_n - (n + 1) T_{n+1}) / (1 - x^2)`, valid on the open interval.
pub fn derivative_u(n: impl Into<ChebOrder>, x: f64) -> Result<f64> {
    let n = n.into().0;
    if x.is_nan() || x.abs() >= 1.0 {
        return Err(Error::Domain(format!(
            "U_n' identity is singular at |x| >= 1 (x = {x})"
        )));
    }
    Ok((x * u_raw(n, x) - (n as f64 + 1.0) * t_raw(n + 1, x)) / (1.0 - x * x))
}

/// Inner product `(f, g) = int_0^1 f g sqrt(1 - xi^2) dxi`.
///
/// With a Chebyshev rule the even extension of `f g` is integrated over
/// `[-1, 1]` and halved, which is exact for even polynomial products up to
/// the rule's degree. Legendre rules work in `xi = sin(theta)`, where the
/// weight becomes `cos^2(theta)` and the integrand is smooth.
pub fn inner_product_h<F, G>(f: F, g: G, rule: &QuadratureRule) -> Result<f64>
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    let value = match rule.kind() {
        RuleKind::GaussChebSecondKind => 0.5 * rule.apply(|x| f(x.abs()) * g(x.abs())),
        RuleKind::GaussLegendre | RuleKind::Adaptive => {
            let integrand = |theta: f64| {
                let xi = theta.sin();
                let c = theta.cos();
                f(xi) * g(xi) * c * c
            };
            rule.integrate(0.0, PI / 2.0, integrand)?
        }
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Quadrature("non-finite integrand in inner product".into()))
    }
}

/// Default exclusion radii for principal-value evaluation.
pub const DEFAULT_PV_SCHEDULE: [f64; 3] = [1e-2, 1e-3, 1e-4];

/// Principal value of `int_{-1}^{1} s(y) / (sqrt(1 - y^2) (x - y)) dy` for a
/// smooth numerator `s`.
///
/// Each exclusion radius `eps` removes `[x - eps, x + eps]`; the two remaining
/// pieces are integrated in `y = -cos(theta)` so the endpoint singularity
/// disappears. The truncation error of a symmetric window is odd in `eps`, so
/// the estimates are extrapolated to `eps = 0` by fitting `c_1 eps + c_3 eps^3 + ...`.
/// `tol` bounds the disagreement between the full extrapolant and the one
/// that drops the widest window.
pub fn pv_cauchy_chebyshev<S: Fn(f64) -> f64>(s: S, x: f64, eps_schedule: &[f64], tol: f64) -> Result<f64> {
    if !(x.abs() < 1.0) {
        return Err(Error::Domain(format!("pole x = {x} must lie in (-1, 1)")));
    }
    if eps_schedule.len() < 2 {
        return Err(Error::InvalidInput("need at least two exclusion radii".into()));
    }
    if eps_schedule.windows(2).any(|w| !(w[1] < w[0])) || eps_schedule.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::InvalidInput("exclusion radii must be positive and decreasing".into()));
    }
    let max_eps = eps_schedule[0];
    if x - max_eps <= -1.0 || x + max_eps >= 1.0 {
        return Err(Error::Domain(format!("exclusion window {max_eps} leaves [-1, 1] at x = {x}")));
    }
    let opts = AdaptiveOptions {
        abs_tol: 1e-12,
        max_depth: 40,
        panel_points: 10,
    };
    let integrand = |theta: f64| {
        let y = -theta.cos();
        s(y) / (x - y)
    };
    let mut samples = Vec::with_capacity(eps_schedule.len());
    for &eps in eps_schedule {
        let th_lo = (-(x - eps)).acos();
        let th_hi = (-(x + eps)).acos();
        // y = -cos(theta) is increasing in theta on [0, pi]
        let left = adaptive_integrate(integrand, 0.0, th_lo, opts)?;
        let right = adaptive_integrate(integrand, th_hi, PI, opts)?;
        samples.push((eps, left + right));
    }
    let full = odd_power_extrapolate(&samples)?;
    let partial = odd_power_extrapolate(&samples[1..])?;
    if (full - partial).abs() > tol {
        return Err(Error::NonConvergence(format!(
            "principal value extrapolants differ by {:e} (tol {tol:e})",
            (full - partial).abs()
        )));
    }
    Ok(full)
}

/// Fit `I(eps) = I0 + sum_j c_j eps^(2j+1)` through the samples and return `I0`.
fn odd_power_extrapolate(samples: &[(f64, f64)]) -> Result<f64> {
    let n = samples.len();
    if n == 1 {
        return Ok(samples[0].1);
    }
    let scale = samples[0].0;
    let mut m = vec![vec![0.0; n + 1]; n];
    for (row, &(eps, val)) in m.iter_mut().zip(samples) {
        let e = eps / scale;
        row[0] = 1.0;
        for j in 1..n {
            row[j] = e.powi(2 * j as i32 - 1);
        }
        row[n] = val;
    }
    let sol = solve_dense(m)?;
    Ok(sol[0])
}

/// Gaussian elimination with partial pivoting on an augmented matrix.
pub(crate) fn solve_dense(mut m: Vec<Vec<f64>>) -> Result<Vec<f64>> {
    let n = m.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            .unwrap();
        if m[pivot][col].abs() < 1e-300 {
            return Err(Error::NonConvergence("singular linear system".into()));
        }
        m.swap(col, pivot);
        for r in (col + 1)..n {
            let factor = m[r][col] / m[col][col];
            for c in col..=n {
                m[r][c] -= factor * m[col][c];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let mut acc = m[r][n];
        for c in (r + 1)..n {
            acc -= m[r][c] * x[c];
        }
        x[r] = acc / m[r][r];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::make_rule;

    #[test]
    fn low_order_values() {
        assert_eq!(eval_t(0, 0.7).unwrap(), 1.0);
        assert_eq!(eval_t(1, 0.7).unwrap(), 0.7);
        assert!((eval_t(3, 0.5).unwrap() + 1.0).abs() < 1e-15);
        assert_eq!(eval_u(0, 0.3).unwrap(), 1.0);
        assert!(eval_u(2, 0.5).unwrap().abs() < 1e-15);
        assert!((eval_u(2, 1.0).unwrap() - 3.0).abs() < 1e-15);
    }

    #[test]
    fn derivative_examples() {
        assert!(derivative_u(0, 0.4).unwrap().abs() < 1e-14);
        assert!((derivative_u(2, 0.5).unwrap() - 4.0).abs() < 1e-13);
        assert!((derivative_u(1, 0.0).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn domain_errors() {
        assert!(eval_t(2, 1.0 + 1e-9).is_err());
        assert!(eval_u(2, -1.5).is_err());
        assert!(eval_u(2, 1.0 + 1e-13).is_ok());
        assert!(derivative_u(2, 1.0).is_err());
        assert!(derivative_u(2, -1.0).is_err());
        assert!(eval_t(1, f64::NAN).is_err());
    }

    #[test]
    fn symbolic_expansion_matches_recurrence() {
        // T_3 = 4x^3 - 3x, U_4 = 16x^4 - 12x^2 + 1
        for i in 0..=20 {
            let x = -1.0 + 0.1 * i as f64;
            assert!((t_raw(3, x) - (4.0 * x * x * x - 3.0 * x)).abs() < 1e-13);
            assert!((u_raw(4, x) - (16.0 * x.powi(4) - 12.0 * x * x + 1.0)).abs() < 1e-13);
        }
    }

    #[test]
    fn trigonometric_form_agrees() {
        for n in 0..20 {
            for i in 1..20 {
                let theta = i as f64 * PI / 20.0;
                let x = theta.cos();
                assert!((t_raw(n, x) - (n as f64 * theta).cos()).abs() < 1e-12);
                let u = ((n as f64 + 1.0) * theta).sin() / theta.sin();
                assert!((u_raw(n, x) - u).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn inner_product_examples() {
        let cheb = make_rule(RuleKind::GaussChebSecondKind, 64).unwrap();
        let leg = make_rule(RuleKind::GaussLegendre, 40).unwrap();
        let u0 = |x: f64| u_raw(0, x);
        let u2 = |x: f64| u_raw(2, x);
        for rule in [&cheb, &leg] {
            assert!((inner_product_h(u0, u0, rule).unwrap() - PI / 4.0).abs() < 1e-13);
            assert!(inner_product_h(u0, u2, rule).unwrap().abs() < 1e-13);
            assert!((inner_product_h(u2, u2, rule).unwrap() - PI / 4.0).abs() < 1e-13);
        }
        let adaptive = make_rule(RuleKind::Adaptive, 10).unwrap();
        assert!((inner_product_h(u2, u2, &adaptive).unwrap() - PI / 4.0).abs() < 1e-10);
    }

    #[test]
    fn four_node_rule_integrates_u2_squared() {
        let r = make_rule(RuleKind::GaussChebSecondKind, 4).unwrap();
        let v = r.apply(|x| u_raw(2, x).powi(2));
        let oracle = adaptive_integrate(
            |x| u_raw(2, x).powi(2) * (1.0 - x * x).max(0.0).sqrt(),
            -1.0,
            1.0,
            AdaptiveOptions::default(),
        )
        .unwrap();
        assert!((v - PI / 2.0).abs() < 1e-14);
        assert!((oracle - PI / 2.0).abs() < 1e-9);
    }

    #[test]
    fn pv_recovers_a_known_hilbert_pair() {
        // p.v. int T_1 / (sqrt(1-y^2)(x-y)) = -pi U_0 = -pi
        let v = pv_cauchy_chebyshev(|y| y, 0.3, &DEFAULT_PV_SCHEDULE, 1e-6).unwrap();
        assert!((v + PI).abs() < 1e-7, "{v}");
    }

    #[test]
    fn pv_rejects_bad_schedules() {
        assert!(pv_cauchy_chebyshev(|y| y, 0.3, &[1e-3, 1e-2], 1e-6).is_err());
        assert!(pv_cauchy_chebyshev(|y| y, 0.3, &[1e-2], 1e-6).is_err());
        assert!(pv_cauchy_chebyshev(|y| y, 1.0, &DEFAULT_PV_SCHEDULE, 1e-6).is_err());
        assert!(pv_cauchy_chebyshev(|y| y, 0.995, &DEFAULT_PV_SCHEDULE, 1e-6).is_err());
    }
}
