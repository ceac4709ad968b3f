//! Circulation distributions `Gamma(xi) = f(xi) sqrt(1 - xi^2)` with `f`
//! expanded in even-order Chebyshev polynomials of the second kind, and the
//! quantities that follow from the expansion: downwash, induced drag and the
//! lift/span relation.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::chebyshev::{pv_cauchy_chebyshev, u_raw, u_with_derivative, DOMAIN_SLACK};
use crate::error::{Error, Result};
use crate::quadrature::{adaptive_integrate, AdaptiveOptions};

/// Largest truncation index accepted by default (`a_0 .. a_32`).
pub const DEFAULT_MAX_MODES: usize = 16;

/// Even-order coefficients `a_0, a_2, ..., a_{2N}` of `f = sum a_{2m} U_{2m}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ModeCoefficients {
    a: Vec<f64>,
}

impl ModeCoefficients {
    /// Coefficients in even-order indexing: `a[m]` multiplies `U_{2m}`.
    pub fn new(a: Vec<f64>) -> Result<Self> {
        Self::with_cap(a, DEFAULT_MAX_MODES)
    }

    /// Like [`ModeCoefficients::new`] with an explicit cap on `N`.
    pub fn with_cap(a: Vec<f64>, max_index: usize) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::InvalidInput("at least a_0 is required".into()));
        }
        if let Some(bad) = a.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite coefficient {bad}")));
        }
        if a.len() - 1 > max_index {
            return Err(Error::InvalidInput(format!(
                "truncation index {} exceeds the cap {max_index}",
                a.len() - 1
            )));
        }
        Ok(Self { a })
    }

    /// Coefficients indexed by polynomial order (`c[n]` multiplies `U_n`).
    /// Odd orders must be zero: only even loadings are represented.
    pub fn from_orders(c: &[f64]) -> Result<Self> {
        if let Some((n, v)) = c.iter().enumerate().find(|(n, v)| n % 2 == 1 && **v != 0.0) {
            return Err(Error::InvalidInput(format!(
                "odd mode U_{n} has coefficient {v}; the loading must be even"
            )));
        }
        Self::new(c.iter().step_by(2).copied().collect())
    }

    pub fn two_mode(a0: f64, a2: f64) -> Result<Self> {
        Self::new(vec![a0, a2])
    }

    pub fn zero(modes: usize) -> Self {
        Self { a: vec![0.0; modes.max(1)] }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.a
    }

    /// Truncation index `N`.
    pub fn truncation(&self) -> usize {
        self.a.len() - 1
    }

    /// Coefficient of `U_{2m}`; zero past the truncation.
    pub fn get(&self, m: usize) -> f64 {
        self.a.get(m).copied().unwrap_or(0.0)
    }

    pub fn a0(&self) -> f64 {
        self.a[0]
    }

    pub fn a2(&self) -> f64 {
        self.get(1)
    }

    pub fn is_zero(&self) -> bool {
        self.a.iter().all(|&v| v == 0.0)
    }

    /// Scale every coefficient by `t`.
    pub fn scaled(&self, t: f64) -> Self {
        Self { a: self.a.iter().map(|v| v * t).collect() }
    }

    /// `||f||_H^2 = (pi/4) sum a_{2m}^2`.
    pub fn h_norm_sq(&self) -> f64 {
        PI / 4.0 * self.a.iter().map(|v| v * v).sum::<f64>()
    }

    /// `f(xi)` without a domain check.
    #[inline]
    pub fn f(&self, xi: f64) -> f64 {
        if self.a.len() == 1 {
            return self.a[0];
        }
        // single recurrence pass, picking up the even orders
        let two_x = 2.0 * xi;
        let (mut prev, mut cur) = (1.0, two_x);
        let mut acc = self.a[0];
        for (m, &am) in self.a.iter().enumerate().skip(1) {
            // advance from U_{2m-1} to U_{2m}
            let next = two_x * cur - prev;
            acc += am * next;
            if m + 1 < self.a.len() {
                let after = two_x * next - cur;
                prev = next;
                cur = after;
            }
        }
        acc
    }

    /// `f'(xi)`, finite on the closed interval.
    pub fn f_prime(&self, xi: f64) -> f64 {
        self.a
            .iter()
            .enumerate()
            .map(|(m, &am)| am * u_with_derivative(2 * m, xi).1)
            .sum()
    }

    /// `Gamma(xi) = f(xi) sqrt(1 - xi^2)`, clamped to zero at the tips.
    #[inline]
    pub fn gamma_raw(&self, xi: f64) -> f64 {
        let s = 1.0 - xi * xi;
        if s <= 0.0 {
            0.0
        } else {
            self.f(xi) * s.sqrt()
        }
    }
}

impl TryFrom<Vec<f64>> for ModeCoefficients {
    type Error = Error;

    fn try_from(a: Vec<f64>) -> Result<Self> {
        Self::new(a)
    }
}

impl From<ModeCoefficients> for Vec<f64> {
    fn from(c: ModeCoefficients) -> Self {
        c.a
    }
}

/// Physical constants of a wing. All default to one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WingConfig {
    /// Total lift `A`.
    pub lift: f64,
    /// Moment arm scale `r`.
    pub radius: f64,
    /// Air density.
    pub density: f64,
    /// Freestream speed.
    pub speed: f64,
    /// Weight per unit span needed to carry a unit bending moment.
    pub c_w: f64,
    /// Wing material density.
    pub rho_w: f64,
    /// Span `b`.
    pub span: f64,
    /// Upper bound `b_0` on admissible spans.
    pub span_max: f64,
}

impl Default for WingConfig {
    fn default() -> Self {
        Self {
            lift: 1.0,
            radius: 1.0,
            density: 1.0,
            speed: 1.0,
            c_w: 1.0,
            rho_w: 1.0,
            span: 1.0,
            span_max: 1e6,
        }
    }
}

impl WingConfig {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("lift", self.lift),
            ("radius", self.radius),
            ("density", self.density),
            ("speed", self.speed),
            ("c_w", self.c_w),
            ("rho_w", self.rho_w),
            ("span", self.span),
            ("span_max", self.span_max),
        ];
        for (name, v) in fields {
            if !(v > 0.0) || v.is_nan() {
                return Err(Error::InvalidInput(format!("{name} must be strictly positive, got {v}")));
            }
        }
        if self.span > self.span_max {
            return Err(Error::InvalidInput(format!(
                "span {} exceeds the bound {}",
                self.span, self.span_max
            )));
        }
        Ok(())
    }

    pub fn is_unit(&self) -> bool {
        [self.lift, self.radius, self.density, self.speed, self.c_w, self.rho_w]
            .iter()
            .all(|&v| v == 1.0)
    }
}

/// Prandtl's loading family `Gamma_0 (1 - mu xi^2) sqrt(1 - xi^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrandtlFamily {
    pub gamma0: f64,
    pub mu: f64,
}

impl PrandtlFamily {
    pub fn new(gamma0: f64, mu: f64) -> Self {
        Self { gamma0, mu }
    }

    /// Bending moments stay non-negative only for `mu <= 1`.
    pub fn is_physical(&self) -> bool {
        self.mu <= 1.0
    }
}

/// Uses `xi^2 = (U_2 + U_0) / 4`.
pub fn prandtl_family_coeffs(p: PrandtlFamily) -> ModeCoefficients {
    ModeCoefficients {
        a: vec![p.gamma0 * (1.0 - p.mu / 4.0), -p.gamma0 * p.mu / 4.0],
    }
}

fn check_closed(xi: f64) -> Result<()> {
    if xi.is_nan() || xi.abs() > 1.0 + DOMAIN_SLACK {
        Err(Error::Domain(format!("xi = {xi} lies outside [-1, 1]")))
    } else {
        Ok(())
    }
}

pub fn eval_gamma(c: &ModeCoefficients, xi: f64) -> Result<f64> {
    check_closed(xi)?;
    Ok(c.gamma_raw(xi))
}

/// Downwash from the eigenrelation `w[U_n sqrt(1 - .^2)] = (n + 1)/4 U_n`.
pub fn downwash_spectral(c: &ModeCoefficients, xi: f64) -> Result<f64> {
    check_closed(xi)?;
    Ok(c.a
        .iter()
        .enumerate()
        .map(|(m, &am)| am * (2 * m + 1) as f64 / 4.0 * u_raw(2 * m, xi))
        .sum())
}

/// Downwash `(1/4pi) p.v. int Gamma'(eta) / (xi - eta) deta` by direct
/// principal-value quadrature. Only used to check [`downwash_spectral`].
pub fn downwash_pv_oracle(c: &ModeCoefficients, xi: f64, eps_schedule: &[f64]) -> Result<f64> {
    // Gamma' sqrt(1 - eta^2) = f'(eta)(1 - eta^2) - eta f(eta)
    let numerator = |eta: f64| c.f_prime(eta) * (1.0 - eta * eta) - eta * c.f(eta);
    let pv = pv_cauchy_chebyshev(numerator, xi, eps_schedule, 1e-6)?;
    Ok(pv / (4.0 * PI))
}

/// `D = (pi/8) sum (2m + 1) a_{2m}^2`, independent of the span.
pub fn induced_drag(c: &ModeCoefficients) -> f64 {
    PI / 8.0
        * c.a
            .iter()
            .enumerate()
            .map(|(m, &am)| (2 * m + 1) as f64 * am * am)
            .sum::<f64>()
}

/// Span that carries the configured lift: `b = 4A / (pi rho nu a_0)`.
pub fn span_from_lift(c: &ModeCoefficients, cfg: &WingConfig) -> Result<f64> {
    let a0 = c.a0();
    if !(a0 > 0.0) {
        return Err(Error::Domain(format!("a_0 = {a0} gives an infinite or negative span")));
    }
    Ok(4.0 * cfg.lift / (PI * cfg.density * cfg.speed * a0))
}

/// Inverse of [`span_from_lift`]: the `a_0` that carries the lift at span `b`.
pub fn a0_from_span(b: f64, cfg: &WingConfig) -> Result<f64> {
    if !(b > 0.0) {
        return Err(Error::Domain(format!("span must be positive, got {b}")));
    }
    Ok(4.0 * cfg.lift / (PI * cfg.density * cfg.speed * b))
}

/// Lift `rho nu int Gamma dx = rho nu pi b a_0 / 4` (only `a_0` contributes).
pub fn lift_from_span(c: &ModeCoefficients, b: f64, cfg: &WingConfig) -> f64 {
    cfg.density * cfg.speed * PI * b * c.a0() / 4.0
}

/// Lift by quadrature, `2 (b/2) rho nu int_0^1 Gamma dxi`.
pub fn lift_by_quadrature(c: &ModeCoefficients, b: f64, cfg: &WingConfig) -> Result<f64> {
    // xi = sin(theta) removes the tip singularity
    let integral = adaptive_integrate(
        |theta: f64| {
            let ct = theta.cos();
            c.f(theta.sin()) * ct * ct
        },
        0.0,
        PI / 2.0,
        AdaptiveOptions { abs_tol: 1e-13, ..Default::default() },
    )?;
    Ok(b * cfg.density * cfg.speed * integral)
}

/// Number of uniform samples on `[0, 1]` used by [`gamma_nonneg`].
pub const NONNEG_SAMPLES: usize = 2001;

/// Minimum of `f` over `[0, 1]` (equivalently `[-1, 1]`, `f` is even):
/// a dense uniform scan followed by golden-section refinement around the
/// smallest sample.
pub fn min_f(c: &ModeCoefficients) -> f64 {
    if c.truncation() == 0 {
        return c.a0();
    }
    let n = NONNEG_SAMPLES - 1;
    let (mut best_i, mut best) = (0usize, f64::INFINITY);
    for i in 0..=n {
        let v = c.f(i as f64 / n as f64);
        if v < best {
            best = v;
            best_i = i;
        }
    }
    let h = 1.0 / n as f64;
    let mut lo = (best_i as f64 - 1.0).max(0.0) * h;
    let mut hi = (best_i as f64 + 1.0).min(n as f64) * h;
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let x1 = hi - g * (hi - lo);
        let x2 = lo + g * (hi - lo);
        if c.f(x1) < c.f(x2) {
            hi = x2;
        } else {
            lo = x1;
        }
    }
    best.min(c.f(0.5 * (lo + hi))).min(c.f(0.0)).min(c.f(1.0))
}

/// `Gamma >= 0` on the span, up to `tol`.
pub fn gamma_nonneg(c: &ModeCoefficients, tol: f64) -> bool {
    min_f(c) >= -tol
}
