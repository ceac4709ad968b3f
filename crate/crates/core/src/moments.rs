//! Bending moments and the constraints built from them.
//!
//! Everything here works on the half span `xi in [0, 1]` with unit physical
//! constants. Writing `k = b/2`, the lift-only moment is
//!
//! ```text
//! M_L(xi) = k^2 int_xi^1 Gamma(eta) (eta - xi) deta
//! ```
//!
//! and the self-weight moment solves `M = k^2 int_xi^1 (Gamma - M)(eta - xi)`,
//! whose solution is `M(xi) = k int_xi^1 Gamma(eta) sin(k (eta - xi)) deta`,
//! equivalently the terminal-value problem `M'' + k^2 M = k^2 Gamma`,
//! `M(1) = M'(1) = 0`.
//!
//! Integrals of `Gamma` are taken in `eta = cos(phi)`, which turns the
//! square-root tip singularity into a smooth integrand.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::circulation::{min_f, ModeCoefficients};
use crate::error::{Error, Result};
use crate::quadrature::{adaptive_integrate, gauss_legendre, AdaptiveOptions};

/// Absolute tolerance for the weight and non-collapse tests.
pub const CONSTRAINT_TOL: f64 = 1e-9;

/// Points of the uniform scan that brackets sign changes of `M`.
pub const SCAN_POINTS: usize = 4001;

/// Self-weight kernels change sign inside the wing for `b >= 2 pi`.
pub const VALIDATED_SPAN_LIMIT: f64 = 2.0 * PI;

/// Default RK4 step for [`moment_selfweight_ode`].
pub const DEFAULT_ODE_STEP: f64 = 1e-4;

const POINTWISE_OPTS: AdaptiveOptions = AdaptiveOptions {
    abs_tol: 1e-13,
    max_depth: 40,
    panel_points: 10,
};

/// Bending-moment model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MomentModel {
    /// Moment of the outboard lift only.
    LiftOnly,
    /// Lift moment relieved by the wing's own weight.
    SelfWeight,
}

impl MomentModel {
    /// Kernel `K(t)` with `M(xi) = int_xi^1 Gamma(eta) K(eta - xi) deta`.
    #[inline]
    fn kernel(self, k: f64, t: f64) -> f64 {
        match self {
            MomentModel::LiftOnly => k * k * t,
            MomentModel::SelfWeight => k * (k * t).sin(),
        }
    }

    /// `int_0^t K`, used to integrate `M` exactly over a segment.
    #[inline]
    fn kernel_primitive(self, k: f64, t: f64) -> f64 {
        match self {
            MomentModel::LiftOnly => 0.5 * k * k * t * t,
            MomentModel::SelfWeight => {
                // 1 - cos(kt) without cancellation
                let s = (0.5 * k * t).sin();
                2.0 * s * s
            }
        }
    }
}

/// How a sampled moment was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MomentMethod {
    LiftOnly,
    ClosedForm,
    Ode,
    VolterraOracle,
}

impl MomentMethod {
    pub const ALL: [MomentMethod; 4] = [
        MomentMethod::LiftOnly,
        MomentMethod::ClosedForm,
        MomentMethod::Ode,
        MomentMethod::VolterraOracle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MomentMethod::LiftOnly => "lift-only",
            MomentMethod::ClosedForm => "closed-form",
            MomentMethod::Ode => "ode",
            MomentMethod::VolterraOracle => "volterra-oracle",
        }
    }
}

impl fmt::Display for MomentMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MomentMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MomentMethod::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown moment method `{s}`")))
    }
}

/// Which closed expression is used for the self-weight weight constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightForm {
    /// `b int_0^1 |M| dxi` with `M` from the sine-kernel solution.
    Direct,
    /// `(b^2/4) int_0^1 Gamma (1 - cos(b xi / 2)) dxi`, the reduced form with
    /// the `b^2/4` prefactor.
    Reduced,
}

impl FromStr for WeightForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(WeightForm::Direct),
            "reduced" => Ok(WeightForm::Reduced),
            other => Err(Error::InvalidInput(format!("unknown weight form `{other}`"))),
        }
    }
}

fn check_span(b: f64) -> Result<()> {
    if b > 0.0 && b.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("span must be positive and finite, got {b}")))
    }
}

fn check_station(xi: f64) -> Result<()> {
    if (0.0..=1.0).contains(&xi) {
        Ok(())
    } else {
        Err(Error::Domain(format!("station xi = {xi} outside [0, 1]")))
    }
}

/// `int_xi^1 Gamma(eta) g(eta) deta` by adaptive quadrature in `eta = cos(phi)`.
fn gamma_integral_adaptive<G: Fn(f64) -> f64>(c: &ModeCoefficients, xi: f64, g: G) -> Result<f64> {
    if xi >= 1.0 {
        return Ok(0.0);
    }
    let top = xi.max(-1.0).acos();
    adaptive_integrate(
        |phi: f64| {
            let (s, eta) = phi.sin_cos();
            c.f(eta) * s * s * g(eta)
        },
        0.0,
        top,
        POINTWISE_OPTS,
    )
}

/// Lift-only moment at station `xi` (adaptive quadrature).
pub fn moment_lift_only(c: &ModeCoefficients, b: f64, xi: f64) -> Result<f64> {
    check_span(b)?;
    check_station(xi)?;
    let k = 0.5 * b;
    Ok(k * k * gamma_integral_adaptive(c, xi, |eta| eta - xi)?)
}

/// Self-weight moment at station `xi` from the sine-kernel solution
/// (adaptive quadrature).
pub fn moment_selfweight_closed(c: &ModeCoefficients, b: f64, xi: f64) -> Result<f64> {
    check_span(b)?;
    check_station(xi)?;
    let k = 0.5 * b;
    Ok(k * gamma_integral_adaptive(c, xi, |eta| (k * (eta - xi)).sin())?)
}

/// Fixed Gauss–Legendre machinery for the integrals of `Gamma` against the
/// moment kernels. Panels in `phi` are sized to the oscillation of the
/// integrand so the rule stays exact to roundoff for spans up to `O(10^3)`.
#[derive(Debug, Clone)]
pub struct MomentQuadrature {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    /// Largest phase change allowed across one panel.
    max_phase: f64,
}

impl Default for MomentQuadrature {
    fn default() -> Self {
        Self::new(8, 1.0)
    }
}

impl MomentQuadrature {
    pub fn new(points: usize, max_phase: f64) -> Self {
        let (nodes, weights) = gauss_legendre(points);
        Self { nodes, weights, max_phase }
    }

    fn frequency(c: &ModeCoefficients, k: f64) -> f64 {
        k + 2.0 * c.truncation() as f64 + 2.0
    }

    /// `int_{phi_lo}^{phi_hi} f(cos phi) sin^2(phi) g(cos phi) dphi`.
    fn phi_integral<G: Fn(f64) -> f64>(
        &self,
        c: &ModeCoefficients,
        omega: f64,
        phi_lo: f64,
        phi_hi: f64,
        g: &G,
    ) -> f64 {
        let width = phi_hi - phi_lo;
        if width <= 0.0 {
            return 0.0;
        }
        let panels = ((width * omega) / self.max_phase).ceil().max(1.0) as usize;
        let h = width / panels as f64;
        let mut acc = 0.0;
        for p in 0..panels {
            let lo = phi_lo + p as f64 * h;
            let mid = lo + 0.5 * h;
            let half = 0.5 * h;
            let mut s = 0.0;
            for (&t, &w) in self.nodes.iter().zip(&self.weights) {
                let (sn, eta) = (mid + half * t).sin_cos();
                s += w * c.f(eta) * sn * sn * g(eta);
            }
            acc += half * s;
        }
        acc
    }

    /// `int_lo^hi Gamma(eta) g(eta) deta` for `0 <= lo <= hi <= 1`.
    fn gamma_integral<G: Fn(f64) -> f64>(&self, c: &ModeCoefficients, k: f64, lo: f64, hi: f64, g: &G) -> f64 {
        let omega = Self::frequency(c, k);
        self.phi_integral(c, omega, hi.min(1.0).acos(), lo.max(-1.0).acos(), g)
    }

    /// `M(xi)` for the given model.
    pub fn moment(&self, c: &ModeCoefficients, model: MomentModel, b: f64, xi: f64) -> f64 {
        let k = 0.5 * b;
        self.gamma_integral(c, k, xi, 1.0, &|eta| model.kernel(k, eta - xi))
    }

    /// `int_lo^hi M(xi) dxi`, exact up to quadrature error: swapping the order
    /// of integration leaves smooth integrands even when `M` has kinks.
    pub fn moment_segment_integral(&self, c: &ModeCoefficients, model: MomentModel, b: f64, lo: f64, hi: f64) -> f64 {
        let k = 0.5 * b;
        let inner = self.gamma_integral(c, k, lo, hi, &|eta| model.kernel_primitive(k, eta - lo));
        let outer = self.gamma_integral(c, k, hi, 1.0, &|eta| {
            model.kernel_primitive(k, eta - lo) - model.kernel_primitive(k, eta - hi)
        });
        inner + outer
    }

    /// Moments of both models on an increasing grid ending at `xi = 1`, by
    /// cumulative integration from the tip.
    pub fn profile_pair(&self, c: &ModeCoefficients, b: f64, grid: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let k = 0.5 * b;
        let omega = Self::frequency(c, k);
        let n = grid.len();
        let mut lift = vec![0.0; n];
        let mut weight = vec![0.0; n];
        // running int_xi^1 Gamma * {1, eta, sin(k eta), cos(k eta)}
        let (mut p0, mut p1, mut ps, mut pc) = (0.0, 0.0, 0.0, 0.0);
        let mut hi_phi = grid[n - 1].min(1.0).acos();
        if grid[n - 1] < 1.0 {
            let (a, b1, s, cc) = self.moments4(c, k, omega, 0.0, hi_phi);
            p0 += a;
            p1 += b1;
            ps += s;
            pc += cc;
        }
        for i in (0..n).rev() {
            let xi = grid[i];
            if i + 1 < n {
                let lo_phi = hi_phi;
                hi_phi = xi.max(-1.0).acos();
                let (a, b1, s, cc) = self.moments4(c, k, omega, lo_phi, hi_phi);
                p0 += a;
                p1 += b1;
                ps += s;
                pc += cc;
            }
            lift[i] = k * k * (p1 - xi * p0);
            let (skx, ckx) = (k * xi).sin_cos();
            weight[i] = k * (ckx * ps - skx * pc);
        }
        (lift, weight)
    }

    fn moments4(&self, c: &ModeCoefficients, k: f64, omega: f64, phi_lo: f64, phi_hi: f64) -> (f64, f64, f64, f64) {
        let width = phi_hi - phi_lo;
        if width <= 0.0 {
            return (0.0, 0.0, 0.0, 0.0);
        }
        let panels = ((width * omega) / self.max_phase).ceil().max(1.0) as usize;
        let h = width / panels as f64;
        let (mut a, mut b1, mut s, mut cc) = (0.0, 0.0, 0.0, 0.0);
        for p in 0..panels {
            let mid = phi_lo + (p as f64 + 0.5) * h;
            let half = 0.5 * h;
            for (&t, &w) in self.nodes.iter().zip(&self.weights) {
                let (sn, eta) = (mid + half * t).sin_cos();
                let g = half * w * c.f(eta) * sn * sn;
                let (sk, ck) = (k * eta).sin_cos();
                a += g;
                b1 += g * eta;
                s += g * sk;
                cc += g * ck;
            }
        }
        (a, b1, s, cc)
    }

    /// `int_0^1 |M| dxi`: sign changes are bracketed on the sampled `values`
    /// (taken on `grid`), refined by bisection to `1e-12`, and each
    /// sign-definite piece is integrated exactly.
    pub fn abs_integral(
        &self,
        c: &ModeCoefficients,
        model: MomentModel,
        b: f64,
        grid: &[f64],
        values: &[f64],
    ) -> f64 {
        let mut cuts = vec![0.0];
        for i in 0..values.len().saturating_sub(1) {
            let (va, vb) = (values[i], values[i + 1]);
            if va == 0.0 || vb == 0.0 || va.signum() == vb.signum() {
                continue;
            }
            let (mut lo, mut hi) = (grid[i], grid[i + 1]);
            let mut flo = va;
            while hi - lo > 1e-12 {
                let mid = 0.5 * (lo + hi);
                let fm = self.moment(c, model, b, mid);
                if fm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if fm.signum() == flo.signum() {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            cuts.push(0.5 * (lo + hi));
        }
        cuts.push(1.0);
        cuts.windows(2)
            .map(|w| self.moment_segment_integral(c, model, b, w[0], w[1]).abs())
            .sum()
    }
}

/// Uniform grid of `n` points on `[0, 1]`.
pub fn uniform_grid(n: usize) -> Vec<f64> {
    let n = n.max(2);
    (0..n).map(|i| if i == n - 1 { 1.0 } else { i as f64 / (n - 1) as f64 }).collect()
}

/// Uniform grid with extra stations `1 - 10^-j` near the tip so one-sided
/// slopes at `xi = 1` resolve the `(1 - xi)^{5/2}` behaviour of `M`.
pub fn tip_refined_grid(n: usize) -> Vec<f64> {
    let mut g = uniform_grid(n);
    let last_gap = 1.0 - g[g.len() - 2];
    let mut extra: Vec<f64> = (1..=8)
        .map(|j| 1.0 - 10f64.powi(-j))
        .filter(|&x| 1.0 - x < last_gap)
        .collect();
    g.pop();
    g.append(&mut extra);
    g.push(1.0);
    g
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 2 {
        return Err(Error::InvalidInput("a profile grid needs at least two points".into()));
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidInput("profile grid must be strictly increasing".into()));
    }
    if grid[0] < 0.0 || grid[grid.len() - 1] > 1.0 {
        return Err(Error::InvalidInput("profile grid must lie in [0, 1]".into()));
    }
    Ok(())
}

/// A bending moment sampled on `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentProfile {
    xi: Vec<f64>,
    values: Vec<f64>,
    method: MomentMethod,
    span_b: f64,
}

impl MomentProfile {
    pub fn new(xi: Vec<f64>, values: Vec<f64>, method: MomentMethod, span_b: f64) -> Result<Self> {
        check_grid(&xi)?;
        if xi.len() != values.len() {
            return Err(Error::InvalidInput(format!(
                "grid has {} points but {} values",
                xi.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Integration("non-finite moment value".into()));
        }
        Ok(Self { xi, values, method, span_b })
    }

    pub fn xi(&self) -> &[f64] {
        &self.xi
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn method(&self) -> MomentMethod {
        self.method
    }

    pub fn span_b(&self) -> f64 {
        self.span_b
    }

    pub fn len(&self) -> usize {
        self.xi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi.is_empty()
    }

    /// `M` at the last grid point (the tip when the grid ends at 1).
    pub fn terminal_value(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// One-sided difference over the last grid interval.
    pub fn terminal_slope(&self) -> f64 {
        let n = self.xi.len();
        (self.values[n - 1] - self.values[n - 2]) / (self.xi[n - 1] - self.xi[n - 2])
    }

    /// `max |M_self - M_other|`; the grids must coincide.
    pub fn sup_deviation(&self, other: &MomentProfile) -> Result<f64> {
        if self.xi.len() != other.xi.len() || self.xi.iter().zip(&other.xi).any(|(a, b)| (a - b).abs() > 1e-14) {
            return Err(Error::InvalidInput("profiles are sampled on different grids".into()));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// Linear interpolation of the profile at `xi`.
    pub fn interpolate(&self, xi: f64) -> f64 {
        let n = self.xi.len();
        if xi <= self.xi[0] {
            return self.values[0];
        }
        if xi >= self.xi[n - 1] {
            return self.values[n - 1];
        }
        let j = self.xi.partition_point(|&x| x <= xi);
        let (x0, x1) = (self.xi[j - 1], self.xi[j]);
        let t = (xi - x0) / (x1 - x0);
        self.values[j - 1] * (1.0 - t) + self.values[j] * t
    }
}

/// Lift-only profile on `grid`.
pub fn moment_lift_only_profile(c: &ModeCoefficients, b: f64, grid: &[f64]) -> Result<MomentProfile> {
    check_span(b)?;
    check_grid(grid)?;
    let (lift, _) = MomentQuadrature::default().profile_pair(c, b, grid);
    MomentProfile::new(grid.to_vec(), lift, MomentMethod::LiftOnly, b)
}

/// Self-weight profile on `grid` from the sine-kernel solution.
pub fn moment_selfweight_profile(c: &ModeCoefficients, b: f64, grid: &[f64]) -> Result<MomentProfile> {
    check_span(b)?;
    check_grid(grid)?;
    let (_, weight) = MomentQuadrature::default().profile_pair(c, b, grid);
    MomentProfile::new(grid.to_vec(), weight, MomentMethod::ClosedForm, b)
}

/// Total lift-only moment `(b^3/4) int_0^1 |int_xi^1 Gamma (eta - xi)| dxi`.
pub fn total_moment_lift_only(c: &ModeCoefficients, b: f64) -> Result<f64> {
    check_span(b)?;
    let q = MomentQuadrature::default();
    let grid = uniform_grid(SCAN_POINTS);
    let (lift, _) = q.profile_pair(c, b, &grid);
    finite(b * q.abs_integral(c, MomentModel::LiftOnly, b, &grid, &lift))
}

/// Total lift-only moment from `(a_0 + a_2)/(2 pi^2 a_0^3)`-type closed form,
/// valid when `M >= 0`: `(b^3/16) int_{-1}^1 Gamma xi^2 = (b^3 pi / 128)(a_0 + a_2)`.
pub fn total_moment_lift_only_nonneg(c: &ModeCoefficients, b: f64) -> f64 {
    b.powi(3) * PI / 128.0 * (c.a0() + c.a2())
}

/// Weight constraint of the self-weight model, `b int_0^1 |M| dxi`, by direct
/// quadrature of the sine-kernel moment.
pub fn weight_constraint_improved(c: &ModeCoefficients, b: f64) -> Result<f64> {
    check_span(b)?;
    let q = MomentQuadrature::default();
    let grid = uniform_grid(SCAN_POINTS);
    let (_, weight) = q.profile_pair(c, b, &grid);
    finite(b * q.abs_integral(c, MomentModel::SelfWeight, b, &grid, &weight))
}

/// `b int_0^1 Gamma (1 - cos(b xi/2)) dxi`: the order-swapped form of
/// `b int M`, equal to [`weight_constraint_improved`] whenever `M >= 0`.
pub fn weight_constraint_swapped(c: &ModeCoefficients, b: f64) -> Result<f64> {
    check_span(b)?;
    let q = MomentQuadrature::default();
    let k = 0.5 * b;
    finite(b * q.gamma_integral(c, k, 0.0, 1.0, &|eta| MomentModel::SelfWeight.kernel_primitive(k, eta)))
}

/// `(b^2/4) int_0^1 Gamma (1 - cos(b xi/2)) dxi`, the reduced weight form with
/// a `b^2/4` prefactor. Differs from [`weight_constraint_swapped`] by `b/4`.
pub fn weight_constraint_reduced(c: &ModeCoefficients, b: f64) -> Result<f64> {
    Ok(weight_constraint_swapped(c, b)? * b / 4.0)
}

fn finite(v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Quadrature("non-finite constraint value".into()))
    }
}

/// Backward RK4 for `M'' + k^2 M = k^2 Gamma(xi) - load(xi)`, `M(1) = M'(1) = 0`.
fn integrate_terminal_ode<L: Fn(f64) -> f64>(
    c: &ModeCoefficients,
    b: f64,
    grid: &[f64],
    step: f64,
    load: L,
) -> Result<Vec<f64>> {
    if !(step > 1e-12) || !step.is_finite() {
        return Err(Error::Integration(format!("step size {step} underflows")));
    }
    let k2 = 0.25 * b * b;
    let rhs = |xi: f64, m: f64| k2 * (c.gamma_raw(xi) - m) - load(xi);
    let n = grid.len();
    let mut out = vec![0.0; n];
    let (mut x, mut m, mut dm) = (1.0f64, 0.0f64, 0.0f64);
    for i in (0..n).rev() {
        let target = grid[i];
        let gap = x - target;
        if gap > 0.0 {
            let steps = (gap / step).ceil().max(1.0) as usize;
            let h = -gap / steps as f64;
            for s in 0..steps {
                let x0 = x;
                let k1m = dm;
                let k1d = rhs(x0, m);
                let k2m = dm + 0.5 * h * k1d;
                let k2d = rhs(x0 + 0.5 * h, m + 0.5 * h * k1m);
                let k3m = dm + 0.5 * h * k2d;
                let k3d = rhs(x0 + 0.5 * h, m + 0.5 * h * k2m);
                let k4m = dm + h * k3d;
                let k4d = rhs(x0 + h, m + h * k3m);
                m += h / 6.0 * (k1m + 2.0 * k2m + 2.0 * k3m + k4m);
                dm += h / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d);
                x = if s + 1 == steps { target } else { x0 + h };
            }
            if !(m.is_finite() && dm.is_finite()) {
                return Err(Error::Integration(format!("non-finite state at xi = {x}")));
            }
        }
        out[i] = m;
    }
    Ok(out)
}

/// Self-weight moment by backward RK4 integration of the terminal-value
/// problem with fixed step `step` (see [`DEFAULT_ODE_STEP`]).
pub fn moment_selfweight_ode(c: &ModeCoefficients, b: f64, grid: &[f64], step: f64) -> Result<MomentProfile> {
    check_span(b)?;
    check_grid(grid)?;
    let values = integrate_terminal_ode(c, b, grid, step, |_| 0.0)?;
    MomentProfile::new(grid.to_vec(), values, MomentMethod::Ode, b)
}

/// Self-weight moment from the implicit Volterra equation on an `n`-point
/// uniform grid, solved by explicit backward substitution.
///
/// The lift part `k^2 int Gamma (eta - xi)` is integrated accurately and only
/// the unknown's integral `k^2 int M (eta - xi)` is discretised with the
/// trapezoidal rule; the kernel vanishes on the diagonal, so each step is
/// explicit. The error is `O(n^-2)`.
pub fn moment_volterra_oracle(c: &ModeCoefficients, b: f64, n: usize) -> Result<MomentProfile> {
    check_span(b)?;
    if n < 100 {
        return Err(Error::InvalidInput(format!("Volterra oracle needs n >= 100, got {n}")));
    }
    let grid = uniform_grid(n);
    let h = 1.0 / (n - 1) as f64;
    let k2 = 0.25 * b * b;
    let (lift, _) = MomentQuadrature::default().profile_pair(c, b, &grid);
    let mut m = vec![0.0; n];
    // trapezoid sums over j > i of w_j M_j and w_j M_j xi_j
    let (mut s0, mut s1) = (0.0, 0.0);
    for i in (0..n - 1).rev() {
        let j = i + 1;
        let w = if j == n - 1 { 0.5 * h } else { h };
        s0 += w * m[j];
        s1 += w * m[j] * grid[j];
        m[i] = lift[i] - k2 * (s1 - grid[i] * s0);
    }
    MomentProfile::new(grid, m, MomentMethod::VolterraOracle, b)
}

/// Placement of a non-structural spanwise load in the moment equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PayloadConvention {
    /// The load is a weight per unit span and enters through its moment,
    /// `- int_xi^1 rho(eta)(eta - xi)`, like the lift and the self weight.
    #[default]
    LoadMoment,
    /// `rho` itself is subtracted from the right-hand side.
    Direct,
}

/// Self-weight moment with an additional spanwise load `payload(xi) >= 0`
/// (in the normalised unit system), integrated backward like
/// [`moment_selfweight_ode`].
pub fn moment_with_payload<P: Fn(f64) -> f64>(
    c: &ModeCoefficients,
    b: f64,
    payload: P,
    grid: &[f64],
    convention: PayloadConvention,
    step: f64,
) -> Result<MomentProfile> {
    check_span(b)?;
    check_grid(grid)?;
    for &x in grid {
        let p = payload(x);
        if !(p >= 0.0) || !p.is_finite() {
            return Err(Error::InvalidInput(format!("payload must be finite and non-negative, got {p} at {x}")));
        }
    }
    let k2 = 0.25 * b * b;
    let values = match convention {
        PayloadConvention::LoadMoment => integrate_terminal_ode(c, b, grid, step, |x| k2 * payload(x))?,
        PayloadConvention::Direct => {
            // N = M + rho satisfies N'' + k^2 N = k^2 (Gamma + rho), N(1) = N'(1) = 0
            let shifted = integrate_terminal_ode(c, b, grid, step, |x| -k2 * payload(x))?;
            shifted.iter().zip(grid).map(|(n, &x)| n - payload(x)).collect()
        }
    };
    MomentProfile::new(grid.to_vec(), values, MomentMethod::Ode, b)
}

/// Smallest grid accepted by [`noncollapse_check`].
pub const NONCOLLAPSE_MIN_POINTS: usize = 200;

/// Trapezoidal `(b^2/4) int_{xi_i}^1 M(eta)(eta - xi_i) deta` at every grid point.
pub fn self_load_moment(xi: &[f64], m: &[f64], b: f64) -> Vec<f64> {
    let n = xi.len();
    let k2 = 0.25 * b * b;
    let mut out = vec![0.0; n];
    let (mut s0, mut s1) = (0.0, 0.0);
    for i in (0..n - 1).rev() {
        let h = xi[i + 1] - xi[i];
        s0 += 0.5 * h * (m[i] + m[i + 1]);
        s1 += 0.5 * h * (m[i] * xi[i] + m[i + 1] * xi[i + 1]);
        out[i] = k2 * (s1 - xi[i] * s0);
    }
    out
}

/// Scale applied to the self-load moment in the second non-collapse test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoncollapseScale {
    /// `(b/2)^2`: both `dy` and `(y - x)` rescaled to the unit half span.
    #[default]
    Consistent,
    /// `b/2`: only `dy` rescaled. Kept to compare against results computed
    /// that way; it weakens the test for `b > 2`.
    SingleFactor,
}

impl NoncollapseScale {
    pub fn factor(self, b: f64) -> f64 {
        match self {
            NoncollapseScale::Consistent => 0.25 * b * b,
            NoncollapseScale::SingleFactor => 0.5 * b,
        }
    }
}

impl FromStr for NoncollapseScale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "consistent" => Ok(NoncollapseScale::Consistent),
            "single-factor" => Ok(NoncollapseScale::SingleFactor),
            other => Err(Error::InvalidInput(format!("unknown non-collapse scale `{other}`"))),
        }
    }
}

/// `min over the grid of min(M, M - s int_xi^1 M (eta - xi))`, with
/// `s = scale.factor(b)`; non-negative iff non-collapse holds.
fn noncollapse_margin(xi: &[f64], m: &[f64], b: f64, scale: NoncollapseScale) -> f64 {
    let ratio = scale.factor(b) / (0.25 * b * b);
    self_load_moment(xi, m, b)
        .iter()
        .zip(m)
        .map(|(&load, &v)| v.min(v - ratio * load))
        .fold(f64::INFINITY, f64::min)
}

/// Non-collapse: `M >= 0` and `M >= (b^2/4) int_xi^1 M(eta)(eta - xi)` at every
/// grid point, to within [`CONSTRAINT_TOL`].
pub fn noncollapse_check(profile: &MomentProfile, b: f64) -> Result<bool> {
    check_span(b)?;
    if profile.len() < NONCOLLAPSE_MIN_POINTS {
        return Err(Error::InvalidInput(format!(
            "non-collapse needs at least {NONCOLLAPSE_MIN_POINTS} grid points, got {}",
            profile.len()
        )));
    }
    Ok(noncollapse_margin(profile.xi(), profile.values(), b, NoncollapseScale::Consistent) >= -CONSTRAINT_TOL)
}

/// Outcome of evaluating every constraint at one coefficient vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintReport {
    pub total_moment: f64,
    pub weight_ok: bool,
    pub noncollapse_ok: bool,
    pub gamma_nonneg: bool,
    /// `budget - total_moment`.
    pub margin: f64,
    /// Signed slack of the non-collapse test (`M >= 0` only, for the lift-only model).
    pub noncollapse_margin: f64,
    /// `min f` over the span.
    pub min_f: f64,
    /// `b < 2 pi`, where the self-weight kernel keeps its sign.
    pub validated_regime: bool,
}

/// Settings for [`evaluate_constraints`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstraintOptions {
    pub model: MomentModel,
    pub weight_form: WeightForm,
    pub noncollapse_scale: NoncollapseScale,
    /// Right-hand side of the weight constraint (1 at unit constants).
    pub budget: f64,
    pub scan_points: usize,
}

impl Default for ConstraintOptions {
    fn default() -> Self {
        Self {
            model: MomentModel::LiftOnly,
            weight_form: WeightForm::Direct,
            noncollapse_scale: NoncollapseScale::Consistent,
            budget: 1.0,
            scan_points: SCAN_POINTS,
        }
    }
}

impl ConstraintOptions {
    pub fn lift_only() -> Self {
        Self::default()
    }

    pub fn self_weight(form: WeightForm) -> Self {
        Self {
            model: MomentModel::SelfWeight,
            weight_form: form,
            ..Self::default()
        }
    }

    pub fn with_budget(mut self, budget: f64) -> Self {
        self.budget = budget;
        self
    }

    pub fn with_noncollapse_scale(mut self, scale: NoncollapseScale) -> Self {
        self.noncollapse_scale = scale;
        self
    }
}

/// Reusable evaluator: holds the quadrature and scan grid so sweeps do not
/// reallocate them per cell.
#[derive(Debug, Clone)]
pub struct ConstraintEvaluator {
    opts: ConstraintOptions,
    quad: MomentQuadrature,
    grid: Vec<f64>,
}

impl ConstraintEvaluator {
    pub fn new(opts: ConstraintOptions) -> Result<Self> {
        if opts.scan_points < NONCOLLAPSE_MIN_POINTS {
            return Err(Error::InvalidInput(format!(
                "scan grid needs at least {NONCOLLAPSE_MIN_POINTS} points"
            )));
        }
        if !(opts.budget > 0.0 && opts.budget.is_finite()) {
            return Err(Error::InvalidInput("weight budget must be positive".into()));
        }
        Ok(Self {
            opts,
            quad: MomentQuadrature::new(4, 0.5),
            grid: uniform_grid(opts.scan_points),
        })
    }

    pub fn options(&self) -> &ConstraintOptions {
        &self.opts
    }

    /// Weight-constraint value alone (no non-collapse test).
    pub fn weight_value(&self, c: &ModeCoefficients, b: f64) -> Result<f64> {
        check_span(b)?;
        if self.opts.model == MomentModel::SelfWeight && self.opts.weight_form == WeightForm::Reduced {
            return self.reduced_value(c, b);
        }
        let (lift, weight) = self.quad.profile_pair(c, b, &self.grid);
        self.weight_from_profiles(c, b, &lift, &weight)
    }

    fn reduced_value(&self, c: &ModeCoefficients, b: f64) -> Result<f64> {
        let k = 0.5 * b;
        finite(k * k * self.quad.gamma_integral(c, k, 0.0, 1.0, &|eta| MomentModel::SelfWeight.kernel_primitive(k, eta)))
    }

    fn weight_from_profiles(&self, c: &ModeCoefficients, b: f64, lift: &[f64], weight: &[f64]) -> Result<f64> {
        match (self.opts.model, self.opts.weight_form) {
            (MomentModel::LiftOnly, _) => finite(b * self.quad.abs_integral(c, MomentModel::LiftOnly, b, &self.grid, lift)),
            (MomentModel::SelfWeight, WeightForm::Direct) => {
                finite(b * self.quad.abs_integral(c, MomentModel::SelfWeight, b, &self.grid, weight))
            }
            (MomentModel::SelfWeight, WeightForm::Reduced) => self.reduced_value(c, b),
        }
    }

    pub fn evaluate(&self, c: &ModeCoefficients, b: f64) -> Result<ConstraintReport> {
        check_span(b)?;
        let (lift, weight) = self.quad.profile_pair(c, b, &self.grid);
        let total = self.weight_from_profiles(c, b, &lift, &weight)?;
        let nc = match self.opts.model {
            // the lift-only model only asks for M >= 0
            MomentModel::LiftOnly => lift.iter().copied().fold(f64::INFINITY, f64::min),
            MomentModel::SelfWeight => noncollapse_margin(&self.grid, &weight, b, self.opts.noncollapse_scale),
        };
        if !nc.is_finite() {
            return Err(Error::Quadrature("non-finite moment profile".into()));
        }
        let mf = min_f(c);
        Ok(ConstraintReport {
            total_moment: total,
            weight_ok: total <= self.opts.budget + CONSTRAINT_TOL,
            noncollapse_ok: nc >= -CONSTRAINT_TOL,
            gamma_nonneg: mf >= -CONSTRAINT_TOL,
            margin: self.opts.budget - total,
            noncollapse_margin: nc,
            min_f: mf,
            validated_regime: b < VALIDATED_SPAN_LIMIT,
        })
    }
}

/// One-shot constraint evaluation.
pub fn evaluate_constraints(c: &ModeCoefficients, b: f64, opts: ConstraintOptions) -> Result<ConstraintReport> {
    ConstraintEvaluator::new(opts)?.evaluate(c, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mc(v: &[f64]) -> ModeCoefficients {
        ModeCoefficients::new(v.to_vec()).unwrap()
    }

    const S3: f64 = 1.7320508075688772;

    fn prandtl_point() -> (ModeCoefficients, f64) {
        let a0 = 1.0 / (PI * S3);
        (mc(&[a0, -a0 / 3.0]), 4.0 * S3)
    }

    #[test]
    fn lift_only_examples() {
        let c = mc(&[0.3, 0.1]);
        assert_eq!(moment_lift_only(&c, 3.0, 1.0).unwrap(), 0.0);
        // int_0^1 sqrt(1-eta^2) eta = 1/3
        assert!((moment_lift_only(&mc(&[1.0, 0.0]), 2.0, 0.0).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        assert!(moment_lift_only(&mc(&[1.0, -1.0 / 3.0]), 2.0, 0.0).unwrap() >= 0.0);
        assert!(moment_lift_only(&c, -1.0, 0.0).is_err());
        assert!(moment_lift_only(&c, 1.0, 1.5).is_err());
    }

    #[test]
    fn total_moment_examples() {
        let (c, b) = prandtl_point();
        assert!((total_moment_lift_only(&c, b).unwrap() - 1.0).abs() < 1e-9);
        let a0 = 1.0 / (PI * 2f64.sqrt());
        let e = mc(&[a0, 0.0]);
        assert!((total_moment_lift_only(&e, 4.0 * 2f64.sqrt()).unwrap() - 1.0).abs() < 1e-9);
        let v = total_moment_lift_only(&mc(&[0.0, 1.0]), 1.0).unwrap();
        assert!(v.is_finite() && v > 0.0);
    }

    #[test]
    fn nonneg_closed_total_matches_quadrature() {
        let (c, b) = prandtl_point();
        assert!((total_moment_lift_only_nonneg(&c, b) - 1.0).abs() < 1e-12);
        for (a0, a2, b) in [(0.3, 0.05, 2.0), (0.2, -0.05, 5.0), (0.1, 0.0, 9.0)] {
            let c = mc(&[a0, a2]);
            let q = total_moment_lift_only(&c, b).unwrap();
            assert!((total_moment_lift_only_nonneg(&c, b) - q).abs() < 1e-10 * q, "{a0} {a2} {b}");
        }
    }

    #[test]
    fn abs_integral_matches_brute_force_for_sign_changing_loads() {
        // oracle: dense composite Simpson on |inner(xi)| with adaptive inner integrals
        let c = mc(&[0.0, 1.0]);
        let b = 1.0;
        let n = 2000;
        let mut acc = 0.0;
        for i in 0..=n {
            let x = i as f64 / n as f64;
            let w = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * moment_lift_only(&c, b, x).unwrap().abs();
        }
        let brute = b * acc / (3.0 * n as f64);
        let fast = total_moment_lift_only(&c, b).unwrap();
        assert!((brute - fast).abs() < 1e-8, "{brute} vs {fast}");
    }

    #[test]
    fn selfweight_closed_examples() {
        let c = mc(&[1.0, 0.0]);
        assert_eq!(moment_selfweight_closed(&c, 2.0, 1.0).unwrap(), 0.0);
        // int_0^1 sqrt(1-eta^2) sin(eta) deta, frozen from a 400-node Gauss-Legendre
        // evaluation in eta = sin(theta)
        let v = moment_selfweight_closed(&c, 2.0, 0.0).unwrap();
        let oracle = {
            let (t, w) = gauss_legendre(400);
            t.iter()
                .zip(&w)
                .map(|(&t, &w)| {
                    let th = (t + 1.0) * PI / 4.0;
                    w * PI / 4.0 * th.cos() * th.cos() * th.sin().sin()
                })
                .sum::<f64>()
        };
        assert!((v - oracle).abs() < 1e-12);
        // sin(x) ~ x: approaches (b^2/4)/3
        let b = 0.01;
        let small = moment_selfweight_closed(&c, b, 0.0).unwrap();
        assert!((small / (b * b / 12.0) - 1.0).abs() < 1e-4);
    }

    #[test]
    fn fast_profiles_match_adaptive_pointwise() {
        let c = mc(&[0.4, -0.1, 0.05]);
        for &b in &[0.5, 3.0, 9.0, 40.0] {
            let grid = uniform_grid(257);
            let (lift, weight) = MomentQuadrature::default().profile_pair(&c, b, &grid);
            for (i, &x) in grid.iter().enumerate().step_by(16) {
                let l = moment_lift_only(&c, b, x).unwrap();
                let w = moment_selfweight_closed(&c, b, x).unwrap();
                assert!((lift[i] - l).abs() < 1e-11 * (1.0 + l.abs()), "b={b} x={x}");
                assert!((weight[i] - w).abs() < 1e-11 * (1.0 + b), "b={b} x={x}");
            }
            let ev = ConstraintEvaluator::new(ConstraintOptions::lift_only()).unwrap();
            let (lift4, weight4) = ev.quad.profile_pair(&c, b, &grid);
            for i in 0..grid.len() {
                assert!((lift4[i] - lift[i]).abs() < 1e-12 * (1.0 + lift[i].abs()));
                assert!((weight4[i] - weight[i]).abs() < 1e-12 * (1.0 + b));
            }
        }
    }

    #[test]
    fn segment_integrals_sum_to_whole() {
        let c = mc(&[0.2, 0.3, -0.1]);
        let q = MomentQuadrature::default();
        for model in [MomentModel::LiftOnly, MomentModel::SelfWeight] {
            let whole = q.moment_segment_integral(&c, model, 7.0, 0.0, 1.0);
            let parts = q.moment_segment_integral(&c, model, 7.0, 0.0, 0.37)
                + q.moment_segment_integral(&c, model, 7.0, 0.37, 1.0);
            assert!((whole - parts).abs() < 1e-13);
        }
    }

    #[test]
    fn ode_matches_closed_form() {
        let c = mc(&[1.0, 0.0]);
        let grid = uniform_grid(201);
        let ode = moment_selfweight_ode(&c, 2.0, &grid, DEFAULT_ODE_STEP).unwrap();
        let closed = moment_selfweight_profile(&c, 2.0, &grid).unwrap();
        assert!(ode.sup_deviation(&closed).unwrap() < 1e-7);
        let zero = moment_selfweight_ode(&mc(&[0.0]), 3.0, &grid, DEFAULT_ODE_STEP).unwrap();
        assert!(zero.values().iter().all(|&v| v == 0.0));
        assert!(moment_selfweight_ode(&c, 2.0, &grid, 0.0).is_err());
    }

    #[test]
    fn ode_matches_volterra_at_prandtl_point() {
        let (c, b) = prandtl_point();
        let v = moment_volterra_oracle(&c, b, 4001).unwrap();
        let ode = moment_selfweight_ode(&c, b, v.xi(), DEFAULT_ODE_STEP).unwrap();
        assert!(ode.sup_deviation(&v).unwrap() < 1e-5);
    }

    #[test]
    fn volterra_converges_at_second_order() {
        let c = mc(&[1.0, 0.0]);
        let exact = moment_selfweight_closed(&c, 2.0, 0.0).unwrap();
        let e1 = (moment_volterra_oracle(&c, 2.0, 401).unwrap().values()[0] - exact).abs();
        let e2 = (moment_volterra_oracle(&c, 2.0, 801).unwrap().values()[0] - exact).abs();
        let ratio = e1 / e2;
        assert!((ratio - 4.0).abs() < 0.3, "ratio {ratio}");
        let fine = moment_volterra_oracle(&c, 2.0, 20000).unwrap();
        assert!((fine.values()[0] - exact).abs() < 1e-6);
        assert!(moment_volterra_oracle(&c, 2.0, 99).is_err());
        let zero = moment_volterra_oracle(&mc(&[0.0]), 2.0, 200).unwrap();
        assert!(zero.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn swapped_form_equals_direct_quadrature_when_moment_nonnegative() {
        let (c, b) = prandtl_point();
        let direct = weight_constraint_improved(&c, b).unwrap();
        let swapped = weight_constraint_swapped(&c, b).unwrap();
        assert!((direct - swapped).abs() < 1e-12);
        let reduced = weight_constraint_reduced(&c, b).unwrap();
        assert!((reduced - swapped * b / 4.0).abs() < 1e-14);
        assert_eq!(weight_constraint_improved(&mc(&[0.0, 0.0]), 3.0).unwrap(), 0.0);
        assert!(weight_constraint_improved(&mc(&[1.0]), 1e-4).unwrap() < 1e-10);
    }

    #[test]
    fn noncollapse_examples() {
        let grid = uniform_grid(400);
        let zero = MomentProfile::new(grid.clone(), vec![0.0; 400], MomentMethod::ClosedForm, 2.0).unwrap();
        assert!(noncollapse_check(&zero, 2.0).unwrap());
        let mut bad = vec![0.0; 400];
        bad[0] = -1e-6;
        let bad = MomentProfile::new(grid.clone(), bad, MomentMethod::ClosedForm, 2.0).unwrap();
        assert!(!noncollapse_check(&bad, 2.0).unwrap());
        let coarse = MomentProfile::new(uniform_grid(50), vec![0.0; 50], MomentMethod::ClosedForm, 2.0).unwrap();
        assert!(noncollapse_check(&coarse, 2.0).is_err());
    }

    #[test]
    fn noncollapse_second_condition_is_twice_m_above_lift_moment() {
        // (b^2/4) int M (eta - xi) = M_L - M for the self-weight solution
        let c = mc(&[0.2, 0.03]);
        let b = 5.0;
        let grid = uniform_grid(20001);
        let (lift, weight) = MomentQuadrature::default().profile_pair(&c, b, &grid);
        let load = self_load_moment(&grid, &weight, b);
        for i in (0..grid.len()).step_by(500) {
            assert!((load[i] - (lift[i] - weight[i])).abs() < 1e-8);
        }
    }

    #[test]
    fn payload_reduces_and_superposes() {
        let c = mc(&[0.3, -0.05]);
        let b = 4.0;
        let grid = uniform_grid(201);
        let base = moment_selfweight_ode(&c, b, &grid, DEFAULT_ODE_STEP).unwrap();
        let none = moment_with_payload(&c, b, |_| 0.0, &grid, PayloadConvention::LoadMoment, DEFAULT_ODE_STEP).unwrap();
        assert_eq!(base.values(), none.values());
        let eps = 0.01;
        let only = moment_with_payload(&mc(&[0.0]), b, |_| eps, &grid, PayloadConvention::LoadMoment, DEFAULT_ODE_STEP)
            .unwrap();
        assert!(only.values().iter().any(|&v| v < 0.0));
        let both = moment_with_payload(&c, b, |_| eps, &grid, PayloadConvention::LoadMoment, DEFAULT_ODE_STEP).unwrap();
        for i in 0..grid.len() {
            assert!((both.values()[i] - base.values()[i] - only.values()[i]).abs() < 1e-12);
        }
        // constant load under the moment convention: M = -eps (1 - cos(k(1 - xi)))
        let k = b / 2.0;
        for (x, v) in grid.iter().zip(only.values()) {
            assert!((v + eps * (1.0 - (k * (1.0 - x)).cos())).abs() < 1e-10);
        }
        assert!(moment_with_payload(&c, b, |_| -1.0, &grid, PayloadConvention::LoadMoment, DEFAULT_ODE_STEP).is_err());
    }

    #[test]
    fn direct_payload_convention() {
        // Gamma = 0, rho = eps: N'' + k^2 N = k^2 eps gives N = eps (1 - cos(k(1-xi))), M = N - eps
        let b = 3.0;
        let eps = 0.02;
        let grid = uniform_grid(201);
        let p = moment_with_payload(&mc(&[0.0]), b, |_| eps, &grid, PayloadConvention::Direct, DEFAULT_ODE_STEP).unwrap();
        let k = b / 2.0;
        for (x, v) in grid.iter().zip(p.values()) {
            assert!((v - (eps * (1.0 - (k * (1.0 - x)).cos()) - eps)).abs() < 1e-10);
        }
    }

    #[test]
    fn profile_validation() {
        assert!(MomentProfile::new(vec![0.0, 1.0], vec![0.0], MomentMethod::Ode, 1.0).is_err());
        assert!(MomentProfile::new(vec![0.5, 0.2], vec![0.0, 0.0], MomentMethod::Ode, 1.0).is_err());
        assert!(MomentProfile::new(vec![0.0, 1.0], vec![f64::NAN, 0.0], MomentMethod::Ode, 1.0).is_err());
        let g = tip_refined_grid(101);
        assert_eq!(g[0], 0.0);
        assert_eq!(*g.last().unwrap(), 1.0);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn terminal_conditions() {
        let c = mc(&[0.25, 0.02]);
        let b = 5.0;
        let grid = tip_refined_grid(1001);
        let profiles = [
            moment_lift_only_profile(&c, b, &grid).unwrap(),
            moment_selfweight_profile(&c, b, &grid).unwrap(),
            moment_selfweight_ode(&c, b, &grid, DEFAULT_ODE_STEP).unwrap(),
        ];
        for p in &profiles {
            assert!(p.terminal_value().abs() <= 1e-12, "{}", p.method());
            assert!(p.terminal_slope().abs() <= 1e-6, "{}", p.method());
        }
    }

    #[test]
    fn report_flags() {
        let (c, b) = prandtl_point();
        let r = evaluate_constraints(&c, b, ConstraintOptions::lift_only()).unwrap();
        assert!(r.weight_ok && r.noncollapse_ok && r.gamma_nonneg);
        assert!(r.margin.abs() < 1e-9);
        assert!(!r.validated_regime);
        let r = evaluate_constraints(&c, b, ConstraintOptions::lift_only().with_budget(0.5)).unwrap();
        assert!(!r.weight_ok);
        assert!(ConstraintEvaluator::new(ConstraintOptions { scan_points: 10, ..Default::default() }).is_err());
    }

    #[test]
    fn method_names_round_trip() {
        for m in MomentMethod::ALL {
            assert_eq!(m.name().parse::<MomentMethod>().unwrap(), m);
        }
        assert!("bogus".parse::<MomentMethod>().is_err());
        assert_eq!("reduced".parse::<WeightForm>().unwrap(), WeightForm::Reduced);
    }
}
