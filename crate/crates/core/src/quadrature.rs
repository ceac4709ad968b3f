//! Quadrature rules and the adaptive integrator shared by the moment and
//! constraint computations.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Family of a [`QuadratureRule`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleKind {
    /// Gauss–Chebyshev of the second kind: weights already carry `sqrt(1 - x^2)`.
    GaussChebSecondKind,
    /// Gauss–Legendre on `[-1, 1]`.
    GaussLegendre,
    /// Gauss–Legendre panel rule driven by adaptive bisection.
    Adaptive,
}

impl fmt::Display for RuleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RuleKind::GaussChebSecondKind => "gauss-cheb-second-kind",
            RuleKind::GaussLegendre => "gauss-legendre",
            RuleKind::Adaptive => "adaptive",
        };
        f.write_str(s)
    }
}

impl FromStr for RuleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gauss-cheb-second-kind" => Ok(RuleKind::GaussChebSecondKind),
            "gauss-legendre" => Ok(RuleKind::GaussLegendre),
            "adaptive" => Ok(RuleKind::Adaptive),
            other => Err(Error::InvalidInput(format!("unknown quadrature kind `{other}`"))),
        }
    }
}

/// Nodes and weights on the reference interval `[-1, 1]`.
///
/// Nodes are strictly increasing and every weight is positive.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    kind: RuleKind,
}

/// Build a rule of the given family with `npoints` nodes.
pub fn make_rule(kind: RuleKind, npoints: usize) -> Result<QuadratureRule> {
    if npoints == 0 {
        return Err(Error::InvalidInput("a quadrature rule needs at least one node".into()));
    }
    let (nodes, weights) = match kind {
        RuleKind::GaussChebSecondKind => gauss_chebyshev_second_kind(npoints),
        RuleKind::GaussLegendre | RuleKind::Adaptive => gauss_legendre(npoints),
    };
    Ok(QuadratureRule { nodes, weights, kind })
}

impl QuadratureRule {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn kind(&self) -> RuleKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `sum w_i f(x_i)` on the reference interval. For the Chebyshev rule this
    /// approximates `int_{-1}^{1} f(x) sqrt(1 - x^2) dx`, for the Legendre
    /// rules `int_{-1}^{1} f(x) dx`.
    pub fn apply<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Affine map of the reference rule onto `[a, b]`.
    pub fn apply_on<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        half * self.apply(|t| f(mid + half * t))
    }

    /// Integrate `f` over `[a, b]`, adaptively for [`RuleKind::Adaptive`].
    ///
    /// The Chebyshev rule is not meaningful here and is rejected.
    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> Result<f64> {
        match self.kind {
            RuleKind::GaussLegendre => checked(self.apply_on(a, b, &f)),
            RuleKind::Adaptive => adaptive_with_rule(self, &f, a, b, AdaptiveOptions::default()),
            RuleKind::GaussChebSecondKind => Err(Error::InvalidInput(
                "the Chebyshev rule carries a fixed weight; use `apply`".into(),
            )),
        }
    }
}

fn checked(v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Quadrature("non-finite integrand sample".into()))
    }
}

fn gauss_chebyshev_second_kind(n: usize) -> (Vec<f64>, Vec<f64>) {
    let step = PI / (n as f64 + 1.0);
    // i = n..1 gives increasing nodes
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in (1..=n).rev() {
        let theta = i as f64 * step;
        let x = theta.cos();
        nodes.push(if x.abs() < 1e-15 { 0.0 } else { x });
        weights.push(step * theta.sin().powi(2));
    }
    (nodes, weights)
}

/// Gauss–Legendre nodes and weights by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Stopping parameters for [`adaptive_integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveOptions {
    pub abs_tol: f64,
    pub max_depth: u32,
    /// Nodes of the Gauss–Legendre panel rule.
    pub panel_points: usize,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            max_depth: 30,
            panel_points: 10,
        }
    }
}

/// Adaptive Gauss–Legendre bisection on `[a, b]`.
///
/// A panel is accepted when the one-panel and two-half-panel estimates agree
/// to within its share of `abs_tol`. Panels that reach `max_depth` without
/// meeting the tolerance make the whole call fail.
pub fn adaptive_integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: AdaptiveOptions) -> Result<f64> {
    let rule = make_rule(RuleKind::Adaptive, opts.panel_points)?;
    adaptive_with_rule(&rule, &f, a, b, opts)
}

fn adaptive_with_rule<F: Fn(f64) -> f64>(
    rule: &QuadratureRule,
    f: &F,
    a: f64,
    b: f64,
    opts: AdaptiveOptions,
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidInput("integration bounds must be finite".into()));
    }
    let whole = rule.apply_on(a, b, f);
    let span = (b - a).abs();
    let mut total = 0.0;
    // explicit stack: (lo, hi, estimate, depth)
    let mut stack = vec![(a, b, whole, 0u32)];
    while let Some((lo, hi, est, depth)) = stack.pop() {
        if !est.is_finite() {
            return Err(Error::Quadrature(format!("non-finite integrand sample on [{lo}, {hi}]")));
        }
        let mid = 0.5 * (lo + hi);
        let left = rule.apply_on(lo, mid, f);
        let right = rule.apply_on(mid, hi, f);
        let refined = left + right;
        let share = opts.abs_tol * ((hi - lo).abs() / span).max(1e-3);
        if (refined - est).abs() <= share {
            total += refined;
        } else if depth >= opts.max_depth {
            if !refined.is_finite() {
                return Err(Error::Quadrature(format!("non-finite integrand sample on [{lo}, {hi}]")));
            }
            return Err(Error::Quadrature(format!(
                "tolerance {:e} not met on [{lo}, {hi}] at depth {depth}",
                opts.abs_tol
            )));
        } else {
            stack.push((lo, mid, left, depth + 1));
            stack.push((mid, hi, right, depth + 1));
        }
    }
    checked(total)
}
