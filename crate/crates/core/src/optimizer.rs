//! Minimum-drag loadings: the closed-form baselines and numerical solves for
//! the two bending-moment models.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::circulation::{induced_drag, ModeCoefficients, DEFAULT_MAX_MODES};
use crate::error::{Error, Result};
use crate::feasibility::{
    min_drag_over_region_tol, span_for_a0, sweep, ConstraintSet, FeasibilityGrid, Model, RegionProblem, SweepSpec,
};
use crate::moments::{
    total_moment_lift_only_nonneg, weight_constraint_improved, weight_constraint_reduced, ConstraintEvaluator,
    ConstraintOptions, ConstraintReport, WeightForm,
};

/// `1/(16 pi)`: elliptic loading at unit constants.
pub const ELLIPTIC_DRAG: f64 = 1.0 / (16.0 * PI);

/// `1/(18 pi)`: lift-only two-mode optimum at unit constants.
pub const PRANDTL_DRAG: f64 = 1.0 / (18.0 * PI);

/// Which problem a report answers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveModel {
    Elliptic,
    Prandtl,
    Improved,
    General,
}

impl fmt::Display for SolveModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolveModel::Elliptic => "elliptic",
            SolveModel::Prandtl => "prandtl",
            SolveModel::Improved => "improved",
            SolveModel::General => "general",
        })
    }
}

impl FromStr for SolveModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "elliptic" => Ok(SolveModel::Elliptic),
            "prandtl" => Ok(SolveModel::Prandtl),
            "improved" => Ok(SolveModel::Improved),
            "general" => Ok(SolveModel::General),
            other => Err(Error::InvalidInput(format!("unknown model `{other}`"))),
        }
    }
}

/// Result of a solve at unit constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub model: SolveModel,
    pub coeffs: ModeCoefficients,
    pub span_b: f64,
    pub drag: f64,
    /// Parameter of the `(1 - mu xi^2) sqrt(1 - xi^2)` family, for two-mode loadings.
    pub mu: Option<f64>,
    pub constraint_values: BTreeMap<String, f64>,
    pub drag_ratio_vs_elliptic: f64,
    pub drag_ratio_vs_prandtl: f64,
    /// Accepted drag values of an iterative solve, in order.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub drag_history: Vec<f64>,
}

impl SolveReport {
    fn build(model: SolveModel, coeffs: ModeCoefficients, span_b: f64, constraint_values: BTreeMap<String, f64>) -> Self {
        let drag = induced_drag(&coeffs);
        Self {
            model,
            mu: mu_of(&coeffs),
            span_b,
            drag,
            drag_ratio_vs_elliptic: drag / ELLIPTIC_DRAG,
            drag_ratio_vs_prandtl: drag / PRANDTL_DRAG,
            coeffs,
            constraint_values,
            drag_history: Vec::new(),
        }
    }

    /// `1 - drag / PRANDTL_DRAG`.
    pub fn reduction_vs_prandtl(&self) -> f64 {
        1.0 - self.drag_ratio_vs_prandtl
    }

    /// Recompute the drag and ratios from the coefficients.
    pub fn check_consistency(&self) -> Result<()> {
        let d = induced_drag(&self.coeffs);
        let bad = (d - self.drag).abs() > 1e-12
            || (self.drag / ELLIPTIC_DRAG - self.drag_ratio_vs_elliptic).abs() > 1e-12
            || (self.drag / PRANDTL_DRAG - self.drag_ratio_vs_prandtl).abs() > 1e-12;
        if bad {
            return Err(Error::InvalidInput("report drag does not match its coefficients".into()));
        }
        Ok(())
    }
}

fn mu_of(c: &ModeCoefficients) -> Option<f64> {
    if c.truncation() != 1 {
        return None;
    }
    let g0 = c.a0() - c.a2();
    (g0 != 0.0).then(|| -4.0 * c.a2() / g0)
}

/// `D(mu) / D(0)` for the `(1 - mu xi^2)` family under the lift-only weight
/// constraint, times `1/(16 pi)`.
pub fn prandtl_drag_of_mu(mu: f64) -> Result<f64> {
    if !mu.is_finite() || mu >= 4.0 {
        return Err(Error::Domain(format!("mu must be below 4, got {mu}")));
    }
    let h = 1.0 - mu / 2.0;
    Ok(ELLIPTIC_DRAG * h * (h + mu * mu / 4.0) / (1.0 - mu / 4.0).powi(3))
}

fn lift_only_values(c: &ModeCoefficients, b: f64) -> Result<BTreeMap<String, f64>> {
    let r = ConstraintEvaluator::new(ConstraintOptions::lift_only())?.evaluate(c, b)?;
    let mut v = report_values(&r, 1.0);
    v.insert("total_moment_closed".into(), total_moment_lift_only_nonneg(c, b));
    Ok(v)
}

fn report_values(r: &ConstraintReport, budget: f64) -> BTreeMap<String, f64> {
    BTreeMap::from([
        ("total_moment".to_string(), r.total_moment),
        ("margin".to_string(), r.margin),
        ("noncollapse_margin".to_string(), r.noncollapse_margin),
        ("min_f".to_string(), r.min_f),
        ("budget".to_string(), budget),
    ])
}

/// Elliptic loading carrying unit lift with the lift-only weight constraint active.
pub fn solve_elliptic() -> Result<SolveReport> {
    let a0 = 1.0 / (PI * std::f64::consts::SQRT_2);
    let c = ModeCoefficients::two_mode(a0, 0.0)?;
    let b = 4.0 * std::f64::consts::SQRT_2;
    let values = lift_only_values(&c, b)?;
    Ok(SolveReport::build(SolveModel::Elliptic, c, b, values))
}

/// The lift-only two-mode optimum `a_2 = -a_0/3`, `mu = 1`.
pub fn solve_prandtl1933() -> Result<SolveReport> {
    let s3 = 3f64.sqrt();
    let a0 = 1.0 / (PI * s3);
    let c = ModeCoefficients::two_mode(a0, -a0 / 3.0)?;
    let b = 4.0 * s3;
    let values = lift_only_values(&c, b)?;
    let mut r = SolveReport::build(SolveModel::Prandtl, c, b, values);
    r.mu = Some(1.0);
    Ok(r)
}

/// Two-mode optimum over a swept window with `Gamma >= 0` enforced.
pub fn solve_improved(spec: &SweepSpec, refine_tol: f64) -> Result<SolveReport> {
    solve_on_grid(&sweep(spec)?, refine_tol)
}

/// [`solve_improved`] on a grid that has already been swept.
pub fn solve_on_grid(grid: &FeasibilityGrid, refine_tol: f64) -> Result<SolveReport> {
    let spec = &grid.spec;
    let opt = min_drag_over_region_tol(grid, true, refine_tol)?;
    let problem = RegionProblem::new(spec, true)?;
    let report = problem.evaluate(opt.a0, opt.a2)?;
    let c = ModeCoefficients::two_mode(opt.a0, opt.a2)?;
    let b = span_for_a0(opt.a0);
    let mut values = report_values(&report, spec.budget);
    let model = match spec.model {
        Model::Prandtl => {
            values.insert("total_moment_closed".into(), total_moment_lift_only_nonneg(&c, b));
            SolveModel::Prandtl
        }
        Model::Improved => {
            values.insert("weight_direct".into(), weight_constraint_improved(&c, b)?);
            values.insert("weight_reduced".into(), weight_constraint_reduced(&c, b)?);
            SolveModel::Improved
        }
    };
    Ok(SolveReport::build(model, c, b, values))
}

/// Settings for [`solve_general_modes_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneralOptions {
    pub model: Model,
    pub weight_form: WeightForm,
    pub budget: f64,
    /// Also require `Gamma >= 0`; off by default so sign-changing loadings are explored.
    pub gamma_nonneg: bool,
    pub max_sweeps: usize,
    /// Smallest step of the per-coordinate pattern search.
    pub step_tol: f64,
}

impl GeneralOptions {
    pub fn new(model: Model) -> Self {
        Self {
            model,
            weight_form: WeightForm::Reduced,
            budget: 1.0,
            gamma_nonneg: false,
            max_sweeps: 100,
            step_tol: 1e-10,
        }
    }

    pub fn with_budget(mut self, budget: f64) -> Self {
        self.budget = budget;
        self
    }

    pub fn with_gamma_nonneg(mut self, on: bool) -> Self {
        self.gamma_nonneg = on;
        self
    }
}

struct RayProblem {
    evaluator: ConstraintEvaluator,
    set: ConstraintSet,
}

impl RayProblem {
    fn feasible(&self, shape: &[f64], a0: f64) -> bool {
        if !(a0 > 0.0) {
            return false;
        }
        let c = match ModeCoefficients::new(shape.iter().map(|r| r * a0).collect()) {
            Ok(c) => c,
            Err(_) => return false,
        };
        match self.evaluator.evaluate(&c, span_for_a0(a0)) {
            Ok(r) => r.weight_ok && (!self.set.noncollapse || r.noncollapse_ok) && (!self.set.gamma_nonneg || r.gamma_nonneg),
            Err(_) => false,
        }
    }

    /// Smallest feasible `a_0` on the ray `a = a_0 * shape` near `guess`, or
    /// `None` when no feasible point is found close by.
    fn boundary(&self, shape: &[f64], guess: f64) -> Option<f64> {
        let mut hi = guess * (1.0 + 1e-6);
        let mut grow = 1e-3;
        while !self.feasible(shape, hi) {
            hi *= 1.0 + grow;
            grow *= 2.0;
            if grow > 1.0 {
                return None;
            }
        }
        let mut lo = hi * (1.0 - 1e-6);
        let mut shrink = 1e-3;
        while self.feasible(shape, lo) {
            hi = lo;
            lo *= 1.0 - shrink;
            shrink = (shrink * 2.0).min(0.5);
            if lo < 1e-12 {
                return Some(hi);
            }
        }
        while hi - lo > 1e-14 * hi {
            let mid = 0.5 * (lo + hi);
            if self.feasible(shape, mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Some(hi)
    }
}

fn shape_drag(shape: &[f64], a0: f64) -> f64 {
    PI / 8.0 * a0 * a0 * shape.iter().enumerate().map(|(m, r)| (2 * m + 1) as f64 * r * r).sum::<f64>()
}

/// Local search over `a_0, ..., a_{2N}` at unit budget; see
/// [`solve_general_modes_with`].
pub fn solve_general_modes(n: usize, model: Model, start: &ModeCoefficients) -> Result<SolveReport> {
    solve_general_modes_with(n, start, GeneralOptions::new(model))
}

/// Coordinate descent over the shape ratios `a_{2m}/a_0`; after every trial
/// move the loading is scaled onto the weight boundary by bisection in `a_0`
/// (for fixed lift, a smaller `a_0` means a longer span). Moves are accepted
/// only when they lower the drag, so the recorded history never increases.
/// Finds a local optimum only. `Gamma` may change sign.
pub fn solve_general_modes_with(n: usize, start: &ModeCoefficients, opts: GeneralOptions) -> Result<SolveReport> {
    if n > DEFAULT_MAX_MODES {
        return Err(Error::InvalidInput(format!("N = {n} exceeds {DEFAULT_MAX_MODES}")));
    }
    if start.truncation() > n {
        return Err(Error::InvalidInput(format!(
            "start has {} modes but N = {n}",
            start.truncation() + 1
        )));
    }
    let a0 = start.a0();
    if !(a0 > 0.0) {
        return Err(Error::Infeasible(format!("start has a0 = {a0}; the span would be infinite")));
    }
    let constraint_opts = match opts.model {
        Model::Prandtl => ConstraintOptions::lift_only(),
        Model::Improved => ConstraintOptions::self_weight(opts.weight_form),
    }
    .with_budget(opts.budget);
    let problem = RayProblem {
        evaluator: ConstraintEvaluator::new(constraint_opts)?,
        set: ConstraintSet {
            weight: true,
            noncollapse: opts.model == Model::Improved,
            gamma_nonneg: opts.gamma_nonneg,
        },
    };
    let mut shape: Vec<f64> = (0..=n).map(|m| start.get(m) / a0).collect();
    if !problem.feasible(&shape, a0) {
        return Err(Error::Infeasible("start point violates the constraints".into()));
    }
    let mut scale = problem
        .boundary(&shape, a0)
        .filter(|&s| s <= a0)
        .unwrap_or(a0);
    let mut best = shape_drag(&shape, scale);
    let mut history = vec![shape_drag(&shape, a0)];
    if best < history[0] {
        history.push(best);
    } else {
        scale = a0;
        best = history[0];
    }

    let mut steps = vec![0.05; n + 1];
    for _ in 0..opts.max_sweeps {
        let before = best;
        for j in 1..=n {
            while steps[j] > opts.step_tol {
                let mut moved = false;
                for sign in [1.0, -1.0] {
                    let mut trial = shape.clone();
                    trial[j] += sign * steps[j];
                    if let Some(s) = problem.boundary(&trial, scale) {
                        let d = shape_drag(&trial, s);
                        if d < best {
                            shape = trial;
                            scale = s;
                            best = d;
                            history.push(d);
                            moved = true;
                            break;
                        }
                    }
                }
                if moved {
                    steps[j] *= 2.0;
                    break;
                }
                steps[j] *= 0.5;
            }
        }
        // a sweep without progress leaves every step below step_tol
        if best >= before {
            break;
        }
    }

    let c = ModeCoefficients::new(shape.iter().map(|r| r * scale).collect())?;
    let b = span_for_a0(scale);
    let report = problem.evaluator.evaluate(&c, b)?;
    let mut r = SolveReport::build(SolveModel::General, c, b, report_values(&report, opts.budget));
    r.drag_history = history;
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn drag_of_mu_examples() {
        assert!((prandtl_drag_of_mu(0.0).unwrap() - 1.0 / (16.0 * PI)).abs() < 1e-15);
        assert!((prandtl_drag_of_mu(1.0).unwrap() - 1.0 / (18.0 * PI)).abs() < 1e-15);
        let r = prandtl_drag_of_mu(1.0).unwrap() / prandtl_drag_of_mu(0.0).unwrap();
        assert!((r - 8.0 / 9.0).abs() < 1e-14);
        assert!(prandtl_drag_of_mu(4.0).is_err());
        assert!(prandtl_drag_of_mu(f64::NAN).is_err());
    }

    #[test]
    fn drag_of_mu_matches_family_on_boundary() {
        // oracle: scale the (1 - mu xi^2) loading onto the closed-form boundary
        for mu in [0.0f64, 0.3, 1.0, 1.7] {
            let (a0, a2) = (1.0 - mu / 4.0, -mu / 4.0);
            // (a0 + a2) t / (2 pi^2 a0^3 t^3) = 1
            let t = ((a0 + a2) / (2.0 * PI * PI * a0.powi(3))).sqrt();
            let d = PI / 8.0 * t * t * (a0 * a0 + 3.0 * a2 * a2);
            assert!((d - prandtl_drag_of_mu(mu).unwrap()).abs() < 1e-14, "mu={mu}");
        }
    }

    #[test]
    fn baselines() {
        let e = solve_elliptic().unwrap();
        assert!((e.drag - 0.0198943678864869).abs() < 1e-9);
        assert!((e.constraint_values["total_moment"] - 1.0).abs() < 1e-9);
        assert!((e.drag_ratio_vs_elliptic - 1.0).abs() < 1e-15);
        assert_eq!(e.mu, Some(0.0));
        let p = solve_prandtl1933().unwrap();
        assert!((p.drag - 0.01768388256576).abs() < 1e-9);
        assert_eq!(p.coeffs.a2() / p.coeffs.a0(), -1.0 / 3.0);
        assert!((p.span_b - 4.0 * 3f64.sqrt()).abs() < 1e-12);
        assert!((p.drag / e.drag - 8.0 / 9.0).abs() < 1e-12);
        assert!((p.constraint_values["total_moment"] - 1.0).abs() < 1e-9);
        p.check_consistency().unwrap();
        e.check_consistency().unwrap();
    }

    #[test]
    fn improved_solver_reduces_to_prandtl_for_lift_only() {
        let spec = SweepSpec::new(Model::Prandtl).with_grid(30, 30).with_window([0.12, 0.26], [-0.1, 0.05]);
        let r = solve_improved(&spec, 1e-8).unwrap();
        assert!((r.drag - PRANDTL_DRAG).abs() < 1e-8, "{}", r.drag);
        assert_eq!(r.model, SolveModel::Prandtl);
    }

    #[test]
    fn general_two_mode_reproduces_prandtl_with_nonneg_loading() {
        let start = solve_elliptic().unwrap().coeffs;
        let opts = GeneralOptions::new(Model::Prandtl).with_gamma_nonneg(true);
        let r = solve_general_modes_with(1, &start, opts).unwrap();
        assert!((r.drag - PRANDTL_DRAG).abs() < 1e-6, "{}", r.drag);
        assert!(r.drag_history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn general_two_mode_finds_sign_changing_loading_below_prandtl() {
        let start = solve_elliptic().unwrap().coeffs;
        let r = solve_general_modes(1, Model::Prandtl, &start).unwrap();
        assert!(r.drag < PRANDTL_DRAG - 1e-4, "{}", r.drag);
        assert!(r.constraint_values["min_f"] < 0.0);
        assert!(r.drag_history.windows(2).all(|w| w[1] <= w[0]));
        // oracle: composite Simpson on the adaptive pointwise moment
        let (c, b) = (&r.coeffs, r.span_b);
        let n = 4000;
        let mut acc = 0.0;
        for i in 0..=n {
            let x = i as f64 / n as f64;
            let w = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * crate::moments::moment_lift_only(c, b, x).unwrap().abs();
        }
        assert!((b * acc / (3.0 * n as f64) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn general_errors() {
        let start = solve_elliptic().unwrap().coeffs;
        assert!(solve_general_modes(17, Model::Prandtl, &start).is_err());
        let tiny = ModeCoefficients::two_mode(0.01, 0.0).unwrap();
        assert!(matches!(solve_general_modes(1, Model::Prandtl, &tiny), Err(Error::Infeasible(_))));
        let neg = ModeCoefficients::two_mode(-0.1, 0.0).unwrap();
        assert!(solve_general_modes(1, Model::Prandtl, &neg).is_err());
    }

    #[test]
    fn model_names() {
        for m in [SolveModel::Elliptic, SolveModel::Prandtl, SolveModel::Improved, SolveModel::General] {
            assert_eq!(m.to_string().parse::<SolveModel>().unwrap(), m);
        }
    }
}
