//! Rasters of the `(a_0, a_2)` plane: which two-mode loadings satisfy the
//! weight, non-collapse and `Gamma >= 0` constraints when the span is set by
//! the lift, `b = 4/(pi a_0)`.

use std::cmp::Ordering;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circulation::ModeCoefficients;
use crate::error::{Error, Result};
use crate::moments::{
    ConstraintEvaluator, ConstraintOptions, ConstraintReport, NoncollapseScale, WeightForm, SCAN_POINTS,
};

/// Drag tolerance used by [`min_drag_over_region`] when refining.
pub const DEFAULT_REFINE_TOL: f64 = 1e-8;

/// Which bending-moment model a sweep evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    /// Lift-only moment.
    Prandtl,
    /// Moment relieved by the wing's self weight.
    Improved,
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Model::Prandtl => "prandtl",
            Model::Improved => "improved",
        })
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "prandtl" => Ok(Model::Prandtl),
            "improved" => Ok(Model::Improved),
            other => Err(Error::InvalidInput(format!("unknown model `{other}`"))),
        }
    }
}

/// One of the three constraints tracked per cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstraintKind {
    Weight,
    Noncollapse,
    GammaNonneg,
}

impl ConstraintKind {
    pub const ALL: [ConstraintKind; 3] = [ConstraintKind::Weight, ConstraintKind::Noncollapse, ConstraintKind::GammaNonneg];

    pub fn name(self) -> &'static str {
        match self {
            ConstraintKind::Weight => "weight",
            ConstraintKind::Noncollapse => "noncollapse",
            ConstraintKind::GammaNonneg => "gamma-nonneg",
        }
    }
}

impl FromStr for ConstraintKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ConstraintKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown constraint `{s}`")))
    }
}

/// Constraints that decide feasibility. All three are always evaluated and
/// stored; this set only selects which ones count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintSet {
    pub weight: bool,
    pub noncollapse: bool,
    pub gamma_nonneg: bool,
}

impl ConstraintSet {
    pub fn for_model(model: Model) -> Self {
        match model {
            Model::Prandtl => Self { weight: true, noncollapse: false, gamma_nonneg: false },
            Model::Improved => Self { weight: true, noncollapse: true, gamma_nonneg: true },
        }
    }

    pub fn contains(&self, kind: ConstraintKind) -> bool {
        match kind {
            ConstraintKind::Weight => self.weight,
            ConstraintKind::Noncollapse => self.noncollapse,
            ConstraintKind::GammaNonneg => self.gamma_nonneg,
        }
    }
}

/// Window, resolution and model of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub a0_range: [f64; 2],
    pub a2_range: [f64; 2],
    pub n0: usize,
    pub n2: usize,
    pub model: Model,
    pub constraints: ConstraintSet,
    /// Weight expression for the improved model.
    pub weight_form: WeightForm,
    pub noncollapse_scale: NoncollapseScale,
    /// Right-hand side of the weight constraint.
    pub budget: f64,
    pub scan_points: usize,
}

impl SweepSpec {
    /// 400 x 400 over `a_0 in [0.01, 0.5]`, `a_2 in [-0.2, 0.2]`.
    pub fn new(model: Model) -> Self {
        Self {
            a0_range: [0.01, 0.5],
            a2_range: [-0.2, 0.2],
            n0: 400,
            n2: 400,
            model,
            constraints: ConstraintSet::for_model(model),
            weight_form: WeightForm::Reduced,
            noncollapse_scale: NoncollapseScale::Consistent,
            budget: 1.0,
            scan_points: SCAN_POINTS,
        }
    }

    pub fn with_grid(mut self, n0: usize, n2: usize) -> Self {
        self.n0 = n0;
        self.n2 = n2;
        self
    }

    pub fn with_window(mut self, a0_range: [f64; 2], a2_range: [f64; 2]) -> Self {
        self.a0_range = a0_range;
        self.a2_range = a2_range;
        self
    }

    pub fn with_weight_form(mut self, form: WeightForm) -> Self {
        self.weight_form = form;
        self
    }

    pub fn with_noncollapse_scale(mut self, scale: NoncollapseScale) -> Self {
        self.noncollapse_scale = scale;
        self
    }

    pub fn with_budget(mut self, budget: f64) -> Self {
        self.budget = budget;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n0 < 2 || self.n2 < 2 {
            return Err(Error::InvalidInput(format!("grid counts must be >= 2, got {}x{}", self.n0, self.n2)));
        }
        let [a0_lo, a0_hi] = self.a0_range;
        let [a2_lo, a2_hi] = self.a2_range;
        if ![a0_lo, a0_hi, a2_lo, a2_hi].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidInput("sweep window must be finite".into()));
        }
        if !(a0_lo > 0.0) {
            return Err(Error::InvalidInput(format!("a0 range must start above 0, got {a0_lo}")));
        }
        if a0_lo > a0_hi || a2_lo > a2_hi {
            return Err(Error::InvalidInput("sweep ranges must be ordered [min, max]".into()));
        }
        if !(self.budget > 0.0 && self.budget.is_finite()) {
            return Err(Error::InvalidInput("weight budget must be positive".into()));
        }
        Ok(())
    }

    pub fn constraint_options(&self) -> ConstraintOptions {
        let base = match self.model {
            Model::Prandtl => ConstraintOptions::lift_only(),
            Model::Improved => ConstraintOptions::self_weight(self.weight_form),
        };
        ConstraintOptions {
            budget: self.budget,
            scan_points: self.scan_points,
            noncollapse_scale: self.noncollapse_scale,
            ..base
        }
    }

    pub fn a0_values(&self) -> Vec<f64> {
        linspace(self.a0_range, self.n0)
    }

    pub fn a2_values(&self) -> Vec<f64> {
        linspace(self.a2_range, self.n2)
    }
}

fn linspace([lo, hi]: [f64; 2], n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
        .collect()
}

/// Lift-consistent span for a given `a_0` at unit constants.
pub fn span_for_a0(a0: f64) -> f64 {
    4.0 / (PI * a0)
}

/// `(pi/8)(a_0^2 + 3 a_2^2)`.
pub fn two_mode_drag(a0: f64, a2: f64) -> f64 {
    PI / 8.0 * (a0 * a0 + 3.0 * a2 * a2)
}

/// Stored result for one raster cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    /// Weight-constraint value (0 when `invalid`).
    pub value: f64,
    pub noncollapse_margin: f64,
    pub min_f: f64,
    pub weight: bool,
    pub noncollapse: bool,
    pub gamma_nonneg: bool,
    /// Evaluation failed; all flags are false.
    pub invalid: bool,
}

impl Cell {
    fn from_report(r: &ConstraintReport) -> Self {
        Self {
            value: r.total_moment,
            noncollapse_margin: r.noncollapse_margin,
            min_f: r.min_f,
            weight: r.weight_ok,
            noncollapse: r.noncollapse_ok,
            gamma_nonneg: r.gamma_nonneg,
            invalid: false,
        }
    }

    fn invalid() -> Self {
        Self {
            value: 0.0,
            noncollapse_margin: 0.0,
            min_f: 0.0,
            weight: false,
            noncollapse: false,
            gamma_nonneg: false,
            invalid: true,
        }
    }

    pub fn flag(&self, kind: ConstraintKind) -> bool {
        match kind {
            ConstraintKind::Weight => self.weight,
            ConstraintKind::Noncollapse => self.noncollapse,
            ConstraintKind::GammaNonneg => self.gamma_nonneg,
        }
    }

    pub fn feasible(&self, set: &ConstraintSet) -> bool {
        !self.invalid && ConstraintKind::ALL.iter().all(|&k| !set.contains(k) || self.flag(k))
    }
}

/// Raster of constraint values, row-major in `a_0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityGrid {
    pub spec: SweepSpec,
    pub a0: Vec<f64>,
    pub a2: Vec<f64>,
    pub cells: Vec<Cell>,
}

impl FeasibilityGrid {
    pub fn cell(&self, i: usize, j: usize) -> &Cell {
        &self.cells[i * self.a2.len() + j]
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.a0.len(), self.a2.len())
    }

    pub fn invalid_count(&self) -> usize {
        self.cells.iter().filter(|c| c.invalid).count()
    }

    /// `(i, j, a0, a2, cell)` in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64, f64, &Cell)> + '_ {
        let n2 = self.a2.len();
        self.cells
            .iter()
            .enumerate()
            .map(move |(k, c)| (k / n2, k % n2, self.a0[k / n2], self.a2[k % n2], c))
    }
}

/// Feasibility test at arbitrary points, shared by the sweep and the
/// refinement steps.
#[derive(Debug, Clone)]
pub struct RegionProblem {
    evaluator: ConstraintEvaluator,
    set: ConstraintSet,
}

impl RegionProblem {
    pub fn new(spec: &SweepSpec, restrict_gamma_nonneg: bool) -> Result<Self> {
        let mut set = spec.constraints;
        set.gamma_nonneg |= restrict_gamma_nonneg;
        Ok(Self {
            evaluator: ConstraintEvaluator::new(spec.constraint_options())?,
            set,
        })
    }

    pub fn evaluate(&self, a0: f64, a2: f64) -> Result<ConstraintReport> {
        if !(a0 > 0.0) {
            return Err(Error::Domain(format!("a0 = {a0} gives no finite span")));
        }
        let c = ModeCoefficients::two_mode(a0, a2)?;
        self.evaluator.evaluate(&c, span_for_a0(a0))
    }

    pub fn feasible(&self, a0: f64, a2: f64) -> bool {
        match self.evaluate(a0, a2) {
            Ok(r) => Cell::from_report(&r).feasible(&self.set),
            Err(_) => false,
        }
    }
}

/// Evaluate every cell of the raster. Rows are processed in parallel; a
/// failing cell is marked invalid rather than aborting the sweep.
pub fn sweep(spec: &SweepSpec) -> Result<FeasibilityGrid> {
    spec.validate()?;
    let evaluator = ConstraintEvaluator::new(spec.constraint_options())?;
    let a0 = spec.a0_values();
    let a2 = spec.a2_values();
    let rows: Vec<Vec<Cell>> = a0
        .par_iter()
        .map(|&x0| {
            a2.iter()
                .map(|&x2| {
                    ModeCoefficients::two_mode(x0, x2)
                        .and_then(|c| evaluator.evaluate(&c, span_for_a0(x0)))
                        .map(|r| Cell::from_report(&r))
                        .unwrap_or_else(|_| Cell::invalid())
                })
                .collect()
        })
        .collect();
    Ok(FeasibilityGrid {
        spec: *spec,
        a0,
        a2,
        cells: rows.into_iter().flatten().collect(),
    })
}

fn signed_slack(grid: &FeasibilityGrid, cell: &Cell, kind: ConstraintKind) -> f64 {
    match kind {
        ConstraintKind::Weight => grid.spec.budget - cell.value,
        ConstraintKind::Noncollapse => cell.noncollapse_margin,
        ConstraintKind::GammaNonneg => cell.min_f,
    }
}

/// Points where the constraint switches between satisfied and violated,
/// located by linear interpolation of its signed slack between neighbouring
/// cells along both axes, ordered by `a_0` (then `a_2`).
pub fn boundary_trace(grid: &FeasibilityGrid, kind: ConstraintKind) -> Vec<(f64, f64)> {
    let (n0, n2) = grid.shape();
    let mut out = Vec::new();
    let mut push = |p: (f64, f64), q: (f64, f64), gp: f64, gq: f64| {
        if (gp >= 0.0) != (gq >= 0.0) {
            let t = gp / (gp - gq);
            out.push((p.0 + t * (q.0 - p.0), p.1 + t * (q.1 - p.1)));
        }
    };
    for i in 0..n0 {
        for j in 0..n2 {
            let c = grid.cell(i, j);
            if c.invalid {
                continue;
            }
            let g = signed_slack(grid, c, kind);
            let p = (grid.a0[i], grid.a2[j]);
            if i + 1 < n0 && !grid.cell(i + 1, j).invalid {
                push(p, (grid.a0[i + 1], grid.a2[j]), g, signed_slack(grid, grid.cell(i + 1, j), kind));
            }
            if j + 1 < n2 && !grid.cell(i, j + 1).invalid {
                push(p, (grid.a0[i], grid.a2[j + 1]), g, signed_slack(grid, grid.cell(i, j + 1), kind));
            }
        }
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    out
}

/// Minimum-drag point of a region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionOptimum {
    pub a0: f64,
    pub a2: f64,
    pub drag: f64,
}

/// Lower drag wins; near-ties go to the smaller `|a_2|`.
fn better(a: (f64, f64), b: (f64, f64)) -> bool {
    let (da, db) = (two_mode_drag(a.0, a.1), two_mode_drag(b.0, b.1));
    match da.partial_cmp(&db) {
        _ if (da - db).abs() <= 1e-15 * da.max(db) => a.1.abs() < b.1.abs(),
        Some(Ordering::Less) => true,
        _ => false,
    }
}

/// Feasible grid point of least drag, refined to within `refine_tol` in drag.
///
/// Refinement re-rasterises a shrinking 9 x 9 neighbourhood of the incumbent
/// and finishes with a bisection along the steepest-descent direction of
/// `a_0^2 + 3 a_2^2`. A window dimension of zero width stays fixed.
pub fn min_drag_over_region(grid: &FeasibilityGrid, restrict_gamma_nonneg: bool) -> Result<RegionOptimum> {
    min_drag_over_region_tol(grid, restrict_gamma_nonneg, DEFAULT_REFINE_TOL)
}

/// [`min_drag_over_region`] with an explicit drag tolerance.
pub fn min_drag_over_region_tol(
    grid: &FeasibilityGrid,
    restrict_gamma_nonneg: bool,
    refine_tol: f64,
) -> Result<RegionOptimum> {
    if !(refine_tol > 0.0) {
        return Err(Error::InvalidInput("refine_tol must be positive".into()));
    }
    let problem = RegionProblem::new(&grid.spec, restrict_gamma_nonneg)?;
    let set = problem.set;
    let mut best: Option<(f64, f64)> = None;
    for (_, _, a0, a2, cell) in grid.iter() {
        if cell.feasible(&set) && best.map_or(true, |b| better((a0, a2), b)) {
            best = Some((a0, a2));
        }
    }
    let Some(mut p) = best else {
        return Err(Error::Infeasible("no feasible cell in the sweep window".into()));
    };

    let spec = &grid.spec;
    let [a0_lo, a0_hi] = spec.a0_range;
    let [a2_lo, a2_hi] = spec.a2_range;
    let mut h0 = (a0_hi - a0_lo) / (spec.n0 - 1) as f64;
    let mut h2 = (a2_hi - a2_lo) / (spec.n2 - 1) as f64;
    let spread = |p: (f64, f64), h0: f64, h2: f64| PI / 4.0 * (p.0.abs() * h0 + 3.0 * p.1.abs() * h2);
    let mut rounds = 0;
    while spread(p, h0, h2) > 0.1 * refine_tol {
        rounds += 1;
        if rounds > 200 {
            return Err(Error::NonConvergence("region refinement did not reach the tolerance".into()));
        }
        let centre = p;
        for u in -4..=4 {
            for v in -4..=4 {
                let q = (
                    (centre.0 + h0 * u as f64 / 4.0).clamp(a0_lo, a0_hi),
                    (centre.1 + h2 * v as f64 / 4.0).clamp(a2_lo, a2_hi),
                );
                if better(q, p) && problem.feasible(q.0, q.1) {
                    p = q;
                }
            }
        }
        h0 /= 3.0;
        h2 /= 3.0;
    }

    // slide along the boundary: on each ray a2 = r a0 bisect for the
    // smallest feasible a0, then golden-section search over r
    if a0_hi > a0_lo && a2_hi > a2_lo {
        let in_window = |q: (f64, f64)| q.0 >= a0_lo && q.0 <= a0_hi && q.1 >= a2_lo && q.1 <= a2_hi;
        let ok = |q: (f64, f64)| in_window(q) && problem.feasible(q.0, q.1);
        let start = p;
        let on_ray = |r: f64| -> Option<(f64, f64)> {
            let scale0 = start.0 * ((1.0 + 3.0 * (start.1 / start.0).powi(2)) / (1.0 + 3.0 * r * r)).sqrt();
            let mut hi = scale0 * 1.001;
            let mut tries = 0;
            while !ok((hi, r * hi)) {
                hi *= 1.01;
                tries += 1;
                if tries > 20 {
                    return None;
                }
            }
            let mut lo = hi * 0.99;
            tries = 0;
            while ok((lo, r * lo)) {
                hi = lo;
                lo *= 0.99;
                tries += 1;
                if tries > 20 {
                    return Some((hi, r * hi));
                }
            }
            while hi - lo > 1e-13 * hi {
                let mid = 0.5 * (lo + hi);
                if ok((mid, r * mid)) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            Some((hi, r * hi))
        };
        let cost = |r: f64| on_ray(r).map_or(f64::INFINITY, |q| two_mode_drag(q.0, q.1));
        let r0 = p.1 / p.0;
        let dr = 2.0 * ((a2_hi - a2_lo) / (spec.n2 - 1) as f64 / p.0 + (a0_hi - a0_lo) / (spec.n0 - 1) as f64 * r0.abs() / p.0);
        let (mut lo, mut hi) = (r0 - dr, r0 + dr);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let (mut x1, mut x2) = (hi - g * (hi - lo), lo + g * (hi - lo));
        let (mut f1, mut f2) = (cost(x1), cost(x2));
        while hi - lo > 1e-12 {
            if f1 <= f2 {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - g * (hi - lo);
                f1 = cost(x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + g * (hi - lo);
                f2 = cost(x2);
            }
        }
        for r in [0.5 * (lo + hi), r0] {
            if let Some(q) = on_ray(r) {
                if better(q, p) {
                    p = q;
                }
            }
        }
    }

    // final push along -grad(a0^2 + 3 a2^2)
    let dir = (
        if a0_hi > a0_lo { -p.0 } else { 0.0 },
        if a2_hi > a2_lo { -3.0 * p.1 } else { 0.0 },
    );
    let at = |s: f64| (p.0 + s * dir.0, p.1 + s * dir.1);
    if dir.0 != 0.0 || dir.1 != 0.0 {
        let (mut lo, mut hi) = (0.0, 1e-9);
        while hi < 1.0 && problem.feasible(at(hi).0, at(hi).1) {
            lo = hi;
            hi *= 2.0;
        }
        let hi_cap = hi.min(1.0);
        let mut hi = hi_cap;
        while two_mode_drag(at(lo).0, at(lo).1) - two_mode_drag(at(hi).0, at(hi).1) > 0.1 * refine_tol {
            let mid = 0.5 * (lo + hi);
            if problem.feasible(at(mid).0, at(mid).1) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        p = at(lo);
    }
    Ok(RegionOptimum { a0: p.0, a2: p.1, drag: two_mode_drag(p.0, p.1) })
}
