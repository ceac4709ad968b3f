use std::collections::BTreeMap;
use std::io::Write;
use std::str::FromStr;

use serde::Serialize;

use liftline_core::circulation::{span_from_lift, ModeCoefficients, WingConfig};
use liftline_core::feasibility::{
    boundary_trace, span_for_a0, sweep, two_mode_drag, ConstraintKind, ConstraintSet, Model, SweepSpec,
    DEFAULT_REFINE_TOL,
};
use liftline_core::moments::{
    moment_lift_only_profile, moment_selfweight_ode, moment_selfweight_profile, moment_volterra_oracle, uniform_grid,
    MomentMethod, MomentProfile,
};
use liftline_core::optimizer::{
    solve_elliptic, solve_general_modes_with, solve_improved, solve_prandtl1933, GeneralOptions, SolveModel,
    SolveReport,
};
use liftline_core::selftest::{run_check, SelftestOptions, CHECK_COUNT};

use crate::args::{
    CompareArgs, Constants, Format, MomentArgs, Scaling, SelftestArgs, SolveArgs, SweepArgs, WindowArgs,
};
use crate::error::CliError;
use crate::output::{csv_document, emit, fmt_f64, json_document, sibling};

fn require_unit(constants: &Constants, what: &str) -> Result<(), CliError> {
    constants.wing_config()?;
    if constants.is_unit() {
        Ok(())
    } else {
        Err(CliError::Usage(format!("{what} is only available at unit constants")))
    }
}

fn window_spec(model: Model, w: &WindowArgs) -> SweepSpec {
    SweepSpec::new(model)
        .with_grid(w.grid.0, w.grid.1)
        .with_window(w.a0_range, w.a2_range)
        .with_weight_form(w.weight_form)
        .with_noncollapse_scale(w.noncollapse_scale)
        .with_budget(w.budget)
}

/// Settings of one solve, shared by `solve` and `compare`.
struct SolveSetup<'a> {
    window: &'a WindowArgs,
    modes: usize,
    general_model: Model,
    start: Option<&'a [f64]>,
    gamma_nonneg: bool,
    constants: &'a Constants,
}

impl SolveSetup<'_> {
    fn uses_self_weight(&self, model: SolveModel) -> bool {
        match model {
            SolveModel::Improved => true,
            SolveModel::General => self.general_model == Model::Improved,
            SolveModel::Elliptic | SolveModel::Prandtl => false,
        }
    }

    fn run(&self, model: SolveModel) -> Result<SolveReport, CliError> {
        self.constants.wing_config()?;
        if self.uses_self_weight(model) {
            require_unit(self.constants, "the self-weight model")?;
        }
        let report = match model {
            SolveModel::Elliptic => solve_elliptic()?,
            SolveModel::Prandtl => solve_prandtl1933()?,
            SolveModel::Improved => solve_improved(&window_spec(Model::Improved, self.window), DEFAULT_REFINE_TOL)?,
            SolveModel::General => {
                let start = match self.start {
                    Some(a) => ModeCoefficients::new(a.to_vec())?,
                    None => {
                        let p = solve_prandtl1933()?.coeffs;
                        ModeCoefficients::new(vec![p.a0(), p.a2()])?
                    }
                };
                let opts = GeneralOptions {
                    weight_form: self.window.weight_form,
                    ..GeneralOptions::new(self.general_model)
                        .with_budget(self.window.budget)
                        .with_gamma_nonneg(self.gamma_nonneg)
                };
                solve_general_modes_with(self.modes, &start, opts)?
            }
        };
        Ok(rescale(report, self.constants.scaling()))
    }
}

/// Unit-constant report to physical units; ratios and constraint values are unchanged.
fn rescale(mut r: SolveReport, s: Scaling) -> SolveReport {
    r.coeffs = r.coeffs.scaled(s.gamma);
    r.span_b *= s.span;
    r.drag *= s.drag;
    for d in &mut r.drag_history {
        *d *= s.drag;
    }
    r
}

fn opt_cell(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

fn solve_rows(r: &SolveReport) -> Vec<Vec<String>> {
    let mut rows = vec![
        vec!["model".to_string(), r.model.to_string()],
        vec!["span_b".into(), fmt_f64(r.span_b)],
        vec!["drag".into(), fmt_f64(r.drag)],
        vec!["mu".into(), opt_cell(r.mu)],
        vec!["drag_ratio_vs_elliptic".into(), fmt_f64(r.drag_ratio_vs_elliptic)],
        vec!["drag_ratio_vs_prandtl".into(), fmt_f64(r.drag_ratio_vs_prandtl)],
        vec!["reduction_vs_prandtl".into(), fmt_f64(r.reduction_vs_prandtl())],
    ];
    for (m, a) in r.coeffs.as_slice().iter().enumerate() {
        rows.push(vec![format!("a_{}", 2 * m), fmt_f64(*a)]);
    }
    for (k, v) in &r.constraint_values {
        rows.push(vec![format!("constraint:{k}"), fmt_f64(*v)]);
    }
    rows
}

pub fn solve(args: &SolveArgs) -> Result<(), CliError> {
    let format = args.output.resolve_format()?;
    if args.coeffs.is_some() && args.model != SolveModel::General {
        return Err(CliError::Usage("--coeffs only applies to --model general".into()));
    }
    let setup = SolveSetup {
        window: &args.window,
        modes: args.modes,
        general_model: Model::from_str(&args.general_model)?,
        start: args.coeffs.as_deref(),
        gamma_nonneg: args.gamma_nonneg,
        constants: &args.constants,
    };
    let report = setup.run(args.model)?;
    let bytes = match format {
        Format::Json => json_document(args, &report)?,
        Format::Csv => csv_document(&["field".into(), "value".into()], &solve_rows(&report))?,
    };
    emit(args.output.out.as_deref(), &bytes)
}

pub fn compare(args: &CompareArgs) -> Result<(), CliError> {
    let format = args.output.resolve_format()?;
    let setup = SolveSetup {
        window: &args.window,
        modes: 2,
        general_model: Model::Prandtl,
        start: None,
        gamma_nonneg: false,
        constants: &args.constants,
    };
    let reports = args
        .models
        .iter()
        .map(|&m| setup.run(m))
        .collect::<Result<Vec<_>, _>>()?;
    let bytes = match format {
        Format::Json => json_document(args, &reports)?,
        Format::Csv => {
            let header = [
                "model",
                "span_b",
                "drag",
                "mu",
                "drag_ratio_vs_elliptic",
                "drag_ratio_vs_prandtl",
                "coefficients",
            ]
            .map(String::from);
            let rows: Vec<Vec<String>> = reports
                .iter()
                .map(|r| {
                    let coeffs: Vec<String> = r.coeffs.as_slice().iter().map(|&a| fmt_f64(a)).collect();
                    vec![
                        r.model.to_string(),
                        fmt_f64(r.span_b),
                        fmt_f64(r.drag),
                        opt_cell(r.mu),
                        fmt_f64(r.drag_ratio_vs_elliptic),
                        fmt_f64(r.drag_ratio_vs_prandtl),
                        coeffs.join(";"),
                    ]
                })
                .collect();
            csv_document(&header, &rows)?
        }
    };
    emit(args.output.out.as_deref(), &bytes)
}

const KINDS: [ConstraintKind; 3] = [ConstraintKind::Weight, ConstraintKind::Noncollapse, ConstraintKind::GammaNonneg];

const SWEEP_HEADER: [&str; 12] = [
    "a0",
    "a2",
    "span_b",
    "drag",
    "weight_value",
    "noncollapse_margin",
    "min_f",
    "weight_ok",
    "noncollapse_ok",
    "gamma_nonneg",
    "feasible",
    "invalid",
];

#[derive(Serialize)]
struct SweepRow {
    a0: f64,
    a2: f64,
    span_b: f64,
    drag: f64,
    weight_value: f64,
    noncollapse_margin: f64,
    min_f: f64,
    weight_ok: bool,
    noncollapse_ok: bool,
    gamma_nonneg: bool,
    feasible: bool,
    invalid: bool,
}

impl SweepRow {
    fn cells(&self) -> Vec<String> {
        vec![
            fmt_f64(self.a0),
            fmt_f64(self.a2),
            fmt_f64(self.span_b),
            fmt_f64(self.drag),
            fmt_f64(self.weight_value),
            fmt_f64(self.noncollapse_margin),
            fmt_f64(self.min_f),
            self.weight_ok.to_string(),
            self.noncollapse_ok.to_string(),
            self.gamma_nonneg.to_string(),
            self.feasible.to_string(),
            self.invalid.to_string(),
        ]
    }
}

#[derive(Serialize)]
struct SweepResults {
    n0: usize,
    n2: usize,
    cells: Vec<SweepRow>,
    boundaries: BTreeMap<&'static str, Vec<[f64; 2]>>,
}

pub fn sweep_cmd(args: &SweepArgs) -> Result<(), CliError> {
    let format = args.output.resolve_format()?;
    require_unit(&args.constants, "sweep")?;
    let model = match args.model {
        SolveModel::Prandtl => Model::Prandtl,
        SolveModel::Improved => Model::Improved,
        other => return Err(CliError::Usage(format!("cannot sweep model `{other}`; use prandtl or improved"))),
    };
    let spec = window_spec(model, &args.window);
    let grid = sweep(&spec)?;
    let set = ConstraintSet::for_model(model);
    let rows: Vec<SweepRow> = grid
        .iter()
        .map(|(_, _, a0, a2, c)| SweepRow {
            a0,
            a2,
            span_b: span_for_a0(a0),
            drag: two_mode_drag(a0, a2),
            weight_value: c.value,
            noncollapse_margin: c.noncollapse_margin,
            min_f: c.min_f,
            weight_ok: c.weight,
            noncollapse_ok: c.noncollapse,
            gamma_nonneg: c.gamma_nonneg,
            feasible: c.feasible(&set),
            invalid: c.invalid,
        })
        .collect();
    let boundaries: BTreeMap<&'static str, Vec<[f64; 2]>> = KINDS
        .into_iter()
        .filter(|&k| set.contains(k))
        .map(|k| (k.name(), boundary_trace(&grid, k).into_iter().map(|(x, y)| [x, y]).collect()))
        .collect();
    let out = args.output.out.as_deref();
    match format {
        Format::Json => {
            let (n0, n2) = grid.shape();
            let results = SweepResults { n0, n2, cells: rows, boundaries };
            emit(out, &json_document(args, &results)?)
        }
        Format::Csv => {
            let header = SWEEP_HEADER.map(String::from);
            let table: Vec<Vec<String>> = rows.iter().map(SweepRow::cells).collect();
            emit(out, &csv_document(&header, &table)?)?;
            // boundary polylines go next to the grid file
            if let Some(path) = out {
                for (kind, pts) in &boundaries {
                    let pts: Vec<Vec<String>> = pts.iter().map(|p| vec![fmt_f64(p[0]), fmt_f64(p[1])]).collect();
                    let doc = csv_document(&["a0".into(), "a2".into()], &pts)?;
                    emit(Some(&sibling(path, &format!("boundary-{kind}"))), &doc)?;
                }
            }
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct Deviation {
    first: MomentMethod,
    second: MomentMethod,
    sup: f64,
}

#[derive(Serialize)]
struct NamedProfile {
    method: MomentMethod,
    values: Vec<f64>,
}

#[derive(Serialize)]
struct MomentResults {
    span_b: f64,
    xi: Vec<f64>,
    profiles: Vec<NamedProfile>,
    deviations: Vec<Deviation>,
}

fn profile(method: MomentMethod, c: &ModeCoefficients, b: f64, grid: &[f64], step: f64) -> Result<MomentProfile, CliError> {
    Ok(match method {
        MomentMethod::LiftOnly => moment_lift_only_profile(c, b, grid)?,
        MomentMethod::ClosedForm => moment_selfweight_profile(c, b, grid)?,
        MomentMethod::Ode => moment_selfweight_ode(c, b, grid, step)?,
        MomentMethod::VolterraOracle => moment_volterra_oracle(c, b, grid.len())?,
    })
}

pub fn moment(args: &MomentArgs) -> Result<(), CliError> {
    let format = args.output.resolve_format()?;
    require_unit(&args.constants, "moment")?;
    if args.points < 2 {
        return Err(CliError::Usage(format!("--points must be at least 2, got {}", args.points)));
    }
    let c = ModeCoefficients::new(args.coeffs.clone())?;
    let b = match args.span {
        Some(b) => b,
        None => span_from_lift(&c, &WingConfig::default())?,
    };
    let mut methods = Vec::new();
    for &m in &args.methods {
        if !methods.contains(&m) {
            methods.push(m);
        }
    }
    let grid = uniform_grid(args.points);
    let profiles = methods
        .iter()
        .map(|&m| profile(m, &c, b, &grid, args.ode_step))
        .collect::<Result<Vec<_>, _>>()?;
    let mut deviations = Vec::new();
    for i in 0..profiles.len() {
        for j in i + 1..profiles.len() {
            deviations.push(Deviation {
                first: methods[i],
                second: methods[j],
                sup: profiles[i].sup_deviation(&profiles[j])?,
            });
        }
    }
    let bytes = match format {
        Format::Json => {
            let results = MomentResults {
                span_b: b,
                xi: grid.clone(),
                profiles: methods
                    .iter()
                    .zip(&profiles)
                    .map(|(&method, p)| NamedProfile { method, values: p.values().to_vec() })
                    .collect(),
                deviations,
            };
            json_document(args, &results)?
        }
        Format::Csv => {
            let mut header = vec!["xi".to_string()];
            header.extend(methods.iter().map(|m| m.name().to_string()));
            header.extend(deviations.iter().map(|d| format!("dev:{}:{}", d.first, d.second)));
            let rows: Vec<Vec<String>> = (0..grid.len())
                .map(|k| {
                    let mut row = vec![fmt_f64(grid[k])];
                    row.extend(profiles.iter().map(|p| fmt_f64(p.values()[k])));
                    for i in 0..profiles.len() {
                        for j in i + 1..profiles.len() {
                            row.push(fmt_f64((profiles[i].values()[k] - profiles[j].values()[k]).abs()));
                        }
                    }
                    row
                })
                .collect();
            csv_document(&header, &rows)?
        }
    };
    emit(args.output.out.as_deref(), &bytes)
}

pub fn selftest(args: &SelftestArgs) -> Result<(), CliError> {
    let opts = SelftestOptions {
        grid: args.grid,
        variant_grid: args.variant_grid,
        perturb: args.perturb,
        ..SelftestOptions::default()
    };
    let ids: Vec<u8> = if args.checks.is_empty() {
        (1..=CHECK_COUNT).collect()
    } else {
        args.checks.clone()
    };
    if let Some(bad) = ids.iter().find(|&&id| id == 0 || id > CHECK_COUNT) {
        return Err(CliError::Usage(format!("no check numbered {bad}; checks are 1..={CHECK_COUNT}")));
    }
    let mut failed = Vec::new();
    let mut out = std::io::stdout().lock();
    for id in ids {
        let outcome = run_check(id, &opts);
        writeln!(out, "{}", outcome.line())?;
        out.flush()?;
        if !outcome.passed {
            failed.push(format!("{} ({})", outcome.id, outcome.name));
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::ChecksFailed(failed.join(", ")))
    }
}
